use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::triple::DatasetTriple;
use crate::seed;

/// Train fraction that reproduces a 1368 / 195 cut of 1563 records.
pub const REFERENCE_TRAIN_FRACTION: f64 = 1368.0 / 1563.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SplitSpec {
    /// Seeded shuffle by term. With `stratify`, each (ontology, type) group
    /// is cut at the same fraction.
    Random {
        train_fraction: f64,
        seed: u64,
        #[serde(default)]
        stratify: bool,
    },
    /// Every record of `holdout` goes to test, the rest to train.
    LeaveOneOntologyOut { holdout: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("holdout ontology {0:?} has no records")]
    UnknownHoldout(String),
}

/// Partitions records into (train, test). Both halves keep input order.
pub fn split(
    triples: &[DatasetTriple],
    spec: &SplitSpec,
) -> Result<(Vec<DatasetTriple>, Vec<DatasetTriple>), SplitError> {
    let in_train: Vec<bool> = match spec {
        SplitSpec::Random {
            train_fraction,
            seed,
            stratify,
        } => {
            let f = *train_fraction;
            if !(f > 0.0 && f < 1.0) {
                return Err(SplitError::BadFraction(f));
            }
            let mut rng = seed::rng_for(*seed, "split");
            let mut mask = vec![false; triples.len()];
            if *stratify {
                let mut groups: BTreeMap<(&str, u8), Vec<usize>> = BTreeMap::new();
                for (i, t) in triples.iter().enumerate() {
                    groups
                        .entry((t.ontology_id.as_str(), t.assigned_type.number()))
                        .or_default()
                        .push(i);
                }
                let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
                let quotas = apportion(&sizes, f);
                for (members, quota) in groups.into_values().zip(quotas) {
                    let mut members = members;
                    members.shuffle(&mut rng);
                    for &i in &members[..quota] {
                        mask[i] = true;
                    }
                }
            } else {
                let n_train = (f * triples.len() as f64).round() as usize;
                let mut order: Vec<usize> = (0..triples.len()).collect();
                order.shuffle(&mut rng);
                for &i in &order[..n_train] {
                    mask[i] = true;
                }
            }
            mask
        }
        SplitSpec::LeaveOneOntologyOut { holdout } => {
            if !triples.iter().any(|t| &t.ontology_id == holdout) {
                return Err(SplitError::UnknownHoldout(holdout.clone()));
            }
            triples.iter().map(|t| &t.ontology_id != holdout).collect()
        }
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (t, keep) in triples.iter().zip(in_train) {
        if keep {
            train.push(t.clone());
        } else {
            test.push(t.clone());
        }
    }
    Ok((train, test))
}

/// Largest-remainder apportionment: per-group train counts summing to
/// `round(fraction * total)`.
fn apportion(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(quotas.iter().sum());
    for &g in order.iter().cycle().take(sizes.len() * 2) {
        if missing == 0 {
            break;
        }
        if quotas[g] < sizes[g] {
            quotas[g] += 1;
            missing -= 1;
        }
    }
    quotas
}
