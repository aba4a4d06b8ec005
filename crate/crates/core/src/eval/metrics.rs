use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::similarity::{Similarity, SimilarityError};

pub const DEFAULT_TAU: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("reference question set is empty")]
    EmptyReference,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("similarity matrix has wrong shape")]
    MatrixShape,
}

/// Scores of one term's generated questions against its references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEvalResult {
    pub n_gen: usize,
    pub n_gt: usize,
    /// Indices of generated questions with some reference at or above tau.
    pub valid_gen: BTreeSet<usize>,
    /// Indices of references with some generated question at or above tau.
    pub matched_gt: BTreeSet<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Best similarity of each generated question to any reference.
    pub per_gen_max_sim: Vec<f64>,
    /// Set when nothing was generated; precision is then reported as 0.
    pub empty_generation: bool,
}

/// Indices `i` with `max_j m[i][j] >= tau`.
pub fn valid_from_matrix(m: &[Vec<f64>], tau: f64) -> BTreeSet<usize> {
    m.iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|&s| s >= tau))
        .map(|(i, _)| i)
        .collect()
}

/// Indices `j` with `max_i m[i][j] >= tau`.
pub fn matched_from_matrix(m: &[Vec<f64>], n_gt: usize, tau: f64) -> BTreeSet<usize> {
    (0..n_gt)
        .filter(|&j| m.iter().any(|row| row[j] >= tau))
        .collect()
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub fn valid_set(
    gen: &[String],
    gt: &[String],
    tau: f64,
    sim: &dyn Similarity,
) -> Result<BTreeSet<usize>, EvalError> {
    Ok(valid_from_matrix(&sim.matrix(gen, gt)?, tau))
}

pub fn matched_set(
    gen: &[String],
    gt: &[String],
    tau: f64,
    sim: &dyn Similarity,
) -> Result<BTreeSet<usize>, EvalError> {
    Ok(matched_from_matrix(&sim.matrix(gen, gt)?, gt.len(), tau))
}

/// Scores from a precomputed `gen x gt` similarity matrix.
pub fn evaluate_matrix(
    m: &[Vec<f64>],
    n_gen: usize,
    n_gt: usize,
    tau: f64,
) -> Result<TermEvalResult, EvalError> {
    if n_gt == 0 {
        return Err(EvalError::EmptyReference);
    }
    if m.len() != n_gen || m.iter().any(|row| row.len() != n_gt) {
        return Err(EvalError::MatrixShape);
    }
    let valid_gen = valid_from_matrix(m, tau);
    let matched_gt = matched_from_matrix(m, n_gt, tau);
    let precision = if n_gen == 0 {
        0.0
    } else {
        valid_gen.len() as f64 / n_gen as f64
    };
    let recall = matched_gt.len() as f64 / n_gt as f64;
    let per_gen_max_sim = m
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(TermEvalResult {
        n_gen,
        n_gt,
        valid_gen,
        matched_gt,
        precision,
        recall,
        f1: f1_score(precision, recall),
        per_gen_max_sim,
        empty_generation: n_gen == 0,
    })
}

pub fn evaluate_term(
    gen: &[String],
    gt: &[String],
    tau: f64,
    sim: &dyn Similarity,
) -> Result<TermEvalResult, EvalError> {
    if gt.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    evaluate_matrix(&sim.matrix(gen, gt)?, gen.len(), gt.len(), tau)
}
