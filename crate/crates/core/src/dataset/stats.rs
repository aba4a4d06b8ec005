use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::triple::DatasetTriple;
use crate::misalignment::MisalignmentType;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub classes: usize,
    pub properties: usize,
}

impl KindCounts {
    pub fn total(&self) -> usize {
        self.classes + self.properties
    }

    fn add(&mut self, is_property: bool) {
        if is_property {
            self.properties += 1;
        } else {
            self.classes += 1;
        }
    }
}

/// Record counts per ontology and per misalignment type, split by kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_ontology: BTreeMap<String, KindCounts>,
    /// Keyed by type number 1..=4; every type is present.
    pub per_type: BTreeMap<u8, KindCounts>,
    pub totals: KindCounts,
}

pub fn stats(triples: &[DatasetTriple]) -> CorpusStats {
    let mut s = CorpusStats::default();
    for ty in MisalignmentType::ALL {
        s.per_type.insert(ty.number(), KindCounts::default());
    }
    for t in triples {
        let prop = t.term_kind.is_property();
        s.per_ontology.entry(t.ontology_id.clone()).or_default().add(prop);
        s.per_type.get_mut(&t.assigned_type.number()).expect("all types").add(prop);
        s.totals.add(prop);
    }
    s
}

fn table(header: &[String], rows: &[(&str, Vec<usize>)]) -> String {
    let mut cells: Vec<Vec<String>> = vec![header.to_vec()];
    for (label, values) in rows {
        let mut row = vec![label.to_string()];
        row.extend(values.iter().map(usize::to_string));
        cells.push(row);
    }
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        if i == 0 || i == rows.len() - 1 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "{}", rule.join("  ")).unwrap();
        }
    }
    out
}

impl CorpusStats {
    /// Two text tables: terms per ontology, then terms per misalignment type.
    pub fn render(&self) -> String {
        let mut header = vec!["Ontology".to_string()];
        header.extend(self.per_ontology.keys().cloned());
        let col = |f: fn(&KindCounts) -> usize| -> Vec<usize> { self.per_ontology.values().map(f).collect() };
        let mut out = table(
            &header,
            &[
                ("# of Classes", col(|k| k.classes)),
                ("# of Properties", col(|k| k.properties)),
                ("# of Total", col(KindCounts::total)),
            ],
        );
        out.push('\n');
        let mut header = vec![String::new()];
        header.extend(self.per_type.keys().map(|n| format!("Type {n}")));
        let col = |f: fn(&KindCounts) -> usize| -> Vec<usize> { self.per_type.values().map(f).collect() };
        out.push_str(&table(
            &header,
            &[
                ("# of Classes", col(|k| k.classes)),
                ("# of Properties", col(|k| k.properties)),
                ("# of Total", col(KindCounts::total)),
            ],
        ));
        out
    }

    /// Per-type totals next to a reference row, for reporting only.
    pub fn compare_type_totals(&self, reference: [usize; 4]) -> String {
        let mut out = String::from("type  observed  reference  difference\n");
        for (i, r) in reference.iter().enumerate() {
            let n = (i + 1) as u8;
            let observed = self.per_type.get(&n).map_or(0, KindCounts::total);
            writeln!(
                out,
                "{:<4}  {observed:>8}  {r:>9}  {:>+10}",
                n,
                observed as i64 - *r as i64
            )
            .unwrap();
        }
        out
    }
}
