//! Published accuracies used as a static reference in rendered tables.
//!
//! Transductive SVMs are not implemented; their rows are only ever shown from
//! this table and are marked as not recomputed.

const TABLE: &str = include_str!("../reference/table1.csv");

/// Reference datasets, in column order.
pub const DATASETS: [&str; 5] = ["s1", "s2", "s3", "pima", "heart"];

/// Rows with no implementation in this crate: (key, table label).
pub const EXTERNAL_ROWS: [(&str, &str); 2] = [("tsvm-linear", "Lin. T-SVM"), ("tsvm-rbf", "RBF T-SVM")];

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCell {
    pub method: &'static str,
    pub dataset: &'static str,
    /// `(mean, std)`, or `None` where the method did not converge.
    pub value: Option<(f64, f64)>,
}

pub fn table() -> Vec<ReferenceCell> {
    TABLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&'static str> = l.split(',').collect();
            let value = match (f[2].parse::<f64>(), f[3].parse::<f64>()) {
                (Ok(m), Ok(s)) => Some((m, s)),
                _ => None,
            };
            ReferenceCell { method: f[0], dataset: f[1], value }
        })
        .collect()
}

/// Reference column for a report dataset label. Role-swapped runs have none.
pub fn dataset_key(label: &str) -> Option<&'static str> {
    let l = label.to_ascii_lowercase();
    if l.ends_with("-swapped") {
        return None;
    }
    if let Some(k) = DATASETS[..3].iter().find(|k| **k == l) {
        return Some(k);
    }
    if l.contains("pima") || l.contains("diabetes") {
        Some("pima")
    } else if l.contains("heart") {
        Some("heart")
    } else {
        None
    }
}

/// Outer `None`: no entry. Inner `None`: entry marked as not converged.
pub fn lookup(method: &str, dataset_label: &str) -> Option<Option<(f64, f64)>> {
    let d = dataset_key(dataset_label)?;
    table().into_iter().find(|c| c.method == method && c.dataset == d).map(|c| c.value)
}
