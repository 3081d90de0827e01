//! CSV import/export for matrices, edge lists and labels.
//!
//! All float formatting goes through the shortest-roundtrip `Display`, which
//! keeps seeded runs byte-identical.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::EdgeSet;
use crate::glasso::PrecisionEstimate;
use crate::mat::SymmetricMatrix;

/// p rows x p columns, no header.
pub fn matrix_to_csv(m: &SymmetricMatrix) -> String {
    let p = m.dim();
    let mut out = String::new();
    for i in 0..p {
        let cells: Vec<String> = (0..p).map(|j| format!("{}", m.get(i, j))).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(m: &SymmetricMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<SymmetricMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_csv(&text)
}

pub fn parse_matrix_csv(text: &str) -> Result<SymmetricMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|_| Error::Parse(format!("matrix row {idx} is not numeric")))?;
        rows.push(row);
    }
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Parse("matrix CSV must be square".to_string()));
    }
    SymmetricMatrix::new(p, rows.into_iter().flatten().collect())
}

/// Upper-triangle weighted edge list `i,j,weight` for entries above `floor`.
pub fn edges_to_csv(k: &SymmetricMatrix, floor: f64) -> String {
    let p = k.dim();
    let mut out = String::from("i,j,k_ij\n");
    for i in 0..p {
        for j in (i + 1)..p {
            let v = k.get(i, j);
            if v.abs() > floor {
                out.push_str(&format!("{i},{j},{v}\n"));
            }
        }
    }
    out
}

/// Boolean edge list `i,j`, upper triangle.
pub fn edge_set_to_csv(edges: &EdgeSet) -> String {
    let mut out = String::from("i,j\n");
    for (i, j) in edges.upper_pairs() {
        out.push_str(&format!("{i},{j}\n"));
    }
    out
}

/// Labels as `node,class` rows.
pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut out = String::from("node,class\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

/// Reads `node,class` rows (header optional, nodes must be 0..p in order).
pub fn parse_labels_csv(text: &str) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("node") {
            continue;
        }
        let mut parts = line.split(',');
        let node: usize = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad label row '{line}'")))?;
        let class: usize = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad label row '{line}'")))?;
        if node != labels.len() {
            return Err(Error::Parse(format!(
                "label rows must list nodes in order; saw node {node} at position {}",
                labels.len()
            )));
        }
        labels.push(class);
    }
    if labels.is_empty() {
        return Err(Error::Parse("no label rows found".to_string()));
    }
    Ok(labels)
}

pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_labels_csv(&std::fs::read_to_string(path)?)
}

impl PrecisionEstimate {
    /// K-hat edge list above the estimate's zero floor.
    pub fn edges_csv(&self) -> String {
        edges_to_csv(&self.k, self.zero_floor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip() {
        let m = SymmetricMatrix::from_fn(3, |i, j| (i + j) as f64 / 3.0 + if i == j { 1.0 } else { 0.0 }).unwrap();
        let back = parse_matrix_csv(&matrix_to_csv(&m)).unwrap();
        assert_eq!(back.as_slice(), m.as_slice());
    }

    #[test]
    fn labels_roundtrip() {
        let labels = vec![0usize, 2, 1, 1];
        let back = parse_labels_csv(&labels_to_csv(&labels)).unwrap();
        assert_eq!(back, labels);
    }

    #[test]
    fn edge_list_has_upper_triangle_only() {
        let mut k = SymmetricMatrix::identity(3);
        k.set_sym(0, 2, -0.4);
        let csv = edges_to_csv(&k, 1e-9);
        assert_eq!(csv, "i,j,k_ij\n0,2,-0.4\n");
    }

    #[test]
    fn rejects_ragged_matrix() {
        assert!(parse_matrix_csv("1.0,2.0\n3.0\n").is_err());
    }
}
