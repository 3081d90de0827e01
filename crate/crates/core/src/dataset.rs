//! Observation matrices and the empirical covariance.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mat::SymmetricMatrix;

/// n x p observation matrix; rows are i.i.d. samples, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
    pub variable_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(n: usize, p: usize, values: Vec<f64>, variable_names: Option<Vec<String>>) -> Result<Self> {
        if n < 2 || p < 1 {
            return Err(Error::data(format!(
                "dataset must have n >= 2 samples and p >= 1 variables (got n = {n}, p = {p})"
            )));
        }
        if values.len() != n * p {
            return Err(Error::dim(format!(
                "expected {} values for an {n}x{p} dataset, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite observation {v}")));
        }
        if let Some(names) = &variable_names {
            if names.len() != p {
                return Err(Error::dim(format!(
                    "{} variable names for p = {p} variables",
                    names.len()
                )));
            }
        }
        Ok(Self { n, p, values, variable_names })
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, sample: usize, var: usize) -> f64 {
        self.values[sample * self.p + var]
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.p..(sample + 1) * self.p]
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for row in self.values.chunks_exact(self.p) {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// Copy with each column centered at its mean.
    pub fn centered(&self) -> Dataset {
        let means = self.column_means();
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.p) {
            for (v, m) in row.iter_mut().zip(&means) {
                *v -= m;
            }
        }
        Dataset {
            n: self.n,
            p: self.p,
            values,
            variable_names: self.variable_names.clone(),
        }
    }

    /// Reads the CSV layout produced by [`Dataset::write_csv`]: one sample per
    /// row, optional header row of variable names, '.' decimal separator.
    /// Empty cells and non-finite values are rejected.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        let first = lines
            .peek()
            .ok_or_else(|| Error::Parse("empty dataset file".to_string()))?;
        let header_is_names = first
            .split(',')
            .any(|tok| parse_cell(tok).is_err());
        let names = if header_is_names {
            let names: Vec<String> = lines
                .next()
                .unwrap()
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            Some(names)
        } else {
            None
        };
        let mut values = Vec::new();
        let mut p = names.as_ref().map(|n| n.len());
        let mut n = 0usize;
        for line in lines {
            let row: Result<Vec<f64>> = line.split(',').map(parse_cell).collect();
            let row = row?;
            match p {
                None => p = Some(row.len()),
                Some(width) if width != row.len() => {
                    return Err(Error::Parse(format!(
                        "row {} has {} cells, expected {width}",
                        n + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            values.extend(row);
            n += 1;
        }
        Dataset::new(n, p.unwrap_or(0), values, names)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(names) = &self.variable_names {
            out.push_str(&names.join(","));
            out.push('\n');
        }
        for row in self.values.chunks_exact(self.p) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn parse_cell(tok: &str) -> Result<f64> {
    let t = tok.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty cell".to_string()));
    }
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{t}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite cell '{t}'")));
    }
    Ok(v)
}

/// Empirical covariance S = (X - mean)'(X - mean) / n.
///
/// The 1/n normalizer (not 1/(n-1)) matches the likelihood the penalty
/// calibration is built on.
pub fn empirical_covariance(data: &Dataset) -> Result<SymmetricMatrix> {
    let centered = data.centered();
    let n = centered.n as f64;
    let p = centered.p;
    SymmetricMatrix::from_fn(p, |i, j| {
        let mut s = 0.0;
        for row in centered.values.chunks_exact(p) {
            s += row[i] * row[j];
        }
        s / n
    })
}
