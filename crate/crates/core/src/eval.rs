//! Edge-selection quality: confusion counts, precision/recall sweeps, AUPR
//! and connectivity-component containment.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat::SymmetricMatrix;

/// Symmetric boolean adjacency with an always-false diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    m: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(p: usize) -> Self {
        Self { p, m: vec![false; p * p] }
    }

    /// Edges where |w_ij| exceeds `floor`, off-diagonal only.
    pub fn from_weights(w: &SymmetricMatrix, floor: f64) -> Self {
        let p = w.dim();
        let mut e = Self::empty(p);
        for i in 0..p {
            for j in (i + 1)..p {
                if w.get(i, j).abs() > floor {
                    e.insert(i, j);
                }
            }
        }
        e
    }

    /// Builds from explicit (i, j) pairs.
    pub fn from_pairs(p: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut e = Self::empty(p);
        for &(i, j) in pairs {
            if i >= p || j >= p || i == j {
                return Err(Error::dim(format!("bad edge ({i}, {j}) for p = {p}")));
            }
            e.insert(i, j);
        }
        Ok(e)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.m[i * self.p + j]
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.p && j < self.p);
        self.m[i * self.p + j] = true;
        self.m[j * self.p + i] = true;
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.m[i * self.p + j] = false;
        self.m[j * self.p + i] = false;
    }

    pub fn len(&self) -> usize {
        self.upper_pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Present edges, upper triangle (i < j), row-major order.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p).flat_map(move |i| {
            ((i + 1)..self.p).filter_map(move |j| self.contains(i, j).then_some((i, j)))
        })
    }
}

/// Binary decision counts over unordered off-diagonal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        // Precision with zero predictions is 1 by convention, keeping PR
        // curves monotone at the sparse end.
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts TP/FP/TN/FN of `est` against `truth` over pairs i < j.
pub fn confusion(est: &EdgeSet, truth: &EdgeSet) -> Result<Confusion> {
    if est.dim() != truth.dim() {
        return Err(Error::dim(format!(
            "edge sets have sizes {} and {}",
            est.dim(),
            truth.dim()
        )));
    }
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    let p = est.dim();
    for i in 0..p {
        for j in (i + 1)..p {
            match (est.contains(i, j), truth.contains(i, j)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(c)
}

/// One evaluated point of a penalty sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PrPoint {
    pub penalty: f64,
    #[serde(flatten)]
    pub confusion: Confusion,
    pub precision: f64,
    pub recall: f64,
}

/// Precision/recall curve over a penalty grid, with its AUPR.
#[derive(Debug, Clone, Serialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub aupr: f64,
    /// Grid values whose solve failed, with the error text; these points are
    /// skipped, not fatal.
    pub skipped: Vec<(f64, String)>,
}

impl PrCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("penalty,tp,fp,tn,fn,precision,recall\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                pt.penalty,
                pt.confusion.tp,
                pt.confusion.fp,
                pt.confusion.tn,
                pt.confusion.fn_,
                pt.precision,
                pt.recall
            ));
        }
        out
    }
}

/// Area under the precision/recall points by trapezoid over recall-sorted
/// unique points; duplicate recalls keep the highest precision.
pub fn aupr(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut pts: Vec<(f64, f64)> = points.to_vec(); // (recall, precision)
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (r, pr) in pts {
        match dedup.last_mut() {
            Some((lr, lp)) if *lr == r => *lp = lp.max(pr),
            _ => dedup.push((r, pr)),
        }
    }
    let mut area = 0.0;
    for w in dedup.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        area += (r1 - r0) * 0.5 * (p0 + p1);
    }
    area
}

/// Sweeps a selector over a penalty grid and scores each point against the
/// true edge set. Selector failures are logged and the point skipped.
pub fn pr_sweep<F>(
    s: &SymmetricMatrix,
    n: usize,
    truth: &EdgeSet,
    mut selector: F,
    penalty_grid: &[f64],
) -> Result<PrCurve>
where
    F: FnMut(&SymmetricMatrix, usize, f64) -> Result<EdgeSet>,
{
    if penalty_grid.is_empty() || penalty_grid.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::data("penalty grid must be nonempty and positive".to_string()));
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &rho in penalty_grid {
        match selector(s, n, rho) {
            Ok(est) => {
                let c = confusion(&est, truth)?;
                points.push(PrPoint {
                    penalty: rho,
                    confusion: c,
                    precision: c.precision(),
                    recall: c.recall(),
                });
            }
            Err(e) => {
                log::warn!("penalty sweep: skipping grid point {rho}: {e}");
                skipped.push((rho, e.to_string()));
            }
        }
    }
    let area = aupr(&points.iter().map(|pt| (pt.recall, pt.precision)).collect::<Vec<_>>());
    Ok(PrCurve { points, aupr: area, skipped })
}

/// Union-find over node indices.
struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(p: usize) -> Self {
        Self { parent: (0..p).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Result of the component-containment check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    /// Every estimated connectivity component is inside a true component.
    Holds,
    /// Witness node whose estimated component spills across true components,
    /// together with the offending edge.
    Violated { witness: usize, edge: (usize, usize) },
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Holds)
    }
}

/// True iff every estimated component is a subset of some true component.
/// Equivalently: no estimated edge joins two distinct true components.
pub fn component_containment(est: &EdgeSet, truth: &EdgeSet) -> Result<Containment> {
    if est.dim() != truth.dim() {
        return Err(Error::dim("containment: edge sets differ in size".to_string()));
    }
    let mut true_cc = DisjointSet::new(truth.dim());
    for (i, j) in truth.upper_pairs() {
        true_cc.union(i, j);
    }
    for (i, j) in est.upper_pairs() {
        if true_cc.find(i) != true_cc.find(j) {
            return Ok(Containment::Violated { witness: i, edge: (i, j) });
        }
    }
    Ok(Containment::Holds)
}
