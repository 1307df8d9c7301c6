//! Step functions on subintervals of `[0, 1]`.

use crate::graphon::{merge_edges, Partition};
use crate::{Error, Result, STRUCTURAL_TOL};

/// Step function taking `values[k]` on the half-open cell
/// `(edges[k], edges[k + 1]]`. The domain is `[edges[0], edges[n]] ⊆ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFn {
    edges: Vec<f64>,
    values: Vec<f64>,
    partition: Option<Partition>,
}

impl PiecewiseFn {
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.len() != values.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} edges for {} values (need values + 1 >= 2)",
                edges.len(),
                values.len()
            )));
        }
        if edges[0] < -STRUCTURAL_TOL || edges[edges.len() - 1] > 1.0 + STRUCTURAL_TOL {
            return Err(Error::InvalidFunction("grid leaves [0, 1]".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidFunction("grid is not strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite value".into()));
        }
        let mut edges = edges;
        let last = edges.len() - 1;
        edges[0] = edges[0].max(0.0);
        edges[last] = edges[last].min(1.0);
        Ok(PiecewiseFn { edges, values, partition: None })
    }

    pub fn constant(c: f64) -> Self {
        PiecewiseFn { edges: vec![0.0, 1.0], values: vec![c], partition: None }
    }

    /// `values[i]` on `(i/M, (i+1)/M]` for `M = values.len()`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::InvalidFunction("no values".into()));
        }
        PiecewiseFn::new(uniform_edges(m), values)
    }

    /// Step approximation of `f` on `n` uniform cells, valued at cell midpoints
    /// (exact cell averages for affine `f`).
    pub fn from_fn_midpoints(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|i| f((i as f64 + 0.5) / n as f64)).collect();
        PiecewiseFn::uniform(values)
    }

    /// Values `values[j]` on group `j` of `p`, tagged with `p`.
    pub fn from_group_values(p: &Partition, values: &[f64]) -> Result<Self> {
        if values.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: values.len() });
        }
        Ok(PiecewiseFn::new(p.breakpoints().to_vec(), values.to_vec())?.with_partition(p.clone()))
    }

    pub fn with_partition(mut self, p: Partition) -> Self {
        self.partition = Some(p);
        self
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }

    pub fn covers_unit_interval(&self) -> bool {
        let (a, b) = self.domain();
        a.abs() <= STRUCTURAL_TOL && (b - 1.0).abs() <= STRUCTURAL_TOL
    }

    pub fn cell_widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    /// Value at `x`; points outside the domain evaluate to 0.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        if x < a || x > b {
            return 0.0;
        }
        let k = self.edges[1..].partition_point(|&e| e < x);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.cell_widths().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// `∫ f²`.
    pub fn energy(&self) -> f64 {
        self.cell_widths().zip(&self.values).map(|(w, v)| w * v * v).sum()
    }

    pub fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> PiecewiseFn {
        PiecewiseFn {
            edges: self.edges.clone(),
            values: self.values.iter().enumerate().map(|(k, &v)| f(k, v)).collect(),
            partition: self.partition.clone(),
        }
    }

    /// Same function on the union of its grid and `extra` breakpoints that
    /// fall inside the domain.
    pub fn refine_with(&self, extra: &[f64]) -> PiecewiseFn {
        let (a, b) = self.domain();
        let inner: Vec<f64> = extra.iter().copied().filter(|&x| x > a && x < b).collect();
        let edges = merge_edges(&self.edges, &inner);
        let values = edges.windows(2).map(|w| self.eval(0.5 * (w[0] + w[1]))).collect();
        PiecewiseFn { edges, values, partition: self.partition.clone() }
    }

    /// Exact averages of `self` over the cells of `target` (which must lie in
    /// the domain).
    pub fn cell_averages(&self, target: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.domain();
        if target.len() < 2 || target[0] < a - STRUCTURAL_TOL || target[target.len() - 1] > b + STRUCTURAL_TOL {
            return Err(Error::IncompatibleDomains("target grid leaves the function domain".into()));
        }
        let mut out = Vec::with_capacity(target.len() - 1);
        let mut k = 0;
        for w in target.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while k + 1 < self.edges.len() - 1 && self.edges[k + 1] <= lo {
                k += 1;
            }
            let mut acc = 0.0;
            let mut j = k;
            while j < self.values.len() && self.edges[j] < hi {
                let overlap = self.edges[j + 1].min(hi) - self.edges[j].max(lo);
                if overlap > 0.0 {
                    acc += overlap * self.values[j];
                }
                j += 1;
            }
            out.push(acc / (hi - lo));
        }
        Ok(out)
    }
}

pub(crate) fn uniform_edges(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

/// `‖f - h‖₂`, computed exactly on the common refinement of both grids.
pub fn l2_distance(f: &PiecewiseFn, h: &PiecewiseFn) -> Result<f64> {
    let (fa, fb) = f.domain();
    let (ha, hb) = h.domain();
    if (fa - ha).abs() > STRUCTURAL_TOL || (fb - hb).abs() > STRUCTURAL_TOL {
        return Err(Error::IncompatibleDomains(format!("[{fa}, {fb}] vs [{ha}, {hb}]")));
    }
    let edges = merge_edges(&f.edges, &h.edges);
    let s: f64 = edges
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let d = f.eval(mid) - h.eval(mid);
            (w[1] - w[0]) * d * d
        })
        .sum();
    Ok(s.sqrt())
}
