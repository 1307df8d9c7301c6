//! Partitions, step graphons, finite networks and the structural operations
//! connecting them.

use nalgebra::{DMatrix, DVector};

use crate::exec::Execution;
use crate::{Error, Result, STRUCTURAL_TOL};

/// Breakpoints `0 = i_0 < i_1 < ... < i_N = 1` splitting `[0, 1]` into `N`
/// groups. Group `j` (zero-based) is the half-open interval
/// `(i_j, i_{j+1}]`; the point `0` belongs to the first group.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    breakpoints: Vec<f64>,
}

impl Partition {
    pub fn new(mut breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPartition("need at least two breakpoints".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPartition("non-finite breakpoint".into()));
        }
        let n = breakpoints.len();
        if breakpoints[0].abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidPartition(format!("first breakpoint is {}, expected 0", breakpoints[0])));
        }
        if (breakpoints[n - 1] - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidPartition(format!("last breakpoint is {}, expected 1", breakpoints[n - 1])));
        }
        breakpoints[0] = 0.0;
        breakpoints[n - 1] = 1.0;
        for (j, w) in breakpoints.windows(2).enumerate() {
            if w[1] - w[0] <= STRUCTURAL_TOL {
                return Err(Error::InvalidPartition(format!(
                    "group {j} has length {} (breakpoints must increase by more than {STRUCTURAL_TOL})",
                    w[1] - w[0]
                )));
            }
        }
        Ok(Partition { breakpoints })
    }

    /// `n` groups of equal length.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("zero groups".into()));
        }
        Partition::new((0..=n).map(|k| k as f64 / n as f64).collect())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Zero-based group index of `x` under the `(i_j, i_{j+1}]` convention.
    pub fn group_of(&self, x: f64) -> usize {
        let k = self.breakpoints[1..].partition_point(|&b| b < x);
        k.min(self.len() - 1)
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[j], self.breakpoints[j + 1])
    }

    /// True when every breakpoint is an integer multiple of `1/m`, so that the
    /// uniform `m`-cell grid refines this partition.
    pub fn is_conformable(&self, m: usize) -> bool {
        m >= 1
            && self.breakpoints.iter().all(|&b| {
                let s = b * m as f64;
                (s - s.round()).abs() <= 1e-9
            })
    }

    /// Union of the breakpoints of `self` and `other`.
    pub fn common_refinement(&self, other: &Partition) -> Partition {
        Partition { breakpoints: merge_edges(&self.breakpoints, &other.breakpoints) }
    }

    /// True when every breakpoint of `self` is (to tolerance) a breakpoint of `finer`.
    pub fn is_refined_by(&self, finer: &Partition) -> bool {
        self.breakpoints
            .iter()
            .all(|b| finer.breakpoints.iter().any(|f| (f - b).abs() <= STRUCTURAL_TOL))
    }
}

/// Sorted union of two sorted edge lists; entries closer than
/// [`STRUCTURAL_TOL`] are merged, keeping the one from `a`.
pub(crate) fn merge_edges(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() || k < b.len() {
        let take_a = k >= b.len() || (i < a.len() && a[i] <= b[k] + STRUCTURAL_TOL);
        let x = if take_a {
            i += 1;
            a[i - 1]
        } else {
            k += 1;
            b[k - 1]
        };
        match out.last() {
            Some(&last) if (x - last).abs() <= STRUCTURAL_TOL => {}
            _ => out.push(x),
        }
    }
    out
}

/// Symmetric kernel `W(x, y) = b[j1][j2]` on `(x, y)` in group `j1` × group `j2`,
/// bounded by `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGraphon {
    partition: Partition,
    blocks: DMatrix<f64>,
    bound: f64,
}

impl StepGraphon {
    pub fn new(partition: Partition, blocks: DMatrix<f64>, bound: f64) -> Result<Self> {
        let n = partition.len();
        if blocks.nrows() != n || blocks.ncols() != n {
            return Err(Error::InvalidGraphon(format!(
                "block matrix is {}x{}, partition has {n} groups",
                blocks.nrows(),
                blocks.ncols()
            )));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidGraphon(format!("bound must be positive, got {bound}")));
        }
        for j1 in 0..n {
            for j2 in 0..n {
                let v = blocks[(j1, j2)];
                if !v.is_finite() {
                    return Err(Error::InvalidGraphon(format!("non-finite block ({j1}, {j2})")));
                }
                if v.abs() > bound * (1.0 + STRUCTURAL_TOL) {
                    return Err(Error::InvalidGraphon(format!("|b[{j1}][{j2}]| = {} exceeds bound {bound}", v.abs())));
                }
                if (v - blocks[(j2, j1)]).abs() > STRUCTURAL_TOL * (1.0 + v.abs()) {
                    return Err(Error::InvalidGraphon(format!("blocks not symmetric at ({j1}, {j2})")));
                }
            }
        }
        Ok(StepGraphon { partition, blocks, bound })
    }

    /// Uses `K = max |b|` (or 1 for the zero graphon).
    pub fn with_tight_bound(partition: Partition, blocks: DMatrix<f64>) -> Result<Self> {
        let k = max_abs(&blocks);
        StepGraphon::new(partition, blocks, if k > 0.0 { k } else { 1.0 })
    }

    pub fn constant(c: f64) -> Result<Self> {
        StepGraphon::with_tight_bound(Partition::uniform(1)?, DMatrix::from_element(1, 1, c))
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn blocks(&self) -> &DMatrix<f64> {
        &self.blocks
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn groups(&self) -> usize {
        self.partition.len()
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.blocks[(self.partition.group_of(x), self.partition.group_of(y))]
    }

    /// Same kernel expressed on a finer partition.
    pub fn refine_to(&self, finer: &Partition) -> Result<StepGraphon> {
        if !self.partition.is_refined_by(finer) {
            return Err(Error::InvalidPartition("target partition does not refine the graphon partition".into()));
        }
        let mids: Vec<usize> = finer
            .breakpoints()
            .windows(2)
            .map(|w| self.partition.group_of(0.5 * (w[0] + w[1])))
            .collect();
        let n = finer.len();
        let blocks = DMatrix::from_fn(n, n, |r, c| self.blocks[(mids[r], mids[c])]);
        Ok(StepGraphon { partition: finer.clone(), blocks, bound: self.bound })
    }

    /// Largest absolute difference between the two kernels as functions on `[0, 1]²`.
    pub fn sup_distance(&self, other: &StepGraphon) -> f64 {
        let common = self.partition.common_refinement(&other.partition);
        let a = self.refine_to(&common).expect("common refinement refines both");
        let b = other.refine_to(&common).expect("common refinement refines both");
        max_abs(&(a.blocks - b.blocks))
    }

    /// `max_j Σ_k |b_jk| ℓ_k`, the graphon analogue of the network row bound.
    pub fn row_bound(&self) -> f64 {
        let l = self.partition.lengths();
        (0..self.groups())
            .map(|j| (0..self.groups()).map(|k| self.blocks[(j, k)].abs() * l[k]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.weighted_sum(|v| v.abs())
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|v| v * v).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        max_abs(&self.blocks)
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let l = self.partition.lengths();
        let n = self.groups();
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += f(self.blocks[(j, k)]) * l[j] * l[k];
            }
        }
        s
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Symmetric `M × M` weight matrix of a network with `M` agents.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteNetwork {
    weights: DMatrix<f64>,
    row_bound: f64,
}

impl FiniteNetwork {
    /// Validates symmetry; the row bound is the smallest admissible `C`,
    /// `max_j (1/M) Σ_k |B_jk|`.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let m = weights.nrows();
        if m == 0 || weights.ncols() != m {
            return Err(Error::InvalidNetwork(format!("weights must be square and non-empty, got {}x{}", m, weights.ncols())));
        }
        for i in 0..m {
            for j in 0..m {
                let v = weights[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidNetwork(format!("non-finite weight ({i}, {j})")));
                }
                if (v - weights[(j, i)]).abs() > STRUCTURAL_TOL * (1.0 + v.abs()) {
                    return Err(Error::InvalidNetwork(format!("weights not symmetric at ({i}, {j})")));
                }
            }
        }
        let row_bound = (0..m)
            .map(|j| weights.column(j).iter().map(|v| v.abs()).sum::<f64>() / m as f64)
            .fold(0.0, f64::max);
        Ok(FiniteNetwork { weights, row_bound })
    }

    /// Like [`FiniteNetwork::new`] but enforces a caller-supplied bound `C`.
    pub fn with_row_bound(weights: DMatrix<f64>, c: f64) -> Result<Self> {
        let mut net = FiniteNetwork::new(weights)?;
        if net.row_bound > c * (1.0 + STRUCTURAL_TOL) {
            return Err(Error::InvalidNetwork(format!("row bound {} exceeds C = {c}", net.row_bound)));
        }
        net.row_bound = c;
        Ok(net)
    }

    pub fn size(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn row_bound(&self) -> f64 {
        self.row_bound
    }
}

/// Pixel diagram of a network: the step graphon on the uniform `M`-partition
/// whose blocks are the weights.
pub fn pixel_graphon(net: &FiniteNetwork) -> StepGraphon {
    let partition = Partition::uniform(net.size()).expect("M >= 1");
    StepGraphon::with_tight_bound(partition, net.weights.clone()).expect("network weights are symmetric and finite")
}

/// Network whose weights are `g` evaluated at the cell midpoints
/// `((i - 1/2)/M, (j - 1/2)/M)`.
pub fn sample_network(g: &StepGraphon, m: usize) -> Result<FiniteNetwork> {
    sample_network_with(g, m, Execution::default())
}

pub fn sample_network_with(g: &StepGraphon, m: usize, exec: Execution) -> Result<FiniteNetwork> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one agent".into()));
    }
    let group: Vec<usize> = (0..m).map(|i| g.partition.group_of((i as f64 + 0.5) / m as f64)).collect();
    let mut data = vec![0.0; m * m];
    // column-major: column j occupies data[j*m .. (j+1)*m]
    exec.fill(&mut data, 4096, |idx, v| *v = g.blocks[(group[idx % m], group[idx / m])]);
    FiniteNetwork::new(DMatrix::from_vec(m, m, data))
}

/// `[W_ı]_{j1 j2} = b_{j1 j2} ℓ_{j2}` together with its row sums `W_ı 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrix {
    entries: DMatrix<f64>,
    row_sums: DVector<f64>,
}

impl GroupMatrix {
    pub fn from_graphon(g: &StepGraphon) -> Self {
        let l = g.partition.lengths();
        let n = g.groups();
        GroupMatrix::from_entries(DMatrix::from_fn(n, n, |j1, j2| g.blocks[(j1, j2)] * l[j2]))
            .expect("graphon blocks are finite")
    }

    /// Direct construction from interaction entries (e.g. the `a_{jk}` of the
    /// three-group analysis).
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGraphon("non-finite group matrix entry".into()));
        }
        let row_sums = DVector::from_iterator(entries.nrows(), entries.row_iter().map(|r| r.sum()));
        Ok(GroupMatrix { entries, row_sums })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn row_sums(&self) -> &DVector<f64> {
        &self.row_sums
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| (self.entries[(i, j)] - self.entries[(j, i)]).abs() <= tol))
    }
}

/// `Δ = diag(m 1) - m`. Diagonal entries of `m` cancel, so they never reach `Δ`.
pub fn laplacian(m: &GroupMatrix) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            // off-diagonal row sum, summed without the diagonal term
            (0..n).filter(|&k| k != i).map(|k| m.entries[(i, k)]).sum()
        } else {
            -m.entries[(i, j)]
        }
    })
}
