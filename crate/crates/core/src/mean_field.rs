//! Closed-form solution of the graphon Cauchy problem for step graphons.
//!
//! `L²(0,1)` splits into the group-constant functions and, for every group,
//! the zero-mean functions supported on it. Both pieces are invariant under
//! the dynamics: group means evolve by `exp(-Δ t)` with `Δ` the Laplacian of
//! the group matrix, and the residual on group `j` is scaled by `exp(-μ_j t)`
//! where `μ_j` is the `j`-th row sum of the group matrix.

use nalgebra::DVector;

use crate::exec::Execution;
use crate::graphon::{laplacian, GroupMatrix, Partition, StepGraphon};
use crate::linalg::apply_exp_neg;
use crate::piecewise::PiecewiseFn;
use crate::{Error, Result, STRUCTURAL_TOL};

/// Group means plus per-group zero-mean residuals of a step function.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    partition: Partition,
    means: Vec<f64>,
    residuals: Vec<PiecewiseFn>,
}

impl Decomposition {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Residual of group `j`, defined on the group's interval.
    pub fn residual(&self, j: usize) -> &PiecewiseFn {
        &self.residuals[j]
    }

    pub fn residuals(&self) -> &[PiecewiseFn] {
        &self.residuals
    }

    /// `Σ_j (means[j] + scale[j] * residual_j) 1_{group j}` on the joined grid.
    fn assemble(&self, means: &[f64], scale: &[f64]) -> PiecewiseFn {
        let mut edges = vec![0.0];
        let mut values = Vec::new();
        for (j, r) in self.residuals.iter().enumerate() {
            edges.extend_from_slice(&r.edges()[1..]);
            values.extend(r.values().iter().map(|v| means[j] + scale[j] * v));
        }
        PiecewiseFn::new(edges, values)
            .expect("residual grids tile [0, 1]")
            .with_partition(self.partition.clone())
    }

    /// Superposition of means and residuals; reproduces the decomposed function.
    pub fn reconstruct(&self) -> PiecewiseFn {
        self.assemble(&self.means, &vec![1.0; self.means.len()])
    }
}

/// Splits `u0` into exact group averages and zero-mean residuals.
pub fn decompose(u0: &PiecewiseFn, p: &Partition) -> Result<Decomposition> {
    let (lo, hi) = u0.domain();
    for j in 0..p.len() {
        let (a, b) = p.bounds(j);
        let covered = (b.min(hi) - a.max(lo)).max(0.0);
        if covered <= STRUCTURAL_TOL {
            return Err(Error::EmptyGroup { group: j });
        }
        if covered < (b - a) - STRUCTURAL_TOL {
            return Err(Error::IncompatibleDomains(format!("group {j} is only partially covered by the sample grid")));
        }
    }

    let refined = u0.refine_with(p.breakpoints());
    let edges = refined.edges();
    let values = refined.values();
    let mut means = Vec::with_capacity(p.len());
    let mut residuals = Vec::with_capacity(p.len());
    let mut k = 0;
    for j in 0..p.len() {
        let start = k;
        while k < values.len() && p.group_of(0.5 * (edges[k] + edges[k + 1])) == j {
            k += 1;
        }
        if k == start {
            return Err(Error::EmptyGroup { group: j });
        }
        let widths = edges[start..=k].windows(2).map(|w| w[1] - w[0]);
        let (mass, measure) =
            widths.zip(&values[start..k]).fold((0.0, 0.0), |(m, l), (w, v)| (m + w * v, l + w));
        let mean = mass / measure;
        means.push(mean);
        let residual = PiecewiseFn::new(edges[start..=k].to_vec(), values[start..k].iter().map(|v| v - mean).collect())?;
        residuals.push(residual);
    }
    Ok(Decomposition { partition: p.clone(), means, residuals })
}

/// `μ_j = (W_ı 1)_j`, diagonal entry included.
pub fn residual_rates(m: &GroupMatrix) -> Vec<f64> {
    m.row_sums().iter().copied().collect()
}

/// `exp(-Δ t) means0` with `Δ` the Laplacian of `m`.
pub fn evolve_means(m: &GroupMatrix, means0: &[f64], t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    if means0.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: means0.len() });
    }
    let x = DVector::from_column_slice(means0);
    Ok(apply_exp_neg(&laplacian(m), t, &x).iter().copied().collect())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Solution of the graphon Cauchy problem at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolvedState {
    pub time: f64,
    /// Group means `ū(t)`.
    pub means: Vec<f64>,
    /// `exp(-μ_j t)` per group.
    pub residual_scale: Vec<f64>,
    pub mu: Vec<f64>,
    pub solution: PiecewiseFn,
}

pub fn solve_at(g: &StepGraphon, u0: &PiecewiseFn, t: f64) -> Result<EvolvedState> {
    check_time(t)?;
    let d = decompose(u0, g.partition())?;
    evolve_decomposition(&GroupMatrix::from_graphon(g), &d, t)
}

/// [`solve_at`] for several instants, sharing one decomposition.
pub fn solve_many(g: &StepGraphon, u0: &PiecewiseFn, times: &[f64], exec: Execution) -> Result<Vec<EvolvedState>> {
    times.iter().try_for_each(|&t| check_time(t))?;
    let d = decompose(u0, g.partition())?;
    let m = GroupMatrix::from_graphon(g);
    exec.map(times.len(), |i| evolve_decomposition(&m, &d, times[i])).into_iter().collect()
}

fn evolve_decomposition(m: &GroupMatrix, d: &Decomposition, t: f64) -> Result<EvolvedState> {
    let means = evolve_means(m, d.means(), t)?;
    let mu = residual_rates(m);
    let residual_scale: Vec<f64> = mu.iter().map(|&r| (-r * t).exp()).collect();
    let solution = d.assemble(&means, &residual_scale);
    Ok(EvolvedState { time: t, means, residual_scale, mu, solution })
}

/// `‖f‖₂²`.
pub fn energy(f: &PiecewiseFn) -> f64 {
    f.energy()
}

/// `C = max_j Σ_k |b_jk| ℓ_k`, the constant in the energy growth bound.
pub fn gronwall_constant(g: &StepGraphon) -> f64 {
    g.row_bound()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn graphon(breaks: Vec<f64>, b: &[f64]) -> StepGraphon {
        let p = Partition::new(breaks).unwrap();
        let n = p.len();
        StepGraphon::with_tight_bound(p, DMatrix::from_row_slice(n, n, b)).unwrap()
    }

    #[test]
    fn decompose_constant() {
        let p = Partition::new(vec![0.0, 0.3, 0.7, 1.0]).unwrap();
        let d = decompose(&PiecewiseFn::constant(2.5), &p).unwrap();
        for &m in d.means() {
            assert_abs_diff_eq!(m, 2.5, epsilon = 1e-15);
        }
        assert!(d.residuals().iter().all(|r| r.values().iter().all(|&v| v.abs() < 1e-15)));
    }

    #[test]
    fn decompose_linear() {
        let p = Partition::uniform(2).unwrap();
        let u0 = PiecewiseFn::from_fn_midpoints(64, |x| x).unwrap();
        let d = decompose(&u0, &p).unwrap();
        assert_abs_diff_eq!(d.means()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.means()[1], 0.75, epsilon = 1e-15);
        for (j, shift) in [(0, 0.25), (1, 0.75)] {
            let r = d.residual(j);
            for (w, v) in r.edges().windows(2).zip(r.values()) {
                assert_abs_diff_eq!(*v, 0.5 * (w[0] + w[1]) - shift, epsilon = 1e-15);
            }
            assert!(r.integral().abs() < 1e-15);
        }
    }

    #[test]
    fn decompose_misaligned_grid() {
        // grid cells straddle the group boundary at 1/3
        let p = Partition::new(vec![0.0, 1.0 / 3.0, 1.0]).unwrap();
        let u0 = PiecewiseFn::uniform(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = decompose(&u0, &p).unwrap();
        // group 1: 1 on (0, 1/4], 2 on (1/4, 1/3]
        assert_abs_diff_eq!(d.means()[0], (0.25 + 2.0 / 12.0) * 3.0, epsilon = 1e-14);
        assert!(crate::l2_distance(&d.reconstruct(), &u0).unwrap() < 1e-15);
    }

    #[test]
    fn decompose_errors() {
        let p = Partition::uniform(2).unwrap();
        let left = PiecewiseFn::new(vec![0.0, 0.5], vec![1.0]).unwrap();
        assert_eq!(decompose(&left, &p), Err(Error::EmptyGroup { group: 1 }));
        let partial = PiecewiseFn::new(vec![0.0, 0.75], vec![1.0]).unwrap();
        assert!(matches!(decompose(&partial, &p), Err(Error::IncompatibleDomains(_))));
    }

    #[test]
    fn residual_rate_examples() {
        let z = GroupMatrix::from_entries(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(residual_rates(&z), vec![0.0; 3]);
        let m = GroupMatrix::from_entries(DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., -2., 1., 0., 1., 0.])).unwrap();
        assert_eq!(residual_rates(&m)[1], 0.0);
        let m = GroupMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[0., 0.75, 0.25, 0.])).unwrap();
        assert_eq!(residual_rates(&m), vec![0.75, 0.25]);
    }

    #[test]
    fn evolve_means_examples() {
        let m = GroupMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[0., 0.5, 0.5, 0.])).unwrap();
        let out = evolve_means(&m, &[1.0, -1.0], 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(out[0], e, epsilon = 1e-14);
        assert_abs_diff_eq!(out[1], -e, epsilon = 1e-14);

        let asym = GroupMatrix::from_entries(DMatrix::from_row_slice(3, 3, &[0., 0.7, -0.2, 0.1, 0., 1.3, -0.4, 0.9, 0.])).unwrap();
        for t in [0.0, 0.5, 10.0] {
            let c = evolve_means(&asym, &[1.5; 3], t).unwrap();
            c.iter().for_each(|&v| assert_abs_diff_eq!(v, 1.5, epsilon = 1e-12));
        }
        assert_eq!(evolve_means(&asym, &[1.0, 2.0, 3.0], 0.0).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(evolve_means(&asym, &[1.0, 2.0], 1.0).is_err());
        assert!(evolve_means(&asym, &[1.0, 2.0, 3.0], -1.0).is_err());
    }

    #[test]
    fn solve_trivial_cases() {
        let zero = graphon(vec![0.0, 0.4, 1.0], &[0.0; 4]);
        let u0 = PiecewiseFn::from_fn_midpoints(50, |x| (7.0 * x).sin()).unwrap();
        let s = solve_at(&zero, &u0, 5.0).unwrap();
        assert!(crate::l2_distance(&s.solution, &u0).unwrap() < 1e-15);

        let g = graphon(vec![0.0, 0.4, 1.0], &[1.0, -2.0, -2.0, 0.5]);
        let c = PiecewiseFn::constant(-3.0);
        for t in [0.0, 1.0, 4.0] {
            let s = solve_at(&g, &c, t).unwrap();
            assert!(s.solution.values().iter().all(|&v| (v + 3.0).abs() < 1e-12));
        }
        let s = solve_at(&g, &u0, 0.0).unwrap();
        assert!(crate::l2_distance(&s.solution, &u0).unwrap() < 1e-15);
    }

    #[test]
    fn threshold_means_reach_three_limits() {
        // a12 = a23 = 1, a13 = -1/2 on equal thirds: b = 3a
        let g = graphon(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0], &[0., 3., -1.5, 3., 0., 3., -1.5, 3., 0.]);
        let p = g.partition().clone();
        let u0 = PiecewiseFn::from_group_values(&p, &[1.0, 0.0, -2.0]).unwrap();
        let s = solve_at(&g, &u0, 50.0).unwrap();
        // v3 = (3/2, 0, -3/2), b(0) = -1/3
        let b0 = -1.0 / 3.0;
        let proj = (1.5 * 1.0 - 1.5 * -2.0) / 4.5;
        let expected = [b0 + 1.5 * proj, b0, b0 - 1.5 * proj];
        for (m, e) in s.means.iter().zip(expected) {
            assert_abs_diff_eq!(*m, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn solve_many_matches_solve_at() {
        let g = graphon(vec![0.0, 0.25, 1.0], &[1.0, -0.5, -0.5, 2.0]);
        let u0 = PiecewiseFn::from_fn_midpoints(40, |x| x * x).unwrap();
        let times = [0.0, 0.3, 1.0, 2.5];
        let batch = solve_many(&g, &u0, &times, Execution::Parallel).unwrap();
        for (s, &t) in batch.iter().zip(&times) {
            assert_eq!(s, &solve_at(&g, &u0, t).unwrap());
        }
    }

    fn arb_instance() -> impl Strategy<Value = (StepGraphon, PiecewiseFn)> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0.05f64..1.0, n),
                    prop::collection::vec(-2.0f64..2.0, n * n),
                    prop::collection::vec(-3.0f64..3.0, 1..48),
                )
            })
            .prop_map(|(w, raw, vals)| {
                let n = w.len();
                let total: f64 = w.iter().sum();
                let mut breaks = vec![0.0];
                let mut acc = 0.0;
                for x in &w[..n - 1] {
                    acc += x / total;
                    breaks.push(acc);
                }
                breaks.push(1.0);
                let b = DMatrix::from_fn(n, n, |i, j| raw[i.min(j) * n + i.max(j)]);
                let g = StepGraphon::new(Partition::new(breaks).unwrap(), b, 2.0).unwrap();
                (g, PiecewiseFn::uniform(vals).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mass_is_conserved((g, u0) in arb_instance(), t in 0.0f64..2.0) {
            let s = solve_at(&g, &u0, t).unwrap();
            prop_assert!((s.solution.integral() - u0.integral()).abs() < 1e-9);
        }

        #[test]
        fn semigroup((g, u0) in arb_instance(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let a = solve_at(&g, &solve_at(&g, &u0, s).unwrap().solution, t).unwrap().solution;
            let b = solve_at(&g, &u0, s + t).unwrap().solution;
            let scale = 1.0f64.max(b.energy().sqrt());
            prop_assert!(crate::l2_distance(&a, &b).unwrap() < 1e-9 * scale);
        }

        #[test]
        fn energy_bound_with_doubled_rate((g, u0) in arb_instance(), t in 0.0f64..3.0) {
            // d/dt ‖u‖² = -∫∫ W (u(x) - u(y))² <= 4C ‖u‖²
            let c = gronwall_constant(&g);
            let e = energy(&solve_at(&g, &u0, t).unwrap().solution);
            prop_assert!(e <= energy(&u0) * (4.0 * c * t).exp() * (1.0 + 1e-9) + 1e-300);
        }

        #[test]
        fn diagonal_is_irrelevant_for_means((g, u0) in arb_instance(), shift in -1.0f64..1.0, t in 0.0f64..2.0) {
            let n = g.groups();
            let b = g.blocks() + DMatrix::from_diagonal_element(n, n, shift);
            let h = StepGraphon::new(g.partition().clone(), b, 3.0).unwrap();
            let a = solve_at(&g, &u0, t).unwrap();
            let c = solve_at(&h, &u0, t).unwrap();
            for (x, y) in a.means.iter().zip(&c.means) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
            let l = g.partition().lengths();
            for j in 0..n {
                prop_assert!((c.mu[j] - a.mu[j] - shift * l[j]).abs() < 1e-12);
            }
        }

        #[test]
        fn group_constant_data_stays_group_constant((g, _u) in arb_instance(),
                                                    vals in prop::collection::vec(-2.0f64..2.0, 4), t in 0.0f64..2.0) {
            let p = g.partition().clone();
            let u0 = PiecewiseFn::from_group_values(&p, &vals[..p.len()]).unwrap();
            let s = solve_at(&g, &u0, t).unwrap();
            let d = decompose(&s.solution, &p).unwrap();
            for r in d.residuals() {
                prop_assert!(r.values().iter().all(|v| v.abs() < 1e-12 * (1.0 + s.means.iter().fold(0.0f64, |m, x| m.max(x.abs())))));
            }
        }

        #[test]
        fn group_residual_stays_in_its_group((g, u0) in arb_instance(), j in 0usize..4, t in 0.0f64..2.0) {
            let p = g.partition().clone();
            let j = j % p.len();
            let d = decompose(&u0, &p).unwrap();
            // keep only the residual of group j
            let pure = d.reconstruct().map_values(|_, _| 0.0);
            let r = d.residual(j);
            let pure = pure.refine_with(r.edges());
            let pure = pure.map_values(|k, _| {
                let w = &pure.edges()[k..k + 2];
                let mid = 0.5 * (w[0] + w[1]);
                if p.group_of(mid) == j { r.eval(mid) } else { 0.0 }
            });
            let s = solve_at(&g, &pure, t).unwrap();
            let sd = decompose(&s.solution, &p).unwrap();
            let scale = 1.0 + r.energy().sqrt() * s.residual_scale[j];
            for (k, m) in sd.means().iter().enumerate() {
                prop_assert!(m.abs() < 1e-12 * scale);
                if k != j {
                    prop_assert!(sd.residual(k).values().iter().all(|v| v.abs() < 1e-12 * scale));
                }
            }
            let expected = r.map_values(|_, v| v * s.residual_scale[j]);
            prop_assert!(crate::l2_distance(sd.residual(j), &expected).unwrap() < 1e-12 * scale);
        }
    }
}
