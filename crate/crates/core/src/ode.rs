//! Finite-agent opinion dynamics
//! `du_i/dt = (1/M) Σ_j B_ij (u_j - u_i)` integrated with classical RK4.

use crate::exec::Execution;
use crate::graphon::{sample_network_with, FiniteNetwork, StepGraphon};
use crate::mean_field::solve_at;
use crate::piecewise::{l2_distance, uniform_edges, PiecewiseFn};
use crate::{Error, Result};

/// Rows handed to one worker at a time when evaluating the right-hand side.
const RHS_MIN_ROWS: usize = 32;

/// Upper bound on recorded frames when `record_every` is left at its default.
pub const DEFAULT_MAX_FRAMES: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub exec: Execution,
}

impl SimConfig {
    /// Validated configuration recording at most [`DEFAULT_MAX_FRAMES`] frames.
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let mut cfg = SimConfig { dt, t_end, record_every: 1, exec: Execution::default() };
        cfg.validate()?;
        cfg.record_every = cfg.steps().div_ceil(DEFAULT_MAX_FRAMES - 1).max(1);
        Ok(cfg)
    }

    pub fn with_record_every(mut self, every: usize) -> Result<Self> {
        self.record_every = every;
        self.validate()?;
        Ok(self)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::InvalidConfig(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; the step actually taken is `t_end / steps() <= dt`.
    pub fn steps(&self) -> usize {
        if self.t_end == 0.0 {
            return 0;
        }
        let r = self.t_end / self.dt;
        ((r - 1e-9 * r.max(1.0)).ceil() as usize).max(1)
    }
}

/// Recorded states of a simulation. Frames are taken every `record_every`
/// steps starting at `t = 0`; the final state is always the last frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has the initial frame")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial frame")
    }
}

pub fn rhs(net: &FiniteNetwork, u: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    rhs_into(net, u, &mut out, Execution::default())?;
    Ok(out)
}

pub fn rhs_into(net: &FiniteNetwork, u: &[f64], out: &mut [f64], exec: Execution) -> Result<()> {
    let m = net.size();
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: u.len() });
    }
    if out.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: out.len() });
    }
    let w = net.weights().as_slice();
    let inv_m = 1.0 / m as f64;
    // B is symmetric, so row i is the contiguous column i
    exec.fill(out, RHS_MIN_ROWS, |i, o| {
        let ui = u[i];
        let s: f64 = w[i * m..(i + 1) * m].iter().zip(u).map(|(b, uj)| b * (uj - ui)).sum();
        *o = s * inv_m;
    });
    Ok(())
}

pub fn simulate(net: &FiniteNetwork, u0: &[f64], cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let m = net.size();
    if u0.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: u0.len() });
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: 0.0 });
    }
    if cfg.dt * net.row_bound() >= 1.0 {
        log::warn!("dt * C = {} >= 1; RK4 may be inaccurate", cfg.dt * net.row_bound());
    }

    let n = cfg.steps();
    let h = if n == 0 { 0.0 } else { cfg.t_end / n as f64 };
    let mut traj = Trajectory { times: vec![0.0], states: vec![u0.to_vec()] };
    let mut u = u0.to_vec();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];

    for step in 1..=n {
        rhs_into(net, &u, &mut k1, cfg.exec)?;
        axpy_into(&mut tmp, &u, 0.5 * h, &k1);
        rhs_into(net, &tmp, &mut k2, cfg.exec)?;
        axpy_into(&mut tmp, &u, 0.5 * h, &k2);
        rhs_into(net, &tmp, &mut k3, cfg.exec)?;
        axpy_into(&mut tmp, &u, h, &k3);
        rhs_into(net, &tmp, &mut k4, cfg.exec)?;
        for i in 0..m {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = if step == n { cfg.t_end } else { step as f64 * h };
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if step % cfg.record_every == 0 || step == n {
            traj.times.push(t);
            traj.states.push(u.clone());
        }
    }
    Ok(traj)
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Step function equal to `u[i]` on `(i/M, (i+1)/M]`.
pub fn embed(u: &[f64]) -> Result<PiecewiseFn> {
    PiecewiseFn::uniform(u.to_vec())
}

/// Agent opinions as averages of `u0` over the cells `(i/M, (i+1)/M]`.
pub fn discretize(u0: &PiecewiseFn, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one agent".into()));
    }
    u0.cell_averages(&uniform_edges(m))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub agents: usize,
    pub l2_error: f64,
}

/// L² distance at time `t` between the embedded `M`-agent solution and the
/// graphon solution, for each `M` in `ms`.
pub fn convergence_study(g: &StepGraphon, u0: &PiecewiseFn, ms: &[usize], t: f64, dt: f64) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(g, u0, ms, t, dt, Execution::default())
}

pub fn convergence_study_with(
    g: &StepGraphon,
    u0: &PiecewiseFn,
    ms: &[usize],
    t: f64,
    dt: f64,
    exec: Execution,
) -> Result<Vec<ConvergenceRow>> {
    if let Some(&bad) = ms.iter().find(|&&m| !g.partition().is_conformable(m)) {
        return Err(Error::NotConformable { agents: bad });
    }
    let cfg = SimConfig::new(dt, t)?.with_execution(Execution::Sequential);
    let cfg = cfg.with_record_every(cfg.steps().max(1))?;
    let exact = solve_at(g, u0, t)?.solution;
    exec.map(ms.len(), |k| {
        let m = ms[k];
        let net = sample_network_with(g, m, Execution::Sequential)?;
        let start = discretize(u0, m)?;
        let traj = simulate(&net, &start, &cfg)?;
        let l2_error = l2_distance(&embed(traj.final_state())?, &exact)?;
        Ok(ConvergenceRow { agents: m, l2_error })
    })
    .into_iter()
    .collect()
}
