//! Exact cut norm of step graphons.
//!
//! For a step graphon the objective `|∫_{S×T} W|` is bilinear in the measure
//! fractions `|S ∩ group_j| / ℓ_j`, so the supremum is attained when `S` and
//! `T` are unions of groups. We enumerate every union for `S`; for fixed `S`
//! the best `T` keeps the groups whose column contribution has the sign of
//! the larger of the positive and negative totals.

use crate::exec::Execution;
use crate::graphon::StepGraphon;
use crate::{Error, Result};

/// Largest number of groups accepted by the `2^N` enumeration.
pub const MAX_CUT_GROUPS: usize = 20;

const CHUNKS: usize = 256;

/// Cut norm together with a maximising pair of group sets (bit `j` set means
/// group `j` belongs to the set).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutNorm {
    pub value: f64,
    pub rows: u32,
    pub cols: u32,
}

pub fn cut_norm(g: &StepGraphon) -> Result<f64> {
    cut_norm_with(g, Execution::default()).map(|c| c.value)
}

pub fn cut_norm_with(g: &StepGraphon, exec: Execution) -> Result<CutNorm> {
    let n = g.groups();
    if n > MAX_CUT_GROUPS {
        return Err(Error::TooManyGroups { got: n, max: MAX_CUT_GROUPS });
    }
    let l = g.partition().lengths();
    let b = g.blocks();
    // weighted[j][k] = b_jk ℓ_j ℓ_k
    let weighted: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|k| b[(j, k)] * l[j] * l[k]).collect()).collect();

    let total: usize = 1 << n;
    let chunk = total.div_ceil(CHUNKS).max(1);
    let chunks = total.div_ceil(chunk);
    let best_per_chunk = exec.map(chunks, |c| {
        let mut col = vec![0.0; n];
        let mut best = CutNorm { value: 0.0, rows: 0, cols: 0 };
        for mask in c * chunk..((c + 1) * chunk).min(total) {
            col.iter_mut().for_each(|v| *v = 0.0);
            for (j, row) in weighted.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    col.iter_mut().zip(row).for_each(|(acc, w)| *acc += w);
                }
            }
            let (mut pos, mut neg, mut pos_mask, mut neg_mask) = (0.0, 0.0, 0u32, 0u32);
            for (k, &v) in col.iter().enumerate() {
                if v > 0.0 {
                    pos += v;
                    pos_mask |= 1 << k;
                } else if v < 0.0 {
                    neg -= v;
                    neg_mask |= 1 << k;
                }
            }
            let (value, cols) = if pos >= neg { (pos, pos_mask) } else { (neg, neg_mask) };
            if value > best.value {
                best = CutNorm { value, rows: mask as u32, cols };
            }
        }
        best
    });
    Ok(best_per_chunk
        .into_iter()
        .fold(CutNorm { value: 0.0, rows: 0, cols: 0 }, |a, c| if c.value > a.value { c } else { a }))
}
