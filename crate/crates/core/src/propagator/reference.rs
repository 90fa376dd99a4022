//! Literal Taylor-layer evaluation: explicit sum over `k` of
//! `χ · phases · Π f_{M_s, m_s, σ_s}(t_s)`, one kernel call per chain.
//!
//! Exponential in `M`; used to cross-check the transfer evaluator.

use crate::combinatorics::{chi_bases, chi_from_bases, coverage, h_general, m_from_coverage, ordered_k_sum, pair_count, ZVector};
use crate::error::{Error, Result};
use crate::kernel::f_eval;
use crate::model::ModelSpec;
use crate::propagator::series::{coupling_prefactor, Segment};
use crate::C64;

/// Taylor data of a single effective mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorData {
    pub h: f64,
    pub bases: Vec<f64>,
    pub omega: f64,
}

impl TaylorData {
    /// Single-mode data from the spec's displacements along `states`.
    pub fn single_mode(spec: &ModelSpec, states: &[usize]) -> Result<Self> {
        if spec.n_modes() != 1 {
            return Err(Error::Unsupported(format!("explicit Taylor sum needs one mode, got {}", spec.n_modes())));
        }
        let z = ZVector::new(states.iter().map(|&j| spec.z(0, j)).collect());
        Ok(TaylorData { h: h_general(&z), bases: chi_bases(&z), omega: spec.mode_freqs[0] })
    }
}

/// Explicit-`k` evaluation of a segment list.
pub fn evaluate_with(spec: &ModelSpec, segments: &[Segment], data: &TaylorData, k_t: usize) -> Result<C64> {
    let states: Vec<usize> = segments.iter().flat_map(|s| s.states()).collect();
    let m = states.len();
    if data.bases.len() != pair_count(m) {
        return Err(Error::LengthMismatch { expected: pair_count(m), found: data.bases.len() });
    }
    let lens: Vec<usize> = segments.iter().map(Segment::len).collect();
    let (w21, scale, w) = (spec.omega21(), spec.omega_scale(), data.omega);
    let sum = ordered_k_sum(pair_count(m), k_t, |k| {
        let c = chi_from_bases(&data.bases, k).expect("length checked");
        if c == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let n = coverage(k, m).expect("length checked");
        let mut val = C64::new(c, 0.0);
        let mut start = 0;
        for (seg, &len) in segments.iter().zip(&lens) {
            let block = m_from_coverage(&n[start..start + len]);
            let t = seg.time();
            let first = states[start];
            val *= C64::from_polar(1.0, -(spec.level_freqs[first] + w * block.entries[0] as f64) * t);
            if len > 1 {
                val *= f_eval(&block, first, w, w21, scale, t);
            }
            start += len;
        }
        val
    });
    Ok(coupling_prefactor(spec, segments) * data.h.exp() * sum)
}

/// [`evaluate_with`] for a single-mode spec.
pub fn evaluate(spec: &ModelSpec, segments: &[Segment], k_t: usize) -> Result<C64> {
    let states: Vec<usize> = segments.iter().flat_map(|s| s.states()).collect();
    evaluate_with(spec, segments, &TaylorData::single_mode(spec, &states)?, k_t)
}
