//! Single-time and multitime propagators as truncated Dyson series.
//!
//! A Dyson term with `M` intervals is an [`ElectronicPattern`] plus times;
//! [`series::evaluate`] sums its Taylor expansion. Orders are grouped by the
//! number of non-adiabatic insertions.

pub mod reference;
pub mod series;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{chi_dimer_bases, h_dimer, m_from_coverage, MVector};
use crate::error::{Error, Result};
use crate::model::{ElectronicPattern, ModelKind, ModelSpec};
use crate::C64;

pub use series::Segment;

/// Dyson order cutoff and Taylor cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// Highest number of non-adiabatic insertions.
    pub n_max: usize,
    /// Bound on `Σ k_i`.
    pub k_t: usize,
}

impl Truncation {
    pub fn new(n_max: usize, k_t: usize) -> Self {
        Truncation { n_max, k_t }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_max: 6, k_t: crate::DEFAULT_KT }
    }
}

/// Series value with its contribution per Dyson order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: C64,
    /// `(order, contribution)` ascending; `value` is their sum.
    pub per_order: Vec<(usize, C64)>,
    pub k_t: usize,
    pub n_max: usize,
}

impl SeriesResult {
    fn from_orders(per_order: Vec<(usize, C64)>, trunc: Truncation) -> Self {
        let value = per_order.iter().map(|(_, v)| v).sum();
        SeriesResult { value, per_order, k_t: trunc.k_t, n_max: trunc.n_max }
    }

    /// Sum of all orders `≤ order`.
    pub fn partial_sum(&self, order: usize) -> C64 {
        self.per_order.iter().filter(|(o, _)| *o <= order).map(|(_, v)| v).sum()
    }

    /// Contribution of exactly `order` (zero if absent).
    pub fn order(&self, order: usize) -> C64 {
        self.per_order.iter().filter(|(o, _)| *o == order).map(|(_, v)| v).sum()
    }

    pub fn scaled(&self, w: C64) -> Self {
        SeriesResult {
            value: self.value * w,
            per_order: self.per_order.iter().map(|&(o, v)| (o, v * w)).collect(),
            ..*self
        }
    }
}

/// Exponents of a multitime term split into left chain, central interval and right chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultitimeSplit {
    pub m_l: MVector,
    pub m_c: i32,
    pub m_r: MVector,
}

impl MultitimeSplit {
    /// Splits the global `m` (length `M_L + 1 + M_R`) after `m_l` left intervals.
    ///
    /// Each block carries its own leading entry: the number of open quanta over
    /// its first interval.
    pub fn from_global(m: &MVector, m_l: usize) -> Result<Self> {
        if m_l + 2 > m.len() {
            return Err(Error::InvalidArgument(format!("cannot split {} intervals after {m_l}", m.len())));
        }
        let mut n = Vec::with_capacity(m.len());
        let mut acc = 0;
        for &x in &m.entries {
            acc += x;
            n.push(acc);
        }
        Ok(MultitimeSplit { m_l: m_from_coverage(&n[..m_l]), m_c: n[m_l], m_r: m_from_coverage(&n[m_l + 1..]) })
    }

    /// Inverse of [`MultitimeSplit::from_global`].
    pub fn to_global(&self) -> MVector {
        let mut n = Vec::with_capacity(self.m_l.len() + 1 + self.m_r.len());
        let mut acc = 0;
        for &x in &self.m_l.entries {
            acc += x;
            n.push(acc);
        }
        n.push(self.m_c);
        acc = 0;
        for &x in &self.m_r.entries {
            acc += x;
            n.push(acc);
        }
        m_from_coverage(&n)
    }
}

fn check_excited(s: usize) -> Result<()> {
    if s == 1 || s == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("excited state must be 1 or 2, got {s}")))
    }
}

/// Evaluates labelled terms in parallel and sums them per order in list order.
fn sum_terms(spec: &ModelSpec, terms: Vec<(usize, Vec<Segment>)>, trunc: Truncation) -> SeriesResult {
    let values: Vec<C64> = terms.par_iter().map(|(_, segs)| series::evaluate(spec, segs, trunc.k_t)).collect();
    let mut per_order: Vec<(usize, C64)> = Vec::new();
    for ((order, _), v) in terms.iter().zip(values) {
        match per_order.iter_mut().find(|(o, _)| o == order) {
            Some((_, acc)) => *acc += v,
            None => per_order.push((*order, v)),
        }
    }
    per_order.sort_by_key(|(o, _)| *o);
    SeriesResult::from_orders(per_order, trunc)
}

/// Adiabatic propagator `⟨σ;0|e^{−iH_σ t}|σ;0⟩ = e^{−iω_σ t} Π_ζ exp[z²(e^{−iω_ζ t} − 1)]`.
pub fn u0(spec: &ModelSpec, sigma: usize, t: f64) -> C64 {
    let mut v = C64::from_polar(1.0, -spec.level_freqs[sigma] * t);
    for (zeta, &w) in spec.mode_freqs.iter().enumerate() {
        let z = spec.z(zeta, sigma);
        v *= (z * z * (C64::from_polar(1.0, -w * t) - 1.0)).exp();
    }
    v
}

/// Dyson terms of `⟨final;0|U(t)|initial;0⟩` up to `n_max` insertions.
pub fn single_time_terms(final_state: usize, initial: usize, t: f64, n_max: usize) -> Vec<(usize, Vec<Segment>)> {
    let other = 3 - final_state;
    let first = if final_state == initial { 0 } else { 1 };
    (first..=n_max)
        .step_by(2)
        .map(|n| (n, vec![Segment::chain(ElectronicPattern::alternating(final_state, other, n + 1).states().to_vec(), t)]))
        .collect()
}

/// `⟨σ;0|U(t)|σ;0⟩`, even orders up to `n_max`.
pub fn diag_propagator(spec: &ModelSpec, sigma: usize, t: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate()?;
    check_excited(sigma)?;
    Ok(sum_terms(spec, single_time_terms(sigma, sigma, t, trunc.n_max), trunc))
}

/// `⟨final;0|U(t)|initial;0⟩` for `final ≠ initial`, odd orders up to `n_max`.
pub fn offdiag_propagator(spec: &ModelSpec, final_state: usize, initial: usize, t: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate()?;
    check_excited(final_state)?;
    check_excited(initial)?;
    if final_state == initial {
        return Err(Error::InvalidArgument("off-diagonal propagator needs distinct states".into()));
    }
    Ok(sum_terms(spec, single_time_terms(final_state, initial, t, trunc.n_max), trunc))
}

/// Any single-time element `⟨final;0|U(t)|initial;0⟩`, all modes jointly.
pub fn multimode_propagator(spec: &ModelSpec, final_state: usize, initial: usize, t: f64, trunc: Truncation) -> Result<SeriesResult> {
    if final_state == initial {
        diag_propagator(spec, final_state, t, trunc)
    } else {
        offdiag_propagator(spec, final_state, initial, t, trunc)
    }
}

/// Symmetric-dimer element from the reduced single-mode form with
/// `h′ = −M z_e²` and the dimer bases, by explicit `k` summation.
pub fn dimer_reduced_propagator(
    spec: &ModelSpec,
    final_state: usize,
    initial: usize,
    t: f64,
    trunc: Truncation,
) -> Result<SeriesResult> {
    spec.validate()?;
    check_excited(final_state)?;
    check_excited(initial)?;
    if !spec.is_symmetric_dimer() {
        return Err(Error::Unsupported("reduced form requires a symmetric dimer".into()));
    }
    let z_e = spec.z(0, 1);
    let omega = spec.mode_freqs[0];
    let mut per_order = Vec::new();
    for (n, segs) in single_time_terms(final_state, initial, t, trunc.n_max) {
        let m = n + 1;
        let data = reference::TaylorData { h: h_dimer(m, z_e), bases: chi_dimer_bases(m, z_e, final_state == initial), omega };
        per_order.push((n, reference::evaluate_with(spec, &segs, &data, trunc.k_t)?));
    }
    Ok(SeriesResult::from_orders(per_order, trunc))
}

/// Terms of `X₁`: chain in 1 over `t_L`, ground over `t_C`, chain in 1 over `t_R`.
pub fn x1_terms(t_l: f64, t_c: f64, t_r: f64, n_max: usize) -> Vec<(usize, Vec<Segment>)> {
    let half = n_max / 2;
    let mut out = Vec::new();
    for n_l in 0..=half {
        for n_r in 0..=half - n_l {
            let segs = vec![
                Segment::chain(ElectronicPattern::alternating(1, 2, 2 * n_l + 1).states().to_vec(), t_l),
                Segment::fixed(0, t_c),
                Segment::chain(ElectronicPattern::alternating(1, 2, 2 * n_r + 1).states().to_vec(), t_r),
            ];
            out.push((2 * (n_l + n_r), segs));
        }
    }
    out
}

/// Terms of `X₂`: chain 1→2 over `t_L`, doubly excited over `t_C`, chain 2→1 over `t_R`.
pub fn x2_terms(t_l: f64, t_c: f64, t_r: f64, n_max: usize) -> Vec<(usize, Vec<Segment>)> {
    let mut out = Vec::new();
    if n_max < 2 {
        return out;
    }
    let half = n_max / 2 - 1;
    for n_l in 0..=half {
        for n_r in 0..=half - n_l {
            let segs = vec![
                Segment::chain(ElectronicPattern::alternating(1, 2, 2 * n_l + 2).states().to_vec(), t_l),
                Segment::fixed(3, t_c),
                Segment::chain(ElectronicPattern::alternating(2, 1, 2 * n_r + 2).states().to_vec(), t_r),
            ];
            out.push((2 * (n_l + n_r + 1), segs));
        }
    }
    out
}

/// `⟨1,0|U(t_L)|1⟩⟨0|U(t_C)|0⟩⟨1|U(t_R)|1,0⟩` with `n_L + n_R ≤ n_max/2`.
pub fn x1(spec: &ModelSpec, t_l: f64, t_c: f64, t_r: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate()?;
    Ok(sum_terms(spec, x1_terms(t_l, t_c, t_r, trunc.n_max), trunc))
}

/// `⟨1,0|U(t_L)|2⟩⟨3|U(t_C)|3⟩⟨2|U(t_R)|1,0⟩` with order `2(n_L + n_R + 1) ≤ n_max`.
pub fn x2(spec: &ModelSpec, t_l: f64, t_c: f64, t_r: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate_as(ModelKind::A)?;
    Ok(sum_terms(spec, x2_terms(t_l, t_c, t_r, trunc.n_max), trunc))
}

/// Explicit-`k` evaluation of a term list (single-mode models only).
pub fn reference_series(spec: &ModelSpec, terms: Vec<(usize, Vec<Segment>)>, trunc: Truncation) -> Result<SeriesResult> {
    let mut per_order: Vec<(usize, C64)> = Vec::new();
    for (order, segs) in terms {
        let v = reference::evaluate(spec, &segs, trunc.k_t)?;
        match per_order.iter_mut().find(|(o, _)| *o == order) {
            Some((_, acc)) => *acc += v,
            None => per_order.push((order, v)),
        }
    }
    per_order.sort_by_key(|(o, _)| *o);
    Ok(SeriesResult::from_orders(per_order, trunc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn split_round_trip() {
        let m = MVector { entries: vec![2, -1, 0, 3, -2, 1] };
        let s = MultitimeSplit::from_global(&m, 2).unwrap();
        assert_eq!(s.m_l.entries, vec![2, -1]);
        assert_eq!(s.m_c, 1);
        assert_eq!(s.m_r.entries, vec![4, -2, 1]);
        assert_eq!(s.to_global(), m);
        assert!(MultitimeSplit::from_global(&m, 5).is_err());
    }

    #[test]
    fn order_zero_is_u0() {
        for spec in [ModelSpec::model_a(), ModelSpec::model_b()] {
            for sigma in [1, 2] {
                for t in [0.0, 0.37, -0.8, 1.9] {
                    let r = diag_propagator(&spec, sigma, t, Truncation::new(0, 14)).unwrap();
                    assert!(close(r.value, u0(&spec, sigma, t), 1e-12), "{sigma} {t}");
                }
            }
        }
    }

    #[test]
    fn eta_zero_limits() {
        let mut s = ModelSpec::model_a();
        s.eta = C64::new(0.0, 0.0);
        let tr = Truncation::new(6, 8);
        let d = diag_propagator(&s, 1, 0.9, tr).unwrap();
        assert!((d.value - diag_propagator(&s, 1, 0.9, Truncation::new(0, 8)).unwrap().value).norm() < 1e-15);
        assert_eq!(offdiag_propagator(&s, 2, 1, 0.9, tr).unwrap().value, C64::new(0.0, 0.0));
        assert_eq!(x2(&s, -0.5, 0.3, 0.2, tr).unwrap().value, C64::new(0.0, 0.0));
    }

    #[test]
    fn transfer_matches_explicit_k_single_time() {
        let s = ModelSpec::model_a();
        for (f, i) in [(1, 1), (2, 2), (2, 1), (1, 2)] {
            for t in [0.6, -1.1] {
                let tr = Truncation::new(3, 5);
                let fast = multimode_propagator(&s, f, i, t, tr).unwrap();
                let slow = reference_series(&s, single_time_terms(f, i, t, tr.n_max), tr).unwrap();
                for ((o1, a), (o2, b)) in fast.per_order.iter().zip(&slow.per_order) {
                    assert_eq!(o1, o2);
                    assert!(close(*a, *b, 1e-10), "{f}{i} t={t} order {o1}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn transfer_matches_explicit_k_multitime() {
        let s = ModelSpec::model_a();
        let tr = Truncation::new(2, 4);
        let (tl, tc, tr_) = (-0.7, -0.4, 0.5);
        let a = x1(&s, tl, tc, tr_, tr).unwrap();
        let b = reference_series(&s, x1_terms(tl, tc, tr_, 2), tr).unwrap();
        assert!(close(a.value, b.value, 1e-10));
        let a = x2(&s, tl, tc, tr_, tr).unwrap();
        let b = reference_series(&s, x2_terms(tl, tc, tr_, 2), tr).unwrap();
        assert!(close(a.value, b.value, 1e-10));
    }

    #[test]
    fn x1_at_zero_times() {
        let s = ModelSpec::model_a();
        let r = x1(&s, 0.0, 0.0, 0.0, Truncation::default()).unwrap();
        assert!(close(r.value, C64::new(1.0, 0.0), 1e-14));
        assert_eq!(r.per_order.len(), 4);
    }

    #[test]
    fn x2_rejects_model_b() {
        assert!(x2(&ModelSpec::model_b(), 0.1, 0.1, 0.1, Truncation::default()).is_err());
    }

    #[test]
    fn dimer_reduced_equals_product() {
        let s = ModelSpec::model_b_symmetric();
        let tr = Truncation::new(3, 5);
        for (f, i) in [(1, 1), (2, 1)] {
            let a = multimode_propagator(&s, f, i, 0.8, tr).unwrap();
            let b = dimer_reduced_propagator(&s, f, i, 0.8, tr).unwrap();
            for ((_, x), (_, y)) in a.per_order.iter().zip(&b.per_order) {
                assert!(close(*x, *y, 1e-10), "{x} vs {y}");
            }
        }
        assert!(dimer_reduced_propagator(&ModelSpec::model_b(), 1, 1, 0.5, tr).is_err());
    }

    #[test]
    fn partial_sums() {
        let s = ModelSpec::model_b();
        let r = diag_propagator(&s, 1, 0.7, Truncation::new(4, 6)).unwrap();
        assert_eq!(r.per_order.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 2, 4]);
        assert!(close(r.partial_sum(4), r.value, 1e-15));
        assert!(close(r.partial_sum(0), r.order(0), 1e-15));
    }
}
