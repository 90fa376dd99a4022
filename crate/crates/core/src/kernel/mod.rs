//! Interaction-time integrals
//! `f(t) = ∫_0^{t} dt_1 e^{iω_{11}t_1} ∫_0^{t_1} dt_2 e^{iω_{22}t_2} ⋯`
//! written as `Σ_j A_{0j}(t) e^{iω_{1,j−1}t}`.

pub mod appendix;

use nalgebra::DMatrix;

use crate::combinatorics::{factorial, MVector};
use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance below which a frequency is an exact zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Relative magnitude below which an unmasked frequency is routed to the
/// matrix-exponential evaluator.
pub const NEAR_ZERO: f64 = 1e-3;

/// Ratio of term magnitudes to `|f|` above which [`f_table`] switches to the matrix exponential.
pub const CANCELLATION: f64 = 1e4;

const I: C64 = C64::new(0.0, 1.0);

/// Upper triangle `ω_{kj}`, `1 ≤ k ≤ j ≤ M−1`; `ω_{kj} = 0` for `k > j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    m: usize,
    entries: Vec<f64>,
    zero_mask: Vec<bool>,
    scale: f64,
}

impl FrequencyTable {
    /// Table with `ω_{kj} = Σ_{i=k}^{j} c_i` for increments `c_1..c_{M−1}`.
    pub fn from_increments(increments: &[f64], scale: f64) -> Self {
        let m = increments.len() + 1;
        Self::from_fn(m, scale, |k, j| increments[k - 1..j].iter().sum())
    }

    /// Table from an arbitrary `ω(k, j)`, `1 ≤ k ≤ j ≤ M−1`.
    pub fn from_fn(m: usize, scale: f64, f: impl Fn(usize, usize) -> f64) -> Self {
        let n = m.saturating_sub(1);
        let mut entries = vec![0.0; n * n];
        let mut zero_mask = vec![true; n * n];
        for k in 1..=n {
            for j in k..=n {
                let w = f(k, j);
                entries[(k - 1) * n + (j - 1)] = w;
                zero_mask[(k - 1) * n + (j - 1)] = w.abs() < ZERO_TOL * scale;
            }
        }
        FrequencyTable { m, entries, zero_mask, scale }
    }

    /// Interval count `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn idx(&self, k: usize, j: usize) -> Option<usize> {
        let n = self.m - 1;
        (k >= 1 && k <= j && j <= n).then(|| (k - 1) * n + (j - 1))
    }

    /// `ω_{kj}`; masked entries read as exact zero.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        match self.idx(k, j) {
            Some(i) if !self.zero_mask[i] => self.entries[i],
            _ => 0.0,
        }
    }

    /// Unmasked stored value.
    pub fn raw(&self, k: usize, j: usize) -> f64 {
        self.idx(k, j).map_or(0.0, |i| self.entries[i])
    }

    pub fn is_zero(&self, k: usize, j: usize) -> bool {
        self.idx(k, j).is_none_or(|i| self.zero_mask[i])
    }

    /// Masked `(k, j)` pairs with `k ≤ j`, row-major.
    pub fn zero_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.m.saturating_sub(1);
        let mut out = Vec::new();
        for k in 1..=n {
            for j in k..=n {
                if self.is_zero(k, j) {
                    out.push((k, j));
                }
            }
        }
        out
    }

    /// Smallest unmasked `|ω_{kj}|` relative to the scale.
    fn min_unmasked_ratio(&self) -> f64 {
        self.entries
            .iter()
            .zip(&self.zero_mask)
            .filter(|(_, &z)| !z)
            .map(|(w, _)| w.abs() / self.scale)
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether some unmasked entry lies within [`NEAR_ZERO`] of zero.
    pub fn has_near_zero(&self) -> bool {
        self.m >= 2 && self.min_unmasked_ratio() < NEAR_ZERO
    }
}

/// `ω_{kj} = −ω Σ_{i=k}^{j} m_i − ½[(−1)^{k+σ} + (−1)^{j+σ}] ω₂₁`.
pub fn build_frequencies(m: &MVector, sigma: usize, omega: f64, omega21: f64, scale: f64) -> FrequencyTable {
    let sign = |x: usize| if (x + sigma) % 2 == 0 { 1.0 } else { -1.0 };
    FrequencyTable::from_fn(m.len(), scale, |k, j| {
        let s: i64 = m.entries[k..=j].iter().map(|&x| i64::from(x)).sum();
        -omega * s as f64 - 0.5 * (sign(k) + sign(j)) * omega21
    })
}

/// `A_{0j}(t) e^{iω_{1,j−1}t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermPolynomial {
    /// `ω_{1,j−1}` (zero for `j = 1`).
    pub frequency: f64,
    /// `a_{0j0}, a_{0j1}, …`
    pub coeffs: Vec<C64>,
}

impl TermPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0)).unwrap_or(0)
    }

    /// `A_{0j}(t)`.
    pub fn poly(&self, t: f64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    /// `A_{0j}(t) e^{iω_{1,j−1}t}`.
    pub fn eval(&self, t: f64) -> C64 {
        self.poly(t) * C64::from_polar(1.0, self.frequency * t)
    }
}

/// Runs the level recursion from `A_{M−1,1} = 1` down to level 0.
pub fn build_polynomials(freqs: &FrequencyTable) -> Vec<TermPolynomial> {
    let m = freqs.m();
    // level M−1
    let mut level: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for k in 1..m {
        let row = m - k; // first frequency index of this step, M−k
        let mut next: Vec<Vec<C64>> = Vec::with_capacity(k + 1);
        next.push(Vec::new());
        let mut closing = C64::new(0.0, 0.0);
        for j in 2..=k + 1 {
            let src = &level[j - 2];
            let col = m - k + j - 2;
            let out = if freqs.is_zero(row, col) {
                let mut q = vec![C64::new(0.0, 0.0); src.len() + 1];
                for (r, &a) in src.iter().enumerate() {
                    q[r + 1] = a / (r + 1) as f64;
                }
                q
            } else {
                let iw = I * freqs.get(row, col);
                let mut q = vec![C64::new(0.0, 0.0); src.len()];
                for (r, qr) in q.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (s, &a) in src.iter().enumerate().skip(r) {
                        let sign = if (s - r) % 2 == 0 { 1.0 } else { -1.0 };
                        acc += a * (sign * factorial(s as u32) / factorial(r as u32)) / iw.powi((s - r + 1) as i32);
                    }
                    *qr = acc;
                }
                closing -= q[0];
                q
            };
            next.push(out);
        }
        next[0] = vec![closing];
        level = next;
    }
    level
        .into_iter()
        .enumerate()
        .map(|(jm1, coeffs)| TermPolynomial { frequency: if jm1 == 0 { 0.0 } else { freqs.get(1, jm1) }, coeffs })
        .collect()
}

/// `A_{0,M−m} = (−1)^m i^{1−M} / (Π_{k=1}^{M−m−1} ω_{k,M−m−1} Π_{l=M−m}^{M−1} ω_{M−m,l})`.
pub fn closed_form_all_nonzero(freqs: &FrequencyTable) -> Result<Vec<TermPolynomial>> {
    let m = freqs.m();
    if !freqs.zero_pairs().is_empty() {
        return Err(Error::InvalidArgument("closed form requires a table without zero frequencies".into()));
    }
    let pre = I.powi(1 - m as i32);
    let out = (1..=m)
        .map(|j| {
            let mm = m - j;
            let mut den = 1.0;
            for k in 1..j {
                den *= freqs.get(k, j - 1);
            }
            for l in j..m {
                den *= freqs.get(j, l);
            }
            let sign = if mm % 2 == 0 { 1.0 } else { -1.0 };
            TermPolynomial {
                frequency: if j == 1 { 0.0 } else { freqs.get(1, j - 1) },
                coeffs: vec![pre * sign / den],
            }
        })
        .collect();
    Ok(out)
}

/// Sums terms whose exponents coincide within `ZERO_TOL·scale`, keyed by the first such term.
pub fn merge_equal_frequencies(terms: &[TermPolynomial], scale: f64) -> Vec<TermPolynomial> {
    let mut out: Vec<TermPolynomial> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|o| (o.frequency - t.frequency).abs() < ZERO_TOL * scale) {
            Some(o) => {
                if o.coeffs.len() < t.coeffs.len() {
                    o.coeffs.resize(t.coeffs.len(), C64::new(0.0, 0.0));
                }
                for (a, &b) in o.coeffs.iter_mut().zip(&t.coeffs) {
                    *a += b;
                }
            }
            None => out.push(t.clone()),
        }
    }
    out
}

/// `Σ_j A_{0j}(t) e^{iω_{1,j−1}t}`.
pub fn eval_terms(terms: &[TermPolynomial], t: f64) -> C64 {
    terms.iter().map(|p| p.eval(t)).sum()
}

/// `f(t) = [exp(tZ)]_{1,M}` with `Z` upper bidiagonal, diagonal `iω_{1,q−1}` and unit superdiagonal.
///
/// Equal to the recursion result without dividing by frequency differences.
pub fn f_matrix_exp(freqs: &FrequencyTable, t: f64) -> C64 {
    let m = freqs.m();
    if m <= 1 {
        return C64::new(1.0, 0.0);
    }
    let mut z = DMatrix::<C64>::zeros(m, m);
    for q in 0..m {
        let lam = if q == 0 { 0.0 } else { freqs.get(1, q) };
        z[(q, q)] = I * lam * t;
        if q + 1 < m {
            z[(q, q + 1)] = C64::new(t, 0.0);
        }
    }
    z.exp()[(0, m - 1)]
}

/// Evaluates `f` for a table; near-zero unmasked frequencies go through [`f_matrix_exp`].
pub fn f_table(freqs: &FrequencyTable, t: f64) -> C64 {
    if freqs.m() <= 1 {
        return C64::new(1.0, 0.0);
    }
    if t == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if freqs.has_near_zero() {
        return f_matrix_exp(freqs, t);
    }
    let terms = build_polynomials(freqs);
    let value = eval_terms(&terms, t);
    let size: f64 = terms.iter().map(|p| p.poly(t).norm()).sum();
    if size > CANCELLATION * value.norm() {
        f_matrix_exp(freqs, t)
    } else {
        value
    }
}

/// `f_{M,m,σ}(t)` for the two-level alternating pattern ending in `σ`.
pub fn f_eval(m: &MVector, sigma: usize, omega: f64, omega21: f64, scale: f64, t: f64) -> C64 {
    f_table(&build_frequencies(m, sigma, omega, omega21, scale), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn table_conventions() {
        let mv = MVector { entries: vec![2, 1, -1, 0] };
        let (w, w21) = (1.3, 2.7);
        let t = build_frequencies(&mv, 1, w, w21, 3.0);
        assert_eq!(t.get(2, 1), 0.0);
        assert!((t.get(1, 1) - (-w * 1.0 - w21)).abs() < 1e-15);
        // odd j − k: no electronic part
        assert!((t.get(1, 2) - (-w * 0.0)).abs() < 1e-15);
        assert!((t.get(2, 3) - w).abs() < 1e-15);
        // ω_{12} vanishes exactly here
        assert!(t.is_zero(1, 2));
    }

    #[test]
    fn m2_closed_and_closing() {
        let t = FrequencyTable::from_increments(&[0.7], 1.0);
        let p = build_polynomials(&t);
        let a02 = 1.0 / (I * 0.7);
        assert!(close(p[1].coeffs[0], a02, 1e-15));
        assert!(close(p[0].coeffs[0], -a02, 1e-15));
        assert_eq!(closed_form_all_nonzero(&t).unwrap(), p);
    }

    #[test]
    fn m3_zero_w12() {
        let t = FrequencyTable::from_increments(&[0.9, -0.9], 1.0);
        assert!(t.is_zero(1, 2));
        let p = build_polynomials(&t);
        let w22 = t.get(2, 2);
        let x = 0.37;
        assert!(close(p[2].poly(x), -I * x / w22, 1e-14));
        assert!(close(p[0].poly(x), C64::new(1.0 / (w22 * w22), 0.0), 1e-14));
        assert_eq!(p[2].degree(), 1);
    }

    #[test]
    fn m4_all_nonzero_a04() {
        let t = FrequencyTable::from_increments(&[0.5, 1.7, -0.4], 1.0);
        let p = build_polynomials(&t);
        let want = -1.0 / (I * t.get(1, 3) * t.get(2, 3) * t.get(3, 3));
        assert!(close(p[3].coeffs[0], want, 1e-14));
    }

    #[test]
    fn degree_equals_zero_count() {
        let t = FrequencyTable::from_increments(&[0.8, -0.8, 1.1, -1.1, 2.3, -2.3], 1.0);
        let p = build_polynomials(&t);
        for j in 1..=t.m() {
            // zeros among ω_{k,j−1}, k = 1..j−1
            let zeros = (1..j).filter(|&k| t.is_zero(k, j - 1)).count();
            assert_eq!(p[j - 1].degree(), zeros, "j = {j}");
        }
    }

    #[test]
    fn trivial_values() {
        let t1 = FrequencyTable::from_increments(&[], 1.0);
        assert_eq!(f_table(&t1, 3.0), C64::new(1.0, 0.0));
        for m in 2..=7 {
            let inc: Vec<f64> = (1..m).map(|i| 0.3 + i as f64 * 0.71).collect();
            let t = FrequencyTable::from_increments(&inc, 5.0);
            assert!(eval_terms(&build_polynomials(&t), 0.0).norm() < 1e-12);
        }
    }

    /// Nested Gauss-Legendre reference for `M = 3`.
    fn quad_m3(w11: f64, w22: f64, t: f64) -> C64 {
        let (x, w) = crate::oracle::quadrature::gauss_legendre(48);
        let mut acc = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let t1 = 0.5 * t * (xi + 1.0);
            let mut inner = C64::new(0.0, 0.0);
            for (yj, wj) in x.iter().zip(&w) {
                let t2 = 0.5 * t1 * (yj + 1.0);
                inner += wj * 0.5 * t1 * C64::from_polar(1.0, w22 * t2);
            }
            acc += wi * 0.5 * t * C64::from_polar(1.0, w11 * t1) * inner;
        }
        acc
    }

    #[test]
    fn m3_against_quadrature() {
        let mv = MVector { entries: vec![1, 2, -1] };
        let (w, w21) = (1.587, 2.85);
        let t = build_frequencies(&mv, 1, w, w21, w21);
        for time in [0.5, -0.5, 1.3] {
            let f = f_eval(&mv, 1, w, w21, w21, time);
            let q = quad_m3(t.get(1, 1), t.get(2, 2), time);
            assert!(close(f, q, 1e-10), "t={time}: {f} vs {q}");
        }
    }

    proptest! {
        #[test]
        fn closed_form_equals_recursion(inc in proptest::collection::vec(0.3f64..3.0, 4), signs in proptest::collection::vec(proptest::bool::ANY, 4)) {
            let inc: Vec<f64> = inc.iter().zip(&signs).map(|(x, s)| if *s { *x } else { -*x }).collect();
            let t = FrequencyTable::from_increments(&inc, 3.0);
            prop_assume!(t.zero_pairs().is_empty() && !t.has_near_zero());
            let rec = build_polynomials(&t);
            let cf = closed_form_all_nonzero(&t).unwrap();
            for (a, b) in rec.iter().zip(&cf) {
                prop_assert!(close(a.coeffs[0], b.coeffs[0], 1e-12));
                prop_assert_eq!(a.frequency, b.frequency);
            }
        }

        #[test]
        fn matrix_exp_matches_recursion(
            inc in proptest::collection::vec(-3.0f64..3.0, 1..6),
            t in -2.0f64..2.0,
        ) {
            let table = FrequencyTable::from_increments(&inc, 3.0);
            prop_assume!(!table.has_near_zero());
            let a = eval_terms(&build_polynomials(&table), t);
            let b = f_matrix_exp(&table, t);
            prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn closed_form_rejects_masked() {
        let t = FrequencyTable::from_increments(&[1.0, -1.0], 1.0);
        assert!(closed_form_all_nonzero(&t).is_err());
    }
}
