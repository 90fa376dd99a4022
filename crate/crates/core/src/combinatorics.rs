//! Taylor multi-indices of the adiabatic kernel and their prefactors.
//!
//! For `M` intervals there are `M+1` boundaries `a = 0..M` with boundary
//! displacement `α_a = z_{j_a} − z_{j_{a+1}}` (`j_0 = j_{M+1} = 0`). Slot
//! `i` of a [`KVector`] belongs to the run of consecutive interval factors
//! `v_q ⋯ v_{q+p−1}`, ordered by run length `p` and then start `q`, i.e.
//! `i = w + q − 1` with `w = (p−1)M − (p−1)(p−2)/2`. The run is bounded by
//! boundaries `(q−1, q+p−1)` and its Taylor base is `−α_{q−1} α_{q+p−1}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ElectronicPattern, ModelSpec};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KVector {
    pub entries: Vec<u32>,
}

impl KVector {
    pub fn zeros(m: usize) -> Self {
        KVector { entries: vec![0; pair_count(m)] }
    }

    pub fn total(&self) -> u32 {
        self.entries.iter().sum()
    }
}

/// Exponents `m_0..m_{M−1}` of `e^{−iω t_p}`; entries may be negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MVector {
    pub entries: Vec<i32>,
}

impl MVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `z_{j_1}..z_{j_M}` for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ZVector {
    pub entries: Vec<f64>,
}

impl ZVector {
    pub fn new(entries: Vec<f64>) -> Self {
        ZVector { entries }
    }

    pub fn from_pattern(spec: &ModelSpec, mode: usize, pattern: &ElectronicPattern) -> Self {
        ZVector { entries: pattern.states().iter().map(|&j| spec.z(mode, j)).collect() }
    }

    /// Interval count `M`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `α_0..α_M`.
    pub fn boundary_differences(&self) -> Vec<f64> {
        let m = self.entries.len();
        let at = |i: usize| if i == 0 || i > m { 0.0 } else { self.entries[i - 1] };
        (0..=m).map(|a| at(a) - at(a + 1)).collect()
    }
}

/// `M(M+1)/2`.
pub fn pair_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Boundaries `(a, b)`, `a < b`, of slot `index`.
pub fn pair_of_index(m: usize, index: usize) -> (usize, usize) {
    let mut rest = index;
    for p in 1..=m {
        let len = m - p + 1;
        if rest < len {
            return (rest, rest + p);
        }
        rest -= len;
    }
    panic!("slot {index} out of range for M = {m}");
}

/// Inverse of [`pair_of_index`].
pub fn index_of_pair(m: usize, a: usize, b: usize) -> usize {
    let p = b - a;
    (p - 1) * m - (p - 1) * p.saturating_sub(2) / 2 + a
}

/// `binomial(M(M+1)/2 + k_T, k_T)`.
pub fn count_k(m: usize, k_t: usize) -> u128 {
    binomial((pair_count(m) + k_t) as u64, k_t as u64)
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every `KVector` of length `M(M+1)/2` with total `≤ k_T`, in lexicographic order.
pub fn enumerate_k(m: usize, k_t: usize) -> MultiIndexIter {
    MultiIndexIter::new(pair_count(m), k_t as u32)
}

/// Lexicographic enumeration of bounded-degree multi-indices.
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    current: Vec<u32>,
    sum: u32,
    k_t: u32,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(len: usize, k_t: u32) -> Self {
        MultiIndexIter { current: vec![0; len], sum: 0, k_t, done: false }
    }

    fn advance(&mut self) {
        let len = self.current.len();
        if len == 0 {
            self.done = true;
            return;
        }
        if self.sum < self.k_t {
            self.current[len - 1] += 1;
            self.sum += 1;
            return;
        }
        let Some(i) = (0..len).rev().find(|&i| self.current[i] > 0) else {
            self.done = true;
            return;
        };
        if i == 0 {
            self.done = true;
            return;
        }
        self.sum -= self.current[i] - 1;
        self.current[i] = 0;
        self.current[i - 1] += 1;
    }
}

impl Iterator for MultiIndexIter {
    type Item = KVector;

    fn next(&mut self) -> Option<KVector> {
        if self.done {
            return None;
        }
        let out = KVector { entries: self.current.clone() };
        self.advance();
        Some(out)
    }
}

/// Sums `f` over all `k` of length `len` with total `≤ k_T`.
///
/// Work is split by the value of the first entry; chunk sums are combined
/// in chunk order so the result is independent of the thread count.
pub fn ordered_k_sum<F>(len: usize, k_t: usize, f: F) -> C64
where
    F: Fn(&KVector) -> C64 + Sync,
{
    if len == 0 {
        return f(&KVector { entries: vec![] });
    }
    let chunks: Vec<C64> = (0..=k_t as u32)
        .into_par_iter()
        .map(|first| {
            let mut acc = C64::new(0.0, 0.0);
            for k in FirstPinned::new(len, k_t as u32, first) {
                acc += f(&k);
            }
            acc
        })
        .collect();
    chunks.into_iter().fold(C64::new(0.0, 0.0), |a, b| a + b)
}

/// Lexicographic enumeration with the first entry held fixed.
struct FirstPinned {
    first: u32,
    rest: MultiIndexIter,
}

impl FirstPinned {
    fn new(len: usize, k_t: u32, first: u32) -> Self {
        FirstPinned { first, rest: MultiIndexIter::new(len - 1, k_t - first) }
    }
}

impl Iterator for FirstPinned {
    type Item = KVector;

    fn next(&mut self) -> Option<KVector> {
        let tail = self.rest.next()?;
        let mut entries = Vec::with_capacity(tail.entries.len() + 1);
        entries.push(self.first);
        entries.extend(tail.entries);
        Some(KVector { entries })
    }
}

/// Number of pairs covering each interval, `n_1..n_M`.
pub fn coverage(k: &KVector, m: usize) -> Result<Vec<i32>> {
    if k.entries.len() != pair_count(m) {
        return Err(Error::LengthMismatch { expected: pair_count(m), found: k.entries.len() });
    }
    let mut n = vec![0i32; m];
    for (i, &ki) in k.entries.iter().enumerate() {
        if ki == 0 {
            continue;
        }
        let (a, b) = pair_of_index(m, i);
        for p in a..b {
            n[p] += ki as i32;
        }
    }
    Ok(n)
}

/// `m_0 = n_1`, `m_p = n_{p+1} − n_p`.
pub fn m_of_k(k: &KVector, m: usize) -> Result<MVector> {
    let n = coverage(k, m)?;
    Ok(m_from_coverage(&n))
}

pub(crate) fn m_from_coverage(n: &[i32]) -> MVector {
    let mut out = Vec::with_capacity(n.len());
    if let Some(&n1) = n.first() {
        out.push(n1);
    }
    out.extend(n.windows(2).map(|w| w[1] - w[0]));
    MVector { entries: out }
}

/// `h = −½ Σ_a α_a²`.
pub fn h_general(z: &ZVector) -> f64 {
    -0.5 * z.boundary_differences().iter().map(|a| a * a).sum::<f64>()
}

/// Taylor bases `−α_a α_b` in slot order.
pub fn chi_bases(z: &ZVector) -> Vec<f64> {
    let m = z.len();
    let alpha = z.boundary_differences();
    (0..pair_count(m))
        .map(|i| {
            let (a, b) = pair_of_index(m, i);
            -alpha[a] * alpha[b]
        })
        .collect()
}

/// `Π base_i^{k_i} / k_i!`.
pub fn chi_from_bases(bases: &[f64], k: &KVector) -> Result<f64> {
    if bases.len() != k.entries.len() {
        return Err(Error::LengthMismatch { expected: bases.len(), found: k.entries.len() });
    }
    Ok(bases
        .iter()
        .zip(&k.entries)
        .filter(|(_, &ki)| ki > 0)
        .map(|(&b, &ki)| b.powi(ki as i32) / factorial(ki))
        .product())
}

pub fn chi(z: &ZVector, k: &KVector) -> Result<f64> {
    chi_from_bases(&chi_bases(z), k)
}

pub(crate) fn factorial(n: u32) -> f64 {
    (2..=n).map(f64::from).product()
}

/// Symmetric-dimer exponent `h′ = −M z_e²`.
pub fn h_dimer(m: usize, z_e: f64) -> f64 {
    -(m as f64) * z_e * z_e
}

/// Symmetric-dimer bases: `(−1)^{p+1} z_e²` at both ends of run length `p`,
/// `2(−1)^{p+1} z_e²` in between, and `z_e²` (diagonal) or 0 for the full run.
pub fn chi_dimer_bases(m: usize, z_e: f64, diagonal: bool) -> Vec<f64> {
    let z2 = z_e * z_e;
    let mut out = Vec::with_capacity(pair_count(m));
    for p in 1..=m {
        let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
        for q in 1..=m - p + 1 {
            let base = if p == m {
                if diagonal {
                    z2
                } else {
                    0.0
                }
            } else if q == 1 || q == m - p + 1 {
                sign * z2
            } else {
                2.0 * sign * z2
            };
            out.push(base);
        }
    }
    out
}

/// Closed-form adiabatic kernel `exp(h − Σ_{a<b} α_a α_b Π v_p)` at ordered
/// times `t_0 > t_1 > … > t_{M−1} > 0`, `v_p = e^{−iω(t_{p−1} − t_p)}`.
pub fn arf_direct(z: &ZVector, omega: f64, times: &[f64]) -> Result<C64> {
    let m = z.len();
    if times.len() != m {
        return Err(Error::LengthMismatch { expected: m, found: times.len() });
    }
    let alpha = z.boundary_differences();
    let t_at = |p: usize| if p < m { times[p] } else { 0.0 };
    let mut expo = C64::new(h_general(z), 0.0);
    for a in 0..m {
        for b in a + 1..=m {
            // Π_{p=a+1}^{b} v_p spans t_a..t_b
            let span = t_at(a) - t_at(b);
            expo -= alpha[a] * alpha[b] * C64::from_polar(1.0, -omega * span);
        }
    }
    Ok(expo.exp())
}

/// Truncated Taylor form `e^h Σ_k χ Π_p e^{−iω m_p t_p}` of [`arf_direct`].
pub fn arf_taylor(z: &ZVector, omega: f64, times: &[f64], k_t: usize) -> Result<C64> {
    let m = z.len();
    if times.len() != m {
        return Err(Error::LengthMismatch { expected: m, found: times.len() });
    }
    let bases = chi_bases(z);
    let sum = ordered_k_sum(pair_count(m), k_t, |k| {
        let c = chi_from_bases(&bases, k).expect("length checked");
        if c == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mv = m_of_k(k, m).expect("length checked");
        let phase: f64 = mv.entries.iter().zip(times).map(|(&mp, &tp)| mp as f64 * tp).sum();
        C64::from_polar(c, -omega * phase)
    });
    Ok(h_general(z).exp() * sum)
}
