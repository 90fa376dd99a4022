//! Transfer evaluation of one Dyson term.
//!
//! The Taylor expansion of the adiabatic kernel is a product over slots of
//! `(−α_a α_b Π v)^{k}/k!`. Each slot is an oscillator quantum opened at its
//! right boundary `b` and closed at its left boundary `a`, so the sum over all
//! `k` with `Σk ≤ k_T` factorizes into a sweep from the rightmost boundary to
//! the leftmost, tracking open quanta per mode. Within an interaction chain
//! the nested time integrals are done exactly on polynomial × exponential
//! forms, which reproduces `Σ_k χ e^{…} f_{M,m,σ}(t)` term by term.

use std::collections::BTreeMap;

use crate::combinatorics::{binomial, factorial};
use crate::kernel::ZERO_TOL;
use crate::model::ModelSpec;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// One piece of a Feynman time line, left (latest) to right.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Interaction chain `j_1..j_L` spanning total time `t`; interior
    /// interaction times are integrated.
    Chain { states: Vec<usize>, t: f64 },
    /// Single interval in `state` of fixed duration `t`.
    Fixed { state: usize, t: f64 },
}

impl Segment {
    pub fn chain(states: Vec<usize>, t: f64) -> Self {
        Segment::Chain { states, t }
    }

    pub fn fixed(state: usize, t: f64) -> Self {
        Segment::Fixed { state, t }
    }

    pub fn len(&self) -> usize {
        match self {
            Segment::Chain { states, .. } => states.len(),
            Segment::Fixed { .. } => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self) -> f64 {
        match self {
            Segment::Chain { t, .. } | Segment::Fixed { t, .. } => *t,
        }
    }

    /// Electronic states of all intervals.
    pub fn states(&self) -> Vec<usize> {
        match self {
            Segment::Chain { states, .. } => states.clone(),
            Segment::Fixed { state, .. } => vec![*state],
        }
    }
}

/// `(−i)^{insertions} Π couplings` of a segment list.
pub fn coupling_prefactor(spec: &ModelSpec, segments: &[Segment]) -> C64 {
    let mut c = C64::new(1.0, 0.0);
    for seg in segments {
        if let Segment::Chain { states, .. } = seg {
            for w in states.windows(2) {
                c *= -I * if (w[0], w[1]) == (1, 2) { spec.eta } else { spec.eta.conj() };
            }
        }
    }
    c
}

/// `α_{ζ,a} = z_{ζ,j_a} − z_{ζ,j_{a+1}}` for the concatenated intervals.
pub fn boundary_displacements(spec: &ModelSpec, states: &[usize]) -> Vec<Vec<f64>> {
    let m = states.len();
    let j = |a: usize| if a == 0 || a > m { 0 } else { states[a - 1] };
    (0..spec.n_modes()).map(|zeta| (0..=m).map(|a| spec.z(zeta, j(a)) - spec.z(zeta, j(a + 1))).collect()).collect()
}

type Poly = Vec<C64>;
/// Oscillating class: quanta per frequency group and electronic level.
type Class = (Vec<u32>, usize);
type Key = (Vec<u32>, u32);

#[derive(Debug, Clone)]
enum Val {
    Scalar(C64),
    Forms(BTreeMap<Class, Poly>),
}

impl Val {
    fn add_scaled(&mut self, other: &Val, w: C64) {
        match (self, other) {
            (Val::Scalar(a), Val::Scalar(b)) => *a += b * w,
            (Val::Forms(a), Val::Forms(b)) => {
                for (k, p) in b {
                    add_poly(a.entry(k.clone()).or_default(), p, w);
                }
            }
            _ => unreachable!("mixed value kinds within one sweep stage"),
        }
    }

    fn scaled(&self, w: C64) -> Val {
        match self {
            Val::Scalar(a) => Val::Scalar(a * w),
            Val::Forms(m) => Val::Forms(m.iter().map(|(k, p)| (k.clone(), p.iter().map(|c| c * w).collect())).collect()),
        }
    }
}

fn add_poly(dst: &mut Poly, src: &[C64], w: C64) {
    if dst.len() < src.len() {
        dst.resize(src.len(), C64::new(0.0, 0.0));
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * w;
    }
}

/// `Q` with `d/dy [Q(y) e^{iDy}] = P(y) e^{iDy}`.
fn antiderivative(p: &[C64], d: f64, zero_tol: f64) -> Poly {
    if d.abs() < zero_tol {
        let mut q = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (r, c) in p.iter().enumerate() {
            q[r + 1] = c / (r + 1) as f64;
        }
        return q;
    }
    let id = I * d;
    let mut q = vec![C64::new(0.0, 0.0); p.len()];
    let mut next = C64::new(0.0, 0.0);
    for r in (0..p.len()).rev() {
        // iD q_r + (r+1) q_{r+1} = p_r
        q[r] = (p[r] - (r + 1) as f64 * next) / id;
        next = q[r];
    }
    q
}

fn poly_at(p: &[C64], t: f64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c)
}

/// Evaluates one Dyson term given by `segments` with Taylor truncation `Σk ≤ k_t`.
pub fn evaluate(spec: &ModelSpec, segments: &[Segment], k_t: usize) -> C64 {
    let states: Vec<usize> = segments.iter().flat_map(|s| s.states()).collect();
    let m = states.len();
    if m == 0 {
        return C64::new(1.0, 0.0);
    }
    let g = spec.n_modes();
    let alpha = boundary_displacements(spec, &states);
    let h: f64 = -0.5 * alpha.iter().flatten().map(|a| a * a).sum::<f64>();

    // group modes with identical frequency so their phases share one class
    let mut group_freq: Vec<f64> = Vec::new();
    let mut group_of = Vec::with_capacity(g);
    for &w in &spec.mode_freqs {
        let id = group_freq.iter().position(|&x| x == w).unwrap_or_else(|| {
            group_freq.push(w);
            group_freq.len() - 1
        });
        group_of.push(id);
    }
    let class_of = |ns: &[u32], level: usize| -> Class {
        let mut c = vec![0u32; group_freq.len()];
        for (z, &n) in ns.iter().enumerate() {
            c[group_of[z]] += n;
        }
        (c, level)
    };
    let freq_of = |c: &Class| -> f64 {
        c.0.iter().zip(&group_freq).map(|(&n, &w)| n as f64 * w).sum::<f64>() + spec.level_freqs[c.1]
    };
    let zero_tol = ZERO_TOL * spec.omega_scale();
    let k_t = k_t as u32;

    // (segment index, position in segment) per interval
    let mut loc = Vec::with_capacity(m);
    for (si, seg) in segments.iter().enumerate() {
        for p in 0..seg.len() {
            loc.push((si, p));
        }
    }

    let boundary = |b: usize, dp: BTreeMap<Key, Val>, last: bool| -> BTreeMap<Key, Val> {
        let mut cur = dp;
        for z in 0..g {
            let al = alpha[z][b];
            let mut next: BTreeMap<Key, Val> = BTreeMap::new();
            for ((ns, d), val) in &cur {
                let n = ns[z];
                let s_lo = if last { n } else { 0 };
                for s in s_lo..=n {
                    if al == 0.0 && s > 0 {
                        continue;
                    }
                    let wc = binomial(n as u64, s as u64) as f64 * al.powi(s as i32);
                    let e_max = if last || al == 0.0 { 0 } else { k_t - d };
                    for e in 0..=e_max {
                        let we = (-al).powi(e as i32) / factorial(e);
                        let mut nn = ns.clone();
                        nn[z] = n - s + e;
                        let w = C64::new(wc * we, 0.0);
                        match next.get_mut(&(nn.clone(), d + e)) {
                            Some(v) => v.add_scaled(val, w),
                            None => {
                                next.insert((nn, d + e), val.scaled(w));
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    };

    let mut dp: BTreeMap<Key, Val> = BTreeMap::new();
    dp.insert((vec![0; g], 0), Val::Scalar(C64::new(1.0, 0.0)));
    for p in (1..=m).rev() {
        dp = boundary(p, dp, false);
        let (si, pos) = loc[p - 1];
        let seg = &segments[si];
        let level = states[p - 1];
        let mut next = BTreeMap::new();
        for ((ns, d), val) in dp {
            let cls = class_of(&ns, level);
            let om = freq_of(&cls);
            let out = match seg {
                Segment::Fixed { t, .. } => match val {
                    Val::Scalar(v) => Val::Scalar(v * C64::from_polar(1.0, -om * t)),
                    Val::Forms(_) => unreachable!("fixed interval inside a chain"),
                },
                Segment::Chain { states: cs, t } => {
                    let forms = if pos == cs.len() - 1 {
                        let v = match val {
                            Val::Scalar(v) => v,
                            Val::Forms(_) => unreachable!("chain start with open forms"),
                        };
                        BTreeMap::from([(cls, vec![v])])
                    } else {
                        let Val::Forms(inner) = val else { unreachable!("chain interior without forms") };
                        // G(y) = e^{−iΩy} ∫_0^y e^{iΩx} F(x) dx
                        let mut acc: BTreeMap<Class, Poly> = BTreeMap::new();
                        for (k2, p2) in inner {
                            let q = antiderivative(&p2, om - freq_of(&k2), zero_tol);
                            let q0 = q[0];
                            let exact_zero = (om - freq_of(&k2)).abs() < zero_tol;
                            add_poly(acc.entry(k2).or_default(), &q, C64::new(1.0, 0.0));
                            if !exact_zero {
                                add_poly(acc.entry(cls.clone()).or_default(), &[q0], C64::new(-1.0, 0.0));
                            }
                        }
                        acc
                    };
                    if pos == 0 {
                        let v = forms.iter().map(|(k, p)| poly_at(p, *t) * C64::from_polar(1.0, -freq_of(k) * t)).sum();
                        Val::Scalar(v)
                    } else {
                        Val::Forms(forms)
                    }
                }
            };
            next.insert((ns, d), out);
        }
        dp = next;
    }
    let dp = boundary(0, dp, true);
    let total: C64 = dp
        .values()
        .map(|v| match v {
            Val::Scalar(x) => *x,
            Val::Forms(_) => unreachable!("unfinished chain"),
        })
        .sum();
    coupling_prefactor(spec, segments) * h.exp() * total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antiderivative_checks() {
        // ∫ (1 + 2y) e^{iDy}: derivative of Q e^{iDy} reproduces P
        let p = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        let d = 0.7;
        let q = antiderivative(&p, d, 1e-12);
        for y in [0.0, 0.4, 1.3] {
            let dq = q[1] + I * d * (q[0] + q[1] * y);
            assert!((dq - poly_at(&p, y)).norm() < 1e-14);
        }
        let q = antiderivative(&p, 0.0, 1e-12);
        assert_eq!(q, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
    }

    #[test]
    fn single_interval_is_adiabatic() {
        let s = ModelSpec::model_a();
        let t = 0.9;
        let v = evaluate(&s, &[Segment::chain(vec![1], t)], 14);
        let (w, z) = (s.mode_freqs[0], s.z(0, 1));
        let u0 = (z * z * (C64::from_polar(1.0, -w * t) - 1.0)).exp() * C64::from_polar(1.0, -s.level_freqs[1] * t);
        assert!((v - u0).norm() < 1e-14);
    }

    #[test]
    fn fixed_equals_unit_chain() {
        let s = ModelSpec::model_a();
        let a = evaluate(&s, &[Segment::chain(vec![1], 0.4), Segment::fixed(0, -0.3), Segment::chain(vec![1], 0.8)], 8);
        let b = evaluate(&s, &[Segment::chain(vec![1], 0.4), Segment::chain(vec![0], -0.3), Segment::chain(vec![1], 0.8)], 8);
        assert!((a - b).norm() < 1e-15);
    }
}
