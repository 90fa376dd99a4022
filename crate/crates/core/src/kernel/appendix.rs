//! Hand-transcribed closed forms of `A_{0j}` for `M = 2..7`, including the
//! tabulated zero-frequency variants. Used as a test oracle for
//! [`build_polynomials`](super::build_polynomials).
//!
//! The tables assume `ω` and `ω₂₁` incommensurate, so only `ω_{kj}` with
//! `j − k` odd may vanish. Entries are corrected where the printed form
//! disagrees with direct integration; see [`CORRECTIONS`].

use std::collections::BTreeSet;

use super::{FrequencyTable, TermPolynomial};
use crate::error::{Error, Result};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

type Poly = Vec<C64>;
type Zeros = &'static [(usize, usize)];

/// Printed forms replaced by the integrated result.
pub const CORRECTIONS: &[&str] = &[
    "M=4, ω12=0: A03 = t/(ω22ω33), printed with ω23 in place of ω33",
    "M=6, ω25=0: constant A02 has the opposite sign",
    "M=7, ω56=0: the t term and the constant belong to A07 and A05, and the t term is +it/(ω14ω24ω34ω44ω55)",
    "M=7, ω16=ω36=ω56=0: the t² term of A05 has the opposite sign",
];

/// Full zero sets with a tabulated form, per `M`.
pub fn zero_patterns(m: usize) -> &'static [Zeros] {
    match m {
        3 => &[&[(1, 2)]],
        4 => &[&[(1, 2)], &[(2, 3)], &[(1, 2), (2, 3)]],
        5 => &[&[(1, 2)], &[(1, 4)], &[(2, 3)], &[(3, 4)], &[(1, 2), (1, 4), (3, 4)]],
        6 => &[
            &[(1, 2)],
            &[(1, 4)],
            &[(2, 3)],
            &[(2, 5)],
            &[(3, 4)],
            &[(4, 5)],
            &[(1, 2), (1, 4), (3, 4)],
            &[(2, 3), (2, 5), (4, 5)],
        ],
        7 => &[
            &[(1, 2)],
            &[(1, 4)],
            &[(1, 6)],
            &[(2, 3)],
            &[(2, 5)],
            &[(3, 4)],
            &[(3, 6)],
            &[(4, 5)],
            &[(5, 6)],
            &[(1, 2), (1, 4), (3, 4)],
            &[(2, 3), (2, 5), (4, 5)],
            &[(1, 2), (1, 6), (3, 6)],
            &[(3, 4), (3, 6), (5, 6)],
            &[(1, 4), (1, 6), (5, 6)],
            &[(1, 2), (1, 4), (1, 6), (3, 4), (3, 6), (5, 6)],
        ],
        _ => &[],
    }
}

fn c0(x: C64) -> Poly {
    vec![x]
}

fn c1(x: C64) -> Poly {
    vec![C64::new(0.0, 0.0), x]
}

fn c2(x: C64) -> Poly {
    vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), x]
}

fn c3(x: C64) -> Poly {
    vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), x]
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

struct W<'a>(&'a FrequencyTable);

impl W<'_> {
    /// `ω_{kj}` written as a two-digit index, e.g. `w(24)`.
    fn w(&self, kj: usize) -> f64 {
        self.0.get(kj / 10, kj % 10)
    }

    /// `Π ω`.
    fn p(&self, kjs: &[usize]) -> f64 {
        kjs.iter().map(|&kj| self.w(kj)).product()
    }

    /// `Σ ±1/ω`, sign from the slice.
    fn s(&self, terms: &[(f64, usize)]) -> f64 {
        terms.iter().map(|&(sg, kj)| sg / self.w(kj)).sum()
    }

    /// `Σ ±1/(ω ω)`.
    fn s2(&self, terms: &[(f64, usize, usize)]) -> f64 {
        terms.iter().map(|&(sg, a, b)| sg / (self.w(a) * self.w(b))).sum()
    }
}

/// Set of `(j, A_{0j})` overrides for one zero set.
type Overrides = Vec<(usize, Poly)>;

fn general(m: usize, w: &W) -> Vec<Poly> {
    let one = |x: f64| c0(re(x));
    let inv_i = |x: f64| c0(re(x) / I);
    match m {
        2 => {
            let a02 = re(1.0) / (I * w.w(11));
            vec![c0(-a02), c0(a02)]
        }
        3 => vec![
            one(-1.0 / w.p(&[11, 12])),
            one(1.0 / w.p(&[11, 22])),
            one(-1.0 / w.p(&[12, 22])),
        ],
        4 => vec![
            inv_i(1.0 / w.p(&[11, 12, 13])),
            inv_i(-1.0 / w.p(&[11, 22, 23])),
            inv_i(1.0 / w.p(&[12, 22, 33])),
            inv_i(-1.0 / w.p(&[13, 23, 33])),
        ],
        5 => vec![
            one(1.0 / w.p(&[11, 12, 13, 14])),
            one(-1.0 / w.p(&[11, 22, 23, 24])),
            one(1.0 / w.p(&[12, 22, 33, 34])),
            one(-1.0 / w.p(&[13, 23, 33, 44])),
            one(1.0 / w.p(&[14, 24, 34, 44])),
        ],
        6 => vec![
            inv_i(-1.0 / w.p(&[11, 12, 13, 14, 15])),
            inv_i(1.0 / w.p(&[11, 22, 23, 24, 25])),
            inv_i(-1.0 / w.p(&[12, 22, 33, 34, 35])),
            inv_i(1.0 / w.p(&[13, 23, 33, 44, 45])),
            inv_i(-1.0 / w.p(&[14, 24, 34, 44, 55])),
            inv_i(1.0 / w.p(&[15, 25, 35, 45, 55])),
        ],
        7 => vec![
            one(-1.0 / w.p(&[11, 12, 13, 14, 15, 16])),
            one(1.0 / w.p(&[11, 22, 23, 24, 25, 26])),
            one(-1.0 / w.p(&[12, 22, 33, 34, 35, 36])),
            one(1.0 / w.p(&[13, 23, 33, 44, 45, 46])),
            one(-1.0 / w.p(&[14, 24, 34, 44, 55, 56])),
            one(1.0 / w.p(&[15, 25, 35, 45, 55, 66])),
            one(-1.0 / w.p(&[16, 26, 36, 46, 56, 66])),
        ],
        _ => unreachable!(),
    }
}

fn overrides(m: usize, zeros: &[(usize, usize)], w: &W) -> Option<Overrides> {
    let z: Vec<usize> = zeros.iter().map(|&(k, j)| 10 * k + j).collect();
    let o = match (m, z.as_slice()) {
        (3, [12]) => vec![(3, c1(-I / w.w(22))), (1, c0(re(1.0 / (w.w(22) * w.w(22)))))],

        (4, [12]) => vec![
            (3, c1(re(1.0 / w.p(&[22, 33])))),
            (1, c0(-re(1.0 / w.p(&[22, 33]) * w.s(&[(1.0, 22), (-1.0, 33)])) / I)),
        ],
        (4, [23]) => vec![
            (4, c1(re(-1.0 / w.p(&[11, 33])))),
            (2, c0(re(1.0 / w.p(&[11, 33]) * w.s(&[(1.0, 13), (1.0, 33)])) / I)),
        ],
        (4, [12, 23]) => {
            let mut a = overrides(4, &[(1, 2)], w)?;
            a.extend(overrides(4, &[(2, 3)], w)?);
            a
        }

        (5, [12]) => {
            let d = w.p(&[22, 33, 34]);
            vec![(3, c1(I / d)), (1, c0(re(-1.0 / d * w.s(&[(1.0, 22), (-1.0, 33), (-1.0, 34)]))))]
        }
        (5, [14]) => {
            let d = w.p(&[24, 34, 44]);
            vec![(5, c1(I / d)), (1, c0(re(-1.0 / d * w.s(&[(1.0, 24), (1.0, 34), (1.0, 44)]))))]
        }
        (5, [23]) => {
            let d = w.p(&[13, 33, 44]);
            vec![(4, c1(-I / d)), (2, c0(re(1.0 / d * w.s(&[(1.0, 13), (1.0, 33), (-1.0, 44)]))))]
        }
        (5, [34]) => {
            let d = w.p(&[14, 24, 44]);
            vec![(5, c1(I / d)), (3, c0(re(-1.0 / d * w.s(&[(1.0, 14), (1.0, 24), (1.0, 44)]))))]
        }
        (5, [12, 14, 34]) => {
            let d = w.p(&[24, 44]);
            vec![
                (5, c2(re(-1.0 / (2.0 * d)))),
                (3, c1(-I / d * w.s(&[(1.0, 24), (1.0, 44)]))),
                (1, c0(re(1.0 / d * w.s2(&[(1.0, 24, 24), (1.0, 44, 44), (1.0, 24, 44)])))),
            ]
        }

        (6, [12]) => {
            let d = w.p(&[22, 33, 34, 35]);
            vec![
                (3, c1(re(-1.0 / d))),
                (1, c0(re(1.0 / d * w.s(&[(1.0, 22), (-1.0, 33), (-1.0, 34), (-1.0, 35)])) / I)),
            ]
        }
        (6, [14]) => {
            let d = w.p(&[24, 34, 44, 55]);
            vec![
                (5, c1(re(-1.0 / d))),
                (1, c0(re(1.0 / d * w.s(&[(1.0, 24), (1.0, 34), (1.0, 44), (-1.0, 55)])) / I)),
            ]
        }
        (6, [23]) => {
            let d = w.p(&[13, 33, 44, 45]);
            vec![
                (4, c1(re(1.0 / d))),
                (2, c0(re(-1.0 / d * w.s(&[(1.0, 13), (1.0, 33), (-1.0, 44), (-1.0, 45)])) / I)),
            ]
        }
        (6, [25]) => {
            let d = w.p(&[15, 35, 45, 55]);
            vec![
                (6, c1(re(1.0 / d))),
                (2, c0(re(-1.0 / d * w.s(&[(1.0, 15), (1.0, 35), (1.0, 45), (1.0, 55)])) / I)),
            ]
        }
        (6, [34]) => {
            let d = w.p(&[14, 24, 44, 55]);
            vec![
                (5, c1(re(-1.0 / d))),
                (3, c0(re(1.0 / d * w.s(&[(1.0, 14), (1.0, 24), (1.0, 44), (-1.0, 55)])) / I)),
            ]
        }
        (6, [45]) => {
            let d = w.p(&[15, 25, 35, 55]);
            vec![
                (6, c1(re(1.0 / d))),
                (4, c0(re(-1.0 / d * w.s(&[(1.0, 15), (1.0, 25), (1.0, 35), (1.0, 55)])) / I)),
            ]
        }
        (6, [12, 14, 34]) => {
            let d = w.p(&[24, 44, 55]);
            vec![
                (5, c2(re(1.0 / (2.0 * d)) / I)),
                (3, c1(re(1.0 / d * w.s(&[(1.0, 24), (1.0, 44), (-1.0, 55)])))),
                (
                    1,
                    c0(re(-1.0 / d
                        * w.s2(&[
                            (1.0, 24, 24),
                            (1.0, 44, 44),
                            (1.0, 55, 55),
                            (1.0, 24, 44),
                            (-1.0, 24, 55),
                            (-1.0, 44, 55),
                        ]))
                        / I),
                ),
            ]
        }
        (6, [23, 25, 45]) => {
            let d = w.p(&[15, 35, 55]);
            vec![
                (6, c2(re(-1.0 / (2.0 * d)) / I)),
                (4, c1(re(-1.0 / d * w.s(&[(1.0, 15), (1.0, 35), (1.0, 55)])))),
                (
                    2,
                    c0(re(1.0 / d
                        * w.s2(&[
                            (1.0, 15, 15),
                            (1.0, 35, 35),
                            (1.0, 55, 55),
                            (1.0, 15, 35),
                            (1.0, 15, 55),
                            (1.0, 35, 55),
                        ]))
                        / I),
                ),
            ]
        }

        (7, [12]) => {
            let d = w.p(&[22, 33, 34, 35, 36]);
            vec![
                (3, c1(-I / d)),
                (1, c0(re(1.0 / d * w.s(&[(1.0, 22), (-1.0, 33), (-1.0, 34), (-1.0, 35), (-1.0, 36)])))),
            ]
        }
        (7, [14]) => {
            let d = w.p(&[24, 34, 44, 55, 56]);
            vec![
                (5, c1(-I / d)),
                (1, c0(re(1.0 / d * w.s(&[(1.0, 24), (1.0, 34), (1.0, 44), (-1.0, 55), (-1.0, 56)])))),
            ]
        }
        (7, [16]) => {
            let d = w.p(&[26, 36, 46, 56, 66]);
            vec![
                (7, c1(-I / d)),
                (1, c0(re(1.0 / d * w.s(&[(1.0, 26), (1.0, 36), (1.0, 46), (1.0, 56), (1.0, 66)])))),
            ]
        }
        (7, [23]) => {
            let d = w.p(&[13, 33, 44, 45, 46]);
            vec![
                (4, c1(I / d)),
                (2, c0(re(-1.0 / d * w.s(&[(1.0, 13), (1.0, 33), (-1.0, 44), (-1.0, 45), (-1.0, 46)])))),
            ]
        }
        (7, [25]) => {
            let d = w.p(&[15, 35, 45, 55, 66]);
            vec![
                (6, c1(I / d)),
                (2, c0(re(-1.0 / d * w.s(&[(1.0, 15), (1.0, 35), (1.0, 45), (1.0, 55), (-1.0, 66)])))),
            ]
        }
        (7, [34]) => {
            let d = w.p(&[14, 24, 44, 55, 56]);
            vec![
                (5, c1(-I / d)),
                (3, c0(re(1.0 / d * w.s(&[(1.0, 14), (1.0, 24), (1.0, 44), (-1.0, 55), (-1.0, 56)])))),
            ]
        }
        (7, [36]) => {
            let d = w.p(&[16, 26, 46, 56, 66]);
            vec![
                (7, c1(-I / d)),
                (3, c0(re(1.0 / d * w.s(&[(1.0, 16), (1.0, 26), (1.0, 46), (1.0, 56), (1.0, 66)])))),
            ]
        }
        (7, [45]) => {
            let d = w.p(&[15, 25, 35, 55, 66]);
            vec![
                (6, c1(I / d)),
                (4, c0(re(-1.0 / d * w.s(&[(1.0, 15), (1.0, 25), (1.0, 35), (1.0, 55), (-1.0, 66)])))),
            ]
        }
        (7, [56]) => {
            let d = w.p(&[14, 24, 34, 44, 55]);
            vec![
                (7, c1(I / d)),
                (5, c0(re(1.0 / d * w.s(&[(1.0, 55), (-1.0, 14), (-1.0, 24), (-1.0, 34), (-1.0, 44)])))),
            ]
        }
        (7, [12, 14, 34]) => {
            let d = w.p(&[24, 44, 55, 56]);
            vec![
                (5, c2(re(1.0 / (2.0 * d)))),
                (3, c1(re(-1.0 / d * w.s(&[(1.0, 24), (1.0, 44), (-1.0, 55), (-1.0, 56)])) / I)),
                (
                    1,
                    c0(re(-1.0 / d
                        * w.s2(&[
                            (1.0, 24, 24),
                            (1.0, 44, 44),
                            (1.0, 55, 55),
                            (1.0, 56, 56),
                            (1.0, 24, 44),
                            (-1.0, 24, 55),
                            (-1.0, 24, 56),
                            (-1.0, 44, 55),
                            (-1.0, 44, 56),
                            (1.0, 55, 56),
                        ]))),
                ),
            ]
        }
        (7, [23, 25, 45]) => {
            let d = w.p(&[15, 35, 55, 66]);
            vec![
                (6, c2(re(-1.0 / (2.0 * d)))),
                (4, c1(re(1.0 / d * w.s(&[(1.0, 15), (1.0, 35), (1.0, 55), (-1.0, 66)])) / I)),
                (
                    2,
                    c0(re(1.0 / d
                        * w.s2(&[
                            (1.0, 15, 15),
                            (1.0, 35, 35),
                            (1.0, 55, 55),
                            (1.0, 66, 66),
                            (1.0, 15, 35),
                            (1.0, 15, 55),
                            (-1.0, 15, 66),
                            (1.0, 35, 55),
                            (-1.0, 35, 66),
                            (-1.0, 55, 66),
                        ]))),
                ),
            ]
        }
        (7, [12, 16, 36]) => {
            let d = w.p(&[26, 46, 56, 66]);
            vec![
                (7, c2(re(1.0 / (2.0 * d)))),
                (3, c1(re(-1.0 / d * w.s(&[(1.0, 26), (1.0, 46), (1.0, 56), (1.0, 66)])) / I)),
                (
                    1,
                    c0(re(-1.0 / d
                        * w.s2(&[
                            (1.0, 26, 26),
                            (1.0, 46, 46),
                            (1.0, 56, 56),
                            (1.0, 66, 66),
                            (1.0, 26, 46),
                            (1.0, 26, 56),
                            (1.0, 26, 66),
                            (1.0, 46, 56),
                            (1.0, 46, 66),
                            (1.0, 56, 66),
                        ]))),
                ),
            ]
        }
        (7, [34, 36, 56]) => {
            let d = w.p(&[16, 26, 46, 66]);
            vec![
                (7, c2(re(1.0 / (2.0 * d)))),
                (5, c1(re(-1.0 / d * w.s(&[(1.0, 16), (1.0, 26), (1.0, 46), (1.0, 66)])) / I)),
                (
                    3,
                    c0(re(-1.0 / d
                        * w.s2(&[
                            (1.0, 16, 16),
                            (1.0, 26, 26),
                            (1.0, 46, 46),
                            (1.0, 66, 66),
                            (1.0, 16, 26),
                            (1.0, 16, 46),
                            (1.0, 16, 66),
                            (1.0, 26, 46),
                            (1.0, 26, 66),
                            (1.0, 46, 66),
                        ]))),
                ),
            ]
        }
        (7, [14, 16, 56]) => {
            let d = w.p(&[26, 36, 46, 66]);
            vec![
                (7, c2(re(1.0 / (2.0 * d)))),
                (5, c1(re(-1.0 / d * w.s(&[(1.0, 26), (1.0, 36), (1.0, 46), (1.0, 66)])) / I)),
                (
                    1,
                    c0(re(-1.0 / d
                        * w.s2(&[
                            (1.0, 26, 26),
                            (1.0, 36, 36),
                            (1.0, 46, 46),
                            (1.0, 66, 66),
                            (1.0, 26, 36),
                            (1.0, 26, 46),
                            (1.0, 26, 66),
                            (1.0, 36, 46),
                            (1.0, 36, 66),
                            (1.0, 46, 66),
                        ]))),
                ),
            ]
        }
        (7, [12, 14, 16, 34, 36, 56]) => {
            let d = w.p(&[26, 46, 66]);
            let (a, b, c) = (1.0 / w.w(26), 1.0 / w.w(46), 1.0 / w.w(66));
            let cubic = a * a * a
                + b * b * b
                + c * c * c
                + a * a * b
                + b * b * c
                + a * a * c
                + a * b * b
                + b * c * c
                + a * c * c
                + a * b * c;
            vec![
                (7, c3(I / (6.0 * d))),
                (5, c2(re(-1.0 / (2.0 * d) * (a + b + c)))),
                (3, c1(-I / d * (a * a + b * b + c * c + a * b + b * c + a * c))),
                (1, c0(re(cubic / d))),
            ]
        }
        _ => return None,
    };
    Some(o)
}

/// Tabulated coefficients for `M ∈ 2..=7` and a tabulated zero set.
pub fn appendix_table(freqs: &FrequencyTable) -> Result<Vec<TermPolynomial>> {
    let m = freqs.m();
    if !(2..=7).contains(&m) {
        return Err(Error::Unsupported(format!("no tabulated form for M = {m}")));
    }
    let zeros = freqs.zero_pairs();
    let w = W(freqs);
    let mut polys = general(m, &w);
    if !zeros.is_empty() {
        let ov = overrides(m, &zeros, &w)
            .ok_or_else(|| Error::Unsupported(format!("zero set {zeros:?} not tabulated for M = {m}")))?;
        let mut touched = BTreeSet::new();
        for (j, p) in ov {
            if !touched.insert(j) {
                return Err(Error::Unsupported(format!("overlapping overrides for A_0{j}")));
            }
            polys[j - 1] = p;
        }
        // entries dividing by a vanished frequency are absorbed by an override sharing their exponent
        for (j, p) in polys.iter_mut().enumerate() {
            if !touched.contains(&(j + 1)) && p.iter().any(|c| !c.is_finite()) {
                *p = c0(re(0.0));
            }
        }
    }
    Ok(polys
        .into_iter()
        .enumerate()
        .map(|(jm1, coeffs)| TermPolynomial { frequency: if jm1 == 0 { 0.0 } else { freqs.get(1, jm1) }, coeffs })
        .collect())
}
