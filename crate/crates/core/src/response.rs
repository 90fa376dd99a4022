//! Linear and third-order response functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::propagator::{diag_propagator, multimode_propagator, x1, x2, SeriesResult, Truncation};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathwayLabel {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl PathwayLabel {
    pub const ALL: [PathwayLabel; 8] = [
        PathwayLabel::R1,
        PathwayLabel::R2,
        PathwayLabel::R3,
        PathwayLabel::R4,
        PathwayLabel::R5,
        PathwayLabel::R6,
        PathwayLabel::R7,
        PathwayLabel::R8,
    ];
}

impl fmt::Display for PathwayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for PathwayLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PathwayLabel::ALL
            .into_iter()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown pathway '{s}' (expected R1..R8)")))
    }
}

/// Which three-segment element a pathway reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathwayKind {
    /// Excited state 1, ground state, excited state 1.
    X1,
    /// Excited state 1 to 2, doubly excited state, 2 back to 1.
    X2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DipoleFactor {
    /// `|μ₀₁|⁴`
    Mu01Fourth,
    /// `|μ₀₁ μ₂₃|²`
    Mu01Mu23Squared,
}

impl DipoleFactor {
    pub fn value(self, spec: &ModelSpec) -> f64 {
        match self {
            DipoleFactor::Mu01Fourth => spec.dipole_01.norm_sqr().powi(2),
            DipoleFactor::Mu01Mu23Squared => (spec.dipole_01 * spec.dipole_23).norm_sqr(),
        }
    }
}

/// One third-order pathway: `(t_L, t_C, t_R) = time_map · (t₁, t₂, t₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwaySpec {
    pub label: PathwayLabel,
    pub kind: PathwayKind,
    pub time_map: [[i8; 3]; 3],
    /// `+1` for `+i`, `−1` for `−i`.
    pub sign: i8,
    pub dipole: DipoleFactor,
    pub name: &'static str,
}

impl PathwaySpec {
    pub fn map_times(&self, t1: f64, t2: f64, t3: f64) -> (f64, f64, f64) {
        let row = |r: [i8; 3]| f64::from(r[0]) * t1 + f64::from(r[1]) * t2 + f64::from(r[2]) * t3;
        (row(self.time_map[0]), row(self.time_map[1]), row(self.time_map[2]))
    }

    /// `±i × dipole factor`.
    pub fn prefactor(&self, spec: &ModelSpec) -> C64 {
        C64::new(0.0, f64::from(self.sign) * self.dipole.value(spec))
    }
}

const fn spec(
    label: PathwayLabel,
    kind: PathwayKind,
    time_map: [[i8; 3]; 3],
    sign: i8,
    dipole: DipoleFactor,
    name: &'static str,
) -> PathwaySpec {
    PathwaySpec { label, kind, time_map, sign, dipole, name }
}

use DipoleFactor::{Mu01Fourth, Mu01Mu23Squared};
use PathwayKind::{X1, X2};
use PathwayLabel::*;

const TABLE: [PathwaySpec; 8] = [
    spec(R1, X1, [[-1, -1, 0], [0, 0, -1], [0, 1, 1]], -1, Mu01Fourth, "SE rephasing"),
    spec(R2, X1, [[-1, 0, 0], [0, -1, -1], [0, 0, 1]], -1, Mu01Fourth, "GSB rephasing"),
    spec(R3, X2, [[-1, -1, -1], [0, 0, 1], [0, 1, 0]], 1, Mu01Mu23Squared, "ESA rephasing"),
    spec(R4, X1, [[0, -1, 0], [0, 0, -1], [1, 1, 1]], -1, Mu01Fourth, "SE non-rephasing"),
    spec(R5, X1, [[0, 0, 1], [0, 1, 0], [1, 0, 0]], -1, Mu01Fourth, "GSB non-rephasing"),
    spec(R6, X2, [[0, -1, -1], [0, 0, 1], [1, 1, 0]], 1, Mu01Mu23Squared, "ESA non-rephasing"),
    spec(R7, X2, [[0, 0, -1], [0, 1, 1], [1, 0, 0]], 1, Mu01Mu23Squared, "DQC first kind"),
    spec(R8, X2, [[0, 0, 1], [0, 1, 0], [1, 0, 0]], -1, Mu01Mu23Squared, "DQC second kind"),
];

/// All eight pathways.
pub fn pathway_table() -> Vec<PathwaySpec> {
    TABLE.to_vec()
}

pub fn pathway(label: PathwayLabel) -> PathwaySpec {
    TABLE[label as usize]
}

/// `i|μ₀₁|² ⟨1;0|U(t₁)|1;0⟩` for model A.
pub fn linear_response_a(spec: &ModelSpec, t1: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate_as(ModelKind::A)?;
    let pre = C64::new(0.0, spec.dipole_01.norm_sqr());
    Ok(diag_propagator(spec, 1, t1, trunc)?.scaled(pre))
}

/// `i|μ₀ₑ|² Σ_{σ,σ′} ⟨σ;0|U(t₁)|σ′;0⟩` for the symmetric dimer, both monomers
/// carrying the dipole `μ₀₁`.
pub fn linear_response_b(spec: &ModelSpec, t1: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate_as(ModelKind::B)?;
    if !spec.is_symmetric_dimer() {
        return Err(Error::Unsupported("linear response of model B is implemented for the symmetric dimer only".into()));
    }
    let pre = C64::new(0.0, spec.dipole_01.norm_sqr());
    let mut per_order: Vec<(usize, C64)> = Vec::new();
    for (f, i) in [(1, 1), (2, 2), (1, 2), (2, 1)] {
        for (o, v) in multimode_propagator(spec, f, i, t1, trunc)?.per_order {
            match per_order.iter_mut().find(|(p, _)| *p == o) {
                Some((_, acc)) => *acc += v,
                None => per_order.push((o, v)),
            }
        }
    }
    per_order.sort_by_key(|(o, _)| *o);
    let value = per_order.iter().map(|(_, v)| v).sum::<C64>();
    Ok(SeriesResult { value, per_order, k_t: trunc.k_t, n_max: trunc.n_max }.scaled(pre))
}

/// Bare `X₁`/`X₂` of a pathway at mapped times.
pub fn pathway_element(spec: &ModelSpec, label: PathwayLabel, t1: f64, t2: f64, t3: f64, trunc: Truncation) -> Result<SeriesResult> {
    let p = pathway(label);
    let (tl, tc, tr) = p.map_times(t1, t2, t3);
    match p.kind {
        PathwayKind::X1 => x1(spec, tl, tc, tr, trunc),
        PathwayKind::X2 => x2(spec, tl, tc, tr, trunc),
    }
}

/// Third-order response of one pathway for model A.
pub fn third_order(spec: &ModelSpec, label: PathwayLabel, t1: f64, t2: f64, t3: f64, trunc: Truncation) -> Result<SeriesResult> {
    spec.validate_as(ModelKind::A)?;
    if [t1, t2, t3].iter().any(|&t| t < 0.0 || !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("waiting times must be non-negative, got ({t1}, {t2}, {t3})")));
    }
    let pre = pathway(label).prefactor(spec);
    Ok(pathway_element(spec, label, t1, t2, t3, trunc)?.scaled(pre))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        let t = pathway_table();
        assert_eq!(t.len(), 8);
        for (i, p) in t.iter().enumerate() {
            assert_eq!(p.label as usize, i);
            let x1 = matches!(p.label, R1 | R2 | R4 | R5);
            assert_eq!(p.kind == X1, x1);
            assert_eq!(p.dipole == Mu01Fourth, x1);
        }
        let (a, b, c) = (0.3, 0.5, 0.7);
        assert_eq!(pathway(R2).map_times(a, b, c), (-a, -b - c, c));
        assert_eq!(pathway(R5).map_times(a, b, c), (c, b, a));
        assert_eq!(pathway(R8).map_times(a, b, c), (c, b, a));
        assert_eq!(pathway(R1).map_times(a, 0.0, c), pathway(R2).map_times(a, 0.0, c));
    }

    #[test]
    fn labels_parse() {
        assert_eq!("r3".parse::<PathwayLabel>().unwrap(), R3);
        assert!("R9".parse::<PathwayLabel>().is_err());
    }

    #[test]
    fn zero_time_values() {
        let s = ModelSpec::model_a();
        let tr = Truncation::default();
        for p in pathway_table() {
            let v = third_order(&s, p.label, 0.0, 0.0, 0.0, tr).unwrap().value;
            let want = if p.kind == X1 { C64::new(0.0, -1.0) } else { C64::new(0.0, 0.0) };
            assert!((v - want).norm() < 1e-14, "{}: {v}", p.label);
        }
        let v = linear_response_a(&s, 0.0, tr).unwrap().value;
        assert!((v - C64::new(0.0, 1.0)).norm() < 1e-14);
        let v = linear_response_b(&ModelSpec::model_b_symmetric(), 0.0, tr).unwrap().value;
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn mapping_identity() {
        let s = ModelSpec::model_a();
        let tr = Truncation::new(2, 6);
        let r = third_order(&s, R2, 0.3, 0.2, 0.5, tr).unwrap();
        let x = x1(&s, -0.3, -0.7, 0.5, tr).unwrap();
        assert_eq!(r.value, x.value * C64::new(0.0, -1.0));
    }

    #[test]
    fn rejects() {
        let tr = Truncation::default();
        assert!(third_order(&ModelSpec::model_b(), R1, 0.1, 0.1, 0.1, tr).is_err());
        assert!(third_order(&ModelSpec::model_a(), R1, -0.1, 0.1, 0.1, tr).is_err());
        assert!(linear_response_b(&ModelSpec::model_b(), 0.1, tr).is_err());
        assert!(linear_response_a(&ModelSpec::model_b(), 0.1, tr).is_err());
    }
}
