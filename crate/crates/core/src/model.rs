//! Model parameters, validation and electronic index patterns.
//!
//! Levels are indexed `0..N`: 0 is the ground state, 1 and 2 the coupled
//! excited states, 3 (model A only) the doubly excited state. `ħ = 1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Four levels, one mode.
    A,
    /// Three levels, two modes (dimer).
    B,
}

impl ModelKind {
    pub fn n_levels(self) -> usize {
        match self {
            ModelKind::A => 4,
            ModelKind::B => 3,
        }
    }

    pub fn n_modes(self) -> usize {
        match self {
            ModelKind::A => 1,
            ModelKind::B => 2,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::A => write!(f, "A"),
            ModelKind::B => write!(f, "B"),
        }
    }
}

/// All Hamiltonian parameters.
///
/// `displacements[ζ][ξ]` is the equilibrium shift of mode `ζ` in level `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub mode_freqs: Vec<f64>,
    pub level_freqs: Vec<f64>,
    pub displacements: Vec<Vec<f64>>,
    pub eta: C64,
    pub dipole_01: C64,
    pub dipole_23: C64,
}

impl ModelSpec {
    /// Three-level model with one mode, energies in units of `η`. `ω₃ = ω₁ + ω₂`.
    pub fn model_a() -> Self {
        ModelSpec {
            kind: ModelKind::A,
            mode_freqs: vec![1.587],
            level_freqs: vec![0.0, 14.29, 17.14, 14.29 + 17.14],
            displacements: vec![vec![0.0, 0.1, 0.2, 0.15]],
            eta: C64::new(1.0, 0.0),
            dipole_01: C64::new(1.0, 0.0),
            dipole_23: C64::new(1.0, 0.0),
        }
    }

    /// Dimer with one mode per monomer, energies in units of `η`.
    pub fn model_b() -> Self {
        ModelSpec {
            kind: ModelKind::B,
            mode_freqs: vec![1.587, 1.587],
            level_freqs: vec![0.0, 14.29, 17.14],
            displacements: vec![vec![0.0, 0.1, 0.0], vec![0.0, 0.0, 0.1]],
            eta: C64::new(1.0, 0.0),
            dipole_01: C64::new(1.0, 0.0),
            dipole_23: C64::new(0.0, 0.0),
        }
    }

    /// Model B with degenerate excited levels at `ω₁`.
    pub fn model_b_symmetric() -> Self {
        let mut s = Self::model_b();
        s.level_freqs[2] = s.level_freqs[1];
        s
    }

    pub fn n_levels(&self) -> usize {
        self.level_freqs.len()
    }

    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }

    /// `z_{ζ,ξ}`.
    pub fn z(&self, mode: usize, level: usize) -> f64 {
        self.displacements[mode][level]
    }

    /// `ω₂₁ = ω₂ − ω₁`.
    pub fn omega21(&self) -> f64 {
        self.level_freqs[2] - self.level_freqs[1]
    }

    /// `max(ω_ζ, |ω₂₁|, |η|)`, the reference for zero-frequency tolerances.
    pub fn omega_scale(&self) -> f64 {
        self.mode_freqs
            .iter()
            .copied()
            .fold(self.omega21().abs().max(self.eta.norm()), f64::max)
    }

    /// Every energy divided by `|η|`, so times are measured in `1/|η|`.
    pub fn in_eta_units(&self) -> Result<ModelSpec> {
        let s = self.eta.norm();
        if s == 0.0 {
            return Err(Error::InvalidModel("energies in units of η require η ≠ 0".into()));
        }
        let mut out = self.clone();
        out.mode_freqs.iter_mut().for_each(|w| *w /= s);
        out.level_freqs.iter_mut().for_each(|w| *w /= s);
        out.eta /= s;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        let (n, g) = (self.n_levels(), self.n_modes());
        if !(3..=4).contains(&n) {
            return bad(format!("level count {n} not in {{3, 4}}"));
        }
        if !(1..=2).contains(&g) {
            return bad(format!("mode count {g} not in {{1, 2}}"));
        }
        if n != self.kind.n_levels() || g != self.kind.n_modes() {
            return bad(format!(
                "model {} requires N={}, G={}; got N={n}, G={g}",
                self.kind,
                self.kind.n_levels(),
                self.kind.n_modes()
            ));
        }
        for (i, &w) in self.mode_freqs.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("mode frequency {i} must be positive and finite, got {w}"));
            }
        }
        if let Some(w) = self.level_freqs.iter().find(|w| !w.is_finite()) {
            return bad(format!("level frequency {w} is not finite"));
        }
        if self.displacements.len() != g {
            return bad(format!("displacement table has {} rows, expected {g}", self.displacements.len()));
        }
        for (zeta, row) in self.displacements.iter().enumerate() {
            if row.len() != n {
                return bad(format!("displacement row {zeta} has {} entries, expected {n}", row.len()));
            }
            if row.iter().any(|z| !z.is_finite()) {
                return bad(format!("displacement row {zeta} has non-finite entries"));
            }
            if row[0] != 0.0 {
                return bad(format!("ground-state displacement z[{zeta}][0] must be 0, got {}", row[0]));
            }
        }
        for (name, v) in [("eta", self.eta), ("mu01", self.dipole_01), ("mu23", self.dipole_23)] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return bad(format!("{name} is not finite"));
            }
        }
        Ok(())
    }

    /// Checks `kind` as well as the general invariants.
    pub fn validate_as(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::ModelMismatch { expected: kind.to_string(), found: self.kind.to_string() });
        }
        self.validate()
    }

    /// Identical monomers: `ω₁ = ω₂`, equal mode frequencies, `z₁,₁ = z₂,₂`, `z₁,₂ = z₂,₁ = 0`.
    pub fn is_symmetric_dimer(&self) -> bool {
        if self.kind != ModelKind::B || self.n_modes() != 2 || self.n_levels() != 3 {
            return false;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        close(self.level_freqs[1], self.level_freqs[2])
            && close(self.mode_freqs[0], self.mode_freqs[1])
            && close(self.z(0, 1), self.z(1, 2))
            && self.z(0, 2) == 0.0
            && self.z(1, 1) == 0.0
    }
}

/// Returns the spec if all invariants hold.
pub fn validate(spec: ModelSpec) -> Result<ModelSpec> {
    spec.validate()?;
    Ok(spec)
}

/// Electronic state per time interval, `j_1..j_M`; `j_0 = j_{M+1} = 0` implied.
///
/// Interval 1 is the latest in time (adjacent to the final state).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElectronicPattern {
    states: Vec<usize>,
}

impl ElectronicPattern {
    pub fn new(states: Vec<usize>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("pattern needs at least one interval".into()));
        }
        if let Some(s) = states.iter().find(|&&s| s > 3) {
            return Err(Error::InvalidArgument(format!("electronic level {s} out of range 0..=3")));
        }
        Ok(ElectronicPattern { states })
    }

    /// `first, second, first, ...` of length `m`.
    pub fn alternating(first: usize, second: usize, m: usize) -> Self {
        ElectronicPattern { states: (0..m).map(|i| if i % 2 == 0 { first } else { second }).collect() }
    }

    /// `M = 2n+1` intervals starting and ending in `σ`.
    pub fn diagonal(sigma: usize, n: usize) -> Self {
        Self::alternating(sigma, 3 - sigma, 2 * n + 1)
    }

    /// `M = 2n+2` intervals from `initial` (rightmost) to `final_state` (leftmost).
    pub fn off_diagonal(final_state: usize, n: usize) -> Self {
        Self::alternating(final_state, 3 - final_state, 2 * n + 2)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `j_1..j_M`.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// `j_0..j_{M+1}`.
    pub fn with_endpoints(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.states.len() + 2);
        v.push(0);
        v.extend_from_slice(&self.states);
        v.push(0);
        v
    }

    /// Final electronic state (leftmost interval).
    pub fn final_state(&self) -> usize {
        self.states[0]
    }

    /// Initial electronic state (rightmost interval).
    pub fn initial_state(&self) -> usize {
        self.states[self.states.len() - 1]
    }
}

/// A dipole given as a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DipoleValue {
    Real(f64),
    Complex([f64; 2]),
}

impl DipoleValue {
    fn value(self) -> C64 {
        match self {
            DipoleValue::Real(r) => C64::new(r, 0.0),
            DipoleValue::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl Default for DipoleValue {
    fn default() -> Self {
        DipoleValue::Real(1.0)
    }
}

/// JSON configuration file.
///
/// With `normalize_eta`, every energy is divided by `|η|` so that times come
/// out in units of `1/|η|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub omega_modes: Vec<f64>,
    pub omega_levels: Vec<f64>,
    /// Row-major `G × N`.
    pub displacements: Vec<f64>,
    pub eta_re: f64,
    #[serde(default)]
    pub eta_im: f64,
    #[serde(default)]
    pub mu01: DipoleValue,
    #[serde(default)]
    pub mu23: DipoleValue,
    #[serde(default)]
    pub normalize_eta: bool,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
    }

    pub fn from_spec(spec: &ModelSpec) -> Self {
        ModelConfig {
            model: spec.kind,
            omega_modes: spec.mode_freqs.clone(),
            omega_levels: spec.level_freqs.clone(),
            displacements: spec.displacements.iter().flatten().copied().collect(),
            eta_re: spec.eta.re,
            eta_im: spec.eta.im,
            mu01: DipoleValue::Complex([spec.dipole_01.re, spec.dipole_01.im]),
            mu23: DipoleValue::Complex([spec.dipole_23.re, spec.dipole_23.im]),
            normalize_eta: false,
        }
    }

    /// Builds and validates the spec.
    pub fn into_spec(&self) -> Result<ModelSpec> {
        let g = self.omega_modes.len();
        let n = self.omega_levels.len();
        if self.displacements.len() != g * n {
            return Err(Error::InvalidModel(format!(
                "displacements has {} entries, expected G×N = {}",
                self.displacements.len(),
                g * n
            )));
        }
        let spec = validate(ModelSpec {
            kind: self.model,
            mode_freqs: self.omega_modes.clone(),
            level_freqs: self.omega_levels.clone(),
            displacements: self.displacements.chunks(n.max(1)).map(<[f64]>::to_vec).collect(),
            eta: C64::new(self.eta_re, self.eta_im),
            dipole_01: self.mu01.value(),
            dipole_23: self.mu23.value(),
        })?;
        if self.normalize_eta {
            spec.in_eta_units()
        } else {
            Ok(spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ModelSpec::model_a().validate_as(ModelKind::A).unwrap();
        ModelSpec::model_b().validate_as(ModelKind::B).unwrap();
        assert!(ModelSpec::model_b_symmetric().is_symmetric_dimer());
        assert!(!ModelSpec::model_b().is_symmetric_dimer());
    }

    #[test]
    fn fig4_parameters_accepted() {
        let s = ModelSpec::model_a();
        assert_eq!(s.displacements[0], vec![0.0, 0.1, 0.2, 0.15]);
        assert_eq!(s.mode_freqs[0], 1.587);
        assert_eq!(&s.level_freqs[1..3], &[14.29, 17.14]);
        assert!(validate(s).is_ok());
    }

    #[test]
    fn fig3_parameters_accepted() {
        let s = ModelSpec::model_b();
        assert_eq!(s.z(0, 1), 0.1);
        assert_eq!(s.z(0, 2), 0.0);
        assert_eq!(s.z(1, 1), 0.0);
        assert_eq!(s.z(1, 2), 0.1);
        assert!(validate(s).is_ok());
    }

    #[test]
    fn zero_mode_frequency_rejected() {
        let mut s = ModelSpec::model_a();
        s.mode_freqs[0] = 0.0;
        let err = validate(s).unwrap_err().to_string();
        assert!(err.contains("positive"), "{err}");
    }

    #[test]
    fn shifted_ground_state_rejected() {
        let mut s = ModelSpec::model_a();
        s.displacements[0][0] = 0.05;
        assert!(validate(s).is_err());
    }

    #[test]
    fn kinds_are_exclusive() {
        let mut a = ModelSpec::model_a();
        a.kind = ModelKind::B;
        assert!(a.validate().is_err());
        let mut b = ModelSpec::model_b();
        b.kind = ModelKind::A;
        assert!(b.validate().is_err());
        assert!(matches!(
            ModelSpec::model_a().validate_as(ModelKind::B),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn validation_idempotent() {
        let s = ModelSpec::model_b();
        let once = validate(s.clone()).unwrap();
        let twice = validate(once.clone()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, s);
    }

    #[test]
    fn config_round_trip() {
        let spec = ModelSpec::model_b();
        let cfg = ModelConfig::from_spec(&spec);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ModelConfig::from_json(&text).unwrap().into_spec().unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn config_dipole_forms() {
        let text = r#"{"model":"A","omega_modes":[1.587],"omega_levels":[0,14.29,17.14,31.43],
            "displacements":[0,0.1,0.2,0.15],"eta_re":2.0,"eta_im":0.0,"mu01":0.5,"mu23":[1.0,-1.0],
            "normalize_eta":true}"#;
        let spec = ModelConfig::from_json(text).unwrap().into_spec().unwrap();
        assert_eq!(spec.dipole_01, C64::new(0.5, 0.0));
        assert_eq!(spec.dipole_23, C64::new(1.0, -1.0));
        assert_eq!(spec.eta, C64::new(1.0, 0.0));
        assert_eq!(spec.level_freqs[1], 7.145);
    }

    #[test]
    fn config_shape_mismatch() {
        let text = r#"{"model":"B","omega_modes":[1.0,1.0],"omega_levels":[0,1,1],
            "displacements":[0,0.1,0],"eta_re":1.0}"#;
        assert!(ModelConfig::from_json(text).unwrap().into_spec().is_err());
    }

    #[test]
    fn patterns() {
        let d = ElectronicPattern::diagonal(2, 2);
        assert_eq!(d.states(), &[2, 1, 2, 1, 2]);
        let o = ElectronicPattern::off_diagonal(1, 1);
        assert_eq!(o.states(), &[1, 2, 1, 2]);
        assert_eq!(o.final_state(), 1);
        assert_eq!(o.initial_state(), 2);
        assert_eq!(o.with_endpoints(), vec![0, 1, 2, 1, 2, 0]);
        assert!(ElectronicPattern::new(vec![]).is_err());
        assert!(ElectronicPattern::new(vec![1, 4]).is_err());
        assert!(ElectronicPattern::new(vec![1, 0, 1]).is_ok());
    }
}
