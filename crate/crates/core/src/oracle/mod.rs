//! Brute-force references: exact diagonalization in a truncated Fock space,
//! displacement-operator products, and nested quadrature of fixed Dyson orders.
//!
//! Basis ordering is `level × Fock`, with the Fock index `n_1 (N_max+1) + n_2`
//! for two modes.

pub mod quadrature;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{ElectronicPattern, ModelKind, ModelSpec};
use crate::response::{pathway, PathwayKind, PathwayLabel};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Starting Fock cutoff per mode.
    pub n_max: usize,
    /// Largest cutoff tried by the escalation loop.
    pub max_n_max: usize,
    /// Allowed population on the outermost Fock level.
    pub tail_tol: f64,
    /// Largest allowed Hilbert-space dimension.
    pub dim_cap: usize,
    /// Gauss-Legendre nodes per dimension.
    pub quad_nodes: usize,
    /// Relative agreement required between full and halved quadrature rules.
    pub quad_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n_max: 40, max_n_max: 160, tail_tol: 1e-10, dim_cap: 8000, quad_nodes: 64, quad_tol: 1e-9 }
    }
}

impl OracleConfig {
    /// Defaults sized to the mode count.
    pub fn for_spec(spec: &ModelSpec) -> Self {
        if spec.n_modes() >= 2 {
            OracleConfig { n_max: 16, max_n_max: 64, ..Self::default() }
        } else {
            Self::default()
        }
    }
}

/// Dense operator on `levels × Fock^G`.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub levels: Vec<usize>,
    pub n_modes: usize,
    pub n_max: usize,
    pub matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn fock_dim(&self) -> usize {
        (self.n_max + 1).pow(self.n_modes as u32)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |H − H†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Sub-block between two levels.
    pub fn block(&self, row_level: usize, col_level: usize) -> DMatrix<C64> {
        let d = self.fock_dim();
        let r = self.levels.iter().position(|&l| l == row_level).expect("level present");
        let c = self.levels.iter().position(|&l| l == col_level).expect("level present");
        self.matrix.view((r * d, c * d), (d, d)).into_owned()
    }
}

fn fock_dim(n_modes: usize, n_max: usize) -> usize {
    (n_max + 1).pow(n_modes as u32)
}

/// Occupation of `mode` in composite Fock index `idx`.
fn occupation(idx: usize, mode: usize, n_modes: usize, n_max: usize) -> usize {
    let stride = (n_max + 1).pow((n_modes - 1 - mode) as u32);
    (idx / stride) % (n_max + 1)
}

/// `H` restricted to `levels` (coupling included when both 1 and 2 are present).
pub fn block_hamiltonian(spec: &ModelSpec, levels: &[usize], n_max: usize, dim_cap: usize) -> Result<FockOperator> {
    let g = spec.n_modes();
    let d = fock_dim(g, n_max);
    let dim = d * levels.len();
    if dim > dim_cap {
        return Err(Error::DimensionCap { dim, cap: dim_cap });
    }
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for (li, &xi) in levels.iter().enumerate() {
        let off = li * d;
        for idx in 0..d {
            let mut diag = spec.level_freqs[xi];
            for zeta in 0..g {
                let n = occupation(idx, zeta, g, n_max) as f64;
                let z = spec.z(zeta, xi);
                diag += spec.mode_freqs[zeta] * (n + z * z);
            }
            h[(off + idx, off + idx)] = C64::new(diag, 0.0);
            // ω z (a + a†) couples n and n+1 of one mode
            for zeta in 0..g {
                let n = occupation(idx, zeta, g, n_max);
                if n < n_max {
                    let stride = (n_max + 1).pow((g - 1 - zeta) as u32);
                    let v = spec.mode_freqs[zeta] * spec.z(zeta, xi) * ((n + 1) as f64).sqrt();
                    h[(off + idx, off + idx + stride)] = C64::new(v, 0.0);
                    h[(off + idx + stride, off + idx)] = C64::new(v, 0.0);
                }
            }
        }
    }
    if let (Some(p1), Some(p2)) = (levels.iter().position(|&l| l == 1), levels.iter().position(|&l| l == 2)) {
        for idx in 0..d {
            h[(p1 * d + idx, p2 * d + idx)] = spec.eta;
            h[(p2 * d + idx, p1 * d + idx)] = spec.eta.conj();
        }
    }
    Ok(FockOperator { levels: levels.to_vec(), n_modes: g, n_max, matrix: h })
}

/// Full Hamiltonian on all levels.
pub fn build_hamiltonian(spec: &ModelSpec, n_max: usize) -> Result<FockOperator> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("N_max must be at least 1".into()));
    }
    let levels: Vec<usize> = (0..spec.n_levels()).collect();
    block_hamiltonian(spec, &levels, n_max, OracleConfig::default().dim_cap.max(usize::MAX / 2))
}

/// Eigendecomposition of a Hermitian block.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub levels: Vec<usize>,
    pub fock_dim: usize,
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl BlockEigen {
    pub fn new(op: &FockOperator) -> Self {
        let real = op.matrix.iter().all(|x| x.im == 0.0);
        let (values, vectors) = if real {
            let eig = SymmetricEigen::new(op.matrix.map(|x| x.re));
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let eig = SymmetricEigen::new(op.matrix.clone());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        BlockEigen { levels: op.levels.clone(), fock_dim: op.fock_dim(), values, vectors }
    }

    /// Basis index of `(level, vacuum)`.
    pub fn vacuum_index(&self, level: usize) -> usize {
        self.levels.iter().position(|&l| l == level).expect("level in block") * self.fock_dim
    }

    /// `e^{−iHt} v`.
    pub fn apply(&self, t: f64, v: &DVector<C64>) -> DVector<C64> {
        let mut c = self.vectors.ad_mul(v);
        for (ci, &e) in c.iter_mut().zip(&self.values) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * c
    }

    /// Column `e^{−iHt}|src⟩`.
    pub fn column(&self, t: f64, src: usize) -> DVector<C64> {
        let c = DVector::from_iterator(
            self.values.len(),
            self.values.iter().enumerate().map(|(k, &e)| self.vectors[(src, k)].conj() * C64::from_polar(1.0, -e * t)),
        );
        &self.vectors * c
    }

    /// Row `⟨dst|e^{−iHt}`.
    pub fn row(&self, t: f64, dst: usize) -> DVector<C64> {
        let c = DVector::from_iterator(
            self.values.len(),
            self.values.iter().enumerate().map(|(k, &e)| self.vectors[(dst, k)] * C64::from_polar(1.0, -e * t)),
        );
        self.vectors.map(|x| x.conj()) * c
    }
}

/// Population on Fock states with any mode at the cutoff.
fn edge_population(v: &DVector<C64>, n_levels: usize, n_modes: usize, n_max: usize) -> f64 {
    let d = fock_dim(n_modes, n_max);
    let mut acc = 0.0;
    for l in 0..n_levels {
        for idx in 0..d {
            if (0..n_modes).any(|z| occupation(idx, z, n_modes, n_max) == n_max) {
                acc += v[l * d + idx].norm_sqr();
            }
        }
    }
    acc
}

/// Diagonalized blocks at one cutoff.
#[derive(Debug, Clone)]
pub struct ExactSolver {
    pub n_max: usize,
    n_modes: usize,
    excited: BlockEigen,
    ground: BlockEigen,
    doubly: Option<BlockEigen>,
}

impl ExactSolver {
    pub fn new(spec: &ModelSpec, n_max: usize, dim_cap: usize) -> Result<Self> {
        spec.validate()?;
        let excited = BlockEigen::new(&block_hamiltonian(spec, &[1, 2], n_max, dim_cap)?);
        let ground = BlockEigen::new(&block_hamiltonian(spec, &[0], n_max, dim_cap)?);
        let doubly = if spec.n_levels() > 3 {
            Some(BlockEigen::new(&block_hamiltonian(spec, &[3], n_max, dim_cap)?))
        } else {
            None
        };
        Ok(ExactSolver { n_max, n_modes: spec.n_modes(), excited, ground, doubly })
    }

    fn fock_dim(&self) -> usize {
        fock_dim(self.n_modes, self.n_max)
    }

    /// `e^{−iHt}|σ′;0⟩` on the excited block and its edge population.
    pub fn excited_column(&self, initial: usize, t: f64) -> (DVector<C64>, f64) {
        let col = self.excited.column(t, self.excited.vacuum_index(initial));
        let tail = edge_population(&col, 2, self.n_modes, self.n_max);
        (col, tail)
    }

    /// `⟨σ;0|e^{−iHt}|σ′;0⟩` and the edge population of the evolved state.
    pub fn element(&self, final_state: usize, initial: usize, t: f64) -> (C64, f64) {
        let (col, tail) = self.excited_column(initial, t);
        (col[self.excited.vacuum_index(final_state)], tail)
    }

    /// `⟨1,0|U_e(t_L)|s⟩ ⟨s|U_c(t_C)|s′⟩ ⟨s′|U_e(t_R)|1,0⟩` with the middle
    /// electronic indices fixed by `kind`, and the larger edge population.
    pub fn multitime(&self, kind: PathwayKind, t_l: f64, t_c: f64, t_r: f64) -> Result<(C64, f64)> {
        let d = self.fock_dim();
        let (mid, central) = match kind {
            PathwayKind::X1 => (1usize, &self.ground),
            PathwayKind::X2 => (
                2usize,
                self.doubly.as_ref().ok_or_else(|| Error::ModelMismatch { expected: "A".into(), found: "B".into() })?,
            ),
        };
        let off = (mid - 1) * d;
        let src = self.excited.vacuum_index(1);
        let row = self.excited.row(t_l, src);
        let col = self.excited.column(t_r, src);
        let tail = edge_population(&row, 2, self.n_modes, self.n_max).max(edge_population(&col, 2, self.n_modes, self.n_max));
        let right = col.rows(off, d).into_owned();
        let mid_vec = central.apply(t_c, &right);
        let value = row.rows(off, d).transpose() * mid_vec;
        Ok((value[(0, 0)], tail))
    }
}

fn escalate<T>(spec: &ModelSpec, cfg: &OracleConfig, mut f: impl FnMut(&ExactSolver) -> Result<(T, f64)>) -> Result<T> {
    let mut n = cfg.n_max;
    let mut last_tail = f64::NAN;
    while n <= cfg.max_n_max {
        let solver = ExactSolver::new(spec, n, cfg.dim_cap)?;
        let (v, tail) = f(&solver)?;
        if tail < cfg.tail_tol {
            return Ok(v);
        }
        last_tail = tail;
        n *= 2;
    }
    Err(Error::Truncation(format!("edge population {last_tail:.3e} above {:.1e} at N_max ≤ {}", cfg.tail_tol, cfg.max_n_max)))
}

/// `⟨σ;0|e^{−iHt}|σ′;0⟩` with automatic cutoff escalation.
pub fn exact_propagator(spec: &ModelSpec, final_state: usize, initial: usize, t: f64, cfg: &OracleConfig) -> Result<C64> {
    check_excited(final_state)?;
    check_excited(initial)?;
    escalate(spec, cfg, |s| Ok(s.element(final_state, initial, t)))
}

/// [`exact_propagator`] over many times with one shared cutoff.
pub fn exact_propagator_scan(
    spec: &ModelSpec,
    final_state: usize,
    initial: usize,
    times: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<C64>> {
    check_excited(final_state)?;
    check_excited(initial)?;
    escalate(spec, cfg, |s| {
        let mut worst: f64 = 0.0;
        let vals = times
            .iter()
            .map(|&t| {
                let (v, tail) = s.element(final_state, initial, t);
                worst = worst.max(tail);
                v
            })
            .collect();
        Ok((vals, worst))
    })
}

fn check_excited(s: usize) -> Result<()> {
    if s == 1 || s == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("excited state must be 1 or 2, got {s}")))
    }
}

/// Bare three-segment element for an X1/X2 argument triple.
pub fn exact_segments(spec: &ModelSpec, kind: PathwayKind, t_l: f64, t_c: f64, t_r: f64, cfg: &OracleConfig) -> Result<C64> {
    if kind == PathwayKind::X2 && spec.kind != ModelKind::A {
        return Err(Error::ModelMismatch { expected: "A".into(), found: spec.kind.to_string() });
    }
    escalate(spec, cfg, |s| s.multitime(kind, t_l, t_c, t_r))
}

/// Bare three-segment element of a pathway at waiting times `(t₁, t₂, t₃)`.
pub fn exact_multitime(spec: &ModelSpec, label: PathwayLabel, t1: f64, t2: f64, t3: f64, cfg: &OracleConfig) -> Result<C64> {
    spec.validate_as(ModelKind::A)?;
    let p = pathway(label);
    let (t_l, t_c, t_r) = p.map_times(t1, t2, t3);
    exact_segments(spec, p.kind, t_l, t_c, t_r, cfg)
}

/// `exp(α a† − α* a)` on Fock levels `0..=n_max` (scaling and squaring).
pub fn displacement_matrix(alpha: C64, n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    let mut gen = DMatrix::<C64>::zeros(d, d);
    for n in 0..n_max {
        let s = ((n + 1) as f64).sqrt();
        gen[(n + 1, n)] = alpha * s;
        gen[(n, n + 1)] = -alpha.conj() * s;
    }
    gen.exp()
}

const SEQUENCE_EDGE_TOL: f64 = 1e-16;

/// `⟨0|Π_l D(α_l) e^{−iω a†a τ_l}|0⟩`, factors ordered left to right.
pub fn displaced_sequence_expectation(steps: &[(C64, f64)], omega: f64, n_max: usize) -> Result<C64> {
    if steps.is_empty() {
        return Err(Error::InvalidArgument("sequence needs at least one displacement".into()));
    }
    let d = n_max + 1;
    let mut v = DVector::<C64>::zeros(d);
    v[0] = C64::new(1.0, 0.0);
    let mut edge: f64 = 0.0;
    for &(alpha, tau) in steps.iter().rev() {
        for (n, x) in v.iter_mut().enumerate() {
            *x *= C64::from_polar(1.0, -omega * n as f64 * tau);
        }
        v = displacement_matrix(alpha, n_max) * v;
        edge = edge.max(v[n_max].norm_sqr());
    }
    if edge > SEQUENCE_EDGE_TOL {
        return Err(Error::Truncation(format!("edge population {edge:.2e} at N_max = {n_max}; displacements too large")));
    }
    Ok(v[0])
}

/// Boundary displacement steps for an interval pattern of one mode and
/// interval durations `τ_1..τ_M` (interval 1 is the latest).
pub fn interval_steps(alphas: &[f64], taus: &[f64]) -> Vec<(C64, f64)> {
    let mut steps: Vec<(C64, f64)> =
        alphas.iter().zip(taus).map(|(&a, &t)| (C64::new(a, 0.0), t)).collect();
    steps.push((C64::new(*alphas.last().expect("M+1 boundaries"), 0.0), 0.0));
    steps
}

/// Fixed-order Dyson term `(−i)^n ∫⋯∫ ⟨σ;0|e^{−iH₀(t−t₁)}V⋯V e^{−iH₀t_n}|σ′;0⟩`
/// over `t > t₁ > … > t_n > 0`.
pub fn dyson_term_quadrature(
    spec: &ModelSpec,
    final_state: usize,
    initial: usize,
    n: usize,
    t: f64,
    cfg: &OracleConfig,
) -> Result<C64> {
    check_excited(final_state)?;
    check_excited(initial)?;
    if n > 3 {
        return Err(Error::InvalidArgument(format!("quadrature limited to 3 insertions, got {n}")));
    }
    if (n % 2 == 0) != (final_state == initial) {
        return Ok(C64::new(0.0, 0.0));
    }
    let pattern = ElectronicPattern::alternating(final_state, 3 - final_state, n + 1);
    let states = pattern.with_endpoints();
    let m = n + 1;
    let g = spec.n_modes();
    let n_max = cfg.n_max;

    // boundary operators per mode, α_a = z_{j_a} − z_{j_{a+1}}
    let dmats: Vec<Vec<DMatrix<C64>>> = (0..g)
        .map(|zeta| {
            (0..=m)
                .map(|a| displacement_matrix(C64::new(spec.z(zeta, states[a]) - spec.z(zeta, states[a + 1]), 0.0), n_max))
                .collect()
        })
        .collect();
    let mut coupling = C64::new(1.0, 0.0);
    for w in pattern.states().windows(2) {
        coupling *= if (w[0], w[1]) == (1, 2) { spec.eta } else { spec.eta.conj() };
    }
    let prefactor = (-I).powi(n as i32) * coupling;

    let integrand = |inner: &[f64]| -> C64 {
        // τ_p = t_{p−1} − t_p
        let mut taus = Vec::with_capacity(m);
        let mut prev = t;
        for &tp in inner {
            taus.push(prev - tp);
            prev = tp;
        }
        taus.push(prev);
        let mut val = C64::new(1.0, 0.0);
        for (p, &tau) in taus.iter().enumerate() {
            val *= C64::from_polar(1.0, -spec.level_freqs[pattern.states()[p]] * tau);
        }
        for zeta in 0..g {
            let w = spec.mode_freqs[zeta];
            let mut v = dmats[zeta][m].column(0).into_owned();
            for p in (0..m).rev() {
                for (k, x) in v.iter_mut().enumerate() {
                    *x *= C64::from_polar(1.0, -w * k as f64 * taus[p]);
                }
                v = &dmats[zeta][p] * v;
            }
            val *= v[0];
        }
        val
    };

    if n == 0 {
        return Ok(integrand(&[]));
    }
    let full = quadrature::simplex_integral(n, t, cfg.quad_nodes, &integrand);
    let half = quadrature::simplex_integral(n, t, cfg.quad_nodes / 2, &integrand);
    if (full - half).norm() > cfg.quad_tol * full.norm().max(1e-12) {
        return Err(Error::Quadrature(format!(
            "{} vs {} nodes differ by {:.2e}",
            cfg.quad_nodes,
            cfg.quad_nodes / 2,
            (full - half).norm()
        )));
    }
    Ok(prefactor * full)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_a() -> ModelSpec {
        ModelSpec::model_a()
    }

    #[test]
    fn hamiltonian_structure() {
        let mut s = small_a();
        let h = build_hamiltonian(&s, 6).unwrap();
        assert!(h.hermiticity_residual() < 1e-12);
        assert_eq!(h.dim(), 4 * 7);
        s.eta = C64::new(0.0, 0.0);
        let h0 = build_hamiltonian(&s, 6).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert!(h0.block(a, b).iter().all(|x| x.norm() == 0.0));
                }
            }
        }
        // undisplaced ground block: lowest eigenvalue is ω₀
        let g = BlockEigen::new(&block_hamiltonian(&s, &[0], 6, 1000).unwrap());
        let min = g.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - s.level_freqs[0]).abs() < 1e-12);
    }

    #[test]
    fn complex_eta_hermitian() {
        let mut s = small_a();
        s.eta = C64::new(0.6, -0.8);
        let h = build_hamiltonian(&s, 5).unwrap();
        assert!(h.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn propagator_at_zero_time() {
        let s = small_a();
        let cfg = OracleConfig::default();
        assert!((exact_propagator(&s, 1, 1, 0.0, &cfg).unwrap() - 1.0).norm() < 1e-12);
        assert!(exact_propagator(&s, 2, 1, 0.0, &cfg).unwrap().norm() < 1e-12);
    }

    #[test]
    fn adiabatic_limit_matches_closed_form() {
        let mut s = small_a();
        s.eta = C64::new(0.0, 0.0);
        let cfg = OracleConfig::default();
        let (w, z1, w1) = (s.mode_freqs[0], s.z(0, 1), s.level_freqs[1]);
        for t in [0.3, 1.1, 2.5] {
            let exact = exact_propagator(&s, 1, 1, t, &cfg).unwrap();
            let u0 = (z1 * z1 * (C64::from_polar(1.0, -w * t) - 1.0)).exp() * C64::from_polar(1.0, -w1 * t);
            assert!((exact - u0).norm() < 1e-12, "{exact} vs {u0}");
        }
    }

    #[test]
    fn unitarity_and_cutoff_stability() {
        let s = small_a();
        let solver = ExactSolver::new(&s, 40, 10_000).unwrap();
        let (col, tail) = solver.excited_column(1, 1.3);
        assert!(tail < 1e-10);
        assert!((col.norm_squared() - 1.0).abs() < 1e-10);
        let cfg = OracleConfig::default();
        let a = exact_propagator(&s, 1, 1, 1.3, &cfg).unwrap();
        let b = exact_propagator(&s, 1, 1, 1.3, &OracleConfig { n_max: 80, ..cfg }).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn multitime_at_zero_times() {
        let s = small_a();
        let cfg = OracleConfig::default();
        for label in PathwayLabel::ALL {
            let v = exact_multitime(&s, label, 0.0, 0.0, 0.0, &cfg).unwrap();
            let expect = if pathway(label).kind == PathwayKind::X1 { 1.0 } else { 0.0 };
            assert!((v - expect).norm() < 1e-12, "{label:?}: {v}");
        }
    }

    #[test]
    fn multitime_adiabatic_gsb() {
        // η = 0: X1 factorizes into vacuum overlaps of displaced oscillators
        let mut s = small_a();
        s.eta = C64::new(0.0, 0.0);
        let cfg = OracleConfig::default();
        let (w, z, w1) = (s.mode_freqs[0], s.z(0, 1), s.level_freqs[1]);
        let (tl, tc, tr) = (-0.4, -0.9, 0.5);
        let v = exact_segments(&s, PathwayKind::X1, tl, tc, tr, &cfg).unwrap();
        // ⟨0|D(−z)U(t_L)D(z)U(t_C)D(−z)U(t_R)D(z)|0⟩ e^{−iω₁(t_L+t_R)}
        let seq = displaced_sequence_expectation(
            &[(C64::new(-z, 0.0), tl), (C64::new(z, 0.0), tc), (C64::new(-z, 0.0), tr), (C64::new(z, 0.0), 0.0)],
            w,
            40,
        )
        .unwrap();
        let want = seq * C64::from_polar(1.0, -w1 * (tl + tr)) * C64::from_polar(1.0, -s.level_freqs[0] * tc);
        assert!((v - want).norm() < 1e-12, "{v} vs {want}");
    }

    #[test]
    fn displacement_expectations() {
        for a in [0.1, 0.3, 0.55] {
            let alpha = C64::new(a, -0.2 * a);
            let v = displaced_sequence_expectation(&[(alpha, 0.7)], 1.3, 40).unwrap();
            assert!((v - (-alpha.norm_sqr() / 2.0).exp()).norm() < 1e-13);
        }
        let v = displaced_sequence_expectation(&[(C64::new(0.0, 0.0), 0.4), (C64::new(0.0, 0.0), 1.0)], 2.0, 20).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        assert!(displaced_sequence_expectation(&[(C64::new(4.0, 0.0), 0.0)], 1.0, 10).is_err());
    }

    #[test]
    fn zeroth_order_quadrature_is_adiabatic() {
        let s = small_a();
        let cfg = OracleConfig { n_max: 30, ..OracleConfig::default() };
        let t = 0.8;
        let q = dyson_term_quadrature(&s, 1, 1, 0, t, &cfg).unwrap();
        let (w, z1, w1) = (s.mode_freqs[0], s.z(0, 1), s.level_freqs[1]);
        let u0 = (z1 * z1 * (C64::from_polar(1.0, -w * t) - 1.0)).exp() * C64::from_polar(1.0, -w1 * t);
        assert!((q - u0).norm() < 1e-13);
        assert_eq!(dyson_term_quadrature(&s, 2, 1, 2, t, &cfg).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn dyson_terms_sum_to_exact() {
        // short time, orders 0..3 dominate
        let s = small_a();
        let cfg = OracleConfig { n_max: 30, quad_nodes: 24, quad_tol: 1e-6, ..OracleConfig::default() };
        let t = 0.05;
        let series: C64 = (0..=3).map(|n| dyson_term_quadrature(&s, 1, 1, n, t, &cfg).unwrap()).sum();
        let exact = exact_propagator(&s, 1, 1, t, &OracleConfig::default()).unwrap();
        assert!((series - exact).norm() < 1e-6, "{series} vs {exact}");
    }
}
