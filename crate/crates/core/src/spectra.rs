//! Grid scans, Fourier transforms and table export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::oracle::{self, OracleConfig};
use crate::propagator::{multimode_propagator, Truncation};
use crate::response::{linear_response_a, linear_response_b, pathway, third_order, PathwayLabel};
use crate::C64;

/// Uniform axis `start, start+Δ, …, stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, start: f64, stop: f64, n_points: usize) -> Self {
        Axis { name: name.into(), start, stop, n_points }
    }

    pub fn step(&self) -> f64 {
        if self.n_points < 2 {
            0.0
        } else {
            (self.stop - self.start) / (self.n_points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let d = self.step();
        (0..self.n_points).map(|i| self.start + d * i as f64).collect()
    }
}

/// One or two scanned axes plus fixed values of the remaining times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<String, f64>,
}

impl TimeGrid {
    pub fn one(axis: Axis) -> Self {
        TimeGrid { axes: vec![axis], fixed: BTreeMap::new() }
    }

    pub fn two(a: Axis, b: Axis) -> Self {
        TimeGrid { axes: vec![a, b], fixed: BTreeMap::new() }
    }

    pub fn with_fixed(mut self, name: &str, value: f64) -> Self {
        self.fixed.insert(name.to_string(), value);
        self
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|a| a.n_points).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Named coordinates of every point, last axis fastest.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        let vals: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = Vec::with_capacity(self.len());
        for flat in 0..self.len() {
            let mut p = self.fixed.clone();
            let mut rest = flat;
            for (ax, v) in self.axes.iter().zip(&vals).rev() {
                p.insert(ax.name.clone(), v[rest % ax.n_points]);
                rest /= ax.n_points;
            }
            out.push(p);
        }
        out
    }
}

/// What a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// `⟨final;0|U(t)|initial;0⟩` from the series.
    Propagator { final_state: usize, initial: usize },
    LinearA,
    LinearB,
    Pathway(PathwayLabel),
    /// Diagonalization reference for a propagator element.
    OraclePropagator { final_state: usize, initial: usize },
    /// Diagonalization reference for a pathway, prefactor included.
    OraclePathway(PathwayLabel),
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::Propagator { final_state, initial } => format!("U{final_state}{initial}"),
            Quantity::LinearA => "linearA".into(),
            Quantity::LinearB => "linearB".into(),
            Quantity::Pathway(l) => l.to_string(),
            Quantity::OraclePropagator { final_state, initial } => format!("oracle_U{final_state}{initial}"),
            Quantity::OraclePathway(l) => format!("oracle_{l}"),
        }
    }

    fn pathway_label(&self) -> Option<PathwayLabel> {
        match self {
            Quantity::Pathway(l) | Quantity::OraclePathway(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Time,
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub model: ModelSpec,
    pub quantity: Quantity,
    pub n_max: usize,
    pub k_t: usize,
    pub domain: Domain,
    pub fixed: BTreeMap<String, f64>,
    pub gamma: f64,
    /// Original time origin of each transformed axis, keyed by axis name.
    pub time_origin: BTreeMap<String, f64>,
}

/// Scanned samples with per-order breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub axes: Vec<(String, Vec<f64>)>,
    /// Row-major, last axis fastest.
    pub samples: Vec<C64>,
    pub per_order: Vec<(usize, Vec<C64>)>,
    /// Extra named columns on the same grid, e.g. partial sums or a reference.
    #[serde(default)]
    pub columns: Vec<(String, Vec<C64>)>,
    pub metadata: TableMetadata,
}

fn time_of(p: &BTreeMap<String, f64>, names: &[&str]) -> Result<f64> {
    names
        .iter()
        .find_map(|n| p.get(*n).copied())
        .ok_or_else(|| Error::InvalidArgument(format!("grid does not provide {}", names.join("/"))))
}

fn eval_point(
    spec: &ModelSpec,
    q: Quantity,
    p: &BTreeMap<String, f64>,
    trunc: Truncation,
    ocfg: &OracleConfig,
) -> Result<(C64, Vec<(usize, C64)>)> {
    let r = match q {
        Quantity::Propagator { final_state, initial } => {
            multimode_propagator(spec, final_state, initial, time_of(p, &["t", "t1"])?, trunc)?
        }
        Quantity::LinearA => linear_response_a(spec, time_of(p, &["t1", "t"])?, trunc)?,
        Quantity::LinearB => linear_response_b(spec, time_of(p, &["t1", "t"])?, trunc)?,
        Quantity::Pathway(l) => third_order(spec, l, time_of(p, &["t1"])?, time_of(p, &["t2"])?, time_of(p, &["t3"])?, trunc)?,
        Quantity::OraclePropagator { final_state, initial } => {
            let v = oracle::exact_propagator(spec, final_state, initial, time_of(p, &["t", "t1"])?, ocfg)?;
            return Ok((v, Vec::new()));
        }
        Quantity::OraclePathway(l) => {
            let (t1, t2, t3) = (time_of(p, &["t1"])?, time_of(p, &["t2"])?, time_of(p, &["t3"])?);
            let v = oracle::exact_multitime(spec, l, t1, t2, t3, ocfg)? * pathway(l).prefactor(spec);
            return Ok((v, Vec::new()));
        }
    };
    Ok((r.value, r.per_order))
}

/// Evaluates `q` at every grid point in parallel; results are stored in grid order.
pub fn scan(spec: &ModelSpec, q: Quantity, grid: &TimeGrid, trunc: Truncation) -> Result<SpectrumTable> {
    scan_with(spec, q, grid, trunc, &OracleConfig::for_spec(spec))
}

pub fn scan_with(spec: &ModelSpec, q: Quantity, grid: &TimeGrid, trunc: Truncation, ocfg: &OracleConfig) -> Result<SpectrumTable> {
    spec.validate()?;
    if grid.axes.len() > 2 {
        return Err(Error::InvalidArgument("at most two scanned axes".into()));
    }
    let points = grid.points();
    let results: Vec<(C64, Vec<(usize, C64)>)> =
        points.par_iter().map(|p| eval_point(spec, q, p, trunc, ocfg)).collect::<Result<_>>()?;
    let orders: Vec<usize> = results.first().map(|r| r.1.iter().map(|x| x.0).collect()).unwrap_or_default();
    let per_order = orders
        .iter()
        .map(|&o| (o, results.iter().map(|r| r.1.iter().find(|x| x.0 == o).map_or(C64::new(0.0, 0.0), |x| x.1)).collect()))
        .collect();
    Ok(SpectrumTable {
        axes: grid.axes.iter().map(|a| (a.name.clone(), a.values())).collect(),
        samples: results.iter().map(|r| r.0).collect(),
        per_order,
        columns: Vec::new(),
        metadata: TableMetadata {
            model: spec.clone(),
            quantity: q,
            n_max: trunc.n_max,
            k_t: trunc.k_t,
            domain: Domain::Time,
            fixed: grid.fixed.clone(),
            gamma: 0.0,
            time_origin: BTreeMap::new(),
        },
    })
}

/// Diagonalization reference for `q` on `grid`, prefactors included.
pub fn oracle_column(spec: &ModelSpec, q: Quantity, grid: &TimeGrid, ocfg: &OracleConfig) -> Result<Vec<C64>> {
    let pre = C64::new(0.0, spec.dipole_01.norm_sqr());
    let elements: Vec<(usize, usize)> = match q {
        Quantity::LinearA => {
            spec.validate_as(crate::model::ModelKind::A)?;
            vec![(1, 1)]
        }
        Quantity::LinearB => {
            spec.validate_as(crate::model::ModelKind::B)?;
            vec![(1, 1), (2, 2), (1, 2), (2, 1)]
        }
        Quantity::Propagator { final_state, initial } | Quantity::OraclePropagator { final_state, initial } => {
            let t = scan_with(spec, Quantity::OraclePropagator { final_state, initial }, grid, Truncation::default(), ocfg)?;
            return Ok(t.samples);
        }
        Quantity::Pathway(l) | Quantity::OraclePathway(l) => {
            return Ok(scan_with(spec, Quantity::OraclePathway(l), grid, Truncation::default(), ocfg)?.samples);
        }
    };
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    for (f, i) in elements {
        let t = scan_with(spec, Quantity::OraclePropagator { final_state: f, initial: i }, grid, Truncation::default(), ocfg)?;
        for (a, b) in out.iter_mut().zip(t.samples) {
            *a += pre * b;
        }
    }
    Ok(out)
}

fn uniform_step(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("transform needs at least two samples per axis".into()));
    }
    let d = values[1] - values[0];
    for w in values.windows(2) {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * d.abs().max(1e-300) {
            return Err(Error::InvalidArgument("non-uniform grid".into()));
        }
    }
    Ok(d)
}

fn is_rephasing(label: Option<PathwayLabel>) -> bool {
    matches!(label, Some(PathwayLabel::R1 | PathwayLabel::R2 | PathwayLabel::R3))
}

/// Applies `f` to every 1D line of `data` along `axis`.
fn along_axis(shape: &[usize], data: &mut [C64], axis: usize, mut f: impl FnMut(&mut Vec<C64>)) {
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            for (k, x) in line.iter_mut().enumerate() {
                *x = data[(o * n + k) * inner + i];
            }
            f(&mut line);
            for (k, x) in line.iter().enumerate() {
                data[(o * n + k) * inner + i] = *x;
            }
        }
    }
}

/// Discrete Fourier transform `F(ω) = Δt Σ s(t) e^{−iω(t − t₀)}` along `axes`,
/// with optional damping `e^{−γt}`; frequency axes ascending. The `t1` axis of
/// rephasing pathways is reported at `−ω₁`.
pub fn transform(table: &SpectrumTable, axes: &[usize], gamma: f64) -> Result<SpectrumTable> {
    if table.metadata.domain != Domain::Time {
        return Err(Error::InvalidArgument("table is already in the frequency domain".into()));
    }
    let shape: Vec<usize> = table.axes.iter().map(|a| a.1.len()).collect();
    let mut out = table.clone();
    let mut planner = FftPlanner::<f64>::new();
    let label = table.metadata.quantity.pathway_label();
    for &ax in axes {
        let (name, values) = table.axes.get(ax).ok_or_else(|| Error::InvalidArgument(format!("no axis {ax}")))?;
        let n = values.len();
        if !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("axis {name} has {n} points, FFT needs a power of two")));
        }
        let dt = uniform_step(values)?;
        let fft = planner.plan_fft_forward(n);
        let flip = is_rephasing(label) && name == "t1";
        let damp: Vec<f64> = values.iter().map(|&t| (-gamma * t).exp()).collect();
        let process = |line: &mut Vec<C64>| {
            for (x, d) in line.iter_mut().zip(&damp) {
                *x *= d;
            }
            fft.process(line);
            line.rotate_right(n / 2);
            for x in line.iter_mut() {
                *x *= dt;
            }
            if flip {
                line.reverse();
                line.rotate_right(1);
            }
        };
        let mut p = process;
        along_axis(&shape, &mut out.samples, ax, &mut p);
        for series in out.per_order.iter_mut().map(|x| &mut x.1).chain(out.columns.iter_mut().map(|x| &mut x.1)) {
            along_axis(&shape, series, ax, &mut p);
        }
        let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
        let freqs: Vec<f64> = (0..n).map(|k| (k as f64 - (n / 2) as f64) * dw).collect();
        out.axes[ax] = (format!("w{}", name.trim_start_matches('t')), freqs);
        out.metadata.time_origin.insert(out.axes[ax].0.clone(), values[0]);
        out.metadata.time_origin.insert(format!("{}:dt", out.axes[ax].0), dt);
        out.metadata.time_origin.insert(format!("{}:flip", out.axes[ax].0), if flip { 1.0 } else { 0.0 });
    }
    out.metadata.domain = Domain::Frequency;
    out.metadata.gamma = gamma;
    Ok(out)
}

/// Inverse of [`transform`] on the given axes (damping not undone).
pub fn inverse_transform(table: &SpectrumTable, axes: &[usize]) -> Result<SpectrumTable> {
    if table.metadata.domain != Domain::Frequency {
        return Err(Error::InvalidArgument("table is not in the frequency domain".into()));
    }
    let shape: Vec<usize> = table.axes.iter().map(|a| a.1.len()).collect();
    let mut out = table.clone();
    let mut planner = FftPlanner::<f64>::new();
    for &ax in axes {
        let (name, _) = table.axes.get(ax).ok_or_else(|| Error::InvalidArgument(format!("no axis {ax}")))?;
        let meta = &table.metadata.time_origin;
        let missing = || Error::InvalidArgument(format!("axis {name} lacks transform metadata"));
        let t0 = *meta.get(name).ok_or_else(missing)?;
        let dt = *meta.get(&format!("{name}:dt")).ok_or_else(missing)?;
        let flip = meta.get(&format!("{name}:flip")).copied().unwrap_or(0.0) != 0.0;
        let n = shape[ax];
        let ifft = planner.plan_fft_inverse(n);
        let mut p = |line: &mut Vec<C64>| {
            if flip {
                line.rotate_left(1);
                line.reverse();
            }
            line.rotate_left(n / 2);
            ifft.process(line);
            for x in line.iter_mut() {
                *x /= dt * n as f64;
            }
        };
        along_axis(&shape, &mut out.samples, ax, &mut p);
        for series in out.per_order.iter_mut().map(|x| &mut x.1).chain(out.columns.iter_mut().map(|x| &mut x.1)) {
            along_axis(&shape, series, ax, &mut p);
        }
        let tname = format!("t{}", name.trim_start_matches('w'));
        out.axes[ax] = (tname, (0..n).map(|k| t0 + dt * k as f64).collect());
        out.metadata.time_origin.retain(|k, _| !k.starts_with(name.as_str()));
    }
    if out.metadata.time_origin.is_empty() {
        out.metadata.domain = Domain::Time;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Coordinates of sample `flat`.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        let mut rest = flat;
        for (i, (_, v)) in self.axes.iter().enumerate().rev() {
            out[i] = v[rest % v.len()];
            rest /= v.len();
        }
        out
    }

    /// CSV text: one `#` metadata line, a header, one row per sample.
    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut s = String::new();
        let _ = write!(s, "# quantity={} model={} n_max={} k_t={}", m.quantity.name(), m.model.kind, m.n_max, m.k_t);
        for (k, v) in &m.fixed {
            let _ = write!(s, " {k}={v:.17e}");
        }
        if m.gamma != 0.0 {
            let _ = write!(s, " gamma={:.17e}", m.gamma);
        }
        s.push('\n');
        let mut header: Vec<String> = self.axes.iter().map(|a| a.0.clone()).collect();
        header.extend(["re".into(), "im".into()]);
        for (o, _) in &self.per_order {
            header.push(format!("re_order_{o}"));
            header.push(format!("im_order_{o}"));
        }
        for (name, _) in &self.columns {
            header.push(format!("re_{name}"));
            header.push(format!("im_{name}"));
        }
        s.push_str(&header.join(","));
        s.push('\n');
        for i in 0..self.samples.len() {
            let mut row: Vec<String> = self.coords(i).iter().map(|x| format!("{x:.17e}")).collect();
            row.push(format!("{:.17e}", self.samples[i].re));
            row.push(format!("{:.17e}", self.samples[i].im));
            for v in self.per_order.iter().map(|x| &x.1).chain(self.columns.iter().map(|x| &x.1)) {
                row.push(format!("{:.17e}", v[i].re));
                row.push(format!("{:.17e}", v[i].im));
            }
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn export(&self, format: ExportFormat, path: &Path) -> Result<()> {
        let text = match format {
            ExportFormat::Csv => self.to_csv(),
            ExportFormat::Json => self.to_json()?,
        };
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn import_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Sum of the per-order contributions up to and including `order`.
    pub fn partial_sum(&self, order: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.samples.len()];
        for (_, v) in self.per_order.iter().filter(|(o, _)| *o <= order) {
            for (a, b) in out.iter_mut().zip(v) {
                *a += b;
            }
        }
        out
    }

    /// Appends a named column; its length must match the grid.
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<C64>) -> Result<()> {
        if values.len() != self.samples.len() {
            return Err(Error::LengthMismatch { expected: self.samples.len(), found: values.len() });
        }
        self.columns.push((name.into(), values));
        Ok(())
    }

    /// Appends `sum_le_k` partial-sum columns.
    pub fn push_partial_sums(&mut self, orders: &[usize]) {
        for &o in orders {
            let v = self.partial_sum(o);
            self.columns.push((format!("sum_le_{o}"), v));
        }
    }

    /// Largest and smallest sample magnitude.
    pub fn magnitude_range(&self) -> Option<(f64, f64)> {
        let mut it = self.samples.iter().map(|x| x.norm());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x))))
    }
}

/// Exports with path context on failure.
pub fn export(table: &SpectrumTable, format: ExportFormat, path: &Path) -> Result<()> {
    table.export(format, path)
}
