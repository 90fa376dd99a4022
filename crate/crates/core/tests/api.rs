use proptest::prelude::*;
use vibronic_core::oracle::{exact_multitime, exact_propagator, OracleConfig};
use vibronic_core::propagator::{diag_propagator, multimode_propagator, offdiag_propagator, u0};
use vibronic_core::response::{third_order, pathway_table};
use vibronic_core::spectra::{scan, Axis, Quantity};
use vibronic_core::{ModelConfig, ModelKind, ModelSpec, PathwayLabel, TimeGrid, Truncation, C64};

fn model_a(z: [f64; 3], w: f64, w1: f64, w2: f64, eta: C64) -> ModelSpec {
    let mut s = ModelSpec::model_a();
    s.mode_freqs = vec![w];
    s.level_freqs = vec![0.0, w1, w2, w1 + w2];
    s.displacements = vec![vec![0.0, z[0], z[1], z[2]]];
    s.eta = eta;
    s
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let a = ModelConfig::load(&dir.join("modelA.json")).unwrap().into_spec().unwrap();
    assert_eq!(a, ModelSpec::model_a());
    let b = ModelConfig::load(&dir.join("modelB.json")).unwrap().into_spec().unwrap();
    assert_eq!(b, ModelSpec::model_b());
    let s = ModelConfig::load(&dir.join("modelB_symmetric.json")).unwrap().into_spec().unwrap();
    assert!(s.is_symmetric_dimer());
    assert_eq!(s.kind, ModelKind::B);
}

#[test]
fn config_round_trip_through_spec() {
    let spec = model_a([0.05, 0.1, 0.2], 1.2, 9.0, 11.5, C64::new(0.6, 0.8));
    let cfg = ModelConfig::from_spec(&spec);
    assert_eq!(cfg.into_spec().unwrap(), spec);
    let mut n = cfg.clone();
    n.normalize_eta = true;
    let scaled = n.into_spec().unwrap();
    assert!((scaled.eta.norm() - 1.0).abs() < 1e-15);
    assert!((scaled.mode_freqs[0] - 1.2).abs() < 1e-15);
}

#[test]
fn eta_scaling_maps_times() {
    let spec = model_a([0.1, 0.2, 0.15], 3.0, 20.0, 26.0, C64::new(2.0, 0.0));
    let unit = spec.in_eta_units().unwrap();
    let tr = Truncation::new(4, 8);
    let a = multimode_propagator(&spec, 1, 1, 0.35, tr).unwrap().value;
    let b = multimode_propagator(&unit, 1, 1, 0.7, tr).unwrap().value;
    assert!((a - b).norm() < 1e-13, "{a} {b}");
}

#[test]
fn all_pathways_track_the_oracle() {
    let spec = ModelSpec::model_a();
    let cfg = OracleConfig::for_spec(&spec);
    let tr = Truncation::new(8, 10);
    for p in pathway_table() {
        let series = third_order(&spec, p.label, 0.3, 0.2, 0.4, tr).unwrap().value;
        let exact = exact_multitime(&spec, p.label, 0.3, 0.2, 0.4, &cfg).unwrap() * p.prefactor(&spec);
        assert!((series - exact).norm() < 1e-6, "{}: {series} vs {exact}", p.label);
    }
}

#[test]
fn scan_matches_pointwise_calls() {
    let spec = ModelSpec::model_a();
    let tr = Truncation::new(4, 6);
    let grid = TimeGrid::one(Axis::new("t3", 0.0, 0.6, 4)).with_fixed("t1", 0.2).with_fixed("t2", 0.1);
    let table = scan(&spec, Quantity::Pathway(PathwayLabel::R4), &grid, tr).unwrap();
    for (i, t3) in table.axes[0].1.iter().enumerate() {
        let v = third_order(&spec, PathwayLabel::R4, 0.2, 0.1, *t3, tr).unwrap().value;
        assert_eq!(table.samples[i], v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn uncoupled_propagator_is_free_evolution(
        z in prop::array::uniform3(0.0..0.3f64), w in 0.5..3.0f64, t in 0.0..2.0f64,
    ) {
        let spec = model_a(z, w, 10.0, 12.5, C64::new(0.0, 0.0));
        let tr = Truncation::new(4, 8);
        for s in 1..=2 {
            let v = diag_propagator(&spec, s, t, tr).unwrap().value;
            prop_assert!((v - u0(&spec, s, t)).norm() < 1e-12);
        }
        prop_assert_eq!(offdiag_propagator(&spec, 2, 1, t, tr).unwrap().value, C64::new(0.0, 0.0));
    }

    #[test]
    fn short_time_series_matches_diagonalization(
        z in prop::array::uniform3(0.0..0.25f64), w in 0.8..2.5f64, t in 0.0..0.4f64,
        phase in 0.0..std::f64::consts::TAU,
    ) {
        let spec = model_a(z, w, 8.0, 10.5, C64::from_polar(1.0, phase));
        let cfg = OracleConfig::for_spec(&spec);
        let tr = Truncation::new(8, 10);
        for (f, i) in [(1, 1), (2, 1), (1, 2)] {
            let series = multimode_propagator(&spec, f, i, t, tr).unwrap().value;
            let exact = exact_propagator(&spec, f, i, t, &cfg).unwrap();
            prop_assert!((series - exact).norm() < 1e-6, "({f},{i}) t={t}: {series} vs {exact}");
        }
    }
}
