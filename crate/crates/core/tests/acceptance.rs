//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use vibronic_core::oracle::{self, OracleConfig};
use vibronic_core::propagator::{x1, Truncation};
use vibronic_core::response::{pathway, PathwayLabel};
use vibronic_core::validation::{self, Check};
use vibronic_core::ModelSpec;

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: Vec<Check>) -> Outcome {
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    let detail = checks.iter().map(|c| format!("\n    {c}")).collect::<String>();
    Outcome { passed, detail }
}

fn run(id: usize, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    let passed = out.passed && in_time;
    println!(
        "{} criterion {id} ({title}) in {:.1}s [limit {}s]{}{}",
        if passed { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { " over time limit" },
        out.detail
    );
    passed
}

fn convergence(r: vibronic_core::Result<validation::ConvergenceReport>) -> Outcome {
    match r {
        Ok(rep) => Outcome {
            passed: rep.passed(10.0),
            detail: format!("\n    monotone={} {}", rep.monotone(), rep.summary()),
        },
        Err(e) => Outcome { passed: false, detail: format!("\n    error: {e}") },
    }
}

/// `t₂` dependence of the GSB element, reported rather than asserted.
fn t2_sweep(spec: &ModelSpec) -> String {
    let cfg = OracleConfig::for_spec(spec);
    let p = pathway(PathwayLabel::R2);
    let mut lines = String::new();
    let mut reference = None;
    let mut invariant = true;
    for t2 in [0.0, 0.5, 1.0] {
        let (tl, tc, tr) = p.map_times(0.7, t2, 0.7);
        let exact = oracle::exact_segments(spec, p.kind, tl, tc, tr, &cfg);
        let series = x1(spec, tl, tc, tr, Truncation::new(6, 8));
        match (exact, series) {
            (Ok(e), Ok(s)) => {
                let r = *reference.get_or_insert(e);
                invariant &= (e - r).norm() < 1e-12;
                lines.push_str(&format!(
                    "\n    t2={t2}: oracle |X1|={:.6} series order-6 dev {:.2e}",
                    e.norm(),
                    (s.value - e).norm()
                ));
            }
            (e, s) => lines.push_str(&format!("\n    t2={t2}: error {:?} {:?}", e.err(), s.err())),
        }
    }
    format!("{lines}\n    oracle t2-invariant: {invariant} (reported, not asserted)")
}

fn main() -> ExitCode {
    let a = ModelSpec::model_a();
    let b = ModelSpec::model_b();
    let mut ok = true;

    ok &= run(1, "recursion vs tabulated closed forms", Duration::from_secs(60), || {
        from_checks(validation::appendix_equivalence(200, 1))
    });
    ok &= run(2, "Taylor layer vs operator products", Duration::from_secs(120), || {
        from_checks(vec![validation::taylor_equivalence(100, 12, 2)])
    });
    ok &= run(3, "order-1/2 terms vs quadrature", Duration::from_secs(300), || {
        from_checks(vec![validation::quadrature_equivalence(20, 3)])
    });
    ok &= run(4, "model B propagator convergence", Duration::from_secs(300), || {
        convergence(validation::propagator_convergence(&b, 1.4, 57, 8))
    });
    ok &= run(5, "GSB rephasing convergence", Duration::from_secs(600), || {
        let mut o =
            convergence(validation::pathway_convergence(&a, PathwayLabel::R2, 0.7, 0.0, 1.4, 57, &[0, 2, 4, 6], 8));
        o.detail.push_str(&t2_sweep(&a));
        o
    });
    ok &= run(6, "ESA rephasing convergence", Duration::from_secs(600), || {
        convergence(validation::pathway_convergence(&a, PathwayLabel::R3, 0.0, 0.07, 1.4, 57, &[2, 4, 6, 8], 8))
    });
    ok &= run(7, "identities and limits", Duration::from_secs(60), || from_checks(validation::identity_suite()));
    ok &= run(8, "zero-frequency continuity", Duration::from_secs(60), || {
        from_checks(validation::zero_frequency_continuity(1e-6, 1e-4))
    });

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
