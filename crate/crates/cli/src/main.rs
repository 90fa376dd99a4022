//! `vibronic-rf`: propagator and response scans, validation suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vibronic_core::oracle::OracleConfig;
use vibronic_core::spectra::{self, Axis, ExportFormat, Quantity};
use vibronic_core::validation::{self, Suite};
use vibronic_core::{Error, ModelConfig, ModelSpec, PathwayLabel, SpectrumTable, TimeGrid, Truncation, DEFAULT_KT};

const EXIT_CONFIG: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CHECKS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "vibronic-rf", version, about = "Perturbative vibronic propagators and optical response functions")]
struct Cli {
    /// Worker threads for grid scans (default: all cores).
    #[arg(long, global = true, env = "VIBRONIC_RF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a propagator element `⟨f;0|U(t)|i;0⟩` over `t ∈ [0, tmax]`.
    Propagate {
        #[command(flatten)]
        common: Common,
        /// Element as two digits, final then initial state.
        #[arg(long, default_value = "11")]
        element: String,
    },
    /// Linear or third-order response on a time grid.
    Response {
        #[command(flatten)]
        common: Common,
        /// R1..R8, linearA or linearB.
        #[arg(long)]
        pathway: String,
        #[arg(long, default_value_t = 0.0)]
        t1: f64,
        #[arg(long, default_value_t = 0.0)]
        t2: f64,
        #[arg(long, default_value_t = 0.0)]
        t3: f64,
        /// Scanned times, e.g. `t3` or `t1,t3` (default: t1 for linear, t3 otherwise).
        #[arg(long)]
        scan: Option<String>,
        /// Fourier transform the scanned axes with damping `e^{−γt}`.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Run a named check suite; exit 4 if any check fails.
    Validate {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Models for the oracle checks (default: the built-in models A and B).
        #[arg(long)]
        config: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Partial sums to tabulate, e.g. `0,2,4,6`.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    /// Taylor truncation `Σk ≤ kt`.
    #[arg(long, default_value_t = DEFAULT_KT)]
    kt: usize,
    /// Highest perturbative order (default: largest of `--orders`, else 6).
    #[arg(long)]
    nmax: Option<usize>,
    /// Scan end in units of `1/|η|`.
    #[arg(long, default_value_t = 1.4)]
    tmax: f64,
    #[arg(long, default_value_t = 57)]
    points: usize,
    /// Append the diagonalization reference column.
    #[arg(long)]
    oracle: bool,
    /// Output file (default: table on stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SuiteArg {
    Appendix,
    Taylor,
    Oracle,
    All,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn config(e: Error) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }

    fn compute(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::InvalidModel(_) | Error::ModelMismatch { .. } | Error::InvalidArgument(_) | Error::Parse(_) | Error::Json { .. } => {
                EXIT_CONFIG
            }
            _ => EXIT_COMPUTE,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Loads a config and rescales it so times are in `1/|η|`.
fn load_spec(path: &Path) -> Result<ModelSpec, Failure> {
    let spec = ModelConfig::load(path).and_then(|c| c.into_spec()).map_err(Failure::config)?;
    if spec.eta.norm() == 0.0 {
        return Ok(spec);
    }
    spec.in_eta_units().map_err(Failure::config)
}

impl Common {
    fn truncation(&self) -> Truncation {
        let n_max = self.nmax.or_else(|| self.orders.iter().copied().max()).unwrap_or(6);
        Truncation::new(n_max, self.kt)
    }

    fn axis(&self, name: &str) -> Result<Axis, Failure> {
        if self.points < 2 || !(self.tmax > 0.0) {
            return Err(Failure::new(EXIT_CONFIG, "need --points ≥ 2 and --tmax > 0"));
        }
        Ok(Axis::new(name, 0.0, self.tmax, self.points))
    }

    fn check_orders(&self, trunc: Truncation) -> CmdResult {
        match self.orders.iter().find(|&&o| o > trunc.n_max) {
            Some(o) => Err(Failure::new(EXIT_CONFIG, format!("order {o} exceeds --nmax {}", trunc.n_max))),
            None => Ok(()),
        }
    }

    /// Adds partial sums and the oracle column, transforms if `gamma` is set, writes.
    fn finish(&self, spec: &ModelSpec, q: Quantity, grid: &TimeGrid, mut table: SpectrumTable, gamma: Option<f64>) -> CmdResult {
        table.push_partial_sums(&self.orders);
        if self.oracle {
            let col = spectra::oracle_column(spec, q, grid, &OracleConfig::for_spec(spec)).map_err(Failure::compute)?;
            table.push_column("oracle", col).map_err(Failure::compute)?;
        }
        if let Some(gamma) = gamma {
            let axes: Vec<usize> = (0..table.axes.len()).collect();
            table = spectra::transform(&table, &axes, gamma).map_err(Failure::compute)?;
        }
        self.write(&table)
    }

    fn write(&self, table: &SpectrumTable) -> CmdResult {
        let format = match self.format {
            FormatArg::Csv => ExportFormat::Csv,
            FormatArg::Json => ExportFormat::Json,
        };
        match &self.out {
            Some(path) => {
                table.export(format, path).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
                println!("{}", summary(table));
                println!("wrote {}", path.display());
            }
            None => {
                let text = match format {
                    ExportFormat::Csv => table.to_csv(),
                    ExportFormat::Json => table.to_json().map_err(Failure::compute)?,
                };
                print!("{text}");
                eprintln!("{}", summary(table));
            }
        }
        Ok(())
    }
}

fn summary(table: &SpectrumTable) -> String {
    let m = &table.metadata;
    let mut s = format!(
        "{} on model {}: {} points, n_max={}, k_t={}",
        m.quantity.name(),
        m.model.kind,
        table.len(),
        m.n_max,
        m.k_t
    );
    if let Some((lo, hi)) = table.magnitude_range() {
        s.push_str(&format!(", |value| in [{lo:.4e}, {hi:.4e}]"));
    }
    if let Some((_, reference)) = table.columns.iter().find(|c| c.0 == "oracle") {
        let dev = table.samples.iter().zip(reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        s.push_str(&format!(", max |series − oracle| {dev:.3e}"));
        for (name, v) in table.columns.iter().filter(|c| c.0.starts_with("sum_le_")) {
            let d = v.iter().zip(reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            s.push_str(&format!("\n  {name}: max |partial − oracle| {d:.3e}"));
        }
    }
    s
}

fn parse_element(s: &str) -> Result<(usize, usize), Failure> {
    let digits: Vec<usize> = s.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect();
    match digits.as_slice() {
        [f, i] if s.len() == 2 && (1..=2).contains(f) && (1..=2).contains(i) => Ok((*f, *i)),
        _ => Err(Failure::new(EXIT_CONFIG, format!("invalid --element '{s}' (expected 11, 12, 21 or 22)"))),
    }
}

fn propagate(common: &Common, element: &str) -> CmdResult {
    let (final_state, initial) = parse_element(element)?;
    let spec = load_spec(&common.config)?;
    let trunc = common.truncation();
    common.check_orders(trunc)?;
    let grid = TimeGrid::one(common.axis("t")?);
    let q = Quantity::Propagator { final_state, initial };
    let table = spectra::scan(&spec, q, &grid, trunc).map_err(Failure::compute)?;
    common.finish(&spec, q, &grid, table, None)
}

struct ResponseArgs<'a> {
    pathway: &'a str,
    times: [f64; 3],
    scan: Option<&'a str>,
    gamma: Option<f64>,
}

fn response(common: &Common, r: ResponseArgs) -> CmdResult {
    let q = match r.pathway.to_ascii_lowercase().as_str() {
        "lineara" => Quantity::LinearA,
        "linearb" => Quantity::LinearB,
        _ => Quantity::Pathway(r.pathway.parse::<PathwayLabel>().map_err(Failure::config)?),
    };
    let linear = matches!(q, Quantity::LinearA | Quantity::LinearB);
    let scan = r.scan.unwrap_or(if linear { "t1" } else { "t3" });
    let names: Vec<&str> = scan.split(',').map(str::trim).collect();
    let allowed: &[&str] = if linear { &["t1"] } else { &["t1", "t2", "t3"] };
    if names.is_empty() || names.len() > 2 || names.iter().any(|n| !allowed.contains(n)) || (names.len() == 2 && names[0] == names[1]) {
        return Err(Failure::new(EXIT_CONFIG, format!("invalid --scan '{scan}' (allowed: {})", allowed.join(", "))));
    }
    if r.times.iter().any(|&t| t < 0.0 || !t.is_finite()) {
        return Err(Failure::new(EXIT_CONFIG, "times must be finite and non-negative"));
    }
    let spec = load_spec(&common.config)?;
    let trunc = common.truncation();
    common.check_orders(trunc)?;
    let axes = names.iter().map(|n| common.axis(n)).collect::<Result<Vec<_>, _>>()?;
    let mut grid = TimeGrid { axes, fixed: Default::default() };
    if !linear {
        for (name, t) in ["t1", "t2", "t3"].into_iter().zip(r.times) {
            if !names.contains(&name) {
                grid = grid.with_fixed(name, t);
            }
        }
    }
    let table = spectra::scan(&spec, q, &grid, trunc).map_err(Failure::compute)?;
    common.finish(&spec, q, &grid, table, r.gamma)
}

fn validate(suite: SuiteArg, configs: &[PathBuf]) -> CmdResult {
    let specs = if configs.is_empty() {
        vec![ModelSpec::model_a(), ModelSpec::model_b()]
    } else {
        configs.iter().map(|p| load_spec(p)).collect::<Result<Vec<_>, _>>()?
    };
    let suite = match suite {
        SuiteArg::Appendix => Suite::Appendix,
        SuiteArg::Taylor => Suite::Taylor,
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::All => Suite::All,
    };
    let checks = validation::run_suite(suite, &specs);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{c}");
    }
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure::new(EXIT_CHECKS, format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::new(EXIT_CONFIG, "--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(EXIT_COMPUTE, e.to_string()))?;
    }
    match &cli.command {
        Command::Propagate { common, element } => propagate(common, element),
        Command::Response { common, pathway, t1, t2, t3, scan, gamma } => response(
            common,
            ResponseArgs { pathway, times: [*t1, *t2, *t3], scan: scan.as_deref(), gamma: *gamma },
        ),
        Command::Validate { suite, config } => validate(*suite, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
