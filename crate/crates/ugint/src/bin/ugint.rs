//! Command-line surface: evaluate closed forms, run the Monte Carlo or
//! series oracles, or cross-check all available paths in one shot.
//!
//! Exit codes: 0 success, 1 usage error, 2 malformed or mismatched
//! matrix files, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ugint::error::UgError;
use ugint::integrals::{eval_i1, eval_i2, eval_i2_rect, eval_i3, IntegralResult};
use ugint::linalg::ComplexMatrix;
use ugint::oracles::{
    mc_i1, mc_i2, mc_i2_rect_det, mc_i3, norm_guard_triggered, series_i1, series_i2, MCEstimate,
    SeriesEstimate,
};
use ugint::report::{Diagnostics, MatrixFile, ReportRecord};

#[derive(Parser)]
#[command(name = "ugint", version, about = "Closed-form unitary-group integrals with Monte Carlo and character-series cross-checks", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed form.
    Eval {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        common: Common,
    },
    /// Run a single oracle (Monte Carlo or truncated series).
    Oracle {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(value_enum)]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the closed form and every applicable oracle, reporting
    /// relative errors and z-scores.
    Verify {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Kind {
    I1,
    I2,
    I2rect,
    I3,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Mc,
    Series,
}

#[derive(Args)]
struct Common {
    /// Matrix file (JSON: rows, cols, data of [re, im] pairs).
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    c: Option<PathBuf>,
    #[arg(long)]
    d: Option<PathBuf>,
    /// Determinant exponent for U.
    #[arg(long, default_value_t = 0)]
    nu: u32,
    /// Determinant exponent for V (rectangular Monte Carlo only).
    #[arg(long, default_value_t = 0)]
    eta: u32,
    /// Generate inputs instead of reading files; entries are i.i.d.
    /// uniform on the complex disk of radius 1/sqrt(N).
    #[arg(long)]
    random: bool,
    /// Ambient dimension N for --random.
    #[arg(long)]
    n: Option<usize>,
    /// Inner dimension M for --random with i2rect.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long = "max-weight", default_value_t = 24)]
    max_weight: u64,
    /// Seed for matrix generation and Monte Carlo sharding.
    #[arg(long, env = "UGI_SEED", default_value_t = 0)]
    seed: u64,
    /// Also write the record to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl From<UgError> for CliError {
    fn from(e: UgError) -> Self {
        match e {
            UgError::Input(msg) => CliError::Input(msg),
            UgError::Numerical(msg) => CliError::Numerical(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{}", e);
            return ExitCode::from(1);
        }
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli.command, echo) {
        Ok(record) => {
            let text = record.render();
            print!("{}", text);
            let out = match &cli.command {
                Command::Eval { common, .. }
                | Command::Oracle { common, .. }
                | Command::Verify { common, .. } => common.out.as_deref(),
            };
            if let Some(path) = out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(3)
        }
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn random_disk_matrix(rows: usize, cols: usize, radius: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, theta)
    })
}

/// Input matrices for one invocation, either loaded or generated.
struct Inputs {
    mats: Vec<(&'static str, ComplexMatrix)>,
}

impl Inputs {
    fn get(&self, name: &str) -> &ComplexMatrix {
        &self.mats.iter().find(|(n, _)| *n == name).unwrap().1
    }

    fn record_into(&self, record: &mut ReportRecord) {
        for (name, m) in &self.mats {
            record.record_input(name, m);
        }
    }

    fn refs(&self) -> Vec<&ComplexMatrix> {
        self.mats.iter().map(|(_, m)| m).collect()
    }
}

fn load_inputs(kind: Kind, common: &Common) -> Result<Inputs, CliError> {
    let names: &[&'static str] = match kind {
        Kind::I1 | Kind::I3 => &["a", "b"],
        Kind::I2 | Kind::I2rect => &["a", "b", "c", "d"],
    };
    if common.random {
        let n = common
            .n
            .ok_or_else(|| CliError::Usage("--random requires --n".into()))?;
        if n == 0 {
            return Err(CliError::Usage("--n must be positive".into()));
        }
        let radius = 1.0 / (n as f64).sqrt();
        let shapes: Vec<(usize, usize)> = if kind == Kind::I2rect {
            let m = common
                .m
                .ok_or_else(|| CliError::Usage("--random with i2rect requires --m".into()))?;
            if m == 0 || m >= n {
                return Err(CliError::Usage("i2rect requires 0 < M < N".into()));
            }
            vec![(n, m), (m, n), (n, m), (m, n)]
        } else {
            names.iter().map(|_| (n, n)).collect()
        };
        let mats = names
            .iter()
            .zip(shapes)
            .enumerate()
            .map(|(i, (&name, (r, c)))| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(common.seed, 0x6D61_7472_6978 + i as u64));
                (name, random_disk_matrix(r, c, radius, &mut rng))
            })
            .collect();
        return Ok(Inputs { mats });
    }
    let paths: Vec<(&'static str, &Path)> = names
        .iter()
        .map(|&name| {
            let slot = match name {
                "a" => &common.a,
                "b" => &common.b,
                "c" => &common.c,
                _ => &common.d,
            };
            slot.as_deref()
                .map(|p| (name, p))
                .ok_or_else(|| CliError::Usage(format!("this kind requires --{}", name)))
        })
        .collect::<Result<_, _>>()?;
    let mats = paths
        .into_iter()
        .map(|(name, p)| MatrixFile::load(p).map(|m| (name, m)))
        .collect::<Result<_, UgError>>()?;
    Ok(Inputs { mats })
}

fn closed_form(kind: Kind, inputs: &Inputs, nu: u32) -> Result<IntegralResult, UgError> {
    match kind {
        Kind::I1 => eval_i1(inputs.get("a"), inputs.get("b"), nu),
        Kind::I2 => eval_i2(inputs.get("a"), inputs.get("b"), inputs.get("c"), inputs.get("d"), nu),
        Kind::I2rect => {
            eval_i2_rect(inputs.get("a"), inputs.get("b"), inputs.get("c"), inputs.get("d"))
        }
        Kind::I3 => eval_i3(inputs.get("a"), inputs.get("b")),
    }
}

fn monte_carlo(kind: Kind, inputs: &Inputs, common: &Common) -> Result<MCEstimate, UgError> {
    let (samples, seed) = (common.samples, common.seed);
    match kind {
        Kind::I1 => mc_i1(inputs.get("a"), inputs.get("b"), common.nu as i64, samples, seed),
        Kind::I2 => mc_i2(
            inputs.get("a"),
            inputs.get("b"),
            inputs.get("c"),
            inputs.get("d"),
            common.nu as i64,
            samples,
            seed,
        ),
        Kind::I2rect => mc_i2_rect_det(
            inputs.get("a"),
            inputs.get("b"),
            inputs.get("c"),
            inputs.get("d"),
            common.nu as i64,
            common.eta as i64,
            samples,
            seed,
        ),
        Kind::I3 => mc_i3(inputs.get("a"), inputs.get("b"), samples, seed),
    }
}

fn series(kind: Kind, inputs: &Inputs, common: &Common) -> Result<SeriesEstimate, CliError> {
    match kind {
        Kind::I1 => Ok(series_i1(inputs.get("a"), inputs.get("b"), common.nu, common.max_weight)?),
        Kind::I2 => Ok(series_i2(
            inputs.get("a"),
            inputs.get("b"),
            inputs.get("c"),
            inputs.get("d"),
            common.nu,
            common.max_weight,
        )?),
        Kind::I2rect | Kind::I3 => Err(CliError::Usage(
            "no series oracle exists for this kind".into(),
        )),
    }
}

fn apply_norm_guard(record: &mut ReportRecord, inputs: &Inputs) {
    if norm_guard_triggered(&inputs.refs()) {
        record.status = "warn".into();
        record.diagnostics.notes.push(
            "input norm exceeds 2; Monte Carlo variance may swamp the estimate".into(),
        );
    }
}

fn run(command: &Command, echo: String) -> Result<ReportRecord, CliError> {
    match command {
        Command::Eval { kind, common } => {
            let inputs = load_inputs(*kind, common)?;
            let result = closed_form(*kind, &inputs, common.nu)?;
            let mut record = ReportRecord::new(echo, result.value);
            inputs.record_into(&mut record);
            record.diagnostics = Diagnostics::from_integral(&result);
            Ok(record)
        }
        Command::Oracle { kind, mode, common } => {
            let inputs = load_inputs(*kind, common)?;
            match mode {
                Mode::Mc => {
                    let est = monte_carlo(*kind, &inputs, common)?;
                    let mut record = ReportRecord::new(echo, est.mean);
                    inputs.record_into(&mut record);
                    record.diagnostics.samples = Some(est.samples);
                    record.diagnostics.seed = Some(est.seed);
                    record.diagnostics.stderr = Some([est.stderr_re, est.stderr_im]);
                    if *kind == Kind::I2rect {
                        record.diagnostics.conjecture = Some(true);
                    }
                    apply_norm_guard(&mut record, &inputs);
                    Ok(record)
                }
                Mode::Series => {
                    let est = series(*kind, &inputs, common)?;
                    let mut record = ReportRecord::new(echo, est.value);
                    inputs.record_into(&mut record);
                    record.diagnostics.max_weight = Some(est.max_weight);
                    record.diagnostics.last_shell_magnitude = Some(est.last_shell_magnitude);
                    record.diagnostics.seed = Some(common.seed);
                    Ok(record)
                }
            }
        }
        Command::Verify { kind, common } => {
            let inputs = load_inputs(*kind, common)?;
            let closed = closed_form(*kind, &inputs, common.nu)?;
            let mut record = ReportRecord::new(echo, closed.value);
            inputs.record_into(&mut record);
            record.diagnostics = Diagnostics::from_integral(&closed);
            let mut failed = false;

            if matches!(kind, Kind::I1 | Kind::I2) {
                let est = series(*kind, &inputs, common)?;
                let scale = closed.value.norm().max(1e-300);
                let rel = (est.value - closed.value).norm() / scale;
                record.diagnostics.max_weight = Some(est.max_weight);
                record.diagnostics.last_shell_magnitude = Some(est.last_shell_magnitude);
                record.diagnostics.series_value = Some([est.value.re, est.value.im]);
                record.diagnostics.series_rel_error = Some(rel);
                if rel > 1e-6 {
                    failed = true;
                    record
                        .diagnostics
                        .notes
                        .push(format!("series disagrees with closed form: rel {:.3e}", rel));
                }
            }

            let est = monte_carlo(*kind, &inputs, common)?;
            let (zr, zi) = est.z_scores(closed.value);
            record.diagnostics.samples = Some(est.samples);
            record.diagnostics.seed = Some(est.seed);
            record.diagnostics.stderr = Some([est.stderr_re, est.stderr_im]);
            record.diagnostics.mc_mean = Some([est.mean.re, est.mean.im]);
            record.diagnostics.mc_z_scores = Some([zr, zi]);
            if zr > 5.0 || zi > 5.0 {
                failed = true;
                record.diagnostics.notes.push(format!(
                    "Monte Carlo disagrees with closed form: z = ({:.2}, {:.2})",
                    zr, zi
                ));
            }

            apply_norm_guard(&mut record, &inputs);
            if failed {
                record.status = "fail".into();
            }
            Ok(record)
        }
    }
}
