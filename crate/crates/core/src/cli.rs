//! The `korobov-star` command line.
//!
//! Results go to stdout as JSON (point sets as CSV); diagnostics go to
//! stderr. Exit codes: 0 success, 1 a verification failed, 2 bad arguments
//! or unparsable input, 3 I/O failure, 4 an enumeration cap was exceeded.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{theorem_bound, BoundSpec, TheoremCase};
use crate::charsum::{char_sum, count_generator_hits, count_hits_reduced};
use crate::discrepancy::{star_disc_exact, star_disc_grid};
use crate::experiments::{
    estimate_variance, run_campaign, sum_variance_fixed, per_lattice_variance_cap, verify_mean_zero_continuous,
    verify_mean_zero_discrete, CampaignConfig,
};
use crate::fourier::{cont_coeff, disc_coeff, for_each_index, parseval_discrete_residual, AnchoredBox};
use crate::modmath::{reduce, PrimeContext};
use crate::pointset::{generate_korobov, read_csv, sample_trial_construction, write_csv, PointSet, ShiftMode};
use crate::{Error, Limits, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "korobov-star", version, about = "Randomly shifted Korobov lattice unions and their star discrepancy")]
pub struct Cli {
    /// Worker threads for campaigns (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct ContextArgs {
    /// Prime modulus N.
    #[arg(long = "n-prime")]
    pub n_prime: u64,
    /// Dimension s.
    #[arg(long)]
    pub dim: usize,
    /// Number of lattices M (default N - 1).
    #[arg(long = "num-lattices")]
    pub num_lattices: Option<u64>,
}

impl ContextArgs {
    fn context(&self) -> Result<PrimeContext> {
        match self.num_lattices {
            Some(m) => PrimeContext::new(self.n_prime, self.dim, m),
            None => PrimeContext::with_default_lattices(self.n_prime, self.dim),
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct BoxArgs {
    /// Real box corner, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "b_num")]
    pub b: Option<Vec<f64>>,
    /// Grid box corner as numerators m_j (b_j = m_j / N), comma separated.
    #[arg(long = "b-num", value_delimiter = ',')]
    pub b_num: Option<Vec<u32>>,
}

impl BoxArgs {
    fn anchored(&self, n_prime: u64) -> Result<AnchoredBox> {
        match (&self.b, &self.b_num) {
            (Some(b), None) => AnchoredBox::new(b.clone()),
            (None, Some(m)) => AnchoredBox::grid(m.clone(), n_prime),
            _ => Err(Error::invalid("give exactly one of --b or --b-num")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    Parseval,
    Charsum,
    Meanzero,
    Variance,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a lattice (with --z) or a sampled construction (with --case) as CSV.
    Generate {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long, conflicts_with = "case")]
        z: Option<u64>,
        #[arg(long)]
        case: Option<TheoremCase>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fourier coefficient of a box indicator.
    Coeff {
        #[arg(long = "n-prime")]
        n_prime: Option<u64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        k: Vec<i64>,
        #[command(flatten)]
        b: BoxArgs,
        #[arg(long, value_enum, default_value = "continuous")]
        mode: ShiftMode,
    },
    /// Lattice character sum S_N(z, k), optionally with the generator root count.
    Charsum {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        z: u64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        k: Vec<i64>,
        #[arg(long = "count-hits")]
        count_hits: bool,
    },
    /// Star discrepancy of a CSV point set.
    Disc {
        #[arg(long)]
        input: PathBuf,
        /// Modulus for the grid sweep; defaults to the one recorded in the file.
        #[arg(long = "n-prime")]
        n_prime: Option<u64>,
        /// Also compute D* exactly over critical boxes.
        #[arg(long)]
        exact: bool,
    },
    /// Closed-form high-probability bound for one construction.
    Bound {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        case: TheoremCase,
        #[arg(long = "failure-prob", default_value_t = 0.5)]
        failure_prob: f64,
    },
    /// Check an identity or bound numerically.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[command(flatten)]
        ctx: ContextArgs,
        #[command(flatten)]
        b: BoxArgs,
        #[arg(long)]
        z: Option<u64>,
        #[arg(long)]
        case: Option<TheoremCase>,
        #[arg(long, value_enum, default_value = "discrete")]
        shift: ShiftMode,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded Monte Carlo campaign; flags or a JSON config.
    Campaign {
        #[arg(long, conflicts_with_all = ["case", "n_prime", "dim", "trials"])]
        config: Option<PathBuf>,
        #[arg(long)]
        case: Option<TheoremCase>,
        #[arg(long = "n-prime")]
        n_prime: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "num-lattices")]
        num_lattices: Option<u64>,
        #[arg(long = "failure-prob", default_value_t = 0.5)]
        failure_prob: f64,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long = "record-boxes")]
        record_boxes: bool,
    },
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Json(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::Capacity { .. } => EXIT_CAPACITY,
    }
}

/// Parse `args` (including the program name) and run, returning the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(Error::invalid(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    run(std::env::args_os(), &mut io::stdout(), &mut io::stderr())
}

fn emit(out: &mut (dyn Write + Send), value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<bool> {
    match command {
        Command::Generate {
            ctx,
            z,
            case,
            seed,
            trial,
            output,
        } => {
            let ctx = ctx.context()?;
            let (points, generators) = match (z, case) {
                (Some(z), None) => (PointSet::Grid(generate_korobov(z, &ctx)?), vec![z]),
                (None, Some(case)) => {
                    let c = sample_trial_construction(&ctx, case.generator_mode(), case.shift_mode(), seed, trial)?;
                    (c.points, c.generators)
                }
                _ => return Err(Error::invalid("give exactly one of --z or --case")),
            };
            match output {
                Some(path) => write_csv(io::BufWriter::new(File::create(path)?), &points, Some(ctx.n_prime()))?,
                None => write_csv(&mut *out, &points, Some(ctx.n_prime()))?,
            }
            writeln!(err, "generated {} points, generators {:?}", points.len(), generators)?;
            Ok(true)
        }
        Command::Coeff { n_prime, k, b, mode } => {
            let value = match mode {
                ShiftMode::Continuous => {
                    let bx = b.anchored(n_prime.unwrap_or(0))?;
                    cont_coeff(&k, &bx)?
                }
                ShiftMode::Discrete => {
                    let n = n_prime.ok_or_else(|| Error::invalid("--n-prime is required for grid coefficients"))?;
                    let bx = b.anchored(n)?;
                    let k: Vec<u64> = k.iter().map(|&v| reduce(v, n)).collect();
                    disc_coeff(&k, &bx, n)?
                }
            };
            emit(out, &json!({"re": value.re, "im": value.im, "abs": value.norm()}))?;
            Ok(true)
        }
        Command::Charsum { ctx, z, k, count_hits } => {
            let ctx = ctx.context()?;
            let r = char_sum(z, &k, &ctx)?;
            let mut v = serde_json::to_value(r)?;
            if count_hits {
                v["generator_hits"] = json!(count_generator_hits(&k, &ctx)?);
            }
            emit(out, &v)?;
            Ok(true)
        }
        Command::Disc { input, n_prime, exact } => {
            let (points, file_n) = read_csv(BufReader::new(File::open(&input)?))?;
            let n = n_prime
                .or(file_n)
                .ok_or_else(|| Error::invalid("the point set records no modulus; pass --n-prime"))?;
            let ctx = PrimeContext::with_default_lattices(n, points.dim())?;
            let limits = Limits::default();
            let mut report = star_disc_grid(&points, &ctx, &limits)?;
            if exact {
                report.exact = Some(star_disc_exact(&points, &limits)?);
            }
            emit(out, &report)?;
            Ok(true)
        }
        Command::Bound {
            ctx,
            case,
            failure_prob,
        } => {
            let spec = BoundSpec::new(case, failure_prob, ctx.context()?)?;
            emit(out, &theorem_bound(&spec)?)?;
            Ok(true)
        }
        Command::Verify {
            kind,
            ctx,
            b,
            z,
            case,
            shift,
            samples,
            seed,
        } => verify(kind, &ctx.context()?, &b, z, case, shift, samples, seed, out),
        Command::Campaign {
            config,
            case,
            n_prime,
            dim,
            num_lattices,
            failure_prob,
            trials,
            seed,
            output,
            record_boxes,
        } => {
            let mut config = match config {
                Some(path) => serde_json::from_reader::<_, CampaignConfig>(BufReader::new(File::open(path)?))?,
                None => {
                    let missing = |what: &str| Error::invalid(format!("--{what} is required without --config"));
                    let ctx = ContextArgs {
                        n_prime: n_prime.ok_or_else(|| missing("n-prime"))?,
                        dim: dim.ok_or_else(|| missing("dim"))?,
                        num_lattices,
                    }
                    .context()?;
                    CampaignConfig {
                        spec: BoundSpec::new(case.ok_or_else(|| missing("case"))?, failure_prob, ctx)?,
                        num_trials: trials.ok_or_else(|| missing("trials"))?,
                        master_seed: seed,
                        record_boxes,
                        output_path: None,
                    }
                }
            };
            if output.is_some() {
                config.output_path = output;
            }
            let summary = run_campaign(&config)?;
            writeln!(
                err,
                "{} trials, {} violations of bound {:.6}",
                summary.num_trials, summary.num_violations, summary.bound.final_bound
            )?;
            emit(out, &summary)?;
            Ok(true)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(
    kind: VerifyKind,
    ctx: &PrimeContext,
    b: &BoxArgs,
    z: Option<u64>,
    case: Option<TheoremCase>,
    shift: ShiftMode,
    samples: u64,
    seed: u64,
    out: &mut (dyn Write + Send),
) -> Result<bool> {
    let limits = Limits::default();
    let need_z = || z.ok_or_else(|| Error::invalid("--z is required"));
    let (pass, report) = match kind {
        VerifyKind::Parseval => {
            let bx = b.anchored(ctx.n_prime())?;
            let residual = parseval_discrete_residual(&bx, ctx, &limits)?;
            (residual.abs() < 1e-10, json!({"residual": residual}))
        }
        VerifyKind::Charsum => {
            let mut worst = 0u64;
            let mut checked = 0u64;
            let total = crate::checked_pow(ctx.n_prime(), ctx.dim())
                .filter(|&t| t <= limits.frequencies)
                .ok_or_else(|| Error::capacity("root count sweep", format!("{}^{}", ctx.n_prime(), ctx.dim()), limits.frequencies))?;
            for_each_index(ctx.n_prime(), ctx.dim(), |k| {
                if k.iter().any(|&v| v != 0) {
                    worst = worst.max(count_hits_reduced(k, ctx));
                    checked += 1;
                }
            });
            debug_assert_eq!(checked + 1, total);
            let limit = ctx.dim() as u64 - 1;
            (worst <= limit, json!({"frequencies": checked, "max_hits": worst, "limit": limit}))
        }
        VerifyKind::Meanzero => {
            let z = need_z()?;
            let bx = b.anchored(ctx.n_prime())?;
            match shift {
                ShiftMode::Discrete => {
                    let mean = verify_mean_zero_discrete(z, &bx, ctx, &limits)?;
                    (
                        *mean.numer() == 0,
                        json!({"mean_numer": mean.numer().to_string(), "mean_denom": mean.denom().to_string()}),
                    )
                }
                ShiftMode::Continuous => {
                    let est = verify_mean_zero_continuous(z, &bx, ctx, samples, seed)?;
                    (est.mean.abs() <= 4.0 * est.stderr, serde_json::to_value(est)?)
                }
            }
        }
        VerifyKind::Variance => {
            let case = case.ok_or_else(|| Error::invalid("--case is required"))?;
            let bx = b.anchored(ctx.n_prime())?;
            let est = estimate_variance(case, &bx, ctx, samples, seed)?;
            let cap = per_lattice_variance_cap(case, ctx);
            let mut pass = est.mean <= cap + 3.0 * est.stderr;
            let mut report = json!({"estimate": est, "cap": cap});
            if case.generator_mode() == crate::GeneratorMode::Fixed && bx.grid_numerators().is_some() {
                let fixed = sum_variance_fixed(case, &bx, ctx, &limits)?;
                pass &= fixed.within_cap();
                report["fixed_sum"] = serde_json::to_value(fixed)?;
            }
            (pass, report)
        }
    };
    let mut report = report;
    report["pass"] = json!(pass);
    emit(out, &report)?;
    Ok(pass)
}
