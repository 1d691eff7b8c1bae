use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use hermite_eval::study::{correlation_csv, quantile_rows_csv};
use hermite_eval::{correlation_mae_study, quantile_iae_study, EvalError, TestDistribution};
use hermite_sketch::ingest::{ingest_stream, BadLinePolicy, IngestError, Ingested};
use hermite_sketch::{
    deserialize, merge_bivariate, merge_univariate, serialize, BivariateSketch, Error as SketchError,
    QuantileAlgorithm, QueryOptions, Sketch, UnivariateSketch,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "hsketch", version, about = "Streaming Hermite series sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a new sketch from a numeric stream.
    Build(BuildArgs),
    /// Add observations to an existing sketch file in place.
    Update(UpdateArgs),
    /// Evaluate pdf, cdf or quantiles.
    Query(QueryArgs),
    /// Merge sketches built on disjoint data.
    Merge(MergeArgs),
    /// Spearman's rho or Kendall's tau from a bivariate sketch.
    Corr(CorrArgs),
    /// Run an accuracy study and print CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EstType {
    Univariate,
    Bivariate,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnBadLine {
    Skip,
    Fail,
}

impl From<OnBadLine> for BadLinePolicy {
    fn from(v: OnBadLine) -> Self {
        match v {
            OnBadLine::Skip => BadLinePolicy::Skip,
            OnBadLine::Fail => BadLinePolicy::Fail,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "type", value_enum)]
    est_type: EstType,
    /// Truncation order.
    #[arg(long, default_value_t = hermite_sketch::DEFAULT_ORDER)]
    n: usize,
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    standardize: bool,
    /// Exponential weighting factor in (0, 1]; omit for a stationary sketch.
    #[arg(long)]
    lambda: Option<f64>,
    /// Input file, or `-` for stdin.
    #[arg(long)]
    input: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "fail")]
    on_bad_line: OnBadLine,
}

#[derive(Args)]
struct UpdateArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    input: String,
    /// Apply observations one at a time (required for exponential sketches).
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_enum, default_value = "fail")]
    on_bad_line: OnBadLine,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryKind {
    Pdf,
    Cdf,
    Quantile,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Interpolate,
    Bisection,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(value_enum)]
    kind: QueryKind,
    /// Comma-separated points (x1,y1,x2,y2,... for bivariate sketches) or
    /// probabilities for quantiles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    at: Vec<f64>,
    #[arg(long, value_enum, default_value = "interpolate")]
    algorithm: Algorithm,
    #[arg(long)]
    no_accelerate: bool,
    #[arg(long, action = ArgAction::Set, default_value_t = false)]
    clipped: bool,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(required = true, num_args = 1..)]
    sketches: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrKind {
    Spearman,
    Kendall,
}

#[derive(Args)]
struct CorrArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(value_enum)]
    kind: CorrKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Quantile,
    Correlation,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    study: Study,
    /// Sample size per replication.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Replications per cell.
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = hermite_sketch::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Correlation values for the correlation study.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-0.75,-0.5,-0.25,0.25,0.5,0.75"
    )]
    rhos: Vec<f64>,
    /// Distributions for the quantile study.
    #[arg(long, value_delimiter = ',', default_value = "normal,logistic,exponential,uniform")]
    dists: Vec<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes, each with its own exit code and stderr prefix.
enum Failure {
    Usage(String),
    Data(String),
    Incompatible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Incompatible(_) => 4,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Usage(m) => format!("hsketch: usage error: {m}"),
            Failure::Data(m) => format!("hsketch: data error: {m}"),
            Failure::Incompatible(m) => format!("hsketch: incompatible error: {m}"),
        }
    }
}

impl From<SketchError> for Failure {
    fn from(e: SketchError) -> Self {
        match e {
            SketchError::OrderTooLarge(_) | SketchError::InvalidParameter(_) => Failure::Usage(e.to_string()),
            SketchError::Incompatible(_) | SketchError::ExponentialBatch => Failure::Incompatible(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidParameter(m) => Failure::Usage(m),
            EvalError::Sketch(e) => e.into(),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn read_observations(input: &str, columns: usize, policy: BadLinePolicy) -> Outcome<Ingested> {
    let reader: Box<dyn BufRead> = if input == "-" {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        let file = File::open(input).map_err(|e| io_failure(Path::new(input), e))?;
        Box::new(BufReader::new(file))
    };
    let data = ingest_stream(reader, columns, policy)?;
    if !data.skipped.is_empty() {
        eprintln!(
            "hsketch: warning: skipped {} malformed line(s): {:?}",
            data.skipped.len(),
            data.skipped
        );
    }
    if data.is_empty() {
        return Err(Failure::Data("input contains no observations".into()));
    }
    Ok(data)
}

fn load(path: &Path) -> Outcome<Sketch> {
    let bytes = fs::read(path).map_err(|e| io_failure(path, e))?;
    deserialize(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn store(path: &Path, sketch: &Sketch) -> Outcome {
    fs::write(path, serialize(sketch)).map_err(|e| io_failure(path, e))
}

fn columns(sketch: &Sketch) -> usize {
    match sketch {
        Sketch::Univariate(_) => 1,
        Sketch::Bivariate(_) => 2,
    }
}

/// Observations per parallel shard when building unstandardized sketches.
const SHARD_SIZE: usize = 1 << 16;

fn absorb(sketch: &mut Sketch, data: &Ingested, sequential: bool) -> Outcome {
    match sketch {
        Sketch::Univariate(s) if sequential => data.values.iter().try_for_each(|&x| s.update_sequential(x)),
        Sketch::Univariate(s) => s.update_batch(&data.values),
        Sketch::Bivariate(s) if sequential => data.pairs().iter().try_for_each(|p| s.update_sequential(p[0], p[1])),
        Sketch::Bivariate(s) => s.update_batch(&data.pairs()),
    }
    .map_err(Failure::from)
}

fn build(args: BuildArgs) -> Outcome {
    let mut sketch: Sketch = match args.est_type {
        EstType::Univariate => UnivariateSketch::new(args.n, args.standardize, args.lambda)?.into(),
        EstType::Bivariate => BivariateSketch::new(args.n, args.standardize, args.lambda)?.into(),
    };
    let data = read_observations(&args.input, columns(&sketch), args.on_bad_line.into())?;
    if args.lambda.is_some() {
        absorb(&mut sketch, &data, true)?;
    } else if args.standardize {
        absorb(&mut sketch, &data, false)?;
    } else {
        // Without standardization merging is exact, so shards can be built
        // independently and combined.
        let chunk = SHARD_SIZE * data.columns;
        sketch = match sketch {
            Sketch::Univariate(_) => {
                let shards = data
                    .values
                    .par_chunks(chunk)
                    .map(|c| {
                        let mut s = UnivariateSketch::new(args.n, false, None)?;
                        s.update_batch(c)?;
                        Ok(s)
                    })
                    .collect::<Result<Vec<_>, SketchError>>()?;
                merge_univariate(&shards)?.into()
            }
            Sketch::Bivariate(_) => {
                let pairs = data.pairs();
                let shards = pairs
                    .par_chunks(SHARD_SIZE)
                    .map(|c| {
                        let mut s = BivariateSketch::new(args.n, false, None)?;
                        s.update_batch(c)?;
                        Ok(s)
                    })
                    .collect::<Result<Vec<_>, SketchError>>()?;
                merge_bivariate(&shards)?.into()
            }
        };
    }
    store(&args.out, &sketch)
}

fn update(args: UpdateArgs) -> Outcome {
    let mut sketch = load(&args.sketch)?;
    let data = read_observations(&args.input, columns(&sketch), args.on_bad_line.into())?;
    absorb(&mut sketch, &data, args.sequential)?;
    store(&args.sketch, &sketch)
}

/// Seventeen significant digits: enough to reproduce any `f64`.
fn print_values(values: &[f64]) -> Outcome {
    let mut out = io::stdout().lock();
    for v in values {
        writeln!(out, "{v:.16e}").map_err(|e| Failure::Data(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn query(args: QueryArgs) -> Outcome {
    let rounds = if args.no_accelerate {
        0
    } else {
        hermite_sketch::series::DEFAULT_ROUNDS
    };
    let opts = QueryOptions {
        clipped: args.clipped,
        acceleration_rounds: rounds,
    };
    let values = match (load(&args.sketch)?, args.kind) {
        (Sketch::Univariate(s), QueryKind::Pdf) => s.pdf_with(&args.at, opts)?,
        (Sketch::Univariate(s), QueryKind::Cdf) => s.cdf_with(&args.at, opts)?,
        (Sketch::Univariate(s), QueryKind::Quantile) => {
            let alg = match args.algorithm {
                Algorithm::Interpolate => QuantileAlgorithm::Interpolate,
                Algorithm::Bisection => QuantileAlgorithm::Bisection,
            };
            s.quantiles(&args.at, alg, !args.no_accelerate)?
        }
        (Sketch::Bivariate(_), QueryKind::Quantile) => {
            return Err(Failure::Usage("quantile queries need a univariate sketch".into()))
        }
        (Sketch::Bivariate(s), kind) => {
            if !args.at.len().is_multiple_of(2) {
                return Err(Failure::Usage(
                    "bivariate queries take x,y pairs: --at x1,y1,x2,y2,...".into(),
                ));
            }
            let points: Vec<[f64; 2]> = args.at.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            match kind {
                QueryKind::Pdf => s.pdf(&points, args.clipped)?,
                _ => s.cdf(&points, args.clipped)?,
            }
        }
    };
    print_values(&values)
}

fn merge(args: MergeArgs) -> Outcome {
    let sketches = args.sketches.iter().map(|p| load(p)).collect::<Outcome<Vec<_>>>()?;
    let merged: Sketch = if sketches.iter().all(|s| matches!(s, Sketch::Univariate(_))) {
        let parts: Vec<UnivariateSketch> = sketches
            .into_iter()
            .filter_map(|s| match s {
                Sketch::Univariate(u) => Some(u),
                Sketch::Bivariate(_) => None,
            })
            .collect();
        merge_univariate(&parts)?.into()
    } else if sketches.iter().all(|s| matches!(s, Sketch::Bivariate(_))) {
        let parts: Vec<BivariateSketch> = sketches
            .into_iter()
            .filter_map(|s| match s {
                Sketch::Bivariate(b) => Some(b),
                Sketch::Univariate(_) => None,
            })
            .collect();
        merge_bivariate(&parts)?.into()
    } else {
        return Err(Failure::Incompatible(
            "cannot merge univariate with bivariate sketches".into(),
        ));
    };
    store(&args.out, &merged)
}

fn corr(args: CorrArgs) -> Outcome {
    let Sketch::Bivariate(s) = load(&args.sketch)? else {
        return Err(Failure::Usage("correlation needs a bivariate sketch".into()));
    };
    let v = match args.kind {
        CorrKind::Spearman => s.spearman()?,
        CorrKind::Kendall => s.kendall()?,
    };
    print_values(&[v])
}

fn bench(args: BenchArgs) -> Outcome {
    let csv = match args.study {
        Study::Quantile => {
            let dists = args
                .dists
                .iter()
                .map(|name| {
                    TestDistribution::from_name(name)
                        .ok_or_else(|| Failure::Usage(format!("unknown distribution `{name}`")))
                })
                .collect::<Outcome<Vec<_>>>()?;
            quantile_rows_csv(&quantile_iae_study(&dists, args.n, args.m, args.order, args.seed)?)
        }
        Study::Correlation => correlation_csv(&correlation_mae_study(
            args.n, &args.rhos, args.m, args.order, args.seed,
        )?),
    };
    match args.out {
        Some(path) => fs::write(&path, csv).map_err(|e| io_failure(&path, e)),
        None => io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Failure::Data(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => build(a),
        Command::Update(a) => update(a),
        Command::Query(a) => query(a),
        Command::Merge(a) => merge(a),
        Command::Corr(a) => corr(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
