use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_ssl::csv_io::{self, partition_of};
use causal_ssl::{report, runner, CliError, PartitionConfig};
use causal_ssl_core::bench::{BenchReport, DatasetSource, Method, MethodSettings, Protocol};
use causal_ssl_core::synth::{self, SynthConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "causal-ssl", version, about = "Semi-supervised learning with cause/effect feature partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset and write it as CSV plus a JSON sidecar.
    Generate {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path. Defaults to the output path with a `.json` extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Repeated-split accuracy of each method.
    Bench(BenchArgs),
    /// Paired comparison of the partition-using methods with cause and effect roles swapped.
    Ablate(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    S1,
    S2,
    S3,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    dataset: DatasetKind,
    /// Data file, with `--dataset csv`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Partition file, with `--dataset csv`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated method names. Defaults to all of them.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, default_value_t = 10)]
    n_labelled: usize,
    #[arg(long, default_value_t = 200)]
    n_unlabelled: usize,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    swap_roles: bool,
    #[arg(long)]
    standardize: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    partition: PartitionConfig,
    preset: &'a str,
    n: usize,
    seed: u64,
    config: &'a SynthConfig,
}

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn generate(preset: &str, n: usize, seed: u64, out: &Path, sidecar: Option<&Path>) -> Result<(), CliError> {
    let cfg = synth::preset(preset)?;
    let ds = synth::generate(&cfg, n, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let file = std::fs::File::create(out).map_err(|e| data_err(out, e))?;
    csv_io::write_dataset_csv(&ds, std::io::BufWriter::new(file)).map_err(|e| data_err(out, e))?;

    let side = Sidecar { partition: partition_of(&ds), preset: &preset.to_ascii_lowercase(), n, seed, config: &cfg };
    let path = sidecar.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("json"));
    let json = serde_json::to_string_pretty(&side).map_err(|e| data_err(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| data_err(&path, e))
}

fn protocol(args: &BenchArgs) -> Result<Protocol, CliError> {
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods
            .iter()
            .map(|s| Method::parse(s).ok_or_else(|| CliError::Config(format!("unknown method {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?
    };
    let source = match args.dataset {
        DatasetKind::S1 => DatasetSource::preset("s1")?,
        DatasetKind::S2 => DatasetSource::preset("s2")?,
        DatasetKind::S3 => DatasetSource::preset("s3")?,
        DatasetKind::Csv => {
            let (Some(csv), Some(config)) = (&args.csv, &args.config) else {
                return Err(CliError::Config("--dataset csv needs --csv and --config".into()));
            };
            let partition = PartitionConfig::load(config)?;
            let data = csv_io::load_csv(csv, &partition, false)?;
            let name = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
            DatasetSource::Fixed { name, data }
        }
    };
    Ok(Protocol {
        source,
        n_labelled: args.n_labelled,
        n_unlabelled: args.n_unlabelled,
        runs: args.runs,
        master_seed: args.seed,
        methods,
        swap_roles: args.swap_roles,
        standardize: args.standardize,
        settings: MethodSettings::default(),
    })
}

fn emit(report: &BenchReport, args: &BenchArgs) -> Result<(), CliError> {
    let text = match args.format {
        Format::Csv => report::render_csv(report),
        Format::Markdown => report::render_markdown(report),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| data_err(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Data(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { preset, n, seed, out, sidecar } => generate(&preset, n, seed, &out, sidecar.as_deref()),
        Command::Bench(args) => {
            let p = protocol(&args)?;
            let report = runner::run_protocol(&p, runner::threads_from_env()?)?;
            emit(&report, &args)
        }
        Command::Ablate(args) => {
            let mut p = protocol(&args)?;
            p.swap_roles = false;
            let paired = runner::ablate_swap_roles(&p, runner::threads_from_env()?)?;
            emit(&paired.normal.merge(paired.swapped), &args)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("causal-ssl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
