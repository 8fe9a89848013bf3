//! `motifs`: evaluate, search, apply and cross-evaluate multimodal
//! embedding compositions.

mod manifest;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use motif_core::composition::{apply_configuration, Configuration, ScoringModel};
use motif_core::embeddings::{align_vocabularies, load_embeddings, save_embeddings, EmbeddingTable};
use motif_core::evaluation::{load_benchmark, Benchmark};
use motif_core::search::{
    cross_evaluate, cross_table, parse_motifs, search_benchmarks, summary_table, GridSpec, SearchOptions,
    SearchReport,
};
use motif_core::Error;

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "motifs", version, about = "Compose textual and visual word embeddings and score them on similarity benchmarks")]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Inputs {
    /// Textual embeddings (word2vec text format)
    #[arg(long, value_name = "FILE")]
    text_vecs: Option<PathBuf>,
    /// Visual embeddings (word2vec text format)
    #[arg(long, value_name = "FILE")]
    image_vecs: Option<PathBuf>,
    /// Word-pair benchmark; repeatable. Named after the file stem.
    #[arg(long = "bench", value_name = "FILE")]
    benches: Vec<PathBuf>,
}

#[derive(Args, Default)]
struct GridArgs {
    /// Dimension grid step [default: 50]
    #[arg(long)]
    dim_step: Option<usize>,
    /// Smallest dimension in the grid [default: 50]
    #[arg(long)]
    dim_min: Option<usize>,
    /// Interpolation weight step [default: 0.1]
    #[arg(long)]
    alpha_step: Option<f64>,
    /// CCA ridge [default: 0.001]
    #[arg(long)]
    ridge: Option<f64>,
    /// Comma-separated motif filter (pca,cca,rcca,concat,li) or `all`
    #[arg(long)]
    motifs: Option<String>,
    /// L2-normalize each block before concatenation
    #[arg(long)]
    normalize_concat: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration on every benchmark
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        /// Configuration file
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Result file [default: stdout]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Exhaustive grid search, one report per benchmark
    Search {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        grid: GridArgs,
        /// Worker threads [default: all cores]
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Evaluate several configurations on several benchmarks
    Cross {
        #[command(flatten)]
        inputs: Inputs,
        /// Configuration file; repeatable. Named after the file stem.
        #[arg(long = "config", value_name = "FILE")]
        configs: Vec<PathBuf>,
        /// Table file [default: stdout]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Apply a configuration and save the resulting vectors
    Apply {
        #[command(flatten)]
        inputs: Inputs,
        /// Configuration file
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Render a saved search report as a table
    Report {
        /// A `.report.tsv` file written by `search`
        tsv: PathBuf,
        /// Table file [default: stdout]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_)
            | Error::Dimension(_)
            | Error::MissingReduction { .. }
            | Error::UndefinedCorrelation(_)
            | Error::NoResult => Failure::Numerical(e.to_string()),
            Error::Grid(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("motifs: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let manifest = match &cli.manifest {
        Some(p) => Manifest::load(p).map_err(Failure::Input)?,
        None => Manifest::default(),
    };
    match cli.command {
        Command::Eval { inputs, config, out } => {
            let config = config.or_else(|| single(&manifest.configs));
            cmd_eval(&inputs, &manifest, config, out.or(manifest.out.clone()))
        }
        Command::Search {
            inputs,
            grid,
            workers,
            out,
        } => cmd_search(&inputs, &grid, workers.or(manifest.workers), out.or(manifest.out.clone()), &manifest),
        Command::Cross { inputs, configs, out } => {
            let configs = if configs.is_empty() { manifest.configs.clone() } else { configs };
            cmd_cross(&inputs, &manifest, &configs, out.or(manifest.out.clone()))
        }
        Command::Apply { inputs, config, out } => {
            let config = config.or_else(|| single(&manifest.configs));
            cmd_apply(&inputs, &manifest, config, out.or(manifest.out.clone()))
        }
        Command::Report { tsv, out } => cmd_report(&tsv, out),
    }
}

fn single(paths: &[PathBuf]) -> Option<PathBuf> {
    match paths {
        [one] => Some(one.clone()),
        _ => None,
    }
}

struct Loaded {
    textual: EmbeddingTable,
    visual: EmbeddingTable,
    benches: Vec<Benchmark>,
}

/// Checks that every input exists before reading any of them, then loads
/// and aligns the tables.
fn load_inputs(inputs: &Inputs, manifest: &Manifest, need_benches: bool) -> Result<Loaded, Failure> {
    let text = inputs
        .text_vecs
        .clone()
        .or(manifest.text_vecs.clone())
        .ok_or_else(|| Failure::Usage("--text-vecs is required".into()))?;
    let image = inputs
        .image_vecs
        .clone()
        .or(manifest.image_vecs.clone())
        .ok_or_else(|| Failure::Usage("--image-vecs is required".into()))?;
    let bench_paths = if inputs.benches.is_empty() { &manifest.benches } else { &inputs.benches };
    if need_benches && bench_paths.is_empty() {
        return Err(Failure::Usage("at least one --bench is required".into()));
    }
    for p in [&text, &image].into_iter().chain(bench_paths) {
        if !p.is_file() {
            return Err(Failure::Input(format!("{}: no such file", p.display())));
        }
    }
    let mut names = BTreeSet::new();
    for p in bench_paths {
        if !names.insert(stem(p)) {
            return Err(Failure::Input(format!("two benchmarks are named `{}`", stem(p))));
        }
    }

    let textual = load_embeddings(&text, "textual")?;
    let visual = load_embeddings(&image, "visual")?;
    let (textual, visual) = align_vocabularies(&textual, &visual)?;
    let benches = bench_paths
        .iter()
        .map(|p| load_benchmark(p, &stem(p)))
        .collect::<motif_core::Result<Vec<_>>>()?;
    Ok(Loaded {
        textual,
        visual,
        benches,
    })
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_config(path: &Path) -> Result<Configuration, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e: Error| Failure::Input(format!("{}: {e}", path.display())))
}

fn require_config(config: Option<PathBuf>) -> Result<PathBuf, Failure> {
    config.ok_or_else(|| Failure::Usage("--config is required".into()))
}

/// Fails early when `path` could not be created as a directory.
fn check_out_dir(path: &Path) -> Outcome {
    if path.exists() && !path.is_dir() {
        return Err(Failure::Input(format!("{}: not a directory", path.display())));
    }
    Ok(())
}

fn check_out_file(path: &Path) -> Outcome {
    if path.is_dir() {
        return Err(Failure::Input(format!("{}: is a directory", path.display())));
    }
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(Failure::Input(format!("{}: no such directory", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> Outcome {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn cmd_eval(inputs: &Inputs, manifest: &Manifest, config: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let config_path = require_config(config)?;
    if let Some(o) = &out {
        check_out_file(o)?;
    }
    let config = load_config(&config_path)?;
    let data = load_inputs(inputs, manifest, true)?;
    let results = cross_evaluate(&config, &data.textual, &data.visual, &data.benches)?;
    let mut s = String::new();
    let _ = writeln!(s, "# config {}", config.to_line());
    s.push_str("benchmark\trho\tn_evaluated\tn_total\tcoverage\tdegenerate\n");
    for (name, r) in &results {
        let rho = r.rho.map_or_else(|| "NA".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{name}\t{rho}\t{}\t{}\t{:.6}\t{}",
            r.n_evaluated,
            r.n_total,
            r.coverage(),
            r.degenerate_pairs
        );
    }
    emit(out.as_deref(), &s)?;
    if results.iter().any(|(_, r)| r.rho.is_none()) {
        return Err(Failure::Numerical("correlation undefined on at least one benchmark".into()));
    }
    Ok(())
}

fn grid_spec(args: &GridArgs, manifest: &Manifest) -> Result<GridSpec, Failure> {
    let d = GridSpec::default();
    let motifs = match args.motifs.as_ref().or(manifest.motifs.as_ref()) {
        Some(m) => parse_motifs(m).map_err(|e| Failure::Usage(format!("--motifs: {e}")))?,
        None => None,
    };
    let grid = GridSpec {
        dim_step: args.dim_step.or(manifest.dim_step).unwrap_or(d.dim_step),
        dim_min: args.dim_min.or(manifest.dim_min).unwrap_or(d.dim_min),
        alpha_step: args.alpha_step.or(manifest.alpha_step).unwrap_or(d.alpha_step),
        ridge: args.ridge.or(manifest.ridge).unwrap_or(d.ridge),
        motifs,
        normalize_concat: args.normalize_concat || manifest.normalize_concat.unwrap_or(false),
    };
    grid.validate()?;
    Ok(grid)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn cmd_search(
    inputs: &Inputs,
    grid: &GridArgs,
    workers: Option<usize>,
    out: Option<PathBuf>,
    manifest: &Manifest,
) -> Outcome {
    let out = out.ok_or_else(|| Failure::Usage("--out is required".into()))?;
    check_out_dir(&out)?;
    if workers == Some(0) {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let grid = grid_spec(grid, manifest)?;
    let data = load_inputs(inputs, manifest, true)?;
    let started = unix_now();

    let progress = |done: usize, total: usize| {
        let every = (total / 100).max(1);
        if done.is_multiple_of(every) || done == total {
            eprint!("\rsearch: {done}/{total} configurations");
            if done == total {
                eprintln!();
            }
        }
    };
    let reports = search_benchmarks(
        &data.textual,
        &data.visual,
        &data.benches,
        &grid,
        &SearchOptions {
            workers,
            progress: Some(&progress),
        },
    )?;

    std::fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    for r in &reports {
        write_file(&out.join(format!("{}.report.tsv", r.benchmark_name)), &r.to_tsv())?;
        write_file(&out.join(format!("{}.report.txt", r.benchmark_name)), &r.to_table())?;
    }
    write_file(&out.join("summary.txt"), &summary_table(&reports))?;
    let mut log = String::new();
    let _ = writeln!(log, "started={started}");
    let _ = writeln!(log, "finished={}", unix_now());
    let _ = writeln!(log, "vocabulary={}", data.textual.len());
    let _ = writeln!(log, "configurations={}", reports.first().map_or(0, |r| r.entries.len()));
    let _ = writeln!(log, "workers={}", workers.map_or_else(|| "auto".to_string(), |w| w.to_string()));
    for r in &reports {
        let _ = writeln!(log, "{}: failed={}", r.benchmark_name, r.n_failed());
    }
    write_file(&out.join("run.log"), &log)?;

    let missing: Vec<&str> = reports
        .iter()
        .filter(|r| r.best().is_none())
        .map(|r| r.benchmark_name.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Numerical(format!(
            "no configuration produced a correlation on {}",
            missing.join(", ")
        )));
    }
    Ok(())
}

fn cmd_cross(inputs: &Inputs, manifest: &Manifest, configs: &[PathBuf], out: Option<PathBuf>) -> Outcome {
    if configs.is_empty() {
        return Err(Failure::Usage("at least one --config is required".into()));
    }
    if let Some(o) = &out {
        check_out_file(o)?;
    }
    let parsed = configs
        .iter()
        .map(|p| Ok((stem(p), load_config(p)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let data = load_inputs(inputs, manifest, true)?;
    let rows = parsed
        .iter()
        .map(|(name, c)| Ok((name.clone(), cross_evaluate(c, &data.textual, &data.visual, &data.benches)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    emit(out.as_deref(), &cross_table(&rows))
}

fn cmd_apply(inputs: &Inputs, manifest: &Manifest, config: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let config_path = require_config(config)?;
    let out = out.ok_or_else(|| Failure::Usage("--out is required".into()))?;
    check_out_dir(&out)?;
    let config = load_config(&config_path)?;
    let data = load_inputs(inputs, manifest, false)?;
    let model = apply_configuration(&config, &data.textual, &data.visual)?;
    std::fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    write_file(&out.join("config.txt"), &config.to_string())?;
    match &model {
        ScoringModel::Single(t) => save_embeddings(t, out.join("vectors.txt"))?,
        ScoringModel::Interpolated { first, second, .. } => {
            save_embeddings(first, out.join("first.txt"))?;
            save_embeddings(second, out.join("second.txt"))?;
        }
    }
    Ok(())
}

fn cmd_report(tsv: &Path, out: Option<PathBuf>) -> Outcome {
    if let Some(o) = &out {
        check_out_file(o)?;
    }
    let text = std::fs::read_to_string(tsv).map_err(|e| Failure::Input(format!("{}: {e}", tsv.display())))?;
    let report = SearchReport::from_tsv(&text).map_err(|e| Failure::Input(format!("{}: {e}", tsv.display())))?;
    emit(out.as_deref(), &report.to_table())
}
