//! Exhaustive configuration search, Best selection and cross-benchmark
//! evaluation.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::composition::{enumerate_configurations, Composer, Configuration, LayerA, Motif};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, Benchmark, EvaluationResult};

pub use crate::composition::GridSpec;

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub config: Configuration,
    /// Present unless applying the configuration failed.
    pub result: Option<EvaluationResult>,
    pub output_dim: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Ok,
    /// Fewer than two covered pairs or constant scores.
    Undefined,
    Failed,
}

impl EntryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryStatus::Ok => "ok",
            EntryStatus::Undefined => "undefined",
            EntryStatus::Failed => "failed",
        }
    }
}

impl ReportEntry {
    pub fn rho(&self) -> Option<f64> {
        self.result.as_ref().and_then(|r| r.rho)
    }

    pub fn status(&self) -> EntryStatus {
        match (&self.result, self.rho()) {
            (_, Some(_)) => EntryStatus::Ok,
            (Some(_), None) => EntryStatus::Undefined,
            (None, _) => EntryStatus::Failed,
        }
    }

    /// Ranking order: higher rho first, then lower output dimension, then
    /// canonical configuration order. Entries without a rho come last.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        match (self.rho(), other.rho()) {
            (Some(a), Some(b)) => b
                .total_cmp(&a)
                .then(self.output_dim.cmp(&other.output_dim)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
        .then_with(|| self.config.canonical_cmp(&other.config))
    }
}

/// Ranked results of a search on one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub benchmark_name: String,
    pub grid: GridSpec,
    pub entries: Vec<ReportEntry>,
}

impl SearchReport {
    /// Sorts `entries` into ranking order.
    pub fn new(benchmark_name: impl Into<String>, grid: GridSpec, mut entries: Vec<ReportEntry>) -> Self {
        entries.sort_by(ReportEntry::rank_cmp);
        SearchReport {
            benchmark_name: benchmark_name.into(),
            grid,
            entries,
        }
    }

    /// The top entry, if it has a defined rho.
    pub fn best(&self) -> Option<&ReportEntry> {
        self.entries.first().filter(|e| e.rho().is_some())
    }

    pub fn n_failed(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status() != EntryStatus::Ok)
            .count()
    }

    /// Line-per-entry form: a `#` header followed by tab-separated
    /// `rank status rho n_evaluated n_total coverage degenerate output_dim
    /// config message` rows. `rho` is printed at full precision.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# benchmark={}", self.benchmark_name);
        let _ = writeln!(s, "# grid {}", grid_line(&self.grid));
        s.push_str("# rank\tstatus\trho\tn_evaluated\tn_total\tcoverage\tdegenerate\toutput_dim\tconfig\tmessage\n");
        for (i, e) in self.entries.iter().enumerate() {
            let (n_eval, n_total, cov, degenerate) = match &e.result {
                Some(r) => (
                    r.n_evaluated.to_string(),
                    r.n_total.to_string(),
                    format!("{:.6}", r.coverage()),
                    r.degenerate_pairs.to_string(),
                ),
                None => ("-".into(), "-".into(), "-".into(), "-".into()),
            };
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                e.status().as_str(),
                e.rho().map_or_else(|| "NA".to_string(), |r| r.to_string()),
                n_eval,
                n_total,
                cov,
                degenerate,
                e.output_dim.map_or_else(|| "-".to_string(), |d| d.to_string()),
                e.config.to_line(),
                e.error.as_deref().unwrap_or("").replace(['\t', '\n'], " "),
            );
        }
        s
    }

    /// Parses the output of [`SearchReport::to_tsv`].
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut name = None;
        let mut grid = GridSpec::default();
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if let Some(rest) = line.strip_prefix("# benchmark=") {
                name = Some(rest.to_string());
                continue;
            }
            if let Some(rest) = line.strip_prefix("# grid ") {
                grid = parse_grid_line(rest).map_err(|m| Error::parse(lineno, m))?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 10 {
                return Err(Error::parse(lineno, format!("expected 10 fields, found {}", f.len())));
            }
            let num = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::parse(lineno, format!("invalid count `{s}`")))
            };
            let config: Configuration = f[8]
                .parse()
                .map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            let output_dim = if f[7] == "-" { None } else { Some(num(f[7])?) };
            let (result, error) = match f[1] {
                "failed" => (None, Some(f[9].to_string())),
                "ok" | "undefined" => {
                    let rho = if f[2] == "NA" {
                        None
                    } else {
                        Some(f[2].parse::<f64>().map_err(|_| Error::parse(lineno, "invalid rho"))?)
                    };
                    (
                        Some(EvaluationResult {
                            rho,
                            n_evaluated: num(f[3])?,
                            n_total: num(f[4])?,
                            degenerate_pairs: num(f[6])?,
                        }),
                        None,
                    )
                }
                other => return Err(Error::parse(lineno, format!("unknown status `{other}`"))),
            };
            entries.push(ReportEntry {
                config,
                result,
                output_dim,
                error,
            });
        }
        let name = name.ok_or_else(|| Error::parse(1, "missing `# benchmark=` header"))?;
        Ok(SearchReport::new(name, grid, entries))
    }

    /// Human-readable ranking with rho rounded to two decimals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Benchmark: {}", self.benchmark_name);
        if let Some(r) = self.entries.iter().find_map(|e| e.result.as_ref()) {
            let _ = writeln!(
                s,
                "Pairs evaluated: {}/{} ({:.0}%)",
                r.n_evaluated,
                r.n_total,
                100.0 * r.coverage()
            );
        }
        let _ = writeln!(
            s,
            "Configurations: {} ({} without a correlation)",
            self.entries.len(),
            self.n_failed()
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>6}  {:>6}  {:>5}  Config.", "rank", "rho", "dim");
        for (i, e) in self.entries.iter().enumerate() {
            let rho = match e.status() {
                EntryStatus::Ok => format!("{:.2}", e.rho().unwrap_or_default()),
                other => other.as_str().to_string(),
            };
            let dim = e.output_dim.map_or_else(|| "-".to_string(), |d| d.to_string());
            let _ = writeln!(s, "{:>6}  {:>6}  {:>5}  {}", i + 1, rho, dim, e.config.describe());
        }
        s
    }
}

fn grid_line(g: &GridSpec) -> String {
    let motifs = match &g.motifs {
        None => "all".to_string(),
        Some(m) => m.iter().map(Motif::to_string).collect::<Vec<_>>().join(","),
    };
    format!(
        "dim_step={} dim_min={} alpha_step={} ridge={} motifs={} normalize={}",
        g.dim_step, g.dim_min, g.alpha_step, g.ridge, motifs, g.normalize_concat
    )
}

fn parse_grid_line(s: &str) -> std::result::Result<GridSpec, String> {
    let mut g = GridSpec::default();
    for tok in s.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("bad grid token `{tok}`"))?;
        let bad = || format!("bad grid value `{tok}`");
        match k {
            "dim_step" => g.dim_step = v.parse().map_err(|_| bad())?,
            "dim_min" => g.dim_min = v.parse().map_err(|_| bad())?,
            "alpha_step" => g.alpha_step = v.parse().map_err(|_| bad())?,
            "ridge" => g.ridge = v.parse().map_err(|_| bad())?,
            "normalize" => g.normalize_concat = v.parse().map_err(|_| bad())?,
            "motifs" => g.motifs = parse_motifs(v)?,
            other => return Err(format!("unknown grid key `{other}`")),
        }
    }
    Ok(g)
}

/// Parses a comma-separated motif list; `all` means no restriction.
pub fn parse_motifs(s: &str) -> std::result::Result<Option<BTreeSet<Motif>>, String> {
    if s.trim() == "all" {
        return Ok(None);
    }
    s.split(',').map(str::parse).collect::<std::result::Result<BTreeSet<_>, _>>().map(Some)
}

/// Returns the top entry of the report.
pub fn select_best(report: &SearchReport) -> Result<(Configuration, EvaluationResult)> {
    let best = report.best().ok_or(Error::NoResult)?;
    Ok((best.config, best.result.clone().expect("ok entries carry a result")))
}

/// Execution knobs that do not affect results.
#[derive(Default)]
pub struct SearchOptions<'a> {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Called with `(completed, total)` after each configuration.
    pub progress: Option<&'a (dyn Fn(usize, usize) + Sync)>,
}

/// Evaluates every configuration of `grid` on one benchmark.
pub fn grid_search(
    textual: &EmbeddingTable,
    visual: &EmbeddingTable,
    bench: &Benchmark,
    grid: &GridSpec,
) -> Result<SearchReport> {
    search_benchmarks(
        textual,
        visual,
        std::slice::from_ref(bench),
        grid,
        &SearchOptions::default(),
    )
    .map(|mut v| v.remove(0))
}

/// Evaluates every configuration of `grid` once per benchmark; each
/// configuration is applied a single time and scored on all benchmarks.
///
/// Configurations sharing a layer-a choice are evaluated together so their
/// memoized fits can be dropped before the next group starts. Reports are
/// identical for any worker count.
pub fn search_benchmarks(
    textual: &EmbeddingTable,
    visual: &EmbeddingTable,
    benches: &[Benchmark],
    grid: &GridSpec,
    options: &SearchOptions<'_>,
) -> Result<Vec<SearchReport>> {
    let composer = Composer::new(textual, visual)?;
    let configs = enumerate_configurations(textual.dim(), visual.dim(), grid)?;
    if configs.is_empty() {
        return Err(Error::Grid(format!(
            "no configuration fits inputs of dimensions {} and {}",
            textual.dim(),
            visual.dim()
        )));
    }
    let total = configs.len();
    let done = AtomicUsize::new(0);

    let evaluate_one = |c: &Configuration| -> Vec<ReportEntry> {
        let entries = match composer.apply(c) {
            Ok(model) => benches
                .iter()
                .map(|b| match evaluate(&model, b) {
                    Ok(r) => ReportEntry {
                        config: *c,
                        result: Some(r),
                        output_dim: Some(model.output_dim()),
                        error: None,
                    },
                    Err(e) => ReportEntry {
                        config: *c,
                        result: None,
                        output_dim: Some(model.output_dim()),
                        error: Some(e.to_string()),
                    },
                })
                .collect(),
            Err(e) => benches
                .iter()
                .map(|_| ReportEntry {
                    config: *c,
                    result: None,
                    output_dim: None,
                    error: Some(e.to_string()),
                })
                .collect(),
        };
        let n = done.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        if let Some(p) = options.progress {
            p(n, total);
        }
        entries
    };

    let run = || -> Vec<Vec<ReportEntry>> {
        let mut all = Vec::with_capacity(total);
        for group in configs.chunk_by(|a, b| a.layer_a == b.layer_a) {
            let layer_a: LayerA = group[0].layer_a;
            all.par_extend(group.par_iter().map(&evaluate_one));
            composer.evict(layer_a);
        }
        all
    };
    let per_config = match options.workers {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Grid(format!("cannot start worker pool: {e}")))?
            .install(run),
    };

    let mut columns: Vec<Vec<ReportEntry>> = benches.iter().map(|_| Vec::with_capacity(total)).collect();
    for row in per_config {
        for (col, entry) in columns.iter_mut().zip(row) {
            col.push(entry);
        }
    }
    Ok(benches
        .iter()
        .zip(columns)
        .map(|(b, entries)| SearchReport::new(b.name(), grid.clone(), entries))
        .collect())
}

/// Applies one configuration and evaluates it on every benchmark, each with
/// its own coverage filtering.
pub fn cross_evaluate(
    config: &Configuration,
    textual: &EmbeddingTable,
    visual: &EmbeddingTable,
    benches: &[Benchmark],
) -> Result<Vec<(String, EvaluationResult)>> {
    let model = Composer::new(textual, visual)?.apply(config)?;
    benches
        .iter()
        .map(|b| Ok((b.name().to_string(), evaluate(&model, b)?)))
        .collect()
}

/// One row per best configuration, one column per benchmark.
pub fn summary_table(reports: &[SearchReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16}  {:>6}  {:>8}  {:>5}  Best config.", "benchmark", "rho", "coverage", "dim");
    for r in reports {
        match r.best() {
            Some(b) => {
                let res = b.result.as_ref().expect("ok entries carry a result");
                let _ = writeln!(
                    s,
                    "{:<16}  {:>6.2}  {:>7.0}%  {:>5}  {}",
                    r.benchmark_name,
                    b.rho().unwrap_or_default(),
                    100.0 * res.coverage(),
                    b.output_dim.unwrap_or_default(),
                    b.config.describe()
                );
            }
            None => {
                let _ = writeln!(s, "{:<16}  {:>6}  {:>8}  {:>5}  -", r.benchmark_name, "none", "-", "-");
            }
        }
    }
    s
}

/// Grid of rho values: rows are named configurations, columns benchmarks.
pub fn cross_table(rows: &[(String, Vec<(String, EvaluationResult)>)]) -> String {
    let mut s = String::new();
    let Some((_, first)) = rows.first() else {
        return s;
    };
    let _ = write!(s, "{:<20}", "config");
    for (b, _) in first {
        let _ = write!(s, "  {:>10}", b);
    }
    s.push('\n');
    for (name, results) in rows {
        let _ = write!(s, "{:<20}", name);
        for (_, r) in results {
            let cell = match r.rho {
                Some(rho) => format!("{rho:.2}"),
                None => "NA".to_string(),
            };
            let _ = write!(s, "  {:>10}", cell);
        }
        s.push('\n');
    }
    s
}
