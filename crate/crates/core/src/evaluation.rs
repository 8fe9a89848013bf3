//! Word-pair similarity benchmarks and Spearman evaluation.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::composition::ScoringModel;
use crate::embeddings::{EmbeddingTable, Vocab};
use crate::error::{Error, Result};

/// Norm below which a vector is treated as zero by [`cosine`].
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub first: String,
    pub second: String,
    pub gold: f64,
}

/// Human similarity judgments for word pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    name: String,
    pairs: Vec<WordPair>,
}

fn unordered_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl Benchmark {
    /// Builds a benchmark, rejecting duplicate unordered pairs, non-finite
    /// scores and empty pair lists.
    pub fn new(name: impl Into<String>, pairs: Vec<WordPair>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::EmptyInput(format!("benchmark `{name}` has no pairs")));
        }
        Self::checked(name, pairs)
    }

    fn checked(name: String, pairs: Vec<WordPair>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            if !p.gold.is_finite() {
                return Err(Error::parse(i + 1, format!("non-finite score {}", p.gold)));
            }
            if !seen.insert(unordered_key(&p.first, &p.second)) {
                return Err(Error::Duplicate {
                    key: format!("{} {}", p.first, p.second),
                    line: i + 1,
                });
            }
        }
        Ok(Benchmark { name, pairs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairs(&self) -> &[WordPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Writes the pairs as tab-separated lines.
    pub fn write_tsv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for p in &self.pairs {
            writeln!(w, "{}\t{}\t{}", p.first, p.second, p.gold)?;
        }
        Ok(())
    }
}

/// Reads `word1 word2 score` lines separated by tabs or commas. The
/// delimiter is taken from the first data line and must be used throughout.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_benchmark(path: impl AsRef<Path>, name: &str) -> Result<Benchmark> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_benchmark(&text, name)
}

pub fn parse_benchmark(text: &str, name: &str) -> Result<Benchmark> {
    let mut delim: Option<char> = None;
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let d = *delim.get_or_insert(if line.contains('\t') { '\t' } else { ',' });
        let fields: Vec<&str> = line.split(d).map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected 3 {}-separated fields, found {}",
                    if d == '\t' { "tab" } else { "comma" },
                    fields.len()
                ),
            ));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::parse(lineno, "empty word"));
        }
        let gold: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid score `{}`", fields[2])))?;
        if !gold.is_finite() {
            return Err(Error::parse(lineno, format!("non-finite score `{}`", fields[2])));
        }
        if !seen.insert(unordered_key(fields[0], fields[1])) {
            return Err(Error::Duplicate {
                key: format!("{} {}", fields[0], fields[1]),
                line: lineno,
            });
        }
        pairs.push(WordPair {
            first: fields[0].to_owned(),
            second: fields[1].to_owned(),
            gold,
        });
    }
    Benchmark::new(name, pairs)
}

/// Keeps the pairs whose words are both in `vocab`, in their original order.
/// The result may be empty.
pub fn filter_coverage(bench: &Benchmark, vocab: &Vocab) -> Benchmark {
    Benchmark {
        name: bench.name.clone(),
        pairs: bench
            .pairs
            .iter()
            .filter(|p| vocab.contains(&p.first) && vocab.contains(&p.second))
            .cloned()
            .collect(),
    }
}

/// A cosine value plus whether either vector was (numerically) zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub degenerate: bool,
}

/// `u·v / (‖u‖‖v‖)`; 0 and flagged degenerate when either norm is below
/// [`DEGENERATE_NORM`].
pub fn cosine<'a, 'b>(
    u: impl IntoIterator<Item = &'a f64>,
    v: impl IntoIterator<Item = &'b f64>,
) -> Result<Cosine> {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    let mut u = u.into_iter();
    let mut v = v.into_iter();
    loop {
        match (u.next(), v.next()) {
            (Some(a), Some(b)) => {
                dot += a * b;
                nu += a * a;
                nv += b * b;
            }
            (None, None) => break,
            _ => return Err(Error::Dimension("cosine of vectors with different lengths".into())),
        }
    }
    let (nu, nv) = (nu.sqrt(), nv.sqrt());
    if nu < DEGENERATE_NORM || nv < DEGENERATE_NORM {
        return Ok(Cosine {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Cosine {
        value: dot / (nu * nv),
        degenerate: false,
    })
}

fn table_cosine(t: &EmbeddingTable, w1: &str, w2: &str) -> Result<Cosine> {
    let a = t.vector(w1).ok_or_else(|| Error::Lookup(w1.to_owned()))?;
    let b = t.vector(w2).ok_or_else(|| Error::Lookup(w2.to_owned()))?;
    cosine(a.iter(), b.iter())
}

/// Model similarity for a word pair; degenerate if any cosine involved was.
pub fn pair_score(model: &ScoringModel, w1: &str, w2: &str) -> Result<Cosine> {
    match model {
        ScoringModel::Single(t) => table_cosine(t, w1, w2),
        ScoringModel::Interpolated {
            first,
            second,
            alpha,
        } => {
            let a = table_cosine(first, w1, w2)?;
            let b = table_cosine(second, w1, w2)?;
            Ok(Cosine {
                value: alpha * a.value + (1.0 - alpha) * b.value,
                degenerate: a.degenerate || b.degenerate,
            })
        }
    }
}

/// Average ranks (1-based); tied values share the mean of the ranks they
/// span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "spearman inputs have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 values, got {}",
            a.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("spearman input contains non-finite values".into()));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    // both rank vectors sum to n(n+1)/2
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("constant ranks".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Outcome of scoring one model on one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    /// `None` when fewer than two pairs survive filtering or the scores
    /// are constant.
    pub rho: Option<f64>,
    pub n_evaluated: usize,
    pub n_total: usize,
    pub degenerate_pairs: usize,
}

impl EvaluationResult {
    pub fn coverage(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_evaluated as f64 / self.n_total as f64
        }
    }
}

impl fmt::Display for EvaluationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rho {
            Some(r) => write!(f, "rho={r:.2}")?,
            None => write!(f, "rho=undefined")?,
        }
        write!(
            f,
            " pairs={}/{} ({:.0}%)",
            self.n_evaluated,
            self.n_total,
            100.0 * self.coverage()
        )
    }
}

/// Filters `bench` to the model vocabulary, scores the surviving pairs and
/// correlates them with the gold scores.
pub fn evaluate(model: &ScoringModel, bench: &Benchmark) -> Result<EvaluationResult> {
    let covered = filter_coverage(bench, model.vocab());
    let mut scores = Vec::with_capacity(covered.len());
    let mut degenerate_pairs = 0;
    for p in covered.pairs() {
        let s = pair_score(model, &p.first, &p.second)?;
        degenerate_pairs += usize::from(s.degenerate);
        scores.push(s.value);
    }
    let gold: Vec<f64> = covered.pairs().iter().map(|p| p.gold).collect();
    let rho = match spearman(&scores, &gold) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EvaluationResult {
        rho,
        n_evaluated: covered.len(),
        n_total: bench.len(),
        degenerate_pairs,
    })
}
