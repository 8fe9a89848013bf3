#![allow(dead_code)]

use motif_core::composition::GridSpec;
use motif_core::embeddings::{align_vocabularies, EmbeddingTable};
use motif_core::evaluation::{Benchmark, WordPair};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))
}

pub fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i:03}")).collect()
}

/// Plain cosine, written independently of the library.
pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Spearman by explicit rank enumeration: the rank of `x` is the number of
/// strictly smaller values plus the mean position among equal values.
pub fn spearman_oracle(a: &[f64], b: &[f64]) -> Option<f64> {
    let ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|x| {
                let less = v.iter().filter(|y| *y < x).count() as f64;
                let equal = v.iter().filter(|y| *y == x).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

pub fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// 30 words with 4-dimensional textual and visual vectors; the benchmark's
/// gold scores are exactly the textual cosines.
pub struct Planted {
    pub textual: EmbeddingTable,
    pub visual: EmbeddingTable,
    pub bench: Benchmark,
}

pub fn planted() -> Planted {
    let mut r = rng(7);
    let n = 30;
    let w = words(n);
    let t = random_matrix(&mut r, n, 4);
    let v = random_matrix(&mut r, n, 4);
    let textual = EmbeddingTable::new("textual", w.clone(), t.clone()).unwrap();
    let visual = EmbeddingTable::new("visual", w.clone(), v).unwrap();
    let (textual, visual) = align_vocabularies(&textual, &visual).unwrap();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in [i + 1, i + 7, i + 13] {
            if j < n {
                pairs.push(WordPair {
                    first: w[i].clone(),
                    second: w[j].clone(),
                    gold: cos(&row(&t, i), &row(&t, j)),
                });
            }
        }
    }
    let bench = Benchmark::new("planted", pairs).unwrap();
    Planted {
        textual,
        visual,
        bench,
    }
}

pub fn toy_grid() -> GridSpec {
    GridSpec {
        dim_step: 1,
        dim_min: 1,
        alpha_step: 0.25,
        ..GridSpec::default()
    }
}

/// 60 words; the textual table is 100 wide but only its first 50 columns
/// carry (centered) signal, so a 50-dimensional reduction scores exactly as
/// well as the raw table.
pub fn tie_fixture() -> Planted {
    let mut r = rng(17);
    let n = 60;
    let w = words(n);
    let signal = random_matrix(&mut r, n, 50);
    let mean = signal.row_mean();
    let t = DMatrix::from_fn(n, 100, |i, j| if j < 50 { signal[(i, j)] - mean[j] } else { 0.0 });
    let v = random_matrix(&mut r, n, 100);
    let textual = EmbeddingTable::new("textual", w.clone(), t.clone()).unwrap();
    let visual = EmbeddingTable::new("visual", w.clone(), v).unwrap();
    let pairs = (0..40)
        .map(|i| {
            let (a, b) = (i, i + 1 + i % 5);
            WordPair {
                first: w[a].clone(),
                second: w[b].clone(),
                gold: cos(&row(&t, a), &row(&t, b)),
            }
        })
        .collect();
    Planted {
        textual,
        visual,
        bench: Benchmark::new("tie", pairs).unwrap(),
    }
}
