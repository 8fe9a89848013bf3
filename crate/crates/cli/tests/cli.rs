use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const N: usize = 14;

fn motifs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motifs")).args(args).output().unwrap()
}

fn value(i: usize, j: usize, salt: f64) -> f64 {
    ((i * 7 + j * 3) as f64 * 0.61 + salt).sin()
}

fn textual(i: usize) -> [f64; 3] {
    [value(i, 0, 0.0), value(i, 1, 0.0), value(i, 2, 0.0)]
}

fn cos(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let n = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (n(a) * n(b))
}

/// Writes a 14-word fixture whose `gold` benchmark scores are the textual
/// cosines, plus a second benchmark with one uncovered pair.
fn fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let mut t = format!("{N} 3\n");
    let mut v = String::new();
    for i in 0..N {
        let r = textual(i);
        let _ = writeln!(t, "w{i:02} {} {} {}", r[0], r[1], r[2]);
        let _ = writeln!(v, "w{i:02} {} {} {}", value(i, 0, 1.3), value(i, 1, 2.1), value(i, 2, 0.4));
    }
    let _ = writeln!(v, "extra 1 2 3");
    let mut gold = String::new();
    let mut other = String::new();
    for i in 0..N {
        for j in [i + 1, i + 4] {
            if j < N {
                let _ = writeln!(gold, "w{i:02}\tw{j:02}\t{}", cos(&textual(i), &textual(j)));
                let _ = writeln!(other, "w{i:02},w{j:02},{}", (i * j) % 5);
            }
        }
    }
    other.push_str("w00,unknown,1\n");
    let paths = (dir.join("text.txt"), dir.join("image.txt"), dir.join("gold.tsv"), dir.join("other.csv"));
    fs::write(&paths.0, t).unwrap();
    fs::write(&paths.1, v).unwrap();
    fs::write(&paths.2, gold).unwrap();
    fs::write(&paths.3, other).unwrap();
    paths
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn search(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let (t, v, g, o) = fixture(dir);
    let out = dir.join(out);
    let mut args = vec![
        "search", "--text-vecs", s(&t), "--image-vecs", s(&v), "--bench", s(&g), "--bench", s(&o),
        "--dim-step", "1", "--dim-min", "1", "--alpha-step", "0.5", "--out", s(&out),
    ];
    args.extend_from_slice(extra);
    motifs(&args)
}

#[test]
fn search_writes_reports_and_finds_the_planted_best() {
    let dir = tempfile::tempdir().unwrap();
    let out = search(dir.path(), "run", &["--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    for f in ["gold.report.tsv", "gold.report.txt", "other.report.tsv", "other.report.txt", "summary.txt", "run.log"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let tsv = fs::read_to_string(run.join("gold.report.tsv")).unwrap();
    let first = tsv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(first.starts_with("1\tok\t1\t"), "{first}");
    assert!(first.contains("layer_a=none layer_b=none:T layer_c=none"), "{first}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("configurations"));
    let summary = fs::read_to_string(run.join("summary.txt")).unwrap();
    assert!(summary.contains("gold") && summary.contains("other"));
    assert!(!tsv.contains("started="));
}

#[test]
fn worker_counts_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(search(dir.path(), "one", &["--workers", "1"]).status.success());
    assert!(search(dir.path(), "eight", &["--workers", "8"]).status.success());
    for f in ["gold.report.tsv", "gold.report.txt", "other.report.tsv", "summary.txt"] {
        assert_eq!(
            fs::read(dir.path().join("one").join(f)).unwrap(),
            fs::read(dir.path().join("eight").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn motif_filter_keeps_only_interpolation() {
    let dir = tempfile::tempdir().unwrap();
    assert!(search(dir.path(), "li", &["--motifs", "li"]).status.success());
    let tsv = fs::read_to_string(dir.path().join("li/gold.report.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains("layer_a=none layer_b=none:TV layer_c=li:")));
}

#[test]
fn report_rerenders_the_saved_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(search(dir.path(), "run", &[]).status.success());
    let out = motifs(&["report", s(&dir.path().join("run/gold.report.tsv"))]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        fs::read_to_string(dir.path().join("run/gold.report.txt")).unwrap()
    );
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn eval_reports_rho_and_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let (t, v, g, o) = fixture(dir.path());
    let c = config(dir.path(), "best.conf", "layer_a=none\nlayer_b=none:T\nlayer_c=none\n");
    let res = dir.path().join("res.tsv");
    let out = motifs(&[
        "eval", "--text-vecs", s(&t), "--image-vecs", s(&v), "--bench", s(&g), "--bench", s(&o), "--config", s(&c),
        "--out", s(&res),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(res).unwrap();
    let gold = text.lines().find(|l| l.starts_with("gold\t")).unwrap();
    assert!(gold.starts_with("gold\t1\t"), "{gold}");
    assert!(text.lines().any(|l| l.starts_with("other\t") && l.contains("\t0.958333\t")), "{text}");
}

#[test]
fn missing_input_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let (_, v, g, _) = fixture(dir.path());
    let c = config(dir.path(), "c.conf", "layer_a=none\nlayer_b=none:T\nlayer_c=none\n");
    let res = dir.path().join("res.tsv");
    let out = motifs(&[
        "eval", "--text-vecs", s(&dir.path().join("absent.txt")), "--image-vecs", s(&v), "--bench", s(&g),
        "--config", s(&c), "--out", s(&res),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!res.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.txt"));
}

#[test]
fn invalid_configuration_is_explained() {
    let dir = tempfile::tempdir().unwrap();
    let (t, _, g, _) = fixture(dir.path());
    let wide = dir.path().join("wide.txt");
    let rows: String = (0..N).map(|i| format!("w{i:02} {} {} {} {}\n", value(i, 0, 3.0), value(i, 1, 1.0), i, 1.0)).collect();
    fs::write(&wide, rows).unwrap();
    let c = config(dir.path(), "c.conf", "layer_a=none\nlayer_b=cca:2:T\nlayer_c=none\n");
    let out = motifs(&["eval", "--text-vecs", s(&t), "--image-vecs", s(&wide), "--bench", s(&g), "--config", s(&c)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("same dimensionality"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cross_rows_match_search_best() {
    let dir = tempfile::tempdir().unwrap();
    let (t, v, g, o) = fixture(dir.path());
    let a = config(dir.path(), "text.conf", "layer_a=none\nlayer_b=none:T\nlayer_c=none\n");
    let b = config(dir.path(), "mix.conf", "layer_a=pca:3\nlayer_b=cca_plus_rcca:2:cca=V:rcca=T\nlayer_c=li:0.5\n");
    let out = motifs(&[
        "cross", "--text-vecs", s(&t), "--image-vecs", s(&v), "--bench", s(&g), "--bench", s(&o), "--config", s(&a),
        "--config", s(&b),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("gold") && lines[0].contains("other"));
    assert!(lines[1].starts_with("text") && lines[1].contains("1.00"));
    assert!(lines[2].starts_with("mix"));
}

#[test]
fn apply_saves_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let (t, v, _, _) = fixture(dir.path());
    let c = config(dir.path(), "c.conf", "layer_a=pca:2\nlayer_b=none:TV\nlayer_c=concat\n");
    let li = config(dir.path(), "li.conf", "layer_a=none\nlayer_b=none:TV\nlayer_c=li:0.3\n");
    let out_dir = dir.path().join("model");
    let out = motifs(&["apply", "--text-vecs", s(&t), "--image-vecs", s(&v), "--config", s(&c), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let vectors = fs::read_to_string(out_dir.join("vectors.txt")).unwrap();
    assert!(vectors.starts_with(&format!("{N} 4\n")));
    let pair_dir = dir.path().join("pair");
    assert!(motifs(&["apply", "--text-vecs", s(&t), "--image-vecs", s(&v), "--config", s(&li), "--out", s(&pair_dir)])
        .status
        .success());
    assert!(pair_dir.join("first.txt").is_file() && pair_dir.join("second.txt").is_file());
    assert!(fs::read_to_string(pair_dir.join("config.txt")).unwrap().contains("li:0.3"));
}

#[test]
fn manifest_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let m = dir.path().join("run.manifest");
    fs::write(
        &m,
        "text_vecs=text.txt\nimage_vecs=image.txt\nbench=gold.tsv\nout=from_manifest\ndim_step=1\ndim_min=1\nalpha_step=1\nworkers=2\n",
    )
    .unwrap();
    let out = motifs(&["search", "--manifest", s(&m)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_manifest/gold.report.tsv").is_file());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(motifs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(motifs(&["search", "--dim-step", "x"]).status.code(), Some(1));
    assert_eq!(motifs(&["eval"]).status.code(), Some(1));
    assert_eq!(motifs(&["--help"]).status.code(), Some(0));
}

#[test]
fn constant_scores_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.txt");
    fs::write(&flat, "a 1 0\nb 1 0\nc 1 0\n").unwrap();
    let bench = dir.path().join("b.tsv");
    fs::write(&bench, "a\tb\t1\nb\tc\t2\na\tc\t3\n").unwrap();
    let out = motifs(&[
        "search", "--text-vecs", s(&flat), "--image-vecs", s(&flat), "--bench", s(&bench), "--dim-step", "1",
        "--dim-min", "1", "--alpha-step", "1", "--out", s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
