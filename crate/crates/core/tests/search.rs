mod common;

use motif_core::composition::{Configuration, LayerA, LayerB, LayerC, Motif, Output};
use motif_core::evaluation::{Benchmark, EvaluationResult, WordPair};
use motif_core::numerics::Side;
use motif_core::search::{
    cross_evaluate, grid_search, search_benchmarks, select_best, GridSpec, ReportEntry, SearchOptions, SearchReport,
};
use motif_core::Error;

fn entry(config: Configuration, rho: Option<f64>, dim: usize) -> ReportEntry {
    ReportEntry {
        config,
        result: Some(EvaluationResult {
            rho,
            n_evaluated: 10,
            n_total: 10,
            degenerate_pairs: 0,
        }),
        output_dim: Some(dim),
        error: None,
    }
}

#[test]
fn worker_count_does_not_change_reports() {
    let p = common::planted();
    let grid = common::toy_grid();
    let run = |workers| {
        search_benchmarks(
            &p.textual,
            &p.visual,
            std::slice::from_ref(&p.bench),
            &grid,
            &SearchOptions { workers: Some(workers), progress: None },
        )
        .unwrap()
        .remove(0)
        .to_tsv()
    };
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, run(3));
}

#[test]
fn best_dominates_every_entry() {
    let p = common::planted();
    let report = grid_search(&p.textual, &p.visual, &p.bench, &common::toy_grid()).unwrap();
    let best = report.best().unwrap().rho().unwrap();
    assert!(report.entries.iter().filter_map(|e| e.rho()).all(|r| r <= best));
    let (config, result) = select_best(&report).unwrap();
    assert_eq!(config, Configuration::identity(Side::Textual));
    assert_eq!(result.rho, Some(1.0));
}

#[test]
fn widening_the_grid_never_lowers_the_best() {
    let p = common::planted();
    let narrow = GridSpec {
        motifs: Some([Motif::Li, Motif::Concat].into()),
        ..common::toy_grid()
    };
    let a = grid_search(&p.textual, &p.visual, &p.bench, &narrow).unwrap();
    let b = grid_search(&p.textual, &p.visual, &p.bench, &common::toy_grid()).unwrap();
    assert!(b.best().unwrap().rho().unwrap() >= a.best().unwrap().rho().unwrap());
    assert!(a.entries.len() < b.entries.len());
}

#[test]
fn ties_prefer_smaller_output_then_canonical_order() {
    let big = Configuration::identity(Side::Textual);
    let small = Configuration::new(LayerA::Pca(50), LayerB::None(Output::Single(Side::Textual)), LayerC::None);
    let small_li = Configuration::new(LayerA::Pca(50), LayerB::None(Output::Both), LayerC::Li(1.0));
    let worse = Configuration::identity(Side::Visual);
    let report = SearchReport::new(
        "t",
        GridSpec::default(),
        vec![
            entry(worse, Some(0.5), 10),
            entry(big, Some(0.9), 100),
            entry(small_li, Some(0.9), 50),
            entry(small, Some(0.9), 50),
            entry(worse.with_ridge(0.5), None, 1),
        ],
    );
    let order: Vec<Configuration> = report.entries.iter().map(|e| e.config).collect();
    assert_eq!(order, vec![small, small_li, big, worse, worse.with_ridge(0.5)]);
}

#[test]
fn reduced_table_wins_an_exact_tie() {
    let p = common::tie_fixture();
    let grid = GridSpec {
        alpha_step: 0.5,
        ..GridSpec::default()
    };
    let report = grid_search(&p.textual, &p.visual, &p.bench, &grid).unwrap();
    let best = report.best().unwrap();
    assert_eq!(best.rho(), Some(1.0));
    assert_eq!(best.output_dim, Some(50));
    assert_eq!(best.config.to_line(), "layer_a=pca:50 layer_b=none:T layer_c=none ridge=0.001");
    let identity = report.entries.iter().find(|e| e.config == Configuration::identity(Side::Textual)).unwrap();
    assert_eq!(identity.rho(), Some(1.0));
    assert!(report.n_failed() > 0);
}

#[test]
fn cross_evaluation_reproduces_the_search_score() {
    let p = common::planted();
    let report = grid_search(&p.textual, &p.visual, &p.bench, &common::toy_grid()).unwrap();
    let e = &report.entries[5];
    let rows = cross_evaluate(&e.config, &p.textual, &p.visual, std::slice::from_ref(&p.bench)).unwrap();
    assert_eq!(rows[0].1.rho, e.rho());
}

#[test]
fn benchmarks_keep_their_own_coverage() {
    let p = common::planted();
    let words = common::words(30);
    let pair = |a: &str, b: &str, g| WordPair { first: a.into(), second: b.into(), gold: g };
    let other = Benchmark::new(
        "other",
        vec![pair(&words[0], &words[5], 1.0), pair(&words[2], &words[9], 2.0), pair("nope", &words[1], 3.0)],
    )
    .unwrap();
    let reports = search_benchmarks(
        &p.textual,
        &p.visual,
        &[p.bench.clone(), other],
        &common::toy_grid(),
        &SearchOptions::default(),
    )
    .unwrap();
    let r0 = reports[0].entries[0].result.as_ref().unwrap();
    let r1 = reports[1].entries[0].result.as_ref().unwrap();
    assert_eq!((r0.n_evaluated, r0.n_total), (p.bench.len(), p.bench.len()));
    assert_eq!((r1.n_evaluated, r1.n_total), (2, 3));
    let alone = grid_search(&p.textual, &p.visual, &p.bench, &common::toy_grid()).unwrap();
    assert_eq!(alone, reports[0]);
}

#[test]
fn reports_round_trip_through_tsv() {
    let p = common::planted();
    let report = grid_search(&p.textual, &p.visual, &p.bench, &common::toy_grid()).unwrap();
    let back = SearchReport::from_tsv(&report.to_tsv()).unwrap();
    assert_eq!(back.to_tsv(), report.to_tsv());
    assert_eq!(back.entries.len(), report.entries.len());
}

#[test]
fn nothing_scored_means_no_best() {
    let report = SearchReport::new("x", GridSpec::default(), vec![entry(Configuration::identity(Side::Visual), None, 3)]);
    assert!(matches!(select_best(&report), Err(Error::NoResult)));
}
