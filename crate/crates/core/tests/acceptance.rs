//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line (run with `--nocapture` to see them). Criterion 9 (CLI
//! determinism) lives in the CLI crate's own `acceptance` test target.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcransac::engine::{build_problem_graph, required_iterations, run};
use gcransac::geometry::{total_energy, Labeling, ModelKind, ModelParams, Settings};
use gcransac::harness::{
    aggregate, gen_affine_scene, gen_fundamental_scene, gen_homography_scene, gen_line_scene,
    model_error, run_experiment, AggregateRow, ExperimentConfig, LineStyle, MethodTag,
    TrialOutcome, SUCCESS_MAX_ANGULAR_ERROR_DEG,
};
use gcransac::maxflow::EnergyGraph;
use gcransac::neighborhood::build_neighborhood;
use gcransac::DataPoint;

fn random_submodular_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> EnergyGraph {
    let n = rng.random_range(0..=max_nodes);
    let mut graph = EnergyGraph::new(n);
    for p in 0..n {
        graph.add_term1(p, rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
    }
    if n >= 2 {
        for _ in 0..rng.random_range(0..=20) {
            let p = rng.random_range(0..n);
            let mut q = rng.random_range(0..n);
            if p == q {
                q = (q + 1) % n;
            }
            let c01: f64 = rng.random_range(-0.5..1.5);
            let c10: f64 = rng.random_range(-0.5..1.5);
            let budget = c01 + c10;
            let c00 = rng.random_range(-1.0..=budget.max(-1.0));
            let c11 = rng.random_range((budget - 1.0).min(budget - c00)..=(budget - c00));
            graph.add_term2(p, q, c00, c01, c10, c11).unwrap();
        }
    }
    graph
}

#[test]
fn criterion_1_graph_cut_global_optimality() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for case in 0..1000 {
        let graph = random_submodular_graph(&mut rng, 12);
        let cut = graph.min_cut();
        let oracle = graph.brute_force_min_energy().unwrap();
        assert!(
            (cut.energy - oracle.energy).abs() < 1e-9,
            "case {case}: min-cut {} vs exhaustive {}",
            cut.energy,
            oracle.energy
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("ACCEPTANCE 1 (graph-cut global optimality, 1000 graphs): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_energy_model_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut checked = 0;
    for scene_index in 0..70 {
        // A line through a tight cluster so that the neighborhood graph has
        // edges and the kernels spread over (0, 1).
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let line = ModelParams::line(angle.sin(), -angle.cos(), 0.0).unwrap();
        let n = rng.random_range(4..=12);
        let points: Vec<DataPoint> = (0..n)
            .map(|_| {
                DataPoint::point2(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0))
            })
            .collect();
        let radius = rng.random_range(10.0..40.0);
        let neighborhood = build_neighborhood(&points, radius).unwrap();
        for lambda in [0.0, 0.1, 1.0] {
            let settings = Settings {
                epsilon: rng.random_range(2.0..8.0),
                radius,
                lambda,
                ..Settings::default()
            };
            let graph = build_problem_graph(&points, &line, &neighborhood, &settings).unwrap();
            let cut = graph.min_cut();
            let cut_energy =
                total_energy(&points, &cut.labeling, &line, &neighborhood, &settings).unwrap();
            assert!(
                (cut.energy - cut_energy).abs() < 1e-9,
                "scene {scene_index} λ={lambda}: reported {} vs re-evaluated {}",
                cut.energy,
                cut_energy
            );
            let mut exhaustive = f64::INFINITY;
            for mask in 0..(1u32 << n) {
                let labels: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                let e = total_energy(
                    &points,
                    &Labeling::new(labels),
                    &line,
                    &neighborhood,
                    &settings,
                )
                .unwrap();
                exhaustive = exhaustive.min(e);
            }
            assert!(
                (cut_energy - exhaustive).abs() < 1e-9,
                "scene {scene_index} λ={lambda}: cut labeling energy {} vs exhaustive {}",
                cut_energy,
                exhaustive
            );
            checked += 1;
        }
    }
    assert!(checked >= 200);
    println!("ACCEPTANCE 2 (energy-model fidelity, {checked} triples): PASS");
}

#[test]
fn criterion_3_termination_formula() {
    for kind in [
        ModelKind::Line2D,
        ModelKind::Affine2D,
        ModelKind::Homography,
        ModelKind::Fundamental,
    ] {
        assert_eq!(
            required_iterations(100, 100, kind.min_sample_size(), 0.95, 100_000),
            1,
            "kind {kind}"
        );
    }
    assert_eq!(required_iterations(50, 100, 2, 0.95, 100_000), 11);
    let mut previous = usize::MAX;
    for inliers in 0..=300 {
        let h = required_iterations(inliers, 300, 7, 0.95, 100_000);
        assert!(h <= previous, "not monotone at {inliers}");
        previous = h;
    }
    println!("ACCEPTANCE 3 (termination formula): PASS");
}

#[test]
fn criterion_4_noiseless_recovery() {
    let trials = 100u64;
    let mut summary = Vec::new();
    for kind in [
        ModelKind::Line2D,
        ModelKind::Affine2D,
        ModelKind::Homography,
        ModelKind::Fundamental,
    ] {
        let mut hits = 0;
        for seed in 0..trials {
            let (points, mask, settings) = match kind {
                ModelKind::Line2D => {
                    let scene = gen_line_scene(LineStyle::Straight, 0.0, 0, seed);
                    let settings = Settings {
                        seed: seed ^ 0xACCE,
                        ..Settings::default()
                    };
                    (scene.points, scene.inlier_mask, settings)
                }
                _ => {
                    // Exact correspondences plus 50% uniform outliers; the
                    // threshold is tightened to match the zero noise level.
                    let scene = match kind {
                        ModelKind::Affine2D => gen_affine_scene(100, 50, 0.0, seed),
                        ModelKind::Homography => gen_homography_scene(100, 50, 0.0, seed),
                        ModelKind::Fundamental => gen_fundamental_scene(100, 50, 0.0, seed),
                        ModelKind::Line2D => unreachable!(),
                    };
                    let settings = Settings {
                        epsilon: 0.01,
                        seed: seed ^ 0xACCE,
                        ..Settings::default()
                    };
                    (scene.points, scene.inlier_mask, settings)
                }
            };
            let Ok(report) = run(&points, kind, &settings) else {
                continue;
            };
            let err = model_error(&report.best.model, &points, &mask).unwrap();
            if err < 1e-6 {
                hits += 1;
            }
        }
        assert!(
            hits >= 99,
            "kind {kind}: only {hits}/{trials} runs recovered the generator"
        );
        summary.push(format!("{kind} {hits}/{trials}"));
    }
    println!(
        "ACCEPTANCE 4 (noiseless recovery: {}): PASS",
        summary.join(", ")
    );
}

fn cell(rows: &[AggregateRow], method: MethodTag, sigma: f64, outliers: usize) -> &AggregateRow {
    rows.iter()
        .find(|r| r.method == method && r.sigma == sigma && r.outliers == outliers)
        .expect("cell present")
}

fn assert_lo_economy(rows: &[AggregateRow], context: &str) {
    for row in rows {
        if row.method == MethodTag::Baseline {
            continue;
        }
        assert!(
            row.lo_runs <= 5.0,
            "{context}: mean lo_runs {} in cell σ={} outliers={}",
            row.lo_runs,
            row.sigma,
            row.outliers
        );
        assert!(
            row.gc_runs <= 10.0,
            "{context}: mean gc_runs {} in cell σ={} outliers={}",
            row.gc_runs,
            row.sigma,
            row.outliers
        );
    }
}

#[test]
fn criterion_5_spatial_coherence_beats_plain_baseline() {
    let started = Instant::now();
    let config = ExperimentConfig {
        methods: vec![MethodTag::Gc, MethodTag::Baseline],
        styles: vec![LineStyle::Straight],
        sigmas: vec![1.0, 2.0, 4.0],
        outlier_counts: vec![100],
        trials: 200,
        base_seed: 0,
        ..ExperimentConfig::default()
    };
    let outcomes = run_experiment(&config).unwrap();
    let rows = aggregate(&outcomes);
    let mut strictly_lower = 0;
    for &sigma in &config.sigmas {
        let gc = cell(&rows, MethodTag::Gc, sigma, 100).error;
        let baseline = cell(&rows, MethodTag::Baseline, sigma, 100).error;
        assert!(
            gc <= baseline,
            "σ={sigma}: gc mean error {gc} above baseline {baseline}"
        );
        if gc < baseline {
            strictly_lower += 1;
        }
    }
    assert!(
        strictly_lower >= 2,
        "gc strictly better in only {strictly_lower}/3 cells"
    );
    assert_lo_economy(&rows, "criterion 5");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 5 (mean angular error, gc ≤ baseline in 3/3 cells, strictly lower in {strictly_lower}): PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_6_not_all_inlier_convergence() {
    let config = ExperimentConfig {
        methods: vec![MethodTag::Gc, MethodTag::Baseline],
        styles: vec![LineStyle::Dashed],
        sigmas: vec![0.0, 2.0, 4.0, 6.0, 8.0],
        outlier_counts: vec![100, 500],
        trials: 100,
        base_seed: 0,
        ..ExperimentConfig::default()
    };
    let outcomes = run_experiment(&config).unwrap();
    let fraction = |method: MethodTag| -> (usize, usize) {
        let mut successes = 0;
        let mut contaminated = 0;
        for outcome in &outcomes {
            if let TrialOutcome::Completed(r) = outcome {
                if r.method == method && r.error < SUCCESS_MAX_ANGULAR_ERROR_DEG {
                    successes += 1;
                    if r.not_all_inlier_success == Some(true) {
                        contaminated += 1;
                    }
                }
            }
        }
        (contaminated, successes)
    };
    let (gc_nai, gc_total) = fraction(MethodTag::Gc);
    let (base_nai, base_total) = fraction(MethodTag::Baseline);
    assert!(gc_total > 0 && base_total > 0);
    let gc_fraction = gc_nai as f64 / gc_total as f64;
    let base_fraction = base_nai as f64 / base_total as f64;
    assert!(
        gc_fraction > base_fraction,
        "gc {gc_nai}/{gc_total} = {gc_fraction:.3} not above baseline {base_nai}/{base_total} = {base_fraction:.3}"
    );
    assert_lo_economy(&aggregate(&outcomes), "criterion 6");
    println!(
        "ACCEPTANCE 6 (not-all-inlier successes: gc {gc_fraction:.3} > baseline {base_fraction:.3}): PASS"
    );
}

#[test]
fn criterion_7_lambda_ablation() {
    let config = ExperimentConfig {
        methods: vec![MethodTag::Gc, MethodTag::GcNoSpatial],
        styles: vec![LineStyle::Straight],
        sigmas: vec![2.0],
        outlier_counts: vec![500],
        trials: 200,
        base_seed: 0,
        ..ExperimentConfig::default()
    };
    let outcomes = run_experiment(&config).unwrap();
    let rows = aggregate(&outcomes);
    let with_spatial = cell(&rows, MethodTag::Gc, 2.0, 500).error;
    let without = cell(&rows, MethodTag::GcNoSpatial, 2.0, 500).error;
    assert!(
        with_spatial <= without,
        "λ=0.1 mean error {with_spatial} above λ=0 error {without}"
    );
    assert_lo_economy(&rows, "criterion 7");
    println!("ACCEPTANCE 7 (λ ablation: {with_spatial:.5} ≤ {without:.5}): PASS");
}

#[test]
fn criterion_8_lo_economy() {
    let config = ExperimentConfig {
        methods: vec![MethodTag::Gc, MethodTag::GcNoSpatial],
        styles: vec![LineStyle::Straight, LineStyle::Dashed],
        sigmas: vec![0.0, 2.0, 4.0, 6.0, 8.0],
        outlier_counts: vec![100, 500],
        trials: 50,
        base_seed: 1,
        ..ExperimentConfig::default()
    };
    let outcomes = run_experiment(&config).unwrap();
    let rows = aggregate(&outcomes);
    assert_lo_economy(&rows, "criterion 8");
    let max_lo = rows.iter().map(|r| r.lo_runs).fold(0.0, f64::max);
    let max_gc = rows.iter().map(|r| r.gc_runs).fold(0.0, f64::max);
    println!(
        "ACCEPTANCE 8 (LO economy: max mean lo_runs {max_lo:.2} ≤ 5, max mean gc_runs {max_gc:.2} ≤ 10): PASS"
    );
}
