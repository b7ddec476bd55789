//! Sweep driver, step search, CSV resume and output files.

use std::fs;
use std::path::Path;

use trotterlens::experiments::{
    emit_outputs, estimate_min_steps, fit_exponent, parse_csv, run_steps, run_sweep, to_csv, ExperimentConfig, Fixed,
    Grid, OutputFormat, Spacing, StepMethod, StepsSpec, SweepSpec, Variable,
};
use trotterlens::interference::{BoundKind, EpsilonPolicy};
use trotterlens::models::{Couplings, ModelKind, ModelParams};
use trotterlens::Error;

fn tfi(n: usize, h: f64) -> ModelParams {
    ModelParams::new(ModelKind::Tfi, n).couplings(Couplings {
        j: 1.0,
        h,
        ..Couplings::default()
    })
}

fn time_sweep(model: ModelParams, bounds: Vec<BoundKind>) -> SweepSpec {
    SweepSpec {
        name: "sweep".into(),
        model,
        pf_order: 1,
        variable: Variable::Time,
        grid: Grid::Range {
            start: 0.5,
            stop: 16.0,
            count: 6,
            spacing: Spacing::Log,
        },
        fixed: Fixed {
            r: Some(64),
            ..Fixed::default()
        },
        bounds,
        epsilon_policy: EpsilonPolicy::AutoMin,
        fit_window: None,
    }
}

fn smoke() -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.json")).unwrap()
}

#[test]
fn commuting_model_has_no_error() {
    let res = run_sweep(&time_sweep(tfi(4, 0.0), vec![BoundKind::Triangle]), None).unwrap();
    for (_, e) in res.column("empirical").unwrap() {
        assert!(e < 1e-10, "{e}");
    }
    assert_eq!(
        estimate_min_steps(&tfi(4, 0.0), 1, 5.0, 1e-3, StepMethod::Empirical).unwrap(),
        1
    );
}

#[test]
fn every_bound_dominates_rowwise() {
    let spec = smoke().sweep_spec().unwrap();
    let res = run_sweep(&spec, None).unwrap();
    assert_eq!(res.columns, ["empirical", "interference_pf1", "general", "triangle"]);
    for row in &res.rows {
        for b in &row.values[1..] {
            assert!(*b >= row.values[0] - 1e-10, "t={}: {:?}", row.x, row.values);
        }
    }
}

#[test]
fn empty_bounds_give_a_single_column() {
    let res = run_sweep(&time_sweep(tfi(3, 0.5), Vec::new()), None).unwrap();
    assert!(to_csv(&res).starts_with("t,empirical\n"));
}

#[test]
fn csv_round_trips_bitwise() {
    let res = run_sweep(&time_sweep(tfi(3, 0.5), vec![BoundKind::Triangle]), None).unwrap();
    let (header, rows) = parse_csv(&to_csv(&res)).unwrap();
    assert_eq!(header, ["t", "empirical", "triangle"]);
    for (parsed, row) in rows.iter().zip(&res.rows) {
        assert_eq!(parsed[0].to_bits(), row.x.to_bits());
        for (a, b) in parsed[1..].iter().zip(&row.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn interrupted_sweep_resumes_to_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let spec = time_sweep(tfi(4, 0.6), vec![BoundKind::InterferencePf1, BoundKind::Triangle]);
    run_sweep(&spec, Some(&path)).unwrap();
    let full = fs::read(&path).unwrap();

    // Keep the header, two rows and half of the third.
    let text = String::from_utf8(full.clone()).unwrap();
    let cut: usize = text.split_inclusive('\n').take(3).map(str::len).sum::<usize>() + 20;
    fs::write(&path, &text[..cut]).unwrap();
    let resumed = run_sweep(&spec, Some(&path)).unwrap();
    assert_eq!(fs::read(&path).unwrap(), full);
    assert_eq!(resumed.rows.iter().filter(|r| r.wall_time == 0.0).count(), 2);

    // A different header starts over.
    fs::write(&path, "t,empirical\n1,2\n").unwrap();
    run_sweep(&spec, Some(&path)).unwrap();
    assert_eq!(fs::read(&path).unwrap(), full);
}

#[test]
fn size_and_step_sweeps() {
    let mut spec = time_sweep(tfi(3, 0.5), vec![BoundKind::Triangle]);
    spec.variable = Variable::Size;
    spec.grid = Grid::List(vec![3.0, 4.0, 5.0]);
    spec.fixed = Fixed {
        r: Some(20),
        t_per_n: Some(0.5),
        ..Fixed::default()
    };
    let res = run_sweep(&spec, None).unwrap();
    assert!(to_csv(&res).contains("\n5,"));

    spec.variable = Variable::Steps;
    spec.grid = Grid::List(vec![10.0, 20.0, 40.0, 80.0]);
    spec.fixed = Fixed {
        t: Some(2.0),
        ..Fixed::default()
    };
    let res = run_sweep(&spec, None).unwrap();
    // The triangle bound falls as 1/r.
    let fit = res.fit("triangle").unwrap();
    assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn sweeps_reject_missing_fixed_values() {
    let mut spec = time_sweep(tfi(3, 0.5), Vec::new());
    spec.fixed = Fixed::default();
    assert!(matches!(run_sweep(&spec, None), Err(Error::InvalidParameter(_))));
}

#[test]
fn min_steps_ordering() {
    let models = [
        tfi(4, 0.8),
        ModelParams::new(ModelKind::HeisenbergNn, 4).couplings(Couplings {
            h: 0.4,
            ..Couplings::default()
        }),
        ModelParams::new(ModelKind::PowerLaw, 4),
    ];
    for p in &models {
        let steps = |m| estimate_min_steps(p, 1, 2.0, 0.01, m).unwrap();
        let (emp, tri) = (steps(StepMethod::Empirical), steps(StepMethod::Triangle));
        assert!(tri >= emp, "{:?}: {tri} < {emp}", p.model);
        assert!(steps(StepMethod::Interference) >= emp);
    }
}

#[test]
fn min_steps_are_minimal() {
    let p = tfi(4, 0.8);
    let r = estimate_min_steps(&p, 1, 3.0, 0.01, StepMethod::Triangle).unwrap();
    let pf = trotterlens::ProductFormula::new(trotterlens::models::build_model(&p).unwrap().hamiltonian, 1).unwrap();
    assert!(pf.triangle_bound_numeric(3.0, r).unwrap() <= 0.01);
    assert!(pf.triangle_bound_numeric(3.0, r - 1).unwrap() > 0.01);
}

#[test]
fn exhausted_search_reports_the_cap() {
    let spec = StepsSpec {
        name: "cap".into(),
        model: tfi(3, 0.9),
        pf_order: 1,
        sizes: vec![3, 4],
        fixed: Fixed {
            t: Some(5.0),
            ..Fixed::default()
        },
        epsilon_target: 1e-6,
        methods: vec![StepMethod::Triangle],
        r_max: 64,
        epsilon_policy: EpsilonPolicy::AutoMin,
        fit_window: None,
    };
    assert!(matches!(
        run_steps(&spec, None),
        Err(Error::SearchExhausted { r_max: 64 })
    ));
}

#[test]
fn steps_table_from_config() {
    let spec = smoke().steps_spec().unwrap();
    assert_eq!(spec.name, "smoke_steps");
    let res = run_steps(&spec, None).unwrap();
    assert_eq!(res.columns, ["empirical", "interference", "triangle"]);
    assert!(to_csv(&res).starts_with("n,empirical,interference,triangle\n3,"));
    for row in &res.rows {
        assert!(row.values[2] >= row.values[0]);
    }
}

#[test]
fn fit_recovers_power_laws() {
    let cube: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, (x * x * x) as f64)).collect();
    let fit = fit_exponent(&cube, 0..5).unwrap();
    assert!((fit.slope - 3.0).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
    let flat: Vec<(f64, f64)> = (1..4).map(|x| (x as f64, 5.0)).collect();
    assert!(fit_exponent(&flat, 0..3).unwrap().slope.abs() < 1e-12);
    assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0)], 0..2).is_err());
}

#[test]
fn outputs_reference_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_sweep(&time_sweep(tfi(3, 0.5), vec![BoundKind::Triangle]), None).unwrap();
    let files = emit_outputs(&res, dir.path(), &[OutputFormat::Csv, OutputFormat::Plotscript]).unwrap();
    assert_eq!(files, [dir.path().join("sweep.csv"), dir.path().join("sweep.gp")]);
    let gp = fs::read_to_string(&files[1]).unwrap();
    assert!(gp.contains("'sweep.csv' using 1:2") && gp.contains("using 1:3"));
    assert!(gp.contains("set logscale xy"));
}

#[test]
fn configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let cfg = ExperimentConfig::load(&entry.unwrap().path()).unwrap();
        assert!(cfg.sweep.is_some() || cfg.steps.is_some());
        seen += 1;
    }
    assert!(seen >= 7);
    assert!(matches!(
        ExperimentConfig::parse(r#"{"name":"x","model":{"model":"tfi","n":3},"typo":1}"#),
        Err(Error::Parse { .. })
    ));
}
