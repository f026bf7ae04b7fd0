use alphagauge::sweep::{
    parse_csv, parse_json, preset, preset_names, render, run_sweep, status, to_csv_string, Format, ModelSel, ObservableSpec, SweepVar,
};
use alphagauge::{CircuitParams, Error, SweepSpec};

fn tiny(swept: SweepVar, grid: Vec<f64>, models: Vec<ModelSel>, observables: Vec<ObservableSpec>) -> SweepSpec {
    SweepSpec {
        name: "tiny".into(),
        description: String::new(),
        swept,
        grid,
        params: CircuitParams::reference(5.0, 0.5).with_cutoffs(80, 6, 16),
        alpha: 1.0,
        models,
        observables,
        convergence_tol: None,
    }
}

#[test]
fn every_preset_loads_and_validates() {
    let names = preset_names();
    assert!(names.len() >= 20);
    for name in names {
        let spec = preset(name).unwrap();
        assert_eq!(spec.name, name);
        spec.validate().unwrap();
    }
    assert!(matches!(preset("no-such-preset"), Err(Error::Config(_))));
}

#[test]
fn rows_follow_grid_then_model_then_observable_order() {
    let spec = tiny(
        SweepVar::Eta,
        vec![0.1, 0.2, 0.3],
        vec![ModelSel::Exact, "qrm-flux".parse().unwrap()],
        vec![ObservableSpec::Energies { levels: 2 }],
    );
    let result = run_sweep(&spec).unwrap();
    let keys: Vec<(f64, &str, &str)> = result.rows.iter().map(|r| (r.sweep_value, r.model.as_str(), r.observable.as_str())).collect();
    let mut expected = Vec::new();
    for v in [0.1, 0.2, 0.3] {
        for model in ["exact", "qrm-flux"] {
            for obs in ["E0", "E1"] {
                expected.push((v, model, obs));
            }
        }
    }
    assert_eq!(keys, expected);
    assert!(result.rows.iter().filter(|r| r.model == "exact").all(|r| r.status == status::UNCHECKED));
    assert!(result.rows.iter().filter(|r| r.model == "qrm-flux").all(|r| r.status == status::OK));
}

#[test]
fn failing_points_become_error_rows() {
    let spec = tiny(SweepVar::Delta, vec![1.0, 2.0], vec!["qrm-flux".parse().unwrap()], vec![ObservableSpec::Dispersive { n_max: 0 }]);
    let result = run_sweep(&spec).unwrap();
    let resonant: Vec<_> = result.rows.iter().filter(|r| r.sweep_value == 1.0).collect();
    assert!(resonant.iter().all(|r| r.status.starts_with(status::ERROR_PREFIX) && r.value.is_none()));
    let detuned: Vec<_> = result.rows.iter().filter(|r| r.sweep_value == 2.0).collect();
    assert!(!detuned.is_empty());
    assert!(detuned.iter().all(|r| r.value.is_some()));
}

#[test]
fn convergence_tolerance_labels_exact_rows() {
    let mut spec = tiny(SweepVar::Eta, vec![0.1], vec![ModelSel::Exact], vec![ObservableSpec::Energies { levels: 1 }]);
    spec.convergence_tol = Some(1e-3);
    let result = run_sweep(&spec).unwrap();
    assert!(result.rows.iter().all(|r| r.status == status::CONVERGED || r.status == status::UNCONVERGED));
}

#[test]
fn outputs_round_trip_and_record_metadata() {
    let spec = tiny(SweepVar::Alpha, vec![0.0, 1.0], vec![ModelSel::Exact, ModelSel::Swept], vec![ObservableSpec::Energies { levels: 3 }]);
    let result = run_sweep(&spec).unwrap();
    assert_eq!(result.metadata.config, spec);
    assert_eq!((result.metadata.cutoffs.nm, result.metadata.cutoffs.nkeep, result.metadata.cutoffs.nc), (80, 6, 16));
    let derived = &result.metadata.derived;
    assert!(derived.omega.unwrap() > 0.0 && derived.alpha_jc.unwrap() > 0.0);
    let json = render(&result, Format::Json).unwrap();
    assert_eq!(parse_json(&json).unwrap(), result);
    let csv = render(&result, Format::Csv).unwrap();
    assert_eq!(csv, to_csv_string(&result.rows).unwrap());
    assert_eq!(parse_csv(&csv).unwrap(), result.rows);
    assert_eq!(run_sweep(&spec).unwrap(), result);
}

#[test]
fn invalid_specs_are_configuration_errors() {
    let mut spec = tiny(SweepVar::Eta, vec![0.1], vec![ModelSel::Exact], vec![ObservableSpec::Energies { levels: 1 }]);
    spec.params.nm = 4;
    assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
    spec.params.nm = 80;
    spec.grid = vec![f64::NAN];
    assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
    assert!(matches!(parse_json("{\"rows\": 3}"), Err(Error::Config(_))));
}
