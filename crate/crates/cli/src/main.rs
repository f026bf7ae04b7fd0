use alphagauge::error::Error;
use alphagauge::gauge::{absorbed_fluxonium, build_exact, verify_gauge_invariance, GaugeContext, SquareConvention};
use alphagauge::two_level::solve_alpha_jc_with;
use alphagauge::matter::CircuitParams;
use alphagauge::observables::PhotonKind;
use alphagauge::perturbation::{trk_invariance_check, TrkParams};
use alphagauge::sweep::{
    converge, preset, render, run_sweep, ConvergenceTarget, Format, GaugeSel, ModelSel, ObservableSpec, SweepResult, SweepSpec,
    SweepVar, PRESETS,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "alphagauge", version, about = "Exact and two-level light-matter spectra in any gauge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON configuration document (see docs/config.md).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset used as the base configuration.
    #[arg(long)]
    preset: Option<String>,
    /// Gauge parameter of the exact computation.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "flux-ext", allow_hyphen_values = true)]
    flux_ext: Option<f64>,
    #[arg(long)]
    ej: Option<f64>,
    #[arg(long)]
    ec: Option<f64>,
    #[arg(long)]
    el: Option<f64>,
    #[arg(long)]
    nm: Option<usize>,
    #[arg(long)]
    nkeep: Option<usize>,
    #[arg(long)]
    nc: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact energies (and optionally two-level model energies) at one parameter point.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        /// Comma-separated model list, e.g. exact,qrm-flux,jc-gauge.
        #[arg(long, default_value = "exact")]
        models: String,
        /// Run the cutoff convergence controller on the highest level first.
        #[arg(long)]
        converge_tol: Option<f64>,
    },
    /// Runs a preset or configuration sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Ground, excited and cross fidelities of two-level models.
    Fidelity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "qrm-flux,qrm-charge,jc-gauge,rwa(0.0)")]
        models: String,
    },
    /// Photon-number averages of a measured gauge.
    Photon {
        #[command(flatten)]
        common: Common,
        /// Measured gauge: flux, charge, jc or alpha(x).
        #[arg(long, default_value = "flux")]
        gauge: String,
        /// type1 (square of projected operator) or type2 (projected square).
        #[arg(long = "type", default_value = "type1")]
        photon_type: String,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value = "exact,qrm-flux,qrm-charge,jc-gauge")]
        models: String,
    },
    /// Schrieffer-Wolff shifts and the exact ground shift.
    Dispersive {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        n_max: usize,
        #[arg(long, default_value = "exact,qrm-flux,qrm-charge,jc-gauge")]
        models: String,
    },
    /// Normalized matrix-element tables.
    MatrixElements {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Runs the gauge-invariance and oracle suites.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Lists the shipped presets.
    ListPresets,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidDimension(_)
        | Error::Validation(_)
        | Error::Unsupported(_) => 2,
        Error::Io { .. } => 4,
        _ => 3,
    }
}

fn base_spec(common: &Common) -> Result<SweepSpec, Error> {
    if common.config.is_some() && common.preset.is_some() {
        return Err(Error::Config("--config and --preset are mutually exclusive".into()));
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        return serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())));
    }
    if let Some(name) = &common.preset {
        return preset(name);
    }
    Ok(SweepSpec {
        name: String::new(),
        description: String::new(),
        swept: SweepVar::Alpha,
        grid: vec![1.0],
        params: CircuitParams::default(),
        alpha: 1.0,
        models: vec![ModelSel::Exact],
        observables: vec![ObservableSpec::Energies { levels: 10 }],
        convergence_tol: None,
    })
}

fn apply_overrides(spec: &mut SweepSpec, c: &Common) {
    let p = &mut spec.params;
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut p.delta, c.delta);
    set(&mut p.eta, c.eta);
    set(&mut p.flux_ext, c.flux_ext);
    set(&mut p.ej, c.ej);
    set(&mut p.ec, c.ec);
    set(&mut p.el, c.el);
    set(&mut spec.alpha, c.alpha);
    if let Some(v) = c.nm {
        p.nm = v;
    }
    if let Some(v) = c.nkeep {
        p.nkeep = v;
    }
    if let Some(v) = c.nc {
        p.nc = v;
    }
}

/// A one-point spec at the resolved parameters.
fn point_spec(common: &Common, models: &str, observables: Vec<ObservableSpec>) -> Result<SweepSpec, Error> {
    let mut spec = base_spec(common)?;
    apply_overrides(&mut spec, common);
    spec.swept = SweepVar::Alpha;
    spec.grid = vec![spec.alpha];
    spec.models = parse_models(models)?;
    spec.observables = observables;
    Ok(spec)
}

fn parse_models(list: &str) -> Result<Vec<ModelSel>, Error> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

fn output(result: &SweepResult, common: &Common) -> Result<(), Error> {
    let format: Format = common.format.parse()?;
    let text = render(result, format)?;
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_and_emit(spec: &SweepSpec, common: &Common) -> Result<(), Error> {
    let result = run_sweep(spec)?;
    output(&result, common)
}

fn validate(common: &Common, tolerance: f64) -> Result<bool, Error> {
    let mut spec = base_spec(common)?;
    apply_overrides(&mut spec, common);
    let p = &spec.params;
    let mut all = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        all &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };

    let inv = verify_gauge_invariance(p, &[0.0, 0.25, 0.5, 0.75, 1.0], tolerance)?;
    report("gauge-invariance", inv.pass, format!("max relative spread {:e} (tolerance {tolerance:e})", inv.max_spread));

    let harmonic = CircuitParams { ej: 0.0, ..p.clone() };
    let sol = solve_alpha_jc_with(1.0 / (1.0 + harmonic.delta), |a| {
        let (dressed, ctx) = absorbed_fluxonium(&harmonic, a)?;
        Ok((dressed.omega_m, ctx.omega_alpha_at(a)))
    })?;
    let (dressed, ctx) = absorbed_fluxonium(&harmonic, sol.alpha_jc)?;
    let exact = build_exact(&dressed, &ctx, harmonic.nc, SquareConvention::Absorbed)?.eigenvalues()?;
    let modes = normal_mode_ground(&harmonic, &ctx);
    let rel = (exact[0] - modes).abs() / modes.abs();
    report("harmonic-normal-modes", rel < 1e-8, format!("ground energy relative error {rel:e}"));

    let alphas: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let trk = trk_invariance_check(
        &TrkParams { omega_m: ctx.omega_m, d: ctx.varphi, delta: p.delta, eta: p.eta.min(0.1), epsilon0: 0.0 },
        &alphas,
    )?;
    report("trk-substitution", trk.pass, format!("substituted spread {:e}", trk.substituted_spread));
    Ok(all)
}

/// Ground energy of the E_J = 0 circuit from its two normal modes.
fn normal_mode_ground(p: &CircuitParams, ctx: &GaugeContext) -> f64 {
    let wm = (8.0 * p.ec * p.el).sqrt();
    let w = ctx.omega;
    let c = ctx.lam * w;
    let m = 1.0 / (8.0 * p.ec);
    let a = (m * wm * wm + w * ctx.lam * ctx.lam) / m;
    let b = c * w.sqrt() / m.sqrt();
    let d = w * w;
    let tr = a + d;
    let disc = ((a - d).powi(2) + 4.0 * b * b).sqrt();
    0.5 * (((tr + disc) / 2.0).sqrt() + ((tr - disc) / 2.0).sqrt())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Spectrum { common, levels, models, converge_tol } => {
            let mut spec = point_spec(&common, &models, vec![ObservableSpec::Energies { levels }])?;
            if let Some(tol) = converge_tol {
                let found = converge(&spec.params, ConvergenceTarget { alpha: spec.alpha, level: levels - 1 }, tol)?;
                spec.params = found.params;
            }
            run_and_emit(&spec, &common)?;
        }
        Command::Sweep { common } => {
            if common.config.is_none() && common.preset.is_none() {
                return Err(Error::Config("sweep needs --preset or --config".into()));
            }
            let mut spec = base_spec(&common)?;
            apply_overrides(&mut spec, &common);
            run_and_emit(&spec, &common)?;
        }
        Command::Fidelity { common, models } => {
            let spec = point_spec(&common, &models, vec![ObservableSpec::Fidelities])?;
            run_and_emit(&spec, &common)?;
        }
        Command::Photon { common, gauge, photon_type, levels, models } => {
            let gauge: GaugeSel = gauge.parse()?;
            let photon_type = match photon_type.as_str() {
                "type1" => PhotonKind::OperatorOfProjected,
                "type2" => PhotonKind::ProjectedOperator,
                other => return Err(Error::Config(format!("unknown photon-number type '{other}'"))),
            };
            let spec = point_spec(&common, &models, vec![ObservableSpec::PhotonNumber { gauge, photon_type, levels }])?;
            run_and_emit(&spec, &common)?;
        }
        Command::Dispersive { common, n_max, models } => {
            let spec = point_spec(&common, &models, vec![ObservableSpec::Dispersive { n_max }])?;
            run_and_emit(&spec, &common)?;
        }
        Command::MatrixElements { common, count } => {
            let spec = point_spec(&common, "", vec![ObservableSpec::MatrixElements { count }])?;
            run_and_emit(&spec, &common)?;
        }
        Command::Validate { common, tolerance } => {
            if !validate(&common, tolerance)? {
                return Ok(ExitCode::from(3));
            }
        }
        Command::ListPresets => {
            for (name, text) in PRESETS {
                let description = serde_json::from_str::<SweepSpec>(text).map(|s| s.description).unwrap_or_default();
                println!("{name}\t{description}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alphagauge::two_level::ModelTag;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Io { path: "p".into(), message: "m".into() }), 4);
        assert_eq!(exit_code(&Error::ConvergenceCap { dimension: 1, cap: 0, trajectory: vec![] }), 3);
    }

    #[test]
    fn model_lists_parse() {
        let m = parse_models("exact, qrm-flux,jc-gauge").unwrap();
        assert_eq!(m, vec![ModelSel::Exact, ModelSel::Tag(ModelTag::QrmFlux), ModelSel::Tag(ModelTag::JcGauge)]);
    }
}
