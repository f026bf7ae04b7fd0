//! Parameter sweeps, the cutoff convergence controller, presets and CSV/JSON emission.

use crate::dispersive::{exact_ground_shift, sw_shifts};
use crate::error::{ConvergenceStep, Error, Result};
use crate::gauge::{build_exact, exact_circuit_spectrum, GaugeContext, SquareConvention};
use crate::matter::{build_fluxonium, CircuitParams, MatterSpectrum};
use crate::observables::{expectation, export_matrix_element_heatmaps, model_fidelity, photon_operator_exact, photon_operator_two_level, PhotonKind};
use crate::two_level::{build_model, solve_alpha_jc, tag_alpha, ModelTag};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Largest number of energy levels a sweep may request.
pub const MAX_LEVELS: usize = 12;

/// Composite dimension beyond which the convergence controller gives up.
pub const DIMENSION_CAP: usize = 6000;

/// Largest bare oscillator basis the convergence controller will try.
pub const NM_CAP: usize = 2048;

/// Environment variable holding the sweep worker count.
pub const THREADS_ENV: &str = "ALPHAGAUGE_THREADS";

/// The swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Delta,
    Eta,
    FluxExt,
    Alpha,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::Delta => "delta",
            SweepVar::Eta => "eta",
            SweepVar::FluxExt => "flux_ext",
            SweepVar::Alpha => "alpha",
        })
    }
}

/// A model evaluated at every grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelSel {
    /// The exact composite Hamiltonian.
    Exact,
    /// The general two-level model in the sweep's current gauge.
    Swept,
    Tag(ModelTag),
}

impl fmt::Display for ModelSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSel::Exact => f.write_str("exact"),
            ModelSel::Swept => f.write_str("alpha"),
            ModelSel::Tag(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for ModelSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(ModelSel::Exact),
            "alpha" => Ok(ModelSel::Swept),
            other => Ok(ModelSel::Tag(other.parse()?)),
        }
    }
}

impl TryFrom<String> for ModelSel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelSel> for String {
    fn from(m: ModelSel) -> String {
        m.to_string()
    }
}

/// The gauge whose photon number is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GaugeSel {
    Flux,
    Charge,
    Jc,
    Alpha(f64),
}

impl fmt::Display for GaugeSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSel::Flux => f.write_str("flux"),
            GaugeSel::Charge => f.write_str("charge"),
            GaugeSel::Jc => f.write_str("jc"),
            GaugeSel::Alpha(a) => write!(f, "alpha({a:?})"),
        }
    }
}

impl FromStr for GaugeSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "flux" => Ok(GaugeSel::Flux),
            "charge" => Ok(GaugeSel::Charge),
            "jc" => Ok(GaugeSel::Jc),
            other => other
                .strip_prefix("alpha(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|v| v.parse().ok())
                .map(GaugeSel::Alpha)
                .ok_or_else(|| Error::Config(format!("unknown gauge '{other}'"))),
        }
    }
}

impl TryFrom<String> for GaugeSel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GaugeSel> for String {
    fn from(g: GaugeSel) -> String {
        g.to_string()
    }
}

impl GaugeSel {
    pub fn resolve(&self, ctx: &GaugeContext) -> Result<f64> {
        match self {
            GaugeSel::Flux => Ok(1.0),
            GaugeSel::Charge => Ok(0.0),
            GaugeSel::Jc => tag_alpha(ModelTag::JcGauge, ctx),
            GaugeSel::Alpha(a) => Ok(*a),
        }
    }
}

/// Quantities recorded at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// The lowest `levels` energies.
    Energies { levels: usize },
    /// Ground, excited and cross fidelities of two-level models.
    Fidelities,
    /// ⟨n⟩ of a measured gauge in the lowest `levels` eigenstates.
    PhotonNumber {
        gauge: GaugeSel,
        #[serde(default)]
        photon_type: PhotonKind,
        levels: usize,
    },
    /// Lamb-type and ac-Stark shifts for n ≤ n_max (exact model: the ground shift).
    Dispersive { n_max: usize },
    /// Normalized matrix-element tables of the lowest `count` levels.
    MatrixElements { count: usize },
    /// α_JC and its seed 1/(1+δ).
    AlphaJc,
    /// g̃_0/g and 1/δ.
    CouplingRatio,
}

impl ObservableSpec {
    fn model_independent(&self) -> bool {
        matches!(self, ObservableSpec::MatrixElements { .. } | ObservableSpec::AlphaJc | ObservableSpec::CouplingRatio)
    }

    /// Row names produced for one model.
    pub fn names(&self, model: &ModelSel) -> Vec<String> {
        match self {
            ObservableSpec::Energies { levels } => (0..*levels).map(|k| format!("E{k}")).collect(),
            ObservableSpec::Fidelities => vec!["F_G".into(), "F_E".into(), "cross".into()],
            ObservableSpec::PhotonNumber { gauge, photon_type, levels } => {
                let t = match photon_type {
                    PhotonKind::OperatorOfProjected => "type1",
                    PhotonKind::ProjectedOperator => "type2",
                };
                (0..*levels).map(|k| format!("n[{gauge};{t};{k}]")).collect()
            }
            ObservableSpec::Dispersive { n_max } => match model {
                ModelSel::Exact => vec!["shift_0".into()],
                _ => (0..=*n_max).flat_map(|n| [format!("kappa_{n}"), format!("chi_{n}")]).collect(),
            },
            ObservableSpec::MatrixElements { count } => (0..*count)
                .flat_map(|n| (0..*count).map(move |m| (n, m)))
                .flat_map(|(n, m)| [format!("phi_sq[{n};{m}]"), format!("eps_phi_sq[{n};{m}]")])
                .collect(),
            ObservableSpec::AlphaJc => vec!["alpha_jc".into(), "seed".into()],
            ObservableSpec::CouplingRatio => vec!["g_tilde0_over_g".into(), "one_over_delta".into()],
        }
    }
}

fn default_alpha() -> f64 {
    1.0
}

/// A complete sweep configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub swept: SweepVar,
    pub grid: Vec<f64>,
    pub params: CircuitParams,
    /// Gauge of the exact computation and of the `alpha` model when α is not swept.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub models: Vec<ModelSel>,
    pub observables: Vec<ObservableSpec>,
    /// Exact rows are checked against one further cutoff increment when set.
    #[serde(default)]
    pub convergence_tol: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("grid must not be empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("grid must be strictly monotone".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be finite".into()));
        }
        if self.models.is_empty() && self.observables.iter().any(|o| !o.model_independent()) {
            return Err(Error::Config("model-dependent observables need at least one model".into()));
        }
        for o in &self.observables {
            match o {
                ObservableSpec::Energies { levels } | ObservableSpec::PhotonNumber { levels, .. } => {
                    if *levels == 0 || *levels > MAX_LEVELS {
                        return Err(Error::Config(format!("levels must be in 1..={MAX_LEVELS}, got {levels}")));
                    }
                }
                ObservableSpec::MatrixElements { count } if *count == 0 || *count > self.params.nkeep => {
                    return Err(Error::Config(format!("matrix-element count must be in 1..={}", self.params.nkeep)));
                }
                _ => {}
            }
        }
        if let Some(tol) = self.convergence_tol {
            if !(tol > 0.0) {
                return Err(Error::Config("convergence_tol must be positive".into()));
            }
        }
        self.params.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Circuit parameters and gauge at one grid value.
    pub fn point(&self, value: f64) -> (CircuitParams, f64) {
        let mut p = self.params.clone();
        let mut alpha = self.alpha;
        match self.swept {
            SweepVar::Delta => p.delta = value,
            SweepVar::Eta => p.eta = value,
            SweepVar::FluxExt => p.flux_ext = value,
            SweepVar::Alpha => alpha = value,
        }
        (p, alpha)
    }
}

/// One output cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub model: String,
    pub observable: String,
    pub value: Option<f64>,
    pub status: String,
}

/// Status strings used in the `status` column.
pub mod status {
    pub const OK: &str = "ok";
    pub const CONVERGED: &str = "converged";
    pub const UNCONVERGED: &str = "unconverged";
    pub const UNCHECKED: &str = "unchecked";
    pub const NOT_APPLICABLE: &str = "n/a";
    pub const NEAR_RESONANT: &str = "near_resonant";
    pub const ERROR_PREFIX: &str = "error: ";
}

/// Derived circuit quantities recorded for audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub inductance: Option<f64>,
    pub capacitance: Option<f64>,
    pub omega: Option<f64>,
    pub omega_m: Option<f64>,
    pub alpha_jc: Option<f64>,
}

/// Metadata written alongside the rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: SweepSpec,
    pub cutoffs: Cutoffs,
    pub version: String,
    pub derived: DerivedQuantities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub nm: usize,
    pub nkeep: usize,
    pub nc: usize,
}

/// Rows plus metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub rows: Vec<SweepRow>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn derived(params: &CircuitParams) -> DerivedQuantities {
    let ctx = build_fluxonium(params).and_then(|m| GaugeContext::new(&m, params.delta, params.eta, 0.0));
    match ctx {
        Ok(ctx) => DerivedQuantities {
            inductance: finite(ctx.inductance),
            capacitance: finite(ctx.capacitance),
            omega: finite(ctx.omega),
            omega_m: finite(ctx.omega_m),
            alpha_jc: solve_alpha_jc(&ctx).ok().map(|s| s.alpha_jc),
        },
        Err(_) => DerivedQuantities { inductance: None, capacitance: None, omega: None, omega_m: None, alpha_jc: None },
    }
}

/// Worker count from the environment, defaulting to the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs a sweep; per-point failures are recorded in the status column.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let shared = if spec.swept == SweepVar::FluxExt { None } else { Some(build_fluxonium(&spec.params)) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?;
    let blocks: Vec<Vec<SweepRow>> = pool.install(|| {
        spec.grid
            .par_iter()
            .map(|&value| {
                let owned;
                let matter = match &shared {
                    Some(m) => m.as_ref(),
                    None => {
                        let (p, _) = spec.point(value);
                        owned = build_fluxonium(&p);
                        owned.as_ref()
                    }
                };
                evaluate_point(spec, value, matter.map_err(|e| e.clone()))
            })
            .collect()
    });
    let p = &spec.params;
    Ok(SweepResult {
        metadata: Metadata {
            config: spec.clone(),
            cutoffs: Cutoffs { nm: p.nm, nkeep: p.nkeep, nc: p.nc },
            version: env!("CARGO_PKG_VERSION").to_string(),
            derived: derived(p),
        },
        rows: blocks.into_iter().flatten().collect(),
    })
}

type Cells = Vec<(Option<f64>, String)>;

fn ok_cells(values: impl IntoIterator<Item = f64>) -> Cells {
    values.into_iter().map(|v| (finite(v), if v.is_finite() { status::OK.to_string() } else { "error: non-finite value".into() })).collect()
}

fn evaluate_point(spec: &SweepSpec, value: f64, matter: Result<&MatterSpectrum>) -> Vec<SweepRow> {
    let (params, alpha) = spec.point(value);
    let var = spec.swept.to_string();
    let mut rows = Vec::new();
    let mut push = |model: &str, names: Vec<String>, cells: Result<Cells>| match cells {
        Ok(cells) => {
            for (name, (v, st)) in names.into_iter().zip(cells) {
                rows.push(SweepRow { sweep_var: var.clone(), sweep_value: value, model: model.into(), observable: name, value: v, status: st });
            }
        }
        Err(e) => {
            for name in names {
                rows.push(SweepRow {
                    sweep_var: var.clone(),
                    sweep_value: value,
                    model: model.into(),
                    observable: name,
                    value: None,
                    status: format!("{}{e}", status::ERROR_PREFIX),
                });
            }
        }
    };
    let setup = params
        .validate()
        .and(matter)
        .and_then(|m| Ok((m, GaugeContext::new(m, params.delta, params.eta, alpha)?)));
    for obs in spec.observables.iter().filter(|o| o.model_independent()) {
        let names = obs.names(&ModelSel::Exact);
        let cells = setup.clone().and_then(|(m, ctx)| independent_cells(obs, m, &ctx, &params));
        push("circuit", names, cells);
    }
    for model in &spec.models {
        let mut point = PointCache::default();
        for obs in spec.observables.iter().filter(|o| !o.model_independent()) {
            let names = obs.names(model);
            let cells = setup.clone().and_then(|(m, ctx)| model_cells(spec, obs, model, m, &ctx, &params, &mut point));
            push(&model.to_string(), names, cells);
        }
    }
    rows
}

fn independent_cells(obs: &ObservableSpec, matter: &MatterSpectrum, ctx: &GaugeContext, params: &CircuitParams) -> Result<Cells> {
    match obs {
        ObservableSpec::MatrixElements { count } => {
            let table = export_matrix_element_heatmaps(matter, Some(*count));
            Ok(ok_cells(table.iter().flat_map(|r| [r.phi_sq, r.eps_phi_sq])))
        }
        ObservableSpec::AlphaJc => {
            let sol = solve_alpha_jc(ctx)?;
            Ok(ok_cells([sol.alpha_jc, 1.0 / (1.0 + params.delta)]))
        }
        ObservableSpec::CouplingRatio => {
            let ratio = if ctx.g == 0.0 { 1.0 / (ctx.delta * ctx.mu0_squared().sqrt()) } else { ctx.g_tilde0() / ctx.g };
            Ok(ok_cells([ratio, 1.0 / params.delta]))
        }
        _ => unreachable!("model-dependent observable"),
    }
}

#[derive(Default)]
struct PointCache {
    exact_status: Option<String>,
}

fn resolve_tag(model: &ModelSel, alpha: f64) -> ModelTag {
    match model {
        ModelSel::Swept => ModelTag::GeneralAlpha(alpha),
        ModelSel::Tag(t) => *t,
        ModelSel::Exact => unreachable!("exact model has no tag"),
    }
}

fn model_cells(
    spec: &SweepSpec,
    obs: &ObservableSpec,
    model: &ModelSel,
    matter: &MatterSpectrum,
    ctx: &GaugeContext,
    params: &CircuitParams,
    cache: &mut PointCache,
) -> Result<Cells> {
    let alpha = ctx.alpha;
    if *model == ModelSel::Exact {
        return exact_cells(spec, obs, matter, ctx, params, cache);
    }
    let tag = resolve_tag(model, alpha);
    let two = build_model(tag, matter, ctx, params.nc)?;
    match obs {
        ObservableSpec::Energies { levels } => {
            let values = two.hamiltonian.eigenvalues()?;
            Ok(ok_cells(values.into_iter().take(*levels)))
        }
        ObservableSpec::Fidelities => {
            let r = model_fidelity(params, matter, &two)?;
            Ok(ok_cells([r.f_g, r.f_e, r.cross]))
        }
        ObservableSpec::PhotonNumber { gauge, photon_type, levels } => {
            let meas = gauge.resolve(ctx)?;
            let n = photon_operator_two_level(&two, meas, *photon_type)?;
            let eig = two.eig()?;
            let mut out = Vec::with_capacity(*levels);
            for k in 0..*levels {
                let v = eig.real_vector(k).ok_or_else(|| Error::Eigen("complex eigenvector".into()))?;
                out.push(expectation(&n, &v));
            }
            Ok(ok_cells(out))
        }
        ObservableSpec::Dispersive { n_max } => {
            let shifts = sw_shifts(matter, &two.ctx, *n_max)?;
            Ok((0..=*n_max)
                .flat_map(|n| {
                    let st = if shifts.near_resonant[n] { status::NEAR_RESONANT } else { status::OK };
                    [(finite(shifts.kappa[n]), st.to_string()), (finite(shifts.chi[n]), st.to_string())]
                })
                .collect())
        }
        _ => unreachable!("model-independent observable"),
    }
}

fn exact_cells(
    spec: &SweepSpec,
    obs: &ObservableSpec,
    matter: &MatterSpectrum,
    ctx: &GaugeContext,
    params: &CircuitParams,
    cache: &mut PointCache,
) -> Result<Cells> {
    let alpha = ctx.alpha;
    let flag = |cache: &mut PointCache| -> Result<String> {
        if cache.exact_status.is_none() {
            let st = match spec.convergence_tol {
                None => status::UNCHECKED.to_string(),
                Some(tol) => {
                    let target = ConvergenceTarget { alpha, level: exact_target_level(spec) };
                    if stable_under_increment(params, matter, target, tol)? {
                        status::CONVERGED.to_string()
                    } else {
                        status::UNCONVERGED.to_string()
                    }
                }
            };
            cache.exact_status = Some(st);
        }
        Ok(cache.exact_status.clone().unwrap_or_default())
    };
    match obs {
        ObservableSpec::Energies { levels } => {
            let spec_values = exact_circuit_spectrum(params, matter, alpha, false)?;
            let st = flag(cache)?;
            Ok(spec_values.values.into_iter().take(*levels).map(|v| (finite(v), st.clone())).collect())
        }
        ObservableSpec::Fidelities => Ok(vec![(None, status::NOT_APPLICABLE.to_string()); 3]),
        ObservableSpec::PhotonNumber { gauge, photon_type, levels } => {
            let meas = gauge.resolve(ctx)?;
            let h = build_exact(matter, ctx, params.nc, SquareConvention::FullSquare)?;
            let eig = h.eig()?;
            let n = photon_operator_exact(matter, ctx, params.nc, alpha, meas, *photon_type)?;
            let st = flag(cache)?;
            let mut out = Vec::with_capacity(*levels);
            for k in 0..*levels {
                let v = eig.real_vector(k).ok_or_else(|| Error::Eigen("complex eigenvector".into()))?;
                out.push((finite(expectation(&n, &v)), st.clone()));
            }
            Ok(out)
        }
        ObservableSpec::Dispersive { .. } => {
            let shift = exact_ground_shift(matter, ctx, params.nc)?;
            Ok(vec![(finite(shift), flag(cache)?)])
        }
        _ => unreachable!("model-independent observable"),
    }
}

fn exact_target_level(spec: &SweepSpec) -> usize {
    spec.observables
        .iter()
        .filter_map(|o| match o {
            ObservableSpec::Energies { levels } | ObservableSpec::PhotonNumber { levels, .. } => Some(levels - 1),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

/// The quantity tracked by the convergence controller: exact level `level` in gauge `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTarget {
    pub alpha: f64,
    pub level: usize,
}

fn evaluate_target(params: &CircuitParams, matter: Option<&MatterSpectrum>, target: ConvergenceTarget) -> Result<f64> {
    let owned;
    let m = match matter {
        Some(m) => m,
        None => {
            owned = build_fluxonium(params)?;
            &owned
        }
    };
    let spec = exact_circuit_spectrum(params, m, target.alpha, false)?;
    spec.values
        .get(target.level)
        .copied()
        .ok_or_else(|| Error::InvalidDimension(format!("level {} beyond dimension {}", target.level, spec.values.len())))
}

fn grow(n: usize) -> usize {
    (n * 3).div_ceil(2)
}

/// Cutoffs one controller increment above `p`: N_keep and N_c grown by 50%.
pub fn increment(p: &CircuitParams) -> CircuitParams {
    let nkeep = grow(p.nkeep);
    CircuitParams { nkeep, nc: grow(p.nc), nm: p.nm.max(4 * nkeep), ..p.clone() }
}

fn stable_under_increment(params: &CircuitParams, matter: &MatterSpectrum, target: ConvergenceTarget, tol: f64) -> Result<bool> {
    let base = evaluate_target(params, Some(matter), target)?;
    let next = increment(params);
    let bumped = evaluate_target(&next, None, target)?;
    Ok((bumped - base).abs() < tol)
}

/// Converged cutoffs with the value and the controller trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Converged {
    pub params: CircuitParams,
    pub value: f64,
    pub trajectory: Vec<ConvergenceStep>,
}

/// Doubles N_m until the target is stable, then grows N_keep and N_c by 50% until
/// the change drops below `tol`. Returns the cutoffs verified by one further increment.
pub fn converge(params: &CircuitParams, target: ConvergenceTarget, tol: f64) -> Result<Converged> {
    converge_with_cap(params, target, tol, DIMENSION_CAP)
}

pub fn converge_with_cap(params: &CircuitParams, target: ConvergenceTarget, tol: f64, cap: usize) -> Result<Converged> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    params.validate()?;
    if params.composite_dim() > cap {
        return Err(Error::ConvergenceCap { dimension: params.composite_dim(), cap, trajectory: Vec::new() });
    }
    let step = |p: &CircuitParams, value: f64, change: f64| ConvergenceStep { nm: p.nm, nkeep: p.nkeep, nc: p.nc, value, change };
    let mut current = params.clone();
    let mut value = evaluate_target(&current, None, target)?;
    let mut trajectory = vec![step(&current, value, f64::NAN)];
    for phase in 0..2 {
        loop {
            let next = if phase == 0 {
                CircuitParams { nm: current.nm * 2, ..current.clone() }
            } else {
                increment(&current)
            };
            if next.composite_dim() > cap {
                return Err(Error::ConvergenceCap { dimension: next.composite_dim(), cap, trajectory });
            }
            if next.nm > NM_CAP {
                return Err(Error::ConvergenceCap { dimension: next.nm, cap: NM_CAP, trajectory });
            }
            let v = evaluate_target(&next, None, target)?;
            let change = (v - value).abs();
            trajectory.push(step(&next, v, change));
            if change < tol {
                break;
            }
            current = next;
            value = v;
        }
    }
    Ok(Converged { params: current, value, trajectory })
}

/// Writes rows as CSV with the fixed column order.
pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(["sweep_var", "sweep_value", "model", "observable", "value", "status"]).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() }))
        .collect()
}

pub fn to_json_string(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Io { path: "<json>".into(), message: e.to_string() })
}

pub fn parse_json(text: &str) -> Result<SweepResult> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed sweep JSON: {e}")))
}

/// Output formats of [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Renders a result in the requested format.
pub fn render(result: &SweepResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv_string(&result.rows),
        Format::Json => to_json_string(result),
    }
}

/// Writes a result to `path`.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Shipped figure presets as (name, JSON document).
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2-detuning", include_str!("../presets/fig2-detuning.json")),
    ("fig3-coupling", include_str!("../presets/fig3-coupling.json")),
    ("fig4-flux", include_str!("../presets/fig4-flux.json")),
    ("supp-matrix-elements", include_str!("../presets/supp-matrix-elements.json")),
    ("supp-coupling-ratio", include_str!("../presets/supp-coupling-ratio.json")),
    ("supp-alpha-jc-detuning", include_str!("../presets/supp-alpha-jc-detuning.json")),
    ("supp-alpha-jc-coupling", include_str!("../presets/supp-alpha-jc-coupling.json")),
    ("supp-flux-eta1.5", include_str!("../presets/supp-flux-eta1.5.json")),
    ("supp-energies-alpha-delta5", include_str!("../presets/supp-energies-alpha-delta5.json")),
    ("supp-fidelity-alpha-eta1", include_str!("../presets/supp-fidelity-alpha-eta1.json")),
    ("supp-fidelity-alpha-eta1.5", include_str!("../presets/supp-fidelity-alpha-eta1.5.json")),
    ("supp-fidelity-alpha-eta2", include_str!("../presets/supp-fidelity-alpha-eta2.json")),
    ("supp-delta1-coupling", include_str!("../presets/supp-delta1-coupling.json")),
    ("supp-delta1-flux", include_str!("../presets/supp-delta1-flux.json")),
    ("supp-delta1-alpha", include_str!("../presets/supp-delta1-alpha.json")),
    ("supp-delta0.2-coupling", include_str!("../presets/supp-delta0.2-coupling.json")),
    ("supp-delta0.2-flux", include_str!("../presets/supp-delta0.2-flux.json")),
    ("supp-delta0.2-alpha", include_str!("../presets/supp-delta0.2-alpha.json")),
    ("supp-photon-flux", include_str!("../presets/supp-photon-flux.json")),
    ("supp-photon-jc", include_str!("../presets/supp-photon-jc.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<SweepSpec> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
    let spec: SweepSpec = serde_json::from_str(text).map_err(|e| Error::Config(format!("preset '{name}': {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(models: Vec<ModelSel>, observables: Vec<ObservableSpec>) -> SweepSpec {
        SweepSpec {
            name: "t".into(),
            description: String::new(),
            swept: SweepVar::Eta,
            grid: vec![0.0, 0.5],
            params: CircuitParams { nm: 80, nkeep: 6, nc: 12, ..CircuitParams::reference(5.0, 0.0) },
            alpha: 1.0,
            models,
            observables,
            convergence_tol: None,
        }
    }

    #[test]
    fn selectors_round_trip_as_strings() {
        for s in ["exact", "alpha", "jc-gauge", "rwa(0.0)", "type2(0.5)"] {
            assert_eq!(s.parse::<ModelSel>().unwrap().to_string(), s);
        }
        for s in ["flux", "charge", "jc", "alpha(0.25)"] {
            assert_eq!(s.parse::<GaugeSel>().unwrap().to_string(), s);
        }
        assert!("nonsense".parse::<ModelSel>().is_err());
    }

    #[test]
    fn non_monotone_grid_is_rejected() {
        let mut s = tiny(vec![ModelSel::Exact], vec![ObservableSpec::Energies { levels: 2 }]);
        s.grid = vec![0.1, 0.3, 0.2];
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        s.grid = vec![0.1];
        s.observables = vec![ObservableSpec::Energies { levels: 13 }];
        assert!(s.validate().is_err());
    }

    #[test]
    fn one_row_per_cell() {
        let s = tiny(
            vec![ModelSel::Exact, ModelSel::Tag(ModelTag::QrmFlux)],
            vec![ObservableSpec::Energies { levels: 3 }, ObservableSpec::Fidelities, ObservableSpec::AlphaJc],
        );
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.rows.len(), 2 * (2 + 2 * (3 + 3)));
        assert!(r.rows.iter().all(|row| !row.status.starts_with(status::ERROR_PREFIX)));
    }

    #[test]
    fn failing_points_are_recorded_in_rows() {
        let mut s = tiny(vec![ModelSel::Exact], vec![ObservableSpec::Energies { levels: 2 }]);
        s.swept = SweepVar::Delta;
        s.grid = vec![-1.0, 1.0];
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows[0].status.starts_with(status::ERROR_PREFIX));
        assert!(r.rows[0].value.is_none());
        assert_eq!(r.rows[2].status, status::UNCHECKED);
    }

    #[test]
    fn empty_rows_give_header_only_csv() {
        assert_eq!(to_csv_string(&[]).unwrap(), "sweep_var,sweep_value,model,observable,value,status\n");
    }

    #[test]
    fn presets_parse_and_validate() {
        for name in preset_names() {
            let s = preset(name).unwrap();
            assert_eq!(s.name, name);
        }
    }
}
