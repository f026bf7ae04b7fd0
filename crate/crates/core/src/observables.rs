//! Benchmark observables: eigenstate fidelities, photon-number averages in any
//! measured gauge, and normalized matrix-element tables.

use crate::error::{Error, Result};
use crate::gauge::{build_exact, dipole_square, GaugeContext, SquareConvention};
use crate::matter::{CircuitParams, MatterSpectrum};
use crate::operator::{add_kron, quad_p_sq, quad_x, quad_x_sq, squeeze_matrix, HermitianOp};
use crate::two_level::{build_model, tag_alpha, ModelTag, TwoLevelModel};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Largest norm an embedding may lose to the Fock cutoff.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Extra Fock levels used while squeezing before the final truncation.
const EMBED_PAD: usize = 40;

/// Ground, excited and cross fidelities of one two-level model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub alpha: f64,
    pub tag: ModelTag,
    /// |⟨G₂|G⟩|².
    pub f_g: f64,
    /// |⟨E₂|E⟩|².
    pub f_e: f64,
    /// |⟨E₂|G⟩|².
    pub cross: f64,
    /// Largest norm lost while embedding the model states.
    pub leakage: f64,
}

/// How squared material operators enter the photon-number operator of a truncated space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonKind {
    /// Square of the projected operator, (PφP)².
    #[default]
    OperatorOfProjected,
    /// Projection of the operator square, Pφ²P.
    ProjectedOperator,
}

impl PhotonKind {
    fn convention(self) -> SquareConvention {
        match self {
            PhotonKind::OperatorOfProjected => SquareConvention::ProjectedSquare,
            PhotonKind::ProjectedOperator => SquareConvention::FullSquare,
        }
    }
}

/// Which state a photon number is evaluated in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    /// Exact eigenstate `level`, represented in gauge `alpha`.
    Exact { alpha: f64, level: usize },
    /// Eigenstate `level` of a two-level model.
    Model { tag: ModelTag, level: usize },
}

/// Photon-number average ⟨n_α⟩ for one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberRecord {
    pub measured_alpha: f64,
    pub state: StateSpec,
    pub kind: PhotonKind,
    pub value: f64,
}

/// Fock(c) → Fock(a) transformation for a mode of frequency `from` re-expressed
/// in the number basis of frequency `to`, padded to `dim` levels.
fn mode_change(from: f64, to: f64, dim: usize) -> Result<Mat<f64>> {
    squeeze_matrix(-0.5 * (from / to).ln(), dim)
}

/// Places a (qubit ⊗ Fock(c)) vector into the (matter ⊗ Fock(a)) product basis of
/// `nkeep` material levels and `nc` Fock levels of frequency `exact_omega`.
/// Returns the embedded vector and the norm lost to the Fock cutoff.
pub fn embed_state(state: &[f64], model_nc: usize, model_omega: f64, nkeep: usize, nc: usize, exact_omega: f64) -> Result<(Vec<f64>, f64)> {
    if state.len() != 2 * model_nc {
        return Err(Error::InvalidDimension(format!(
            "two-level state has length {} but the model space is 2x{model_nc}",
            state.len()
        )));
    }
    if nkeep < 2 || nc < 2 {
        return Err(Error::InvalidDimension("exact basis must hold at least two levels per factor".into()));
    }
    let big = model_nc.max(nc) + EMBED_PAD;
    let s = mode_change(model_omega, exact_omega, big)?;
    let mut out = vec![0.0; nkeep * nc];
    let mut kept = 0.0;
    let total: f64 = state.iter().map(|x| x * x).sum();
    for q in 0..2 {
        let block = &state[q * model_nc..(q + 1) * model_nc];
        for k in 0..nc {
            let v: f64 = block.iter().enumerate().map(|(n, x)| s[(k, n)] * x).sum();
            out[q * nc + k] = v;
            kept += v * v;
        }
    }
    let leakage = (total - kept).max(0.0);
    if leakage > LEAKAGE_TOL {
        return Err(Error::Cutoff { leakage });
    }
    Ok((out, leakage))
}

/// Embeds eigenstate `index` of a two-level model into the exact product basis of
/// its own gauge (`nkeep` material levels, `nc` bare Fock levels).
pub fn embed_two_level_state(model: &TwoLevelModel, index: usize, nkeep: usize, nc: usize) -> Result<(Vec<f64>, f64)> {
    let eig = model.eig()?;
    let v = eig
        .real_vector(index)
        .ok_or_else(|| Error::InvalidDimension(format!("state index {index} out of range")))?;
    embed_state(&v, model.nc, model.basis_omega, nkeep, nc, model.ctx.omega)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact ground and first excited states of the circuit in gauge α.
fn exact_pair(params: &CircuitParams, matter: &MatterSpectrum, ctx: &GaugeContext) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = build_exact(matter, ctx, params.nc, SquareConvention::FullSquare)?;
    let eig = h.eig()?;
    let g = eig.real_vector(0).ok_or_else(|| Error::Eigen("complex exact ground state".into()))?;
    let e = eig.real_vector(1).ok_or_else(|| Error::Eigen("complex exact excited state".into()))?;
    Ok((g, e))
}

/// Fidelities of one model against the exact eigenstates of the same gauge.
pub fn model_fidelity(params: &CircuitParams, matter: &MatterSpectrum, model: &TwoLevelModel) -> Result<FidelityRecord> {
    let (g, e) = exact_pair(params, matter, &model.ctx)?;
    let (g2, l0) = embed_two_level_state(model, 0, matter.nkeep(), params.nc)?;
    let (e2, l1) = embed_two_level_state(model, 1, matter.nkeep(), params.nc)?;
    let clamp = |x: f64| x.min(1.0);
    Ok(FidelityRecord {
        alpha: model.alpha(),
        tag: model.tag,
        f_g: clamp(dot(&g2, &g).powi(2)),
        f_e: clamp(dot(&e2, &e).powi(2)),
        cross: clamp(dot(&e2, &g).powi(2)),
        leakage: l0.max(l1),
    })
}

/// Fidelity records for the general-α models at `alphas`, followed by `tags`.
pub fn fidelities(params: &CircuitParams, matter: &MatterSpectrum, alphas: &[f64], tags: &[ModelTag]) -> Result<Vec<FidelityRecord>> {
    let ctx = GaugeContext::new(matter, params.delta, params.eta, 0.0)?;
    let nc_model = params.nc;
    alphas
        .iter()
        .map(|&a| ModelTag::GeneralAlpha(a))
        .chain(tags.iter().copied())
        .map(|tag| {
            let model = build_model(tag, matter, &ctx, nc_model)?;
            model_fidelity(params, matter, &model)
        })
        .collect()
}

/// Oscillator part of n_α on a Fock basis of frequency Ω_b for a mode of
/// frequency ω_meas: ½(ρ²X² + P²/ρ²) − ½ with ρ² = Ω_b/ω_meas.
fn number_oscillator(nc: usize, basis_omega: f64, omega_meas: f64) -> Mat<f64> {
    let rho2 = basis_omega / omega_meas;
    let (x2, p2) = (quad_x_sq(nc), quad_p_sq(nc));
    Mat::from_fn(nc, nc, |i, j| {
        0.5 * (rho2 * x2[(i, j)] + p2[(i, j)] / rho2) - if i == j { 0.5 } else { 0.0 }
    })
}

/// n_α = c_α†c_α written on a product basis whose oscillator quadratures belong
/// to gauge `alpha_rep` and a Fock basis of frequency `basis_omega`.
///
/// The measured mode is a_meas = a_rep + (α_rep − α_meas)·λ/√2·D on the bare
/// basis, Bogoliubov-combined into the mode of frequency ω_{α_meas}.
pub fn photon_operator(
    dipole: &Mat<f64>,
    dipole_sq: &Mat<f64>,
    ctx: &GaugeContext,
    alpha_rep: f64,
    alpha_meas: f64,
    nc: usize,
    basis_omega: f64,
) -> Result<HermitianOp> {
    let nk = dipole.nrows();
    if dipole.ncols() != nk || dipole_sq.nrows() != nk || dipole_sq.ncols() != nk {
        return Err(Error::InvalidDimension("dipole blocks must be square and equal in size".into()));
    }
    let omega_meas = ctx.omega_alpha_at(alpha_meas);
    let x = ctx.omega / omega_meas;
    let x_basis = ctx.omega / basis_omega;
    let rho = (x / x_basis).sqrt();
    let kappa = (alpha_rep - alpha_meas) * ctx.lam / 2f64.sqrt();
    let mut n = Mat::<f64>::zeros(nk * nc, nk * nc);
    add_kron(&mut n, 1.0, &Mat::identity(nk, nk), &number_oscillator(nc, basis_omega, omega_meas));
    if kappa != 0.0 {
        add_kron(&mut n, (2.0 * x).sqrt() * kappa * rho, dipole, &quad_x(nc));
        add_kron(&mut n, x * kappa * kappa, dipole_sq, &Mat::identity(nc, nc));
    }
    HermitianOp::from_real(n)
}

fn block_mat(b: &[[f64; 2]; 2]) -> Mat<f64> {
    Mat::from_fn(2, 2, |i, j| b[i][j])
}

/// n_{α_meas} on a two-level model's space, in the model's own representation.
pub fn photon_operator_two_level(model: &TwoLevelModel, alpha_meas: f64, kind: PhotonKind) -> Result<HermitianOp> {
    let d = block_mat(&model.dipole);
    let d2 = match kind {
        PhotonKind::OperatorOfProjected => &d * &d,
        PhotonKind::ProjectedOperator => {
            if matches!(model.tag, ModelTag::TrkModel(_)) {
                return Err(Error::Validation(
                    "the mass-eliminated model carries no operator square for a projected-operator photon number".into(),
                ));
            }
            block_mat(&model.dipole_sq)
        }
    };
    photon_operator(&d, &d2, &model.ctx, model.alpha(), alpha_meas, model.nc, model.basis_omega)
}

/// n_{α_meas} on the exact product basis represented in gauge `alpha_rep`.
pub fn photon_operator_exact(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize, alpha_rep: f64, alpha_meas: f64, kind: PhotonKind) -> Result<HermitianOp> {
    let d = matter.coupling_dipole();
    let d2 = dipole_square(matter, kind.convention());
    photon_operator(&d, &d2, ctx, alpha_rep, alpha_meas, nc, ctx.omega)
}

/// ⟨n_{α_meas}⟩ in an exact or two-level eigenstate of the circuit.
pub fn photon_number(params: &CircuitParams, matter: &MatterSpectrum, measured_alpha: f64, state: StateSpec, kind: PhotonKind) -> Result<PhotonNumberRecord> {
    let base = GaugeContext::new(matter, params.delta, params.eta, 0.0)?;
    let value = match state {
        StateSpec::Exact { alpha, level } => {
            let ctx = base.with_alpha(alpha);
            let h = build_exact(matter, &ctx, params.nc, SquareConvention::FullSquare)?;
            let v = state_vector(&h, level)?;
            let n = photon_operator_exact(matter, &ctx, params.nc, alpha, measured_alpha, kind)?;
            expectation(&n, &v)
        }
        StateSpec::Model { tag, level } => {
            let model = build_model(tag, matter, &base, params.nc)?;
            let v = state_vector(&model.hamiltonian, level)?;
            let n = photon_operator_two_level(&model, measured_alpha, kind)?;
            expectation(&n, &v)
        }
    };
    Ok(PhotonNumberRecord { measured_alpha, state, kind, value })
}

/// Resolves a measured gauge given as a tag (for instance the JC gauge).
pub fn measured_alpha_of(tag: ModelTag, params: &CircuitParams, matter: &MatterSpectrum) -> Result<f64> {
    let ctx = GaugeContext::new(matter, params.delta, params.eta, 0.0)?;
    tag_alpha(tag, &ctx)
}

fn state_vector(h: &HermitianOp, level: usize) -> Result<Vec<f64>> {
    let eig = h.eig()?;
    if level >= eig.len() {
        return Err(Error::InvalidDimension(format!("level {level} out of range {}", eig.len())));
    }
    eig.real_vector(level).ok_or_else(|| Error::Eigen("complex eigenvector of a real Hamiltonian".into()))
}

/// ⟨v|H|v⟩ for a real vector.
pub fn expectation(h: &HermitianOp, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for j in 0..n {
        if v[j] == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for i in 0..n {
            col += v[i] * h.get(i, j).re;
        }
        acc += col * v[j];
    }
    acc
}

/// One entry of the matrix-element table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementRow {
    pub n: usize,
    pub m: usize,
    /// |φ_nm|² divided by its largest value.
    pub phi_sq: f64,
    /// |ε_nm φ_nm|² divided by its largest value.
    pub eps_phi_sq: f64,
}

/// Normalized |φ_nm|² and |ε_nm φ_nm|² for the lowest `count` levels (all kept levels if `None`).
pub fn export_matrix_element_heatmaps(matter: &MatterSpectrum, count: Option<usize>) -> Vec<MatrixElementRow> {
    let k = count.unwrap_or(matter.nkeep()).min(matter.nkeep());
    let raw: Vec<(usize, usize, f64, f64)> = (0..k)
        .flat_map(|n| (0..k).map(move |m| (n, m)))
        .map(|(n, m)| {
            let p = matter.phi[(n, m)].powi(2);
            (n, m, p, matter.eps(n, m).powi(2) * p)
        })
        .collect();
    let max_p = raw.iter().map(|r| r.2).fold(0.0, f64::max);
    let max_e = raw.iter().map(|r| r.3).fold(0.0, f64::max);
    let norm = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };
    raw.into_iter()
        .map(|(n, m, p, e)| MatrixElementRow { n, m, phi_sq: norm(p, max_p), eps_phi_sq: norm(e, max_e) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matter::build_fluxonium;
    use crate::operator::quad_p_sq;

    #[test]
    fn embedding_maps_renormalized_vacuum_to_oscillator_ground_state() {
        let (omega, omega_a, nc) = (1.0, 1.7, 40);
        let osc = Mat::from_fn(nc, nc, |i, j| omega_a * omega_a / (2.0 * omega) * quad_p_sq(nc)[(i, j)] + 0.5 * omega * quad_x_sq(nc)[(i, j)]);
        let ground = HermitianOp::from_real(osc).unwrap().eig().unwrap();
        assert!((ground.values[0] - 0.5 * omega_a).abs() < 1e-9);
        let g = ground.real_vector(0).unwrap();
        let mut state = vec![0.0; 2 * nc];
        state[0] = 1.0;
        let (emb, leak) = embed_state(&state, nc, omega_a, 2, nc, omega).unwrap();
        assert!(leak < 1e-9);
        assert!((dot(&emb[..nc], &g).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_frequencies_embed_identically() {
        let state: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).sin()).collect();
        let (emb, leak) = embed_state(&state, 6, 2.0, 3, 6, 2.0).unwrap();
        assert_eq!(leak, 0.0);
        assert_eq!(&emb[..12], &state[..]);
        assert!(emb[12..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn heavy_squeezing_reports_cutoff() {
        let mut state = vec![0.0; 8];
        state[3] = 1.0;
        assert!(matches!(embed_state(&state, 4, 30.0, 2, 4, 1.0), Err(Error::Cutoff { .. })));
    }

    #[test]
    fn heatmap_normalization() {
        let p = CircuitParams { nkeep: 6, nm: 60, nc: 10, ..CircuitParams::reference(5.0, 1.0) };
        let m = build_fluxonium(&p).unwrap();
        let rows = export_matrix_element_heatmaps(&m, None);
        assert_eq!(rows.len(), 36);
        assert_eq!(rows.iter().map(|r| r.phi_sq).fold(0.0, f64::max), 1.0);
        assert_eq!(rows.iter().map(|r| r.eps_phi_sq).fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn photon_operator_without_shift_is_number_operator_when_frequencies_match() {
        let p = CircuitParams { nkeep: 4, nm: 60, nc: 8, ..CircuitParams::reference(5.0, 0.5) };
        let m = build_fluxonium(&p).unwrap();
        let ctx = GaugeContext::new(&m, p.delta, p.eta, 1.0).unwrap();
        let n = photon_operator_exact(&m, &ctx, p.nc, 1.0, 1.0, PhotonKind::default()).unwrap();
        for i in 0..n.dim() {
            for j in 0..n.dim() {
                let want = if i == j { (i % p.nc) as f64 } else { 0.0 };
                assert!((n.get(i, j).re - want).abs() < 1e-12);
            }
        }
    }
}
