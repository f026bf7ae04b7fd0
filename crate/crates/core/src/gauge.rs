//! Exact α-gauge light-matter Hamiltonians in the (material eigenbasis ⊗ Fock) product basis.
//!
//! Both instantiations share one structure. With D = q·φ the coupling dipole, K the
//! matching charge-coupling matrix (K_nm = ε_nm D_nm), L the inductance (or cavity
//! volume v) and the oscillator written through dimensionless quadratures
//! X = (a + a†)/√2 and P = i(a† − a)/√2 of a basis with frequency Ω_b,
//!
//! H = Σ ε_n|n⟩⟨n| + ω_α²/(2Ω_b)·P² + (Ω_b/2)·X² − (1−α)/√(LΩ_b)·K⊗P̂
//!     + α·√(Ω_b/L)·D⊗X + α²/(2L)·D²,
//!
//! with P = i·P̂, P̂ = (a† − a)/√2 real antisymmetric, and the squares P², X² taken as
//! truncations of the exact operator squares. The charge coupling K⊗P̂ combines two
//! imaginary operators, so H is real symmetric. The bare basis uses Ω_b = ω.

use crate::error::{Error, Result};
use crate::matter::{build_dipole, build_fluxonium, CircuitParams, DipoleParams, MatterKind, MatterSpectrum};
use crate::operator::{add_kron, expm_antihermitian, quad_p_imag, quad_p_sq, quad_x, quad_x_sq, EigenSystem, HermitianOp, Operator};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Per-gauge derived quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeContext {
    pub alpha: f64,
    /// Bare oscillator frequency ω = δ·ω_m.
    pub omega: f64,
    /// Renormalized frequency ω_α.
    pub omega_alpha: f64,
    /// μ_α = ω_α/ω.
    pub mu_alpha: f64,
    /// L = varphi²/(2ωη²) (cavity: v); infinite at η = 0.
    pub inductance: f64,
    /// C = 1/(Lω²); zero at η = 0.
    pub capacitance: f64,
    /// 1/√(Lω) = √2·η/|varphi|, finite at η = 0.
    pub lam: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    /// Δ_α = ε_0 + α²varphi²/(2L).
    pub delta_alpha: f64,
    /// r_α = ½ ln μ_α.
    pub r_alpha: f64,
    /// Reference qubit transition ω_m.
    pub omega_m: f64,
    /// Reference coupling dipole q·varphi.
    pub varphi: f64,
    /// Coupling g = η·ω.
    pub g: f64,
    pub eta: f64,
    pub delta: f64,
    /// q²/(2 m_eff): 4E_c for the circuit, e²/(2m) for the dipole.
    pub charging: f64,
    pub epsilon0: f64,
}

impl GaugeContext {
    pub fn new(matter: &MatterSpectrum, delta: f64, eta: f64, alpha: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || !(eta >= 0.0 && eta.is_finite()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need delta > 0, eta >= 0 and finite alpha (got {delta}, {eta}, {alpha})"
            )));
        }
        let varphi = matter.dipole_ref();
        if varphi == 0.0 {
            return Err(Error::InvalidParameter("reference dipole element vanishes".into()));
        }
        let omega_m = matter.omega_m;
        let omega = delta * omega_m;
        let lam = 2f64.sqrt() * eta / varphi.abs();
        let inductance = if eta == 0.0 { f64::INFINITY } else { varphi * varphi / (2.0 * omega * eta * eta) };
        let capacitance = if eta == 0.0 { 0.0 } else { 1.0 / (inductance * omega * omega) };
        let charging = matter.coupling_charge.powi(2) / (2.0 * matter.m_eff);
        let base = GaugeContext {
            alpha,
            omega,
            omega_alpha: omega,
            mu_alpha: 1.0,
            inductance,
            capacitance,
            lam,
            u_plus: 0.0,
            u_minus: 0.0,
            delta_alpha: 0.0,
            r_alpha: 0.0,
            omega_m,
            varphi,
            g: eta * omega,
            eta,
            delta,
            charging,
            epsilon0: matter.epsilon0,
        };
        Ok(base.with_alpha(alpha))
    }

    /// The same circuit in another gauge.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let omega_alpha = self.omega_alpha_at(alpha);
        let mu_alpha = omega_alpha / self.omega;
        let (u_plus, u_minus) = self.couplings(alpha, omega_alpha, self.varphi, self.omega_m);
        GaugeContext {
            alpha,
            omega_alpha,
            mu_alpha,
            u_plus,
            u_minus,
            delta_alpha: self.epsilon0 + alpha * alpha * self.self_energy_scale() * self.varphi * self.varphi,
            r_alpha: 0.5 * mu_alpha.ln(),
            ..self.clone()
        }
    }

    /// ω_α = ω·√(1 + 2κ(1−α)²C) with κ = q²/(2m_eff).
    pub fn omega_alpha_at(&self, alpha: f64) -> f64 {
        let beta = 1.0 - alpha;
        (self.omega * self.omega + 2.0 * self.charging * beta * beta * self.omega * self.lam * self.lam).sqrt()
    }

    /// (u⁺, u⁻) = dipole·[αω_α ∓ (1−α)ω_m]/√(2ω_αL) for given two-level data.
    pub fn couplings(&self, alpha: f64, omega_alpha: f64, dipole: f64, omega_m: f64) -> (f64, f64) {
        let pref = dipole * self.lam * (self.omega / (2.0 * omega_alpha)).sqrt();
        let beta = 1.0 - alpha;
        (pref * (alpha * omega_alpha - beta * omega_m), pref * (alpha * omega_alpha + beta * omega_m))
    }

    /// 1/(2L).
    pub fn self_energy_scale(&self) -> f64 {
        0.5 * self.omega * self.lam * self.lam
    }

    /// Charge-gauge QRM coupling g̃_0 = g/(δ√μ_0).
    pub fn g_tilde0(&self) -> f64 {
        let mu0 = self.omega_alpha_at(0.0) / self.omega;
        self.g / (self.delta * mu0.sqrt())
    }

    /// μ_0² = 1 + 8E_cC (circuit) or its cavity analogue.
    pub fn mu0_squared(&self) -> f64 {
        (self.omega_alpha_at(0.0) / self.omega).powi(2)
    }
}

/// Gauge context of the circuit at the parameters' δ and η.
pub fn derive_gauge_context(params: &CircuitParams, matter: &MatterSpectrum, alpha: f64) -> Result<GaugeContext> {
    GaugeContext::new(matter, params.delta, params.eta, alpha)
}

/// How the quadratic self-energy α²D²/(2L) enters a Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareConvention {
    /// Kept block of the full operator square, P D² P.
    FullSquare,
    /// Square of the kept block, (P D P)².
    ProjectedSquare,
    /// The term is already part of the material Hamiltonian.
    Absorbed,
}

/// The self-energy matrix D² in the chosen convention (without the α²/(2L) prefactor).
pub fn dipole_square(matter: &MatterSpectrum, square: SquareConvention) -> Mat<f64> {
    let q = matter.coupling_charge;
    let n = matter.nkeep();
    match square {
        SquareConvention::FullSquare => Mat::from_fn(n, n, |i, j| q * q * matter.phi_sq[(i, j)]),
        SquareConvention::ProjectedSquare => {
            let d = matter.coupling_dipole();
            &d * &d
        }
        SquareConvention::Absorbed => Mat::zeros(n, n),
    }
}

/// Generic exact Hamiltonian in a Fock basis of frequency `basis_omega`.
pub fn build_exact_in_basis(
    matter: &MatterSpectrum,
    ctx: &GaugeContext,
    nc: usize,
    square: SquareConvention,
    basis_omega: f64,
) -> Result<HermitianOp> {
    if nc < 2 {
        return Err(Error::InvalidDimension(format!("Fock dimension must be >= 2, got {nc}")));
    }
    if !(basis_omega > 0.0) {
        return Err(Error::InvalidParameter("basis frequency must be positive".into()));
    }
    let nk = matter.nkeep();
    for m in [&matter.phi, &matter.phi_sq, &matter.xi_imag] {
        if m.nrows() != nk || m.ncols() != nk {
            return Err(Error::Validation("matter matrix elements do not match the kept block".into()));
        }
    }
    let alpha = ctx.alpha;
    let beta = 1.0 - alpha;
    let (omega, lam) = (ctx.omega, ctx.lam);
    let dim = nk * nc;
    let mut h = Mat::<f64>::zeros(dim, dim);

    let eps = Mat::from_fn(nk, nk, |i, j| if i == j { matter.energies[i] } else { 0.0 });
    let id_m = Mat::<f64>::identity(nk, nk);
    let id_c = Mat::<f64>::identity(nc, nc);
    add_kron(&mut h, 1.0, &eps, &id_c);

    let oa2 = ctx.omega_alpha_at(alpha).powi(2);
    let (p2, x2) = (quad_p_sq(nc), quad_x_sq(nc));
    let osc = Mat::from_fn(nc, nc, |i, j| oa2 / (2.0 * basis_omega) * p2[(i, j)] + 0.5 * basis_omega * x2[(i, j)]);
    add_kron(&mut h, 1.0, &id_m, &osc);

    if lam != 0.0 {
        if beta != 0.0 {
            let k = matter.charge_coupling();
            add_kron(&mut h, -beta * lam * (omega / basis_omega).sqrt(), &k, &quad_p_imag(nc));
        }
        if alpha != 0.0 {
            let d = matter.coupling_dipole();
            add_kron(&mut h, alpha * lam * (omega * basis_omega).sqrt(), &d, &quad_x(nc));
            let d2 = dipole_square(matter, square);
            add_kron(&mut h, alpha * alpha * 0.5 * omega * lam * lam, &d2, &id_c);
        }
    }
    symmetrize_in_place(&mut h);
    HermitianOp::from_real(h)
}

fn symmetrize_in_place(h: &mut Mat<f64>) {
    let n = h.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
}

/// Exact α-gauge Hamiltonian on the bare oscillator basis.
pub fn build_exact(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize, square: SquareConvention) -> Result<HermitianOp> {
    build_exact_in_basis(matter, ctx, nc, square, ctx.omega)
}

/// Exact fluxonium-LC Hamiltonian with the full-square self-energy.
pub fn build_exact_circuit(params: &CircuitParams, matter: &MatterSpectrum, ctx: &GaugeContext) -> Result<HermitianOp> {
    if matter.kind != MatterKind::Fluxonium {
        return Err(Error::Validation("circuit Hamiltonian needs a fluxonium spectrum".into()));
    }
    if matter.nkeep() != params.nkeep {
        return Err(Error::Validation(format!(
            "matter keeps {} levels but params request {}",
            matter.nkeep(),
            params.nkeep
        )));
    }
    build_exact(matter, ctx, params.nc, SquareConvention::FullSquare)
}

/// Dipole in a single-mode cavity of frequency ω = δ·ω_m and coupling η.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub dipole: DipoleParams,
    pub delta: f64,
    pub eta: f64,
    pub nc: usize,
}

impl CavityParams {
    /// Cavity volume v = d_01²/(2ωη²) for a bare spectrum.
    pub fn volume(&self, matter: &MatterSpectrum) -> f64 {
        let d = matter.dipole_ref();
        d * d / (2.0 * self.delta * matter.omega_m * self.eta * self.eta)
    }
}

/// Exact α-gauge dipole-cavity Hamiltonian with the full-square self-energy.
pub fn build_exact_cavity(params: &CavityParams, matter: &MatterSpectrum, ctx: &GaugeContext) -> Result<HermitianOp> {
    if matter.kind != MatterKind::Dipole {
        return Err(Error::Validation("cavity Hamiltonian needs a dipole spectrum".into()));
    }
    build_exact(matter, ctx, params.nc, SquareConvention::FullSquare)
}

/// Material spectrum whose potential absorbs the self-energy α²d²/(2v), with the
/// gauge context built from the bare spectrum.
pub fn absorbed_dipole(params: &CavityParams, alpha: f64) -> Result<(MatterSpectrum, GaugeContext)> {
    let bare = build_dipole(&params.dipole)?;
    let ctx = GaugeContext::new(&bare, params.delta, params.eta, alpha)?;
    let q = bare.coupling_charge;
    let scale = alpha * alpha * ctx.self_energy_scale() * q * q;
    let dressed = build_dipole(&params.dipole.with_added_potential(|x| scale * x * x)?)?;
    Ok((dressed, ctx))
}

/// Fluxonium whose inductive energy absorbs the self-energy α²φ²/(2L), with the gauge
/// context built from the bare circuit.
pub fn absorbed_fluxonium(params: &CircuitParams, alpha: f64) -> Result<(MatterSpectrum, GaugeContext)> {
    let bare = build_fluxonium(params)?;
    let ctx = GaugeContext::new(&bare, params.delta, params.eta, alpha)?;
    let q = bare.coupling_charge;
    let el = params.el + 2.0 * alpha * alpha * ctx.self_energy_scale() * q * q;
    Ok((build_fluxonium(&CircuitParams { el, ..params.clone() })?, ctx))
}

/// Product-basis descriptor: matter index slow, Fock index fast.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub alpha: f64,
    pub nkeep: usize,
    pub nc: usize,
    /// Fock-basis frequency.
    pub basis_omega: f64,
    pub ordering: String,
}

pub const ORDERING: &str = "matter-slow,fock-fast";

impl BasisDescriptor {
    pub fn new(alpha: f64, nkeep: usize, nc: usize, basis_omega: f64) -> Self {
        BasisDescriptor { alpha, nkeep, nc, basis_omega, ordering: ORDERING.to_string() }
    }

    pub fn index(&self, matter: usize, fock: usize) -> usize {
        assert_eq!(self.ordering, ORDERING);
        matter * self.nc + fock
    }

    pub fn dim(&self) -> usize {
        self.nkeep * self.nc
    }
}

/// Eigen-decomposition of a composite Hamiltonian with its basis descriptor.
#[derive(Clone, Debug)]
pub struct CompositeSpectrum {
    pub basis: BasisDescriptor,
    pub values: Vec<f64>,
    pub eigen: Option<EigenSystem>,
}

impl CompositeSpectrum {
    pub fn state(&self, k: usize) -> Option<Vec<f64>> {
        self.eigen.as_ref().and_then(|e| e.real_vector(k))
    }
}

/// Full diagonalization with eigenvectors.
pub fn diagonalize(h: &HermitianOp, basis: BasisDescriptor) -> Result<CompositeSpectrum> {
    check_basis(h, &basis)?;
    let eigen = h.eig()?;
    Ok(CompositeSpectrum { basis, values: eigen.values.clone(), eigen: Some(eigen) })
}

/// Eigenvalues only.
pub fn diagonalize_values(h: &HermitianOp, basis: BasisDescriptor) -> Result<CompositeSpectrum> {
    check_basis(h, &basis)?;
    Ok(CompositeSpectrum { basis, values: h.eigenvalues()?, eigen: None })
}

fn check_basis(h: &HermitianOp, basis: &BasisDescriptor) -> Result<()> {
    if h.dim() != basis.dim() {
        return Err(Error::Validation(format!(
            "Hamiltonian dimension {} does not match basis {}x{}",
            h.dim(),
            basis.nkeep,
            basis.nc
        )));
    }
    Ok(())
}

/// Exact circuit spectrum in gauge α.
pub fn exact_circuit_spectrum(params: &CircuitParams, matter: &MatterSpectrum, alpha: f64, vectors: bool) -> Result<CompositeSpectrum> {
    let ctx = derive_gauge_context(params, matter, alpha)?;
    let h = build_exact_circuit(params, matter, &ctx)?;
    let basis = BasisDescriptor::new(alpha, matter.nkeep(), params.nc, ctx.omega);
    if vectors {
        diagonalize(&h, basis)
    } else {
        diagonalize_values(&h, basis)
    }
}

/// Outcome of recomputing the exact spectrum in several gauges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeInvarianceReport {
    pub alphas: Vec<f64>,
    /// levels[i][k]: level k in gauge alphas[i].
    pub levels: Vec<Vec<f64>>,
    /// Relative spread (max − min)/|mean| per level.
    pub spread: Vec<f64>,
    pub max_spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Number of levels compared by [`verify_gauge_invariance`].
pub const INVARIANCE_LEVELS: usize = 10;

pub fn verify_gauge_invariance(params: &CircuitParams, alphas: &[f64], tolerance: f64) -> Result<GaugeInvarianceReport> {
    let matter = build_fluxonium(params)?;
    verify_gauge_invariance_with(params, &matter, alphas, tolerance)
}

pub fn verify_gauge_invariance_with(
    params: &CircuitParams,
    matter: &MatterSpectrum,
    alphas: &[f64],
    tolerance: f64,
) -> Result<GaugeInvarianceReport> {
    if alphas.len() < 2 {
        return Err(Error::InvalidParameter("gauge invariance needs at least two alphas".into()));
    }
    let count = INVARIANCE_LEVELS.min(params.composite_dim());
    let mut levels = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let spec = exact_circuit_spectrum(params, matter, alpha, false)?;
        levels.push(spec.values[..count].to_vec());
    }
    let spread = relative_spread(&levels, count);
    let max_spread = spread.iter().cloned().fold(0.0, f64::max);
    Ok(GaugeInvarianceReport {
        alphas: alphas.to_vec(),
        levels,
        spread,
        max_spread,
        tolerance,
        pass: max_spread < tolerance,
    })
}

/// Relative spread per column of a table of level lists.
pub fn relative_spread(levels: &[Vec<f64>], count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let col: Vec<f64> = levels.iter().map(|l| l[k]).collect();
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            if mean == 0.0 {
                max - min
            } else {
                (max - min) / mean.abs()
            }
        })
        .collect()
}

/// The unitary R_{0α} = exp(iα D⊗ζ) on the bare product basis, with ζ = P/√(Lω).
pub fn gauge_unitary(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize, alpha: f64) -> Result<Operator> {
    let d = Operator::from_real(matter.coupling_dipole())?;
    let p_imag = Operator::from_real(quad_p_imag(nc))?;
    let generator = d.kron(&p_imag).scale(-alpha * ctx.lam);
    expm_antihermitian(&generator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CircuitParams {
        CircuitParams { nkeep: 8, nm: 64, nc: 20, ..CircuitParams::reference(1.0, 0.3) }
    }

    #[test]
    fn flux_gauge_collapses_to_g() {
        let p = small();
        let m = build_fluxonium(&p).unwrap();
        let ctx = derive_gauge_context(&p, &m, 1.0).unwrap();
        assert_eq!(ctx.mu_alpha, 1.0);
        assert!((ctx.u_plus - ctx.g).abs() < 1e-12 * ctx.g);
        assert!((ctx.u_minus - ctx.g).abs() < 1e-12 * ctx.g);
        assert!((ctx.g - p.eta * ctx.omega).abs() < 1e-14);
    }

    #[test]
    fn charge_gauge_coupling_matches_renormalized_form() {
        let p = small();
        let m = build_fluxonium(&p).unwrap();
        let ctx = derive_gauge_context(&p, &m, 0.0).unwrap();
        assert!((ctx.u_plus.abs() - ctx.g_tilde0()).abs() < 1e-10 * ctx.g_tilde0());
        assert!((ctx.u_minus.abs() - ctx.g_tilde0()).abs() < 1e-10 * ctx.g_tilde0());
        let mu0sq = 1.0 + 8.0 * p.ec * ctx.capacitance;
        assert!((ctx.mu0_squared() - mu0sq).abs() < 1e-12 * mu0sq);
        assert!(ctx.g_tilde0() / ctx.g < 1.0 / p.delta);
    }

    #[test]
    fn decoupled_spectrum() {
        let p = CircuitParams { eta: 0.0, ..small() };
        let m = build_fluxonium(&p).unwrap();
        for alpha in [0.0, 0.4, 1.0] {
            let spec = exact_circuit_spectrum(&p, &m, alpha, false).unwrap();
            let mut expected: Vec<f64> = (0..p.nkeep)
                .flat_map(|n| (0..p.nc).map(move |k| (n, k)))
                .map(|(n, k)| m.energies[n] + m.omega_m * p.delta * (k as f64 + 0.5))
                .collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in spec.values.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10 * b.abs());
            }
        }
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let p = small();
        let m = build_fluxonium(&p).unwrap();
        let ctx = derive_gauge_context(&p, &m, 0.5).unwrap();
        let wrong = CircuitParams { nkeep: 6, ..p.clone() };
        assert!(matches!(build_exact_circuit(&wrong, &m, &ctx), Err(Error::Validation(_))));
    }

    #[test]
    fn basis_descriptor_ordering() {
        let b = BasisDescriptor::new(0.5, 3, 4, 1.0);
        assert_eq!(b.index(2, 1), 9);
        assert_eq!(b.dim(), 12);
    }
}
