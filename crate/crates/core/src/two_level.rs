//! Two-level truncations of the α-gauge Hamiltonian.
//!
//! The two-level space is span{|ε_0⟩, |ε_1⟩} ⊗ Fock(c_α), where c_α is the
//! renormalized mode of frequency ω_α. Index layout: qubit slow, Fock fast, with
//! |0⟩ the ground and |1⟩ the excited material level.

use crate::error::{Error, Result};
use crate::gauge::{build_exact_in_basis, GaugeContext, SquareConvention};
use crate::matter::{MatterKind, MatterSpectrum};
use crate::operator::{add_kron, quad_p_imag, quad_p_sq, quad_x, EigenSystem, HermitianOp};
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Model identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelTag {
    GeneralAlpha(f64),
    QrmFlux,
    QrmCharge,
    JcGauge,
    RwaOf(f64),
    Type2(f64),
    TrkModel(f64),
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTag::GeneralAlpha(a) => write!(f, "alpha({a:?})"),
            ModelTag::QrmFlux => write!(f, "qrm-flux"),
            ModelTag::QrmCharge => write!(f, "qrm-charge"),
            ModelTag::JcGauge => write!(f, "jc-gauge"),
            ModelTag::RwaOf(a) => write!(f, "rwa({a:?})"),
            ModelTag::Type2(a) => write!(f, "type2({a:?})"),
            ModelTag::TrkModel(a) => write!(f, "trk({a:?})"),
        }
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "qrm-flux" => return Ok(ModelTag::QrmFlux),
            "qrm-charge" => return Ok(ModelTag::QrmCharge),
            "jc-gauge" => return Ok(ModelTag::JcGauge),
            _ => {}
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Config(format!("unknown model tag '{s}'")))?;
        let value = rest
            .strip_suffix(')')
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("malformed model tag '{s}'")))?;
        match name {
            "alpha" => Ok(ModelTag::GeneralAlpha(value)),
            "rwa" => Ok(ModelTag::RwaOf(value)),
            "type2" => Ok(ModelTag::Type2(value)),
            "trk" => Ok(ModelTag::TrkModel(value)),
            _ => Err(Error::Config(format!("unknown model tag '{s}'"))),
        }
    }
}

/// Result of the α_JC fixed-point solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaJcSolution {
    pub alpha_jc: f64,
    pub omega_jc: f64,
    pub iterations: usize,
    pub residual: f64,
}

const JC_TOL: f64 = 1e-13;
const JC_MAX_ITER: usize = 200;

/// Solves α = ω_m(α)/(ω_m(α) + ω_α(α)) by fixed-point iteration from `seed`, with a
/// bisection fallback on α(ω_m + ω_α) − ω_m over [0, 1].
pub fn solve_alpha_jc_with(seed: f64, freqs: impl Fn(f64) -> Result<(f64, f64)>) -> Result<AlphaJcSolution> {
    let finish = |alpha: f64, iterations: usize| -> Result<AlphaJcSolution> {
        let (wm, wa) = freqs(alpha)?;
        Ok(AlphaJcSolution { alpha_jc: alpha, omega_jc: wa, iterations, residual: (alpha * (wm + wa) - wm).abs() })
    };
    let mut alpha = seed;
    let mut trace = vec![alpha];
    for it in 1..=JC_MAX_ITER {
        let (wm, wa) = freqs(alpha)?;
        let next = wm / (wm + wa);
        trace.push(next);
        if !next.is_finite() {
            break;
        }
        if (next - alpha).abs() < JC_TOL {
            let (mut best, mut step, mut extra) = (next, (next - alpha).abs(), 0);
            while extra < 8 {
                let (wm, wa) = freqs(best)?;
                let polished = wm / (wm + wa);
                let change = (polished - best).abs();
                if change >= step || change == 0.0 {
                    if change == 0.0 {
                        best = polished;
                    }
                    break;
                }
                best = polished;
                step = change;
                extra += 1;
            }
            return finish(best, it + extra);
        }
        alpha = next;
    }
    let f = |a: f64| -> Result<f64> {
        let (wm, wa) = freqs(a)?;
        Ok(a * (wm + wa) - wm)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo < 0.0 && fhi > 0.0) {
        let tail = trace[trace.len().saturating_sub(8)..].to_vec();
        return Err(Error::FixedPoint { iterations: JC_MAX_ITER, trace: tail });
    }
    let mut iterations = JC_MAX_ITER;
    while hi - lo > 1e-15 && iterations < JC_MAX_ITER + 100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    finish(0.5 * (lo + hi), iterations)
}

/// α_JC = ω_m/(ω_m + ω_JC) for a material with fixed ω_m, seeded at 1/(1+δ).
pub fn solve_alpha_jc(ctx: &GaugeContext) -> Result<AlphaJcSolution> {
    let wm = ctx.omega_m;
    solve_alpha_jc_with(1.0 / (1.0 + ctx.delta), |a| Ok((wm, ctx.omega_alpha_at(a))))
}

/// Options for the formula-based builder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelOptions {
    pub square: SquareConvention,
    pub include_diagonal_flux: bool,
    pub rwa: bool,
}

impl Default for TwoLevelOptions {
    fn default() -> Self {
        TwoLevelOptions { square: SquareConvention::ProjectedSquare, include_diagonal_flux: true, rwa: false }
    }
}

/// Scalar data of a two-level model, from which its Hamiltonian is assembled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelTerms {
    pub eps: [f64; 2],
    /// Renormalized frequency of the Fock mode c.
    pub omega_c: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    /// Coefficients of |k⟩⟨k|⊗(c + c†).
    pub diag_coupling: [f64; 2],
    /// Self-energy block including the α²/(2L) prefactor.
    pub self_energy: [[f64; 2]; 2],
}

impl TwoLevelTerms {
    pub fn assemble(&self, nc: usize) -> Result<HermitianOp> {
        if nc < 2 {
            return Err(Error::InvalidDimension(format!("Fock dimension must be >= 2, got {nc}")));
        }
        let mut h = Mat::<f64>::zeros(2 * nc, 2 * nc);
        let at = |q: usize, n: usize| q * nc + n;
        for q in 0..2 {
            for n in 0..nc {
                h[(at(q, n), at(q, n))] += self.eps[q] + self.omega_c * (n as f64 + 0.5);
            }
        }
        for q in 0..2 {
            for p in 0..2 {
                for n in 0..nc {
                    h[(at(q, n), at(p, n))] += self.self_energy[q][p];
                }
            }
        }
        for n in 0..nc - 1 {
            let amp = ((n + 1) as f64).sqrt();
            let pairs = [
                (at(1, n), at(0, n + 1), self.u_minus),
                (at(1, n + 1), at(0, n), self.u_plus),
                (at(0, n), at(0, n + 1), self.diag_coupling[0]),
                (at(1, n), at(1, n + 1), self.diag_coupling[1]),
            ];
            for (i, j, c) in pairs {
                h[(i, j)] += c * amp;
                h[(j, i)] += c * amp;
            }
        }
        HermitianOp::from_real(h)
    }
}

/// A two-level model with its gauge context and Hamiltonian.
#[derive(Clone, Debug)]
pub struct TwoLevelModel {
    pub ctx: GaugeContext,
    pub tag: ModelTag,
    pub hamiltonian: HermitianOp,
    pub terms: TwoLevelTerms,
    pub nc: usize,
    pub omega_m: f64,
    pub phi00: f64,
    pub phi11: f64,
    /// Dipole block q·PφP.
    pub dipole: [[f64; 2]; 2],
    /// Dipole-square block q²·Pφ²P.
    pub dipole_sq: [[f64; 2]; 2],
    /// Fock-basis frequency of the model.
    pub basis_omega: f64,
}

impl TwoLevelModel {
    pub fn alpha(&self) -> f64 {
        self.ctx.alpha
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        self.hamiltonian.eig()
    }

    pub fn square_convention(&self) -> SquareConvention {
        match self.tag {
            ModelTag::Type2(_) => SquareConvention::FullSquare,
            _ => SquareConvention::ProjectedSquare,
        }
    }
}

fn block(m: &Mat<f64>, s: f64) -> [[f64; 2]; 2] {
    [[s * m[(0, 0)], s * m[(0, 1)]], [s * m[(1, 0)], s * m[(1, 1)]]]
}

/// Two-level model from closed-form coefficients (qubit term, renormalized
/// oscillator, u± couplings, Δ_α, and off-frustration diagonal couplings).
pub fn build_two_level(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize, options: TwoLevelOptions) -> Result<TwoLevelModel> {
    if matter.nkeep() < 2 {
        return Err(Error::InvalidDimension("two-level model needs at least two material levels".into()));
    }
    let q = matter.coupling_charge;
    let alpha = ctx.alpha;
    let omega_c = ctx.omega_alpha_at(alpha);
    let dipole = block(&matter.phi, q);
    let dipole_sq = block(&matter.phi_sq, q * q);
    let omega_m = matter.eps(1, 0);
    let (u_plus, u_minus) = ctx.couplings(alpha, omega_c, dipole[0][1], omega_m);
    let diag_scale = alpha * omega_c * ctx.lam * (ctx.omega / (2.0 * omega_c)).sqrt();
    let diag_coupling = if options.include_diagonal_flux {
        [diag_scale * dipole[0][0], diag_scale * dipole[1][1]]
    } else {
        [0.0, 0.0]
    };
    let s = alpha * alpha * ctx.self_energy_scale();
    let sq = match options.square {
        SquareConvention::ProjectedSquare => {
            let d = &dipole;
            let mut out = [[0.0; 2]; 2];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = d[i][0] * d[0][j] + d[i][1] * d[1][j];
                }
            }
            out
        }
        SquareConvention::FullSquare => dipole_sq,
        SquareConvention::Absorbed => [[0.0; 2]; 2],
    };
    let terms = TwoLevelTerms {
        eps: [matter.energies[0], matter.energies[1]],
        omega_c,
        u_plus: if options.rwa { 0.0 } else { u_plus },
        u_minus,
        diag_coupling,
        self_energy: [[s * sq[0][0], s * sq[0][1]], [s * sq[1][0], s * sq[1][1]]],
    };
    let tag = if options.rwa {
        ModelTag::RwaOf(alpha)
    } else if options.square == SquareConvention::FullSquare {
        ModelTag::Type2(alpha)
    } else if alpha == 1.0 {
        ModelTag::QrmFlux
    } else if alpha == 0.0 {
        ModelTag::QrmCharge
    } else {
        ModelTag::GeneralAlpha(alpha)
    };
    Ok(TwoLevelModel {
        ctx: ctx.with_alpha(alpha),
        tag,
        hamiltonian: terms.assemble(nc)?,
        terms,
        nc,
        omega_m,
        phi00: matter.phi[(0, 0)],
        phi11: matter.phi[(1, 1)],
        dipole,
        dipole_sq,
        basis_omega: omega_c,
    })
}

/// Type-1 two-level model in the standard options.
pub fn build_type1(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<TwoLevelModel> {
    build_two_level(matter, ctx, nc, TwoLevelOptions::default())
}

/// Type-2 two-level model: the self-energy is projected after squaring.
pub fn build_type2(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<TwoLevelModel> {
    build_two_level(matter, ctx, nc, TwoLevelOptions { square: SquareConvention::FullSquare, ..Default::default() })
}

/// Two-level model by numerically projecting the generic exact Hamiltonian onto the
/// lowest two material levels in the renormalized Fock basis.
pub fn build_two_level_projected(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize, square: SquareConvention) -> Result<HermitianOp> {
    let two = matter.truncate(2)?;
    let omega_c = ctx.omega_alpha_at(ctx.alpha);
    build_exact_in_basis(&two, ctx, nc, square, omega_c)
}

/// JC-gauge model: α = α_JC, where the counter-rotating coupling vanishes at maximal frustration.
pub fn build_jc_gauge(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<(TwoLevelModel, AlphaJcSolution)> {
    let sol = solve_alpha_jc(ctx)?;
    let mut model = build_type1(matter, &ctx.with_alpha(sol.alpha_jc), nc)?;
    model.tag = ModelTag::JcGauge;
    Ok((model, sol))
}

/// Deletes the counter-rotating coupling and keeps every other term.
pub fn apply_rwa(model: &TwoLevelModel) -> Result<TwoLevelModel> {
    let mut terms = model.terms.clone();
    terms.u_plus = 0.0;
    let tag = match model.tag {
        ModelTag::JcGauge => ModelTag::JcGauge,
        _ => ModelTag::RwaOf(model.ctx.alpha),
    };
    Ok(TwoLevelModel { hamiltonian: terms.assemble(model.nc)?, terms, tag, ..model.clone() })
}

/// Builds any non-TRK tag from a material spectrum and a gauge context (whose α is ignored).
pub fn build_model(tag: ModelTag, matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<TwoLevelModel> {
    match tag {
        ModelTag::QrmFlux => build_type1(matter, &ctx.with_alpha(1.0), nc),
        ModelTag::QrmCharge => build_type1(matter, &ctx.with_alpha(0.0), nc),
        ModelTag::GeneralAlpha(a) => {
            let mut m = build_type1(matter, &ctx.with_alpha(a), nc)?;
            m.tag = ModelTag::GeneralAlpha(a);
            Ok(m)
        }
        ModelTag::JcGauge => Ok(build_jc_gauge(matter, ctx, nc)?.0),
        ModelTag::RwaOf(a) => apply_rwa(&build_type1(matter, &ctx.with_alpha(a), nc)?),
        ModelTag::Type2(a) => build_type2(matter, &ctx.with_alpha(a), nc),
        ModelTag::TrkModel(a) => build_trk_model(matter, &ctx.with_alpha(a), nc),
    }
}

/// Gauge of a tag, resolving α_JC when needed.
pub fn tag_alpha(tag: ModelTag, ctx: &GaugeContext) -> Result<f64> {
    Ok(match tag {
        ModelTag::QrmFlux => 1.0,
        ModelTag::QrmCharge => 0.0,
        ModelTag::JcGauge => solve_alpha_jc(ctx)?.alpha_jc,
        ModelTag::GeneralAlpha(a) | ModelTag::RwaOf(a) | ModelTag::Type2(a) | ModelTag::TrkModel(a) => a,
    })
}

/// Mass-eliminated cavity model on the bare cavity mode:
/// H̄ = ω_m σ⁺σ⁻ + Δ_α + ω(a†a + ½) + ω_m(1−α)d·A σ^y + α d·Π σ^x − ω_m d²(1−α)² σ^z A².
pub fn build_trk_model(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<TwoLevelModel> {
    if matter.kind != MatterKind::Dipole {
        return Err(Error::Unsupported("the mass-eliminated model exists for the cavity only".into()));
    }
    let alpha = ctx.alpha;
    let beta = 1.0 - alpha;
    let (omega, lam) = (ctx.omega, ctx.lam);
    let q = matter.coupling_charge;
    let d = q * matter.phi[(0, 1)];
    let omega_m = matter.eps(1, 0);
    let eps = [matter.energies[0], matter.energies[1]];
    let self_energy = alpha * alpha * ctx.self_energy_scale() * d * d;
    let mut h = Mat::<f64>::zeros(2 * nc, 2 * nc);
    let qubit = Mat::from_fn(2, 2, |i, j| if i == j { eps[i] + self_energy } else { 0.0 });
    let id_q = Mat::<f64>::identity(2, 2);
    let id_c = Mat::<f64>::identity(nc, nc);
    add_kron(&mut h, 1.0, &qubit, &id_c);
    let osc = Mat::from_fn(nc, nc, |i, j| if i == j { omega * (i as f64 + 0.5) } else { 0.0 });
    add_kron(&mut h, 1.0, &id_q, &osc);
    let sp_minus_sm = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (1, 0) => 1.0,
        (0, 1) => -1.0,
        _ => 0.0,
    });
    add_kron(&mut h, -beta * omega_m * d * lam, &sp_minus_sm, &quad_p_imag(nc));
    let sx = Mat::from_fn(2, 2, |i, j| if i != j { 1.0 } else { 0.0 });
    add_kron(&mut h, alpha * d * omega * lam, &sx, &quad_x(nc));
    let sz = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => -1.0,
        (1, 1) => 1.0,
        _ => 0.0,
    });
    add_kron(&mut h, -omega_m * d * d * beta * beta * lam * lam, &sz, &quad_p_sq(nc));
    let terms = TwoLevelTerms {
        eps,
        omega_c: omega,
        u_plus: 0.0,
        u_minus: 0.0,
        diag_coupling: [0.0, 0.0],
        self_energy: [[self_energy, 0.0], [0.0, self_energy]],
    };
    Ok(TwoLevelModel {
        ctx: ctx.clone(),
        tag: ModelTag::TrkModel(alpha),
        hamiltonian: HermitianOp::from_real(h)?,
        terms,
        nc,
        omega_m,
        phi00: matter.phi[(0, 0)],
        phi11: matter.phi[(1, 1)],
        dipole: block(&matter.phi, q),
        dipole_sq: block(&matter.phi_sq, q * q),
        basis_omega: omega,
    })
}

/// Generator-based U_α = exp(−iα d·A σ^x) on the (qubit ⊗ bare Fock) space.
pub fn trk_gauge_unitary(model: &TwoLevelModel, alpha: f64) -> Result<crate::operator::Operator> {
    use crate::operator::{expm_antihermitian, Operator};
    let d = model.dipole[0][1];
    let sx = Operator::from_fn_real(2, |i, j| if i != j { 1.0 } else { 0.0 });
    let p_imag = Operator::from_real(quad_p_imag(model.nc))?;
    let generator = sx.kron(&p_imag).scale(-alpha * d * model.ctx.lam);
    expm_antihermitian(&generator)
}

/// Total excitation operator σ⁺σ⁻ + c†c on the model space.
pub fn excitation_number(nc: usize) -> HermitianOp {
    let diag: Vec<f64> = (0..2).flat_map(|q| (0..nc).map(move |n| (q + n) as f64)).collect();
    HermitianOp::diagonal(&diag)
}

/// Von Neumann entropy of the qubit reduced state of a (qubit ⊗ Fock) vector.
pub fn entanglement_entropy(state: &[f64], nc: usize) -> f64 {
    let (top, bottom) = state.split_at(nc);
    let norm2: f64 = state.iter().map(|x| x * x).sum();
    let r00 = top.iter().map(|x| x * x).sum::<f64>() / norm2;
    let r11 = bottom.iter().map(|x| x * x).sum::<f64>() / norm2;
    let r01 = top.iter().zip(bottom).map(|(a, b)| a * b).sum::<f64>() / norm2;
    let mean = 0.5 * (r00 + r11);
    let disc = (0.25 * (r00 - r11).powi(2) + r01 * r01).sqrt();
    [mean + disc, mean - disc]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}
