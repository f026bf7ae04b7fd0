//! Second-order Schrieffer-Wolff level shifts of the α-gauge Hamiltonian.
//!
//! With Ω = ω_α and g_nm = D_nm[(1−α)ε_nm + αω_α]/√(2ω_αL), where the charge part
//! is taken from the numeric matrix K_nm = ε_nm·D_nm,
//!
//! κ_n = Σ_m |g_nm|²/(ε_nm − Ω),  χ_n = 2 Σ_m |g_nm|² ε_nm/(ε_nm² − Ω²).

use crate::error::{Error, Result};
use crate::gauge::{build_exact, GaugeContext, SquareConvention};
use crate::matter::MatterSpectrum;
use serde::{Deserialize, Serialize};

/// Relative detuning below which a contributing denominator is flagged.
pub const NEAR_RESONANCE: f64 = 0.05;

/// Relative detuning below which a denominator is treated as singular.
pub const SINGULAR: f64 = 1e-9;

/// Lamb-type and ac-Stark shifts of the lowest material levels in one gauge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersiveShifts {
    pub alpha: f64,
    /// Oscillator frequency Ω = ω_α.
    pub omega: f64,
    pub kappa: Vec<f64>,
    pub chi: Vec<f64>,
    /// Level n has a contributing m with |ε_nm ∓ Ω| < 0.05·Ω.
    pub near_resonant: Vec<bool>,
}

/// Contribution of one intermediate level m to κ_n and χ_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSummand {
    pub m: usize,
    pub coupling: f64,
    pub kappa: f64,
    pub chi: f64,
    pub near_resonant: bool,
}

/// Coupling constant g_nm in gauge α.
pub fn coupling(matter: &MatterSpectrum, ctx: &GaugeContext, k: &faer::Mat<f64>, n: usize, m: usize) -> f64 {
    let alpha = ctx.alpha;
    let oa = ctx.omega_alpha_at(alpha);
    let d = matter.coupling_charge * matter.phi[(n, m)];
    ctx.lam * (ctx.omega / (2.0 * oa)).sqrt() * ((1.0 - alpha) * k[(n, m)] + alpha * oa * d)
}

/// Per-m contributions to the shifts of level n.
pub fn summands(matter: &MatterSpectrum, ctx: &GaugeContext, n: usize) -> Result<Vec<ShiftSummand>> {
    if n >= matter.nkeep() {
        return Err(Error::InvalidDimension(format!("level {n} not kept ({} levels)", matter.nkeep())));
    }
    let omega = ctx.omega_alpha_at(ctx.alpha);
    let k = matter.charge_coupling();
    (0..matter.nkeep())
        .map(|m| {
            let g = coupling(matter, ctx, &k, n, m);
            let e = matter.eps(n, m);
            let g2 = g * g;
            let (minus, plus) = (e - omega, e + omega);
            let involved = g2 != 0.0;
            if involved && (minus.abs() < SINGULAR * omega || plus.abs() < SINGULAR * omega) {
                let value = if minus.abs() < plus.abs() { minus } else { plus };
                return Err(Error::SingularDenominator { n, m, value });
            }
            let near = involved && (minus.abs() < NEAR_RESONANCE * omega || plus.abs() < NEAR_RESONANCE * omega);
            Ok(ShiftSummand {
                m,
                coupling: g,
                kappa: g2 / minus,
                chi: 2.0 * g2 * e / (minus * plus),
                near_resonant: near,
            })
        })
        .collect()
}

/// κ_n and χ_n for n ≤ n_max, summed over every kept level.
pub fn sw_shifts(matter: &MatterSpectrum, ctx: &GaugeContext, n_max: usize) -> Result<DispersiveShifts> {
    if n_max >= matter.nkeep() {
        return Err(Error::InvalidDimension(format!(
            "n_max {n_max} must be below the {} kept levels",
            matter.nkeep()
        )));
    }
    let mut out = DispersiveShifts {
        alpha: ctx.alpha,
        omega: ctx.omega_alpha_at(ctx.alpha),
        kappa: Vec::with_capacity(n_max + 1),
        chi: Vec::with_capacity(n_max + 1),
        near_resonant: Vec::with_capacity(n_max + 1),
    };
    for n in 0..=n_max {
        let terms = summands(matter, ctx, n)?;
        out.kappa.push(terms.iter().map(|t| t.kappa).sum());
        out.chi.push(terms.iter().map(|t| t.chi).sum());
        out.near_resonant.push(terms.iter().any(|t| t.near_resonant));
    }
    Ok(out)
}

/// Exact ground-level shift relative to the unperturbed ground energy of gauge α:
/// E_G − ε_0 − ω_α/2 − α²(Pφ²P)_00·q²/(2L), the quantity κ_0 approximates.
pub fn exact_ground_shift(matter: &MatterSpectrum, ctx: &GaugeContext, nc: usize) -> Result<f64> {
    let h = build_exact(matter, ctx, nc, SquareConvention::FullSquare)?;
    let e0 = h.eigenvalues()?[0];
    let q = matter.coupling_charge;
    let unperturbed = matter.energies[0]
        + 0.5 * ctx.omega_alpha_at(ctx.alpha)
        + ctx.alpha * ctx.alpha * ctx.self_energy_scale() * q * q * matter.phi_sq[(0, 0)];
    Ok(e0 - unperturbed)
}
