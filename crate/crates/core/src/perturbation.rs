//! Second-order level formulas of the two-level models and the mass-elimination
//! (TRK) gauge-invariance check.

use crate::error::{Error, Result};
use crate::gauge::GaugeContext;
use serde::{Deserialize, Serialize};

/// Second-order ground and first excited energies of a two-level model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderLevels {
    pub ground: f64,
    pub excited: f64,
}

/// Closed-form second-order levels of the two-level model at maximal frustration:
/// ground ω_α/2 + Δ_α − (u⁺)²/(ω_m+ω_α), excited ω_m + ω_α/2 + Δ_α + (u⁻)²/(ω_m−ω_α).
pub fn second_order_levels(ctx: &GaugeContext) -> Result<SecondOrderLevels> {
    let (wm, wa) = (ctx.omega_m, ctx.omega_alpha);
    if wm == wa {
        return Err(Error::DegenerateDenominator(format!(
            "qubit and renormalized oscillator frequencies coincide at {wm}"
        )));
    }
    let base = 0.5 * wa + ctx.delta_alpha;
    Ok(SecondOrderLevels {
        ground: base - ctx.u_plus * ctx.u_plus / (wm + wa),
        excited: wm + base + ctx.u_minus * ctx.u_minus / (wm - wa),
    })
}

/// A two-level dipole in a single-mode cavity described by its transition data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrkParams {
    /// Transition frequency ω_m.
    pub omega_m: f64,
    /// Transition dipole d = d_01.
    pub d: f64,
    /// ω/ω_m.
    pub delta: f64,
    /// Coupling ratio; the cavity volume is v = d²/(2ωη²).
    pub eta: f64,
    /// Ground energy ε_0.
    pub epsilon0: f64,
}

impl TrkParams {
    pub fn omega(&self) -> f64 {
        self.delta * self.omega_m
    }

    /// Squared field amplitude 1/(2ωv) = η²/d².
    pub fn field_sq(&self) -> f64 {
        (self.eta / self.d).powi(2)
    }

    /// e²/m fixed by the ground-state relation ω_m d² = e²/(2m).
    pub fn charge_sq_over_mass(&self) -> f64 {
        2.0 * self.omega_m * self.d * self.d
    }

    fn validate(&self) -> Result<()> {
        let ok = self.omega_m > 0.0 && self.d != 0.0 && self.delta > 0.0 && self.eta >= 0.0;
        if !ok || ![self.omega_m, self.d, self.delta, self.eta, self.epsilon0].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid two-level cavity parameters {self:?}")));
        }
        if self.delta == 1.0 {
            return Err(Error::DegenerateDenominator("resonant cavity (delta = 1)".into()));
        }
        Ok(())
    }

    /// Raw second-order levels in gauge α with e²/m = `charge_sq_over_mass`.
    pub fn raw_levels(&self, alpha: f64, charge_sq_over_mass: f64) -> SecondOrderLevels {
        let (wm, w, d) = (self.omega_m, self.omega(), self.d);
        let beta = 1.0 - alpha;
        let g2 = self.field_sq();
        let wa = (w * w + 2.0 * charge_sq_over_mass * beta * beta * w * g2).sqrt();
        let pref = d * d * g2 * w / wa;
        let up2 = pref * (alpha * wa - beta * wm).powi(2);
        let um2 = pref * (alpha * wa + beta * wm).powi(2);
        let delta_alpha = self.epsilon0 + alpha * alpha * d * d * w * g2;
        SecondOrderLevels {
            ground: 0.5 * wa + delta_alpha - up2 / (wm + wa),
            excited: wm + 0.5 * wa + delta_alpha + um2 / (wm - wa),
        }
    }

    /// Order-d² levels after eliminating the mass with ω_m d² = e²/(2m) for the
    /// ground state and ω_m d² = −e²/(2m) for the excited state.
    pub fn substituted_levels(&self, alpha: f64) -> SecondOrderLevels {
        let (wm, w, d) = (self.omega_m, self.omega(), self.d);
        let beta = 1.0 - alpha;
        let c = d * d * self.field_sq();
        let ground = beta * beta * wm + alpha * alpha * w - (alpha * w - beta * wm).powi(2) / (wm + w);
        let excited = -beta * beta * wm + alpha * alpha * w + (alpha * w + beta * wm).powi(2) / (wm - w);
        SecondOrderLevels {
            ground: self.epsilon0 + 0.5 * w + c * ground,
            excited: self.epsilon0 + wm + 0.5 * w + c * excited,
        }
    }
}

/// Outcome of the mass-elimination check over a gauge grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrkReport {
    pub alphas: Vec<f64>,
    pub substituted_ground: Vec<f64>,
    pub substituted_excited: Vec<f64>,
    pub raw_ground: Vec<f64>,
    pub raw_excited: Vec<f64>,
    /// Relative spreads (max − min)/|mean| over the grid.
    pub substituted_spread: f64,
    pub raw_ground_spread: f64,
    pub raw_excited_spread: f64,
    /// Two-level sums Σ_r ε_rs d_rs² for s = 0 and s = 1.
    pub trk_sum_ground: f64,
    pub trk_sum_excited: f64,
    /// The excited-state relation forces e²/m < 0.
    pub excited_requires_negative_mass: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance on the post-substitution spread.
pub const TRK_TOLERANCE: f64 = 1e-10;

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        max - min
    } else {
        (max - min) / mean.abs()
    }
}

/// Evaluates substituted and raw order-d² levels on `alphas`.
pub fn trk_invariance_check(params: &TrkParams, alphas: &[f64]) -> Result<TrkReport> {
    params.validate()?;
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty gauge grid".into()));
    }
    let sub: Vec<SecondOrderLevels> = alphas.iter().map(|&a| params.substituted_levels(a)).collect();
    let s = params.charge_sq_over_mass();
    let raw: Vec<SecondOrderLevels> = alphas.iter().map(|&a| params.raw_levels(a, s)).collect();
    let col = |v: &[SecondOrderLevels], f: fn(&SecondOrderLevels) -> f64| v.iter().map(f).collect::<Vec<f64>>();
    let substituted_ground = col(&sub, |l| l.ground);
    let substituted_excited = col(&sub, |l| l.excited);
    let raw_ground = col(&raw, |l| l.ground);
    let raw_excited = col(&raw, |l| l.excited);
    let substituted_spread = spread(&substituted_ground).max(spread(&substituted_excited));
    let d2 = params.d * params.d;
    let trk_sum_ground = params.omega_m * d2;
    let trk_sum_excited = -params.omega_m * d2;
    Ok(TrkReport {
        alphas: alphas.to_vec(),
        raw_ground_spread: spread(&raw_ground),
        raw_excited_spread: spread(&raw_excited),
        substituted_ground,
        substituted_excited,
        raw_ground,
        raw_excited,
        substituted_spread,
        trk_sum_ground,
        trk_sum_excited,
        excited_requires_negative_mass: trk_sum_excited < 0.0,
        tolerance: TRK_TOLERANCE,
        pass: substituted_spread < TRK_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64) -> TrkParams {
        TrkParams { omega_m: 1.3, d: 0.7, delta: 5.0, eta, epsilon0: 0.2 }
    }

    #[test]
    fn raw_and_substituted_agree_at_leading_order_in_ground_state() {
        let p = params(1e-3);
        for a in [0.0, 0.3, 1.0] {
            let raw = p.raw_levels(a, p.charge_sq_over_mass()).ground;
            let sub = p.substituted_levels(a).ground;
            assert!((raw - sub).abs() < 1e-10, "{a}: {raw} vs {sub}");
        }
    }

    #[test]
    fn excited_substitution_matches_negative_mass_evaluation() {
        let p = params(1e-3);
        for a in [0.0, 0.6, 1.0] {
            let raw = p.raw_levels(a, -p.charge_sq_over_mass()).excited;
            let sub = p.substituted_levels(a).excited;
            assert!((raw - sub).abs() < 1e-10, "{a}: {raw} vs {sub}");
        }
    }

    #[test]
    fn resonant_cavity_rejected() {
        let p = TrkParams { delta: 1.0, ..params(0.1) };
        assert!(matches!(trk_invariance_check(&p, &[0.0, 1.0]), Err(Error::DegenerateDenominator(_))));
    }
}
