//! Bare material Hamiltonians: the fluxonium and a one-dimensional dipole.
//!
//! Units: ħ = 1, energies in μeV, and the Cooper-pair charge 2e = 1, so the
//! fluxonium phase ϕ̂ and number n̂ satisfy [ϕ̂, n̂] = i and the charging term
//! reads 4E_c n̂². The flux-like operator of the material is called `phi`
//! and its conjugate momentum `xi`, for the fluxonium and the dipole alike.

use crate::error::{Error, Result};
use crate::operator::{quad_p_imag, quad_x, quad_x_sq, HermitianOp};
use faer::{c64, Mat};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative change of the highest kept level tolerated when the basis doubles.
pub const BASIS_TOL: f64 = 1e-8;

/// Physical inputs of the fluxonium-LC circuit plus numerical cutoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Charging energy E_c (μeV).
    pub ec: f64,
    /// Josephson energy E_J (μeV).
    pub ej: f64,
    /// Inductive energy E_l (μeV).
    pub el: f64,
    /// External flux as a phase (radians).
    pub flux_ext: f64,
    /// Detuning δ = ω/ω_m.
    pub delta: f64,
    /// Normalized coupling η = g/ω.
    pub eta: f64,
    /// Oscillator-basis size of the bare fluxonium.
    pub nm: usize,
    /// Number of kept fluxonium levels.
    pub nkeep: usize,
    /// Fock-space dimension of the LC mode.
    pub nc: usize,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            ec: 3.3,
            ej: 3.3,
            el: 0.33,
            flux_ext: PI,
            delta: 5.0,
            eta: 1.0,
            nm: 120,
            nkeep: 20,
            nc: 60,
        }
    }
}

impl CircuitParams {
    /// The circuit energies used throughout (E_J = 10 E_l = E_c) at maximal frustration.
    pub fn reference(delta: f64, eta: f64) -> Self {
        CircuitParams { delta, eta, ..Default::default() }
    }

    pub fn with_cutoffs(mut self, nm: usize, nkeep: usize, nc: usize) -> Self {
        self.nm = nm;
        self.nkeep = nkeep;
        self.nc = nc;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.ec > 0.0 && self.ec.is_finite()) {
            return bad("E_c must be positive");
        }
        if !(self.el > 0.0 && self.el.is_finite()) {
            return bad("E_l must be positive");
        }
        if !(self.ej >= 0.0 && self.ej.is_finite()) {
            return bad("E_J must be non-negative");
        }
        if !self.flux_ext.is_finite() {
            return bad("flux_ext must be finite");
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive");
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta must be non-negative");
        }
        if self.nkeep < 2 {
            return bad("nkeep must be at least 2");
        }
        if self.nm < 4 * self.nkeep {
            return bad("nm must be at least 4 * nkeep");
        }
        if self.nc < 4 {
            return bad("nc must be at least 4");
        }
        Ok(())
    }

    pub fn composite_dim(&self) -> usize {
        self.nkeep * self.nc
    }
}

/// Which material model produced a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatterKind {
    Fluxonium,
    Dipole,
}

/// Material eigenenergies and α-independent matrix elements in the material eigenbasis.
#[derive(Clone, Debug)]
pub struct MatterSpectrum {
    pub kind: MatterKind,
    /// ε_n, ascending.
    pub energies: Vec<f64>,
    /// φ_nm (phase or position), real with φ_{n,n+1} ≥ 0.
    pub phi: Mat<f64>,
    /// Kept block of the full operator square, (φ²)_nm.
    pub phi_sq: Mat<f64>,
    /// Imaginary part of the conjugate momentum: ξ_nm = i·xi_imag_nm.
    pub xi_imag: Mat<f64>,
    /// Effective mass in the identity ξ_nm = i·m_eff·ε_nm·φ_nm (1/(8E_c) or m).
    pub m_eff: f64,
    /// Charge multiplying φ in the light-matter coupling (1 for the circuit, −e for the dipole).
    pub coupling_charge: f64,
    /// Reference qubit transition ε_1 − ε_0 (at maximal frustration for the circuit).
    pub omega_m: f64,
    /// Reference φ_01 (at maximal frustration for the circuit).
    pub varphi: f64,
    /// ε_0 of this spectrum.
    pub epsilon0: f64,
}

impl MatterSpectrum {
    pub fn nkeep(&self) -> usize {
        self.energies.len()
    }

    /// ε_n − ε_m.
    pub fn eps(&self, n: usize, m: usize) -> f64 {
        self.energies[n] - self.energies[m]
    }

    pub fn xi(&self, n: usize, m: usize) -> c64 {
        c64::new(0.0, self.xi_imag[(n, m)])
    }

    /// Coupling dipole q·φ with its reference value q·varphi.
    pub fn coupling_dipole(&self) -> Mat<f64> {
        let q = self.coupling_charge;
        Mat::from_fn(self.nkeep(), self.nkeep(), |i, j| q * self.phi[(i, j)])
    }

    pub fn dipole_ref(&self) -> f64 {
        self.coupling_charge * self.varphi
    }

    /// Real matrix K with K_nm = q·xi_imag_nm/m_eff, which equals ε_nm·q·φ_nm for an exact basis.
    pub fn charge_coupling(&self) -> Mat<f64> {
        let s = self.coupling_charge / self.m_eff;
        Mat::from_fn(self.nkeep(), self.nkeep(), |i, j| s * self.xi_imag[(i, j)])
    }

    /// The lowest `k` levels of this spectrum.
    pub fn truncate(&self, k: usize) -> Result<MatterSpectrum> {
        if k < 1 || k > self.nkeep() {
            return Err(Error::InvalidDimension(format!(
                "cannot keep {k} of {} levels",
                self.nkeep()
            )));
        }
        let sub = |m: &Mat<f64>| Mat::from_fn(k, k, |i, j| m[(i, j)]);
        Ok(MatterSpectrum {
            energies: self.energies[..k].to_vec(),
            phi: sub(&self.phi),
            phi_sq: sub(&self.phi_sq),
            xi_imag: sub(&self.xi_imag),
            ..self.clone()
        })
    }

    /// Σ_r (ε_r − ε_s)|φ_rs|² over the kept levels; equals 1/(2 m_eff) for a complete basis.
    pub fn trk_sum(&self, s: usize) -> f64 {
        (0..self.nkeep()).map(|r| self.eps(r, s) * self.phi[(r, s)].powi(2)).sum()
    }

    /// Largest relative violation of ξ_nm = i·m_eff·ε_nm·φ_nm over the leading `k` levels.
    pub fn momentum_identity_defect(&self, k: usize) -> f64 {
        let k = k.min(self.nkeep());
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for n in 0..k {
            for m in 0..k {
                let expected = self.m_eff * self.eps(n, m) * self.phi[(n, m)];
                scale = scale.max(expected.abs());
                worst = worst.max((self.xi_imag[(n, m)] - expected).abs());
            }
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// Kept block of φ as a Hermitian operator.
    pub fn phi_op(&self) -> Result<HermitianOp> {
        HermitianOp::from_real(self.phi.clone())
    }
}

/// Normalized generalized-Laguerre values ℓ_n^{(k)}(x) = √(n!/(n+k)!)·x^{k/2}·e^{−x/2}·L_n^{(k)}(x)
/// for n = 0..count.
fn normalized_laguerre(k: usize, x: f64, count: usize) -> Vec<f64> {
    let kf = k as f64;
    let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    let l0 = if x == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * kf * x.ln() - 0.5 * x - 0.5 * ln_fact).exp()
    };
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(l0);
    if count == 1 {
        return out;
    }
    out.push(l0 * (1.0 + kf - x) / (kf + 1.0).sqrt());
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - x) * out[n] - (nf * (nf + kf)).sqrt() * out[n - 1])
            / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
        out.push(next);
    }
    out
}

/// Oscillator-basis matrices of cos(λX̂) and sin(λX̂) with X̂ = b + b†.
pub fn displacement_cos_sin(lambda: f64, dim: usize) -> (Mat<f64>, Mat<f64>) {
    let x = lambda * lambda;
    let mut c = Mat::zeros(dim, dim);
    let mut s = Mat::zeros(dim, dim);
    for k in 0..dim {
        let ell = normalized_laguerre(k, x, dim - k);
        let (re, im) = match k % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        for (n, &v) in ell.iter().enumerate() {
            let m = n + k;
            c[(n, m)] = re * v;
            c[(m, n)] = re * v;
            s[(n, m)] = im * v;
            s[(m, n)] = im * v;
        }
    }
    (c, s)
}

/// Zero-point amplitude of the phase in the oscillator basis of 4E_c n̂² + E_l ϕ̂²/2.
pub fn phase_zpf(ec: f64, el: f64) -> f64 {
    (8.0 * ec / el).powf(0.25) / 2f64.sqrt()
}

struct Diagonalized {
    energies: Vec<f64>,
    phi: Mat<f64>,
    phi_sq: Mat<f64>,
    xi_imag: Mat<f64>,
}

/// Projects basis-space operators onto the lowest `nkeep` eigenvectors and fixes
/// the sign convention φ_{n,n+1} ≥ 0.
fn project_kept(
    h: Mat<f64>,
    nkeep: usize,
    x: &Mat<f64>,
    x_sq: &Mat<f64>,
    p_imag: &Mat<f64>,
) -> Result<Diagonalized> {
    let es = HermitianOp::from_real(h)?.eig()?;
    let u = es.vectors.as_real().expect("real input gives real vectors");
    let n = u.nrows();
    let v = Mat::from_fn(n, nkeep, |i, j| u[(i, j)]);
    let sandwich = |op: &Mat<f64>| -> Mat<f64> { v.transpose() * (op * &v) };
    let mut phi = sandwich(x);
    let mut phi_sq = sandwich(x_sq);
    let mut xi_imag = sandwich(p_imag);
    let scale = (0..nkeep).map(|i| (0..nkeep).map(|j| phi[(i, j)].abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    let mut signs = vec![1.0f64; nkeep];
    for k in 1..nkeep {
        let link = phi[(k - 1, k)];
        let sign = if link.abs() <= 1e-14 * scale { 1.0 } else { link.signum() };
        signs[k] = signs[k - 1] * sign;
    }
    for m in [&mut phi, &mut phi_sq, &mut xi_imag] {
        for i in 0..nkeep {
            for j in 0..nkeep {
                m[(i, j)] *= signs[i] * signs[j];
            }
        }
    }
    symmetrize(&mut phi, 1.0);
    symmetrize(&mut phi_sq, 1.0);
    symmetrize(&mut xi_imag, -1.0);
    Ok(Diagonalized { energies: es.values[..nkeep].to_vec(), phi, phi_sq, xi_imag })
}

fn symmetrize(m: &mut Mat<f64>, parity: f64) {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let avg = 0.5 * (m[(i, j)] + parity * m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = parity * avg;
        }
    }
}

fn fluxonium_raw(ec: f64, ej: f64, el: f64, flux_ext: f64, nm: usize, nkeep: usize) -> Result<Diagonalized> {
    let omega_p = (8.0 * ec * el).sqrt();
    let zpf = phase_zpf(ec, el);
    let (cos_m, sin_m) = displacement_cos_sin(zpf, nm);
    let (cf, sf) = (flux_ext.cos(), flux_ext.sin());
    let h = Mat::from_fn(nm, nm, |i, j| {
        let diag = if i == j { omega_p * (i as f64 + 0.5) } else { 0.0 };
        diag - ej * (cf * cos_m[(i, j)] + sf * sin_m[(i, j)])
    });
    let s2 = 2f64.sqrt();
    let x = quad_x(nm);
    let phi_op = Mat::from_fn(nm, nm, |i, j| zpf * s2 * x[(i, j)]);
    let x_sq = quad_x_sq(nm);
    let phi_sq_op = Mat::from_fn(nm, nm, |i, j| 2.0 * zpf * zpf * x_sq[(i, j)]);
    let p = quad_p_imag(nm);
    let n_zpf = 1.0 / (2.0 * zpf);
    let n_op = Mat::from_fn(nm, nm, |i, j| n_zpf * s2 * p[(i, j)]);
    project_kept(h, nkeep, &phi_op, &phi_sq_op, &n_op)
}

/// Fluxonium spectrum 4E_c n̂² + (E_l/2)ϕ̂² − E_J cos(ϕ̂ − flux_ext) in the oscillator
/// basis of its quadratic part; the reference ω_m and varphi are taken at flux_ext = π.
pub fn build_fluxonium(params: &CircuitParams) -> Result<MatterSpectrum> {
    params.validate()?;
    let CircuitParams { ec, ej, el, flux_ext, nm, nkeep, .. } = *params;
    let base = fluxonium_raw(ec, ej, el, flux_ext, nm, nkeep)?;
    let doubled = fluxonium_raw(ec, ej, el, flux_ext, 2 * nm, nkeep)?;
    let (prev, cur) = (base.energies[nkeep - 1], doubled.energies[nkeep - 1]);
    if (prev - cur).abs() > BASIS_TOL * cur.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence {
            what: format!("fluxonium level {} under basis doubling {nm} -> {}", nkeep - 1, 2 * nm),
            previous: prev,
            current: cur,
        });
    }
    let (omega_m, varphi) = if flux_ext == PI {
        (base.energies[1] - base.energies[0], base.phi[(0, 1)])
    } else {
        let frustrated = fluxonium_raw(ec, ej, el, PI, nm, 2)?;
        (frustrated.energies[1] - frustrated.energies[0], frustrated.phi[(0, 1)])
    };
    Ok(MatterSpectrum {
        kind: MatterKind::Fluxonium,
        epsilon0: base.energies[0],
        energies: base.energies,
        phi: base.phi,
        phi_sq: base.phi_sq,
        xi_imag: base.xi_imag,
        m_eff: 1.0 / (8.0 * ec),
        coupling_charge: 1.0,
        omega_m,
        varphi,
    })
}

/// Potential families for the one-dimensional dipole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    /// V = k x²/2.
    Harmonic { stiffness: f64 },
    /// V = a2 x² + a4 x⁴.
    Quartic { a2: f64, a4: f64 },
    /// V tabulated on a uniform grid symmetric about 0.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
}

/// A particle of mass m and charge e in a one-dimensional potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleParams {
    pub mass: f64,
    pub charge: f64,
    pub potential: Potential,
    /// Number of grid points (ignored for tabulated potentials).
    pub grid_points: usize,
    /// Grid half-width (ignored for tabulated potentials).
    pub x_max: f64,
    pub nkeep: usize,
}

impl DipoleParams {
    pub fn harmonic(mass: f64, stiffness: f64, nkeep: usize) -> Self {
        let omega = (stiffness / mass).sqrt();
        let width = 1.0 / (mass * omega).sqrt();
        DipoleParams {
            mass,
            charge: 1.0,
            potential: Potential::Harmonic { stiffness },
            grid_points: 161,
            x_max: width * (4.0 * nkeep as f64 + 40.0).sqrt() * 1.6,
            nkeep,
        }
    }

    fn grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.potential {
            Potential::Tabulated { x, v } => {
                if x.len() != v.len() || x.len() < 3 {
                    return Err(Error::InvalidParameter("tabulated potential needs matching x and V of length >= 3".into()));
                }
                let n = x.len();
                let h = x[1] - x[0];
                for j in 0..n {
                    if (x[j] + x[n - 1 - j]).abs() > 1e-9 * h.abs() {
                        return Err(Error::InvalidParameter("potential grid is not symmetric about 0".into()));
                    }
                    if j > 0 && ((x[j] - x[j - 1]) - h).abs() > 1e-9 * h.abs() {
                        return Err(Error::InvalidParameter("potential grid is not uniform".into()));
                    }
                }
                if v.iter().any(|e| !e.is_finite()) {
                    return Err(Error::InvalidParameter("potential must be finite (bounded below)".into()));
                }
                Ok((x.clone(), v.clone()))
            }
            family => {
                match family {
                    Potential::Harmonic { stiffness } if !(*stiffness > 0.0) => {
                        return Err(Error::InvalidParameter("harmonic stiffness must be positive".into()))
                    }
                    Potential::Quartic { a2, a4 } if !(*a4 > 0.0 || (*a4 == 0.0 && *a2 > 0.0)) => {
                        return Err(Error::InvalidParameter("quartic potential must be bounded below".into()))
                    }
                    _ => {}
                }
                let n = self.grid_points;
                if n < 3 || !(self.x_max > 0.0) {
                    return Err(Error::InvalidParameter("grid needs >= 3 points and positive x_max".into()));
                }
                let h = 2.0 * self.x_max / (n - 1) as f64;
                let x: Vec<f64> = (0..n).map(|j| -self.x_max + h * j as f64).collect();
                let v = x.iter().map(|&x| potential_value(family, x)).collect();
                Ok((x, v))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        if !self.charge.is_finite() {
            return Err(Error::InvalidParameter("charge must be finite".into()));
        }
        if self.nkeep < 2 {
            return Err(Error::InvalidParameter("nkeep must be at least 2".into()));
        }
        let (x, _) = self.grid()?;
        if x.len() < 4 * self.nkeep {
            return Err(Error::InvalidParameter("grid must have at least 4 * nkeep points".into()));
        }
        Ok(())
    }

    /// The same system with `extra(x)` added to the potential, tabulated on the current grid.
    pub fn with_added_potential(&self, extra: impl Fn(f64) -> f64) -> Result<DipoleParams> {
        let (x, v) = self.grid()?;
        let v = x.iter().zip(&v).map(|(&x, &v)| v + extra(x)).collect();
        Ok(DipoleParams { potential: Potential::Tabulated { x, v }, ..self.clone() })
    }
}

fn potential_value(p: &Potential, x: f64) -> f64 {
    match p {
        Potential::Harmonic { stiffness } => 0.5 * stiffness * x * x,
        Potential::Quartic { a2, a4 } => a2 * x * x + a4 * x.powi(4),
        Potential::Tabulated { .. } => unreachable!("tabulated potentials are evaluated on their grid"),
    }
}

/// Sinc-DVR kinetic and first-derivative matrices on a uniform grid of spacing h.
fn dvr_matrices(n: usize, h: f64, mass: f64) -> (Mat<f64>, Mat<f64>) {
    let t = Mat::from_fn(n, n, |i, j| {
        if i == j {
            PI * PI / 3.0 / (2.0 * mass * h * h)
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * 2.0 / (d * d) / (2.0 * mass * h * h)
        }
    });
    let deriv = Mat::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign / (d * h)
        }
    });
    (t, deriv)
}

fn grid_raw(x: &[f64], v: &[f64], mass: f64, nkeep: usize) -> Result<Diagonalized> {
    let n = x.len();
    let h = x[1] - x[0];
    let (t, deriv) = dvr_matrices(n, h, mass);
    let ham = Mat::from_fn(n, n, |i, j| t[(i, j)] + if i == j { v[i] } else { 0.0 });
    let xm = Mat::from_fn(n, n, |i, j| if i == j { x[i] } else { 0.0 });
    let x2 = Mat::from_fn(n, n, |i, j| if i == j { x[i] * x[i] } else { 0.0 });
    let p_imag = Mat::from_fn(n, n, |i, j| -deriv[(i, j)]);
    project_kept(ham, nkeep, &xm, &x2, &p_imag)
}

/// Eigenvalues and matrix elements of p²/2m + V(x) on a sinc-DVR grid.
pub fn build_dipole(params: &DipoleParams) -> Result<MatterSpectrum> {
    params.validate()?;
    let (x, v) = params.grid()?;
    let base = grid_raw(&x, &v, params.mass, params.nkeep)?;
    if let Some((xd, vd)) = refine_grid(params, &x) {
        let fine = grid_raw(&xd, &vd, params.mass, params.nkeep)?;
        let k = params.nkeep - 1;
        let (prev, cur) = (base.energies[k], fine.energies[k]);
        let scale = cur.abs().max((base.energies[k] - base.energies[0]).abs());
        if (prev - cur).abs() > BASIS_TOL * scale {
            return Err(Error::Convergence {
                what: format!("dipole level {k} under grid doubling"),
                previous: prev,
                current: cur,
            });
        }
    }
    Ok(MatterSpectrum {
        kind: MatterKind::Dipole,
        epsilon0: base.energies[0],
        omega_m: base.energies[1] - base.energies[0],
        varphi: base.phi[(0, 1)],
        energies: base.energies,
        phi: base.phi,
        phi_sq: base.phi_sq,
        xi_imag: base.xi_imag,
        m_eff: params.mass,
        coupling_charge: -params.charge,
    })
}

/// The grid with spacing halved, or `None` for tabulated potentials, which cannot be refined.
fn refine_grid(params: &DipoleParams, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    if matches!(params.potential, Potential::Tabulated { .. }) {
        return None;
    }
    let h = (x[1] - x[0]) / 2.0;
    let xd: Vec<f64> = (0..2 * x.len() - 1).map(|j| x[0] + h * j as f64).collect();
    let vd = xd.iter().map(|&x| potential_value(&params.potential, x)).collect();
    Some((xd, vd))
}

/// Lowest `count` fluxonium energies from a sinc-DVR phase grid, independent of the oscillator basis.
pub fn phase_grid_energies(params: &CircuitParams, grid_points: usize, phi_max: f64, count: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let h = 2.0 * phi_max / (grid_points - 1) as f64;
    let x: Vec<f64> = (0..grid_points).map(|j| -phi_max + h * j as f64).collect();
    let v: Vec<f64> = x
        .iter()
        .map(|&p| 0.5 * params.el * p * p - params.ej * (p - params.flux_ext).cos())
        .collect();
    let mass = 1.0 / (8.0 * params.ec);
    let (t, _) = dvr_matrices(grid_points, h, mass);
    let ham = Mat::from_fn(grid_points, grid_points, |i, j| t[(i, j)] + if i == j { v[i] } else { 0.0 });
    let vals = HermitianOp::from_real(ham)?.eigenvalues()?;
    Ok(vals[..count].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn harmonic_fluxonium_limit() {
        let p = CircuitParams { ej: 0.0, flux_ext: 1.1, nkeep: 10, nm: 60, ..Default::default() };
        let m = build_fluxonium(&p).unwrap();
        let w = (8.0 * p.ec * p.el).sqrt();
        for n in 0..10 {
            assert!(rel(m.energies[n], m.energies[0] + n as f64 * w) < 1e-8);
        }
        assert!(rel(m.phi[(0, 1)], phase_zpf(p.ec, p.el)) < 1e-8);
    }

    #[test]
    fn frustrated_fluxonium_parity_and_identity() {
        let p = CircuitParams::default();
        let m = build_fluxonium(&p).unwrap();
        assert!(m.phi[(0, 0)].abs() < 1e-9 * m.varphi);
        assert!(m.phi[(1, 1)].abs() < 1e-9 * m.varphi);
        assert!(m.momentum_identity_defect(m.nkeep()) < 1e-7, "{}", m.momentum_identity_defect(m.nkeep()));
        let max_xi = (0..m.nkeep()).flat_map(|i| (0..m.nkeep()).map(move |j| (i, j))).map(|(i, j)| m.xi_imag[(i, j)].abs()).fold(0.0, f64::max);
        for n in 0..m.nkeep() {
            assert!(m.xi_imag[(n, n)].abs() <= 1e-9 * max_xi);
        }
        for n in 0..m.nkeep() - 1 {
            assert!(m.phi[(n, n + 1)] >= 0.0);
        }
        assert!((m.omega_m - 1.6355567).abs() < 1e-6, "{}", m.omega_m);
        assert!((m.varphi - 2.5844537).abs() < 1e-6, "{}", m.varphi);
    }

    #[test]
    fn laguerre_elements_match_zero_displacement() {
        let (c, s) = displacement_cos_sin(0.0, 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(c[(i, j)], if i == j { 1.0 } else { 0.0 });
                assert_eq!(s[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn laguerre_vacuum_overlap() {
        let lambda: f64 = 0.7;
        let (c, s) = displacement_cos_sin(lambda, 8);
        assert!((c[(0, 0)] - (-lambda * lambda / 2.0).exp()).abs() < 1e-15);
        assert!((s[(0, 1)] - lambda * (-lambda * lambda / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn harmonic_dipole() {
        let m = build_dipole(&DipoleParams::harmonic(1.0, 1.0, 8)).unwrap();
        for n in 0..8 {
            assert!((m.energies[n] - m.energies[0] - n as f64).abs() < 1e-9);
        }
        assert!((m.phi[(0, 1)] - 0.5f64.sqrt()).abs() < 1e-9);
        for n in 0..8 {
            assert!(m.phi[(n, n)].abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = CircuitParams { nm: 10, nkeep: 20, ..Default::default() };
        assert!(matches!(build_fluxonium(&p), Err(Error::InvalidParameter(_))));
        let mut d = DipoleParams::harmonic(1.0, 1.0, 4);
        d.potential = Potential::Quartic { a2: 1.0, a4: -1.0 };
        assert!(d.validate().is_err());
    }
}
