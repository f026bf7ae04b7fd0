use alphagauge::dispersive::sw_shifts;
use alphagauge::gauge::{build_exact, exact_circuit_spectrum, gauge_unitary};
use alphagauge::matter::{build_fluxonium, phase_grid_energies};
use alphagauge::operator::{squeeze_matrix, Operator};
use alphagauge::perturbation::{second_order_levels, trk_invariance_check, TrkParams};
use alphagauge::sweep::{converge, converge_with_cap, ConvergenceTarget};
use alphagauge::two_level::{build_jc_gauge, build_model, solve_alpha_jc};
use alphagauge::{CircuitParams, Error, GaugeContext, HermitianOp, ModelTag, SquareConvention};
use faer::Mat;

fn small(delta: f64, eta: f64) -> CircuitParams {
    CircuitParams::reference(delta, eta).with_cutoffs(80, 10, 20)
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

#[test]
fn hermitian_eigenvalues_match_jacobi_rotation() {
    let n = 8;
    let entry = |i: usize, j: usize| ((i * 7 + j * 3) as f64).sin() + ((i + j) as f64 * 0.37).cos();
    let sym = |i: usize, j: usize| entry(i.min(j), i.max(j));
    let h = HermitianOp::from_real(Mat::from_fn(n, n, sym)).unwrap();
    let expected = jacobi_eigenvalues((0..n).map(|i| (0..n).map(|j| sym(i, j)).collect()).collect());
    let got = h.eigenvalues().unwrap();
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-12, "{got:?} vs {expected:?}");
    }
}

#[test]
fn squeezed_vacuum_matches_closed_form() {
    let r: f64 = 0.3;
    let s = squeeze_matrix(r, 80).unwrap();
    let mut coeff = 1.0 / r.cosh().sqrt();
    for n in 0..8 {
        assert!((s[(2 * n, 0)] - coeff).abs() < 1e-12, "n = {n}: {} vs {coeff}", s[(2 * n, 0)]);
        assert!(s[(2 * n + 1, 0)].abs() < 1e-14);
        let k = n as f64;
        coeff *= -r.tanh() * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (2.0 * (k + 1.0));
    }
}

#[test]
fn fluxonium_levels_match_phase_grid() {
    let p = CircuitParams::default();
    let m = build_fluxonium(&p).unwrap();
    let grid = phase_grid_energies(&p, 801, 40.0, 8).unwrap();
    for (k, g) in grid.iter().enumerate() {
        assert!((m.energies[k] - g).abs() < 1e-8 * g.abs().max(1.0), "level {k}: {} vs {g}", m.energies[k]);
    }
}

#[test]
fn inductive_fluxonium_is_an_oscillator() {
    let p = CircuitParams { ej: 0.0, ..CircuitParams::default() };
    let m = build_fluxonium(&p).unwrap();
    let w = (8.0 * p.ec * p.el).sqrt();
    for k in 0..10 {
        assert!((m.energies[k] - w * (k as f64 + 0.5)).abs() < 1e-10 * w, "level {k}");
    }
}

#[test]
fn decoupled_exact_spectrum_is_a_sum_of_ladders() {
    let p = small(5.0, 0.0);
    let m = build_fluxonium(&p).unwrap();
    let ctx = GaugeContext::new(&m, p.delta, p.eta, 0.4).unwrap();
    let values = exact_circuit_spectrum(&p, &m, 0.4, false).unwrap().values;
    let mut expected: Vec<f64> = (0..p.nkeep)
        .flat_map(|n| (0..p.nc).map(move |k| (n, k)))
        .map(|(n, k)| m.energies[n] + ctx.omega * (k as f64 + 0.5))
        .collect();
    expected.sort_by(f64::total_cmp);
    for (v, e) in values.iter().zip(&expected).take(20) {
        assert!((v - e).abs() < 1e-10, "{v} vs {e}");
    }
}

#[test]
fn gauge_unitary_is_unitary() {
    let p = small(1.0, 0.5);
    let m = build_fluxonium(&p).unwrap();
    let ctx = GaugeContext::new(&m, p.delta, p.eta, 0.0).unwrap();
    let u = gauge_unitary(&m, &ctx, p.nc, 0.7).unwrap();
    let defect = u.matmul(&u.adjoint()).unwrap().try_sub(&Operator::identity(u.dim())).unwrap().max_abs();
    assert!(defect < 1e-10, "{defect}");
}

/// Closed-form JC ladder: |g,0⟩ plus the doublets of {|e,n−1⟩, |g,n⟩}.
fn jc_ladder(offset: f64, wm: f64, wc: f64, g: f64, count: usize) -> Vec<f64> {
    let mut levels = vec![offset + 0.5 * wc];
    for n in 1..count {
        let a = offset + wm + wc * (n as f64 - 0.5);
        let b = offset + wc * (n as f64 + 0.5);
        let r = (0.25 * (a - b).powi(2) + g * g * n as f64).sqrt();
        levels.push(0.5 * (a + b) - r);
        levels.push(0.5 * (a + b) + r);
    }
    levels.sort_by(f64::total_cmp);
    levels
}

#[test]
fn jc_gauge_model_matches_closed_form_ladder() {
    let p = CircuitParams::reference(5.0, 1.0).with_cutoffs(80, 4, 30);
    let m = build_fluxonium(&p).unwrap();
    let ctx = GaugeContext::new(&m, p.delta, p.eta, 0.0).unwrap();
    let (model, sol) = build_jc_gauge(&m, &ctx, p.nc).unwrap();
    let a = sol.alpha_jc;
    let wc = ctx.omega_alpha_at(a);
    let d = m.coupling_charge * m.phi[(0, 1)];
    let g = d * ctx.lam * (ctx.omega / (2.0 * wc)).sqrt() * (a * wc + (1.0 - a) * m.omega_m);
    let offset = m.epsilon0 + a * a * 0.5 * ctx.omega * ctx.lam * ctx.lam * d * d;
    let expected = jc_ladder(offset, m.omega_m, wc, g, 10);
    let got = model.hamiltonian.eigenvalues().unwrap();
    for k in 0..8 {
        assert!((got[k] - expected[k]).abs() < 1e-10, "level {k}: {} vs {}", got[k], expected[k]);
    }
}

#[test]
fn second_order_levels_match_model_diagonalization_to_fourth_order() {
    let p = CircuitParams::reference(5.0, 0.01).with_cutoffs(80, 4, 20);
    let m = build_fluxonium(&p).unwrap();
    let errors: Vec<f64> = [0.01, 0.02]
        .iter()
        .map(|&eta| {
            let ctx = GaugeContext::new(&m, p.delta, eta, 0.3).unwrap();
            let model = build_model(ModelTag::GeneralAlpha(0.3), &m, &ctx, p.nc).unwrap();
            let exact = model.hamiltonian.eigenvalues().unwrap()[0];
            (second_order_levels(&ctx).unwrap().ground - exact).abs()
        })
        .collect();
    let slope = (errors[1] / errors[0]).log2();
    assert!((slope - 4.0).abs() < 0.5, "{errors:?}: slope {slope}");
}

#[test]
fn raw_excited_level_spread_grows_quadratically() {
    let spreads: Vec<f64> = [0.01, 0.02, 0.04]
        .iter()
        .map(|&eta| {
            let params = TrkParams { omega_m: 1.0, d: 0.8, delta: 3.0, eta, epsilon0: 0.0 };
            let alphas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            trk_invariance_check(&params, &alphas).unwrap().raw_excited_spread
        })
        .collect();
    for w in spreads.windows(2) {
        let slope = (w[1] / w[0]).log2();
        assert!((slope - 2.0).abs() < 0.2, "{spreads:?}");
    }
}

#[test]
fn dispersive_shift_reduces_to_jc_form_in_the_jc_gauge() {
    let p = CircuitParams::reference(5.0, 0.05).with_cutoffs(80, 2, 20);
    let m = build_fluxonium(&p).unwrap();
    let base = GaugeContext::new(&m, p.delta, p.eta, 0.0).unwrap();
    let ctx = base.with_alpha(solve_alpha_jc(&base).unwrap().alpha_jc);
    let shifts = sw_shifts(&m, &ctx, 1).unwrap();
    let wc = ctx.omega_alpha_at(ctx.alpha);
    let d = m.coupling_charge * m.phi[(0, 1)];
    let a = ctx.alpha;
    let g = d * ctx.lam * (ctx.omega / (2.0 * wc)).sqrt() * (a * wc + (1.0 - a) * m.omega_m);
    let expected = g * g / (m.omega_m - wc);
    assert!(shifts.kappa[0].abs() < 1e-14 * expected.abs());
    assert!((shifts.kappa[1] - expected).abs() < 1e-10 * expected.abs(), "{} vs {expected}", shifts.kappa[1]);
}

#[test]
fn decoupled_target_converges_at_the_starting_cutoffs() {
    let p = CircuitParams { ej: 0.0, ..small(5.0, 0.0) };
    let found = converge(&p, ConvergenceTarget { alpha: 1.0, level: 2 }, 1e-9).unwrap();
    assert_eq!(found.params, p);
    assert_eq!(found.trajectory.len(), 3);
    let m = build_fluxonium(&p).unwrap();
    let ctx = GaugeContext::new(&m, p.delta, p.eta, 1.0).unwrap();
    let direct = build_exact(&m, &ctx, p.nc, SquareConvention::FullSquare).unwrap().eigenvalues().unwrap()[2];
    assert!((found.value - direct).abs() < 1e-12);
}

#[test]
fn tight_tolerance_hits_the_dimension_cap() {
    let p = CircuitParams::reference(5.0, 1.0).with_cutoffs(80, 4, 8);
    let err = converge_with_cap(&p, ConvergenceTarget { alpha: 1.0, level: 0 }, 1e-9, 400).unwrap_err();
    match err {
        Error::ConvergenceCap { cap, trajectory, dimension } => {
            assert_eq!(cap, 400);
            assert!(dimension > cap);
            assert!(!trajectory.is_empty());
        }
        other => panic!("unexpected error {other:?}"),
    }
}
