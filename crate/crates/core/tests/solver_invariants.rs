use std::f64::consts::PI;
use std::sync::OnceLock;

use hombridge_core::bound::lower_bound;
use hombridge_core::diagnostics::profile_amplitude;
use hombridge_core::solver::{adaptive_half_length, ContinuationOutcome};
use hombridge_core::{
    continue_in_c, initial_guess, newton_solve, residual, scaled_residual, solve_with_retries, Builtin, Grid, GridPolicy,
    LinearSolver, NonlinearitySpec, Profile, SolveError, SolverConfig, WaveProfile,
};

fn exponential() -> NonlinearitySpec {
    NonlinearitySpec::builtin(Builtin::Exponential)
}

/// The `c = 1.3` wave on `T = 100`, `n = 4096`, shared by several tests.
fn wave13() -> &'static WaveProfile {
    static WAVE: OnceLock<WaveProfile> = OnceLock::new();
    WAVE.get_or_init(|| {
        let g = Grid::new(100.0, 4096).unwrap();
        solve_with_retries(&exponential(), 1.3, &g, &SolverConfig::default(), None).unwrap()
    })
}

#[test]
fn zero_profile_has_zero_residual() {
    let g = Grid::new(10.0, 256).unwrap();
    let r = residual(&exponential(), 1.0, &Profile::zeros(&g)).unwrap();
    assert_eq!(r.sup_norm(), 0.0);
}

#[test]
fn sine_residual_is_at_rounding_level() {
    let f = NonlinearitySpec::parse("u").unwrap();
    let g = Grid::new(PI, 256).unwrap();
    let p = Profile::from_fn(&g, f64::sin);
    let r = residual(&f, 2f64.sqrt(), &p).unwrap().sup_norm();
    // u'''' sums modes up to ξ = 128, so rounding of order ε·128⁴ ≈ 6e-8
    // survives even though the exact residual vanishes
    assert!(r <= 1e-7, "{r:e}");
    // off √2 the residual is (2 − c²)·sin
    let off = residual(&f, 1.4, &p).unwrap().sup_norm();
    assert!((off - (2.0 - 1.96)).abs() < 1e-6, "{off}");
}

/// Second-order finite-difference version of `u'''' + c²u'' + f(u)` on a
/// periodic grid.
fn fd_residual(f: &NonlinearitySpec, c: f64, p: &Profile) -> Vec<f64> {
    let v = p.values();
    let n = v.len();
    let h = p.grid().spacing();
    let at = |j: isize| v[j.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .map(|j| {
            let d2 = (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (h * h);
            let d4 = (at(j + 2) - 4.0 * at(j + 1) + 6.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / h.powi(4);
            d4 + c * c * d2 + f.eval_f(at(j)).unwrap()
        })
        .collect()
}

#[test]
fn residual_agrees_with_finite_differences_at_second_order() {
    let f = exponential();
    let c = 1.1;
    let shape = |s: f64| 0.8 * (-s * s / 8.0).exp() * (1.3 * s).cos() + 0.3 * (-(s - 1.0).powi(2)).exp();
    let mut errors = Vec::new();
    for n in [256, 512, 1024, 2048] {
        let g = Grid::new(20.0, n).unwrap();
        let p = Profile::from_fn(&g, shape);
        let spectral = residual(&f, c, &p).unwrap();
        let fd = fd_residual(&f, c, &p);
        let err = spectral.values().iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        errors.push(err);
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.6).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn initial_guess_examples() {
    let f = exponential();
    let g = Grid::new(100.0, 4096).unwrap();
    let p = initial_guess(&f, 1.0, &g, 2.0).unwrap();
    assert_eq!(p.values()[g.center()], -2.0);
    assert_eq!(p.asymmetry(), 0.0);
    assert!((p.sup_norm() - 2.0).abs() < 1e-15);
    let unit = initial_guess(&f, 1.0, &g, 1.0).unwrap();
    assert!(unit.values()[0].abs() <= (-50f64).exp());
    // zeros of cos(ωs) are π/ω apart
    let zeros: Vec<f64> = g
        .points()
        .windows(2)
        .zip(unit.values().windows(2))
        .filter(|(_, v)| v[0] * v[1] < 0.0 && v[0].abs().max(v[1].abs()) > 1e-200)
        .map(|(s, v)| s[0] - v[0] * (s[1] - s[0]) / (v[1] - v[0]))
        .filter(|s| s.abs() < 30.0)
        .collect();
    for w in zeros.windows(2) {
        assert!((w[1] - w[0] - 3.6276).abs() < 1e-3, "{zeros:?}");
    }
    assert!(initial_guess(&f, 2f64.sqrt(), &g, 1.0).is_err());
    assert!(initial_guess(&f, 1.0, &g, 0.0).is_err());
}

#[test]
fn wave_at_1_3_converges_above_the_bound() {
    let w = wave13();
    let cfg = SolverConfig::default();
    assert!(w.converged && w.residual_norm <= cfg.newton_tol);
    let recomputed = scaled_residual(&exponential(), 1.3, &w.profile).unwrap().sup_norm();
    assert!(recomputed <= cfg.newton_tol, "{recomputed:e}");
    let l = lower_bound(&exponential(), 1.3, 1e6).unwrap().finite().unwrap();
    assert!(profile_amplitude(&w.profile) > l && l > 0.715);
    assert!(w.profile.asymmetry() <= 1e-9);
    assert!(w.boundary_value() <= 10.0 * cfg.tail_tol);
    // the literal residual is limited by rounding in u'''' (ε·ξ_max⁴·A)
    assert!(w.raw_residual_norm < 1e-7, "{:e}", w.raw_residual_norm);
}

#[test]
fn seed_at_one_and_a_half_l_collapses_at_1_3() {
    // Newton from −1.5·L(f,1.3) falls into the zero solution; the retry
    // ladder reaches the wave from −3·L instead.
    let f = exponential();
    let g = Grid::new(100.0, 4096).unwrap();
    let l = lower_bound(&f, 1.3, 1e6).unwrap().finite().unwrap();
    let guess = initial_guess(&f, 1.3, &g, 1.5 * l).unwrap();
    let err = newton_solve(&f, 1.3, &guess, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, SolveError::Trivial { .. }), "{err}");
    let guess = initial_guess(&f, 1.3, &g, 3.0 * l).unwrap();
    let w = newton_solve(&f, 1.3, &guess, &SolverConfig::default()).unwrap();
    assert!(w.converged);
    assert!((profile_amplitude(&w.profile) - profile_amplitude(&wave13().profile)).abs() < 1e-9);
}

fn resolve(w: &WaveProfile, g: &Grid) -> WaveProfile {
    let w2 = newton_solve(&exponential(), w.c, &w.profile.resample(g), &SolverConfig::default()).unwrap();
    assert!(w2.converged);
    w2
}

#[test]
fn refinement_and_enlargement_leave_the_amplitude_unchanged() {
    let w = wave13();
    let a = profile_amplitude(&w.profile);
    let finer = resolve(w, &Grid::new(100.0, 8192).unwrap());
    let longer = resolve(w, &Grid::new(150.0, 4096).unwrap());
    for other in [finer, longer] {
        let b = profile_amplitude(&other.profile);
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
    }
}

#[test]
fn direct_and_iterative_linear_solvers_find_the_same_wave() {
    let f = exponential();
    let g = Grid::new(60.0, 1024).unwrap();
    let mut amps = Vec::new();
    for linear_solver in [LinearSolver::Direct, LinearSolver::Iterative] {
        let cfg = SolverConfig { linear_solver, ..SolverConfig::default() };
        let w = solve_with_retries(&f, 1.3, &g, &cfg, None).unwrap();
        amps.push(profile_amplitude(&w.profile));
    }
    assert!((amps[0] - amps[1]).abs() < 1e-9 * amps[0], "{amps:?}");
}

#[test]
fn linear_problems_never_produce_a_wave() {
    let cfg = SolverConfig::default();
    for text in ["u", "2*u"] {
        let f = NonlinearitySpec::parse(text).unwrap();
        let c = 1.0;
        let g = Grid::new(adaptive_half_length(&f, c, cfg.tail_tol).unwrap(), 1024).unwrap();
        for a in [1e-3, 0.1, 0.5, 1.0, 3.0] {
            for guess in [initial_guess(&f, c, &g, a).unwrap(), initial_guess(&f, c, &g, a).unwrap().map(|u| -u)] {
                match newton_solve(&f, c, &guess, &cfg) {
                    Err(SolveError::Trivial { .. } | SolveError::Divergence { .. }) => {}
                    Ok(w) => assert!(!w.converged || w.profile.sup_norm() < 1e-6, "{text}: converged from {a}"),
                    Err(e) => panic!("{text}: unexpected {e}"),
                }
            }
        }
    }
    let f = NonlinearitySpec::parse("u").unwrap();
    let g = Grid::new(50.0, 1024).unwrap();
    let guess = Profile::from_fn(&g, |s| (-s * s).exp());
    assert!(matches!(newton_solve(&f, 2f64.sqrt(), &guess, &cfg), Err(SolveError::Bound(_))));
}

#[test]
fn piecewise_branch_stays_above_four_over_c_to_the_fourth() {
    let f = NonlinearitySpec::builtin(Builtin::Piecewise);
    let cont = continue_in_c(&f, 1.3, 0.9, &SolverConfig::default(), GridPolicy::Adaptive { n: 4096 }, None).unwrap();
    assert_eq!(cont.outcome, ContinuationOutcome::Completed);
    assert!(cont.waves.len() >= 17);
    for w in &cont.waves {
        assert!(w.converged);
        assert!(profile_amplitude(&w.profile) >= 4.0 / w.c.powi(4), "c={}", w.c);
    }
}

#[test]
fn exponential_branch_grows_as_speed_drops() {
    let f = exponential();
    let cont = continue_in_c(&f, 1.35, 0.8, &SolverConfig::default(), GridPolicy::Adaptive { n: 4096 }, None).unwrap();
    assert_eq!(cont.outcome, ContinuationOutcome::Completed);
    assert!(cont.waves.len() >= 20);
    let amps: Vec<f64> = cont.waves.iter().map(|w| profile_amplitude(&w.profile)).collect();
    for w in amps.windows(2) {
        assert!(w[1] > w[0], "{amps:?}");
    }
    assert_eq!(cont.waves.last().unwrap().c, 0.8);
    for w in &cont.waves {
        assert!(w.boundary_value() <= 1e-7 && w.profile.asymmetry() <= 1e-9);
    }
}

#[test]
fn continuation_rejects_upward_sweeps() {
    let err = continue_in_c(&exponential(), 0.8, 1.2, &SolverConfig::default(), GridPolicy::Adaptive { n: 1024 }, None);
    assert!(matches!(err, Err(SolveError::Direction { .. })));
}
