use std::f64::consts::PI;
use std::sync::OnceLock;

use hombridge_core::bound::{lower_bound, tail_parameters};
use hombridge_core::diagnostics::{
    amplitude, count_sign_changes, count_sign_changes_above, hamiltonian_H, hamiltonian_at, profile_amplitude,
    verify_amplitude_bound, verify_decay, verify_estimate8, verify_identity6, DiagnosticsError,
};
use hombridge_core::{
    continue_in_c, diagnose, initial_guess, residual, solve_with_retries, Builtin, DiagnosticsConfig, Grid, GridPolicy,
    NonlinearitySpec, Profile, SolverConfig, WaveProfile,
};

fn exponential() -> NonlinearitySpec {
    NonlinearitySpec::builtin(Builtin::Exponential)
}

fn wave13() -> &'static WaveProfile {
    static WAVE: OnceLock<WaveProfile> = OnceLock::new();
    WAVE.get_or_init(|| {
        let g = Grid::new(100.0, 4096).unwrap();
        solve_with_retries(&exponential(), 1.3, &g, &SolverConfig::default(), None).unwrap()
    })
}

fn as_wave(profile: Profile, c: f64, converged: bool) -> WaveProfile {
    WaveProfile { profile, c, residual_norm: 0.0, raw_residual_norm: 0.0, newton_iters: 0, converged }
}

/// Zeros of `u` in the right half, located on the trigonometric interpolant
/// by bisection from each grid sign change.
fn interpolated_zeros(p: &Profile, max_s: f64) -> Vec<f64> {
    let g = p.grid();
    let v = p.values();
    let mut zeros = Vec::new();
    for j in g.center()..v.len() - 1 {
        if g.point(j) > max_s {
            break;
        }
        if v[j] * v[j + 1] < 0.0 {
            let (mut lo, mut hi) = (g.point(j), g.point(j + 1));
            let sign_lo = v[j].signum();
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if p.interpolate(mid)[0].signum() == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
    }
    zeros
}

#[test]
fn amplitude_examples() {
    let g = Grid::new(100.0, 4096).unwrap();
    let p = Profile::from_fn(&g, |s| -2.0 * (-0.5 * s.abs()).exp() * (0.866 * s).cos());
    assert!((profile_amplitude(&p) - 2.0).abs() < 1e-6);
    assert_eq!(profile_amplitude(&Profile::zeros(&g)), 0.0);
    assert!(amplitude(wave13()).unwrap() >= 0.715);
    let stalled = as_wave(p, 1.0, false);
    assert!(matches!(amplitude(&stalled), Err(DiagnosticsError::NotConverged { .. })));
}

#[test]
fn amplitude_bound_examples() {
    let check = verify_amplitude_bound(wave13(), &exponential()).unwrap();
    assert!(check.holds && check.margin > 0.0);

    let pw = NonlinearitySpec::builtin(Builtin::Piecewise);
    let g = Grid::new(100.0, 4096).unwrap();
    let w = solve_with_retries(&pw, 1.0, &g, &SolverConfig::default(), None).unwrap();
    let check = verify_amplitude_bound(&w, &pw).unwrap();
    assert!(check.amplitude >= 4.0 && check.holds);

    let zero = as_wave(Profile::zeros(&g), 1.0, true);
    assert!(matches!(verify_amplitude_bound(&zero, &pw), Err(DiagnosticsError::ZeroProfile)));
    let linear = NonlinearitySpec::parse("u").unwrap();
    let fake = as_wave(Profile::from_fn(&g, |s| (-s * s).exp()), 1.0, true);
    assert!(matches!(verify_amplitude_bound(&fake, &linear), Err(DiagnosticsError::UnboundedBound { .. })));
}

#[test]
fn hamiltonian_examples() {
    let g = Grid::new(PI, 256).unwrap();
    assert_eq!(hamiltonian_H(&Profile::zeros(&g), 1.0, 0.3), 0.0);
    let sin = Profile::from_fn(&g, f64::sin);
    let c = 2f64.sqrt();
    assert!(hamiltonian_H(&sin, c, 0.0).abs() < 1e-9);
    // u''' sums modes up to 128, so rounding of order 1e-10 remains
    assert!((hamiltonian_H(&sin, c, PI / 4.0) + 1.0).abs() < 1e-9);
    for s in [-2.0, -0.4, 0.7, 1.9] {
        assert!((hamiltonian_at(&sin, c, s) + (2.0 * s).sin()).abs() < 1e-9);
    }
    let w = wave13();
    let t = w.grid().half_length();
    for s in [-t, t - w.grid().spacing()] {
        assert!(hamiltonian_H(&w.profile, w.c, s).abs() <= 10.0 * 1e-8);
    }
}

#[test]
fn hamiltonian_at_tail_zeros_reduces_to_first_term() {
    let w = wave13();
    let zeros = interpolated_zeros(&w.profile, 40.0);
    assert!(zeros.len() >= 8);
    for z in zeros {
        let [u, u1, u2, _] = w.profile.interpolate(z);
        assert!(u.abs() < 1e-12);
        let full = hamiltonian_at(&w.profile, w.c, z);
        assert!((full - u1 * u2).abs() <= 1e-12, "s={z}: {full} vs {}", u1 * u2);
    }
}

#[test]
fn identity6_examples() {
    let f = NonlinearitySpec::parse("u").unwrap();
    let c = 2f64.sqrt();
    let g = Grid::new(PI, 256).unwrap();
    let sin = Profile::from_fn(&g, f64::sin);
    // the full period wraps once around the periodic grid
    assert!(verify_identity6(&sin, &f, c, -PI, PI).unwrap() <= 1e-10);
    assert!(verify_identity6(&sin, &f, c, 0.0, PI / 4.0).unwrap() <= 1e-6);
    assert_eq!(verify_identity6(&Profile::zeros(&g), &f, c, -1.0, 2.0).unwrap(), 0.0);
    assert!(verify_identity6(&sin, &f, c, 1.0, 1.0).is_err());

    let w = wave13();
    let a = profile_amplitude(&w.profile);
    let zeros = interpolated_zeros(&w.profile, 60.0);
    for pair in zeros.windows(2) {
        let r = verify_identity6(&w.profile, &exponential(), w.c, pair[0], pair[1]).unwrap();
        assert!(r <= 1e-6 * (1.0 + a * a), "[{}, {}]: {r:e}", pair[0], pair[1]);
    }
}

#[test]
fn estimate8_examples() {
    let f = NonlinearitySpec::parse("u").unwrap();
    let g = Grid::new(PI, 256).unwrap();
    let e = verify_estimate8(&Profile::from_fn(&g, f64::sin), &f, 2f64.sqrt()).unwrap();
    assert!(e.identity_residual <= 1e-10 && e.inequality_slack.abs() <= 1e-10, "{e:?}");
    let z = verify_estimate8(&Profile::zeros(&g), &f, 1.0).unwrap();
    assert_eq!((z.identity_residual, z.inequality_slack), (0.0, 0.0));
    let w = wave13();
    let e = verify_estimate8(&w.profile, &exponential(), w.c).unwrap();
    assert!(e.identity_residual <= 1e-8 * e.integral_u_squared && e.inequality_slack >= 0.0, "{e:?}");
}

#[test]
fn sign_changes_with_and_without_the_noise_floor() {
    let g = Grid::new(100.0, 4096).unwrap();
    let p = Profile::from_fn(&g, |s| (-0.5 * s.abs()).exp() * (0.866 * s).cos());
    // zeros of cos(0.866 s) in [50, 100] are π/0.866 apart
    let expected = (0.866 * 50.0 / PI).floor() as usize;
    let (left, right) = count_sign_changes_above(&p, 0.25, 0.0);
    assert_eq!(left, right);
    assert!(right.abs_diff(expected) <= 1, "{right} vs {expected}");
    // Beyond s = 50 the samples next to each crossing are below e^{−25}·ωh,
    // under the 1e3·ε noise floor, so the floored count drops to at most one.
    let (fl, fr) = count_sign_changes(&p, 0.25).unwrap();
    assert_eq!(fl, fr);
    assert!(fr <= 1, "{fr}");
    assert_eq!(count_sign_changes(&Profile::zeros(&g), 0.25).unwrap(), (0, 0));
    assert!(count_sign_changes(&p, 0.5).is_err());

    let (l, r) = count_sign_changes(&wave13().profile, 0.25).unwrap();
    assert_eq!(l, r);
    assert!(r >= 4);
}

#[test]
fn decay_examples() {
    let f = exponential();
    let w = wave13();
    let d = verify_decay(&w.profile, &f, w.c, 1e-8).unwrap();
    assert!(d.boundary_magnitudes.iter().all(|&m| m <= 1e-6), "{d:?}");
    let rho = tail_parameters(&f, 1.3).unwrap().rho;
    assert!((d.fitted_rate.unwrap() - rho).abs() <= 1e-3 * rho);
    assert!(d.decay_ok);

    let g = Grid::new(100.0, 4096).unwrap();
    assert!(verify_decay(&Profile::zeros(&g), &f, 1.0, 1e-8).unwrap().decay_ok);

    // The guess has the right envelope, but its kink at s = 0 leaves
    // Gibbs ripples of order 1e-6 in u'…u''' across the whole grid.
    let guess = initial_guess(&f, 1.0, &g, 1.0).unwrap();
    let d = verify_decay(&guess, &f, 1.0, 1e-8).unwrap();
    assert!(d.rate_ok && (d.fitted_rate.unwrap() - 0.5).abs() < 1e-3);
    assert!(d.boundary_magnitudes[0] <= (-50f64).exp());
    assert!(!d.boundary_ok);
}

#[test]
fn scaled_down_waves_are_not_near_solutions() {
    let f = exponential();
    let w = wave13();
    let l = lower_bound(&f, w.c, 1e6).unwrap().finite().unwrap();
    let scale = 0.5 * l / profile_amplitude(&w.profile);
    let small = w.profile.map(|u| scale * u);
    assert!(small.sup_norm() < l);
    let r = residual(&f, w.c, &small).unwrap().sup_norm();
    assert!(r >= 1e-2 * scale, "{r:e}");
}

#[test]
fn every_wave_of_a_short_sweep_passes() {
    let f = exponential();
    let cont = continue_in_c(&f, 1.35, 1.1, &SolverConfig::default(), GridPolicy::Adaptive { n: 4096 }, None).unwrap();
    for w in &cont.waves {
        let r = diagnose(w, &f, &DiagnosticsConfig::default()).unwrap();
        assert!(r.overall_pass, "{r:#?}");
        assert_eq!(r.sign_changes_left, r.sign_changes_right);
        assert_eq!(r.identity6_pairs, 10);
    }
    let r = diagnose(wave13(), &f, &DiagnosticsConfig::default()).unwrap();
    assert!(r.overall_pass && r.bound_ok && r.decay_ok);
}
