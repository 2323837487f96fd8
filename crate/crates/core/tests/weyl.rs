use susytoy::experiments::fit::{fit_model, FitModel};
use susytoy::operators::pauli::{apply, GAMMA1};
use susytoy::operators::{PotentialRule, WeightSpec};
use susytoy::quadrature::{integrate, Tolerance};
use susytoy::weyl::*;

const TS: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];

fn slope(pts: &[(f64, f64)]) -> f64 {
    fit_model(pts, FitModel::Power).unwrap().exponent
}

#[test]
fn oscillator_ground_state() {
    for x in [0.5, 1.0, 10.0] {
        let g = oscillator_ground(x).unwrap();
        let w = 12.0 / x.sqrt();
        let n = integrate(|y| g.value(y).powi(2), -w, w, Tolerance::new(1e-14, 1e-13)).unwrap();
        assert!((n.value - 1.0).abs() < 1e-10);
        for y in [-1.3, -0.2, 0.0, 0.4, 2.0] {
            // (-d_y^2 + x^2 y^2) phi = x phi
            let r = -g.dyy(y) + x * x * y * y * g.value(y) - x * g.value(y);
            assert!(r.abs() < 1e-8);
        }
    }
    assert!((oscillator_ground(1.0).unwrap().value(0.0) - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
    assert!(oscillator_ground(0.0).is_err());
}

#[test]
fn states_are_normalized_and_supported() {
    let p = CutoffProfile::standard().unwrap();
    for t in [2.0, 8.0, 32.0] {
        let s = weyl_state(t, p).unwrap();
        assert!((s.norm_sq - 1.0).abs() < 1e-8, "t={t}: {}", s.norm_sq);
        assert_eq!(s.support(), (t, 2.0 * t));
        assert_eq!(s.amplitude(0.99 * t, 0.0), 0.0);
        assert_eq!(s.amplitude(2.01 * t, 0.0), 0.0);
        assert!(s.amplitude(1.5 * t, 0.0) > 0.0);
        let g = apply(&GAMMA1, s.xi);
        assert_eq!(g, [-s.xi[0], -s.xi[1]]);
    }
    assert!(weyl_state(0.5, p).is_err());
}

#[test]
fn form_decays_like_inverse_square() {
    let p = CutoffProfile::standard().unwrap();
    let q: Vec<(f64, f64)> = TS
        .iter()
        .map(|&t| (t, quadratic_form(&weyl_state(t, p).unwrap()).unwrap().value))
        .collect();
    assert!(q.iter().all(|&(_, v)| v > 0.0));
    assert!(q.windows(2).all(|w| w[1].1 < w[0].1));
    let s = slope(&q);
    assert!((s + 2.0).abs() <= 0.15, "slope {s}");
}

#[test]
fn weighted_norm_decay_and_ordering() {
    let p = CutoffProfile::standard().unwrap();
    let states: Vec<_> = TS.iter().map(|&t| weyl_state(t, p).unwrap()).collect();
    for s in &states {
        let n0 = weighted_norm(s, &WeightSpec::new(0.0, 0.0).unwrap()).unwrap().value;
        assert!((n0 - 1.0).abs() < 1e-8);
        let mut last = n0;
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let n = weighted_norm(s, &WeightSpec::new(alpha, 0.0).unwrap()).unwrap().value;
            assert!(n > 0.0 && n < last);
            last = n;
        }
    }
    for alpha in [1.0, 1.5, 3.0] {
        let spec = WeightSpec::new(alpha, 0.0).unwrap();
        let pts: Vec<_> = states
            .iter()
            .map(|s| (s.t, weighted_norm(s, &spec).unwrap().value))
            .collect();
        let sl = slope(&pts);
        assert!((sl + alpha).abs() <= 0.1, "alpha {alpha}: slope {sl}");
    }
}

#[test]
fn quotient_dichotomy() {
    let p = CutoffProfile::standard().unwrap();
    let rows = weyl_sweep(&TS, &[0.0, 1.0, 1.5, 3.0], p).unwrap();
    for alpha in [0.0, 1.0, 1.5, 3.0] {
        let pts: Vec<_> = rows
            .iter()
            .filter(|r| r.alpha == alpha)
            .map(|r| (r.t, r.quotient))
            .collect();
        let s = slope(&pts);
        if alpha < 2.0 {
            assert!((s - (alpha - 2.0)).abs() <= 0.2, "alpha {alpha}: slope {s}");
        } else {
            assert!(s >= 0.0, "alpha {alpha}: slope {s}");
        }
    }
    // alpha = 0 is the plain form
    for r in rows.iter().filter(|r| r.alpha == 0.0) {
        assert!((r.quotient - r.form).abs() <= 1e-8 * r.form);
    }
}

#[test]
fn grid_rayleigh_quotient_agrees_for_small_t() {
    let p = CutoffProfile::standard().unwrap();
    for t in [2.0, 4.0, 8.0] {
        let s = weyl_state(t, p).unwrap();
        let q = quadratic_form(&s).unwrap().value;
        let g = grid_rayleigh_quotient(&s, 0.05, PotentialRule::ValleyAdapted).unwrap();
        assert!((g - q).abs() <= 0.02 * q, "t={t}: grid {g} vs quadrature {q}");
    }
}

#[test]
fn csv_columns() {
    let p = CutoffProfile::standard().unwrap();
    let rows = weyl_sweep(&[4.0], &[1.0], p).unwrap();
    let mut buf = Vec::new();
    write_weyl_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,alpha,form,weighted_norm,quotient,quadrature_error");
    assert_eq!(text.lines().count(), 2);
}
