use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use susytoy::clr::*;
use susytoy::error::Error;
use susytoy::geometry::{profile_c1, RegionSpec, DEFAULT_DELTA, DEFAULT_KAPPA};

fn consts() -> BoundConstants {
    BoundConstants::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn trace_examples() {
    assert_eq!(negative_trace_power(&[-1.0, 2.0], 1.5), 1.0);
    assert_eq!(negative_trace_power(&[0.5, 2.0, 7.0], 1.5), 0.0);
    let p = FiberedPotential::shifted_oscillator(3.0, 2.0, 1.0, 2.0).unwrap();
    let l = p.levels(1.0);
    assert_eq!(l, vec![-3.0, -1.0, 1.0]);
    assert!((negative_trace_power(&l, 1.5) - (27f64.sqrt() + 1.0)).abs() < 1e-14);
}

#[test]
fn halfline_examples() {
    let c = consts();
    assert_eq!(clr_halfline(&FiberedPotential::zero(0.0, 5.0).unwrap(), &c).unwrap(), 0.0);
    for lambda in [0.5, 2.0, 7.0] {
        let pot = FiberedPotential::scalar(1.0, f64::INFINITY, move |x| -lambda * x.powi(-3)).unwrap();
        let got = clr_halfline(&pot, &c).unwrap() / (4.0 * PI * c.c3);
        let want = lambda.powf(1.5) * 2.0 / 3.0;
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
    let pot = FiberedPotential::scalar(1.0, f64::INFINITY, |x| -2.0 * x.powi(-2)).unwrap();
    assert!(matches!(clr_halfline(&pot, &c), Err(Error::Divergent(_))));
    assert!(clr_halfline(&FiberedPotential::zero(-1.0, 1.0).unwrap(), &c).is_err());
}

#[test]
fn log_weighted_examples() {
    let c = consts();
    for lambda in [1.0, 3.0] {
        let pot = FiberedPotential::scalar(1.0, f64::INFINITY, move |x| -lambda * x.powi(-4)).unwrap();
        let got = clr_log_weighted(&pot, &c).unwrap() / (4.0 * PI * c.c3);
        let want = lambda.powf(1.5) * 2.0 / 27.0;
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
    for a in [1.0, 2.0, 3.0, 0.7, 4.5] {
        let q = log_moment_quadrature(a).unwrap();
        assert!(rel(q, log_moment_closed_form(a)) < 1e-8, "a {a}: {q}");
    }
    assert_eq!(clr_log_weighted(&FiberedPotential::zero(1.0, 9.0).unwrap(), &c).unwrap(), 0.0);
    let pot = FiberedPotential::scalar(1.0, f64::INFINITY, |x| -x.powi(-2)).unwrap();
    assert!(matches!(clr_log_weighted(&pot, &c), Err(Error::Divergent(_))));
    assert!(matches!(log_moment_quadrature(0.0), Err(Error::Divergent(_))));
}

#[test]
fn cartesian_examples() {
    let c = consts();
    let b = cartesian_region_bound(2.0, 4.0, &c).unwrap();
    let want = 8.0 * PI * c.c3 * 2.0 * 2f64.powf(1.5) * 2.0 / 27.0;
    assert!(rel(b.closed_form, want) < 1e-14);
    assert!(rel(b.quadrature, b.closed_form) < 1e-8);
    for (lambda, alpha) in [(0.3, 2.5), (10.0, 3.0), (100.0, 6.0)] {
        let b = cartesian_region_bound(lambda, alpha, &c).unwrap();
        assert!(rel(b.quadrature, b.closed_form) < 1e-8, "{b:?}");
    }
    let z = cartesian_region_bound(0.0, 3.0, &c).unwrap();
    assert_eq!((z.closed_form, z.quadrature), (0.0, 0.0));
    assert!(cartesian_region_bound(1e-12, 3.0, &c).unwrap().closed_form < 1e-15);
    assert!(matches!(cartesian_region_bound(1.0, 2.0, &c), Err(Error::Divergent(_))));
}

#[test]
fn theorem_bound() {
    let c = consts();
    let k = |alpha: f64| 4096.0 * PI * c.c3 / (27.0 * (alpha - 2.0).powi(3));
    let b = theorem1_bound(1.0, 3.0, &c, 5.0, 0.2).unwrap();
    assert!(rel(b, 5.0 + k(3.0)) < 1e-14);
    let mut prev = 0.0;
    for i in 0..30 {
        let v = theorem1_bound(1.5f64.powi(i), 3.0, &c, 1.0, 0.3).unwrap();
        assert!(v > prev);
        prev = v;
    }
    let mut prev = 0.0;
    for alpha in [3.0, 2.5, 2.2, 2.05, 2.01, 2.001] {
        let v = theorem1_bound(10.0, alpha, &c, 0.0, 0.25 * (alpha - 2.0)).unwrap();
        assert!(v > prev);
        prev = v;
    }
    assert!(prev > 1e9);
    assert!(theorem1_bound(1.0, 3.0, &c, 0.0, 0.5).is_err());
    assert!(theorem1_bound(1.0, 3.0, &c, 0.0, 0.0).is_err());
    assert!(theorem1_bound(1.0, 2.0, &c, 0.0, 0.1).is_err());
}

#[test]
fn constants_are_validated() {
    assert!(BoundConstants::new(0.1, 1.0, 1.0).is_err());
    assert!(BoundConstants::new(0.0, 1.0, 1.5).is_err());
    assert!(BoundConstants::new(0.1, -1.0, 1.5).is_err());
    assert!(BoundConstants::new(0.1, 1.0, 1.01).is_ok());
}

#[test]
fn reduction_examples() {
    assert_eq!(radial_lift_check(&FiberedPotential::zero(0.0, 6.0).unwrap(), 400).unwrap(), (0, 0));
    let well = |depth: f64, a: f64, b: f64, r: f64| {
        FiberedPotential::scalar(0.0, r, move |x| if x > a && x < b { -depth } else { 0.0 }).unwrap()
    };
    let (n1, n3) = radial_lift_check(&well(5.0, 1.0, 2.0, 6.0), 400).unwrap();
    assert_eq!(n1, n3);
    let (n1, n3) = radial_lift_check(&well(50.0, 1.0, 3.0, 8.0), 400).unwrap();
    assert_eq!(n1, n3);
    assert!(n1 > 1);

    assert_eq!(log_substitution_check(&FiberedPotential::zero(1.0, 100.0).unwrap(), 2000).unwrap(), (0, 0));
    let p = FiberedPotential::scalar(1.0, 100.0, |x| -3.0 * x.powi(-3)).unwrap();
    let (a, b) = log_substitution_check(&p, 2000).unwrap();
    assert_eq!(a, b);
    let p = FiberedPotential::scalar(1.0, 100.0, |x| -0.1 * x.powi(-4)).unwrap();
    assert_eq!(log_substitution_check(&p, 2000).unwrap(), (0, 0));
}

#[test]
fn reductions_on_random_potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..20 {
        let step = i % 2 == 0;
        let depth = rng.random_range(1.0..80.0);
        let a = rng.random_range(1.0..4.0);
        let b = a + rng.random_range(0.5..4.0);
        let p = rng.random_range(2.5..5.0);
        let v = move |x: f64| {
            if step {
                if x > a && x < b { -depth } else { 0.0 }
            } else {
                -depth * x.powf(-p)
            }
        };
        let r = b + 4.0;
        let pot = FiberedPotential::scalar(if step { 0.0 } else { 1.0 }, r, v).unwrap();
        let (n1, n3) = radial_lift_check(&pot, 2000).unwrap();
        assert!(n1.abs_diff(n3) <= 1, "radial #{i}: {n1} vs {n3}");

        let pot = FiberedPotential::scalar(1.0, 60.0, v).unwrap();
        let (c0, c1) = log_substitution_check(&pot, 4000).unwrap();
        assert!(c0.abs_diff(c1) <= 1, "log #{i}: {c0} vs {c1}");
    }
}

#[test]
fn fibered_reductions_add_over_levels() {
    let pot = FiberedPotential::shifted_oscillator(40.0, 3.0, 1.0, 8.0).unwrap();
    assert!(pot.rank >= 2);
    let (n1, n3) = radial_lift_check(&pot, 2000).unwrap();
    assert!(n1.abs_diff(n3) <= 1);
    let (c0, c1) = log_substitution_check(&pot, 4000).unwrap();
    assert!(c0.abs_diff(c1) <= 1);
}

#[test]
fn bound_sanity_is_reported() {
    let pot = FiberedPotential::scalar(0.0, 8.0, |x| if x > 1.0 && x < 3.0 { -50.0 } else { 0.0 }).unwrap();
    let s = bound_sanity(&pot, 400, &consts()).unwrap();
    assert!(s.measured > 0 && s.bound > 0.0);
    assert_eq!(s.holds, s.measured as f64 <= s.bound);
}

#[test]
fn region_a_examples() {
    let c = BoundConstants::new(0.1156, 1.0, 1.2).unwrap();
    let spec = RegionSpec::with_scale(2.0).unwrap();
    let r0 = region_a_bound(0.0, 3.0, &c, &spec, false).unwrap();
    assert!(r0.integral.is_finite() && r0.integral > 0.0);
    assert_eq!(r0.value, 2.0 + 2.0 * r0.integral);
    // outside the reported radius the potential is nonnegative on kappa A
    let u_max = spec.kappa * spec.kappa * spec.m;
    for k in 0..200 {
        let phi = 0.5 * PI * k as f64 / 199.0;
        let (x, y) = (r0.radius * 1.01 * phi.cos(), r0.radius * 1.01 * phi.sin());
        if (0.5 * (x * x - y * y)).abs() <= u_max {
            assert!(region_a_potential(x, y, 0.0, 3.0, 0.0) >= 0.0);
        }
    }
    assert!(BoundConstants::new(0.1156, 1.0, 1.0).is_err());
    let bad = BoundConstants { q: 1.0, ..c };
    assert!(region_a_bound(0.0, 3.0, &bad, &spec, false).is_err());
}

#[test]
fn region_a_growth_is_bounded_by_the_shape() {
    let c = BoundConstants::new(0.1156, 1.0, 1.2).unwrap();
    let alpha = 3.0;
    let q = c.q;
    let c1 = profile_c1(DEFAULT_KAPPA).unwrap();
    let shape = |l: f64| {
        let lg = l.ln().powf(2.0 * q - 1.0);
        l.powf(q * (6.0 + alpha) / (4.0 + alpha)) * lg + l.powf(4.0 * q / 3.0 - 1.0 / 3.0) * lg
    };
    let ratios: Vec<f64> = [10.0, 31.6, 100.0, 316.0, 1000.0]
        .iter()
        .map(|&l| {
            let spec = RegionSpec::for_lambda(l, c1, DEFAULT_KAPPA, DEFAULT_DELTA).unwrap();
            region_a_bound(l, alpha, &c, &spec, true).unwrap().value / shape(l)
        })
        .collect();
    for r in &ratios[1..] {
        assert!(*r <= ratios[0], "{ratios:?}");
    }
}

#[test]
fn table_csv() {
    let rows = clr_table(&[1.0, 10.0], &[2.0, 3.0], &consts(), DEFAULT_KAPPA, DEFAULT_DELTA).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].bound_value.is_nan() && rows[0].components.contains("divergent"));
    assert!(rows[2].bound_value.is_finite() && rows[3].bound_value > rows[2].bound_value);
    let mut buf = Vec::new();
    write_clr_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("lambda,alpha,q,bound_value,components\n"));
}
