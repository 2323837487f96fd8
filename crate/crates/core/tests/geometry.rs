use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use susytoy::geometry::*;

#[test]
fn round_trip_on_random_right_half_plane_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x = rng.random_range(1e-3..20.0);
        let y = rng.random_range(-20.0..20.0);
        let (u, v) = to_parabolic(x, y);
        let (xb, yb) = from_parabolic(u, v).unwrap();
        worst = worst.max(((xb - x) / x.hypot(y)).abs()).max(((yb - y) / x.hypot(y)).abs());
        let h = scale_factor(u, v).unwrap();
        assert!((h * h * (x * x + y * y) - 1.0).abs() < 1e-12);
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn jacobian_by_monte_carlo() {
    // int_{x>0} f dxdy against int f(x(u,v), y(u,v)) h^2 dudv, sampling
    // (u, v) in polar form with radius ~ Exp(1)
    let f = |x: f64, y: f64| (-(x * x + 2.0 * y * y)).exp() * (1.0 + x);
    let pi = std::f64::consts::PI;
    let exact = (0.5 * pi.sqrt() + 0.5) * (0.5 * pi).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let rho: f64 = -(1.0 - rng.random::<f64>()).ln();
        let th = rng.random_range(-pi..pi);
        let (u, v) = (rho * th.cos(), rho * th.sin());
        let Ok((x, y)) = from_parabolic(u, v) else { continue };
        let h = scale_factor(u, v).unwrap();
        // density of the sample is exp(-rho) / (2 pi rho)
        sum += f(x, y) * h * h * 2.0 * pi * rho * rho.exp();
    }
    let mc = sum / n as f64;
    assert!((mc - exact).abs() < 0.005 * exact, "{mc} vs {exact}");
}

#[test]
fn partition_identity_on_many_points() {
    let spec = RegionSpec::with_scale(3.0).unwrap();
    let p = partition(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let k2m = spec.kappa * spec.kappa * spec.m;
    for _ in 0..100_000 {
        let u = rng.random_range(-2.0 * k2m..2.0 * k2m);
        let (a, b) = (p.chi_a(u), p.chi_b(u));
        assert!((a * a + b * b - 1.0).abs() < 1e-10);
        if u.abs() <= spec.m {
            assert_eq!((a, b), (1.0, 0.0));
        }
        if u.abs() >= k2m {
            assert_eq!(b, 1.0);
        }
        if u.abs() <= spec.m || u.abs() >= k2m {
            assert_eq!(p.v_chi_uv(u), 0.0);
        }
    }
}

#[test]
fn v_chi_bound_constant() {
    for m in [1.0, 4.0, 30.0] {
        let spec = RegionSpec::with_scale(m).unwrap();
        let p = partition(&spec).unwrap();
        let k2m = spec.kappa * spec.kappa * m;
        let sup = (0..=20_000)
            .map(|i| p.v_chi_uv(m + (k2m - m) * i as f64 / 20_000.0))
            .fold(0.0, f64::max);
        assert!(sup <= p.c1 / (m * m) * (1.0 + 1e-9));
        // the reported constant is attained at the midpoint
        assert!(sup >= 0.999 * p.c1 / (m * m));
    }
    // V_chi in Cartesian form is (x^2 + y^2) V_chi^uv
    let p = partition(&RegionSpec::with_scale(2.0).unwrap()).unwrap();
    let (x, y) = (2.6, 0.4);
    let (u, _) = to_parabolic(x, y);
    assert!((p.v_chi(x, y) - (x * x + y * y) * p.v_chi_uv(u)).abs() < 1e-15);
}

#[test]
fn valley_geometry_scaling() {
    let spec = RegionSpec::with_scale(1.0).unwrap();
    let g0 = valley_geometry(0.0, &spec, 3.0, 0.0).unwrap();
    assert!((g0.r_lambda - 4f64.powf(1.0 / 3.0)).abs() < 1e-12);
    let c1 = profile_c1(DEFAULT_KAPPA).unwrap();
    for lambda in [1.0, 1e2, 1e4] {
        let s = RegionSpec::for_lambda(lambda, c1, DEFAULT_KAPPA, DEFAULT_DELTA).unwrap();
        let g = valley_geometry(lambda, &s, 3.0, c1).unwrap();
        assert!(g.residual.abs() < 1e-10 * (1.0 + lambda), "{g:?}");
        assert!(g.phi_r(g.r_lambda) > 0.0);
    }
    // local exponent d ln r / d ln lambda at 1e4 against 1/(4 + alpha)
    let r = |l: f64| {
        let s = RegionSpec::for_lambda(l, c1, DEFAULT_KAPPA, DEFAULT_DELTA).unwrap();
        valley_geometry(l, &s, 3.0, c1).unwrap().r_lambda
    };
    let slope = (r(1.1e4).ln() - r(1e4 / 1.1).ln()) / (1.1f64 * 1.1).ln();
    assert!((slope - 1.0 / 7.0).abs() < 0.05 / 7.0, "{slope}");
}

#[test]
fn region_export_is_json() {
    let spec = RegionSpec::with_scale(2.0).unwrap();
    let e = export_regions(&spec).unwrap();
    let s = serde_json::to_string(&e).unwrap();
    let back: RegionExport = serde_json::from_str(&s).unwrap();
    assert_eq!(back, e);
    assert_eq!(e.transition, (2.0, spec.kappa * spec.kappa * 2.0));
    assert!((e.c2 - spec.c2()).abs() < 1e-15);
    assert!(e.c2 >= 1.0);
}

#[test]
fn invalid_specs() {
    assert!(RegionSpec::new(0.0, 1.5, 0.5).is_err());
    assert!(RegionSpec::new(1.0, 1.0, 0.5).is_err());
    assert!(RegionSpec::new(1.0, 1.5, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parabolic_round_trip(x in 1e-6f64..50.0, y in -50.0f64..50.0) {
        let (u, v) = to_parabolic(x, y);
        let (xb, yb) = from_parabolic(u, v).unwrap();
        let r = x.hypot(y);
        prop_assert!((xb - x).abs() <= 1e-12 * r && (yb - y).abs() <= 1e-12 * r);
        prop_assert_eq!(to_parabolic(-x, -y), (u, v));
        let h = scale_factor(u, v).unwrap();
        prop_assert!((h * h * r * r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_tags(x in -20.0f64..20.0, y in -20.0f64..20.0, m in 0.1f64..40.0) {
        let s = RegionSpec::with_scale(m).unwrap();
        let r = classify(x, y, &s);
        prop_assert_eq!(classify(-x, y, &s), r.reflect_x());
        prop_assert_eq!(classify(y, x, &s), r.reflect_diagonal());
        let opp = classify(-x, -y, &s);
        prop_assert_eq!(opp == Region::A, r == Region::A);
    }

    #[test]
    fn partition_is_a_partition_of_unity(u in -200.0f64..200.0, m in 0.5f64..50.0, kappa in 1.05f64..3.0) {
        let p = partition(&RegionSpec::new(m, kappa, 0.8).unwrap()).unwrap();
        let (a, b) = (p.chi_a(u), p.chi_b(u));
        prop_assert!((a * a + b * b - 1.0).abs() < 1e-12);
        prop_assert!(a >= 0.0 && b >= 0.0);
    }
}
