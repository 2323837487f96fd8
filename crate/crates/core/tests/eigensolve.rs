use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use susytoy::eigensolve::*;
use susytoy::fiber::default_fiber;
use susytoy::operators::pauli::GAMMA1;
use susytoy::operators::*;
use susytoy::Error;

const SHIFTS: [f64; 5] = [0.0, 0.5, -0.5, 5.0, -5.0];

/// Random Hermitian operator on an `nx x ny` grid with `comps` unknowns per node
/// and couplings reaching `reach` nodes; complex when `complex` is set.
fn random_grid_operator(rng: &mut ChaCha8Rng, nx: usize, ny: usize, comps: usize, reach: usize, complex: bool) -> SparseHermitianOperator {
    let n = nx * ny * comps;
    let idx = |i: usize, j: usize, a: usize| (i * ny + j) * comps + a;
    let mut up = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for a in 0..comps {
                let p = idx(i, j, a);
                up.push((p, p, Complex64::new(rng.random_range(-6.0..6.0), 0.0)));
                for di in 0..=reach {
                    for dj in -(reach as i64)..=(reach as i64) {
                        let (ii, jj) = (i + di, j as i64 + dj);
                        if ii >= nx || jj < 0 || jj >= ny as i64 || (di == 0 && dj < 0) {
                            continue;
                        }
                        for b in 0..comps {
                            let q = idx(ii, jj as usize, b);
                            if q <= p || rng.random_bool(0.3) {
                                continue;
                            }
                            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
                            up.push((p, q, Complex64::new(rng.random_range(-2.0..2.0), im)));
                        }
                    }
                }
            }
        }
    }
    let mut meta = OperatorMeta::custom();
    meta.layout = Some(GridLayout { nx, ny, components: comps, reach });
    SparseHermitianOperator::from_upper_triplets(n, &up, meta).unwrap()
}

fn assert_counts_agree(op: &SparseHermitianOperator) {
    let ev = dense_eigenvalues(op, 4000).unwrap();
    for s in SHIFTS {
        let c = count_negative(op, s).unwrap();
        let d = ev.iter().filter(|&&l| l < c.effective_shift).count();
        assert_eq!(c.n_negative, d, "shift {s} dim {}", op.dimension());
    }
}

#[test]
fn inertia_matches_dense_on_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..30 {
        let nx = rng.random_range(2..30);
        let ny = rng.random_range(2..30);
        let comps = rng.random_range(1..3);
        let reach = rng.random_range(1..3);
        let op = random_grid_operator(&mut rng, nx, ny, comps, reach, k % 2 == 0);
        assert_counts_agree(&op);
    }
}

#[test]
fn inertia_without_layout_uses_one_front() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let op = random_grid_operator(&mut rng, 9, 8, 2, 1, true);
    let trip: Vec<_> = op.upper_triplets().collect();
    let bare = SparseHermitianOperator::from_upper_triplets(op.dimension(), &trip, OperatorMeta::custom()).unwrap();
    for s in SHIFTS {
        assert_eq!(count_negative(&bare, s).unwrap().n_negative, count_negative(&op, s).unwrap().n_negative);
    }
}

#[test]
fn shifted_operator_on_30x30_matches_dense() {
    let b = Box2D::square(4.0, 32).unwrap();
    assert_eq!(b.interior_x(), 30);
    for rule in [PotentialRule::Nodal, PotentialRule::ValleyAdapted] {
        let op = assemble_shifted_with(&b, &WeightSpec::new(3.0, 10.0).unwrap(), rule, true).unwrap();
        let c = count_negative(&op, 0.0).unwrap();
        let d = count_negative_dense(&op, 0.0, 4000).unwrap();
        assert_eq!(c.n_negative, d.n_negative);
        assert_eq!(c.method, CountMethod::Inertia);
        assert_eq!(d.method, CountMethod::Dense);
        assert!(c.n_negative > 0);
        assert_counts_agree(&op);
    }
}

#[test]
fn trivial_counts() {
    let b = Box2D::square(2.0, 12).unwrap();
    assert_eq!(count_negative(&assemble_laplacian(&b).unwrap(), 0.0).unwrap().n_negative, 0);
    let d = SparseHermitianOperator::from_real_diagonal(&[-2.0, -1.0, 5.0], OperatorMeta::custom());
    assert_eq!(count_negative(&d, 0.0).unwrap().n_negative, 2);
}

#[test]
fn dense_examples() {
    let d = SparseHermitianOperator::from_real_diagonal(&[3.0, -1.0], OperatorMeta::custom());
    assert_eq!(dense_spectrum(&d).unwrap().eigenvalues, vec![-1.0, 3.0]);
    let g: Vec<_> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j, GAMMA1[i][j])))
        .collect();
    let g1 = SparseHermitianOperator::from_triplets(2, &g, OperatorMeta::custom()).unwrap();
    let ev = dense_spectrum(&g1).unwrap().eigenvalues;
    assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    let b = Box2D::square(2.0, 8).unwrap();
    let pot: Vec<f64> = (0..b.interior_x())
        .flat_map(|i| (0..b.interior_y()).map(move |j| (i, j)))
        .map(|(i, j)| (b.x(i) * b.y(j)).powi(2))
        .collect();
    let op = SparseHermitianOperator::from_real_diagonal(&pot, OperatorMeta::custom());
    let mut sorted = pot.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(dense_spectrum(&op).unwrap().eigenvalues, sorted);
}

#[test]
fn iterative_matches_dense_on_20x20() {
    let b = Box2D::square(3.0, 22).unwrap();
    for susy in [false, true] {
        let op = assemble_hamiltonian_with(&b, susy, PotentialRule::Nodal).unwrap();
        let it = lowest_eigenpairs(&op, 6, 1e-9).unwrap();
        let de = dense_spectrum(&op).unwrap();
        assert_eq!(it.solver, SolverTag::Iterative);
        for (a, e) in it.eigenvalues.iter().zip(&de.eigenvalues) {
            assert!((a - e).abs() <= 1e-8 * e.abs().max(1.0), "{a} vs {e}");
        }
        assert!(it.residual_norms.iter().all(|&r| r <= 1e-9));
        assert!(it.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        // deterministic
        assert_eq!(lowest_eigenpairs(&op, 6, 1e-9).unwrap().eigenvalues, it.eigenvalues);
    }
}

#[test]
fn plain_lanczos_path_agrees() {
    let b = Box2D::square(3.0, 22).unwrap();
    let op = assemble_hamiltonian(&b, true).unwrap();
    let opts = IterativeOptions { band_work_limit: 0.0, ..Default::default() };
    let it = lowest_eigenpairs_with(&op, 3, 1e-8, &opts).unwrap();
    let de = dense_spectrum(&op).unwrap();
    for (a, e) in it.eigenvalues.iter().zip(&de.eigenvalues) {
        assert!((a - e).abs() <= 1e-7 * e.abs().max(1.0), "{a} vs {e}");
    }
}

#[test]
fn one_dimensional_sine_mode() {
    // -d^2 on an interval of length pi
    let grid = susytoy::fiber::FiberGrid::new(std::f64::consts::FRAC_PI_2, 399).unwrap();
    let n = grid.n;
    let h = grid.h();
    let up: Vec<_> = (0..n)
        .flat_map(|i| {
            let mut v = vec![(i, i, Complex64::new(2.0 / (h * h), 0.0))];
            if i + 1 < n {
                v.push((i, i + 1, Complex64::new(-1.0 / (h * h), 0.0)));
            }
            v
        })
        .collect();
    let mut meta = OperatorMeta::custom();
    meta.layout = Some(GridLayout { nx: n, ny: 1, components: 1, reach: 1 });
    let op = SparseHermitianOperator::from_upper_triplets(n, &up, meta).unwrap();
    let l = lowest_eigenpairs(&op, 1, 1e-10).unwrap().eigenvalues[0];
    assert!((l - 1.0).abs() < 1e-5 && l < 1.0);
}

#[test]
fn fiber_oscillator_levels() {
    let p = default_fiber(0.0).unwrap();
    let s = lowest_eigenpairs(&p.operator, 2, 1e-10).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-4);
    assert!((s.eigenvalues[1] - 2f64.sqrt()).abs() < 1e-4);
}

#[test]
fn non_convergence_reports_residuals() {
    let b = Box2D::square(3.0, 22).unwrap();
    let op = assemble_hamiltonian(&b, true).unwrap();
    let opts = IterativeOptions { band_work_limit: 0.0, max_applies: 30, ..Default::default() };
    match lowest_eigenpairs_with(&op, 4, 1e-12, &opts) {
        Err(Error::NotConverged { best_residuals, .. }) => assert!(!best_residuals.is_empty()),
        other => panic!("expected NotConverged, got {other:?}"),
    }
    assert!(matches!(lowest_eigenpairs(&op, 0, 1e-8), Err(Error::InvalidParameter { .. })));
}

#[test]
fn records_serialize_as_json_lines() {
    let b = Box2D::square(2.0, 10).unwrap();
    let op = assemble_shifted(&b, &WeightSpec::new(3.0, 4.0).unwrap()).unwrap();
    let c = count_negative(&op, 0.0).unwrap();
    let line = serde_json::to_string(&c).unwrap();
    assert!(!line.contains('\n'));
    let back: CountResult = serde_json::from_str(&line).unwrap();
    assert_eq!(back, c);
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["method"], "inertia");
    assert_eq!(v["spec"]["alpha"], 3.0);
    let s = lowest_eigenpairs(&op, 2, 1e-8).unwrap();
    let v: serde_json::Value = serde_json::to_value(&s).unwrap();
    assert_eq!(v["solver"], "iterative");
    assert!(v.get("eigenvectors").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inertia_equals_dense(seed in any::<u64>(), nx in 2usize..16, ny in 2usize..16, comps in 1usize..3, reach in 1usize..3, complex: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = random_grid_operator(&mut rng, nx, ny, comps, reach, complex);
        let ev = dense_eigenvalues(&op, 4000).unwrap();
        for s in SHIFTS {
            let c = count_negative(&op, s).unwrap();
            prop_assert_eq!(c.n_negative, ev.iter().filter(|&&l| l < c.effective_shift).count());
        }
    }

    #[test]
    fn counts_are_monotone_in_lambda_and_box(alpha in 0.0f64..5.0, l1 in 0.0f64..15.0, dl in 0.0f64..15.0, adapted: bool) {
        let rule = if adapted { PotentialRule::ValleyAdapted } else { PotentialRule::Nodal };
        let small = Box2D::with_spacing(2.0, 0.25).unwrap();
        let big = Box2D::with_spacing(3.0, 0.25).unwrap();
        let n = |b: &Box2D, l: f64| {
            let op = assemble_shifted_with(b, &WeightSpec::new(alpha, l).unwrap(), rule, true).unwrap();
            count_negative(&op, 0.0).unwrap().n_negative
        };
        let (a, b2) = (n(&small, l1), n(&small, l1 + dl));
        prop_assert!(a <= b2);
        prop_assert!(n(&small, l1 + dl) <= n(&big, l1 + dl));
        // exact and repeatable
        prop_assert_eq!(a, n(&small, l1));
    }
}
