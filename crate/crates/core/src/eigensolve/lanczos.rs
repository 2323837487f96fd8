//! Thick-restart Lanczos with full reorthogonalization.
//!
//! The projected matrix is formed explicitly from stored products `W = B V`,
//! so restarting only needs linear combinations of `V` and `W`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes `w` against `basis` (two passes). Returns the remaining norm.
fn orthogonalize(basis: &[Vec<C>], w: &mut [C]) -> f64 {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
    }
    norm(w)
}

pub(crate) struct KrylovOutcome {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) struct KrylovParams {
    pub n: usize,
    pub nev: usize,
    pub basis: usize,
    pub max_applies: usize,
    pub want_largest: bool,
    pub seed: u64,
}

/// Runs the iteration on operator `b_apply`. Ritz pairs `(theta, y)` are mapped
/// to the target problem by `residual(theta, y) -> (value, residual)`; the
/// iteration stops once the `nev` wanted pairs satisfy `residual <= tol`.
pub(crate) fn thick_restart(
    p: &KrylovParams,
    tol: f64,
    mut b_apply: impl FnMut(&[C], &mut [C]),
    mut residual: impl FnMut(f64, &[C]) -> (f64, f64),
) -> KrylovOutcome {
    let n = p.n;
    let m = p.basis.min(n).max(p.nev + 1);
    let keep = (p.nev + (m - p.nev) / 2).min(m - 1).max(p.nev);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<C> {
        (0..n)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };

    let mut v: Vec<Vec<C>> = Vec::with_capacity(m + 1);
    let mut w: Vec<Vec<C>> = Vec::with_capacity(m);
    let mut start = random_vec(&mut rng);
    let nr = norm(&start);
    start.iter_mut().for_each(|x| *x /= nr);
    v.push(start);

    let mut applies = 0;
    let mut best = KrylovOutcome {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: vec![f64::INFINITY; p.nev],
        converged: false,
        iterations: 0,
    };
    loop {
        // expand until m basis vectors carry their products; v holds at most
        // one extra vector whose product is still pending
        while w.len() < m {
            if v.len() == w.len() {
                if v.len() >= n {
                    break;
                }
                let mut r = random_vec(&mut rng);
                let nr = orthogonalize(&v, &mut r);
                if !(nr > 1e-10) {
                    break;
                }
                r.iter_mut().for_each(|x| *x /= nr);
                v.push(r);
            }
            let last = w.len();
            let mut prod = vec![C::new(0.0, 0.0); n];
            b_apply(&v[last], &mut prod);
            applies += 1;
            let mut next = prod.clone();
            w.push(prod);
            let scale = norm(&next).max(f64::MIN_POSITIVE);
            let nr = orthogonalize(&v, &mut next);
            if v.len() < n && nr > 1e-10 * scale {
                next.iter_mut().for_each(|x| *x /= nr);
                v.push(next);
            }
        }
        let k = w.len();
        let mut h = DMatrix::<C>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let x = dot(&v[i], &w[j]);
                h[(i, j)] = x;
                h[(j, i)] = x.conj();
            }
        }
        for i in 0..k {
            h[(i, i)] = C::new(h[(i, i)].re, 0.0);
        }
        let se = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        if p.want_largest {
            order.reverse();
        }
        let combine = |basis: &[Vec<C>], col: usize| -> Vec<C> {
            let mut y = vec![C::new(0.0, 0.0); n];
            for (i, bi) in basis.iter().take(k).enumerate() {
                let c = se.eigenvectors[(i, col)];
                if c != C::new(0.0, 0.0) {
                    for (yj, bj) in y.iter_mut().zip(bi) {
                        *yj += c * bj;
                    }
                }
            }
            y
        };
        let nev = p.nev.min(k);
        let mut values = Vec::with_capacity(nev);
        let mut vectors = Vec::with_capacity(nev);
        let mut residuals = Vec::with_capacity(nev);
        for &col in order.iter().take(nev) {
            let y = combine(&v, col);
            let (val, res) = residual(se.eigenvalues[col], &y);
            values.push(val);
            vectors.push(y);
            residuals.push(res);
        }
        let converged = nev == p.nev && residuals.iter().all(|&r| r <= tol);
        let better = residuals.iter().fold(0.0f64, |a, &b| a.max(b))
            <= best.residuals.iter().fold(0.0f64, |a, &b| a.max(b));
        if converged || better || best.values.is_empty() {
            best = KrylovOutcome {
                values,
                vectors,
                residuals,
                converged,
                iterations: applies,
            };
        }
        if converged || applies >= p.max_applies || k >= n {
            best.iterations = applies;
            if k >= n && !best.converged {
                best.converged = best.residuals.iter().all(|&r| r <= tol);
            }
            return best;
        }
        // thick restart: keep the best Ritz vectors plus the pending direction
        let pending = if v.len() > k { v.pop() } else { None };
        let cols: Vec<usize> = order.iter().take(keep).copied().collect();
        let new_v: Vec<Vec<C>> = cols.iter().map(|&c| combine(&v, c)).collect();
        let new_w: Vec<Vec<C>> = cols.iter().map(|&c| combine(&w, c)).collect();
        v = new_v;
        w = new_w;
        if let Some(mut pv) = pending {
            let nr = orthogonalize(&v, &mut pv);
            if nr > 1e-10 {
                pv.iter_mut().for_each(|x| *x /= nr);
                v.push(pv);
            }
        }
    }
}
