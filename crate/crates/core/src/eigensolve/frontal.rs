//! Dense partial LDL^T of a frontal matrix, used for inertia only.
//!
//! The front is an `n x n` symmetric matrix stored column-major with the lower
//! triangle referenced. The first `s` unknowns are eliminated with 1x1
//! diagonal pivoting restricted to them; afterwards the trailing lower
//! triangle holds the Schur complement on the remaining `n - s` unknowns.

const PANEL: usize = 48;
const COL_BLOCK: usize = 96;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Inertia {
    pub negative: usize,
    pub positive: usize,
}

/// A pivot whose magnitude fell below the breakdown threshold.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Breakdown;

#[inline]
fn at(n: usize, r: usize, c: usize) -> usize {
    r + c * n
}

/// Symmetric interchange of unknowns `p < q` in the active block `[lo, n)`.
fn swap_sym(a: &mut [f64], n: usize, lo: usize, p: usize, q: usize) {
    a.swap(at(n, p, p), at(n, q, q));
    for k in lo..p {
        a.swap(at(n, p, k), at(n, q, k));
    }
    for k in p + 1..q {
        a.swap(at(n, k, p), at(n, q, k));
    }
    for k in q + 1..n {
        a.swap(at(n, k, p), at(n, k, q));
    }
}

pub(crate) fn partial_ldlt(
    a: &mut [f64],
    n: usize,
    s: usize,
    tiny: f64,
) -> Result<Inertia, Breakdown> {
    debug_assert!(a.len() >= n * n && s <= n);
    let mut inertia = Inertia::default();
    if s == 0 {
        return Ok(inertia);
    }
    let nb_max = PANEL.min(s);
    let mut lp = vec![0.0; n * nb_max];
    let mut y = vec![0.0; n * nb_max];
    let mut d = vec![0.0; nb_max];
    let mut dcur = vec![0.0; s];
    let mut col = vec![0.0; n];

    let mut k0 = 0;
    while k0 < s {
        let nb = nb_max.min(s - k0);
        for p in k0..s {
            dcur[p] = a[at(n, p, p)];
        }
        for jj in 0..nb {
            let j = k0 + jj;
            // diagonal pivoting among the fully-summed unknowns
            let mut best = j;
            let mut best_abs = dcur[j].abs();
            for (p, v) in dcur.iter().enumerate().take(s).skip(j + 1) {
                if v.abs() > best_abs {
                    best_abs = v.abs();
                    best = p;
                }
            }
            if best != j {
                swap_sym(a, n, j, j, best);
                dcur.swap(j, best);
                for t in 0..jj {
                    lp.swap(j + t * n, best + t * n);
                }
            }
            // column j of the updated matrix
            col[j..n].copy_from_slice(&a[at(n, j, j)..at(n, n - 1, j) + 1]);
            for t in 0..jj {
                let w = d[t] * lp[j + t * n];
                if w != 0.0 {
                    let lt = &lp[t * n + j..t * n + n];
                    for (c, l) in col[j..n].iter_mut().zip(lt) {
                        *c -= w * l;
                    }
                }
            }
            let dj = col[j];
            if !(dj.abs() > tiny) {
                return Err(Breakdown);
            }
            if dj < 0.0 {
                inertia.negative += 1;
            } else {
                inertia.positive += 1;
            }
            d[jj] = dj;
            let inv = 1.0 / dj;
            lp[j + jj * n] = 1.0;
            for i in j + 1..n {
                lp[i + jj * n] = col[i] * inv;
            }
            for p in j + 1..s {
                let l = lp[p + jj * n];
                dcur[p] -= l * l * dj;
            }
        }
        // rank-nb update of the trailing block, lower triangle only
        let e = k0 + nb;
        if e < n {
            for t in 0..nb {
                for i in e..n {
                    y[i + t * n] = lp[i + t * n] * d[t];
                }
            }
            let mut cb = e;
            while cb < n {
                let ce = (cb + COL_BLOCK).min(n);
                let m = n - cb;
                // SAFETY: all pointers address in-bounds column-major blocks:
                // lp and y are n x nb with leading dimension n, a is n x n.
                unsafe {
                    matrixmultiply::dgemm(
                        m,
                        nb,
                        ce - cb,
                        -1.0,
                        lp.as_ptr().add(cb),
                        1,
                        n as isize,
                        y.as_ptr().add(cb),
                        n as isize,
                        1,
                        1.0,
                        a.as_mut_ptr().add(at(n, cb, cb)),
                        1,
                        n as isize,
                    );
                }
                cb = ce;
            }
        }
        k0 = e;
    }
    Ok(inertia)
}

/// Copies the trailing Schur complement `[s, n) x [s, n)` (lower, column-major).
pub(crate) fn extract_schur(a: &[f64], n: usize, s: usize) -> Vec<f64> {
    let b = n - s;
    let mut out = vec![0.0; b * b];
    for c in 0..b {
        let src = &a[at(n, s + c, s + c)..at(n, n - 1, s + c) + 1];
        out[c * b + c..c * b + b].copy_from_slice(src);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for c in 0..n {
            for r in c..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[r + c * n] = v;
                a[c + r * n] = v;
            }
        }
        a
    }

    fn eig_neg(a: &[f64], n: usize) -> usize {
        let m = nalgebra::DMatrix::from_column_slice(n, n, a);
        m.symmetric_eigenvalues().iter().filter(|&&l| l < 0.0).count()
    }

    #[test]
    fn full_factorization_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1, 2, 5, 47, 48, 49, 130] {
            let a = random_sym(n, &mut rng);
            let mut f = a.clone();
            let inertia = partial_ldlt(&mut f, n, n, 1e-14).unwrap();
            assert_eq!(inertia.negative, eig_neg(&a, n), "n = {n}");
            assert_eq!(inertia.negative + inertia.positive, n);
        }
    }

    #[test]
    fn schur_complement_inertia_adds_up() {
        // Haynsworth: In(A) = In(A11) + In(A / A11)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n, s) in &[(10, 3), (100, 60), (150, 149)] {
            let a = random_sym(n, &mut rng);
            let mut f = a.clone();
            let part = partial_ldlt(&mut f, n, s, 1e-14).unwrap();
            let schur = extract_schur(&f, n, s);
            let b = n - s;
            let mut full = vec![0.0; b * b];
            for c in 0..b {
                for r in c..b {
                    full[r + c * b] = schur[r + c * b];
                    full[c + r * b] = schur[r + c * b];
                }
            }
            assert_eq!(part.negative + eig_neg(&full, b), eig_neg(&a, n), "n={n} s={s}");
        }
    }

    #[test]
    fn zero_matrix_breaks_down() {
        let mut a = vec![0.0; 9];
        assert!(partial_ldlt(&mut a, 3, 3, 1e-14).is_err());
    }
}
