//! Banded LDL^H without pivoting, for shifted operators known to be definite.

use num_complex::Complex64;

use crate::operators::SparseHermitianOperator;

pub(crate) struct BandFactor {
    n: usize,
    b: usize,
    /// row i holds `l[i][i-b..i]` at offsets `0..b` (offset `b - (i - j)`)
    l: Vec<Complex64>,
    d: Vec<f64>,
}

impl BandFactor {
    /// Factors `op - sigma I`. Returns `None` if a pivot is not positive.
    pub(crate) fn factor_positive(op: &SparseHermitianOperator, sigma: f64) -> Option<Self> {
        let n = op.dimension();
        let b = op.bandwidth();
        let zero = Complex64::new(0.0, 0.0);
        let mut l = vec![zero; n * b.max(1)];
        let mut d = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (j, v) in op.row(i) {
                if j < i {
                    l[i * b + b - (i - j)] = v;
                } else if j == i {
                    diag[i] = v.re - sigma;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..i {
                let jlo = j.saturating_sub(b).max(lo);
                let mut s = l[i * b + b - (i - j)];
                for k in jlo..j {
                    s -= l[i * b + b - (i - k)] * d[k] * l[j * b + b - (j - k)].conj();
                }
                l[i * b + b - (i - j)] = s / d[j];
            }
            let mut di = diag[i];
            for k in lo..i {
                di -= l[i * b + b - (i - k)].norm_sqr() * d[k];
            }
            if !(di > 0.0) {
                return None;
            }
            d[i] = di;
        }
        Some(Self { n, b, l, d })
    }

    pub(crate) fn solve(&self, rhs: &[Complex64], x: &mut [Complex64]) {
        let (n, b) = (self.n, self.b);
        x.copy_from_slice(rhs);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[i * b + b - (i - k)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let s = x[i];
            let lo = i.saturating_sub(b);
            for k in lo..i {
                let lik = self.l[i * b + b - (i - k)].conj();
                x[k] -= lik * s;
            }
        }
    }
}
