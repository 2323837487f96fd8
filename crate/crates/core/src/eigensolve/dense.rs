use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::operators::SparseHermitianOperator;

/// Full eigendecomposition. Eigenvalues ascending, eigenvectors as columns in
/// the same order.
pub(crate) fn eigh(op: &SparseHermitianOperator, vectors: bool) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = op.dimension();
    if op.is_real() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for (j, v) in op.row(i) {
                m[(i, j)] = v.re;
            }
        }
        if !vectors {
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            return (ev, Vec::new());
        }
        let se = SymmetricEigen::new(m);
        let order = sorted_order(se.eigenvalues.as_slice());
        let ev = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let vecs = order
            .iter()
            .map(|&k| se.eigenvectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        (ev, vecs)
    } else {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for (j, v) in op.row(i) {
                m[(i, j)] = v;
            }
        }
        if !vectors {
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            return (ev, Vec::new());
        }
        let se = SymmetricEigen::new(m);
        let order = sorted_order(se.eigenvalues.as_slice());
        let ev = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let vecs = order
            .iter()
            .map(|&k| se.eigenvectors.column(k).iter().copied().collect())
            .collect();
        (ev, vecs)
    }
}

fn sorted_order(ev: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ev.len()).collect();
    order.sort_by(|&a, &b| ev[a].total_cmp(&ev[b]));
    order
}
