use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Box2D, PotentialRule, WeightSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplacian,
    Hamiltonian,
    BosonicHamiltonian,
    Supercharge,
    Weight,
    Shifted,
    BosonicShifted,
    Fiber,
    Custom,
}

/// Node layout of a grid operator: `nx * ny` nodes, `components` unknowns per
/// node (fastest index), couplings reaching at most `reach` nodes along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub components: usize,
    pub reach: usize,
}

impl GridLayout {
    pub fn dimension(&self) -> usize {
        self.nx * self.ny * self.components
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub kind: OperatorKind,
    #[serde(rename = "box")]
    pub grid: Option<Box2D>,
    pub spec: Option<WeightSpec>,
    pub potential: Option<PotentialRule>,
    pub layout: Option<GridLayout>,
}

impl OperatorMeta {
    pub fn custom() -> Self {
        Self {
            kind: OperatorKind::Custom,
            grid: None,
            spec: None,
            potential: None,
            layout: None,
        }
    }
}

/// Hermitian matrix in compressed sparse row form. Both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitianOperator {
    dimension: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    meta: OperatorMeta,
}

#[inline]
fn canonical(v: Complex64) -> Complex64 {
    // adding +0.0 turns -0.0 into +0.0 so the stored bits do not depend on
    // the sign of a vanishing product
    Complex64::new(v.re + 0.0, v.im + 0.0)
}

/// Row-by-row CSR builder. Rows must be pushed in order.
pub(crate) struct CsrBuilder {
    dimension: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrBuilder {
    pub(crate) fn new(dimension: usize, nnz_hint: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(dimension + 1);
        row_ptr.push(0);
        Self {
            dimension,
            row_ptr,
            col_idx: Vec::with_capacity(nnz_hint),
            values: Vec::with_capacity(nnz_hint),
        }
    }

    /// Appends one row. Entries may be unsorted and repeated; duplicates are
    /// summed, exact zeros off the diagonal are dropped.
    pub(crate) fn push_row(&mut self, entries: &mut Vec<(usize, Complex64)>) {
        let row = self.row_ptr.len() - 1;
        entries.sort_by_key(|e| e.0);
        let mut k = 0;
        while k < entries.len() {
            let col = entries[k].0;
            let mut v = entries[k].1;
            k += 1;
            while k < entries.len() && entries[k].0 == col {
                v += entries[k].1;
                k += 1;
            }
            let v = canonical(v);
            if col == row || v.re != 0.0 || v.im != 0.0 {
                self.col_idx.push(col);
                self.values.push(v);
            }
        }
        entries.clear();
        self.row_ptr.push(self.col_idx.len());
    }

    pub(crate) fn finish(self, meta: OperatorMeta) -> SparseHermitianOperator {
        assert_eq!(self.row_ptr.len(), self.dimension + 1, "missing rows");
        SparseHermitianOperator {
            dimension: self.dimension,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
            meta,
        }
    }
}

impl SparseHermitianOperator {
    /// Builds an operator from entries of the full matrix. Duplicates are
    /// summed. Fails if the result is not Hermitian to within `1e-12` relative.
    pub fn from_triplets(
        dimension: usize,
        triplets: &[(usize, usize, Complex64)],
        meta: OperatorMeta,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dimension];
        for &(i, j, v) in triplets {
            if i >= dimension || j >= dimension {
                return Err(Error::Parse(format!(
                    "entry ({i}, {j}) outside dimension {dimension}"
                )));
            }
            rows[i].push((j, v));
        }
        let mut b = CsrBuilder::new(dimension, triplets.len());
        for mut r in rows {
            b.push_row(&mut r);
        }
        let op = b.finish(meta);
        let scale = op.norm_inf().max(1.0);
        let defect = op.hermitian_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Parse(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(op)
    }

    /// Builds a Hermitian operator from its upper triangle (`i <= j`).
    pub fn from_upper_triplets(
        dimension: usize,
        upper: &[(usize, usize, Complex64)],
        meta: OperatorMeta,
    ) -> Result<Self> {
        let mut full = Vec::with_capacity(2 * upper.len());
        for &(i, j, v) in upper {
            if i > j {
                return Err(Error::Parse(format!("entry ({i}, {j}) below the diagonal")));
            }
            if i == j {
                if v.im != 0.0 {
                    return Err(Error::Parse(format!("diagonal entry {i} has imaginary part")));
                }
                full.push((i, i, v));
            } else {
                full.push((i, j, v));
                full.push((j, i, v.conj()));
            }
        }
        Self::from_triplets(dimension, &full, meta)
    }

    pub fn from_real_diagonal(diag: &[f64], meta: OperatorMeta) -> Self {
        let mut b = CsrBuilder::new(diag.len(), diag.len());
        let mut row = Vec::with_capacity(1);
        for (i, &d) in diag.iter().enumerate() {
            row.push((i, Complex64::new(d, 0.0)));
            b.push_row(&mut row);
        }
        b.finish(meta)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    pub fn layout(&self) -> Option<GridLayout> {
        self.meta.layout
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[s..e]
            .iter()
            .copied()
            .zip(self.values[s..e].iter().copied())
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[s..e].binary_search(&j) {
            Ok(k) => self.values[s + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension).map(|i| self.entry(i, i).re).collect()
    }

    /// Iterates the stored upper triangle `(i, j, value)` with `i <= j`.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dimension).flat_map(move |i| {
            self.row(i)
                .filter(move |&(j, _)| j >= i)
                .map(move |(j, v)| (i, j, v))
        })
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dimension)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Lower bound on the spectrum from Gershgorin discs.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.dimension)
            .map(|i| {
                let mut d = 0.0;
                let mut off = 0.0;
                for (j, v) in self.row(i) {
                    if j == i {
                        d = v.re;
                    } else {
                        off += v.norm();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.dimension)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dimension {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dimension);
        assert_eq!(y.len(), self.dimension);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dimension];
        self.apply(x, &mut y);
        y
    }

    /// `<x, A x>` without any cell-area factor.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let y = self.mul_vec(x);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `self + s * other`, entrywise. Metadata is taken from `self`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if other.dimension != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        let mut b = CsrBuilder::new(self.dimension, self.nnz().max(other.nnz()));
        let mut row = Vec::new();
        for i in 0..self.dimension {
            row.extend(self.row(i));
            row.extend(other.row(i).map(|(j, v)| (j, v * s)));
            b.push_row(&mut row);
        }
        Ok(b.finish(self.meta.clone()))
    }

    /// Dense row-major copy, for small operators only.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dimension;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                a[i * n + j] = v;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_are_summed_and_checked() {
        let t = [
            (0, 0, c(1.0, 0.0)),
            (0, 0, c(1.0, 0.0)),
            (0, 1, c(0.0, 2.0)),
            (1, 0, c(0.0, -2.0)),
            (1, 1, c(-3.0, 0.0)),
        ];
        let op = SparseHermitianOperator::from_triplets(2, &t, OperatorMeta::custom()).unwrap();
        assert_eq!(op.entry(0, 0), c(2.0, 0.0));
        assert_eq!(op.hermitian_defect(), 0.0);
        assert!(!op.is_real());
        let bad = [(0, 1, c(1.0, 0.0))];
        assert!(SparseHermitianOperator::from_triplets(2, &bad, OperatorMeta::custom()).is_err());
    }

    #[test]
    fn upper_roundtrip() {
        let up = [(0, 0, c(1.0, 0.0)), (0, 2, c(0.5, -0.25)), (1, 1, c(2.0, 0.0))];
        let op = SparseHermitianOperator::from_upper_triplets(3, &up, OperatorMeta::custom())
            .unwrap();
        let back: Vec<_> = op.upper_triplets().collect();
        assert_eq!(back, up.to_vec());
        assert_eq!(op.entry(2, 0), c(0.5, 0.25));
        assert_eq!(op.bandwidth(), 2);
    }

    #[test]
    fn gershgorin_bounds_spectrum() {
        let op = SparseHermitianOperator::from_real_diagonal(&[3.0, -1.0], OperatorMeta::custom());
        assert_eq!(op.gershgorin_lower(), -1.0);
        assert_eq!(op.norm_inf(), 3.0);
    }
}
