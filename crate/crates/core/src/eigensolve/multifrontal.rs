//! Inertia of a sparse symmetric matrix by multifrontal LDL^T over a
//! geometric nested-dissection ordering of its grid layout.
//!
//! Factors are never stored: each front is partially factored, its pivot
//! signs are tallied and only the Schur complement is passed to the parent.

use num_complex::Complex64;

use super::frontal::{extract_schur, partial_ldlt, Breakdown};
use crate::operators::{GridLayout, SparseHermitianOperator};

const LEAF_NODES: usize = 16;
const UNSET: u32 = u32::MAX;

/// Real symmetric matrix in CSR form (full pattern).
pub(crate) struct RealSym {
    pub n: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl RealSym {
    /// Real operators are copied; complex Hermitian ones are embedded as the
    /// real symmetric `[[B, -C], [C, B]]` (interleaved per unknown), whose
    /// spectrum is that of `B + iC` with every eigenvalue doubled.
    pub(crate) fn from_operator(op: &SparseHermitianOperator) -> (Self, bool) {
        let n = op.dimension();
        if op.is_real() {
            let mut row_ptr = Vec::with_capacity(n + 1);
            let mut col = Vec::with_capacity(op.nnz());
            let mut val = Vec::with_capacity(op.nnz());
            row_ptr.push(0);
            for i in 0..n {
                for (j, v) in op.row(i) {
                    col.push(j as u32);
                    val.push(v.re);
                }
                row_ptr.push(col.len());
            }
            (Self { n, row_ptr, col, val }, false)
        } else {
            let mut row_ptr = Vec::with_capacity(2 * n + 1);
            let mut col = Vec::with_capacity(4 * op.nnz());
            let mut val = Vec::with_capacity(4 * op.nnz());
            row_ptr.push(0);
            for i in 0..n {
                for r in 0..2 {
                    for (j, v) in op.row(i) {
                        let Complex64 { re: b, im: c } = v;
                        // row 2i: [b, -c]; row 2i+1: [c, b]
                        let (v0, v1) = if r == 0 { (b, -c) } else { (c, b) };
                        if v0 != 0.0 || i == j {
                            col.push((2 * j) as u32);
                            val.push(v0);
                        }
                        if v1 != 0.0 || i == j {
                            col.push((2 * j + 1) as u32);
                            val.push(v1);
                        }
                    }
                    row_ptr.push(col.len());
                }
            }
            (Self { n: 2 * n, row_ptr, col, val }, true)
        }
    }

    pub(crate) fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
struct Rect {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

impl Rect {
    fn nodes(&self) -> usize {
        (self.i1 - self.i0) * (self.j1 - self.j0)
    }
}

struct Contribution {
    idx: Vec<u32>,
    data: Vec<f64>,
}

struct Engine<'a> {
    a: &'a RealSym,
    layout: GridLayout,
    shift: f64,
    tiny: f64,
    pos: Vec<u32>,
    negative: usize,
}

impl<'a> Engine<'a> {
    fn push_node_dofs(&self, i: usize, j: usize, out: &mut Vec<u32>) {
        let c = self.layout.components;
        let base = (i * self.layout.ny + j) * c;
        out.extend((base..base + c).map(|d| d as u32));
    }

    fn push_rect(&self, r: Rect, out: &mut Vec<u32>) {
        for i in r.i0..r.i1 {
            for j in r.j0..r.j1 {
                self.push_node_dofs(i, j, out);
            }
        }
    }

    /// Nodes within `reach` of `r` but outside it, clipped to the grid.
    fn push_frame(&self, r: Rect, out: &mut Vec<u32>) {
        let w = self.layout.reach;
        let (fi0, fi1) = (r.i0.saturating_sub(w), (r.i1 + w).min(self.layout.nx));
        let (fj0, fj1) = (r.j0.saturating_sub(w), (r.j1 + w).min(self.layout.ny));
        for i in fi0..fi1 {
            for j in fj0..fj1 {
                let inside = i >= r.i0 && i < r.i1 && j >= r.j0 && j < r.j1;
                if !inside {
                    self.push_node_dofs(i, j, out);
                }
            }
        }
    }

    fn process(&mut self, r: Rect) -> Result<Contribution, Breakdown> {
        let w = self.layout.reach;
        let (lx, ly) = (r.i1 - r.i0, r.j1 - r.j0);
        let mut children = Vec::new();
        let sep;
        if r.nodes() > LEAF_NODES && lx.max(ly) > 2 * w {
            if lx >= ly {
                let mid = r.i0 + (lx - w) / 2;
                sep = Rect { i0: mid, i1: mid + w, ..r };
                children.push(Rect { i1: mid, ..r });
                children.push(Rect { i0: mid + w, ..r });
            } else {
                let mid = r.j0 + (ly - w) / 2;
                sep = Rect { j0: mid, j1: mid + w, ..r };
                children.push(Rect { j1: mid, ..r });
                children.push(Rect { j0: mid + w, ..r });
            }
        } else {
            sep = r;
        }
        let mut cbs = Vec::with_capacity(2);
        for c in children {
            if c.nodes() > 0 {
                cbs.push(self.process(c)?);
            }
        }

        let mut idx = Vec::new();
        self.push_rect(sep, &mut idx);
        let s = idx.len();
        self.push_frame(r, &mut idx);
        let n = idx.len();
        for (p, &g) in idx.iter().enumerate() {
            self.pos[g as usize] = p as u32;
        }

        let mut f = vec![0.0; n * n];
        for (pi, &gi) in idx[..s].iter().enumerate() {
            let gi = gi as usize;
            for k in self.a.row_ptr[gi]..self.a.row_ptr[gi + 1] {
                let pj = self.pos[self.a.col[k] as usize];
                if pj == UNSET {
                    continue;
                }
                let pj = pj as usize;
                let mut v = self.a.val[k];
                if pj == pi {
                    v -= self.shift;
                }
                if pj >= s {
                    f[pj + pi * n] += v;
                } else if pj <= pi {
                    f[pi + pj * n] += v;
                }
            }
        }
        for cb in &cbs {
            let b = cb.idx.len();
            let loc: Vec<usize> = cb.idx.iter().map(|&g| self.pos[g as usize] as usize).collect();
            for c in 0..b {
                let pc = loc[c];
                for rr in c..b {
                    let pr = loc[rr];
                    let (hi, lo) = if pr >= pc { (pr, pc) } else { (pc, pr) };
                    f[hi + lo * n] += cb.data[rr + c * b];
                }
            }
        }
        for &g in &idx {
            self.pos[g as usize] = UNSET;
        }
        drop(cbs);

        let inertia = partial_ldlt(&mut f, n, s, self.tiny)?;
        self.negative += inertia.negative;
        let data = extract_schur(&f, n, s);
        idx.drain(..s);
        Ok(Contribution { idx, data })
    }
}

/// Number of eigenvalues of `a` below `shift`.
pub(crate) fn count_below(
    a: &RealSym,
    layout: Option<GridLayout>,
    shift: f64,
    tiny: f64,
) -> Result<usize, Breakdown> {
    // without geometry the whole matrix is a single front
    let layout = layout.unwrap_or(GridLayout {
        nx: 1,
        ny: 1,
        components: a.n,
        reach: 1,
    });
    assert_eq!(layout.dimension(), a.n, "layout does not match matrix");
    let mut e = Engine {
        a,
        layout,
        shift,
        tiny,
        pos: vec![UNSET; a.n],
        negative: 0,
    };
    let root = Rect {
        i0: 0,
        i1: layout.nx,
        j0: 0,
        j1: layout.ny,
    };
    let cb = e.process(root)?;
    debug_assert!(cb.idx.is_empty());
    Ok(e.negative)
}
