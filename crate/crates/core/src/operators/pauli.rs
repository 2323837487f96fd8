//! Fixed 2x2 representation of the Clifford generators acting on spinors.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

const O: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const IDENTITY: Mat2 = [[ONE, O], [O, ONE]];
pub const GAMMA1: Mat2 = [[O, ONE], [ONE, O]];
pub const GAMMA2: Mat2 = [[ONE, O], [O, Complex64::new(-1.0, 0.0)]];
/// `gamma3 = -i gamma1 gamma2`. With this orientation the supercharge squares
/// to `-Lap + x^2 y^2 + x gamma1 - y gamma2`.
pub const GAMMA3: Mat2 = [[O, I], [Complex64::new(0.0, -1.0), O]];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliAlgebra {
    pub gamma1: Mat2,
    pub gamma2: Mat2,
    pub gamma3: Mat2,
}

impl Default for PauliAlgebra {
    fn default() -> Self {
        Self::standard()
    }
}

impl PauliAlgebra {
    pub fn standard() -> Self {
        Self {
            gamma1: GAMMA1,
            gamma2: GAMMA2,
            gamma3: GAMMA3,
        }
    }

    pub fn gammas(&self) -> [Mat2; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }

    /// Largest entry deviation from `g_j g_k + g_k g_j = 2 delta_jk I`.
    pub fn clifford_defect(&self) -> f64 {
        let g = self.gammas();
        let mut worst = 0.0f64;
        for j in 0..3 {
            for k in 0..3 {
                let ac = add(&mul(&g[j], &g[k]), &mul(&g[k], &g[j]));
                let target = if j == k { scale(&IDENTITY, 2.0) } else { [[O; 2]; 2] };
                worst = worst.max(max_abs_diff(&ac, &target));
            }
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.gammas()
            .iter()
            .map(|g| max_abs_diff(g, &adjoint(g)))
            .fold(0.0, f64::max)
    }
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[O; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = *a;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat2, s: f64) -> Mat2 {
    let mut c = *a;
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    c
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn apply(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}
