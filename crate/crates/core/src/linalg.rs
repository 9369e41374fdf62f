//! Dense 2x2 real matrices, which is all the limit coefficients need.

use core::ops::Mul;

#[allow(unused_imports)]
use num_traits::Float;

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Eigen-decomposition of a symmetric matrix: `values[i]` belongs to the
/// unit column `vectors[i]`, values ascending.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen {
    pub values: [f64; 2],
    pub vectors: [Vec2; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ]))
    }

    pub fn scale(&self, c: f64) -> Self {
        let a = self.0;
        Mat2([[c * a[0][0], c * a[0][1]], [c * a[1][0], c * a[1][1]]])
    }

    #[inline]
    pub fn apply(&self, x: Vec2) -> Vec2 {
        [
            self.0[0][0] * x[0] + self.0[0][1] * x[1],
            self.0[1][0] * x[0] + self.0[1][1] * x[1],
        ]
    }

    /// `<x, M x>`.
    #[inline]
    pub fn quad_form(&self, x: Vec2) -> f64 {
        let y = self.apply(x);
        x[0] * y[0] + x[1] * y[1]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }

    /// Eigen-decomposition by a Jacobi rotation. Uses the symmetric part.
    pub fn sym_eigen(&self) -> SymEigen {
        let a = self.0[0][0];
        let d = self.0[1][1];
        let b = 0.5 * (self.0[0][1] + self.0[1][0]);
        if b == 0.0 {
            return if a <= d {
                SymEigen {
                    values: [a, d],
                    vectors: [[1.0, 0.0], [0.0, 1.0]],
                }
            } else {
                SymEigen {
                    values: [d, a],
                    vectors: [[0.0, 1.0], [1.0, 0.0]],
                }
            };
        }
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (s, c) = theta.sin_cos();
        // (c, s) carries the larger eigenvalue.
        let hi = a * c * c + 2.0 * b * s * c + d * s * s;
        let lo = a * s * s - 2.0 * b * s * c + d * c * c;
        SymEigen {
            values: [lo, hi],
            vectors: [[-s, c], [c, s]],
        }
    }

    /// Principal square root of a symmetric positive definite matrix.
    /// `None` if an eigenvalue is not strictly positive.
    pub fn sqrt_spd(&self) -> Option<Self> {
        let e = self.sym_eigen();
        if !(e.values[0] > 0.0) {
            return None;
        }
        Some(Self::from_eigen(
            [e.values[0].sqrt(), e.values[1].sqrt()],
            e.vectors,
        ))
    }

    /// `sum_i values[i] v_i v_i^T`.
    pub fn from_eigen(values: [f64; 2], vectors: [Vec2; 2]) -> Self {
        let mut m = [[0.0; 2]; 2];
        for (lam, v) in values.iter().zip(vectors.iter()) {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += lam * v[i] * v[j];
                }
            }
        }
        Mat2(m)
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        let ata = self.transpose() * *self;
        ata.sym_eigen().values[1].max(0.0).sqrt()
    }

    /// Euclidean norm of row `i`.
    pub fn row_norm(&self, i: usize) -> f64 {
        self.0[i][0].hypot(self.0[i][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = self.0;
        let b = rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}
