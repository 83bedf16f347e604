//! Minimal 2×2 real matrix algebra used by the normal-form machinery.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    /// `None` when the matrix is singular.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        ))
    }

    #[inline]
    pub fn mul_vec(&self, x: &[f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * x[0] + self.0[0][1] * x[1],
            self.0[1][0] * x[0] + self.0[1][1] * x[1],
        ]
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        Mat2(out)
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        Mat2::new(
            self.0[0][0] + other.0[0][0],
            self.0[0][1] + other.0[0][1],
            self.0[1][0] + other.0[1][0],
            self.0[1][1] + other.0[1][1],
        )
    }

    pub fn scale(&self, c: f64) -> Mat2 {
        Mat2::new(
            c * self.0[0][0],
            c * self.0[0][1],
            c * self.0[1][0],
            c * self.0[1][1],
        )
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }

    /// Eigenvalues as `(re, im)` pairs; a complex pair is returned with the positive
    /// imaginary part first.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.det();
        if disc >= 0.0 {
            let s = disc.sqrt();
            [(half_tr + s, 0.0), (half_tr - s, 0.0)]
        } else {
            let s = (-disc).sqrt();
            [(half_tr, s), (half_tr, -s)]
        }
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        // Largest eigenvalue of the symmetric matrix MᵀM.
        let g = self.transpose().mul(self);
        let half_tr = 0.5 * g.trace();
        let disc = (half_tr * half_tr - g.det()).max(0.0);
        (half_tr + disc.sqrt()).max(0.0).sqrt()
    }
}

#[inline]
pub fn norm2(x: &[f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

#[inline]
pub fn add2(x: &[f64; 2], y: &[f64; 2]) -> [f64; 2] {
    [x[0] + y[0], x[1] + y[1]]
}

#[inline]
pub fn sub2(x: &[f64; 2], y: &[f64; 2]) -> [f64; 2] {
    [x[0] - y[0], x[1] - y[1]]
}

#[inline]
pub fn dot2(x: &[f64; 2], y: &[f64; 2]) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}
