#![allow(dead_code)]

use admodes_core::bratu::BratuProblem;
use admodes_core::sparse::SparsityPattern;
use admodes_core::{Active, Matrix, Result, VectorFunction};

/// Jacobian of `(x, s, t) -> F` written out by hand from the residual formula.
pub fn closed_form_jacobian(p: &BratuProblem, x: &[f64]) -> Matrix {
    let n = p.dim();
    let (s, t) = (p.s, p.t);
    let w = p.h() * p.h() / 12.0;
    let f = |z: f64| s * (z / (1.0 + t * z)).exp();
    let fx = |z: f64| f(z) / (1.0 + t * z).powi(2);
    let ft = |z: f64| -f(z) * z * z / (1.0 + t * z).powi(2);
    let xs = |i: isize| {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            x[i as usize]
        }
    };
    let mut j = Matrix::zeros(n, n + 2);
    for i in 0..n {
        let ii = i as isize;
        j[(i, i)] = -2.0 + 10.0 * w * fx(x[i]);
        if i > 0 {
            j[(i, i - 1)] = 1.0 + w * fx(x[i - 1]);
        }
        if i + 1 < n {
            j[(i, i + 1)] = 1.0 + w * fx(x[i + 1]);
        }
        let (l, c, r) = (xs(ii - 1), xs(ii), xs(ii + 1));
        j[(i, n)] = w * (f(l) + 10.0 * f(c) + f(r)) / s;
        j[(i, n + 1)] = w * (ft(l) + 10.0 * ft(c) + ft(r));
    }
    j
}

/// The printed 7x9 Jacobian at the fixture (two decimals).
pub const PRINTED_DENSE: [[f64; 9]; 7] = [
    [-1.88, 1.01, 0., 0., 0., 0., 0., 0.21, -0.48],
    [1.01, -1.87, 1.01, 0., 0., 0., 0., 0.39, -1.78],
    [0., 1.01, -1.87, 1.01, 0., 0., 0., 0.48, -2.69],
    [0., 0., 1.01, -1.87, 1.01, 0., 0., 0.55, -3.49],
    [0., 0., 0., 1.01, -1.87, 1.01, 0., 0.48, -2.69],
    [0., 0., 0., 0., 1.01, -1.87, 1.01, 0.39, -1.78],
    [0., 0., 0., 0., 0., 1.01, -1.88, 0.21, -0.48],
];

/// The printed compressed 7x5 Jacobian.
pub const PRINTED_COMPRESSED: [[f64; 5]; 7] = [
    [-1.88, 1.01, 0., 0.21, -0.48],
    [1.01, -1.87, 1.01, 0.39, -1.78],
    [1.01, 1.01, -1.87, 0.48, -2.69],
    [-1.87, 1.01, 1.01, 0.55, -3.49],
    [1.01, -1.87, 1.01, 0.48, -2.69],
    [1.01, 1.01, -1.87, 0.39, -1.78],
    [-1.88, 0., 1.01, 0.21, -0.48],
];

/// The printed CPR seed.
pub const PRINTED_SEED: [[f64; 5]; 9] = [
    [1., 0., 0., 0., 0.],
    [0., 1., 0., 0., 0.],
    [0., 0., 1., 0., 0.],
    [1., 0., 0., 0., 0.],
    [0., 1., 0., 0., 0.],
    [0., 0., 1., 0., 0.],
    [1., 0., 0., 0., 0.],
    [0., 0., 0., 1., 0.],
    [0., 0., 0., 0., 1.],
];

/// Printed two-decimal values are truncated toward zero.
pub fn truncate2(v: f64) -> f64 {
    (v * 100.0).trunc() / 100.0
}

pub fn display_matches(computed: f64, printed: f64) -> bool {
    (truncate2(computed) - printed).abs() < 1e-9
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn fixture_point() -> (BratuProblem, Vec<f64>) {
    let p = BratuProblem::fixture();
    let x = p.point_with_params(&admodes_core::bratu::FIXTURE_STATE);
    (p, x)
}

/// `f_i = sum_{j in row i} c_ij sin(x_j) + x_a x_b` for the first two columns
/// `a, b` of row `i`; its Jacobian support is exactly the pattern.
pub struct PatternFunction {
    pub pattern: SparsityPattern,
    pub coeffs: Vec<Vec<f64>>,
}

impl VectorFunction for PatternFunction {
    fn n_independents(&self) -> usize {
        self.pattern.n_cols()
    }

    fn m_dependents(&self) -> usize {
        self.pattern.n_rows()
    }

    fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
        self.pattern
            .rows()
            .iter()
            .zip(&self.coeffs)
            .map(|(row, c)| {
                let mut acc = x[0].constant(0.0)?;
                for (&j, &cj) in row.iter().zip(c) {
                    acc = acc.add(&x[j - 1].sin()?.mul_const(cj)?)?;
                }
                if row.len() >= 2 {
                    acc = acc.add(&x[row[0] - 1].mul(&x[row[1] - 1])?)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

/// A tridiagonal-support function with random coefficients.
pub struct Band {
    pub coeffs: Vec<f64>,
}

impl VectorFunction for Band {
    fn n_independents(&self) -> usize {
        self.coeffs.len()
    }

    fn m_dependents(&self) -> usize {
        self.coeffs.len()
    }

    fn eval<S: Active>(&self, x: &[S]) -> Result<Vec<S>> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = x[i].mul_const(self.coeffs[i])?.exp()?;
                if i > 0 {
                    v = v.add(&x[i - 1].mul(&x[i])?)?;
                }
                if i + 1 < n {
                    v = v.sub(&x[i + 1].cos()?.mul_const(self.coeffs[i + 1])?)?;
                }
                Ok(v)
            })
            .collect()
    }
}
