//! Drift stencils, their Fourier symbol, and the limit coefficients.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat2, Vec2};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Translation-invariant drift coefficients `A_{0,x}` on a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftStencil {
    entries: Vec<([i64; 2], f64)>,
}

impl DriftStencil {
    /// Entries with the same displacement are merged.
    pub fn new(entries: &[([i64; 2], f64)]) -> Self {
        let mut out: Vec<([i64; 2], f64)> = Vec::new();
        for &(x, a) in entries {
            match out.iter_mut().find(|e| e.0 == x) {
                Some(e) => e.1 += a,
                None => out.push((x, a)),
            }
        }
        DriftStencil { entries: out }
    }

    pub fn zero() -> Self {
        DriftStencil {
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[([i64; 2], f64)] {
        &self.entries
    }

    /// `A_{0,x}`, zero off the support.
    pub fn coeff(&self, x: [i64; 2]) -> f64 {
        self.entries.iter().filter(|e| e.0 == x).map(|e| e.1).sum()
    }

    pub fn row_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Largest `|x|_inf` over the support.
    pub fn reach(&self) -> i64 {
        self.entries
            .iter()
            .map(|e| e.0[0].abs().max(e.0[1].abs()))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittakerParams {
    pub d: f64,
    pub c: f64,
    pub b: f64,
    /// Noise variance rate.
    pub v: f64,
}

/// The four-point stencil derived from the Whittaker driven particle system.
pub fn build_whittaker_stencil(d: f64, c: f64) -> Result<(DriftStencil, WhittakerParams)> {
    if !(d > 0.0 && c > 0.0 && c < d) || !d.is_finite() {
        return Err(Error::InvalidWhittaker { d, c });
    }
    let b = d - c;
    let eb = libm::exp(-b);
    let ec = libm::exp(-c);
    let ed = libm::exp(-d);
    let omb = -libm::expm1(-b);
    let omc = -libm::expm1(-c);
    let omd = -libm::expm1(-d);
    let diag_up = eb * omd / omc;
    let down = ec * omb * omd / (omc * omc);
    let left = -ed * omb / omc;
    let centre = -(diag_up + down + left);
    let stencil = DriftStencil::new(&[
        ([0, 0], centre),
        ([1, -1], diag_up),
        ([0, -1], down),
        ([-1, 0], left),
    ]);
    let v = omb * omd / omc;
    Ok((stencil, WhittakerParams { d, c, b, v }))
}

/// `A_hat(k) = sum_x A_{0,x} e^{i <x, k>}`.
pub fn a_hat(s: &DriftStencil, k: Vec2) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &(x, a) in &s.entries {
        let th = x[0] as f64 * k[0] + x[1] as f64 * k[1];
        let (sn, cs) = th.sin_cos();
        acc += C64::new(a * cs, a * sn);
    }
    acc
}

/// `(R, I) = (2 Re A_hat(k), 2 Im A_hat(k))`.
pub fn r_and_i(s: &DriftStencil, k: Vec2) -> (f64, f64) {
    let a = a_hat(s, k);
    (2.0 * a.re, 2.0 * a.im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCoefficients {
    /// Drift velocity `U`, so that `A_hat(k) = -i <k, U> + <k, Q k>/2 + O(|k|^3)`.
    pub velocity: Vec2,
    /// The negative definite form `Q`.
    pub diffusion: Mat2,
    /// `V = sqrt(-Q^{-1})`.
    pub normalizer: Mat2,
    pub det_normalizer: f64,
}

impl LimitCoefficients {
    pub fn normalizer_inverse(&self) -> Mat2 {
        // V is SPD by construction
        self.normalizer.inverse().unwrap_or(Mat2::IDENTITY)
    }
}

/// Analytic `U = i grad A_hat(0)` and `Q` with `R(k) = <k, Q k> + O(|k|^3)`.
pub fn limit_coefficients(s: &DriftStencil) -> Result<LimitCoefficients> {
    // grad A_hat(0) = sum_x A_{0,x} i x
    let mut grad = [C64::new(0.0, 0.0); 2];
    let mut q = [[0.0; 2]; 2];
    for &(x, a) in &s.entries {
        let xf = [x[0] as f64, x[1] as f64];
        for i in 0..2 {
            grad[i] += C64::new(0.0, a * xf[i]);
            for j in 0..2 {
                q[i][j] -= a * xf[i] * xf[j];
            }
        }
    }
    let u = [C64::new(0.0, 1.0) * grad[0], C64::new(0.0, 1.0) * grad[1]];
    let im = u[0].im.abs().max(u[1].im.abs());
    if im > 1e-12 {
        return Err(Error::ComplexVelocity(im));
    }
    let q = Mat2(q);
    let eig = q.sym_eigen();
    if !(eig.values[1] < -AssumptionReport::ZERO_TOL * eig.values[0].abs().max(1.0)) {
        return Err(Error::NotNegativeDefinite {
            eigenvalues: eig.values,
        });
    }
    // -Q^{-1} has eigenvalues -1/lambda on the same vectors
    let v = Mat2::from_eigen(
        [(-1.0 / eig.values[0]).sqrt(), (-1.0 / eig.values[1]).sqrt()],
        eig.vectors,
    );
    Ok(LimitCoefficients {
        velocity: [u[0].re, u[1].re],
        diffusion: q,
        normalizer: v,
        det_normalizer: v.det(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub max_abs_ahat0: f64,
    /// Largest `R(k)` over grid points `k != 0`.
    pub min_r_margin: f64,
    /// Smallest `-R(k)/|k|^2` over grid points `k != 0`.
    pub zero_margin: f64,
    pub unique_zero_ok: bool,
    pub q_eigs: [f64; 2],
    /// Largest `|R(k) - <k, Q k>| / |k|^3` over small `k`.
    pub taylor_residual: f64,
    /// Largest `|I(k)/2 + <k, U>| / |k|^3` over the grid.
    pub imag_residual: f64,
}

impl AssumptionReport {
    pub const ZERO_TOL: f64 = 1e-12;
    pub const MARGIN: f64 = 1e-6;

    pub fn checks(&self) -> [(&'static str, bool); 5] {
        [
            ("symbol vanishes at 0", self.max_abs_ahat0 < Self::ZERO_TOL),
            ("R <= 0 on the grid", self.min_r_margin <= Self::ZERO_TOL),
            ("unique zero of R", self.unique_zero_ok),
            (
                "Q negative definite",
                self.q_eigs[1] < -Self::ZERO_TOL * self.q_eigs[0].abs().max(1.0),
            ),
            (
                "Taylor residual finite",
                self.taylor_residual.is_finite() && self.imag_residual.is_finite(),
            ),
        ]
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

/// Evaluate the symbol on a `grid_n x grid_n` grid of `[-pi, pi)^2`, plus
/// dyadic rays towards the origin, and report each structural property.
pub fn validate_assumptions(s: &DriftStencil, grid_n: usize) -> Result<AssumptionReport> {
    if grid_n < 8 {
        return Err(Error::InvalidQuadrature(
            "assumption grid needs grid_n >= 8",
        ));
    }
    let mut q = [[0.0; 2]; 2];
    let mut u = [0.0; 2];
    for &(x, a) in &s.entries {
        let xf = [x[0] as f64, x[1] as f64];
        for i in 0..2 {
            u[i] -= a * xf[i];
            for j in 0..2 {
                q[i][j] -= a * xf[i] * xf[j];
            }
        }
    }
    let q = Mat2(q);
    let mut points: Vec<Vec2> = Vec::with_capacity(grid_n * grid_n + 256);
    let h = 2.0 * PI / grid_n as f64;
    for i in 0..grid_n {
        for j in 0..grid_n {
            points.push([-PI + h * i as f64, -PI + h * j as f64]);
        }
    }
    let mut small: Vec<Vec2> = Vec::new();
    for dir in 0..16 {
        let (sn, cs) = (2.0 * PI * dir as f64 / 16.0).sin_cos();
        for e in 0..12 {
            let r = 0.1 * libm::ldexp(1.0, -e);
            small.push([r * cs, r * sn]);
        }
    }
    points.extend_from_slice(&small);

    let mut max_r = f64::NEG_INFINITY;
    let mut margin = f64::INFINITY;
    let mut imag_res = 0.0f64;
    for k in &points {
        let k2 = dot(*k, *k);
        if k2 == 0.0 {
            continue;
        }
        let (r, i) = r_and_i(s, *k);
        max_r = max_r.max(r);
        margin = margin.min(-r / k2);
        let kn = k2.sqrt();
        imag_res = imag_res.max((0.5 * i + dot(*k, u)).abs() / (kn * kn * kn));
    }
    let mut taylor = 0.0f64;
    for k in &small {
        let kn = dot(*k, *k).sqrt();
        let (r, _) = r_and_i(s, *k);
        taylor = taylor.max((r - q.quad_form(*k)).abs() / (kn * kn * kn));
    }
    Ok(AssumptionReport {
        max_abs_ahat0: a_hat(s, [0.0, 0.0]).norm(),
        min_r_margin: max_r,
        zero_margin: margin,
        unique_zero_ok: margin > AssumptionReport::MARGIN,
        q_eigs: q.sym_eigen().values,
        taylor_residual: taylor,
        imag_residual: imag_res,
    })
}
