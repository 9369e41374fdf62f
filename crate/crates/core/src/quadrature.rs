//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Tricomi initial guess.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQuadrature(
                "Gauss-Legendre order must be >= 1",
            ));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[0, 1]`.
    pub fn unit_interval(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss–Legendre rule on a rectangle, split into `panels x panels`
/// sub-rectangles.
#[derive(Debug, Clone)]
pub struct TensorRule {
    rule: GaussLegendre,
    panels: usize,
}

impl TensorRule {
    pub fn new(order: usize, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::InvalidQuadrature("panel count must be >= 1"));
        }
        Ok(TensorRule {
            rule: GaussLegendre::new(order)?,
            panels,
        })
    }

    pub fn integrate<T, F>(&self, lo: [f64; 2], hi: [f64; 2], mut f: F) -> T
    where
        T: Default + core::ops::AddAssign + core::ops::Mul<f64, Output = T>,
        F: FnMut([f64; 2]) -> T,
    {
        let p = self.panels;
        let h = [(hi[0] - lo[0]) / p as f64, (hi[1] - lo[1]) / p as f64];
        let mut acc = T::default();
        for i in 0..p {
            for j in 0..p {
                let a = [lo[0] + h[0] * i as f64, lo[1] + h[1] * j as f64];
                for (u, wu) in self.rule.unit_interval() {
                    for (v, wv) in self.rule.unit_interval() {
                        acc += f([a[0] + h[0] * u, a[1] + h[1] * v]) * (wu * wv);
                    }
                }
            }
        }
        acc * (h[0] * h[1])
    }
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (the 7-point rule).
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS7_WEIGHTS[3];
    for i in 0..7 {
        let x = h * KRONROD_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * s;
        }
    }
    Estimate {
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration: repeatedly bisects
/// the interval with the largest error estimate until the total error is
/// below `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let mut parts: Vec<(f64, f64, Estimate)> = Vec::new();
    parts.push((a, b, gk15(&mut f, a, b)));
    loop {
        let value: f64 = parts.iter().map(|p| p.2.value).sum();
        let error: f64 = parts.iter().map(|p| p.2.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || parts.len() >= max_intervals {
            return Estimate { value, error };
        }
        let (worst, _) = parts.iter().enumerate().fold((0, -1.0), |best, (i, p)| {
            if p.2.error > best.1 {
                (i, p.2.error)
            } else {
                best
            }
        });
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Estimate { value, error };
        }
        parts.push((lo, mid, gk15(&mut f, lo, mid)));
        parts.push((mid, hi, gk15(&mut f, mid, hi)));
    }
}
