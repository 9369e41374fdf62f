//! Finite Gaussian mixtures used as test functions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{dot, Vec2};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// `a exp(-|z - c|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub amplitude: f64,
    pub center: Vec2,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianTestFunction {
    components: Vec<GaussianComponent>,
}

impl GaussianTestFunction {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        for c in &components {
            if !(c.sigma > 0.0) || !c.sigma.is_finite() {
                return Err(Error::InvalidSigma(c.sigma));
            }
        }
        Ok(GaussianTestFunction { components })
    }

    pub fn zero() -> Self {
        GaussianTestFunction::default()
    }

    /// `exp(-|z|^2 / 2)`.
    pub fn unit() -> Self {
        GaussianTestFunction {
            components: alloc::vec![GaussianComponent {
                amplitude: 1.0,
                center: [0.0, 0.0],
                sigma: 1.0,
            }],
        }
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.amplitude == 0.0)
    }

    #[inline]
    pub fn eval(&self, z: Vec2) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let d = [z[0] - c.center[0], z[1] - c.center[1]];
                c.amplitude * (-dot(d, d) / (2.0 * c.sigma * c.sigma)).exp()
            })
            .sum()
    }

    /// `int phi = sum_j a_j 2 pi sigma_j^2`.
    pub fn integral(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * 2.0 * PI * c.sigma * c.sigma)
            .sum()
    }

    /// `F phi(k) = (1/2 pi) int phi(z) e^{i<k,z>} dz`.
    pub fn fourier(&self, k: Vec2) -> C64 {
        let k2 = dot(k, k);
        self.components
            .iter()
            .map(|c| {
                let s2 = c.sigma * c.sigma;
                let (sn, cs) = dot(k, c.center).sin_cos();
                C64::new(cs, sn) * (c.amplitude * s2 * (-0.5 * s2 * k2).exp())
            })
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GaussianTestFunction {
            components: self
                .components
                .iter()
                .map(|c| GaussianComponent {
                    amplitude: c.amplitude * factor,
                    ..*c
                })
                .collect(),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        GaussianTestFunction { components }
    }

    /// A lower bound for `max |phi|`: the largest value at a centre, or the
    /// amplitude bound when all centre values cancel.
    pub fn peak(&self) -> f64 {
        let at_centres = self
            .components
            .iter()
            .map(|c| self.eval(c.center).abs())
            .fold(0.0, f64::max);
        if at_centres > 0.0 {
            at_centres
        } else {
            self.amplitude_bound()
        }
    }

    /// `sum_j |a_j|`, an upper bound for `max |phi|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude.abs()).sum()
    }

    /// Upper bound of `|phi|` over the ball of radius `rho` around `z`.
    pub fn ball_bound(&self, z: Vec2, rho: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let d = [z[0] - c.center[0], z[1] - c.center[1]];
                let r = (dot(d, d).sqrt() - rho).max(0.0);
                c.amplitude.abs() * (-r * r / (2.0 * c.sigma * c.sigma)).exp()
            })
            .sum()
    }

    /// A radius `R` such that `|phi(z)| < threshold` whenever `|z| >= R`.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        let n = self.components.len() as f64;
        self.components
            .iter()
            .filter(|c| c.amplitude != 0.0)
            .map(|c| {
                let ratio = n * c.amplitude.abs() / threshold;
                let r = if ratio > 1.0 {
                    c.sigma * (2.0 * ratio.ln()).sqrt()
                } else {
                    0.0
                };
                dot(c.center, c.center).sqrt() + r
            })
            .fold(0.0, f64::max)
    }
}
