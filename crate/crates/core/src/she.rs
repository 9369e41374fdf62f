//! Reference values for the additive stochastic heat equation limit.

use core::f64::consts::PI;

use crate::drift::{LimitCoefficients, WhittakerParams};
use crate::error::{Error, Result};
use crate::linalg::{dot, Mat2, Vec2};
use crate::quadrature::{adaptive, GaussLegendre};
use crate::special::exp_integral_e1;
use crate::testfn::{GaussianComponent, GaussianTestFunction};

#[allow(unused_imports)]
use num_traits::Float;

/// `ln(1e16)`: the radial cutoff puts the Gaussian factor below `1e-16`.
const LN_CUTOFF: f64 = 36.841_361_487_904_734;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSpec {
    pub v: f64,
    pub q: Mat2,
    pub normalizer: Mat2,
    pub normalizer_inv: Mat2,
    pub det_normalizer: f64,
    /// `v |det V|`, the squared noise strength of the limit equation.
    pub sigma_eff_sq: f64,
}

impl LimitSpec {
    pub fn new(v: f64, lc: &LimitCoefficients) -> Self {
        LimitSpec {
            v,
            q: lc.diffusion,
            normalizer: lc.normalizer,
            normalizer_inv: lc.normalizer_inverse(),
            det_normalizer: lc.det_normalizer,
            sigma_eff_sq: v * lc.det_normalizer.abs(),
        }
    }

    pub fn from_whittaker(w: &WhittakerParams, lc: &LimitCoefficients) -> Self {
        Self::new(w.v, lc)
    }
}

/// Quadrature resolution for [`z0_covariance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarQuadrature {
    pub radial_n: usize,
    pub angular_n: usize,
    /// Relative tolerance of the adaptive angular integral.
    pub rel_tol: f64,
}

impl Default for PolarQuadrature {
    fn default() -> Self {
        PolarQuadrature {
            radial_n: 64,
            angular_n: 32,
            rel_tol: 1e-11,
        }
    }
}

/// Brownian transition semigroup on a Gaussian mixture:
/// `(a, c, sigma^2) -> (a sigma^2/(sigma^2 + t), c, sigma^2 + t)`.
pub fn heat_semigroup(phi: &GaussianTestFunction, t: f64) -> Result<GaussianTestFunction> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    GaussianTestFunction::new(
        phi.components()
            .iter()
            .map(|c| {
                let s2 = c.sigma * c.sigma;
                GaussianComponent {
                    amplitude: c.amplitude * s2 / (s2 + t),
                    center: c.center,
                    sigma: (s2 + t).sqrt(),
                }
            })
            .collect(),
    )
}

/// `int exp(-(y-m1)' S1^{-1} (y-m1)/2) exp(-(y-m2)' S2^{-1} (y-m2)/2) dy`.
fn gaussian_overlap(m1: Vec2, s1: &Mat2, m2: Vec2, s2: &Mat2) -> f64 {
    let sum = Mat2::new(
        s1.get(0, 0) + s2.get(0, 0),
        s1.get(0, 1) + s2.get(0, 1),
        s1.get(1, 0) + s2.get(1, 0),
        s1.get(1, 1) + s2.get(1, 1),
    );
    let d = [m1[0] - m2[0], m1[1] - m2[1]];
    let quad = sum
        .inverse()
        .map(|inv| inv.quad_form(d))
        .unwrap_or(f64::INFINITY);
    2.0 * PI * (s1.det() * s2.det() / sum.det()).sqrt() * (-0.5 * quad).exp()
}

/// `int psi(V^{-1} y) (P_t phi)(y) dy` in closed form.
pub fn y0_limit(
    psi: &GaussianTestFunction,
    phi: &GaussianTestFunction,
    t: f64,
    spec: &LimitSpec,
) -> Result<f64> {
    let heat = heat_semigroup(phi, t)?;
    let v = spec.normalizer;
    let v2 = v * v;
    let mut acc = 0.0;
    for a in psi.components() {
        // psi_a(V^{-1} y) has mean V c and covariance sigma^2 V^2
        let m1 = v.apply(a.center);
        let s1 = v2.scale(a.sigma * a.sigma);
        for b in heat.components() {
            let s2 = Mat2::diag(b.sigma * b.sigma, b.sigma * b.sigma);
            acc += a.amplitude * b.amplitude * gaussian_overlap(m1, &s1, b.center, &s2);
        }
    }
    Ok(acc)
}

/// `(e^{-(t-s) q/2} - e^{-(t+s) q/2}) / q = int_0^s e^{-(s+t-2r) q/2} dr`.
#[inline]
fn time_kernel(q: f64, s: f64, t: f64) -> f64 {
    if q < 1e-8 {
        s * (1.0 - 0.5 * t * q)
    } else {
        (-0.5 * (t - s) * q).exp() * (-libm::expm1(-s * q)) / q
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(s >= 0.0) {
        return Err(Error::NegativeTime(s));
    }
    if !(s <= t) {
        return Err(Error::TimeOrder { s, t });
    }
    Ok(())
}

/// Spectral covariance of the limit field,
/// `v int Re[F phi1_V(k) conj(F phi2_V(k))] g_{s,t}(q(k)) dk` with
/// `q(k) = -<k, Q k> = |V^{-1} k|^2` and `F phi_V(k) = F phi(V^{-1} k)`.
///
/// Polar coordinates: Gauss–Legendre in the radius up to a per-angle cutoff,
/// adaptive Gauss–Kronrod in the angle starting from `angular_n` panels.
pub fn z0_covariance(
    phi1: &GaussianTestFunction,
    phi2: &GaussianTestFunction,
    s: f64,
    t: f64,
    spec: &LimitSpec,
    quad: &PolarQuadrature,
) -> Result<f64> {
    check_times(s, t)?;
    if s == 0.0 || phi1.is_zero() || phi2.is_zero() {
        return Ok(0.0);
    }
    if quad.angular_n == 0 {
        return Err(Error::InvalidQuadrature("angular_n must be >= 1"));
    }
    let radial = GaussLegendre::new(quad.radial_n)?;
    let vi = spec.normalizer_inv;
    let min_s2 = |f: &GaussianTestFunction| {
        f.components()
            .iter()
            .map(|c| c.sigma * c.sigma)
            .fold(f64::INFINITY, f64::min)
    };
    // |F phi1 F phi2| <= C exp(-decay |V^{-1} k|^2 / 2)
    let decay = min_s2(phi1) + min_s2(phi2) + (t - s);
    let integrand_theta = |theta: f64| {
        let (sn, cs) = theta.sin_cos();
        let dir = [cs, sn];
        let lam = dot(vi.apply(dir), vi.apply(dir));
        let rho_max = (2.0 * LN_CUTOFF / (decay * lam)).sqrt();
        radial.integrate(0.0, rho_max, |rho| {
            let k = [rho * cs, rho * sn];
            let kv = vi.apply(k);
            let q = dot(kv, kv);
            let f = phi1.fourier(kv) * phi2.fourier(kv).conj();
            f.re * time_kernel(q, s, t) * rho
        })
    };
    let panels = quad.angular_n;
    let h = 2.0 * PI / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = h * p as f64;
        let est = adaptive(integrand_theta, a, a + h, 1e-15, quad.rel_tol, 200);
        total += est.value;
    }
    Ok(spec.v * total)
}

/// The same covariance in physical space:
/// `v |det V| int_0^s dr int int phi1(x) phi2(y) p_{s+t-2r}(x - y) dx dy`,
/// with the Gaussian convolutions in closed form and the `r` integral by
/// adaptive quadrature.
pub fn z0_covariance_kernel_form(
    phi1: &GaussianTestFunction,
    phi2: &GaussianTestFunction,
    s: f64,
    t: f64,
    spec: &LimitSpec,
) -> Result<f64> {
    check_times(s, t)?;
    let pair = |r: f64| {
        let tau = s + t - 2.0 * r;
        let mut acc = 0.0;
        for a in phi1.components() {
            for b in phi2.components() {
                let (sa, sb) = (a.sigma * a.sigma, b.sigma * b.sigma);
                let big = sa + sb + tau;
                let d = [a.center[0] - b.center[0], a.center[1] - b.center[1]];
                acc += a.amplitude
                    * b.amplitude
                    * (2.0 * PI).powi(2)
                    * sa
                    * sb
                    * (-dot(d, d) / (2.0 * big)).exp()
                    / (2.0 * PI * big);
            }
        }
        acc
    };
    let est = adaptive(pair, 0.0, s, 1e-16, 1e-13, 500);
    Ok(spec.sigma_eff_sq * est.value)
}

/// Standard two-dimensional heat kernel `p_tau(z) = e^{-|z|^2/(2 tau)}/(2 pi tau)`.
#[inline]
pub fn heat_kernel(tau: f64, z: Vec2) -> f64 {
    (-dot(z, z) / (2.0 * tau)).exp() / (2.0 * PI * tau)
}

/// `kappa = sigma_eff^2 int_0^{min(s,t)} p_{s+t-2r}(x - y) dr` by adaptive
/// quadrature.
pub fn she_kernel(x: Vec2, s: f64, y: Vec2, t: f64, spec: &LimitSpec) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeTime(s));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let d = [x[0] - y[0], x[1] - y[1]];
    if s == t && d == [0.0, 0.0] {
        return Err(Error::Diagonal);
    }
    let lo = s.min(t);
    if lo == 0.0 {
        return Ok(0.0);
    }
    // u = s + t - 2r runs over [|s - t|, s + t]; integrand p_u(d)/2 peaks
    // near the lower end when d is small, so integrate in log u.
    let (u0, u1) = ((s - t).abs(), s + t);
    let est = if u0 > 0.0 {
        adaptive(
            |w: f64| {
                let u = w.exp();
                0.5 * heat_kernel(u, d) * u
            },
            u0.ln(),
            u1.ln(),
            1e-300,
            1e-13,
            2000,
        )
    } else {
        // u0 = 0 forces d != 0, and p_u(d) vanishes to all orders at u = 0
        let floor = (dot(d, d) * 1e-3).min(u1 * 1e-12);
        adaptive(
            |w: f64| {
                let u = w.exp();
                0.5 * heat_kernel(u, d) * u
            },
            floor.ln(),
            u1.ln(),
            1e-300,
            1e-13,
            2000,
        )
    };
    Ok(spec.sigma_eff_sq * est.value)
}

/// Equal-time closed form `(sigma_eff^2 / 4 pi) E1(|x - y|^2 / (4 t))`.
pub fn she_kernel_equal_time(d: f64, t: f64, spec: &LimitSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if d == 0.0 {
        return Err(Error::Diagonal);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.sigma_eff_sq / (4.0 * PI) * exp_integral_e1(d * d / (4.0 * t)))
}
