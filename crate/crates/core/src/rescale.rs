//! Diffusive rescaling along drifting floor meshes.
//!
//! The rescaled field pairs the lattice field at time `t/delta` with a test
//! function through the mesh `x = floor(U t / delta + V^{-1} z / sqrt(delta))`.
//! Since the lattice field is constant on each preimage cell, the pairing is a
//! finite weighted sum over sites, with weights computed once per time.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::drift::LimitCoefficients;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::quadrature::GaussLegendre;
use crate::rng::RngStream;
use crate::spectral::{ModeState, ModeTransition, SpectralModel};
use crate::testfn::GaussianTestFunction;
use crate::torus::{Site, Torus};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleScheme {
    delta: f64,
    velocity: Vec2,
    normalizer: Mat2,
    normalizer_inv: Mat2,
    det_normalizer: f64,
}

impl RescaleScheme {
    pub fn new(delta: f64, lc: &LimitCoefficients) -> Result<Self> {
        Self::from_parts(delta, lc.velocity, lc.normalizer)
    }

    /// A scheme with arbitrary `U` and invertible `V`.
    pub fn from_parts(delta: f64, velocity: Vec2, normalizer: Mat2) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidDelta(delta));
        }
        let inv = normalizer.inverse().ok_or(Error::NotNegativeDefinite {
            eigenvalues: [0.0, 0.0],
        })?;
        Ok(RescaleScheme {
            delta,
            velocity,
            normalizer,
            normalizer_inv: inv,
            det_normalizer: normalizer.det(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn velocity(&self) -> Vec2 {
        self.velocity
    }

    pub fn normalizer(&self) -> &Mat2 {
        &self.normalizer
    }

    pub fn normalizer_inverse(&self) -> &Mat2 {
        &self.normalizer_inv
    }

    /// Lattice time `t / delta` at which macroscopic time `t` is read.
    pub fn lattice_time(&self, t: f64) -> f64 {
        t / self.delta
    }

    /// `U t / delta`.
    pub fn drift_shift(&self, t: f64) -> Vec2 {
        [
            self.velocity[0] * t / self.delta,
            self.velocity[1] * t / self.delta,
        ]
    }

    /// `floor(U t / delta + V^{-1} z / sqrt(delta))`, componentwise.
    pub fn floor_mesh(&self, z: Vec2, t: f64) -> [i64; 2] {
        let s = self.normalizer_inv.apply(z);
        let c = self.drift_shift(t);
        let r = 1.0 / self.delta.sqrt();
        [
            (c[0] + r * s[0]).floor() as i64,
            (c[1] + r * s[1]).floor() as i64,
        ]
    }

    /// The point of cell `x` with local coordinates `w` in `[0, 1)^2`:
    /// `sqrt(delta) V (x + w - U t / delta)`.
    #[inline]
    pub fn cell_point(&self, x: [i64; 2], w: Vec2, t: f64) -> Vec2 {
        let c = self.drift_shift(t);
        let h = self.delta.sqrt();
        let u = [
            h * (x[0] as f64 + w[0] - c[0]),
            h * (x[1] as f64 + w[1] - c[1]),
        ];
        self.normalizer.apply(u)
    }

    /// Radius of the smallest ball around a cell centre containing the cell.
    pub fn cell_radius(&self) -> f64 {
        self.delta.sqrt() * self.normalizer.norm2() * core::f64::consts::FRAC_1_SQRT_2
    }
}

/// The nearest point of `sqrt(delta) Z - U_j t / sqrt(delta)` at or below
/// `z_j`, for each coordinate.
pub fn modified_floor(z: Vec2, t: f64, delta: f64, u: Vec2) -> Vec2 {
    let h = delta.sqrt();
    let mut out = [0.0; 2];
    for j in 0..2 {
        let o = u[j] * t / h;
        let mut n = ((z[j] + o) / h).floor();
        // guard against rounding at cell edges
        if z[j] - (h * n - o) < 0.0 {
            n -= 1.0;
        }
        if z[j] - (h * n - o) >= h {
            n += 1.0;
        }
        out[j] = h * n - o;
    }
    out
}

/// Cell integrals of a test function at one macroscopic time.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub entries: Vec<([i64; 2], f64)>,
    pub t: f64,
    pub delta: f64,
    pub total: f64,
}

impl WeightTable {
    pub fn empty(t: f64, delta: f64) -> Self {
        WeightTable {
            entries: Vec::new(),
            t,
            delta,
            total: 0.0,
        }
    }

    /// Largest coordinate spread of the retained sites.
    pub fn diameter(&self) -> i64 {
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for (x, _) in &self.entries {
            for i in 0..2 {
                lo[i] = lo[i].min(x[i]);
                hi[i] = hi[i].max(x[i]);
            }
        }
        if self.entries.is_empty() {
            return 0;
        }
        (hi[0] - lo[0]).max(hi[1] - lo[1])
    }

    /// Weight support diameter plus drift displacement, in sites.
    pub fn wrap_extent(&self, sch: &RescaleScheme) -> f64 {
        let u = sch.velocity();
        self.diameter() as f64 + self.t / self.delta * u[0].abs().max(u[1].abs())
    }

    /// Require the extent to stay below `m/2` so wrapping cannot alias.
    pub fn check_wrap(&self, sch: &RescaleScheme, m: i64) -> Result<()> {
        let extent = self.wrap_extent(sch);
        if extent < m as f64 / 2.0 {
            Ok(())
        } else {
            Err(Error::WrapUnsafe { extent, m })
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightTable {
            entries: self.entries.iter().map(|&(x, w)| (x, w * c)).collect(),
            total: self.total * c,
            ..*self
        }
    }
}

/// `w_x = int_{cell(x)} phi`, by a `quad_n x quad_n` Gauss–Legendre rule on
/// each cell after the change of variables to the unit square.
///
/// A cell is dropped only when a rigorous bound of `|phi|` over it is below
/// `eps * max|phi|`.
pub fn cell_weights(
    phi: &GaussianTestFunction,
    t: f64,
    sch: &RescaleScheme,
    eps: f64,
    quad_n: usize,
) -> Result<WeightTable> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEps(eps));
    }
    if quad_n < 2 {
        return Err(Error::InvalidQuadrature("cell rule needs quad_n >= 2"));
    }
    let mut table = WeightTable::empty(t, sch.delta);
    if phi.is_zero() {
        return Ok(table);
    }
    let threshold = eps * phi.peak();
    let rho = sch.cell_radius();
    let reach = phi.support_radius(threshold) + rho;
    let c = sch.drift_shift(t);
    let r = 1.0 / sch.delta.sqrt();
    let vi = sch.normalizer_inverse();
    let mut lo = [0i64; 2];
    let mut hi = [0i64; 2];
    for i in 0..2 {
        let half = r * reach * vi.row_norm(i) + 1.0;
        lo[i] = (c[i] - half).floor() as i64;
        hi[i] = (c[i] + half).ceil() as i64;
    }
    let gl = GaussLegendre::new(quad_n)?;
    let nodes: Vec<(f64, f64)> = gl.unit_interval().collect();
    let jac = sch.delta * sch.det_normalizer.abs();
    for x2 in lo[1]..=hi[1] {
        for x1 in lo[0]..=hi[0] {
            let x = [x1, x2];
            let centre = sch.cell_point(x, [0.5, 0.5], t);
            if phi.ball_bound(centre, rho) < threshold {
                continue;
            }
            let mut acc = 0.0;
            for &(a, wa) in &nodes {
                for &(b, wb) in &nodes {
                    acc += wa * wb * phi.eval(sch.cell_point(x, [a, b], t));
                }
            }
            let w = acc * jac;
            table.total += w;
            table.entries.push((x, w));
        }
    }
    Ok(table)
}

/// `W(k) = sum_x w_x conj(f_k(x))`, so that `sum_x w_x xi(x) = sum_k y(k) W(k)`.
///
/// Entries are grouped by row `x2`; the row sums over `x1` are done first,
/// which makes the cost `O(|table| m + rows m^2)`.
pub fn spectral_weight_transform(w: &WeightTable, torus: &Torus) -> Vec<C64> {
    let p = torus.params();
    let m = p.m();
    let mm = m * m;
    let lo = p.lo();
    let n = p.size();
    let mut out = alloc::vec![C64::new(0.0, 0.0); n];
    if w.entries.is_empty() {
        return out;
    }
    let mut entries = w.entries.clone();
    entries.sort_by_key(|e| (e.0[1], e.0[0]));
    let ph = torus.phases();
    let mut row_sum = alloc::vec![C64::new(0.0, 0.0); m as usize];
    let mut start = 0;
    while start < entries.len() {
        let x2 = entries[start].0[1];
        let mut end = start;
        while end < entries.len() && entries[end].0[1] == x2 {
            end += 1;
        }
        // row_sum[r1] = sum_{x1} w e^{+2 pi i r1 x1 / m}
        for (a, slot) in row_sum.iter_mut().enumerate() {
            let r1 = lo + a as i64;
            let mut acc = C64::new(0.0, 0.0);
            for &(x, wx) in &entries[start..end] {
                acc += ph.plus((m * r1 * x[0]).rem_euclid(mm) as usize) * wx;
            }
            *slot = acc;
        }
        for a in 0..m as usize {
            let r1 = lo + a as i64;
            let rs = row_sum[a];
            for c in 0..m as usize {
                let r2 = lo + c as i64;
                let k = ((p.m2() * r1 + m * r2) * x2).rem_euclid(mm) as usize;
                out[a * m as usize + c] += rs * ph.plus(k);
            }
        }
        start = end;
    }
    let s = 1.0 / m as f64;
    for v in out.iter_mut() {
        *v *= s;
    }
    out
}

/// `Re sum_k y(k) W(k)`.
#[inline]
pub fn pair_modes(amps: &[C64], w_hat: &[C64]) -> f64 {
    amps.iter()
        .zip(w_hat)
        .map(|(a, w)| a.re * w.re - a.im * w.im)
        .sum()
}

/// Evaluates `X^delta_{t_i}(phi_i)` along one exact path for a fixed list of
/// (time, test function) pairs.
#[derive(Debug, Clone)]
pub struct XDeltaSampler {
    lattice_times: Vec<f64>,
    transitions: Vec<Option<ModeTransition>>,
    weights: Vec<Vec<C64>>,
    tables: Vec<WeightTable>,
}

impl XDeltaSampler {
    /// `evals` must be ordered by nondecreasing time.
    pub fn new(
        model: &SpectralModel,
        sch: &RescaleScheme,
        evals: &[(f64, &GaussianTestFunction)],
        eps: f64,
        quad_n: usize,
    ) -> Result<Self> {
        let mut lattice_times = Vec::new();
        let mut transitions = Vec::new();
        let mut weights = Vec::new();
        let mut tables = Vec::new();
        let mut prev = 0.0;
        for &(t, phi) in evals {
            if !(t >= 0.0) {
                return Err(Error::NegativeTime(t));
            }
            let lt = sch.lattice_time(t);
            if lt < prev {
                return Err(Error::TimeOrder {
                    s: prev * sch.delta,
                    t,
                });
            }
            let table = cell_weights(phi, t, sch, eps, quad_n)?;
            table.check_wrap(sch, model.params().m())?;
            transitions.push(if lt > prev {
                Some(model.transition(lt - prev)?)
            } else {
                None
            });
            weights.push(spectral_weight_transform(&table, model.torus()));
            tables.push(table);
            lattice_times.push(lt);
            prev = lt;
        }
        Ok(XDeltaSampler {
            lattice_times,
            transitions,
            weights,
            tables,
        })
    }

    pub fn tables(&self) -> &[WeightTable] {
        &self.tables
    }

    pub fn transformed_weights(&self) -> &[Vec<C64>] {
        &self.weights
    }

    pub fn lattice_times(&self) -> &[f64] {
        &self.lattice_times
    }

    /// Advance `state` (which must start at lattice time 0) through every
    /// evaluation time, writing one value per evaluation into `out`.
    pub fn sample_into(
        &self,
        model: &SpectralModel,
        state: &mut ModeState,
        rng: &mut RngStream,
        out: &mut [f64],
    ) {
        for (i, tr) in self.transitions.iter().enumerate() {
            if let Some(tr) = tr {
                model.advance(state, tr, rng);
            }
            out[i] = pair_modes(&state.amps, &self.weights[i]);
        }
    }

    pub fn sample(&self, model: &SpectralModel, init: &ModeState, rng: &mut RngStream) -> Vec<f64> {
        let mut st = init.clone();
        let mut out = alloc::vec![0.0; self.transitions.len()];
        self.sample_into(model, &mut st, rng, &mut out);
        out
    }

    /// `sum_{x,y} w_x w'_y Cov_torus(x, s; y, t)` for evaluations `a <= b`,
    /// the exact covariance under zero initial data.
    pub fn exact_covariance(&self, model: &SpectralModel, a: usize, b: usize) -> Result<f64> {
        let (s, t) = (self.lattice_times[a], self.lattice_times[b]);
        if s > t {
            return Err(Error::TimeOrder { s, t });
        }
        // Cov = v sum_k g_s(k) Re[W_a(k) e^{(t-s) conj A(k)} conj(W_b(k))]
        let v = model.noise_rate();
        let mut acc = 0.0;
        for (i, a_k) in model.symbol().iter().enumerate() {
            let g = crate::spectral::ou_variance_factor(s, 2.0 * a_k.re);
            let prop = (a_k * (t - s)).exp();
            let z = self.weights[a][i].conj() * prop * self.weights[b][i];
            acc += z.re * g;
        }
        Ok(v * acc)
    }
}

/// One realisation of `X^delta_t(phi)` at each requested time.
#[allow(clippy::too_many_arguments)]
pub fn x_delta_sample(
    model: &SpectralModel,
    sch: &RescaleScheme,
    phi: &GaussianTestFunction,
    times: &[f64],
    eps: f64,
    quad_n: usize,
    init: &ModeState,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let evals: Vec<(f64, &GaussianTestFunction)> = times.iter().map(|&t| (t, phi)).collect();
    let sampler = XDeltaSampler::new(model, sch, &evals, eps, quad_n)?;
    Ok(sampler.sample(model, init, rng))
}

/// Deterministic part `Y^delta_t(phi) = sum_x w_x eta_{t/delta}(x)` for
/// initial data `mu`.
pub fn y_delta<F: Fn(Site) -> f64>(
    model: &SpectralModel,
    sch: &RescaleScheme,
    mu: F,
    phi: &GaussianTestFunction,
    t: f64,
    eps: f64,
    quad_n: usize,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let table = cell_weights(phi, t, sch, eps, quad_n)?;
    table.check_wrap(sch, model.params().m())?;
    let w_hat = spectral_weight_transform(&table, model.torus());
    let mut st = model.init_modes(mu);
    model.propagate_mean(&mut st, sch.lattice_time(t));
    Ok(pair_modes(&st.amps, &w_hat))
}

/// `S_delta(k) = (e^{i sqrt(delta) k} - 1) / (i sqrt(delta))`, for `k` in
/// `[-pi, pi] / sqrt(delta)`.
pub fn s_delta(k: f64, delta: f64) -> Result<C64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let h = delta.sqrt();
    let bound = PI / h;
    if !(k.abs() <= bound * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::OutOfBand { k, bound });
    }
    let th = h * k;
    // e^{i th/2} (2 i sin(th/2)) / (i h)
    let half = 0.5 * th;
    let (s, c) = half.sin_cos();
    Ok(C64::new(c, s) * (2.0 * s / h))
}

/// `(-1)^n / (i S)^n`.
fn ibp_factor(k: f64, delta: f64, n: u32) -> Result<C64> {
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if k == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let s = s_delta(k, delta)?;
    let is = C64::new(0.0, 1.0) * s;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(C64::new(sign, 0.0) / is.powu(n))
}

/// Both sides of the summation-by-parts identity
/// `sum_x e^{i sqrt(delta) k x} f(x) = (-1)^n/(i S_delta(k))^n sum_x e^{i sqrt(delta) k x} (D^n f)(x)`
/// with `D f(x) = (f(x) - f(x-1)) / sqrt(delta)`.
pub fn ibp_check_1d(f: &[(i64, f64)], k: f64, delta: f64, n: u32) -> Result<(C64, C64)> {
    let factor = ibp_factor(k, delta, n)?;
    let h = delta.sqrt();
    let phase = |x: i64| {
        let (s, c) = (h * k * x as f64).sin_cos();
        C64::new(c, s)
    };
    let lhs: C64 = f.iter().map(|&(x, v)| phase(x) * v).sum();
    if f.is_empty() {
        return Ok((lhs, C64::new(0.0, 0.0)));
    }
    let lo = f.iter().map(|e| e.0).min().unwrap_or(0);
    let hi = f.iter().map(|e| e.0).max().unwrap_or(0) + n as i64;
    let mut dense = alloc::vec![0.0; (hi - lo + 1) as usize];
    for &(x, v) in f {
        dense[(x - lo) as usize] += v;
    }
    for _ in 0..n {
        for i in (0..dense.len()).rev() {
            let prev = if i > 0 { dense[i - 1] } else { 0.0 };
            dense[i] = (dense[i] - prev) / h;
        }
    }
    let sum: C64 = dense
        .iter()
        .enumerate()
        .map(|(i, &v)| phase(lo + i as i64) * v)
        .sum();
    Ok((lhs, factor * sum))
}

/// `D^n_{delta,j} phi(z) = delta^{-n/2} sum_l (-1)^l C(n,l) phi(z - l sqrt(delta) e_j)`.
pub fn partial_difference(
    phi: &GaussianTestFunction,
    z: Vec2,
    delta: f64,
    j: usize,
    n: u32,
) -> f64 {
    let h = delta.sqrt();
    let mut acc = 0.0;
    let mut binom = 1.0;
    for l in 0..=n {
        let mut y = z;
        y[j] -= l as f64 * h;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * phi.eval(y);
        binom = binom * (n - l) as f64 / (l + 1) as f64;
    }
    acc / h.powi(n as i32)
}

/// Both sides of the two-dimensional identity (no `V`):
///
/// ```text
/// int e^{i<sqrt(delta) k, floor(U t/delta + z/sqrt(delta))> - i<sqrt(delta) k, U t/delta>} phi(z) dz
///   = (-1)^n/(i S_delta(k_j))^n int e^{i<k, floor_{delta,t}(z)>} D^n_{delta,j} phi(z) dz
/// ```
///
/// Both integrands are smooth on each mesh cell, so each side is a sum of
/// cell integrals by a `quad_n x quad_n` Gauss–Legendre rule.
#[allow(clippy::too_many_arguments)]
pub fn ibp_check_2d(
    phi: &GaussianTestFunction,
    t: f64,
    delta: f64,
    u: Vec2,
    k: Vec2,
    j: usize,
    n: u32,
    quad_n: usize,
) -> Result<(C64, C64)> {
    if j > 1 {
        return Err(Error::InvalidQuadrature("axis must be 0 or 1"));
    }
    if quad_n < 2 {
        return Err(Error::InvalidQuadrature("cell rule needs quad_n >= 2"));
    }
    let factor = ibp_factor(k[j], delta, n)?;
    let sch = RescaleScheme::from_parts(delta, u, Mat2::IDENTITY)?;
    let h = delta.sqrt();
    let zero = C64::new(0.0, 0.0);
    if phi.is_zero() {
        return Ok((zero, zero));
    }
    let reach = phi.support_radius(1e-17 * phi.peak()) + h;
    let c = sch.drift_shift(t);
    let mut lo = [0i64; 2];
    let mut hi = [0i64; 2];
    for i in 0..2 {
        lo[i] = (c[i] - reach / h).floor() as i64 - 1;
        hi[i] = (c[i] + reach / h).ceil() as i64 + 1;
    }
    hi[j] += n as i64;
    let gl = GaussLegendre::new(quad_n)?;
    let nodes: Vec<(f64, f64)> = gl.unit_interval().collect();
    let area = delta;
    let mut lhs = zero;
    let mut rhs = zero;
    for x2 in lo[1]..=hi[1] {
        for x1 in lo[0]..=hi[0] {
            let x = [x1, x2];
            let centre = sch.cell_point(x, [0.5, 0.5], t);
            let mut f = 0.0;
            let mut g = 0.0;
            for &(a, wa) in &nodes {
                for &(b, wb) in &nodes {
                    let z = sch.cell_point(x, [a, b], t);
                    f += wa * wb * phi.eval(z);
                    g += wa * wb * partial_difference(phi, z, delta, j, n);
                }
            }
            let mesh = sch.floor_mesh(centre, t);
            let th = h * (k[0] * (mesh[0] as f64 - c[0]) + k[1] * (mesh[1] as f64 - c[1]));
            let (s1, c1) = th.sin_cos();
            lhs += C64::new(c1, s1) * (f * area);
            let y = modified_floor(centre, t, delta, u);
            let (s2, c2) = (k[0] * y[0] + k[1] * y[1]).sin_cos();
            rhs += C64::new(c2, s2) * (g * area);
        }
    }
    Ok((lhs, factor * rhs))
}
