//! Exact Gaussian simulation through independent Fourier modes.
//!
//! Each mode solves `d y(k) = A_hat(k) y(k) dt + sqrt(v) dW_hat(k)`, a complex
//! Ornstein–Uhlenbeck process whose transition over any `dt` is known in
//! closed form. Modes `k` and `-k` are driven by conjugate noise, which keeps
//! the field real.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::drift::{a_hat, DriftStencil};
use crate::error::{Error, Result};
use crate::quadrature::TensorRule;
use crate::rng::RngStream;
use crate::torus::{negate_frequency, Site, Torus, TorusParams};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Below this `|R|` the quotient `(e^{dt R} - 1)/R` uses its Taylor value.
pub const SMALL_RATE: f64 = 1e-10;

/// Largest imaginary residue tolerated when reading a field back.
pub const IMAG_TOL: f64 = 1e-9;

/// `int_0^dt e^{r R} dr = (e^{dt R} - 1)/R`.
#[inline]
pub fn ou_variance_factor(dt: f64, r: f64) -> f64 {
    if r.abs() < SMALL_RATE {
        dt * (1.0 + 0.5 * dt * r)
    } else {
        libm::expm1(dt * r) / r
    }
}

/// The involution `k -> -k` on frequency indices.
#[derive(Debug, Clone)]
pub struct DualPairing {
    partner: Vec<usize>,
    representatives: Vec<usize>,
}

impl DualPairing {
    pub fn new(p: &TorusParams) -> Self {
        let partner: Vec<usize> = (0..p.size())
            .map(|i| p.frequency_index(negate_frequency(p.frequency_at(i), p)))
            .collect();
        let representatives = (0..p.size()).filter(|&i| i <= partner[i]).collect();
        DualPairing {
            partner,
            representatives,
        }
    }

    #[inline]
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    #[inline]
    pub fn is_self_paired(&self, i: usize) -> bool {
        self.partner[i] == i
    }

    /// One index from each orbit `{k, -k}`, the smaller one.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn self_paired(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.partner.len()).filter(move |&i| self.partner[i] == i)
    }
}

/// Mode amplitudes at time `t`; `step` counts exact transitions taken and
/// addresses the random stream of the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub t: f64,
    pub step: u64,
    pub amps: Vec<C64>,
}

impl ModeState {
    /// Largest violation of `amps(-k) = conj(amps(k))` and of realness at
    /// self-paired modes.
    pub fn pairing_defect(&self, pairing: &DualPairing) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            d = d.max((a - self.amps[pairing.partner(i)].conj()).norm());
        }
        d
    }
}

/// The per-mode transition over a fixed `dt`.
#[derive(Debug, Clone)]
pub struct ModeTransition {
    dt: f64,
    factor: Vec<C64>,
    sd: Vec<f64>,
}

impl ModeTransition {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `e^{dt A_hat(k)}`.
    pub fn factor(&self) -> &[C64] {
        &self.factor
    }

    /// Standard deviation of the complex increment, `sqrt(E|eps|^2)`.
    pub fn increment_sd(&self) -> &[f64] {
        &self.sd
    }

    /// Advance `amps` in place, drawing noise for block `step` of `rng`.
    pub fn apply(&self, amps: &mut [C64], pairing: &DualPairing, rng: &mut RngStream, step: u64) {
        rng.seek_block(step, amps.len() as u64);
        let half = core::f64::consts::FRAC_1_SQRT_2;
        for &i in pairing.representatives() {
            let j = pairing.partner(i);
            let (z1, z2) = rng.normal_pair();
            if i == j {
                amps[i] = self.factor[i] * amps[i] + self.sd[i] * z1;
            } else {
                let eps = C64::new(z1, z2) * (self.sd[i] * half);
                let a = self.factor[i] * amps[i] + eps;
                amps[i] = a;
                amps[j] = a.conj();
            }
        }
    }
}

/// A torus together with the symbol of the drift on its dual set.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    torus: Torus,
    pairing: DualPairing,
    symbol: Vec<C64>,
    v: f64,
}

impl SpectralModel {
    pub fn new(params: TorusParams, stencil: &DriftStencil, v: f64) -> Self {
        let pairing = DualPairing::new(&params);
        let mut symbol = alloc::vec![C64::new(0.0, 0.0); params.size()];
        for &i in pairing.representatives() {
            let a = a_hat(stencil, params.frequency_at(i).k(&params));
            let j = pairing.partner(i);
            if i == j {
                symbol[i] = C64::new(a.re, 0.0);
            } else {
                symbol[i] = a;
                symbol[j] = a.conj();
            }
        }
        SpectralModel {
            torus: Torus::new(params),
            pairing,
            symbol,
            v,
        }
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn params(&self) -> &TorusParams {
        self.torus.params()
    }

    pub fn pairing(&self) -> &DualPairing {
        &self.pairing
    }

    /// `A_hat(k)` in frequency order.
    pub fn symbol(&self) -> &[C64] {
        &self.symbol
    }

    pub fn noise_rate(&self) -> f64 {
        self.v
    }

    /// Transform real initial data; the result is projected onto exactly
    /// conjugate-paired amplitudes.
    pub fn init_modes<F: Fn(Site) -> f64>(&self, mu0: F) -> ModeState {
        let p = *self.params();
        let field = crate::torus::ComplexField::from_fn(p, |s| C64::new(mu0(s), 0.0));
        let mut amps = self.torus.forward(&field).values;
        for &i in self.pairing.representatives() {
            let j = self.pairing.partner(i);
            if i == j {
                amps[i] = C64::new(amps[i].re, 0.0);
            } else {
                let a = (amps[i] + amps[j].conj()) * 0.5;
                amps[i] = a;
                amps[j] = a.conj();
            }
        }
        ModeState {
            t: 0.0,
            step: 0,
            amps,
        }
    }

    pub fn zero_modes(&self) -> ModeState {
        ModeState {
            t: 0.0,
            step: 0,
            amps: alloc::vec![C64::new(0.0, 0.0); self.params().size()],
        }
    }

    pub fn transition(&self, dt: f64) -> Result<ModeTransition> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        let n = self.symbol.len();
        let mut factor = alloc::vec![C64::new(0.0, 0.0); n];
        let mut sd = alloc::vec![0.0; n];
        for &i in self.pairing.representatives() {
            let a = self.symbol[i];
            let f = (a * dt).exp();
            let s = (self.v * ou_variance_factor(dt, 2.0 * a.re))
                .max(0.0)
                .sqrt();
            let j = self.pairing.partner(i);
            factor[i] = f;
            factor[j] = f.conj();
            sd[i] = s;
            sd[j] = s;
        }
        Ok(ModeTransition { dt, factor, sd })
    }

    /// One exact transition of length `dt`.
    pub fn evolve_exact(&self, st: &ModeState, dt: f64, rng: &mut RngStream) -> Result<ModeState> {
        let tr = self.transition(dt)?;
        let mut next = st.clone();
        self.advance(&mut next, &tr, rng);
        Ok(next)
    }

    /// In-place exact transition with a precomputed [`ModeTransition`].
    pub fn advance(&self, st: &mut ModeState, tr: &ModeTransition, rng: &mut RngStream) {
        tr.apply(&mut st.amps, &self.pairing, rng, st.step);
        st.t += tr.dt;
        st.step += 1;
    }

    /// `xi(x) = sum_k y(k) conj(f_k(x))` at the given sites.
    pub fn field_at_sites(&self, st: &ModeState, sites: &[Site]) -> Result<Vec<f64>> {
        let p = self.params();
        let m = p.m() as f64;
        let mut out = Vec::with_capacity(sites.len());
        for s in sites {
            if !p.is_canonical(*s) {
                return Err(Error::NotCanonical { x1: s.x1, x2: s.x2 });
            }
            let mut acc = C64::new(0.0, 0.0);
            let mut scale = 0.0;
            for (i, a) in st.amps.iter().enumerate() {
                let n = p.phase_index(p.frequency_at(i), s.to_array());
                acc += a * self.torus.phases().plus(n);
                scale += a.norm();
            }
            acc /= m;
            scale /= m;
            if acc.im.abs() > IMAG_TOL * scale.max(1.0) {
                return Err(Error::ImaginaryResidue(acc.im.abs()));
            }
            out.push(acc.re);
        }
        Ok(out)
    }

    /// The deterministic part `eta_t = e^{t A} mu0` at the given sites.
    pub fn mean_field<F: Fn(Site) -> f64>(
        &self,
        mu0: F,
        t: f64,
        sites: &[Site],
    ) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let mut st = self.init_modes(mu0);
        self.propagate_mean(&mut st, t);
        self.field_at_sites(&st, sites)
    }

    /// Multiply every amplitude by `e^{t A_hat(k)}` without noise.
    pub fn propagate_mean(&self, st: &mut ModeState, t: f64) {
        for &i in self.pairing.representatives() {
            let j = self.pairing.partner(i);
            let a = (self.symbol[i] * t).exp() * st.amps[i];
            st.amps[i] = a;
            if i != j {
                st.amps[j] = a.conj();
            }
        }
        st.t += t;
    }

    /// `Cov[xi_s(x), xi_t(y)]` on the torus under zero initial data,
    /// `(v/m^2) sum_k Re[e^{(t-s) A_hat(-k)} e^{i<k, x-y>} (e^{s R(k)} - 1)/R(k)]`.
    pub fn analytic_covariance_torus(
        &self,
        x: [i64; 2],
        s: f64,
        y: [i64; 2],
        t: f64,
    ) -> Result<f64> {
        check_times(s, t)?;
        let p = self.params();
        let d = [x[0] - y[0], x[1] - y[1]];
        let mut acc = 0.0;
        for (i, a) in self.symbol.iter().enumerate() {
            let n = p.phase_index(p.frequency_at(i), d);
            let z = (a.conj() * (t - s)).exp() * self.torus.phases().plus(n);
            acc += z.re * ou_variance_factor(s, 2.0 * a.re);
        }
        Ok(self.v * acc / (p.m() * p.m()) as f64)
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

/// Infinite-volume covariance
/// `(v/(2 pi)^2) int_{T^2} Re[e^{(t-s) A_hat(-k)} e^{i<k, x-y>} (e^{s R} - 1)/R] dk`
/// by a tensor rule on `[-pi, pi]^2`.
pub fn analytic_covariance_infinite(
    x: [i64; 2],
    s: f64,
    y: [i64; 2],
    t: f64,
    stencil: &DriftStencil,
    v: f64,
    quad: &TensorRule,
) -> Result<f64> {
    check_times(s, t)?;
    let d = [(x[0] - y[0]) as f64, (x[1] - y[1]) as f64];
    let val: f64 = quad.integrate([-PI, -PI], [PI, PI], |k| {
        let a = a_hat(stencil, k);
        let (sn, cs) = (k[0] * d[0] + k[1] * d[1]).sin_cos();
        let z = (a.conj() * (t - s)).exp() * C64::new(cs, sn);
        z.re * ou_variance_factor(s, 2.0 * a.re)
    });
    Ok(v * val / (4.0 * PI * PI))
}

/// Mode states at an increasing list of times, from one random stream.
#[derive(Debug, Clone)]
pub struct FieldPath {
    pub times: Vec<f64>,
    pub states: Vec<ModeState>,
}

impl FieldPath {
    /// Evolve `init` exactly through `times`, which must be nondecreasing
    /// and start no earlier than `init.t`.
    pub fn simulate(
        model: &SpectralModel,
        init: ModeState,
        times: &[f64],
        rng: &mut RngStream,
    ) -> Result<Self> {
        let mut states = Vec::with_capacity(times.len());
        let mut cur = init;
        for &t in times {
            if t < cur.t {
                return Err(Error::TimeOrder { s: cur.t, t });
            }
            if t > cur.t {
                let tr = model.transition(t - cur.t)?;
                model.advance(&mut cur, &tr, rng);
                cur.t = t;
            }
            states.push(cur.clone());
        }
        Ok(FieldPath {
            times: times.to_vec(),
            states,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::build_whittaker_stencil;
    use crate::torus::enumerate_sites;

    fn model(m: i64, m2: i64) -> SpectralModel {
        let (s, w) = build_whittaker_stencil(2.0, 1.0).unwrap();
        SpectralModel::new(TorusParams::new(m, m2).unwrap(), &s, w.v)
    }

    #[test]
    fn pairing_is_an_involution() {
        for (m, m2) in [(4, 1), (5, 2), (6, 3)] {
            let p = TorusParams::new(m, m2).unwrap();
            let d = DualPairing::new(&p);
            for i in 0..p.size() {
                assert_eq!(d.partner(d.partner(i)), i);
            }
            // the zero frequency is always its own partner
            assert!(d.is_self_paired(p.frequency_index(crate::Frequency::new(0, 0))));
        }
    }

    #[test]
    fn symbol_is_real_at_self_paired_modes() {
        let md = model(6, 1);
        for i in md.pairing().self_paired() {
            assert_eq!(md.symbol()[i].im, 0.0);
        }
    }

    #[test]
    fn init_of_zero_and_indicator() {
        let md = model(4, 1);
        assert!(md.init_modes(|_| 0.0).amps.iter().all(|a| a.norm() == 0.0));
        let st = md.init_modes(|s| if s == Site::ORIGIN { 1.0 } else { 0.0 });
        for a in &st.amps {
            assert!((a - C64::new(0.25, 0.0)).norm() < 1e-15);
        }
        let sites = enumerate_sites(md.params());
        let back = md.field_at_sites(&st, &sites).unwrap();
        for (s, v) in sites.iter().zip(back) {
            let want = if *s == Site::ORIGIN { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_step_keeps_the_mean_mode() {
        let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
        let md = SpectralModel::new(TorusParams::new(4, 1).unwrap(), &s, 0.0);
        let st = md.init_modes(|x| (x.x1 + 2 * x.x2) as f64);
        let mut rng = RngStream::new(3, 0);
        let next = md.evolve_exact(&st, 0.8, &mut rng).unwrap();
        let z = md.params().frequency_index(crate::Frequency::new(0, 0));
        assert_eq!(next.amps[z], st.amps[z]);
        assert!(md.evolve_exact(&st, 0.0, &mut rng).is_err());
        assert!(md.evolve_exact(&st, -1.0, &mut rng).is_err());
    }

    #[test]
    fn variance_factor_limits() {
        assert_eq!(ou_variance_factor(1.0, 0.0), 1.0);
        assert!((ou_variance_factor(0.5, -2.0) - (1.0 - (-1.0f64).exp()) / 2.0).abs() < 1e-15);
        // the Taylor branch agrees with the exact quotient at the switch
        let r = 0.99 * SMALL_RATE;
        let exact = libm::expm1(0.5 * r) / r;
        assert!((ou_variance_factor(0.5, r) - exact).abs() < 1e-15);
    }

    #[test]
    fn covariance_edge_cases() {
        let md = model(4, 1);
        assert_eq!(
            md.analytic_covariance_torus([0, 0], 0.0, [1, 0], 1.0)
                .unwrap(),
            0.0
        );
        assert!(md
            .analytic_covariance_torus([0, 0], 1.0, [0, 0], 0.5)
            .is_err());
        let t = 1e-6;
        let c = md.analytic_covariance_torus([0, 0], t, [0, 0], t).unwrap();
        assert!((c / (md.noise_rate() * t) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mean_field_of_constant_is_constant() {
        let md = model(5, 2);
        let sites = enumerate_sites(md.params());
        for v in md.mean_field(|_| 1.5, 2.3, &sites).unwrap() {
            assert!((v - 1.5).abs() < 1e-12);
        }
        assert!(md.mean_field(|_| 1.5, -0.1, &sites).is_err());
    }

    #[test]
    fn field_at_sites_rejects_broken_pairing() {
        let md = model(4, 1);
        let mut st = md.zero_modes();
        st.amps[1] = C64::new(0.0, 1.0);
        assert!(matches!(
            md.field_at_sites(&st, &[Site::ORIGIN]),
            Err(Error::ImaginaryResidue(_))
        ));
        assert!(md
            .field_at_sites(&md.zero_modes(), &[Site::new(5, 5)])
            .is_err());
    }
}
