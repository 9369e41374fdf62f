//! Experiments: covariance estimates, convergence sweeps and validation.

use std::f64::consts::PI;
use std::fmt;

use ewlimit_core::{
    build_whittaker_stencil, ibp_check_1d, ibp_check_2d, limit_coefficients, s_delta,
    validate_assumptions, y0_limit, y_delta, z0_covariance, DriftStencil, Error,
    GaussianTestFunction, LimitCoefficients, LimitSpec, ModeState, PolarQuadrature, RescaleScheme,
    RngStream, Site, SpectralModel, TorusParams, XDeltaSampler,
};
use log::{info, warn};
use serde::Serialize;

use crate::config::{ratio_matches, ConfigError, ExperimentConfig};
use crate::mc::{estimate_columns, CovarianceEstimate};

#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Core(Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => e.fmt(f),
            HarnessError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        HarnessError::Core(e)
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(_) => 1,
        }
    }
}

pub type HResult<T> = Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub m: i64,
    pub s: f64,
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub limit_value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

impl SweepRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta: f64,
        m: i64,
        s: f64,
        t: f64,
        estimate: f64,
        stderr: f64,
        limit_value: f64,
    ) -> Self {
        let abs_err = (estimate - limit_value).abs();
        let rel_err = if abs_err == 0.0 {
            0.0
        } else {
            abs_err / limit_value.abs()
        };
        SweepRow {
            delta,
            m,
            s,
            t,
            estimate,
            stderr,
            limit_value,
            abs_err,
            rel_err,
        }
    }
}

/// Drift-derived objects shared by every experiment of one configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub stencil: DriftStencil,
    pub v: f64,
    pub lc: LimitCoefficients,
    pub spec: LimitSpec,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> HResult<Self> {
        let (stencil, w) = build_whittaker_stencil(cfg.drift.d, cfg.drift.c)?;
        let lc = limit_coefficients(&stencil)?;
        Ok(Setup {
            spec: LimitSpec::from_whittaker(&w, &lc),
            stencil,
            v: w.v,
            lc,
        })
    }

    pub fn scheme(&self, delta: f64) -> HResult<RescaleScheme> {
        Ok(RescaleScheme::new(delta, &self.lc)?)
    }

    pub fn model(&self, p: TorusParams) -> SpectralModel {
        SpectralModel::new(p, &self.stencil, self.v)
    }
}

const MAX_M: i64 = 1 << 16;

/// `m2` for a given `m`: exact ratio `C/D` under the tie-in (searching
/// upwards in `m`), otherwise the nearest integer.
fn with_ratio(cfg: &ExperimentConfig, m: i64) -> HResult<TorusParams> {
    let r = cfg.drift.c / cfg.drift.d;
    if cfg.drift.tie_in {
        for mm in m..=(4 * m).min(MAX_M) {
            let m2 = (r * mm as f64).round() as i64;
            if m2 > 0 && m2 < mm && ratio_matches(m2, mm, r) {
                return Ok(TorusParams::new(mm, m2)?);
            }
        }
        return Err(ConfigError(format!("no torus near m={m} has m2/m = {r}")).into());
    }
    let m2 = ((r * m as f64).round() as i64).clamp(1, m - 1);
    if !ratio_matches(m2, m, r) {
        warn!("m={m}: m2={m2} only approximates C/D={r}");
    }
    Ok(TorusParams::new(m, m2)?)
}

/// Smallest `m` with `m >= 4 (delta^{-1} t_max |U|_inf + delta^{-1/2} R ||V^{-1}||)`,
/// where `R` bounds the supports of the test function and of the initial profile.
pub fn torus_for(
    cfg: &ExperimentConfig,
    setup: &Setup,
    delta: f64,
    phis: &[&GaussianTestFunction],
    psi: &GaussianTestFunction,
) -> HResult<TorusParams> {
    let eps = cfg.quadrature.eps;
    let u = setup.lc.velocity;
    let tmax = cfg.rescale.s.max(cfg.rescale.t);
    let vi = setup.lc.normalizer_inverse().norm2();
    let r_phi = phis
        .iter()
        .map(|f| f.support_radius(eps * f.peak()))
        .fold(0.0, f64::max)
        * vi;
    let r_psi = if psi.is_zero() {
        0.0
    } else {
        psi.support_radius(eps * psi.peak())
    };
    let budget = tmax / delta * u[0].abs().max(u[1].abs()) + r_phi.max(r_psi) / delta.sqrt();
    let m = ((4.0 * budget).ceil() as i64).max(4);
    if m > MAX_M {
        return Err(Error::WrapUnsafe {
            extent: budget,
            m: MAX_M,
        }
        .into());
    }
    with_ratio(cfg, m)
}

/// Build the sampler on `p`, growing the torus by a quarter while the
/// weight supports would wrap.
fn sampler_on(
    cfg: &ExperimentConfig,
    setup: &Setup,
    mut p: TorusParams,
    grow: bool,
    sch: &RescaleScheme,
    evals: &[(f64, &GaussianTestFunction)],
) -> HResult<(SpectralModel, XDeltaSampler)> {
    loop {
        let model = setup.model(p);
        match XDeltaSampler::new(
            &model,
            sch,
            evals,
            cfg.quadrature.eps,
            cfg.quadrature.quad_n,
        ) {
            Ok(s) => return Ok((model, s)),
            Err(Error::WrapUnsafe { extent, m }) if grow && m < MAX_M => {
                let next = ((m as f64 * 1.25).ceil() as i64).min(MAX_M);
                info!("extent {extent:.1} wraps on m={m}; retrying with m={next}");
                p = with_ratio(cfg, next)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceOutcome {
    pub estimate: CovarianceEstimate,
    /// `sum w_x w'_y Cov_torus`, the value the estimate is unbiased for.
    pub exact: f64,
    pub m: i64,
    pub m2: i64,
}

/// Monte-Carlo `Cov[X_s(phi1), X_t(phi2)]` under zero initial data, both
/// evaluations taken on the same path. With `torus = None` the torus comes
/// from the wrap-safety rule.
#[allow(clippy::too_many_arguments)]
pub fn estimate_x_covariance(
    cfg: &ExperimentConfig,
    setup: &Setup,
    phi1: &GaussianTestFunction,
    phi2: &GaussianTestFunction,
    s: f64,
    t: f64,
    delta: f64,
    torus: Option<TorusParams>,
) -> HResult<CovarianceOutcome> {
    if !(s >= 0.0 && s <= t) {
        return Err(Error::TimeOrder { s, t }.into());
    }
    cfg.require_replicas()?;
    let sch = setup.scheme(delta)?;
    let (p, grow) = match torus {
        Some(p) => (p, false),
        None => (
            torus_for(
                cfg,
                setup,
                delta,
                &[phi1, phi2],
                &GaussianTestFunction::zero(),
            )?,
            true,
        ),
    };
    let (model, sampler) = sampler_on(cfg, setup, p, grow, &sch, &[(s, phi1), (t, phi2)])?;
    let exact = sampler.exact_covariance(&model, 0, 1)?;
    let params = *model.params();
    info!(
        "delta={delta} m={} m2={}: sampling {} replicas",
        params.m(),
        params.m2(),
        cfg.mc.replicas
    );
    let seed = cfg.mc.seed;
    let est = estimate_columns(
        cfg.mc.replicas,
        1,
        || (model.zero_modes(), [0.0f64; 2]),
        |(st, vals): &mut (ModeState, [f64; 2]), r, out| {
            st.amps.iter_mut().for_each(|a| *a = Default::default());
            st.t = 0.0;
            st.step = 0;
            let mut rng = RngStream::new(seed, r);
            sampler.sample_into(&model, st, &mut rng, vals);
            out[0] = vals[0] * vals[1];
        },
    )[0];
    Ok(CovarianceOutcome {
        estimate: est,
        exact,
        m: params.m(),
        m2: params.m2(),
    })
}

fn polar(cfg: &ExperimentConfig) -> PolarQuadrature {
    PolarQuadrature {
        radial_n: cfg.quadrature.radial_n,
        angular_n: cfg.quadrature.angular_n,
        ..PolarQuadrature::default()
    }
}

fn check_decreasing(list: &[f64]) -> HResult<()> {
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ConfigError("delta_list must be strictly decreasing".into()).into());
    }
    Ok(())
}

/// One row per `delta`, comparing the Monte-Carlo covariance of
/// `X_s(phi), X_t(phi)` with the limit covariance. Failures are returned in
/// place so the remaining rows still run.
pub fn sweep_delta(cfg: &ExperimentConfig) -> HResult<Vec<HResult<SweepRow>>> {
    check_decreasing(&cfg.rescale.delta_list)?;
    cfg.require_replicas()?;
    let setup = Setup::new(cfg)?;
    let phi = cfg.phi()?;
    let (s, t) = (cfg.rescale.s, cfg.rescale.t);
    let limit = z0_covariance(&phi, &phi, s, t, &setup.spec, &polar(cfg))?;
    Ok(cfg
        .rescale
        .delta_list
        .iter()
        .map(|&delta| {
            let out = estimate_x_covariance(cfg, &setup, &phi, &phi, s, t, delta, None)?;
            info!(
                "delta={delta}: estimate {:.6} +- {:.6}, torus-exact {:.6}, limit {limit:.6}",
                out.estimate.mean, out.estimate.stderr, out.exact
            );
            Ok(SweepRow::new(
                delta,
                out.m,
                s,
                t,
                out.estimate.mean,
                out.estimate.stderr,
                limit,
            ))
        })
        .collect())
}

/// Deterministic mean sweep: `Y^delta_t(phi)` for initial data
/// `mu(x) = psi(sqrt(delta) x)` against its limit.
pub fn sweep_mean(cfg: &ExperimentConfig) -> HResult<Vec<HResult<SweepRow>>> {
    check_decreasing(&cfg.rescale.delta_list)?;
    let setup = Setup::new(cfg)?;
    let phi = cfg.phi()?;
    let psi = cfg.psi()?;
    let t = cfg.rescale.t;
    let limit = y0_limit(&psi, &phi, t, &setup.spec)?;
    Ok(cfg
        .rescale
        .delta_list
        .iter()
        .map(|&delta| {
            let sch = setup.scheme(delta)?;
            let mut p = torus_for(cfg, &setup, delta, &[&phi], &psi)?;
            let h = delta.sqrt();
            let mu = |x: Site| psi.eval([h * x.x1 as f64, h * x.x2 as f64]);
            loop {
                let model = setup.model(p);
                let q = &cfg.quadrature;
                match y_delta(&model, &sch, mu, &phi, t, q.eps, q.quad_n) {
                    Ok(y) => return Ok(SweepRow::new(delta, p.m(), t, t, y, 0.0, limit)),
                    Err(Error::WrapUnsafe { m, .. }) if m < MAX_M => {
                        p = with_ratio(cfg, ((m as f64 * 1.25).ceil() as i64).min(MAX_M))?;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

/// One summation-by-parts comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpRow {
    pub dim: u8,
    pub delta: f64,
    pub k: f64,
    pub n: u32,
    pub axis: usize,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

pub const IBP_1D_TOL: f64 = 1e-10;
pub const IBP_2D_REL_TOL: f64 = 1e-5;
pub const JORDAN_SLACK: f64 = 1e-12;
pub const JORDAN_SAMPLES: u64 = 10_000;

/// The fixed sequence used by the one-dimensional battery.
pub fn ibp_sequence() -> Vec<(i64, f64)> {
    (-5..=7)
        .map(|x| {
            (
                x,
                (0.7 * x as f64).sin() * (-(x * x) as f64 / 18.0).exp() + 0.05 * x as f64,
            )
        })
        .collect()
}

/// Deterministic battery of summation-by-parts identities: one-dimensional
/// for `n` in {1, 2}, five frequencies and `delta` in {0.25, 0.1}; two-dimensional
/// at `t = 0` for `n` in {1, 2} along both axes.
pub fn ibp_battery(
    setup: &Setup,
    phi: &GaussianTestFunction,
    quad_n: usize,
) -> HResult<Vec<IbpRow>> {
    let mut rows = Vec::new();
    let f = ibp_sequence();
    let row =
        |dim, delta, k, n, axis, l: ewlimit_core::C64, r: ewlimit_core::C64, tol_abs: bool| {
            let abs_err = (l - r).norm();
            let rel_err = abs_err / l.norm().max(f64::MIN_POSITIVE);
            IbpRow {
                dim,
                delta,
                k,
                n,
                axis,
                lhs_re: l.re,
                lhs_im: l.im,
                rhs_re: r.re,
                rhs_im: r.im,
                abs_err,
                rel_err,
                pass: if tol_abs {
                    abs_err < IBP_1D_TOL
                } else {
                    rel_err < IBP_2D_REL_TOL
                },
            }
        };
    for delta in [0.25f64, 0.1] {
        let band = PI / delta.sqrt();
        for frac in [0.05, 0.3, -0.45, 0.8, 1.0] {
            let k = frac * band;
            for n in 1..=2 {
                let (l, r) = ibp_check_1d(&f, k, delta, n)?;
                rows.push(row(1, delta, k, n, 0, l, r, true));
            }
        }
    }
    let u = setup.lc.velocity;
    for (delta, k) in [(0.25, [1.3, -0.8]), (0.1, [-2.1, 0.6])] {
        for axis in 0..2 {
            for n in 1..=2 {
                let (l, r) = ibp_check_2d(phi, 0.0, delta, u, k, axis, n, quad_n)?;
                rows.push(row(2, delta, k[axis], n, axis, l, r, false));
            }
        }
    }
    Ok(rows)
}

/// `(2/pi)|k| <= |S_delta(k)| <= |k|` on random `(k, delta)`; returns the
/// number of violations and the worst relative excess.
pub fn jordan_sampling(samples: u64, seed: u64) -> HResult<(u64, f64)> {
    let mut rng = RngStream::new(seed, u64::MAX);
    let mut bad = 0;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let delta = 1.0 - rng.uniform();
        let band = PI / delta.sqrt();
        let k = (2.0 * rng.uniform() - 1.0) * band;
        let s = s_delta(k, delta)?.norm();
        let (lo, hi) = (2.0 / PI * k.abs(), k.abs());
        let excess = ((lo - s) / hi).max((s - hi) / hi).max(0.0);
        worst = worst.max(excess);
        if s < lo - JORDAN_SLACK * (1.0 + lo) || s > hi + JORDAN_SLACK * (1.0 + hi) {
            bad += 1;
        }
    }
    Ok((bad, worst))
}

/// Named checks: assumptions on the drift, the summation-by-parts battery
/// and the Jordan bounds.
pub fn run_validate(cfg: &ExperimentConfig) -> HResult<Vec<CheckResult>> {
    let (stencil, _) = build_whittaker_stencil(cfg.drift.d, cfg.drift.c)?;
    let mut out = Vec::new();
    let report = validate_assumptions(&stencil, 64)?;
    for (name, pass) in report.checks() {
        out.push(check(name, pass, format!("{report:?}")));
    }
    let setup = match Setup::new(cfg) {
        Ok(s) => s,
        Err(e) => {
            out.push(check("limit_coefficients", false, e.to_string()));
            return Ok(out);
        }
    };
    let rows = ibp_battery(&setup, &cfg.phi()?, cfg.quadrature.quad_n.max(8))?;
    for dim in [1u8, 2] {
        let sel: Vec<&IbpRow> = rows.iter().filter(|r| r.dim == dim).collect();
        let worst = sel
            .iter()
            .map(|r| if dim == 1 { r.abs_err } else { r.rel_err })
            .fold(0.0, f64::max);
        out.push(check(
            format!("ibp_{dim}d"),
            sel.iter().all(|r| r.pass),
            format!("{} identities, worst error {worst:.3e}", sel.len()),
        ));
    }
    let (bad, worst) = jordan_sampling(JORDAN_SAMPLES, cfg.mc.seed)?;
    out.push(check(
        "jordan_bounds",
        bad == 0,
        format!("{bad} violations in {JORDAN_SAMPLES} samples, worst excess {worst:.3e}"),
    ));
    Ok(out)
}

/// One exact path on the configured torus: the lattice field at `s/delta`
/// and `t/delta` from initial data `psi(sqrt(delta) x)`, using the first
/// `delta` of the list (or 1).
pub fn simulate(cfg: &ExperimentConfig) -> HResult<Vec<(f64, Site, f64)>> {
    let setup = Setup::new(cfg)?;
    let p = TorusParams::new(cfg.torus.m, cfg.torus.m2)?;
    let model = setup.model(p);
    let delta = cfg.rescale.delta_list.first().copied().unwrap_or(1.0);
    let psi = cfg.psi()?;
    let h = delta.sqrt();
    let init = model.init_modes(|x| psi.eval([h * x.x1 as f64, h * x.x2 as f64]));
    let times = [cfg.rescale.s / delta, cfg.rescale.t / delta];
    let mut rng = RngStream::new(cfg.mc.seed, 0);
    let path = ewlimit_core::FieldPath::simulate(&model, init, &times, &mut rng)?;
    let sites = ewlimit_core::enumerate_sites(&p);
    let mut out = Vec::with_capacity(2 * sites.len());
    for (time, st) in path.times.iter().zip(&path.states) {
        let vals = model.field_at_sites(st, &sites)?;
        out.extend(sites.iter().zip(vals).map(|(x, v)| (*time, *x, v)));
    }
    Ok(out)
}

/// Single covariance point on the configured torus at the first `delta`.
pub fn covariance_point(cfg: &ExperimentConfig) -> HResult<(SweepRow, CovarianceOutcome)> {
    let delta = *cfg
        .rescale
        .delta_list
        .first()
        .ok_or_else(|| ConfigError("delta_list is empty".into()))?;
    let setup = Setup::new(cfg)?;
    let phi = cfg.phi()?;
    let (s, t) = (cfg.rescale.s, cfg.rescale.t);
    let p = TorusParams::new(cfg.torus.m, cfg.torus.m2)?;
    let out = estimate_x_covariance(cfg, &setup, &phi, &phi, s, t, delta, Some(p))?;
    let limit = z0_covariance(&phi, &phi, s, t, &setup.spec, &polar(cfg))?;
    Ok((
        SweepRow::new(
            delta,
            out.m,
            s,
            t,
            out.estimate.mean,
            out.estimate.stderr,
            limit,
        ),
        out,
    ))
}
