//! JSON experiment configuration.

use std::fmt;
use std::path::Path;

use ewlimit_core::{GaussianComponent, GaussianTestFunction, TorusParams};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSection {
    pub m: i64,
    pub m2: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Require `m2 / m = C / D`.
    #[serde(default)]
    pub tie_in: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleSection {
    pub delta_list: Vec<f64>,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSection {
    pub components: Vec<ComponentSpec>,
}

/// `psi` absent, `null` or empty means zero initial data.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    #[serde(default)]
    pub psi: Option<Vec<ComponentSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub replicas: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub quad_n: usize,
    pub eps: f64,
    pub radial_n: usize,
    pub angular_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub torus: TorusSection,
    pub drift: DriftSection,
    pub rescale: RescaleSection,
    pub test_function: TestFunctionSection,
    #[serde(default)]
    pub ic: IcSection,
    pub mc: McSection,
    pub quadrature: QuadratureSection,
}

/// Smallest replica count accepted for covariance runs.
pub const MIN_REPLICAS: u64 = 1000;

fn mixture(parts: &[ComponentSpec], what: &str) -> Result<GaussianTestFunction, ConfigError> {
    for c in parts {
        if !c.amplitude.is_finite() || !c.center.iter().all(|v| v.is_finite()) {
            return bad(format!("{what}: non-finite component"));
        }
    }
    GaussianTestFunction::new(
        parts
            .iter()
            .map(|c| GaussianComponent {
                amplitude: c.amplitude,
                center: c.center,
                sigma: c.sigma,
            })
            .collect(),
    )
    .or_else(|e| bad(format!("{what}: {e}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).or_else(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).or_else(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        TorusParams::new(self.torus.m, self.torus.m2).or_else(|e| bad(e.to_string()))?;
        let (d, c) = (self.drift.d, self.drift.c);
        if !(c > 0.0 && c < d && d.is_finite()) {
            return bad(format!("drift needs 0 < C < D, got C={c} D={d}"));
        }
        if self.drift.tie_in && !ratio_matches(self.torus.m2, self.torus.m, c / d) {
            return bad(format!(
                "tie-in requires m2/m = C/D, got {}/{} vs {}",
                self.torus.m2,
                self.torus.m,
                c / d
            ));
        }
        for &delta in &self.rescale.delta_list {
            if !(delta > 0.0 && delta <= 1.0) {
                return bad(format!("delta must lie in (0, 1], got {delta}"));
            }
        }
        let (s, t) = (self.rescale.s, self.rescale.t);
        if !(s >= 0.0 && s <= t && t.is_finite()) {
            return bad(format!("need 0 <= s <= t, got s={s} t={t}"));
        }
        self.phi()?;
        self.psi()?;
        let q = &self.quadrature;
        if q.quad_n < 2 || q.radial_n < 2 || q.angular_n < 1 {
            return bad("quadrature orders too small");
        }
        if !(q.eps > 0.0 && q.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", q.eps));
        }
        Ok(())
    }

    pub fn phi(&self) -> Result<GaussianTestFunction, ConfigError> {
        mixture(&self.test_function.components, "test_function")
    }

    pub fn psi(&self) -> Result<GaussianTestFunction, ConfigError> {
        mixture(self.ic.psi.as_deref().unwrap_or(&[]), "ic.psi")
    }

    pub fn require_replicas(&self) -> Result<(), ConfigError> {
        if self.mc.replicas < MIN_REPLICAS {
            return bad(format!(
                "covariance runs need at least {MIN_REPLICAS} replicas, got {}",
                self.mc.replicas
            ));
        }
        Ok(())
    }
}

/// `m2 / m == ratio` up to rounding in `ratio`.
pub fn ratio_matches(m2: i64, m: i64, ratio: f64) -> bool {
    (m2 as f64 - ratio * m as f64).abs() < 1e-9 * m as f64
}
