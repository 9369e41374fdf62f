use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Torus side/shear outside `m >= 2`, `0 < m2 < m`.
    InvalidTorus { m: i64, m2: i64 },
    /// Whittaker parameters outside `D > 0`, `0 < C < D`.
    InvalidWhittaker { d: f64, c: f64 },
    /// A time step must be strictly positive.
    NonPositiveStep(f64),
    /// A time argument must be nonnegative.
    NegativeTime(f64),
    /// Two-time quantities require `s <= t`.
    TimeOrder { s: f64, t: f64 },
    /// Rescaling parameter outside `(0, 1]`.
    InvalidDelta(f64),
    /// Frequency outside the band `delta^{-1/2} [-pi, pi]`.
    OutOfBand { k: f64, bound: f64 },
    /// Division by the zero symbol `S_delta(0)`.
    ZeroFrequency,
    /// Truncation threshold must be positive.
    NonPositiveEps(f64),
    /// Quadrature order or grid size too small.
    InvalidQuadrature(&'static str),
    /// A Gaussian component with non-positive width.
    InvalidSigma(f64),
    /// Input length does not match the torus.
    LengthMismatch { expected: usize, found: usize },
    /// A site is not in canonical form.
    NotCanonical { x1: i64, x2: i64 },
    /// Reconstructed field is not real: the conjugate pairing is broken.
    ImaginaryResidue(f64),
    /// Weight support plus drift does not fit in half the torus.
    WrapUnsafe { extent: f64, m: i64 },
    /// The drift velocity has a non-vanishing imaginary part.
    ComplexVelocity(f64),
    /// The quadratic form of the symbol is not strictly negative definite.
    NotNegativeDefinite { eigenvalues: [f64; 2] },
    /// The kernel is evaluated on its diagonal where it diverges.
    Diagonal,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidTorus { m, m2 } => {
                write!(
                    f,
                    "invalid torus m={m}, m2={m2}: need m >= 2 and 0 < m2 < m"
                )
            }
            Error::InvalidWhittaker { d, c } => {
                write!(
                    f,
                    "invalid Whittaker parameters D={d}, C={c}: need D > 0 and 0 < C < D"
                )
            }
            Error::NonPositiveStep(dt) => write!(f, "time step must be positive, got {dt}"),
            Error::NegativeTime(t) => write!(f, "time must be nonnegative, got {t}"),
            Error::TimeOrder { s, t } => write!(f, "expected s <= t, got s={s}, t={t}"),
            Error::InvalidDelta(d) => write!(f, "delta must lie in (0, 1], got {d}"),
            Error::OutOfBand { k, bound } => {
                write!(f, "frequency {k} outside [-{bound}, {bound}]")
            }
            Error::ZeroFrequency => {
                write!(f, "zero frequency with n > 0 divides by S_delta(0) = 0")
            }
            Error::NonPositiveEps(e) => write!(f, "truncation threshold must be positive, got {e}"),
            Error::InvalidQuadrature(what) => write!(f, "invalid quadrature: {what}"),
            Error::InvalidSigma(s) => write!(f, "Gaussian width must be positive, got {s}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::NotCanonical { x1, x2 } => write!(f, "site ({x1}, {x2}) is not canonical"),
            Error::ImaginaryResidue(r) => {
                write!(
                    f,
                    "field has imaginary residue {r:e}; conjugate pairing broken"
                )
            }
            Error::WrapUnsafe { extent, m } => write!(
                f,
                "weight support plus drift spans {extent:.3} sites, not below m/2 for m={m}"
            ),
            Error::ComplexVelocity(im) => {
                write!(f, "drift velocity has imaginary part {im:e}")
            }
            Error::NotNegativeDefinite { eigenvalues } => write!(
                f,
                "quadratic form not strictly negative definite (eigenvalues {}, {})",
                eigenvalues[0], eigenvalues[1]
            ),
            Error::Diagonal => write!(f, "kernel diverges on the diagonal (s, x) = (t, y)"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
