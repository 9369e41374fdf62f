//! Special functions that `libm` does not provide.

#[allow(unused_imports)]
use num_traits::Float;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = int_x^inf e^{-u}/u du` for `x > 0`.
///
/// Power series below 1, modified Lentz continued fraction above.
/// Returns `+inf` at 0 and NaN for negative input.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x < 0.0 || x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `(e^{s r} - 1) / r`, continuous at `r = 0` where it equals `s`.
#[inline]
pub fn exp_ratio(s: f64, r: f64) -> f64 {
    if r == 0.0 {
        s
    } else {
        libm::expm1(s * r) / r
    }
}
