//! The skewed discrete torus `R_m = Z^2 / ~` and its dual frequency set.
//!
//! Two lattice points are identified when they differ by an element of the
//! lattice generated by `(m, 0)` and `(-m2, m)`. Sites are stored in the
//! parallelogram
//!
//! ```text
//! -m/2 <= x2 < m/2,   -m/2 - (m2/m) x2 <= x1 < m/2 - (m2/m) x2
//! ```
//!
//! and frequencies by their integer labels `(r1, r2)`, both in `[-m/2, m/2)`.
//! All phases `<k, x>` are of the form `2 pi n / m^2` with integer `n`, so
//! characters are evaluated through an exact integer index into one table.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusParams {
    m: i64,
    m2: i64,
}

impl TorusParams {
    pub fn new(m: i64, m2: i64) -> Result<Self> {
        // m^2 must index the phase table and 2 m^3 must not overflow.
        if m < 2 || m2 <= 0 || m2 >= m || m > 1 << 16 {
            return Err(Error::InvalidTorus { m, m2 });
        }
        Ok(TorusParams { m, m2 })
    }

    #[inline]
    pub fn m(&self) -> i64 {
        self.m
    }

    #[inline]
    pub fn m2(&self) -> i64 {
        self.m2
    }

    /// Number of sites, which is also the number of frequencies.
    #[inline]
    pub fn size(&self) -> usize {
        (self.m * self.m) as usize
    }

    /// Lower end of the label range `[-m/2, m/2)`.
    #[inline]
    pub fn lo(&self) -> i64 {
        -(self.m / 2)
    }

    /// First `x1` of row `x2` in the canonical parallelogram.
    #[inline]
    pub fn row_start(&self, x2: i64) -> i64 {
        let num = -self.m * self.m - 2 * self.m2 * x2;
        let den = 2 * self.m;
        -((-num).div_euclid(den))
    }

    #[inline]
    pub fn is_canonical(&self, s: Site) -> bool {
        let lo = self.lo();
        s.x2 >= lo && s.x2 < lo + self.m && {
            let r = self.row_start(s.x2);
            s.x1 >= r && s.x1 < r + self.m
        }
    }

    /// Position of a canonical site in [`enumerate_sites`] order.
    #[inline]
    pub fn site_index(&self, s: Site) -> usize {
        ((s.x2 - self.lo()) * self.m + (s.x1 - self.row_start(s.x2))) as usize
    }

    pub fn site_at(&self, index: usize) -> Site {
        let i = index as i64;
        let x2 = self.lo() + i / self.m;
        Site {
            x1: self.row_start(x2) + i % self.m,
            x2,
        }
    }

    /// Position of a reduced frequency in [`dual_frequencies`] order.
    #[inline]
    pub fn frequency_index(&self, f: Frequency) -> usize {
        ((f.r1 - self.lo()) * self.m + (f.r2 - self.lo())) as usize
    }

    pub fn frequency_at(&self, index: usize) -> Frequency {
        let i = index as i64;
        Frequency {
            r1: self.lo() + i / self.m,
            r2: self.lo() + i % self.m,
        }
    }

    /// Integer phase `n` with `<k, x> = 2 pi n / m^2 (mod 2 pi)`, in `[0, m^2)`.
    #[inline]
    pub fn phase_index(&self, f: Frequency, x: [i64; 2]) -> usize {
        let mm = self.m * self.m;
        let n = self.m * f.r1 * x[0] + (self.m2 * f.r1 + self.m * f.r2) * x[1];
        n.rem_euclid(mm) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x1: i64,
    pub x2: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x1: 0, x2: 0 };

    pub fn new(x1: i64, x2: i64) -> Self {
        Site { x1, x2 }
    }

    #[inline]
    pub fn to_array(self) -> [i64; 2] {
        [self.x1, self.x2]
    }
}

/// A dual frequency, keyed by its integer labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frequency {
    pub r1: i64,
    pub r2: i64,
}

impl Frequency {
    pub fn new(r1: i64, r2: i64) -> Self {
        Frequency { r1, r2 }
    }

    /// `k = (2 pi r1 / m, 2 pi (m2 r1 / m + r2) / m)`.
    pub fn k(&self, p: &TorusParams) -> Vec2 {
        let m = p.m as f64;
        [
            2.0 * PI * self.r1 as f64 / m,
            2.0 * PI * ((p.m2 * self.r1) as f64 / m + self.r2 as f64) / m,
        ]
    }
}

/// Reduce a site into the canonical parallelogram.
pub fn canonical_site(x: [i64; 2], p: &TorusParams) -> Site {
    let m = p.m;
    let lo = p.lo();
    let x2 = lo + (x[1] - lo).rem_euclid(m);
    let j = (x2 - x[1]) / m;
    // adding j (-m2, m) moves x2 into range
    let x1 = x[0] - j * p.m2;
    let r = p.row_start(x2);
    Site {
        x1: r + (x1 - r).rem_euclid(m),
        x2,
    }
}

/// Whether `a ~ b`, i.e. `a - b = (j2 m2 - j1 m, -j2 m)` for integers `j1, j2`.
pub fn equivalent(a: [i64; 2], b: [i64; 2], p: &TorusParams) -> bool {
    let d1 = a[0] - b[0];
    let d2 = a[1] - b[1];
    d2 % p.m == 0 && (d1 + (d2 / p.m) * p.m2) % p.m == 0
}

/// The `m^2` canonical sites, rows of increasing `x2`, each by increasing `x1`.
pub fn enumerate_sites(p: &TorusParams) -> Vec<Site> {
    (0..p.size()).map(|i| p.site_at(i)).collect()
}

/// The `m^2` dual frequencies, `r1` outer and `r2` inner, both increasing.
pub fn dual_frequencies(p: &TorusParams) -> Vec<Frequency> {
    (0..p.size()).map(|i| p.frequency_at(i)).collect()
}

/// Bring arbitrary labels into range without changing the character.
///
/// Shifting `r1` by `m a` shifts the second phase coefficient by `m2 m a`,
/// which is undone by shifting `r2` by `-m2 a`.
pub fn reduce_frequency(r: [i64; 2], p: &TorusParams) -> Frequency {
    let lo = p.lo();
    let r1 = lo + (r[0] - lo).rem_euclid(p.m);
    let a = (r1 - r[0]) / p.m;
    let r2 = r[1] - p.m2 * a;
    Frequency {
        r1,
        r2: lo + (r2 - lo).rem_euclid(p.m),
    }
}

/// The reduced frequency whose character is the conjugate of `f`'s.
pub fn negate_frequency(f: Frequency, p: &TorusParams) -> Frequency {
    reduce_frequency([-f.r1, -f.r2], p)
}

/// `e^{-2 pi i n / m^2}` for `n` in `[0, m^2)`.
///
/// Built so that `table[m^2 - n] == conj(table[n])` bit for bit and the
/// quarter points are exact, which keeps paired coefficients exactly paired.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    mm: usize,
    values: Vec<C64>,
}

impl PhaseTable {
    pub fn new(p: &TorusParams) -> Self {
        let mm = p.size();
        let mut values = alloc::vec![C64::new(0.0, 0.0); mm];
        for (n, v) in values.iter_mut().enumerate().take(mm / 2 + 1) {
            *v = exact_unit(n, mm);
        }
        for n in mm / 2 + 1..mm {
            values[n] = values[mm - n].conj();
        }
        PhaseTable { mm, values }
    }

    /// `e^{-i <k, x>}` for the phase index `n`.
    #[inline]
    pub fn minus(&self, n: usize) -> C64 {
        self.values[n]
    }

    /// `e^{+i <k, x>}` for the phase index `n`.
    #[inline]
    pub fn plus(&self, n: usize) -> C64 {
        self.values[if n == 0 { 0 } else { self.mm - n }]
    }
}

/// `e^{-2 pi i n / d}` with exact values at multiples of `d/4`.
fn exact_unit(n: usize, d: usize) -> C64 {
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    if 4 * n == d {
        return C64::new(0.0, -1.0);
    }
    if 2 * n == d {
        return C64::new(-1.0, 0.0);
    }
    let (s, c) = (2.0 * PI * n as f64 / d as f64).sin_cos();
    C64::new(c, -s)
}

/// A field on the canonical sites, stored in [`enumerate_sites`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub params: TorusParams,
    pub values: Vec<C64>,
}

impl ComplexField {
    pub fn zeros(p: TorusParams) -> Self {
        ComplexField {
            params: p,
            values: alloc::vec![C64::new(0.0, 0.0); p.size()],
        }
    }

    pub fn from_values(p: TorusParams, values: Vec<C64>) -> Result<Self> {
        if values.len() != p.size() {
            return Err(Error::LengthMismatch {
                expected: p.size(),
                found: values.len(),
            });
        }
        Ok(ComplexField { params: p, values })
    }

    pub fn from_fn<F: FnMut(Site) -> C64>(p: TorusParams, mut f: F) -> Self {
        ComplexField {
            params: p,
            values: (0..p.size()).map(|i| f(p.site_at(i))).collect(),
        }
    }

    pub fn get(&self, x: [i64; 2]) -> C64 {
        let s = canonical_site(x, &self.params);
        self.values[self.params.site_index(s)]
    }
}

/// Fourier coefficients, stored in [`dual_frequencies`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub params: TorusParams,
    pub values: Vec<C64>,
}

impl Spectrum {
    pub fn zeros(p: TorusParams) -> Self {
        Spectrum {
            params: p,
            values: alloc::vec![C64::new(0.0, 0.0); p.size()],
        }
    }

    pub fn from_values(p: TorusParams, values: Vec<C64>) -> Result<Self> {
        if values.len() != p.size() {
            return Err(Error::LengthMismatch {
                expected: p.size(),
                found: values.len(),
            });
        }
        Ok(Spectrum { params: p, values })
    }

    pub fn get(&self, f: Frequency) -> C64 {
        let f = reduce_frequency([f.r1, f.r2], &self.params);
        self.values[self.params.frequency_index(f)]
    }
}

/// A torus with its phase table, for repeated transforms.
#[derive(Debug, Clone)]
pub struct Torus {
    params: TorusParams,
    phases: PhaseTable,
}

impl Torus {
    pub fn new(params: TorusParams) -> Self {
        Torus {
            phases: PhaseTable::new(&params),
            params,
        }
    }

    #[inline]
    pub fn params(&self) -> &TorusParams {
        &self.params
    }

    #[inline]
    pub fn phases(&self) -> &PhaseTable {
        &self.phases
    }

    /// Basis function `f_k(x) = (1/m) e^{-i <k, x>}`.
    #[inline]
    pub fn basis(&self, f: Frequency, x: [i64; 2]) -> C64 {
        self.phases.minus(self.params.phase_index(f, x)) / self.params.m as f64
    }

    /// `xi_hat(k) = sum_x xi(x) f_k(x)`.
    ///
    /// The phase `m r1 x1 + (m2 r1 + m r2) x2` separates, so the sum is done
    /// as a row pass over `x1` followed by a column pass over `x2`, `O(m^3)`.
    pub fn forward(&self, field: &ComplexField) -> Spectrum {
        let p = &self.params;
        let m = p.m as usize;
        let mi = p.m;
        let lo = p.lo();
        let mm = p.m * p.m;
        // rows[r1][x2] = sum_{x1} xi(x1, x2) e^{-2 pi i r1 x1 / m}
        let mut rows = alloc::vec![C64::new(0.0, 0.0); m * m];
        for a in 0..m {
            let r1 = lo + a as i64;
            for b in 0..m {
                let x2 = lo + b as i64;
                let start = p.row_start(x2);
                let line = &field.values[b * m..(b + 1) * m];
                let mut acc = C64::new(0.0, 0.0);
                for (c, v) in line.iter().enumerate() {
                    let n = (mi * r1 * (start + c as i64)).rem_euclid(mm) as usize;
                    acc += v * self.phases.minus(n);
                }
                rows[a * m + b] = acc;
            }
        }
        let mut out = alloc::vec![C64::new(0.0, 0.0); m * m];
        let scale = 1.0 / p.m as f64;
        for a in 0..m {
            let r1 = lo + a as i64;
            for c in 0..m {
                let r2 = lo + c as i64;
                let coef = p.m2 * r1 + mi * r2;
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..m {
                    let x2 = lo + b as i64;
                    let n = (coef * x2).rem_euclid(mm) as usize;
                    acc += rows[a * m + b] * self.phases.minus(n);
                }
                out[a * m + c] = acc * scale;
            }
        }
        Spectrum {
            params: *p,
            values: out,
        }
    }

    /// `xi(x) = sum_k xi_hat(k) conj(f_k(x))`, separated like [`Torus::forward`].
    pub fn inverse(&self, spec: &Spectrum) -> ComplexField {
        let p = &self.params;
        let m = p.m as usize;
        let mi = p.m;
        let lo = p.lo();
        let mm = p.m * p.m;
        // cols[r1][x2] = sum_{r2} xi_hat(r1, r2) e^{+2 pi i (m2 r1 + m r2) x2 / m^2}
        let mut cols = alloc::vec![C64::new(0.0, 0.0); m * m];
        for a in 0..m {
            let r1 = lo + a as i64;
            for b in 0..m {
                let x2 = lo + b as i64;
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..m {
                    let r2 = lo + c as i64;
                    let n = ((p.m2 * r1 + mi * r2) * x2).rem_euclid(mm) as usize;
                    acc += spec.values[a * m + c] * self.phases.plus(n);
                }
                cols[a * m + b] = acc;
            }
        }
        let mut out = alloc::vec![C64::new(0.0, 0.0); m * m];
        let scale = 1.0 / p.m as f64;
        for b in 0..m {
            let x2 = lo + b as i64;
            let start = p.row_start(x2);
            for c in 0..m {
                let x1 = start + c as i64;
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..m {
                    let r1 = lo + a as i64;
                    let n = (mi * r1 * x1).rem_euclid(mm) as usize;
                    acc += cols[a * m + b] * self.phases.plus(n);
                }
                out[b * m + c] = acc * scale;
            }
        }
        ComplexField {
            params: *p,
            values: out,
        }
    }
}

/// Forward transform (see [`Torus::forward`]).
pub fn fourier_forward(field: &ComplexField) -> Spectrum {
    Torus::new(field.params).forward(field)
}

/// Inverse transform (see [`Torus::inverse`]).
pub fn fourier_inverse(spec: &Spectrum) -> ComplexField {
    Torus::new(spec.params).inverse(spec)
}
