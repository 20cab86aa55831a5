//! Internal numeric helpers: scaled complex arithmetic for products/series
//! whose intermediates overflow `f64`, compensated summation, series tail
//! detection, and a classical gamma function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::Tolerance;

const LN_2: f64 = std::f64::consts::LN_2;
/// Rescale once the mantissa norm leaves `[2^-512, 2^512]`.
const SCALE_LIMIT: i64 = 512;

/// A complex number `m * 2^e` with `m` kept in a safe dynamic range.
///
/// Used wherever infinite products or theta-like series produce values far
/// outside the `f64` range while the final result is of moderate size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScaledComplex {
    pub m: Complex64,
    pub e: i64,
}

impl ScaledComplex {
    pub fn new(v: Complex64) -> Self {
        Self { m: v, e: 0 }.normalized()
    }

    pub fn zero() -> Self {
        Self { m: Complex64::new(0.0, 0.0), e: 0 }
    }

    pub fn one() -> Self {
        Self { m: Complex64::new(1.0, 0.0), e: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    fn normalized(mut self) -> Self {
        if self.is_zero() {
            self.e = 0;
            return self;
        }
        let n = self.m.norm();
        if !n.is_finite() {
            return self;
        }
        let mut k = 0i64;
        let mut n = n;
        while n > 2f64.powi(SCALE_LIMIT as i32) {
            n *= 2f64.powi(-SCALE_LIMIT as i32);
            k += SCALE_LIMIT;
        }
        while n != 0.0 && n < 2f64.powi(-SCALE_LIMIT as i32) {
            n *= 2f64.powi(SCALE_LIMIT as i32);
            k -= SCALE_LIMIT;
        }
        if k != 0 {
            self.m *= 2f64.powi(-k as i32);
            self.e += k;
        }
        self
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self { m: self.m * rhs.m, e: self.e + rhs.e }.normalized()
    }

    pub fn mul_c(&self, rhs: Complex64) -> Self {
        Self { m: self.m * rhs, e: self.e }.normalized()
    }

    pub fn div(&self, rhs: &Self) -> Self {
        Self { m: self.m / rhs.m, e: self.e - rhs.e }.normalized()
    }

    pub fn recip(&self) -> Self {
        Self { m: Complex64::new(1.0, 0.0) / self.m, e: -self.e }.normalized()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return *rhs;
        }
        if rhs.is_zero() {
            return *self;
        }
        let d = self.e - rhs.e;
        if d >= 1100 {
            return *self;
        }
        if d <= -1100 {
            return *rhs;
        }
        if d >= 0 {
            Self { m: self.m + rhs.m * 2f64.powi(-d as i32), e: self.e }.normalized()
        } else {
            Self { m: self.m * 2f64.powi(d as i32) + rhs.m, e: rhs.e }.normalized()
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.norm().ln() + self.e as f64 * LN_2
        }
    }

    /// Collapse to `Complex64`, saturating to ±inf / flushing to zero when the
    /// exponent leaves the representable range.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let ln = self.ln_norm();
        if ln > 705.0 {
            let ph = self.m / self.m.norm();
            return ph * f64::INFINITY;
        }
        if ln < -740.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.m * 2f64.powi(self.e as i32)
    }
}

/// Neumaier-compensated accumulator for `f64`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Standard tail criterion: converged once `consecutive_small` successive
/// terms satisfy `|term| < eps_rel * (|sum| + 1)`.
#[derive(Debug, Clone)]
pub(crate) struct TailCheck {
    eps_rel: f64,
    needed: u32,
    run: u32,
}

impl TailCheck {
    pub fn new(tol: &Tolerance) -> Self {
        Self { eps_rel: tol.eps_rel, needed: tol.consecutive_small, run: 0 }
    }

    /// Feed one term magnitude; returns true once the stop criterion is met.
    pub fn update(&mut self, term_mag: f64, sum_mag: f64) -> bool {
        if term_mag < self.eps_rel * (sum_mag + 1.0) {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= self.needed
    }
}

pub(crate) fn tail_error(what: &str) -> Error {
    Error::TailNotConverged(what.to_string())
}

/// Classical gamma function (Lanczos, g = 7, 9 coefficients), with the
/// reflection formula for the left half plane. Used by the classical Bessel
/// oracles in `q → 1` limit tests.
pub(crate) fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, &g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_product_survives_overflow() {
        // product of 300 factors of magnitude e^10 ~ e^3000, then divided out
        let f = Complex64::new(15000.0, 12000.0);
        let mut p = ScaledComplex::one();
        for _ in 0..300 {
            p = p.mul_c(f);
        }
        let mut r = ScaledComplex::one();
        for _ in 0..300 {
            r = r.div(&ScaledComplex::new(f));
        }
        let unit = p.mul(&r).to_complex();
        assert!((unit.re - 1.0).abs() < 1e-10 && unit.im.abs() < 1e-10);
    }

    #[test]
    fn scaled_add_aligns_exponents() {
        let a = ScaledComplex { m: Complex64::new(1.0, 0.0), e: 10 };
        let b = ScaledComplex { m: Complex64::new(1.0, 0.0), e: 0 };
        let s = a.add(&b).to_complex();
        assert!((s.re - 1025.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_gamma_reference_values() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma(1.0) - 1.0).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn kahan_recovers_cancelled_tail() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-18);
        }
        k.add(-1.0);
        assert!((k.value() - 1000.0 * 1e-18).abs() < 1e-22);
    }
}
