//! Scalar q-series primitives.
//!
//! Conventions (base `0 < q < 1` throughout):
//!
//! - q-Pochhammer: `(a;q)_n = (1-a)(1-aq)...(1-aq^{n-1})`, `(a;q)_0 = 1`,
//!   `(a;q)_∞ = lim (a;q)_n`.
//! - q-gamma: `Γ_q(ν) = (q;q)_∞ / (q^ν;q)_∞ · (1-q)^{1-ν}`.
//! - q-exponentials: `e_q(u) = Σ u^n/(q;q)_n = 1/(u;q)_∞` and
//!   `E_q(u) = Σ q^{n(n-1)/2} u^n/(q;q)_n = (-u;q)_∞`. Callers pass the
//!   already-scaled argument `u = (1-q²)x/2`.
//! - q-trigonometric: `cos_q u = Re e_q(iu)`, `Cos_q u = Re E_q(iu)`,
//!   `Sin_q u = Im E_q(iu)` (real `u`).
//! - `₀Φ₁(-;0;q,u) = Σ q^{n(n-1)} u^n/(q;q)_n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::util::{ScaledComplex, TailCheck};

pub type ComplexValue = Complex64;

/// Truncation policy for series and lattice sums.
///
/// A sum stops once `consecutive_small` successive terms satisfy
/// `|term| < eps_rel * (|partial sum| + 1)`; the `+ 1` keeps the criterion
/// meaningful for sums near zero. Exceeding `max_terms` raises
/// [`Error::TailNotConverged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps_rel: f64,
    pub max_terms: usize,
    pub consecutive_small: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps_rel: 1e-13, max_terms: 5000, consecutive_small: 3 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_rel > 0.0) {
            return Err(Error::Domain("eps_rel must be positive".into()));
        }
        if self.max_terms == 0 {
            return Err(Error::Domain("max_terms must be at least 1".into()));
        }
        if self.consecutive_small == 0 {
            return Err(Error::Domain("consecutive_small must be at least 1".into()));
        }
        Ok(())
    }
}

/// Deformation base `q ∈ (0,1)` with cached derived quantities and the
/// truncation policy. All evaluators borrow a context; none mutate it.
#[derive(Debug, Clone, PartialEq)]
pub struct QContext {
    pub q: f64,
    /// `q²`, cached.
    pub q2: f64,
    /// `λ = 1 - q²`, cached.
    pub lambda: f64,
    pub tol: Tolerance,
}

impl QContext {
    pub fn new(q: f64) -> Result<Self> {
        Self::with_tolerance(q, Tolerance::default())
    }

    pub fn with_tolerance(q: f64, tol: Tolerance) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("q must lie strictly in (0,1), got {q}")));
        }
        tol.validate()?;
        Ok(Self { q, q2: q * q, lambda: 1.0 - q * q, tol })
    }

    /// Context with the squared base `q²` and the same tolerance. Many of the
    /// Bessel-side formulas work in base `q²`.
    pub fn squared(&self) -> QContext {
        QContext { q: self.q2, q2: self.q2 * self.q2, lambda: 1.0 - self.q2 * self.q2, tol: self.tol }
    }
}

// ---------------------------------------------------------------------------
// q-Pochhammer symbols
// ---------------------------------------------------------------------------

/// Finite q-Pochhammer symbol `(a;q)_n`.
pub fn qpochhammer_n(a: ComplexValue, q: f64, n: i64) -> Result<ComplexValue> {
    if n < 0 {
        return Err(Error::Domain(format!("(a;q)_n needs n >= 0, got {n}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("base q must lie in (0,1), got {q}")));
    }
    let mut p = Complex64::new(1.0, 0.0);
    let mut qj = 1.0;
    for _ in 0..n {
        p *= Complex64::new(1.0, 0.0) - a * qj;
        qj *= q;
    }
    Ok(p)
}

/// Infinite q-Pochhammer symbol `(a;q)_∞`.
///
/// The product stops once `|a| q^j < eps_rel` for `consecutive_small`
/// successive `j`.
pub fn qpochhammer_inf(a: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    Ok(qpochhammer_inf_scaled(a, ctx.q, &ctx.tol)?.to_complex())
}

/// `(a;q)_∞` in scaled form, with an arbitrary base (used internally both for
/// base `q` and base `q²`). Magnitudes may far exceed the `f64` range when
/// `|a|` is large; the scaled representation keeps the product exact.
pub(crate) fn qpochhammer_inf_scaled(a: ComplexValue, q: f64, tol: &Tolerance) -> Result<ScaledComplex> {
    let mut p = ScaledComplex::one();
    let mut aj = ScaledComplex::new(a);
    let qc = Complex64::new(q, 0.0);
    let mut run = 0u32;
    for _ in 0..tol.max_terms.max(64) {
        p = p.mul(&ScaledComplex::one().add(&aj.mul_c(-Complex64::new(1.0, 0.0))));
        if aj.ln_norm() < tol.eps_rel.ln() {
            run += 1;
            if run >= tol.consecutive_small {
                return Ok(p);
            }
        } else {
            run = 0;
        }
        aj = aj.mul_c(qc);
    }
    Err(Error::TailNotConverged("(a;q)_inf product".into()))
}

/// Real-argument `(a;q)_∞` in scaled form.
pub(crate) fn qpochhammer_inf_scaled_re(a: f64, q: f64, tol: &Tolerance) -> Result<ScaledComplex> {
    qpochhammer_inf_scaled(Complex64::new(a, 0.0), q, tol)
}

// ---------------------------------------------------------------------------
// q-gamma and q-beta
// ---------------------------------------------------------------------------

/// q-gamma function `Γ_q(ν) = (q;q)_∞/(q^ν;q)_∞ · (1-q)^{1-ν}`.
///
/// Nonpositive integer `ν` are poles.
pub fn qgamma(nu: f64, ctx: &QContext) -> Result<f64> {
    if nu <= 0.5 && (nu - nu.round()).abs() < 1e-12 {
        return Err(Error::Pole(format!("q-gamma pole at nu = {nu}")));
    }
    let q = ctx.q;
    let num = qpochhammer_inf_scaled_re(q, q, &ctx.tol)?;
    let den = qpochhammer_inf_scaled_re(q.powf(nu), q, &ctx.tol)?;
    if den.is_zero() {
        return Err(Error::Pole(format!("(q^nu;q)_inf vanishes at nu = {nu}")));
    }
    let ratio = num.div(&den);
    let v = ratio.mul_c(Complex64::new((1.0 - q).powf(1.0 - nu), 0.0)).to_complex();
    Ok(v.re)
}

/// q-beta function `B_q(ν,μ) = Γ_q(ν)Γ_q(μ)/Γ_q(ν+μ)`.
pub fn qbeta(nu: f64, mu: f64, ctx: &QContext) -> Result<f64> {
    Ok(qgamma(nu, ctx)? * qgamma(mu, ctx)? / qgamma(nu + mu, ctx)?)
}

// ---------------------------------------------------------------------------
// q-exponentials
// ---------------------------------------------------------------------------

/// Distance from `u` to the pole set `{q^{-k}}` of `e_q`, relative to `|u|`.
fn near_eq_pole(u: ComplexValue, ctx: &QContext) -> bool {
    if u.norm() < 0.5 {
        return false;
    }
    let mut pole = 1.0f64;
    while pole <= u.norm() * (1.0 + ctx.q) {
        if (u - pole).norm() < ctx.tol.eps_rel * u.norm().max(1.0) {
            return true;
        }
        pole /= ctx.q;
    }
    false
}

/// q-exponential `e_q(u) = Σ u^n/(q;q)_n = 1/(u;q)_∞`.
///
/// The series is used for `|u| ≤ 0.9`; elsewhere the reciprocal product form
/// provides the meromorphic continuation (poles at `u = q^{-k}`).
pub fn eq_exp(u: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    if u.norm() <= 0.9 {
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut qn = 1.0;
        let mut tail = TailCheck::new(&ctx.tol);
        for _ in 0..ctx.tol.max_terms {
            qn *= ctx.q;
            term *= u / (1.0 - qn);
            sum += term;
            if tail.update(term.norm(), sum.norm()) {
                return Ok(sum);
            }
        }
        return Err(Error::TailNotConverged("e_q series".into()));
    }
    if near_eq_pole(u, ctx) {
        return Err(Error::Pole(format!("e_q pole near u = {u}")));
    }
    Ok(eq_exp_scaled(u, ctx)?.to_complex())
}

/// `e_q(u)` in scaled form via `1/(u;q)_∞` (no pole check).
pub(crate) fn eq_exp_scaled(u: ComplexValue, ctx: &QContext) -> Result<ScaledComplex> {
    Ok(qpochhammer_inf_scaled(u, ctx.q, &ctx.tol)?.recip())
}

/// q-exponential `E_q(u) = Σ q^{n(n-1)/2} u^n/(q;q)_n = (-u;q)_∞` (entire).
pub fn eq_exp_big(u: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    Ok(eq_exp_big_scaled(u, ctx)?.to_complex())
}

/// `E_q(u)` in scaled form; safe for arguments whose product value overflows.
pub(crate) fn eq_exp_big_scaled(u: ComplexValue, ctx: &QContext) -> Result<ScaledComplex> {
    qpochhammer_inf_scaled(-u, ctx.q, &ctx.tol)
}

/// The three q-trigonometric functions at real argument:
/// `(cos_q u, Cos_q u, Sin_q u)`.
///
/// `cos_q` is built from `e_q(±iu)` (decaying for large `|u|`), `Cos_q` and
/// `Sin_q` from `E_q(±iu)` (theta-like growth for large `|u|`).
pub fn qtrig(u: f64, ctx: &QContext) -> Result<(f64, f64, f64)> {
    let iu = Complex64::new(0.0, u);
    let small = eq_exp_scaled(iu, ctx)?.to_complex();
    let big = eq_exp_big_scaled(iu, ctx)?.to_complex();
    Ok((small.re, big.re, big.im))
}

// ---------------------------------------------------------------------------
// Basic hypergeometric series
// ---------------------------------------------------------------------------

/// `₀Φ₁(-;0;q,u) = Σ q^{n(n-1)} u^n/(q;q)_n` (entire).
pub fn phi01(u: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut qn = 1.0; // q^n
    let mut q2n = 1.0; // q^{2n}
    let mut tail = TailCheck::new(&ctx.tol);
    for _ in 0..ctx.tol.max_terms {
        qn *= ctx.q;
        term *= q2n * u / (1.0 - qn);
        q2n *= ctx.q2;
        sum += term;
        if tail.update(term.norm(), sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::TailNotConverged("0-phi-1 series".into()))
}

/// `₀Φ₃(-;0,0,q^{2ν+2};q²,·)` in the convention
/// `Σ (-1)^n q^{4n(ν+n)} λ^{2n} u2^n / ((q²;q²)_n (q^{2ν+2};q²)_n 4^n)`
/// where `u2 = x²` and `λ = 1-q²`.
pub fn phi03(nu: f64, u2: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    if nu <= -0.5 && (nu - nu.round()).abs() < 1e-12 {
        return Err(Error::Pole(format!("0-phi-3 parameter pole at nu = {nu}")));
    }
    let p = ctx.q2;
    let ratio = -ctx.lambda * ctx.lambda / 4.0 * u2;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut pn = 1.0; // p^n
    let q2nu = ctx.q.powf(2.0 * nu);
    let mut tail = TailCheck::new(&ctx.tol);
    for n in 0..ctx.tol.max_terms {
        // q^{4(nu+2n+1)} / ((1-p^{n+1})(1-q^{2nu+2n+2}))
        let qpow = q2nu * q2nu * ctx.q.powi(4 * (2 * n as i32 + 1));
        let d1 = 1.0 - pn * p;
        let d2 = 1.0 - q2nu * pn * p;
        if d2.abs() < 1e-300 {
            return Err(Error::Pole("0-phi-3 denominator Pochhammer vanishes".into()));
        }
        term *= qpow * ratio / (d1 * d2);
        pn *= p;
        sum += term;
        if tail.update(term.norm(), sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::TailNotConverged("0-phi-3 series".into()))
}

/// Heine's `₂Φ₁(a,b;c;base,u) = Σ (a;base)_n (b;base)_n /
/// ((base;base)_n (c;base)_n) u^n`.
///
/// `|u| ≤ 1` is required; at `|u| = 1` the series is summed directly and the
/// tail criterion decides — series whose terms do not decay exhaust the term
/// budget and report [`Error::TailNotConverged`].
pub fn phi21(a: f64, b: f64, c: f64, base: f64, u: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    if !(base > 0.0 && base < 1.0) {
        return Err(Error::Domain(format!("2-phi-1 base must lie in (0,1), got {base}")));
    }
    if u.norm() > 1.0 + 1e-14 {
        return Err(Error::Domain(format!("2-phi-1 needs |u| <= 1, got {}", u.norm())));
    }
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut bn = 1.0; // base^n
    let mut tail = TailCheck::new(&ctx.tol);
    for _ in 0..ctx.tol.max_terms {
        let dc = 1.0 - c * bn;
        if dc.abs() < 1e-300 {
            return Err(Error::Pole("2-phi-1 denominator Pochhammer vanishes".into()));
        }
        term *= (1.0 - a * bn) * (1.0 - b * bn) * u / ((1.0 - base * bn) * dc);
        bn *= base;
        sum += term;
        if tail.update(term.norm(), sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::TailNotConverged("2-phi-1 series".into()))
}
