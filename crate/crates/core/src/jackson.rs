//! Jackson q-integrals, the q-difference operator, and q-integration-by-parts
//! residual checks.
//!
//! The three integral domains are lattice sums:
//!
//! ```text
//! ∫_{-1}^{1} f d_q x = (1-q) Σ_{m≥0} q^m [f(q^m) + f(-q^m)]
//! ∫_0^∞     f d_q x = (1-q) Σ_{m∈ℤ} q^m f(q^m)
//! ∫_{-∞}^∞  f d_q x = (1-q) Σ_{m∈ℤ} q^m [f(q^m) + f(-q^m)]
//! ```
//!
//! The bilateral sums are exact series, not quadrature approximations. Their
//! `m → -∞` tails (nodes `q^m → ∞`) must decay; an integrand that is not
//! absolutely q-integrable is reported as [`Error::TailNotConverged`] rather
//! than assigned a principal value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{ComplexValue, QContext};
use crate::util::{KahanComplex, TailCheck};

/// The three Jackson integration domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacksonDomain {
    /// `[-1, 1]`, nodes `±q^m`, `m ≥ 0`.
    SymmetricUnit,
    /// `[0, ∞)`, nodes `q^m`, `m ∈ ℤ`.
    HalfLine,
    /// `(-∞, ∞)`, nodes `±q^m`, `m ∈ ℤ`.
    RealLine,
}

/// Truncation policy for the bilateral lattice directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeTruncation {
    /// Minimum number of nodes to take in each direction before the tail
    /// criterion may fire (guards against premature stops on oscillatory
    /// integrands).
    pub m_min_abs: usize,
    /// Hard cap on `|m|` in each direction.
    pub m_max_abs: usize,
}

impl Default for LatticeTruncation {
    fn default() -> Self {
        Self { m_min_abs: 1, m_max_abs: 2000 }
    }
}

impl LatticeTruncation {
    pub fn validate(&self) -> Result<()> {
        if self.m_max_abs == 0 {
            return Err(Error::Domain("m_max_abs must be at least 1".into()));
        }
        Ok(())
    }
}

/// q-difference operator `∂f(x) = [f(x) - f(qx)] / ((1-q) x)`.
pub fn dq_diff<F>(f: F, x: ComplexValue, ctx: &QContext) -> Result<ComplexValue>
where
    F: Fn(ComplexValue) -> Result<ComplexValue>,
{
    if x.norm() == 0.0 {
        return Err(Error::Domain("q-difference operator undefined at x = 0".into()));
    }
    Ok((f(x)? - f(ctx.q * x)?) / ((1.0 - ctx.q) * x))
}

/// A term considered divergent once it exceeds this multiple of the running
/// sum magnitude on a bilateral tail.
const DIVERGENCE_FACTOR: f64 = 1e8;

/// Jackson q-integral of `f` over the requested domain.
///
/// `f` is evaluated at the (real) lattice nodes and may return complex
/// values. The `m → +∞` tail (nodes `→ 0`) and, on unbounded domains, the
/// `m → -∞` tail (nodes `→ ∞`) are each terminated by the standard tail
/// criterion; a growing `m → -∞` tail raises [`Error::TailNotConverged`].
pub fn jackson_integral<F>(
    f: F,
    domain: JacksonDomain,
    ctx: &QContext,
    trunc: &LatticeTruncation,
) -> Result<ComplexValue>
where
    F: Fn(f64) -> Result<ComplexValue>,
{
    trunc.validate()?;
    let q = ctx.q;
    let mut acc = KahanComplex::default();

    // m >= 0 side (all domains).
    {
        let mut tail = TailCheck::new(&ctx.tol);
        let mut qm = 1.0f64;
        let mut done = false;
        for m in 0..=trunc.m_max_abs {
            let term = match domain {
                JacksonDomain::HalfLine => qm * f(qm)?,
                _ => qm * (f(qm)? + f(-qm)?),
            };
            if !term.is_finite() {
                return Err(Error::Domain(format!("integrand not finite at node q^{m}")));
            }
            acc.add(term);
            if m >= trunc.m_min_abs && tail.update(term.norm(), acc.value().norm()) {
                done = true;
                break;
            }
            qm *= q;
        }
        if !done {
            return Err(Error::TailNotConverged("m -> +inf lattice tail".into()));
        }
    }

    // m < 0 side (unbounded domains): nodes grow like q^{-m}.
    if domain != JacksonDomain::SymmetricUnit {
        let mut tail = TailCheck::new(&ctx.tol);
        let mut qm = 1.0f64;
        let mut done = false;
        for m in 1..=trunc.m_max_abs {
            qm /= q;
            let term = match domain {
                JacksonDomain::HalfLine => qm * f(qm)?,
                _ => qm * (f(qm)? + f(-qm)?),
            };
            let sum_mag = acc.value().norm();
            if !term.is_finite() || term.norm() > DIVERGENCE_FACTOR * (sum_mag + 1.0) {
                return Err(Error::TailNotConverged(format!(
                    "integrand violates absolute q-integrability near node q^-{m}"
                )));
            }
            acc.add(term);
            if m >= trunc.m_min_abs && tail.update(term.norm(), acc.value().norm()) {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::TailNotConverged("m -> -inf lattice tail".into()));
        }
    }

    Ok((1.0 - q) * acc.value())
}

/// Boundary limit `lim_m φ(q^{-m})ψ(q^{-m})` (plus the mirrored node on the
/// real line), probed along the lattice per the declared policy: declared
/// zero when the last `consecutive_small` probes are below `eps_rel`,
/// otherwise the last measured value is used.
fn boundary_limit<F, G>(
    phi: &F,
    psi: &G,
    mirrored: bool,
    ctx: &QContext,
) -> Result<ComplexValue>
where
    F: Fn(ComplexValue) -> Result<ComplexValue>,
    G: Fn(ComplexValue) -> Result<ComplexValue>,
{
    let mut last = Complex64::new(0.0, 0.0);
    let mut run = 0u32;
    let mut x = 1.0f64;
    for _ in 0..400usize {
        x /= ctx.q;
        let xp = Complex64::new(x, 0.0);
        let mut v = phi(xp)? * psi(xp)?;
        if mirrored {
            let xm = Complex64::new(-x, 0.0);
            v += phi(xm)? * psi(xm)?;
        }
        if !v.is_finite() {
            return Err(Error::TailNotConverged("boundary product not finite".into()));
        }
        last = v;
        if v.norm() < ctx.tol.eps_rel {
            run += 1;
            if run >= ctx.tol.consecutive_small {
                return Ok(Complex64::new(0.0, 0.0));
            }
        } else {
            run = 0;
        }
    }
    Ok(last)
}

/// Residual of the q-integration-by-parts identity on the given domain:
///
/// ```text
/// [-1,1]:  ∫ φ ∂ψ = φ(1)ψ(1) - φ(-1)ψ(-1)            - ∫ ∂φ(x) ψ(qx)
/// [0,∞):   ∫ φ ∂ψ = lim_m [φψ](q^{-m}) - [φψ](q^m)   - ∫ ∂φ(x) ψ(qx)
/// ℝ:       ∫ φ ∂ψ = lim_m [φψ](q^{-m}) + [φψ](-q^{-m}) - ∫ ∂φ(x) ψ(qx)
/// ```
///
/// Returns `|LHS - RHS|`.
pub fn ibp_residual<F, G>(
    phi: F,
    psi: G,
    domain: JacksonDomain,
    ctx: &QContext,
) -> Result<f64>
where
    F: Fn(ComplexValue) -> Result<ComplexValue>,
    G: Fn(ComplexValue) -> Result<ComplexValue>,
{
    let trunc = LatticeTruncation::default();
    let lhs = jackson_integral(
        |x| dq_diff(&psi, Complex64::new(x, 0.0), ctx).and_then(|d| Ok(phi(Complex64::new(x, 0.0))? * d)),
        domain,
        ctx,
        &trunc,
    )?;
    let integral_rhs = jackson_integral(
        |x| {
            let xp = Complex64::new(x, 0.0);
            Ok(dq_diff(&phi, xp, ctx)? * psi(ctx.q * xp)?)
        },
        domain,
        ctx,
        &trunc,
    )?;
    let boundary = match domain {
        JacksonDomain::SymmetricUnit => {
            let one = Complex64::new(1.0, 0.0);
            phi(one)? * psi(one)? - phi(-one)? * psi(-one)?
        }
        JacksonDomain::HalfLine => {
            // lim [φψ](q^{-m}) - [φψ](q^m); the m -> +infty end is the value at 0+
            let top = boundary_limit(&phi, &psi, false, ctx)?;
            let mut bottom = Complex64::new(0.0, 0.0);
            let mut run = 0u32;
            let mut x = 1.0f64;
            for _ in 0..400usize {
                x *= ctx.q;
                let v = phi(Complex64::new(x, 0.0))? * psi(Complex64::new(x, 0.0))?;
                bottom = v;
                if v.norm() < ctx.tol.eps_rel {
                    run += 1;
                    if run >= ctx.tol.consecutive_small {
                        bottom = Complex64::new(0.0, 0.0);
                        break;
                    }
                } else {
                    run = 0;
                }
            }
            top - bottom
        }
        JacksonDomain::RealLine => boundary_limit(&phi, &psi, true, ctx)?,
    };
    Ok((lhs - (boundary - integral_rhs)).norm())
}
