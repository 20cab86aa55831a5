//! Numerical toolkit for q-special functions on the Jackson lattice.
//!
//! The crate is organized in layers:
//!
//! - [`qcore`]: scalar q-series primitives — q-Pochhammer symbols, q-gamma /
//!   q-beta, the two q-exponentials, q-trigonometric functions, and the basic
//!   hypergeometric series `₀Φ₁`, `₀Φ₃`, `₂Φ₁`.
//! - [`jackson`]: Jackson q-integrals over `[-1,1]`, `[0,∞)` and `(-∞,∞)`,
//!   the q-difference operator, and q-integration-by-parts residuals.
//! - [`qbinomial`]: the two q-binomial kernel functions `r` and `R`, their
//!   difference equations, partial-fraction expansions, decay/bound checks,
//!   and the lattice constant `Q_ν` with its elliptic closed form.
//! - [`noncomm`]: truncated ordered series in noncommuting variables
//!   `z, s` with `zs = q·sz`, the normal-ordering map, and coefficient-level
//!   verification of the ordering and derivative identities.
//! - [`qbessel`]: the six q-Bessel-family functions `I_ν^{(1,2)}`,
//!   `J_ν^{(1,2)}`, `K_ν^{(1,2)}`, their difference equations, large-argument
//!   forms, and classical Bessel oracles for `q → 1` limit studies.
//! - [`representations`]: evaluators and verifiers for the Jackson-integral
//!   representations of the q-Bessel family, plus classical-limit checks.
//!
//! All arithmetic is IEEE-754 binary64 (`f64` / [`num_complex::Complex64`]);
//! series and lattice sums are truncated by the explicit policy in
//! [`qcore::Tolerance`].

pub mod error;
pub mod jackson;
pub mod noncomm;
pub mod qbessel;
pub mod qbinomial;
pub mod qcore;
pub mod representations;
pub(crate) mod util;

pub use error::{Error, Result};
pub use qcore::{ComplexValue, QContext, Tolerance};
