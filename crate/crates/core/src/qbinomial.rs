//! q-binomial kernel functions, their difference equations and
//! partial-fraction expansions, decay/bound checks, and the lattice constant
//! `Q_ν` together with its elliptic closed form.
//!
//! The two kernels are
//!
//! ```text
//! r(a,b,z,q)      = (az;q)_∞ / (bz;q)_∞
//! R(a,b,γ,z,q²)   = (az²;q²)_∞ / (bz²;q²)_∞ · z^γ
//! ```
//!
//! `r` satisfies `z[b r(z) - a r(qz)] = r(z) - r(qz)`; `R` satisfies
//! `z²[b q^γ R(z) - a R(qz)] = q^γ R(z) - R(qz)` with the shift `z → qz` in
//! the square root of the base.
//!
//! `Q_ν = (1-q) Σ_{m∈ℤ} 1/(q^{m-ν+1/2} + q^{-m+ν-1/2})` is evaluated both as
//! the bilateral lattice sum and through the elliptic closed form
//! `(1-q)/π · K(k) · dn(2(ν-1/2) K'(k); k')`, where `q` plays the role of the
//! nome: `k = θ₂²(0,q)/θ₃²(0,q)`, `K = π/(2 AGM(1,k'))`, `K' = K ln(1/q)/π`,
//! and `dn` is evaluated with the complementary modulus via its theta
//! quotient at the complementary nome `q' = exp(-π²/ln(1/q))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{self, ComplexValue, QContext};
use crate::util::{KahanSum, ScaledComplex, TailCheck};

/// Parameters of a q-binomial kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBinomialKernel {
    pub a: ComplexValue,
    pub b: ComplexValue,
    pub gamma: f64,
    /// Pochhammer base (`q` for `r`, `q²` for `R`).
    pub base: f64,
}

impl QBinomialKernel {
    pub fn new(a: ComplexValue, b: ComplexValue, gamma: f64, base: f64) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::Domain(format!("kernel base must lie in (0,1), got {base}")));
        }
        Ok(Self { a, b, gamma, base })
    }

    fn base_ctx(&self, ctx: &QContext) -> Result<QContext> {
        QContext::with_tolerance(self.base, ctx.tol)
    }
}

fn near_pole(bz: ComplexValue, base: f64, eps: f64) -> bool {
    if bz.norm() < 0.5 {
        return false;
    }
    let mut pole = 1.0f64;
    while pole <= bz.norm() * (1.0 + base) {
        if (bz - pole).norm() < eps * bz.norm().max(1.0) {
            return true;
        }
        pole /= base;
    }
    false
}

/// `r(a,b,z,base) = (az;base)_∞ / (bz;base)_∞`.
pub fn r_kernel(k: &QBinomialKernel, z: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    Ok(r_kernel_scaled(k, z, ctx)?.to_complex())
}

pub(crate) fn r_kernel_scaled(k: &QBinomialKernel, z: ComplexValue, ctx: &QContext) -> Result<ScaledComplex> {
    if near_pole(k.b * z, k.base, ctx.tol.eps_rel) {
        return Err(Error::Pole(format!("r-kernel pole near z = {z}")));
    }
    let num = qcore::qpochhammer_inf_scaled(k.a * z, k.base, &ctx.tol)?;
    let den = qcore::qpochhammer_inf_scaled(k.b * z, k.base, &ctx.tol)?;
    if den.is_zero() {
        return Err(Error::Pole(format!("r-kernel pole at z = {z}")));
    }
    Ok(num.div(&den))
}

/// `R(a,b,γ,z,base) = r(a,b,z²,base) · z^γ`.
///
/// For non-integer `γ` the principal power requires real `z > 0`.
pub fn big_r_kernel(k: &QBinomialKernel, z: ComplexValue, ctx: &QContext) -> Result<ComplexValue> {
    let zg = if (k.gamma - k.gamma.round()).abs() < 1e-12 {
        z.powi(k.gamma.round() as i32)
    } else {
        if z.im != 0.0 || z.re <= 0.0 {
            return Err(Error::Domain(
                "non-integer gamma requires real z > 0 for the principal power".into(),
            ));
        }
        Complex64::new(z.re.powf(k.gamma), 0.0)
    };
    Ok(r_kernel(k, z * z, ctx)? * zg)
}

/// Residual `|z[b r(z) - a r(qz)] - (r(z) - r(qz))|` of the first-order
/// difference equation satisfied by `r`; the shift equals the kernel base.
pub fn r_diff_residual(k: &QBinomialKernel, z: ComplexValue, ctx: &QContext) -> Result<f64> {
    let r0 = r_kernel(k, z, ctx)?;
    let r1 = r_kernel(k, k.base * z, ctx)?;
    let lhs = z * (k.b * r0 - k.a * r1);
    let rhs = r0 - r1;
    Ok((lhs - rhs).norm())
}

/// Residual `|z²[b q^γ R(z) - a R(qz)] - (q^γ R(z) - R(qz))|` with
/// `q = sqrt(base)`.
pub fn big_r_diff_residual(k: &QBinomialKernel, z: ComplexValue, ctx: &QContext) -> Result<f64> {
    let q = k.base.sqrt();
    let qg = q.powf(k.gamma);
    let r0 = big_r_kernel(k, z, ctx)?;
    let r1 = big_r_kernel(k, q * z, ctx)?;
    let lhs = z * z * (k.b * qg * r0 - k.a * r1);
    let rhs = qg * r0 - r1;
    Ok((lhs - rhs).norm())
}

/// Selector for the partial-fraction expansion of `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartialFractionForm {
    /// Alternating form with Pochhammer numerators `((a/b) q^{-k};q)_∞`;
    /// requires `|a| < |b|`.
    General,
    /// Resummed form in powers of `a/b`; requires `0 < |a| < |b|`.
    Resummed,
    /// Specialization to `a = 0`.
    AZero,
}

/// Partial-fraction expansion of `r(a,b,z,base)`, truncated after `terms`
/// summands when given, otherwise by the tail criterion. Valid off the pole
/// set `z = b^{-1} base^{-k}`; it converges for any such `z`, also outside
/// the Taylor radius of the power-series form.
pub fn r_partial_fractions(
    k: &QBinomialKernel,
    z: ComplexValue,
    terms: Option<usize>,
    form: PartialFractionForm,
    ctx: &QContext,
) -> Result<ComplexValue> {
    let q = k.base;
    let bctx = k.base_ctx(ctx)?;
    if form != PartialFractionForm::AZero && k.a.norm() >= k.b.norm() {
        return Err(Error::Domain("partial fractions require |a| < |b|".into()));
    }
    if form == PartialFractionForm::Resummed && k.a.norm() == 0.0 {
        return Err(Error::Domain("resummed form requires a != 0".into()));
    }
    if near_pole(k.b * z, q, ctx.tol.eps_rel) {
        return Err(Error::Pole(format!("partial fractions evaluated at pole z = {z}")));
    }
    let qq_inf = qcore::qpochhammer_inf(Complex64::new(q, 0.0), &bctx)?;
    let max = terms.unwrap_or(ctx.tol.max_terms);
    let mut tail = TailCheck::new(&ctx.tol);
    let mut sum = Complex64::new(0.0, 0.0);

    match form {
        PartialFractionForm::General => {
            // numerator N_k = (-1)^k q^{k(k+1)/2} ((a/b) q^{-k};q)_∞ / (q;q)_k
            // via N_{k+1} = N_k (a/b - q^{k+1}) / (1 - q^{k+1})
            let ab = k.a / k.b;
            let mut n = qcore::qpochhammer_inf(ab, &bctx)?;
            let mut qk = 1.0f64; // q^k
            for ki in 0..max {
                let term = n / (Complex64::new(1.0, 0.0) - z * k.b * qk);
                sum += term;
                if terms.is_none() && tail.update(term.norm(), sum.norm()) {
                    break;
                }
                let qk1 = qk * q;
                n = n * (ab - qk1) / (1.0 - qk1);
                qk = qk1;
                if terms.is_none() && ki + 1 == max {
                    return Err(Error::TailNotConverged("partial-fraction expansion".into()));
                }
            }
            Ok(sum / qq_inf)
        }
        PartialFractionForm::Resummed => {
            // prefactor (a/b;q)_∞/(q;q)_∞, terms ((b/a)q;q)_k (a/b)^k / (q;q)_k
            let ab = k.a / k.b;
            let ba = k.b / k.a;
            let pref = qcore::qpochhammer_inf(ab, &bctx)? / qq_inf;
            let mut u = Complex64::new(1.0, 0.0);
            let mut qk = 1.0f64;
            for ki in 0..max {
                let term = u / (Complex64::new(1.0, 0.0) - z * k.b * qk);
                sum += term;
                if terms.is_none() && tail.update(term.norm(), sum.norm()) {
                    break;
                }
                let qk1 = qk * q;
                u = u * (Complex64::new(1.0, 0.0) - ba * qk1) * ab / (1.0 - qk1);
                qk = qk1;
                if terms.is_none() && ki + 1 == max {
                    return Err(Error::TailNotConverged("partial-fraction expansion".into()));
                }
            }
            Ok(pref * sum)
        }
        PartialFractionForm::AZero => {
            // 1/(bz;q)_∞ = (1/(q;q)_∞) Σ (-1)^k q^{k(k+1)/2} / ((q;q)_k (1 - z b q^k))
            let mut n = Complex64::new(1.0, 0.0);
            let mut qk = 1.0f64;
            for ki in 0..max {
                let term = n / (Complex64::new(1.0, 0.0) - z * k.b * qk);
                sum += term;
                if terms.is_none() && tail.update(term.norm(), sum.norm()) {
                    break;
                }
                let qk1 = qk * q;
                n = n * (-qk1) / (1.0 - qk1);
                qk = qk1;
                if terms.is_none() && ki + 1 == max {
                    return Err(Error::TailNotConverged("partial-fraction expansion".into()));
                }
            }
            Ok(sum / qq_inf)
        }
    }
}

// ---------------------------------------------------------------------------
// The lattice constant Q_ν and its elliptic closed form
// ---------------------------------------------------------------------------

/// `Q_ν = (1-q) Σ_{m∈ℤ} 1/(q^{m-ν+1/2} + q^{-m+ν-1/2})`, summed bilaterally
/// (terms decay like `q^{|m|}`). Exactly periodic in `ν ↦ ν+1`.
pub fn q_nu(nu: f64, ctx: &QContext) -> Result<f64> {
    let t = nu - 0.5;
    let l = -ctx.q.ln();
    let mut acc = KahanSum::default();
    let term = |m: f64| 0.5 / (l * (m - t)).cosh();
    // m >= 0
    let mut tail = TailCheck::new(&ctx.tol);
    let mut done = false;
    for m in 0..ctx.tol.max_terms {
        let v = term(m as f64);
        acc.add(v);
        if tail.update(v, acc.value().abs()) {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::TailNotConverged("Q_nu bilateral sum (m -> +inf)".into()));
    }
    // m < 0
    let mut tail = TailCheck::new(&ctx.tol);
    done = false;
    for m in 1..ctx.tol.max_terms {
        let v = term(-(m as f64));
        acc.add(v);
        if tail.update(v, acc.value().abs()) {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::TailNotConverged("Q_nu bilateral sum (m -> -inf)".into()));
    }
    Ok((1.0 - ctx.q) * acc.value())
}

/// Jacobi theta null values `θ₂(0,q), θ₃(0,q), θ₄(0,q)` for nome `q`,
/// via their triple-product forms. The products have positive factors for
/// θ₂/θ₃ and no alternation for θ₄, so they keep full relative precision
/// where the alternating theta series would cancel catastrophically
/// (θ₄(0,q) is exponentially small as `q → 1`).
pub fn theta_nulls(q: f64, ctx: &QContext) -> Result<(f64, f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("theta nome must lie in (0,1), got {q}")));
    }
    // θ₂ = 2 q^{1/4} (q²;q²)_∞ (-q²;q²)_∞²
    // θ₃ = (q²;q²)_∞ (-q;q²)_∞²
    // θ₄ = (q²;q²)_∞ (q;q²)_∞²
    let p = q * q;
    let e = |a: f64| qcore::qpochhammer_inf_scaled_re(a, p, &ctx.tol);
    let qq = e(p)?;
    let t2 = 2.0 * q.powf(0.25) * qq.mul(&e(-p)?).mul(&e(-p)?).to_complex().re;
    let t3 = qq.mul(&e(-q)?).mul(&e(-q)?).to_complex().re;
    let t4 = qq.mul(&e(q)?).mul(&e(q)?).to_complex().re;
    Ok((t2, t3, t4))
}

/// Arithmetic-geometric mean.
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (a1, b1) = (0.5 * (a + b), (a * b).sqrt());
        if (a1 - b1).abs() <= 1e-16 * a1.abs() {
            return a1;
        }
        a = a1;
        b = b1;
    }
    0.5 * (a + b)
}

/// Theta functions `θ₃(v,q), θ₄(v,q)` at argument `v`.
fn theta34_at(v: f64, q: f64) -> (f64, f64) {
    let mut t3 = 1.0f64;
    let mut t4 = 1.0f64;
    let mut qn = 1.0f64;
    for n in 1..400 {
        qn = q.powf((n * n) as f64);
        if qn < 1e-18 {
            break;
        }
        let c = 2.0 * qn * (2.0 * n as f64 * v).cos();
        t3 += c;
        t4 += if n % 2 == 0 { c } else { -c };
    }
    let _ = qn;
    (t3, t4)
}

/// Elliptic closed form of [`q_nu`]:
/// `(1-q)/π · K(k) · dn(2(ν-1/2)K'(k); k')` with `q` as the nome.
///
/// `k` comes from the theta nulls, `K` from the AGM, and `dn` (at the
/// complementary modulus) from its theta quotient at the complementary nome,
/// where the argument reduces to `v = π(ν-1/2)` exactly.
pub fn q_nu_elliptic(nu: f64, ctx: &QContext) -> Result<f64> {
    let q = ctx.q;
    let (t2, t3, t4) = theta_nulls(q, ctx)?;
    let kprime = (t4 / t3) * (t4 / t3);
    // K(k) = π/(2 AGM(1, k'))
    let big_k = std::f64::consts::PI / (2.0 * agm(1.0, kprime));
    let l = -q.ln();
    // complementary nome
    let qp = (-std::f64::consts::PI * std::f64::consts::PI / l).exp();
    let v = std::f64::consts::PI * (nu - 0.5);
    let (n3, n4) = theta34_at(0.0, qp);
    let (v3, v4) = theta34_at(v, qp);
    let dn = (n4 / n3) * (v3 / v4);
    let _ = t2;
    Ok((1.0 - q) / std::f64::consts::PI * big_k * dn)
}

/// Elliptic modulus `k = θ₂²/θ₃²` for nome `q` (exposed for limit studies).
pub fn elliptic_modulus(ctx: &QContext) -> Result<f64> {
    let (t2, t3, _) = theta_nulls(ctx.q, ctx)?;
    Ok((t2 / t3) * (t2 / t3))
}

// ---------------------------------------------------------------------------
// Bound suite
// ---------------------------------------------------------------------------

/// Grid for [`bound_suite`].
#[derive(Debug, Clone)]
pub struct BoundGrid {
    /// Lattice exponents `m` for the oscillator bounds.
    pub m_values: Vec<i32>,
    /// Argument scales `s`.
    pub s_values: Vec<f64>,
    /// Evaluation points `z` for the kernel ratio bound.
    pub z_values: Vec<f64>,
    /// Exponent pairs `(α, β)` with `α > β + 1`.
    pub alpha_beta: Vec<(f64, f64)>,
    /// Range for the monotone-decay checks.
    pub decay_m_max: i32,
}

impl Default for BoundGrid {
    fn default() -> Self {
        Self {
            m_values: (-10..=10).collect(),
            s_values: vec![0.1, 1.0, 10.0],
            z_values: vec![0.1, 0.5, 1.5, 4.0],
            alpha_beta: vec![(2.0, 0.5), (2.5, 1.2), (3.0, 0.8)],
            decay_m_max: 40,
        }
    }
}

/// One bound/decay check result. `worst_slack >= 0` means the bound (or the
/// monotone decay) held everywhere on the grid.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: &'static str,
    pub worst_slack: f64,
}

/// Explicit majorant constant for the kernel ratio bound
/// `(-q^{2α}z²;q²)_∞/(-q^{2β}z²;q²)_∞ ≤ C_{α,β}/(1+z²q^{2β})`, `α > β+1`:
/// `C = (q^{2(α-β)};q²)_∞/(q²;q²)_∞ · Σ_k |(q^{2(β-α+1)};q²)_k| q^{2(α-β-1)k}/(q²;q²)_k`.
pub fn c_alpha_beta(alpha: f64, beta: f64, ctx: &QContext) -> Result<f64> {
    if alpha <= beta + 1.0 {
        return Err(Error::Domain("majorant constant requires alpha > beta + 1".into()));
    }
    let p = ctx.q2;
    let pctx = ctx.squared();
    let pref = qcore::qpochhammer_inf(Complex64::new(ctx.q.powf(2.0 * (alpha - beta)), 0.0), &pctx)?
        / qcore::qpochhammer_inf(Complex64::new(p, 0.0), &pctx)?;
    let a1 = ctx.q.powf(2.0 * (beta - alpha + 1.0));
    let ratio = ctx.q.powf(2.0 * (alpha - beta - 1.0));
    let mut sum = 0.0f64;
    let mut term = 1.0f64;
    let mut pk = 1.0f64;
    let mut tail = TailCheck::new(&ctx.tol);
    for _ in 0..ctx.tol.max_terms {
        sum += term.abs();
        if tail.update(term.abs(), sum) {
            return Ok(pref.re * sum);
        }
        term *= (1.0 - a1 * pk).abs() * ratio / (1.0 - p * pk);
        pk *= p;
    }
    Err(Error::TailNotConverged("majorant constant series".into()))
}

fn min_slack(acc: &mut f64, slack: f64) {
    if slack < *acc {
        *acc = slack;
    }
}

/// Evaluate the oscillator/kernel bound corollaries over `grid`.
///
/// Decay statements are checked as monotone decrease over `m = 1..decay_m_max`
/// (slack = smallest decrement); pointwise bounds report the smallest
/// `bound - measured` over the grid. The `Cos_q`/`Sin_q` bounds hold only in
/// the small-argument regime and go negative on grids reaching large
/// `q^{-m} s`; they are reported as measured.
pub fn bound_suite(ctx: &QContext, grid: &BoundGrid) -> Result<Vec<BoundCheck>> {
    let q = ctx.q;
    let half_lambda = 0.5 * ctx.lambda;
    let mut results = Vec::new();

    // e_q(i λ q^{-m} s / 2) -> 0 monotonically (m = 1..decay_m_max)
    {
        let mut worst = f64::INFINITY;
        for &s in &grid.s_values {
            let mut prev = f64::INFINITY;
            for m in 1..=grid.decay_m_max {
                let y = half_lambda * q.powi(-m) * s;
                let v = qcore::eq_exp_scaled(Complex64::new(0.0, y), ctx)?.to_complex().norm();
                if prev.is_finite() {
                    min_slack(&mut worst, prev - v);
                }
                prev = v;
            }
        }
        results.push(BoundCheck { name: "eq-osc-decay", worst_slack: worst });
    }

    // |cos_q(λ q^{-m} s/2)| <= E_q(1/q) e_q(q) / (1 + (λ/2)² q^{-2m} s²)
    {
        let eq_q = qcore::eq_exp(Complex64::new(q, 0.0), ctx)?.re;
        let eb_qinv = qcore::eq_exp_big(Complex64::new(1.0 / q, 0.0), ctx)?.re;
        let c = eq_q * eb_qinv;
        let mut worst = f64::INFINITY;
        for &m in &grid.m_values {
            for &s in &grid.s_values {
                let y = half_lambda * q.powi(-m) * s;
                let cosq = qcore::eq_exp_scaled(Complex64::new(0.0, y), ctx)?.to_complex().re;
                let bound = c / (1.0 + y * y);
                min_slack(&mut worst, bound - cosq.abs());
            }
        }
        results.push(BoundCheck { name: "cosq-partial-fraction-bound", worst_slack: worst });
    }

    // e_q(-λ q^{-m} s/2) -> 0 monotonically for s > 0
    {
        let mut worst = f64::INFINITY;
        for &s in &grid.s_values {
            let mut prev = f64::INFINITY;
            for m in 1..=grid.decay_m_max {
                let y = half_lambda * q.powi(-m) * s;
                let v = qcore::eq_exp_scaled(Complex64::new(-y, 0.0), ctx)?.to_complex().norm();
                if prev.is_finite() {
                    min_slack(&mut worst, prev - v);
                }
                prev = v;
            }
        }
        results.push(BoundCheck { name: "eq-neg-decay", worst_slack: worst });
    }

    // |Cos_q| <= 1 and |Sin_q| <= q^{-m}(1+q)|s|/2
    {
        let mut worst_cos = f64::INFINITY;
        let mut worst_sin = f64::INFINITY;
        for &m in &grid.m_values {
            for &s in &grid.s_values {
                let y = half_lambda * q.powi(-m) * s;
                let e = qcore::eq_exp_big_scaled(Complex64::new(0.0, y), ctx)?;
                let ln = e.ln_norm();
                let (cosv, sinv) = if ln > 700.0 {
                    (f64::INFINITY, f64::INFINITY)
                } else {
                    let v = e.to_complex();
                    (v.re.abs(), v.im.abs())
                };
                min_slack(&mut worst_cos, 1.0 - cosv);
                min_slack(&mut worst_sin, 0.5 * q.powi(-m) * (1.0 + q) * s - sinv);
            }
        }
        results.push(BoundCheck { name: "bigcos-unit-bound", worst_slack: worst_cos });
        results.push(BoundCheck { name: "bigsin-linear-bound", worst_slack: worst_sin });
    }

    // kernel ratio bound with explicit majorant constant
    {
        let pctx = ctx.squared();
        let mut worst = f64::INFINITY;
        for &(alpha, beta) in &grid.alpha_beta {
            let c = c_alpha_beta(alpha, beta, ctx)?;
            for &z in &grid.z_values {
                let z2 = z * z;
                let num =
                    qcore::qpochhammer_inf(Complex64::new(-q.powf(2.0 * alpha) * z2, 0.0), &pctx)?.re;
                let den =
                    qcore::qpochhammer_inf(Complex64::new(-q.powf(2.0 * beta) * z2, 0.0), &pctx)?.re;
                let measured = num / den;
                let bound = c / (1.0 + z2 * q.powf(2.0 * beta));
                min_slack(&mut worst, bound - measured);
            }
        }
        results.push(BoundCheck { name: "kernel-ratio-majorant", worst_slack: worst });
    }

    // shifted kernel ratio -> 0 monotonically (α > β + 1/2)
    {
        let pctx = ctx.squared();
        let mut worst = f64::INFINITY;
        for &(alpha, beta) in &grid.alpha_beta {
            let mut prev = f64::INFINITY;
            for m in 1..=grid.decay_m_max {
                let num = qcore::qpochhammer_inf_scaled(
                    Complex64::new(-q.powf(2.0 * (alpha - m as f64)), 0.0),
                    pctx.q,
                    &ctx.tol,
                )?;
                let den = qcore::qpochhammer_inf_scaled(
                    Complex64::new(-q.powf(2.0 * (beta - m as f64)), 0.0),
                    pctx.q,
                    &ctx.tol,
                )?;
                let v = num.div(&den).to_complex().norm();
                if prev.is_finite() {
                    min_slack(&mut worst, prev - v);
                }
                prev = v;
            }
        }
        results.push(BoundCheck { name: "shifted-kernel-decay", worst_slack: worst });
    }

    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> ComplexValue {
        Complex64::new(x, 0.0)
    }

    fn ctx(q: f64) -> QContext {
        QContext::new(q).unwrap()
    }

    #[test]
    fn r_kernel_degenerate_cases() {
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.3), c(0.3), 0.0, 0.5).unwrap();
        let v = r_kernel(&k, c(0.7), &cx).unwrap();
        assert!((v - c(1.0)).norm() < 1e-14);
        let k = QBinomialKernel::new(c(0.2), c(0.6), 0.0, 0.5).unwrap();
        let v = r_kernel(&k, c(0.0), &cx).unwrap();
        assert!((v - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn r_kernel_matches_partial_products() {
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.2), c(0.5), 0.0, 0.5).unwrap();
        let z = 0.4;
        let mut num = 1.0;
        let mut den = 1.0;
        let mut qj = 1.0;
        for _ in 0..200 {
            num *= 1.0 - 0.2 * z * qj;
            den *= 1.0 - 0.5 * z * qj;
            qj *= 0.5;
        }
        let v = r_kernel(&k, c(z), &cx).unwrap();
        assert!((v.re - num / den).abs() < 1e-14);
        // pole rejection at z = 1/b
        assert!(matches!(r_kernel(&k, c(2.0), &cx), Err(Error::Pole(_))));
    }

    #[test]
    fn big_r_kernel_reductions() {
        let cx = ctx(0.6);
        // γ = 0 reduces to r at z²
        let k0 = QBinomialKernel::new(c(0.3), c(0.7), 0.0, cx.q2).unwrap();
        let v = big_r_kernel(&k0, c(0.5), &cx).unwrap();
        let r = r_kernel(&k0, c(0.25), &cx).unwrap();
        assert!((v - r).norm() < 1e-14);
        // z = 1: plain Pochhammer ratio
        let k1 = QBinomialKernel::new(c(0.3), c(0.7), 1.3, cx.q2).unwrap();
        let v = big_r_kernel(&k1, c(1.0), &cx).unwrap();
        assert!((v - r_kernel(&k1, c(1.0), &cx).unwrap()).norm() < 1e-14);
        // non-integer γ at z <= 0 rejected
        assert!(big_r_kernel(&k1, c(-0.5), &cx).is_err());
    }

    #[test]
    fn difference_equation_residuals() {
        let cx = ctx(0.6);
        // generic instance
        let k = QBinomialKernel::new(c(0.25), c(0.8), 0.0, 0.6).unwrap();
        assert!(r_diff_residual(&k, c(0.45), &cx).unwrap() < 1e-12);
        // a = b: both sides vanish identically
        let k = QBinomialKernel::new(c(0.4), c(0.4), 0.0, 0.6).unwrap();
        assert!(r_diff_residual(&k, c(0.45), &cx).unwrap() < 1e-15);
        // the unit-interval kernel instance (a=q², b=q^{2ν+1}, γ=0) at q = 0.6
        let nu = 0.75;
        let k = QBinomialKernel::new(c(cx.q2), c(cx.q.powf(2.0 * nu + 1.0)), 0.0, cx.q2).unwrap();
        assert!(big_r_diff_residual(&k, c(0.3), &cx).unwrap() < 1e-12);
        // a weighted instance with γ = 1
        let k = QBinomialKernel::new(c(-cx.q2), c(-cx.q.powf(-2.0 * nu)), 1.0, cx.q2).unwrap();
        assert!(big_r_diff_residual(&k, c(0.7), &cx).unwrap() < 1e-12);
    }

    #[test]
    fn partial_fractions_match_product_form() {
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.1), c(0.5), 0.0, 0.5).unwrap();
        let z = c(0.4);
        let direct = r_kernel(&k, z, &cx).unwrap();
        let pf = r_partial_fractions(&k, z, None, PartialFractionForm::General, &cx).unwrap();
        assert!((pf - direct).norm() < 1e-10 * direct.norm());
        let pf = r_partial_fractions(&k, z, None, PartialFractionForm::Resummed, &cx).unwrap();
        assert!((pf - direct).norm() < 1e-10 * direct.norm());
        // |a| >= |b| rejected
        let bad = QBinomialKernel::new(c(0.6), c(0.5), 0.0, 0.5).unwrap();
        assert!(r_partial_fractions(&bad, z, None, PartialFractionForm::General, &cx).is_err());
    }

    #[test]
    fn partial_fractions_a_zero_form() {
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.0), c(0.5), 0.0, 0.5).unwrap();
        let z = c(0.8);
        let pf = r_partial_fractions(&k, z, None, PartialFractionForm::AZero, &cx).unwrap();
        let direct = qcore::qpochhammer_inf(k.b * z, &cx).unwrap().finv();
        assert!((pf - direct).norm() < 1e-11 * direct.norm());
    }

    #[test]
    fn partial_fractions_continue_outside_taylor_radius() {
        // The Taylor series of r converges only for |bz| < 1; the partial
        // fractions are valid beyond it (off poles).
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.1), c(0.5), 0.0, 0.5).unwrap();
        let z = c(3.1); // bz = 1.55, between the poles 1/b = 2 and q^{-1}/b = 4
        let direct = r_kernel(&k, z, &cx).unwrap();
        let pf = r_partial_fractions(&k, z, None, PartialFractionForm::General, &cx).unwrap();
        assert!((pf - direct).norm() < 1e-10 * direct.norm());
    }

    #[test]
    fn near_pole_partial_fractions_dominated_by_residue_term() {
        let cx = ctx(0.5);
        let k = QBinomialKernel::new(c(0.1), c(0.5), 0.0, 0.5).unwrap();
        // near the k = 0 pole at z = 1/b = 2
        let z = c(2.0 + 1e-6);
        let full = r_partial_fractions(&k, z, None, PartialFractionForm::General, &cx).unwrap();
        // k = 0 term alone: ((a/b);q)_inf / ((q;q)_inf (1 - zb))
        let ab = qcore::qpochhammer_inf(c(0.2), &cx).unwrap();
        let qq = qcore::qpochhammer_inf(c(0.5), &cx).unwrap();
        let t0 = ab / (qq * (c(1.0) - z * k.b));
        assert!((full - t0).norm() < 1e-4 * full.norm());
    }

    #[test]
    fn taylor_form_agrees_with_resummed_form_inside_radius() {
        // Σ_k ε^k q^{2βk} (q^{2(α-β)};q²)_k/(q²;q²)_k z^{2k} against the
        // partial-fraction resummation, inside |z| < q^{-β}.
        let cx = ctx(0.6);
        let p = cx.q2;
        for &eps in &[1.0f64, -1.0] {
            let (alpha, beta) = (1.6, 0.4);
            let a = c(eps * cx.q.powf(2.0 * alpha));
            let b = c(eps * cx.q.powf(2.0 * beta));
            let z = c(0.8);
            let k = QBinomialKernel::new(a, b, 0.0, p).unwrap();
            let pf = r_partial_fractions(&k, z * z, None, PartialFractionForm::Resummed, &cx).unwrap();
            let mut taylor = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            let cpar = cx.q.powf(2.0 * (alpha - beta));
            let mut pk = 1.0;
            for ki in 0..300 {
                taylor += term;
                let _ = ki;
                term = term * (1.0 - cpar * pk) / (1.0 - p * pk) * (b * z * z);
                pk *= p;
                if term.norm() < 1e-18 {
                    break;
                }
            }
            assert!((pf - taylor).norm() < 1e-10 * taylor.norm(), "eps = {eps}");
        }
    }

    #[test]
    fn q_nu_shift_periodicity() {
        let cx = ctx(0.5);
        let a = q_nu(0.3, &cx).unwrap();
        let b = q_nu(1.3, &cx).unwrap();
        assert!((a - b).abs() < 1e-13 * a.abs());
    }

    #[test]
    fn q_nu_half_matches_direct_sum() {
        let cx = ctx(0.5);
        let v = q_nu(0.5, &cx).unwrap();
        // (1-q) Σ 1/(q^m + q^{-m})
        let mut oracle = 0.5; // m = 0 term: 1/2
        for m in 1..200 {
            let qm = 0.5f64.powi(m);
            oracle += 2.0 / (qm + 1.0 / qm);
        }
        oracle *= 0.5;
        assert!((v - oracle).abs() < 1e-13);
    }

    #[test]
    fn q_nu_elliptic_cross_check() {
        for &q in &[0.3, 0.5, 0.7, 0.9] {
            let cx = ctx(q);
            for &nu in &[0.25, 0.3, 0.5, 1.3] {
                let lattice = q_nu(nu, &cx).unwrap();
                let elliptic = q_nu_elliptic(nu, &cx).unwrap();
                assert!(
                    (lattice - elliptic).abs() < 1e-9 * lattice.abs(),
                    "q={q} nu={nu}: {lattice} vs {elliptic}"
                );
            }
        }
    }

    #[test]
    fn q_nu_half_equals_elliptic_k_factor() {
        // at ν = 1/2 the dn factor is 1, so Q = (1-q) K(k) / π
        let cx = ctx(0.5);
        let (_, t3, t4) = theta_nulls(0.5, &cx).unwrap();
        let kprime = (t4 / t3).powi(2);
        let big_k = std::f64::consts::PI / (2.0 * agm(1.0, kprime));
        let expect = 0.5 * big_k / std::f64::consts::PI;
        let v = q_nu_elliptic(0.5, &cx).unwrap();
        assert!((v - expect).abs() < 1e-13);
    }

    #[test]
    fn modulus_increases_towards_one_as_q_increases() {
        // nome -> 1 drives the modulus k -> 1 (saturating at 1 in f64)
        let mut prev = 0.0;
        for k in 2..=8 {
            let q = 1.0 - 2f64.powi(-k);
            let m = elliptic_modulus(&ctx(q)).unwrap();
            assert!(m >= prev && m <= 1.0 + 1e-12, "k={k} m={m} prev={prev}");
            prev = m;
        }
        assert!(prev > 1.0 - 1e-6);
    }

    #[test]
    fn theta_identity_jacobi() {
        // θ₂⁴ + θ₄⁴ = θ₃⁴
        let cx = ctx(0.37);
        let (t2, t3, t4) = theta_nulls(0.37, &cx).unwrap();
        assert!((t2.powi(4) + t4.powi(4) - t3.powi(4)).abs() < 1e-12 * t3.powi(4));
    }

    #[test]
    fn agm_matches_elliptic_k_series() {
        // K(k) for small k: π/2 (1 + k²/4 + 9k⁴/64 + ...)
        let k: f64 = 0.2;
        let kp = (1.0 - k * k).sqrt();
        let big_k = std::f64::consts::PI / (2.0 * agm(1.0, kp));
        let series = std::f64::consts::PI / 2.0
            * (1.0 + k * k / 4.0 + 9.0 * k.powi(4) / 64.0 + 225.0 * k.powi(6) / 2304.0);
        assert!((big_k - series).abs() < 1e-6);
    }

    #[test]
    fn classical_limit_of_weighted_kernel() {
        // As q -> 1, R(εq^{2α}, εq^{2β}, γ, z) approaches C z^γ (1-εz²)^{β-α}:
        // exponent recovered by a ratio test at two points.
        let (alpha, beta, eps) = (1.4, 0.3, -1.0);
        let q = 1.0 - 2f64.powi(-10);
        let cx = QContext::with_tolerance(
            q,
            crate::qcore::Tolerance { max_terms: 400_000, ..Default::default() },
        )
        .unwrap();
        let k = QBinomialKernel::new(
            c(eps * q.powf(2.0 * alpha)),
            c(eps * q.powf(2.0 * beta)),
            0.0,
            cx.q2,
        )
        .unwrap();
        let (z1, z2) = (0.4, 0.8);
        let w1 = big_r_kernel(&k, c(z1), &cx).unwrap().re;
        let w2 = big_r_kernel(&k, c(z2), &cx).unwrap().re;
        let measured = (w1 / w2).ln() / ((1.0 - eps * z1 * z1) / (1.0 - eps * z2 * z2)).ln();
        let target = beta - alpha;
        assert!(
            (measured - target).abs() < 0.02 * target.abs(),
            "measured {measured} target {target}"
        );
    }

    #[test]
    fn bound_suite_small_argument_regime_all_hold() {
        // restrict to arguments where the alternating-series bounds are valid
        let cx = ctx(0.5);
        let grid = BoundGrid {
            m_values: (-10..=0).collect(),
            s_values: vec![0.1, 1.0],
            ..Default::default()
        };
        for chk in bound_suite(&cx, &grid).unwrap() {
            assert!(chk.worst_slack >= 0.0, "{} slack {}", chk.name, chk.worst_slack);
        }
    }

    #[test]
    fn big_oscillator_bounds_fail_at_large_arguments() {
        // Cos² + Sin² = (-y²;q²)_∞ grows without bound, so the unit/linear
        // bounds cannot hold once q^{-m} s is large; document the violation.
        let cx = ctx(0.5);
        let grid = BoundGrid { m_values: vec![5], s_values: vec![2.0], ..Default::default() };
        let results = bound_suite(&cx, &grid).unwrap();
        let cos_slack = results.iter().find(|r| r.name == "bigcos-unit-bound").unwrap().worst_slack;
        let sin_slack = results.iter().find(|r| r.name == "bigsin-linear-bound").unwrap().worst_slack;
        assert!(cos_slack < 0.0 || sin_slack < 0.0);
        // magnitude check: |E_q(iy)|² = (-y²;q²)_∞ at y = λ q^{-5} s / 2
        let y = 0.5 * cx.lambda * cx.q.powi(-5) * 2.0;
        let e = qcore::eq_exp_big(Complex64::new(0.0, y), &cx).unwrap();
        let prod = qcore::qpochhammer_inf(c(-y * y), &cx.squared()).unwrap().re;
        assert!((e.norm_sqr() - prod).abs() < 1e-10 * prod);
    }

    #[test]
    fn cosq_little_stays_bounded_and_decays() {
        let cx = ctx(0.5);
        // cor 3.2-style decay: |e_q(i λ q^{-m} s/2)| at m = 30, s = 1 below 1e-3
        let y = 0.5 * cx.lambda * cx.q.powi(-30);
        let v = qcore::eq_exp_scaled(Complex64::new(0.0, y), &cx).unwrap().to_complex().norm();
        assert!(v < 1e-3);
        let y2 = 0.5 * cx.lambda * cx.q.powi(-31);
        let v2 = qcore::eq_exp_scaled(Complex64::new(0.0, y2), &cx).unwrap().to_complex().norm();
        assert!(v2 < v);
    }
}
