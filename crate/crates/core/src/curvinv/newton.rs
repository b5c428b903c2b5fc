//! Generalized Newton transformations of `(p,p)` double forms and the Newton,
//! Avez-type, trace and GNF identities built on them.

use super::{gauss_bonnet, lovelock, Check, CurvatureContext};
use crate::dfalg::{factf, DoubleForm};
use crate::error::{Error, Result};

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn square_degree(w: &DoubleForm) -> Result<usize> {
    let (p, q) = w.bidegree();
    if p != q {
        return Err(Error::Degree(format!("Newton transformation needs a (p,p) form, got ({p},{q})")));
    }
    Ok(p)
}

/// `N_k(w) = *(g^(n-pk-p) w^k) / (n-pk-p)!` for a `(p,p)` form, `pk <= n-p`.
pub fn newton_transform(w: &DoubleForm, k: usize) -> Result<DoubleForm> {
    let p = square_degree(w)?;
    let n = w.n();
    if p * k + p > n {
        return Err(Error::Degree(format!("N_{k} of a ({p},{p}) form needs pk + p <= n = {n}")));
    }
    let m = n - p * k - p;
    Ok(w.power(k)?.times_metric_power(m)?.hodge_star().scale(1.0 / factf(m)))
}

/// Closed form valid for symmetric forms satisfying the first Bianchi identity:
/// `N_k(w) = sum_{r=pk-p}^{pk} (-1)^(r+pk) g^(p-pk+r) c^r w^k / ((p-pk+r)! r!)`.
pub fn newton_explicit(w: &DoubleForm, k: usize) -> Result<DoubleForm> {
    let p = square_degree(w)?;
    let n = w.n();
    if p * k + p > n {
        return Err(Error::Degree(format!("N_{k} of a ({p},{p}) form needs pk + p <= n = {n}")));
    }
    if k == 0 {
        return Ok(DoubleForm::metric_power(n, p)?.scale(1.0 / factf(p)));
    }
    let wk = w.power(k)?;
    let mut acc = DoubleForm::zeros(n, p, p)?;
    for r in (p * k - p)..=(p * k) {
        let gdeg = p + r - p * k;
        let term = wk.contract(r)?.times_metric_power(gdeg)?;
        acc = acc.axpy(sign(r + p * k) / (factf(gdeg) * factf(r)), &term)?;
    }
    Ok(acc)
}

/// `N_k(w)` from the definition, cross-checked against [`newton_explicit`]
/// when `w` is symmetric and (for `p = 2`) satisfies the first Bianchi
/// identity. Returns the definition value and the cross-check, if any.
pub fn newton_transform_checked(w: &DoubleForm, k: usize) -> Result<(DoubleForm, Option<Check>)> {
    let def = newton_transform(w, k)?;
    let p = w.bidegree().0;
    let eligible = w.is_symmetric(1e-12)
        && match p {
            0 | 1 => true,
            2 => w.first_bianchi_residual()? <= 1e-10 * w.max_abs().max(1.0),
            _ => false,
        };
    if !eligible {
        return Ok((def, None));
    }
    let check = Check::forms(&def, &newton_explicit(w, k)?)?;
    let check = check.ensure(&format!("N_{k} explicit formula"))?;
    Ok((def, Some(check)))
}

/// `<N_k(w), w> = c^(pk+p) w^(k+1) / (pk+p)!`.
pub fn newton_formula_residual(w: &DoubleForm, k: usize) -> Result<Check> {
    let p = square_degree(w)?;
    let lhs = newton_transform(w, k)?.inner(w)?;
    let rhs = w.power(k + 1)?.contract(p * k + p)?.scalar_value()? / factf(p * k + p);
    Ok(Check::scalar(lhs, rhs))
}

/// `h_{2k+2} = <c^(2k-2) R^k/(2k-2)!, R> - <c^(2k-1) R^k/(2k-1)!, cR> + h_2k h_2`
/// for `4 <= 2k+2 <= n`.
pub fn avez_type_residual(ctx: &CurvatureContext, k: usize) -> Result<Check> {
    let n = ctx.n();
    if k < 1 || 2 * k + 2 > n {
        return Err(Error::Degree(format!("Avez-type formula needs 4 <= 2k+2 <= n (k={k}, n={n})")));
    }
    let rk = ctx.power(k)?;
    let first = rk.contract(2 * k - 2)?.inner(ctx.riemann())? / factf(2 * k - 2);
    let second = rk.contract(2 * k - 1)?.inner(ctx.ricci())? / factf(2 * k - 1);
    let rhs = first - second + gauss_bonnet(ctx, k)? * gauss_bonnet(ctx, 1)?;
    Ok(Check::scalar(gauss_bonnet(ctx, k + 1)?, rhs))
}

/// `h_4 = |R|^2 - |cR|^2 + |c^2 R|^2 / 4`.
pub fn avez_classic_residual(ctx: &CurvatureContext) -> Result<Check> {
    let rhs = ctx.riemann().norm2() - ctx.ricci().norm2() + ctx.scal() * ctx.scal() / 4.0;
    Ok(Check::scalar(gauss_bonnet(ctx, 2)?, rhs))
}

/// Outcome of a precondition-guarded identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Applicability {
    Applicable(Check),
    /// The precondition fails; `deviation` measures by how much.
    NotApplicable {
        deviation: f64,
    },
}

/// For `(2k-2, k)`-Einstein curvature (`c^(2k-2) R^k` proportional to `g^2`):
/// `h_{2k+2} = {2k(2k-1)/(n(n-1)) + (n-4k)/n} h_2k h_2`.
pub fn pq_einstein_h_residual(ctx: &CurvatureContext, k: usize) -> Result<Applicability> {
    let n = ctx.n();
    if k < 1 || 2 * k + 2 > n {
        return Err(Error::Degree(format!("(2k-2,k)-Einstein identity needs 4 <= 2k+2 <= n (k={k}, n={n})")));
    }
    let x = ctx.power(k)?.contract(2 * k - 2)?;
    let g2 = DoubleForm::metric_power(n, 2)?;
    let lambda = x.inner(&g2)? / g2.norm2();
    let deviation = x.max_diff(&g2.scale(lambda))? / x.max_abs().max(1.0);
    if deviation > 1e-9 {
        return Ok(Applicability::NotApplicable { deviation });
    }
    let (kf, nf) = (k as f64, n as f64);
    let coef = 2.0 * kf * (2.0 * kf - 1.0) / (nf * (nf - 1.0)) + (nf - 4.0 * kf) / nf;
    let rhs = coef * gauss_bonnet(ctx, k)? * gauss_bonnet(ctx, 1)?;
    Ok(Applicability::Applicable(Check::scalar(gauss_bonnet(ctx, k + 1)?, rhs)))
}

/// `c N_k(R) = (n-2k-1) T_2k` and `c^2 N_k(R) = (n-2k)(n-2k-1) h_2k`,
/// for `0 <= 2k <= n-2`.
pub fn trace_relations_residual(ctx: &CurvatureContext, k: usize) -> Result<(Check, Check)> {
    let n = ctx.n();
    if 2 * k + 2 > n {
        return Err(Error::Degree(format!("trace relations need 2k <= n-2 (k={k}, n={n})")));
    }
    let nk = newton_transform(ctx.riemann(), k)?;
    let c1 = nk.contract(1)?;
    let m = (n - 2 * k) as f64;
    let t = lovelock(ctx, k)?.scale(m - 1.0);
    let first = Check::forms(&c1, &t)?;
    let c2 = c1.contract(1)?.scalar_value()?;
    let second = Check::scalar(c2, m * (m - 1.0) * gauss_bonnet(ctx, k)?);
    Ok((first, second))
}

/// `c^(p+k)(w h^k)/(p+k)! = <*(g^(n-p-k) w)/(n-p-k)!, h^k>` for a `(p,p)` form
/// `w` and symmetric bilinear `h`, `p + k <= n`.
pub fn gnf_residual(w: &DoubleForm, h: &DoubleForm, k: usize) -> Result<Check> {
    let p = square_degree(w)?;
    h.expect_bidegree(1, 1)?;
    let n = w.n();
    if p + k > n {
        return Err(Error::Degree(format!("GNF identity needs p + k <= n (p={p}, k={k}, n={n})")));
    }
    let hk = h.power(k)?;
    let lhs = w.product(&hk)?.contract(p + k)?.scalar_value()? / factf(p + k);
    let m = n - p - k;
    let rhs = w.times_metric_power(m)?.hodge_star().scale(1.0 / factf(m)).inner(&hk)?;
    Ok(Check::scalar(lhs, rhs))
}
