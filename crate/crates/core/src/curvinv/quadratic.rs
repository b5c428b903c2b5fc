use super::{gauss_bonnet, sigma_k, Check, CurvatureContext};
use crate::dfalg::{binomial, factf};
use crate::error::{Error, Result};

/// `h_2k` against its Schouten/Weyl split
/// `[(n-k)! k! / (n-2k)!] sigma_k(A) + sum_{i<k} [k! / (i! (k-i)! (n-2k)!)] <*(g^(n-2k+i) A^i), W^(k-i)>`.
pub fn sigma_weyl_split_residual(ctx: &CurvatureContext, k: usize) -> Result<Check> {
    let n = ctx.n();
    if 2 * k > n {
        return Err(Error::Degree(format!("h_{} needs 2k <= n = {n}", 2 * k)));
    }
    let a = ctx.schouten()?;
    let w = ctx.weyl()?;
    let m = n - 2 * k;
    let mut rhs = factf(n - k) * factf(k) / factf(m) * sigma_k(a, k)?;
    for i in 0..k {
        let left = a.power(i)?.times_metric_power(m + i)?.hodge_star();
        let coef = binomial(k, i) as f64 / factf(m);
        rhs += coef * left.inner(&w.power(k - i)?)?;
    }
    Ok(Check::scalar(gauss_bonnet(ctx, k)?, rhs))
}

/// Quadratic curvature invariants and the deficiencies that vanish exactly on
/// Einstein, conformally flat and constant-curvature tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticInvariants {
    /// `|Ric|^2 - Scal^2 / n`
    pub einstein_def: f64,
    /// `|R|^2 - |Ric|^2 / (n-2) + Scal^2 / (2(n-1)(n-2))`, equal to `|W|^2`
    pub confflat_def: f64,
    /// `|R|^2 - Scal^2 / (2n(n-1))`
    pub spaceform_def: f64,
    /// `|Ric|^2 - Scal^2 / (2n(n-1))`, kept for comparison. It does not vanish
    /// on space forms.
    pub spaceform_def_raw: f64,
    /// From `2(n-2)^2 sigma_2 = n Scal^2 / (4(n-1)) - |Ric|^2`.
    pub sigma2: f64,
    /// `None` when `n < 4`.
    pub h4: Option<f64>,
    pub weyl_norm2: f64,
}

/// Needs `n >= 3`. Cross-checks `sigma2` against `sigma_2(A)`, and for
/// `n >= 4` asserts `h_4 = |W|^2 + 2(n-2)(n-3) sigma_2`; on Einstein input it
/// also asserts `sigma_2 = Scal^2 / (8n(n-1))`.
pub fn quadratic_invariants(ctx: &CurvatureContext) -> Result<QuadraticInvariants> {
    let n = ctx.n();
    if n < 3 {
        return Err(Error::Precondition(format!("quadratic invariants need n >= 3 (got {n})")));
    }
    let nf = n as f64;
    let r2 = ctx.riemann().norm2();
    let ric2 = ctx.ricci().norm2();
    let s2 = ctx.scal() * ctx.scal();
    let einstein_def = ric2 - s2 / nf;
    let confflat_def = r2 - ric2 / (nf - 2.0) + s2 / (2.0 * (nf - 1.0) * (nf - 2.0));
    let spaceform_def = r2 - s2 / (2.0 * nf * (nf - 1.0));
    let spaceform_def_raw = ric2 - s2 / (2.0 * nf * (nf - 1.0));
    let sigma2 = (nf * s2 / (4.0 * (nf - 1.0)) - ric2) / (2.0 * (nf - 2.0).powi(2));
    let weyl_norm2 = ctx.weyl()?.norm2();

    Check::scalar(sigma2, sigma_k(ctx.schouten()?, 2)?).ensure("sigma_2 display")?;
    let h4 = if n >= 4 {
        let h4 = gauss_bonnet(ctx, 2)?;
        let split = weyl_norm2 + 2.0 * (nf - 2.0) * (nf - 3.0) * sigma2;
        Check::scalar(h4, split).ensure("h_4 Weyl split")?;
        Some(h4)
    } else {
        None
    };
    if einstein_def.abs() <= 1e-10 * ric2.max(1.0) {
        Check::scalar(sigma2, s2 / (8.0 * nf * (nf - 1.0))).ensure("Einstein sigma_2")?;
    }
    Ok(QuadraticInvariants { einstein_def, confflat_def, spaceform_def, spaceform_def_raw, sigma2, h4, weyl_norm2 })
}

#[cfg(test)]
mod tests {
    use super::super::{product_curvature, random_curvature};
    use super::*;
    use crate::dfalg::{random_symmetric, DoubleForm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_on_conformally_flat_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_symmetric(6, &mut rng).unwrap();
        let ctx = CurvatureContext::conformally_flat(&a).unwrap();
        assert!(ctx.weyl().unwrap().max_abs() < 1e-12);
        for k in 0..=3 {
            let c = sigma_weyl_split_residual(&ctx, k).unwrap();
            assert!(c.holds(1e-10), "k={k}");
        }
    }

    #[test]
    fn split_examples() {
        let s5 = CurvatureContext::space_form(5, 1.0).unwrap();
        assert!((sigma_k(s5.schouten().unwrap(), 2).unwrap() - 2.5).abs() < 1e-12);
        let c = sigma_weyl_split_residual(&s5, 2).unwrap();
        assert!((c.lhs - 30.0).abs() < 1e-10 && c.holds(1e-12));
        for n in 4..=8 {
            let ctx = random_curvature(n, 3, n as u64).unwrap();
            for k in 0..=(n / 2).min(3) {
                assert!(sigma_weyl_split_residual(&ctx, k).unwrap().holds(1e-8), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn deficiencies_vanish_on_witnesses() {
        let q = quadratic_invariants(&CurvatureContext::space_form(5, 0.8).unwrap()).unwrap();
        assert!(q.einstein_def.abs() < 1e-10);
        assert!(q.confflat_def.abs() < 1e-10);
        assert!(q.spaceform_def.abs() < 1e-10);
        assert!(q.spaceform_def_raw > 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_symmetric(5, &mut rng).unwrap();
        let q = quadratic_invariants(&CurvatureContext::conformally_flat(&a).unwrap()).unwrap();
        assert!(q.confflat_def.abs() < 1e-10);
        assert!(q.einstein_def > 1e-3 && q.spaceform_def > 1e-3);

        let ctx = random_curvature(5, 3, 3).unwrap();
        let q = quadratic_invariants(&ctx).unwrap();
        assert!((q.confflat_def - q.weyl_norm2).abs() < 1e-9 * q.weyl_norm2.max(1.0));
        assert!(q.einstein_def > 1e-3 && q.confflat_def > 1e-3 && q.spaceform_def > 1e-3);
    }

    #[test]
    fn einstein_product_sigma2() {
        // S^3(kappa=1) x S^3(kappa=1) is Einstein with Ric = 2g but not a space form.
        let s3 = CurvatureContext::space_form(3, 1.0).unwrap();
        let ctx = product_curvature(&s3, &s3).unwrap();
        let q = quadratic_invariants(&ctx).unwrap();
        assert!(q.einstein_def.abs() < 1e-10);
        assert!(q.spaceform_def > 1e-3);
        let s2 = ctx.scal() * ctx.scal();
        assert!((q.sigma2 - s2 / (8.0 * 6.0 * 5.0)).abs() < 1e-10);
    }

    #[test]
    fn h4_weyl_split_on_random_input() {
        let ctx = random_curvature(5, 4, 4).unwrap();
        let q = quadratic_invariants(&ctx).unwrap();
        let h4 = q.h4.unwrap();
        assert!((h4 - q.weyl_norm2 - 12.0 * q.sigma2).abs() < 1e-9 * h4.abs().max(1.0));
        let three = CurvatureContext::new(DoubleForm::metric_power(3, 2).unwrap()).unwrap();
        assert!(quadratic_invariants(&three).unwrap().h4.is_none());
    }
}
