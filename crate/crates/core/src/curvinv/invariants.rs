use super::{Check, CurvatureContext};
use crate::dfalg::{factf, DoubleForm};
use crate::error::{Error, Result};

/// The Schouten tensor of `ctx`.
pub fn schouten(ctx: &CurvatureContext) -> Result<DoubleForm> {
    ctx.schouten().cloned()
}

/// Both routes to `h_2k`: `*(g^(n-2k) R^k) / (n-2k)!` and `c^(2k) R^k / (2k)!`.
pub fn gauss_bonnet_pair(ctx: &CurvatureContext, k: usize) -> Result<Check> {
    let n = ctx.n();
    if 2 * k > n {
        return Err(Error::Degree(format!("h_{} needs 2k <= n = {n}", 2 * k)));
    }
    let rk = ctx.power(k)?;
    let star = rk.times_metric_power(n - 2 * k)?.hodge_star().scalar_value()? / factf(n - 2 * k);
    let contracted = rk.contract(2 * k)?.scalar_value()? / factf(2 * k);
    Ok(Check::scalar(contracted, star))
}

/// `h_2k`, after asserting the two routes agree.
pub fn gauss_bonnet(ctx: &CurvatureContext, k: usize) -> Result<f64> {
    Ok(gauss_bonnet_pair(ctx, k)?.ensure(&format!("h_{}", 2 * k))?.lhs)
}

/// Both routes to `T_2k`: `h_2k g - c^(2k-1) R^k / (2k-1)!` and
/// `*(g^(n-2k-1) R^k) / (n-2k-1)!` (the latter only for `2k < n`).
pub fn lovelock_pair(ctx: &CurvatureContext, k: usize) -> Result<(DoubleForm, Option<DoubleForm>)> {
    let n = ctx.n();
    if 2 * k > n {
        return Err(Error::Degree(format!("T_{} needs 2k <= n = {n}", 2 * k)));
    }
    let g = ctx.metric();
    let rk = ctx.power(k)?;
    let first = if k == 0 {
        g.clone()
    } else {
        let h = gauss_bonnet(ctx, k)?;
        g.scale(h).axpy(-1.0 / factf(2 * k - 1), &rk.contract(2 * k - 1)?)?
    };
    let star = if 2 * k < n {
        let m = n - 2 * k - 1;
        Some(rk.times_metric_power(m)?.hodge_star().scale(1.0 / factf(m)))
    } else {
        None
    };
    Ok((first, star))
}

/// Einstein-Lovelock tensor `T_2k`, after asserting the two routes agree.
pub fn lovelock(ctx: &CurvatureContext, k: usize) -> Result<DoubleForm> {
    let (first, star) = lovelock_pair(ctx, k)?;
    if let Some(star) = star {
        Check::forms(&first, &star)?.ensure(&format!("T_{}", 2 * k))?;
    }
    Ok(first)
}

/// Both routes to `sigma_k(h)`: `c^k h^k / (k!)^2` and `*(g^(n-k) h^k) / ((n-k)! k!)`.
pub fn sigma_k_pair(h: &DoubleForm, k: usize) -> Result<Check> {
    h.expect_bidegree(1, 1)?;
    let n = h.n();
    if k > n {
        return Err(Error::Degree(format!("sigma_{k} needs k <= n = {n}")));
    }
    let hk = h.power(k)?;
    let contracted = hk.contract(k)?.scalar_value()? / (factf(k) * factf(k));
    let star = hk.times_metric_power(n - k)?.hodge_star().scalar_value()? / (factf(n - k) * factf(k));
    Ok(Check::scalar(contracted, star))
}

/// `k`-th elementary symmetric function of the eigenvalues of `h`.
pub fn sigma_k(h: &DoubleForm, k: usize) -> Result<f64> {
    Ok(sigma_k_pair(h, k)?.ensure(&format!("sigma_{k}"))?.lhs)
}

/// Classical Newton transformation `t_k(h)`, `1 <= k <= n-1`, computed as
/// `*(g^(n-k-1) h^k) / ((n-k-1)! k!)` and checked against
/// `sigma_k g - c^(k-1) h^k / ((k-1)! k!)`.
pub fn classic_newton(h: &DoubleForm, k: usize) -> Result<DoubleForm> {
    h.expect_bidegree(1, 1)?;
    let n = h.n();
    if k < 1 || k + 1 > n {
        return Err(Error::Degree(format!("t_{k} needs 1 <= k <= n-1 = {}", n - 1)));
    }
    let hk = h.power(k)?;
    let star = hk.times_metric_power(n - k - 1)?.hodge_star().scale(1.0 / (factf(n - k - 1) * factf(k)));
    let g = DoubleForm::metric(n)?;
    let direct = g.scale(sigma_k(h, k)?).axpy(-1.0 / (factf(k - 1) * factf(k)), &hk.contract(k - 1)?)?;
    Check::forms(&star, &direct)?.ensure(&format!("t_{k}"))?;
    Ok(star)
}

#[cfg(test)]
mod tests {
    use super::super::random_curvature;
    use super::*;
    use crate::dfalg::random_symmetric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> DoubleForm {
        let n = values.len();
        let mut m = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            m[i * n + i] = *v;
        }
        DoubleForm::from_bilinear(n, &m).unwrap()
    }

    #[test]
    fn schouten_examples() {
        // Space form with kappa: A = (kappa/2) g, W = 0.
        let ctx = CurvatureContext::space_form(5, 0.7).unwrap();
        let a = schouten(&ctx).unwrap();
        assert!(a.max_diff(&ctx.metric().scale(0.35)).unwrap() < 1e-14);
        assert!(ctx.weyl().unwrap().max_abs() < 1e-14);
        // Ricci-flat: A = 0.
        let flat = CurvatureContext::space_form(4, 0.0).unwrap();
        assert_eq!(schouten(&flat).unwrap().max_abs(), 0.0);
        let ctx = random_curvature(5, 3, 2).unwrap();
        let w = ctx.riemann().try_sub(&ctx.metric().product(&schouten(&ctx).unwrap()).unwrap()).unwrap();
        assert!(w.contract(1).unwrap().max_abs() < 1e-10);
        let two = CurvatureContext::space_form(2, 1.0).unwrap();
        assert!(schouten(&two).is_err());
    }

    #[test]
    fn gauss_bonnet_examples() {
        let ctx = random_curvature(6, 3, 1).unwrap();
        assert_eq!(gauss_bonnet(&ctx, 0).unwrap(), 1.0);
        assert!((gauss_bonnet(&ctx, 1).unwrap() - ctx.scal() / 2.0).abs() < 1e-12 * ctx.scal().abs().max(1.0));
        let s4 = CurvatureContext::space_form(4, 1.0).unwrap();
        assert!((gauss_bonnet(&s4, 2).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(gauss_bonnet(&s4, 3), Err(Error::Degree(_))));
    }

    #[test]
    fn space_form_gauss_bonnet_closed_form() {
        for n in 2..=8 {
            for kappa in [0.5, 1.0, -1.3] {
                let ctx = CurvatureContext::space_form(n, kappa).unwrap();
                for k in 0..=n / 2 {
                    let expect = kappa.powi(k as i32) * factf(n) / (2f64.powi(k as i32) * factf(n - 2 * k));
                    let got = gauss_bonnet(&ctx, k).unwrap();
                    assert!((got - expect).abs() < 1e-10 * expect.abs().max(1.0), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn lovelock_examples() {
        let ctx = random_curvature(4, 3, 4).unwrap();
        assert_eq!(lovelock(&ctx, 0).unwrap(), ctx.metric());
        assert!(lovelock(&ctx, 2).unwrap().max_abs() < 1e-9);
        let s5 = CurvatureContext::space_form(5, 1.0).unwrap();
        let t2 = lovelock(&s5, 1).unwrap();
        assert!(t2.max_diff(&s5.metric().scale(6.0)).unwrap() < 1e-12);
    }

    #[test]
    fn einstein_tensor_is_half_scal_minus_ricci() {
        let ctx = random_curvature(5, 2, 9).unwrap();
        let t2 = lovelock(&ctx, 1).unwrap();
        let expect = ctx.metric().scale(ctx.scal() / 2.0).try_sub(ctx.ricci()).unwrap();
        assert!(t2.max_diff(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn sigma_examples() {
        let h = diag(&[1.0, 2.0, 3.0]);
        assert_eq!(sigma_k(&h, 0).unwrap(), 1.0);
        assert!((sigma_k(&h, 2).unwrap() - 11.0).abs() < 1e-12);
        assert!((sigma_k(&h, 3).unwrap() - 6.0).abs() < 1e-12);
        let ctx = random_curvature(6, 3, 5).unwrap();
        let s1 = sigma_k(ctx.schouten().unwrap(), 1).unwrap();
        assert!((s1 - ctx.scal() / 10.0).abs() < 1e-12 * ctx.scal().abs().max(1.0));
    }

    #[test]
    fn classic_newton_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_symmetric(4, &mut rng).unwrap();
        let t1 = classic_newton(&h, 1).unwrap();
        let expect = DoubleForm::metric(4).unwrap().scale(sigma_k(&h, 1).unwrap()).try_sub(&h).unwrap();
        assert!(t1.max_diff(&expect).unwrap() < 1e-12);

        let t1 = classic_newton(&diag(&[1.0, 2.0]), 1).unwrap();
        assert!(t1.max_diff(&diag(&[2.0, 1.0])).unwrap() < 1e-14);

        let h = random_symmetric(5, &mut rng).unwrap();
        let t3 = classic_newton(&h, 3).unwrap();
        assert!((t3.trace().unwrap() - 2.0 * sigma_k(&h, 3).unwrap()).abs() < 1e-10);
        assert!(classic_newton(&h, 5).is_err());
        assert!(classic_newton(&h, 0).is_err());
    }

    #[test]
    fn classic_newton_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 3..=7 {
            let h = random_symmetric(n, &mut rng).unwrap();
            let g = DoubleForm::metric(n).unwrap();
            let mut prev = g.clone();
            for k in 1..n {
                let tk = classic_newton(&h, k).unwrap();
                let rec = g.scale(sigma_k(&h, k).unwrap()).try_sub(&h.compose(&prev).unwrap()).unwrap();
                assert!(tk.max_diff(&rec).unwrap() < 1e-9 * rec.max_abs().max(1.0));
                prev = tk;
            }
        }
    }
}
