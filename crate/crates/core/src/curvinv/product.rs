use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{gauss_bonnet, lovelock, sigma_k, Check, CurvatureContext};
use crate::dfalg::{DoubleForm, MAX_DIM};
use crate::error::{Error, Result};

fn h4_or_zero(ctx: &CurvatureContext) -> Result<f64> {
    if ctx.n() < 4 {
        Ok(0.0)
    } else {
        gauss_bonnet(ctx, 2)
    }
}

/// Curvature of a Riemannian product, with the factors on consecutive
/// coordinate blocks. Asserts `h_4 = h_4(1) + Scal_1 Scal_2 / 2 + h_4(2)`.
pub fn product_curvature(a: &CurvatureContext, b: &CurvatureContext) -> Result<CurvatureContext> {
    let n = a.n() + b.n();
    if n > MAX_DIM {
        return Err(Error::Dimension(n));
    }
    let r = a.riemann().embed(n, 0)?.try_add(&b.riemann().embed(n, a.n())?)?;
    let ctx = CurvatureContext::new(r)?;
    if n >= 4 {
        let law = h4_or_zero(a)? + 0.5 * a.scal() * b.scal() + h4_or_zero(b)?;
        Check::scalar(gauss_bonnet(&ctx, 2)?, law).ensure("product h_4")?;
    }
    Ok(ctx)
}

/// Signs of the curvature quantities of `S^3(r) x S^p(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignReport {
    /// Minimum over coordinate planes and a fixed family of random planes.
    pub min_sectional: f64,
    pub min_curvature_operator_eig: f64,
    pub min_ricci_eig: f64,
    /// Smallest eigenvalue of `T_2 = Scal g / 2 - Ric`.
    pub min_einstein_eig: f64,
    pub h4: f64,
    pub sigma2: f64,
}

const RANDOM_PLANES: usize = 256;

fn sectional(r: &DoubleForm, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut biv = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            biv.push(u[i] * v[j] - u[j] * v[i]);
        }
    }
    let cols = biv.len();
    let mut num = 0.0;
    for (i, x) in biv.iter().enumerate() {
        for (j, y) in biv.iter().enumerate() {
            num += x * r.as_slice()[i * cols + j] * y;
        }
    }
    num / biv.iter().map(|x| x * x).sum::<f64>()
}

fn min_eig(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.min()
}

fn min_sectional(r: &DoubleForm) -> f64 {
    let n = r.n();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let mut u = vec![0.0; n];
            let mut v = vec![0.0; n];
            u[i] = 1.0;
            v[j] = 1.0;
            worst = worst.min(sectional(r, &u, &v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..RANDOM_PLANES {
        let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        worst = worst.min(sectional(r, &u, &v));
    }
    worst
}

/// Needs `r > 0` and `p >= 2`.
pub fn s3r_times_sp_signs(r: f64, p: usize) -> Result<SignReport> {
    if !(r > 0.0) || p < 2 {
        return Err(Error::Precondition(format!("need r > 0 and p >= 2 (got r={r}, p={p})")));
    }
    let s3 = CurvatureContext::space_form(3, 1.0 / (r * r))?;
    let sp = CurvatureContext::space_form(p, 1.0)?;
    let ctx = product_curvature(&s3, &sp)?;
    let rm = ctx.riemann();
    let rows = rm.rows();
    Ok(SignReport {
        min_sectional: min_sectional(rm),
        min_curvature_operator_eig: min_eig(DMatrix::from_row_slice(rows, rows, rm.as_slice())),
        min_ricci_eig: min_eig(ctx.ricci().to_matrix()?),
        min_einstein_eig: min_eig(lovelock(&ctx, 1)?.to_matrix()?),
        h4: gauss_bonnet(&ctx, 2)?,
        sigma2: sigma_k(ctx.schouten()?, 2)?,
    })
}
