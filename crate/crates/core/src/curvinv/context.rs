use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dfalg::{random_symmetric, DoubleForm};
use crate::error::{Error, Result};

/// Relative tolerance for the symmetry and first Bianchi checks on `R`.
const STRUCTURE_TOL: f64 = 1e-10;

/// An algebraic curvature tensor at a point, in an orthonormal frame, with its
/// contractions, Schouten/Weyl split and powers computed once.
#[derive(Debug, Clone)]
pub struct CurvatureContext {
    n: usize,
    riemann: DoubleForm,
    ricci: DoubleForm,
    scal: f64,
    schouten: Option<DoubleForm>,
    weyl: Option<DoubleForm>,
    powers: Vec<DoubleForm>,
}

impl CurvatureContext {
    /// Validate `R` (symmetric, first Bianchi) and fill every cache.
    pub fn new(riemann: DoubleForm) -> Result<Self> {
        Self::with_tolerance(riemann, STRUCTURE_TOL)
    }

    /// As [`CurvatureContext::new`] with an explicit relative structure
    /// tolerance (used for finite-difference curvature).
    pub fn with_tolerance(riemann: DoubleForm, tol: f64) -> Result<Self> {
        riemann.expect_bidegree(2, 2)?;
        let n = riemann.n();
        let scale = riemann.max_abs().max(1.0);
        if !riemann.is_symmetric(tol) {
            return Err(Error::Precondition("curvature tensor is not symmetric".into()));
        }
        let bianchi = riemann.first_bianchi_residual()?;
        if bianchi > tol * scale {
            return Err(Error::Precondition(format!(
                "curvature tensor violates the first Bianchi identity (residual {bianchi:e})"
            )));
        }
        let ricci = riemann.contract(1)?;
        let scal = ricci.contract(1)?.scalar_value()?;
        let (schouten, weyl) = if n >= 3 {
            let g = DoubleForm::metric(n)?;
            let a = ricci.axpy(-scal / (2.0 * (n as f64 - 1.0)), &g)?.scale(1.0 / (n as f64 - 2.0));
            let w = riemann.try_sub(&g.product(&a)?)?;
            (Some(a), Some(w))
        } else {
            (None, None)
        };
        let mut powers = vec![DoubleForm::scalar(n, 1.0)?];
        for k in 1..=n / 2 {
            let next = powers[k - 1].product(&riemann)?;
            powers.push(next);
        }
        Ok(Self { n, riemann, ricci, scal, schouten, weyl, powers })
    }

    /// Constant sectional curvature `kappa`: `R = (kappa/2) g^2`.
    pub fn space_form(n: usize, kappa: f64) -> Result<Self> {
        Self::new(DoubleForm::metric_power(n, 2)?.scale(kappa / 2.0))
    }

    /// Conformally flat curvature `R = g A` built from a symmetric `A`.
    pub fn conformally_flat(a: &DoubleForm) -> Result<Self> {
        Self::new(DoubleForm::metric(a.n())?.product(a)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn riemann(&self) -> &DoubleForm {
        &self.riemann
    }

    pub fn ricci(&self) -> &DoubleForm {
        &self.ricci
    }

    pub fn scal(&self) -> f64 {
        self.scal
    }

    /// Schouten tensor `A = (Ric - Scal g / (2(n-1))) / (n-2)`; needs `n >= 3`.
    pub fn schouten(&self) -> Result<&DoubleForm> {
        self.schouten.as_ref().ok_or_else(|| Error::Precondition("Schouten tensor needs n >= 3".into()))
    }

    /// Weyl tensor `W = R - g A`; needs `n >= 3`.
    pub fn weyl(&self) -> Result<&DoubleForm> {
        self.weyl.as_ref().ok_or_else(|| Error::Precondition("Weyl tensor needs n >= 3".into()))
    }

    /// `R^k`, available for `2k <= n`.
    pub fn power(&self, k: usize) -> Result<&DoubleForm> {
        self.powers.get(k).ok_or_else(|| Error::Degree(format!("R^{k} is not defined in dimension {}", self.n)))
    }

    pub fn metric(&self) -> DoubleForm {
        DoubleForm::metric(self.n).expect("valid dimension")
    }
}

/// `R = sum_i eps_i h_i^2` with random symmetric `h_i` (standard normal
/// entries) and random signs `eps_i`. Deterministic per seed.
pub fn random_curvature(n: usize, m: usize, seed: u64) -> Result<CurvatureContext> {
    if n < 3 || m < 1 {
        return Err(Error::Precondition(format!("random_curvature needs n >= 3, m >= 1 (got {n}, {m})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = DoubleForm::zeros(n, 2, 2)?;
    for _ in 0..m {
        let h = random_symmetric(n, &mut rng)?;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        r = r.axpy(sign, &h.power(2)?)?;
    }
    CurvatureContext::new(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gauss_summand_is_metric_square() {
        let g = DoubleForm::metric(4).unwrap();
        let ctx = CurvatureContext::new(g.power(2).unwrap()).unwrap();
        assert_eq!(ctx.riemann(), &DoubleForm::metric_power(4, 2).unwrap());
        assert_eq!(ctx.scal(), 24.0);
    }

    #[test]
    fn generator_properties() {
        let ctx = random_curvature(5, 3, 7).unwrap();
        assert!(ctx.riemann().first_bianchi_residual().unwrap() < 1e-12);
        let again = random_curvature(5, 3, 7).unwrap();
        assert_eq!(ctx.riemann(), again.riemann());
        let ctx = random_curvature(4, 6, 1).unwrap();
        assert!(ctx.weyl().unwrap().norm2() > 1e-3);
        assert!(random_curvature(2, 1, 0).is_err());
    }

    #[test]
    fn split_invariants() {
        for seed in 0..5 {
            let ctx = random_curvature(6, 4, seed).unwrap();
            let g = ctx.metric();
            let a = ctx.schouten().unwrap();
            let w = ctx.weyl().unwrap();
            let rebuilt = w.try_add(&g.product(a).unwrap()).unwrap();
            assert!(rebuilt.max_diff(ctx.riemann()).unwrap() < 1e-10);
            assert!(w.contract(1).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_bianchi_input() {
        let mut r = DoubleForm::metric_power(4, 2).unwrap();
        r.set(0, 5, 1.0);
        r.set(5, 0, 1.0);
        assert!(matches!(CurvatureContext::new(r), Err(Error::Precondition(_))));
    }
}
