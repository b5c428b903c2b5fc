//! Curvature invariants built from an algebraic curvature tensor: Gauss-Bonnet
//! curvatures `h_2k`, Einstein-Lovelock tensors `T_2k`, `sigma_k` of the
//! Schouten tensor, generalized Newton transformations, and the identities
//! tying them together, each exposed as a checkable residual.

mod context;
mod invariants;
mod newton;
mod product;
mod quadratic;

pub use context::{random_curvature, CurvatureContext};
pub use invariants::{
    classic_newton, gauss_bonnet, gauss_bonnet_pair, lovelock, lovelock_pair, schouten, sigma_k, sigma_k_pair,
};
pub use newton::{
    avez_classic_residual, avez_type_residual, gnf_residual, newton_explicit, newton_formula_residual,
    newton_transform, newton_transform_checked, pq_einstein_h_residual, trace_relations_residual, Applicability,
};
pub use product::{product_curvature, s3r_times_sp_signs, SignReport};
pub use quadratic::{quadratic_invariants, sigma_weyl_split_residual, QuadraticInvariants};

use crate::dfalg::DoubleForm;
use crate::error::{Error, Result};

/// Relative agreement required between two algebraic routes to the same value.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Two computed sides of an identity and their discrepancy.
///
/// `scale` is `max(1, |lhs|, |rhs|)` (entrywise maxima for forms), so
/// [`Check::relative`] is absolute for small values and relative for large ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub scale: f64,
}

impl Check {
    pub fn scalar(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, residual: (lhs - rhs).abs(), scale: 1f64.max(lhs.abs()).max(rhs.abs()) }
    }

    /// Entrywise comparison; `lhs`/`rhs` carry the largest entry of each side.
    pub fn forms(a: &DoubleForm, b: &DoubleForm) -> Result<Self> {
        let (ma, mb) = (a.max_abs(), b.max_abs());
        Ok(Self { lhs: ma, rhs: mb, residual: a.max_diff(b)?, scale: 1f64.max(ma).max(mb) })
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.relative() <= tol
    }

    /// The larger of two checks (by relative residual).
    pub fn worst(self, other: Self) -> Self {
        if other.relative() > self.relative() {
            other
        } else {
            self
        }
    }

    fn ensure(self, what: &str) -> Result<Self> {
        if self.holds(CONSISTENCY_TOL) {
            Ok(self)
        } else {
            Err(Error::Inconsistent { what: what.to_string(), lhs: self.lhs, rhs: self.rhs })
        }
    }
}
