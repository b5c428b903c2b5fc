//! Double forms over an `n`-dimensional Euclidean space (orthonormal frame).
//!
//! A `(p,q)` double form is stored densely, indexed by lexicographic
//! `p`-subsets and `q`-subsets of the frame. The module provides the exterior
//! (Kulkarni-Nomizu) product, contractions, multiplication by powers of the
//! metric, the generalized Hodge star and the natural inner product.

mod form;
pub mod subsets;

pub use form::DoubleForm;
pub use subsets::{binomial, factf, factorial, Mask, SubsetIndexTable, MAX_DIM};

use crate::error::Result;

/// `g^r` as an `(r,r)` form.
pub fn metric_form(n: usize, r: usize) -> Result<DoubleForm> {
    DoubleForm::metric_power(n, r)
}

pub fn exterior_product(a: &DoubleForm, b: &DoubleForm) -> Result<DoubleForm> {
    a.product(b)
}

pub fn contract(w: &DoubleForm, r: usize) -> Result<DoubleForm> {
    w.contract(r)
}

pub fn hodge_star(w: &DoubleForm) -> DoubleForm {
    w.hodge_star()
}

pub fn inner_product(a: &DoubleForm, b: &DoubleForm) -> Result<f64> {
    a.inner(b)
}

pub fn power(w: &DoubleForm, k: usize) -> Result<DoubleForm> {
    w.power(k)
}

pub fn first_bianchi_residual(w: &DoubleForm) -> Result<f64> {
    w.first_bianchi_residual()
}

/// Random symmetric `(1,1)` form with standard normal entries.
pub fn random_symmetric(n: usize, rng: &mut impl rand::Rng) -> Result<DoubleForm> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(rand_distr::StandardNormal);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    DoubleForm::from_bilinear(n, &m)
}

/// Random `(p,q)` form with standard normal entries.
pub fn random_form(n: usize, p: usize, q: usize, rng: &mut impl rand::Rng) -> Result<DoubleForm> {
    let mut out = DoubleForm::zeros(n, p, q)?;
    for x in out.as_mut_slice() {
        *x = rng.sample(rand_distr::StandardNormal);
    }
    Ok(out)
}
