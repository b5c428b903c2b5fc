//! Numerical Riemannian geometry on coordinate charts: curvature by finite
//! differences, covariant Hessians, the conformal operators of the
//! `h_4`-Yamabe problem and quadrature on flat tori.

mod conformal;
pub mod fd;
mod field;
mod frame;
mod integral;

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use conformal::{
    bidegree_covariance_check, cocycle_check, conformal_h4_check, conformal_operator, conformal_operator_at,
    conformal_power_ops, power_operator_at, ConformalH4Report, PowerOps,
};
pub use fd::FdOrder;
pub use field::{BlockMetric, ConformalMetric, ExprMetric, FlatMetric, MetricField, ScalarField};
pub use frame::{covariant_hessian, curvature_at, ell_2k, field_jet, hessian_sigma_k, FieldJet, PointFrame};
pub use integral::{integral_identities, integrate, integrate_many, IntegralRow};

/// Axis-aligned coordinate box with per-axis periodicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != periodic.len() {
            return Err(Error::Precondition("domain bounds and periodicity flags differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Precondition("domain needs lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi, periodic })
    }

    /// `[0, side]^n`, periodic on every axis.
    pub fn torus(n: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![side; n], vec![true; n])
    }

    /// `[-half, half]^n`, not periodic.
    pub fn centered_box(n: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n], vec![false; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Points must lie in the box along non-periodic axes.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(x.len(), self.dim()));
        }
        for i in 0..x.len() {
            if !self.periodic[i] && !(self.lo[i] <= x[i] && x[i] <= self.hi[i]) {
                return Err(Error::Precondition(format!("point {x:?} outside the chart on axis {}", i + 1)));
            }
        }
        Ok(())
    }

    /// `count` points drawn uniformly from the central 80% of the box.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                (0..self.dim())
                    .map(|i| {
                        let c = 0.5 * (self.lo[i] + self.hi[i]);
                        c + 0.4 * self.side(i) * rng.random_range(-1.0..=1.0)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let cat = |a: &[f64], b: &[f64]| [a, b].concat();
        Self {
            lo: cat(&self.lo, &other.lo),
            hi: cat(&self.hi, &other.hi),
            periodic: [self.periodic.as_slice(), &other.periodic].concat(),
        }
    }
}

/// Finite-difference configuration: order and an optional uniform step.
/// Without an override the step on each axis is `eps^(1/6)` times its side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FdConfig {
    pub order: FdOrder,
    pub step: Option<f64>,
}

/// A metric field on a coordinate box.
#[derive(Clone)]
pub struct ChartMetric {
    field: Arc<dyn MetricField>,
    domain: Domain,
    fd: FdConfig,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric")
            .field("n", &self.dim())
            .field("domain", &self.domain)
            .field("fd", &self.fd)
            .finish()
    }
}

impl ChartMetric {
    /// Checks dimensions and, on periodic axes, that `g` matches across the
    /// box faces at the center line.
    pub fn new(field: Arc<dyn MetricField>, domain: Domain) -> Result<Self> {
        if field.dim() != domain.dim() {
            return Err(Error::DimensionMismatch(field.dim(), domain.dim()));
        }
        let chart = Self { field, domain, fd: FdConfig::default() };
        let c = chart.domain.center();
        for axis in (0..c.len()).filter(|&i| chart.domain.periodic[i]) {
            let (mut a, mut b) = (c.clone(), c.clone());
            a[axis] = chart.domain.lo[axis];
            b[axis] = chart.domain.hi[axis];
            let (ga, gb) = (chart.field.eval(&a)?, chart.field.eval(&b)?);
            let scale = ga.amax().max(1.0);
            if (ga - gb).amax() > 1e-12 * scale {
                return Err(Error::Precondition(format!("metric is not periodic along axis {}", axis + 1)));
            }
        }
        Ok(chart)
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn fd(&self) -> FdConfig {
        self.fd
    }

    pub fn field(&self) -> &Arc<dyn MetricField> {
        &self.field
    }

    pub fn steps(&self) -> Vec<f64> {
        match self.fd.step {
            Some(h) => vec![h; self.dim()],
            None => {
                let base = f64::EPSILON.powf(1.0 / 6.0);
                (0..self.dim()).map(|i| base * self.domain.side(i)).collect()
            }
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.field.eval(x)
    }

    /// The chart metric `weight * g` on the same box, evaluated afresh.
    pub fn conformal(&self, weight: ScalarField) -> Self {
        let field = Arc::new(ConformalMetric { base: self.field.clone(), weight });
        Self { field, domain: self.domain.clone(), fd: self.fd }
    }

    /// Riemannian product with `other` on the trailing coordinates.
    pub fn product(&self, other: &Self) -> Self {
        let field = Arc::new(BlockMetric { first: self.field.clone(), second: other.field.clone() });
        Self { field, domain: self.domain.concat(&other.domain), fd: self.fd }
    }

    /// Coordinates that the metric or any of `fields` may depend on.
    pub fn active_axes(&self, fields: &[&ScalarField]) -> Vec<usize> {
        let all = || (0..self.dim()).collect();
        let mut acc: BTreeSet<usize> = match self.field.axes() {
            Some(a) => a,
            None => return all(),
        };
        for f in fields {
            match f.axes() {
                Some(a) => acc.extend(a),
                None => return all(),
            }
        }
        acc.into_iter().collect()
    }
}
