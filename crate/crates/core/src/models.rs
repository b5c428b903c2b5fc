//! Closed-form model manifolds: space forms in a conformally flat chart, flat
//! tori and Riemannian products, each with an exact pointwise curvature tensor
//! and a table of closed-form invariants.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chart::{curvature_at, ChartMetric, Domain, FlatMetric, MetricField};
use crate::curvinv::{gauss_bonnet, product_curvature, sigma_k, Check, CurvatureContext};
use crate::dfalg::{binomial, factf, DoubleForm, MAX_DIM};
use crate::error::{Error, Result};

/// Closed-form invariants of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Oracle {
    /// `h_2k` for `k = 0..=n/2`.
    pub gauss_bonnet: Vec<f64>,
    /// `sigma_k(A)` for `k = 0..=n`; absent when `n < 3`.
    pub sigma: Option<Vec<f64>>,
    pub scal: f64,
    /// Ascending.
    pub ricci_eigs: Vec<f64>,
    /// Eigenvalues of `T_2 = h_2 g - Ric`, ascending.
    pub t2_eigs: Vec<f64>,
}

impl Oracle {
    /// Fill in everything that follows from the Gauss-Bonnet list and the
    /// Ricci spectrum.
    fn from_parts(gauss_bonnet: Vec<f64>, mut ricci_eigs: Vec<f64>) -> Self {
        let n = ricci_eigs.len();
        ricci_eigs.sort_by(f64::total_cmp);
        let scal: f64 = ricci_eigs.iter().sum();
        let t2_eigs = ricci_eigs.iter().rev().map(|r| scal / 2.0 - r).collect();
        let sigma = (n >= 3).then(|| {
            let nf = n as f64;
            let a: Vec<f64> = ricci_eigs.iter().map(|r| (r - scal / (2.0 * (nf - 1.0))) / (nf - 2.0)).collect();
            elementary_symmetric(&a)
        });
        Self { gauss_bonnet, sigma, scal, ricci_eigs, t2_eigs }
    }
}

/// `e_0, ..., e_n` of the given values.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `g = 4 / (1 + kappa |x|^2)^2 delta`.
#[derive(Debug, Clone, Copy)]
pub struct SpaceFormMetric {
    pub n: usize,
    pub kappa: f64,
}

impl MetricField for SpaceFormMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let d = 1.0 + self.kappa * r2;
        if d <= 0.0 {
            return Err(Error::NotSpd(x.to_vec()));
        }
        Ok(DMatrix::identity(self.n, self.n) * (4.0 / (d * d)))
    }

    fn axes(&self) -> Option<BTreeSet<usize>> {
        Some((0..self.n).collect())
    }
}

/// A model manifold: chart, exact curvature and oracle table.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    name: String,
    chart: ChartMetric,
    curvature: Option<CurvatureContext>,
    oracle: Oracle,
}

impl ModelManifold {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &ChartMetric {
        &self.chart
    }

    pub fn with_chart(mut self, chart: ChartMetric) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(Error::DimensionMismatch(chart.dim(), self.dim()));
        }
        self.chart = chart;
        Ok(self)
    }

    /// Exact curvature in the orthonormal frame the chart produces. The
    /// models are homogeneous, so it does not depend on the point.
    pub fn curvature(&self) -> Result<&CurvatureContext> {
        self.curvature.as_ref().ok_or(Error::Dimension(self.dim()))
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// `count` points drawn uniformly from the central 80% of the chart box.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        self.chart.domain().sample_points(count, seed)
    }

    /// Worst entrywise gap between finite-difference and exact curvature.
    pub fn chart_agreement(&self, points: &[Vec<f64>]) -> Result<Check> {
        let exact = self.curvature()?.riemann();
        let mut worst = Check::scalar(0.0, 0.0);
        for x in points {
            let frame = curvature_at(&self.chart, x)?;
            worst = worst.worst(Check::forms(frame.curvature.riemann(), exact)?);
        }
        Ok(worst)
    }

    /// Worst gap between the oracle table and the algebraic invariants.
    pub fn oracle_agreement(&self) -> Result<Check> {
        let ctx = self.curvature()?;
        let n = ctx.n();
        let o = &self.oracle;
        let mut worst = Check::scalar(ctx.scal(), o.scal);
        for (k, &h) in o.gauss_bonnet.iter().enumerate() {
            worst = worst.worst(Check::scalar(gauss_bonnet(ctx, k)?, h));
        }
        if let Some(sigma) = &o.sigma {
            let a = ctx.schouten()?;
            for (k, &s) in sigma.iter().enumerate() {
                worst = worst.worst(Check::scalar(sigma_k(a, k)?, s));
            }
        }
        let ric = sorted_eigs(ctx.ricci())?;
        let t2 = sorted_eigs(&ctx.metric().scale(ctx.scal() / 2.0).try_sub(ctx.ricci())?)?;
        for i in 0..n {
            worst = worst.worst(Check::scalar(ric[i], o.ricci_eigs[i]));
            worst = worst.worst(Check::scalar(t2[i], o.t2_eigs[i]));
        }
        Ok(worst)
    }
}

fn sorted_eigs(h: &DoubleForm) -> Result<Vec<f64>> {
    let m = h.to_matrix()?;
    let mut e: Vec<f64> = SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Constant sectional curvature `kappa` in the chart
/// `4 / (1 + kappa |x|^2)^2 delta`. The box is `[-1/sqrt(kappa), 1/sqrt(kappa)]^n`
/// for `kappa > 0`, `[-1, 1]^n` when flat and `[-h, h]^n` with
/// `h = 0.5 / sqrt(n |kappa|)` when negative (so `1 + kappa |x|^2 >= 3/4`).
pub fn space_form(n: usize, kappa: f64) -> Result<ModelManifold> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::Dimension(n));
    }
    if !kappa.is_finite() {
        return Err(Error::Precondition(format!("curvature {kappa} is not finite")));
    }
    let half = if kappa > 0.0 {
        1.0 / kappa.sqrt()
    } else if kappa == 0.0 {
        1.0
    } else {
        0.5 / (n as f64 * -kappa).sqrt()
    };
    let chart = ChartMetric::new(Arc::new(SpaceFormMetric { n, kappa }), Domain::centered_box(n, half)?)?;
    let gauss_bonnet =
        (0..=n / 2).map(|k| kappa.powi(k as i32) * factf(n) / (2f64.powi(k as i32) * factf(n - 2 * k))).collect();
    let mut oracle = Oracle::from_parts(gauss_bonnet, vec![(n as f64 - 1.0) * kappa; n]);
    if n >= 3 {
        oracle.sigma = Some((0..=n).map(|k| binomial(n, k) as f64 * (kappa / 2.0).powi(k as i32)).collect());
    }
    Ok(ModelManifold {
        name: format!("space_form(n={n}, kappa={kappa})"),
        chart,
        curvature: Some(CurvatureContext::space_form(n, kappa)?),
        oracle,
    })
}

/// The round sphere of radius `r`.
pub fn sphere(n: usize, r: f64) -> Result<ModelManifold> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Precondition(format!("sphere radius {r} must be positive")));
    }
    let mut m = space_form(n, 1.0 / (r * r))?;
    m.name = format!("S^{n}({r})");
    Ok(m)
}

/// `[0, side]^n` with the Euclidean metric, periodic on every axis.
pub fn flat_torus(n: usize, side: f64) -> Result<ModelManifold> {
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::Dimension(n));
    }
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::Precondition(format!("torus side {side} must be positive")));
    }
    let chart = ChartMetric::new(Arc::new(FlatMetric(n)), Domain::torus(n, side)?)?;
    let curvature = if n >= 2 { Some(CurvatureContext::new(DoubleForm::zeros(n, 2, 2)?)?) } else { None };
    let mut gauss_bonnet = vec![0.0; n / 2 + 1];
    gauss_bonnet[0] = 1.0;
    Ok(ModelManifold {
        name: format!("T^{n}({side})"),
        chart,
        curvature,
        oracle: Oracle::from_parts(gauss_bonnet, vec![0.0; n]),
    })
}

/// Riemannian product on consecutive coordinate blocks. The oracle follows
/// `h_2k = sum_i C(k, i) h_2i(1) h_2(k-i)(2)` and the block Ricci spectrum.
pub fn product(a: &ModelManifold, b: &ModelManifold) -> Result<ModelManifold> {
    let (n1, n2) = (a.dim(), b.dim());
    let n = n1 + n2;
    if n > MAX_DIM {
        return Err(Error::Dimension(n));
    }
    let gb = |m: &ModelManifold, k: usize| m.oracle.gauss_bonnet.get(k).copied().unwrap_or(0.0);
    let gauss_bonnet =
        (0..=n / 2).map(|k| (0..=k).map(|i| binomial(k, i) as f64 * gb(a, i) * gb(b, k - i)).sum()).collect();
    let ricci = [a.oracle.ricci_eigs.as_slice(), &b.oracle.ricci_eigs].concat();
    let curvature = match (&a.curvature, &b.curvature) {
        (Some(x), Some(y)) => Some(product_curvature(x, y)?),
        _ => {
            let embed = |m: &ModelManifold, offset| -> Result<DoubleForm> {
                match &m.curvature {
                    Some(c) => c.riemann().embed(n, offset),
                    None => DoubleForm::zeros(n, 2, 2),
                }
            };
            Some(CurvatureContext::new(embed(a, 0)?.try_add(&embed(b, n1)?)?)?)
        }
    };
    Ok(ModelManifold {
        name: format!("{} x {}", a.name, b.name),
        chart: a.chart.product(&b.chart),
        curvature,
        oracle: Oracle::from_parts(gauss_bonnet, ricci),
    })
}

/// Model description as accepted in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    SpaceForm { n: usize, kappa: f64 },
    Sphere { n: usize, radius: f64 },
    FlatTorus { n: usize, side: f64 },
    Product { factors: Vec<ModelSpec> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ModelManifold> {
        match self {
            Self::SpaceForm { n, kappa } => space_form(*n, *kappa),
            Self::Sphere { n, radius } => sphere(*n, *radius),
            Self::FlatTorus { n, side } => flat_torus(*n, *side),
            Self::Product { factors } => {
                let mut it = factors.iter();
                let first = it.next().ok_or_else(|| Error::Precondition("product needs at least one factor".into()))?;
                it.try_fold(first.build()?, |acc, f| product(&acc, &f.build()?))
            }
        }
    }
}
