use nalgebra::{Cholesky, DMatrix, DVector};

use super::fd::jet;
use super::{ChartMetric, ScalarField};
use crate::curvinv::{lovelock, sigma_k, CurvatureContext};
use crate::dfalg::{DoubleForm, Mask};
use crate::error::{Error, Result};

/// Relative first-Bianchi tolerance for finite-difference curvature.
const FD_STRUCTURE_TOL: f64 = 1e-8;

/// Geometry at one point of a chart: metric, orthonormal frame, Christoffel
/// symbols and the curvature tensor in that frame.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub point: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Lower Cholesky factor `L` with `g = L L^T`.
    pub lower: DMatrix<f64>,
    /// Frame vectors as columns, `E = L^-T`, so `E^T g E = I`.
    pub frame: DMatrix<f64>,
    /// `christoffel[m*n*n + k*n + l] = Gamma^m_kl`.
    pub christoffel: Vec<f64>,
    pub curvature: CurvatureContext,
    pub bianchi_residual: f64,
    /// `sqrt(det g)`.
    pub volume_density: f64,
}

impl PointFrame {
    pub fn n(&self) -> usize {
        self.metric.nrows()
    }

    pub fn gamma(&self, m: usize, k: usize, l: usize) -> f64 {
        let n = self.n();
        self.christoffel[(m * n + k) * n + l]
    }

    /// Frame components of a coordinate vector.
    pub fn frame_vector(&self, v: &[f64]) -> Vec<f64> {
        (self.lower.transpose() * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// Frame components of a coordinate covector.
    pub fn frame_covector(&self, w: &[f64]) -> Vec<f64> {
        (self.frame.transpose() * DVector::from_column_slice(w)).as_slice().to_vec()
    }

    /// A coordinate bilinear form `B` as the frame form `E^T B E`.
    pub fn frame_bilinear(&self, b: &DMatrix<f64>) -> Result<DoubleForm> {
        DoubleForm::from_matrix(&(self.frame.transpose() * b * &self.frame))?.symmetrized()
    }

    /// `Ric(u, w)` for coordinate vectors.
    pub fn ricci_on(&self, u: &[f64], w: &[f64]) -> Result<f64> {
        self.curvature.ricci().bilinear(&self.frame_vector(u), &self.frame_vector(w))
    }

    /// Coordinate gradient vector `g^-1 w` of a covector.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        (&self.inverse * DVector::from_column_slice(w)).as_slice().to_vec()
    }
}

fn contract_first_index(t: &[f64], e: &DMatrix<f64>, n: usize) -> Vec<f64> {
    // out[a, k, l, m] = sum_i E[i, a] t[i, k, l, m], then rotate indices so the
    // new index is last; four applications give the full frame transform.
    let n3 = n * n * n;
    let mut out = vec![0.0; n3 * n];
    for a in 0..n {
        for i in 0..n {
            let w = e[(i, a)];
            if w == 0.0 {
                continue;
            }
            for r in 0..n3 {
                out[r * n + a] += w * t[i * n3 + r];
            }
        }
    }
    out
}

/// Curvature and frame data at `x` by finite differences of the chart metric.
pub fn curvature_at(chart: &ChartMetric, x: &[f64]) -> Result<PointFrame> {
    let n = chart.dim();
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    chart.domain().check_point(x)?;
    let field = chart.field();
    let j = jet(|y| Ok(field.eval(y)?.transpose().as_slice().to_vec()), x, &chart.steps(), chart.fd().order)?;
    let mut g = DMatrix::from_row_slice(n, n, &j.value);
    g = (&g + g.transpose()) * 0.5;
    let chol = Cholesky::new(g.clone()).ok_or_else(|| Error::NotSpd(x.to_vec()))?;
    let lower = chol.l();
    let inverse = chol.inverse();
    let linv =
        lower.clone().solve_lower_triangular(&DMatrix::identity(n, n)).ok_or_else(|| Error::NotSpd(x.to_vec()))?;
    let frame = linv.transpose();
    let volume_density = lower.diagonal().iter().product::<f64>();

    let dg = |k: usize, i: usize, l: usize| j.first[k][i * n + l];
    let ddg = |k: usize, l: usize, i: usize, m: usize| j.d2(k, l)[i * n + m];

    // Christoffel symbols of the first kind, Gamma_{m,kl}, then raised.
    let mut first_kind = vec![0.0; n * n * n];
    for m in 0..n {
        for k in 0..n {
            for l in 0..n {
                first_kind[(m * n + k) * n + l] = 0.5 * (dg(k, m, l) + dg(l, m, k) - dg(m, k, l));
            }
        }
    }
    let mut christoffel = vec![0.0; n * n * n];
    for m in 0..n {
        for k in 0..n {
            for l in 0..n {
                christoffel[(m * n + k) * n + l] =
                    (0..n).map(|i| inverse[(m, i)] * first_kind[(i * n + k) * n + l]).sum();
            }
        }
    }
    let gam1 = |p: usize, k: usize, l: usize| first_kind[(p * n + k) * n + l];
    let gam2 = |p: usize, k: usize, l: usize| christoffel[(p * n + k) * n + l];

    // R_iklm = 1/2 (d_k d_l g_im + d_i d_m g_kl - d_k d_m g_il - d_i d_l g_km)
    //        + Gamma_{p,kl} Gamma^p_im - Gamma_{p,km} Gamma^p_il
    let mut r = vec![0.0; n * n * n * n];
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let second = 0.5 * (ddg(k, l, i, m) + ddg(i, m, k, l) - ddg(k, m, i, l) - ddg(i, l, k, m));
                    let quad: f64 = (0..n).map(|p| gam1(p, k, l) * gam2(p, i, m) - gam1(p, k, m) * gam2(p, i, l)).sum();
                    r[((i * n + k) * n + l) * n + m] = second + quad;
                }
            }
        }
    }
    let mut rf = r;
    for _ in 0..4 {
        rf = contract_first_index(&rf, &frame, n);
    }
    let at = |a: usize, b: usize, c: usize, d: usize| rf[((a * n + b) * n + c) * n + d];
    let pair = |m: Mask| {
        let a = m.trailing_zeros() as usize;
        let b = (m & (m - 1)).trailing_zeros() as usize;
        (a, b)
    };
    let form = DoubleForm::from_fn(n, 2, 2, |s, t| {
        let ((a, b), (c, d)) = (pair(s), pair(t));
        at(a, b, c, d)
    })?
    .symmetrized()?;
    let bianchi_residual = form.first_bianchi_residual()?;
    let curvature = CurvatureContext::with_tolerance(form, FD_STRUCTURE_TOL)?;
    Ok(PointFrame {
        point: x.to_vec(),
        metric: g,
        inverse,
        lower,
        frame,
        christoffel,
        curvature,
        bianchi_residual,
        volume_density,
    })
}

/// Value and derivatives of a scalar field at a frame point.
#[derive(Debug, Clone)]
pub struct FieldJet {
    pub value: f64,
    /// Coordinate partials `d_i f`.
    pub partials: Vec<f64>,
    /// Frame components of `df` (equivalently of the gradient).
    pub df: Vec<f64>,
    /// Covariant Hessian in the orthonormal frame.
    pub hess: DoubleForm,
}

impl FieldJet {
    /// `|df|^2`.
    pub fn grad_norm2(&self) -> f64 {
        self.df.iter().map(|v| v * v).sum()
    }

    /// `Delta f = -tr Hess f`.
    pub fn laplacian(&self) -> f64 {
        -self.hess.trace().expect("(1,1) form")
    }

    /// `Hess f(grad f, grad f)`.
    pub fn hess_on_grad(&self) -> f64 {
        self.hess.bilinear(&self.df, &self.df).expect("(1,1) form")
    }

    /// `b(grad f, grad f)` for a frame bilinear form `b`.
    pub fn on_grad(&self, b: &DoubleForm) -> Result<f64> {
        b.bilinear(&self.df, &self.df)
    }
}

/// Derivatives of `field` at the point of `frame`, with the chart's fd setup.
pub fn field_jet(chart: &ChartMetric, frame: &PointFrame, field: &ScalarField) -> Result<FieldJet> {
    let n = frame.n();
    let x = &frame.point;
    let j = jet(|y| Ok(vec![field.eval(y)?]), x, &chart.steps(), chart.fd().order)?;
    let partials: Vec<f64> = j.first.iter().map(|d| d[0]).collect();
    let hess_coord =
        DMatrix::from_fn(n, n, |i, k| j.d2(i, k)[0] - (0..n).map(|m| frame.gamma(m, i, k) * partials[m]).sum::<f64>());
    Ok(FieldJet {
        value: j.value[0],
        df: frame.frame_covector(&partials),
        hess: frame.frame_bilinear(&hess_coord)?,
        partials,
    })
}

/// `Hess f = d^2 f - Gamma df` at `x`, in the orthonormal frame.
pub fn covariant_hessian(chart: &ChartMetric, field: &ScalarField, x: &[f64]) -> Result<DoubleForm> {
    let frame = curvature_at(chart, x)?;
    Ok(field_jet(chart, &frame, field)?.hess)
}

/// `l_2k(f) = -<T_2k, Hess f>`, `0 <= 2k < n`; `k = 0` gives `Delta f = -tr Hess f`.
pub fn ell_2k(chart: &ChartMetric, field: &ScalarField, x: &[f64], k: usize) -> Result<f64> {
    let n = chart.dim();
    if 2 * k >= n {
        return Err(Error::Degree(format!("l_{} needs 2k < n = {n}", 2 * k)));
    }
    let frame = curvature_at(chart, x)?;
    let hess = field_jet(chart, &frame, field)?.hess;
    Ok(-lovelock(&frame.curvature, k)?.inner(&hess)?)
}

/// `sigma_k(Hess f)` at `x`.
pub fn hessian_sigma_k(chart: &ChartMetric, field: &ScalarField, x: &[f64], k: usize) -> Result<f64> {
    sigma_k(&covariant_hessian(chart, field, x)?, k)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{Domain, FdConfig, FdOrder, FlatMetric, MetricField};
    use super::*;
    use crate::dfalg::binomial;

    fn flat(n: usize) -> ChartMetric {
        ChartMetric::new(Arc::new(FlatMetric(n)), Domain::torus(n, 2.0 * std::f64::consts::PI).unwrap()).unwrap()
    }

    fn sphere(n: usize) -> ChartMetric {
        let weight = ScalarField::new("sphere", None, |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Ok(4.0 / (1.0 + r2).powi(2))
        });
        let field: Arc<dyn MetricField> =
            Arc::new(super::super::ConformalMetric { base: Arc::new(FlatMetric(n)), weight });
        ChartMetric::new(field, Domain::centered_box(n, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn flat_chart_has_zero_curvature() {
        let f = curvature_at(&flat(4), &[0.3, 1.0, 2.0, 5.0]).unwrap();
        assert!(f.curvature.riemann().max_abs() < 1e-12);
        assert!((f.volume_density - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_chart_curvature() {
        let chart = sphere(4);
        let f = curvature_at(&chart, &[0.0; 4]).unwrap();
        let expect = DoubleForm::metric_power(4, 2).unwrap().scale(0.5);
        assert!(f.curvature.riemann().max_diff(&expect).unwrap() < 1e-6);
        let g = &f.metric;
        let e = &f.frame;
        assert!((e.transpose() * g * e - DMatrix::identity(4, 4)).amax() < 1e-12);
        // Away from the origin too.
        let f = curvature_at(&chart, &[0.2, -0.1, 0.3, 0.05]).unwrap();
        assert!(f.curvature.riemann().max_diff(&expect).unwrap() < 1e-6);
        assert!(f.bianchi_residual < 1e-10);
    }

    #[test]
    fn hessians_on_flat_chart() {
        let chart = flat(3);
        let x = [0.4, 1.1, 2.0];
        let quad = ScalarField::parse("(x1^2 + x2^2 + x3^2)/2").unwrap();
        let h = covariant_hessian(&chart, &quad, &x).unwrap();
        assert!(h.max_diff(&DoubleForm::metric(3).unwrap()).unwrap() < 1e-9);
        let lin = ScalarField::parse("2*x1 - x3 + 4").unwrap();
        assert!(covariant_hessian(&chart, &lin, &x).unwrap().max_abs() < 1e-9);
        assert!((ell_2k(&chart, &quad, &x, 0).unwrap() + 3.0).abs() < 1e-9);
        for k in 0..=3 {
            let s = hessian_sigma_k(&chart, &quad, &x, k).unwrap();
            assert!((s - binomial(3, k) as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_coordinate_function_hessian() {
        // The first ambient coordinate of S^n in this chart is 2 x1 / (1 + |x|^2).
        let chart = sphere(3);
        let f = ScalarField::parse("2*x1/(1 + x1^2 + x2^2 + x3^2)").unwrap();
        let x = [0.3, -0.2, 0.1];
        let h = covariant_hessian(&chart, &f, &x).unwrap();
        let expect = DoubleForm::metric(3).unwrap().scale(-f.eval(&x).unwrap());
        assert!(h.max_diff(&expect).unwrap() < 1e-7);
    }

    #[test]
    fn convergence_under_step_halving() {
        let err = |h: f64| {
            let chart = sphere(4).with_fd(FdConfig { order: FdOrder::Fourth, step: Some(h) });
            let f = curvature_at(&chart, &[0.1, 0.2, -0.1, 0.0]).unwrap();
            let expect = DoubleForm::metric_power(4, 2).unwrap().scale(0.5);
            f.curvature.riemann().max_diff(&expect).unwrap()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn non_spd_metric_is_rejected() {
        let field = Arc::new(
            super::super::ExprMetric::parse(&[vec!["1".to_string(), "2".into()], vec!["2".into(), "1".into()]])
                .unwrap(),
        );
        let chart = ChartMetric::new(field, Domain::centered_box(2, 1.0).unwrap()).unwrap();
        assert!(matches!(curvature_at(&chart, &[0.0, 0.0]), Err(Error::NotSpd(_))));
        assert!(curvature_at(&chart, &[3.0, 0.0]).is_err());
    }
}
