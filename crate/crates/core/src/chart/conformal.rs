use super::frame::{curvature_at, field_jet, FieldJet, PointFrame};
use super::{ChartMetric, ScalarField};
use crate::curvinv::{gauss_bonnet, lovelock, sigma_k, Check};
use crate::dfalg::DoubleForm;
use crate::error::{Error, Result};

fn need_dim(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::Precondition(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

/// `L_g(f)`, the operator with `e^(4f) h_4(e^(2f) g) = h_4(g) + L_g(f)`,
/// from the curvature at a point and the jet of `f` there (`n >= 4`).
pub fn conformal_operator_at(frame: &PointFrame, f: &FieldJet) -> Result<f64> {
    let ctx = &frame.curvature;
    let n = ctx.n();
    need_dim(n, 4, "the conformal h_4 operator")?;
    let nf = n as f64;
    let t2 = lovelock(ctx, 1)?;
    let h2 = gauss_bonnet(ctx, 1)?;
    let df2 = f.grad_norm2();
    let ell2 = -t2.inner(&f.hess)?;
    let a = (nf - 2.0) * (nf - 3.0);
    Ok(2.0 * a * sigma_k(&f.hess, 2)? + 2.0 * (nf - 3.0) * ell2 - a * (nf - 3.0) * f.laplacian() * df2
        + 2.0 * a * f.hess_on_grad()
        + 2.0 * (nf - 3.0) * f.on_grad(&t2)?
        - a * h2 * df2
        + (nf - 1.0) * a * (nf - 4.0) / 4.0 * df2 * df2)
}

/// `L_g(f)` at `x`.
pub fn conformal_operator(chart: &ChartMetric, f: &ScalarField, x: &[f64]) -> Result<f64> {
    let frame = curvature_at(chart, x)?;
    conformal_operator_at(&frame, &field_jet(chart, &frame, f)?)
}

fn exp2(f: &ScalarField) -> ScalarField {
    f.map("exp2", |v| (2.0 * v).exp())
}

/// Both sides of `e^(4f) h_4(gbar) = h_4(g) + L_g(f)` with `gbar = e^(2f) g`,
/// plus the pointwise transformation laws for `W`, `R` and the volume density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalH4Report {
    pub lhs: f64,
    pub rhs: f64,
    pub check: Check,
    /// `Wbar = e^(2f) W`, compared in the respective orthonormal frames.
    pub weyl: Check,
    /// `Rbar = e^(2f) (R - g H)`, `H = Hess f - df.df + |df|^2 g / 2`.
    pub riemann: Check,
    /// `mu_gbar = e^(nf) mu_g`.
    pub volume: Check,
}

/// `H = Hess f - df o df + |df|^2 g / 2` in the frame of `g`.
pub fn conformal_h_tensor(f: &FieldJet) -> Result<DoubleForm> {
    let n = f.df.len();
    let dfdf =
        DoubleForm::from_fn(n, 1, 1, |a, b| f.df[a.trailing_zeros() as usize] * f.df[b.trailing_zeros() as usize])?;
    f.hess.try_sub(&dfdf)?.axpy(0.5 * f.grad_norm2(), &DoubleForm::metric(n)?)
}

pub fn conformal_h4_check(chart: &ChartMetric, f: &ScalarField, x: &[f64]) -> Result<ConformalH4Report> {
    let n = chart.dim();
    need_dim(n, 4, "the conformal h_4 law")?;
    let frame = curvature_at(chart, x)?;
    let fj = field_jet(chart, &frame, f)?;
    let bar = curvature_at(&chart.conformal(exp2(f)), x)?;
    let lhs = (4.0 * fj.value).exp() * gauss_bonnet(&bar.curvature, 2)?;
    let rhs = gauss_bonnet(&frame.curvature, 2)? + conformal_operator_at(&frame, &fj)?;

    // Frame components pick up e^(-4f) relative to coordinate components.
    let shrink = (-2.0 * fj.value).exp();
    let weyl = Check::forms(bar.curvature.weyl()?, &frame.curvature.weyl()?.scale(shrink))?;
    let h = conformal_h_tensor(&fj)?;
    let predicted = frame.curvature.riemann().try_sub(&DoubleForm::metric(n)?.product(&h)?)?.scale(shrink);
    let riemann = Check::forms(bar.curvature.riemann(), &predicted)?;
    let volume = Check::scalar(bar.volume_density, (n as f64 * fj.value).exp() * frame.volume_density);
    Ok(ConformalH4Report { lhs, rhs, check: Check::scalar(lhs, rhs), weyl, riemann, volume })
}

/// `L_g(f + phi) - L_g(f)` against `e^(4f) L_{e^(2f) g}(phi)` at `x`.
pub fn cocycle_check(chart: &ChartMetric, f: &ScalarField, phi: &ScalarField, x: &[f64]) -> Result<Check> {
    need_dim(chart.dim(), 4, "the cocycle identity")?;
    let frame = curvature_at(chart, x)?;
    let fj = field_jet(chart, &frame, f)?;
    let sum = field_jet(chart, &frame, &f.add(phi))?;
    let lhs = conformal_operator_at(&frame, &sum)? - conformal_operator_at(&frame, &fj)?;
    let bar_chart = chart.conformal(exp2(f));
    let bar = curvature_at(&bar_chart, x)?;
    let inner = conformal_operator_at(&bar, &field_jet(&bar_chart, &bar, phi)?)?;
    Ok(Check::scalar(lhs, (4.0 * fj.value).exp() * inner))
}

/// The operator `L_g(v)` of the `n > 4` law
/// `v^(16/(n-4)) h_4(gbar) = h_4 + 8(n-3) L_g(v) / ((n-4) v)`, `gbar = v^(8/(n-4)) g`.
pub fn power_operator_at(frame: &PointFrame, v: &FieldJet) -> Result<f64> {
    let ctx = &frame.curvature;
    let n = ctx.n();
    need_dim(n, 5, "the operator L_g")?;
    if v.value <= 0.0 {
        return Err(Error::NonPositive { point: frame.point.clone(), value: v.value });
    }
    let (nf, val) = (n as f64, v.value);
    let m = nf - 4.0;
    let t2 = lovelock(ctx, 1)?;
    let h2 = gauss_bonnet(ctx, 1)?;
    let dv2 = v.grad_norm2();
    let trace = -v.laplacian();
    // c^2 (Hess v)^2 = 4 sigma_2(Hess v)
    let c2_hess2 = 4.0 * sigma_k(&v.hess, 2)?;
    Ok(-t2.inner(&v.hess)? + nf / (m * val) * v.on_grad(&t2)? - 2.0 * (nf - 2.0) * dv2 / (m * val) * h2
        + (nf - 2.0) / (m * val) * c2_hess2
        + 4.0 * (nf - 2.0).powi(2) * dv2 / (m * m * val * val) * trace
        + 4.0 * nf * (nf - 2.0) / (m * m * val * val) * v.hess_on_grad())
}

/// `K_g(v) = L_g(v) + (n-4) h_4 v / (8(n-3))`.
fn k_operator_at(frame: &PointFrame, v: &FieldJet) -> Result<f64> {
    let nf = frame.n() as f64;
    let l = power_operator_at(frame, v)?;
    Ok(l + (nf - 4.0) / (8.0 * (nf - 3.0)) * gauss_bonnet(&frame.curvature, 2)? * v.value)
}

/// `L_g(v)`, `K_g(v)` and the residual of
/// `v^((n+12)/(n-4)) h_4(gbar) = h_4 v + 8(n-3) L_g(v) / (n-4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOps {
    pub l: f64,
    pub k: f64,
    pub check: Check,
}

fn power_weight(v: &ScalarField, n: usize) -> ScalarField {
    v.powf(8.0 / (n as f64 - 4.0))
}

fn positive(field: &ScalarField, x: &[f64]) -> Result<f64> {
    let value = field.eval(x)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { point: x.to_vec(), value })
    }
}

pub fn conformal_power_ops(chart: &ChartMetric, v: &ScalarField, x: &[f64]) -> Result<PowerOps> {
    let n = chart.dim();
    need_dim(n, 5, "the n > 4 conformal law")?;
    positive(v, x)?;
    let frame = curvature_at(chart, x)?;
    let vj = field_jet(chart, &frame, v)?;
    let l = power_operator_at(&frame, &vj)?;
    let k = k_operator_at(&frame, &vj)?;
    let bar = curvature_at(&chart.conformal(power_weight(v, n)), x)?;
    let nf = n as f64;
    let lhs = vj.value.powf((nf + 12.0) / (nf - 4.0)) * gauss_bonnet(&bar.curvature, 2)?;
    let rhs = gauss_bonnet(&frame.curvature, 2)? * vj.value + 8.0 * (nf - 3.0) / (nf - 4.0) * l;
    Ok(PowerOps { l, k, check: Check::scalar(lhs, rhs) })
}

/// `K_{a^2 g}(phi)` against `a^(-(n+12)/4) K_g(a^((n-4)/4) phi)` at `x`.
pub fn bidegree_covariance_check(chart: &ChartMetric, a: &ScalarField, phi: &ScalarField, x: &[f64]) -> Result<Check> {
    let n = chart.dim();
    need_dim(n, 5, "bi-degree covariance")?;
    let av = positive(a, x)?;
    positive(phi, x)?;
    let nf = n as f64;
    let left_chart = chart.conformal(a.powf(2.0));
    let left_frame = curvature_at(&left_chart, x)?;
    let lhs = k_operator_at(&left_frame, &field_jet(&left_chart, &left_frame, phi)?)?;
    let frame = curvature_at(chart, x)?;
    let scaled = a.powf((nf - 4.0) / 4.0).mul(phi);
    let rhs = av.powf(-(nf + 12.0) / 4.0) * k_operator_at(&frame, &field_jet(chart, &frame, &scaled)?)?;
    Ok(Check::scalar(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{ConformalMetric, Domain, FlatMetric, MetricField};
    use super::*;
    use crate::curvinv::CurvatureContext;
    use std::f64::consts::PI;

    fn torus(n: usize) -> ChartMetric {
        ChartMetric::new(Arc::new(FlatMetric(n)), Domain::torus(n, 2.0 * PI).unwrap()).unwrap()
    }

    fn sphere(n: usize) -> ChartMetric {
        let weight = ScalarField::new("sphere", None, |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Ok(4.0 / (1.0 + r2).powi(2))
        });
        let field: Arc<dyn MetricField> = Arc::new(ConformalMetric { base: Arc::new(FlatMetric(n)), weight });
        ChartMetric::new(field, Domain::centered_box(n, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn algebraic_lemma_matches_operator() {
        // e^(4f) hbar_4 = h_4 - 2(n-3)<T_2, H> + 2(n-2)(n-3) sigma_2(H), checked
        // against the expanded operator on the same jet.
        let chart = sphere(5);
        let f = ScalarField::parse("0.3*x1*x2 - 0.2*x3^2 + 0.1*x5").unwrap();
        let x = [0.1, 0.2, -0.3, 0.0, 0.15];
        let frame = curvature_at(&chart, &x).unwrap();
        let fj = field_jet(&chart, &frame, &f).unwrap();
        let h = conformal_h_tensor(&fj).unwrap();
        let ctx = &frame.curvature;
        let lemma = -4.0 * lovelock(ctx, 1).unwrap().inner(&h).unwrap() + 12.0 * sigma_k(&h, 2).unwrap();
        let op = conformal_operator_at(&frame, &fj).unwrap();
        assert!((lemma - op).abs() < 1e-10 * op.abs().max(1.0));
    }

    #[test]
    fn constant_factor() {
        let chart = torus(4);
        let c = ScalarField::constant(0.7);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(conformal_operator(&chart, &c, &x).unwrap(), 0.0);
        let s = sphere(4);
        let r = conformal_h4_check(&s, &c, &[0.1, 0.0, 0.2, 0.0]).unwrap();
        assert!(r.check.holds(1e-9));
        let bar = curvature_at(&s.conformal(exp2(&c)), &[0.1, 0.0, 0.2, 0.0]).unwrap();
        let h4 = gauss_bonnet(&bar.curvature, 2).unwrap();
        assert!((h4 - (-2.8f64).exp() * 6.0).abs() < 1e-6);
    }

    #[test]
    fn torus_h4_law() {
        let chart = torus(4);
        let f = ScalarField::parse("0.1*sin(x1)*cos(x2)").unwrap();
        for x in [[0.3, 0.7, 1.0, 2.0], [2.0, 5.0, 0.1, 0.0], [4.4, 1.2, 3.3, 6.0]] {
            let r = conformal_h4_check(&chart, &f, &x).unwrap();
            assert!(r.check.residual < 1e-4, "{r:?}");
            assert!(r.weyl.residual < 1e-6 && r.riemann.residual < 1e-6);
            assert!(r.volume.relative() < 1e-10);
        }
    }

    #[test]
    fn sphere_h4_law_n5() {
        let chart = sphere(5);
        let f = ScalarField::parse("0.2*x1^2 - 0.1*x2*x3 + 0.05*x4").unwrap();
        let r = conformal_h4_check(&chart, &f, &[0.1, -0.2, 0.3, 0.1, 0.0]).unwrap();
        assert!(r.check.residual < 1e-4, "{r:?}");
        assert!(r.riemann.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn cocycle() {
        let chart = torus(4);
        let f = ScalarField::parse("0.2*sin(x1)*cos(x2)").unwrap();
        let phi = ScalarField::parse("0.1*cos(x3 + x1)").unwrap();
        let x = [0.5, 1.5, 2.5, 3.5];
        assert!(cocycle_check(&chart, &f, &phi, &x).unwrap().residual < 1e-3);
        assert_eq!(cocycle_check(&chart, &f, &ScalarField::constant(0.0), &x).unwrap().residual, 0.0);
        let zero = ScalarField::constant(0.0);
        assert_eq!(cocycle_check(&chart, &zero, &phi, &x).unwrap().residual, 0.0);
    }

    #[test]
    fn power_ops() {
        let chart = torus(5);
        let one = ScalarField::constant(1.0);
        let x = [0.1, 0.2, 0.3, 0.4, 0.5];
        let ops = conformal_power_ops(&chart, &one, &x).unwrap();
        assert_eq!((ops.l, ops.k), (0.0, 0.0));
        let v = ScalarField::parse("1 + 0.1*sin(x1)").unwrap();
        let ops = conformal_power_ops(&chart, &v, &x).unwrap();
        assert!(ops.check.residual < 1e-4, "{ops:?}");
        let s = sphere(5);
        let v = ScalarField::parse("1.2 + 0.2*x1 - 0.1*x2*x3").unwrap();
        let ops = conformal_power_ops(&s, &v, &[0.1, 0.2, -0.1, 0.0, 0.3]).unwrap();
        assert!(ops.check.residual < 1e-4, "{ops:?}");
        let neg = ScalarField::parse("x1 - 1").unwrap();
        assert!(matches!(conformal_power_ops(&chart, &neg, &x), Err(Error::NonPositive { .. })));
        assert!(conformal_power_ops(&torus(4), &one, &[0.0; 4]).is_err());
    }

    #[test]
    fn unit_factor_on_space_form() {
        let s = sphere(5);
        let one = ScalarField::constant(1.0);
        let ops = conformal_power_ops(&s, &one, &[0.0; 5]).unwrap();
        let h4 = gauss_bonnet(&CurvatureContext::space_form(5, 1.0).unwrap(), 2).unwrap();
        assert!((ops.k - h4 / 16.0).abs() < 1e-5);
    }

    #[test]
    fn bidegree() {
        let chart = torus(5);
        let phi = ScalarField::parse("1.1 + 0.2*cos(x2)").unwrap();
        let x = [0.3, 0.9, 1.7, 2.1, 0.2];
        let one = ScalarField::constant(1.0);
        assert_eq!(bidegree_covariance_check(&chart, &one, &phi, &x).unwrap().residual, 0.0);
        let two = ScalarField::constant(2.0);
        assert!(bidegree_covariance_check(&chart, &two, &phi, &x).unwrap().residual < 1e-10);
        let a = ScalarField::parse("1 + 0.2*sin(x1)*cos(x3)").unwrap();
        assert!(bidegree_covariance_check(&chart, &a, &phi, &x).unwrap().residual < 1e-3);
    }
}
