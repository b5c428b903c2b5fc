use super::conformal::{conformal_operator_at, power_operator_at};
use super::frame::{curvature_at, field_jet};
use super::{ChartMetric, ScalarField};
use crate::curvinv::{gauss_bonnet, lovelock, sigma_k, Check};
use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};

const MAX_POINTS: usize = 50_000_000;

/// Periodic trapezoid rule for `m` integrands at once over the axes in `axes`;
/// every other axis contributes its side length. The integrands are summed
/// exactly as returned (no volume density is applied here).
pub fn integrate_many<F>(
    exec: Exec,
    chart: &ChartMetric,
    axes: &[usize],
    resolution: usize,
    m: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync + Send,
{
    let dom = chart.domain();
    if !dom.is_periodic() {
        return Err(Error::Unsupported("quadrature needs a fully periodic chart".into()));
    }
    if resolution == 0 {
        return Err(Error::Precondition("grid resolution must be positive".into()));
    }
    let total = axes
        .iter()
        .try_fold(1usize, |acc, _| acc.checked_mul(resolution).filter(|&t| t <= MAX_POINTS))
        .ok_or_else(|| Error::Precondition(format!("grid {resolution}^{} is too large", axes.len())))?;
    let mut cell = 1.0;
    for axis in 0..dom.dim() {
        cell *= if axes.contains(&axis) { dom.side(axis) / resolution as f64 } else { dom.side(axis) };
    }
    let values = exec.map_range(total, |idx| {
        let mut x = dom.lo.clone();
        let mut rest = idx;
        for &axis in axes.iter().rev() {
            x[axis] = dom.lo[axis] + (rest % resolution) as f64 * dom.side(axis) / resolution as f64;
            rest /= resolution;
        }
        f(&x)
    });
    let mut columns = vec![Vec::with_capacity(total); m];
    for v in values {
        let v = v?;
        if v.len() != m {
            return Err(Error::DimensionMismatch(v.len(), m));
        }
        for (c, x) in columns.iter_mut().zip(v) {
            c.push(x);
        }
    }
    Ok(columns.iter().map(|c| pairwise_sum(c) * cell).collect())
}

/// `int field mu_g` over a periodic chart.
pub fn integrate(exec: Exec, chart: &ChartMetric, field: &ScalarField, resolution: usize) -> Result<f64> {
    let axes = chart.active_axes(&[field]);
    let out = integrate_many(exec, chart, &axes, resolution, 1, |x| {
        let det = chart.metric_at(x)?.determinant();
        if det <= 0.0 {
            return Err(Error::NotSpd(x.to_vec()));
        }
        Ok(vec![field.eval(x)? * det.sqrt()])
    })?;
    Ok(out[0])
}

/// One integral identity: identifier and both integrated sides.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRow {
    pub id: &'static str,
    pub check: Check,
}

/// `lhs = sum a_i t_i` against `rhs = sum b_j t_j`, judged relative to the
/// integrated absolute size of every term involved.
fn row(id: &'static str, t: &[f64], mags: &[f64], lhs: &[(usize, f64)], rhs: &[(usize, f64)]) -> IntegralRow {
    let side = |terms: &[(usize, f64)]| terms.iter().map(|&(i, c)| c * t[i]).sum::<f64>();
    let magnitude = lhs.iter().chain(rhs).map(|&(i, c)| c.abs() * mags[i]).fold(0.0, f64::max);
    let mut check = Check::scalar(side(lhs), side(rhs));
    check.scale = check.scale.max(magnitude);
    IntegralRow { id, check }
}

/// Integral identities for `field` on a periodic chart:
///
/// - every `n`: `int 2 sigma_2(Hess f) = int Ric(grad f, grad f)` and
///   `int 2 Hess f(grad f, grad f) = int |df|^2 Delta f`;
/// - `n = 4`: `int L_g(f) = 0` and `int hbar_4 mu_gbar = int h_4 mu_g`, `gbar = e^(2f) g`;
/// - `n > 4` (field `v > 0`, `gbar = v^(8/(n-4)) g`): the total `hbar_4` formula and
///   the change of Ricci curvature along `grad v`, once with the functional as
///   displayed alongside it and once with the functional of the total formula.
pub fn integral_identities(
    exec: Exec,
    chart: &ChartMetric,
    field: &ScalarField,
    resolution: usize,
) -> Result<Vec<IntegralRow>> {
    let n = chart.dim();
    let nf = n as f64;
    let axes = chart.active_axes(&[field]);
    let bar_chart = match n {
        4 => Some(chart.conformal(field.map("exp2", |v| (2.0 * v).exp()))),
        n if n > 4 => Some(chart.conformal(field.powf(8.0 / (nf - 4.0)))),
        _ => None,
    };
    let square = field.mul(field);
    let width = match n {
        4 => 7,
        n if n > 4 => 11,
        _ => 4,
    };
    // Each integrand is followed by its absolute value, for row scales.
    let totals = integrate_many(exec, chart, &axes, resolution, 2 * width, |x| {
        let with_abs = |v: Vec<f64>| v.iter().copied().chain(v.iter().map(|x| x.abs())).collect::<Vec<_>>();
        let frame = curvature_at(chart, x)?;
        let fj = field_jet(chart, &frame, field)?;
        let mu = frame.volume_density;
        let df2 = fj.grad_norm2();
        let mut out = vec![
            2.0 * sigma_k(&fj.hess, 2)? * mu,
            fj.on_grad(frame.curvature.ricci())? * mu,
            2.0 * fj.hess_on_grad() * mu,
            df2 * fj.laplacian() * mu,
        ];
        let Some(bar_chart) = &bar_chart else { return Ok(with_abs(out)) };
        if n > 4 && fj.value <= 0.0 {
            return Err(Error::NonPositive { point: x.to_vec(), value: fj.value });
        }
        let bar = curvature_at(bar_chart, x)?;
        let h4bar = gauss_bonnet(&bar.curvature, 2)? * bar.volume_density;
        let h4 = gauss_bonnet(&frame.curvature, 2)?;
        if n == 4 {
            let l = conformal_operator_at(&frame, &fj)?;
            out.extend([l * mu, h4bar, h4 * mu]);
            return Ok(with_abs(out));
        }
        let v = fj.value;
        let lap_v2 = field_jet(chart, &frame, &square)?.laplacian();
        let grad = frame.raise(&fj.partials);
        let ric_change = bar.ricci_on(&grad, &grad)? - frame.ricci_on(&grad, &grad)?;
        // Evaluated for its side effect of rejecting v <= 0 consistently with
        // the pointwise operator.
        power_operator_at(&frame, &fj)?;
        out.extend([
            h4bar,
            v.powi(4) * h4 * mu,
            v * v * fj.on_grad(&lovelock(&frame.curvature, 1)?)? * mu,
            ((nf - 4.0) * df2 * lap_v2 - 4.0 * df2 * df2) * mu,
            v * v * ric_change * mu,
            ((nf - 4.0) * v * df2 * lap_v2 - 4.0 * df2 * df2) * mu,
            df2 * df2 * mu,
        ]);
        Ok(with_abs(out))
    })?;
    let (t, mags) = totals.split_at(width);
    let mut rows = vec![
        row("bochner-sigma2", t, mags, &[(0, 1.0)], &[(1, 1.0)]),
        row("hessian-gradient", t, mags, &[(2, 1.0)], &[(3, 1.0)]),
    ];
    if n == 4 {
        rows.push(row("conformal-operator-mean", t, mags, &[(4, 1.0)], &[]));
        rows.push(row("total-h4-conformal-invariance", t, mags, &[(5, 1.0)], &[(6, 1.0)]));
    } else if n > 4 {
        let m = nf - 4.0;
        let c_t2 = 16.0 * (nf - 3.0) / m;
        let c_a = 16.0 * (nf - 2.0) * (nf - 3.0) / m.powi(3);
        rows.push(row("total-h4-power", t, mags, &[(4, 1.0)], &[(5, 1.0), (6, c_t2), (7, c_a)]));
        let quartic = 4.0 * (nf - 1.0);
        rows.push(row("ricci-change-as-displayed", t, mags, &[(8, m)], &[(9, -2.0), (10, quartic)]));
        rows.push(row("ricci-change-total-functional", t, mags, &[(8, m)], &[(7, -1.0), (10, quartic)]));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::super::{Domain, FlatMetric};
    use super::*;

    fn torus(n: usize) -> ChartMetric {
        ChartMetric::new(Arc::new(FlatMetric(n)), Domain::torus(n, 2.0 * PI).unwrap()).unwrap()
    }

    #[test]
    fn quadrature_examples() {
        let one = ScalarField::constant(1.0);
        let v = integrate(Exec::Sequential, &torus(4), &one, 4).unwrap();
        assert!((v - (2.0 * PI).powi(4)).abs() < 1e-9);
        let s = ScalarField::parse("sin(x1)^2").unwrap();
        assert!((integrate(Exec::Sequential, &torus(1), &s, 8).unwrap() - PI).abs() < 1e-14);
        let box_chart = ChartMetric::new(Arc::new(FlatMetric(2)), Domain::centered_box(2, 1.0).unwrap()).unwrap();
        assert!(matches!(integrate(Exec::Sequential, &box_chart, &one, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn trig_polynomials_are_exact() {
        let f = ScalarField::parse("(1 + cos(x1))^3*sin(x2)^2").unwrap();
        // (1+cos)^3 averages to 1 + 3/2 = 5/2; sin^2 to 1/2; times (2 pi)^3.
        let expect = 2.5 * 0.5 * (2.0 * PI).powi(3);
        let got = integrate(Exec::Parallel, &torus(3), &f, 16).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let chart = torus(2);
        let f = ScalarField::parse("sin(x1)*cos(2*x2) + cos(x1)").unwrap();
        let axes = chart.active_axes(&[&f]);
        let out = integrate_many(Exec::Sequential, &chart, &axes, 16, 1, |x| {
            let frame = curvature_at(&chart, x)?;
            Ok(vec![field_jet(&chart, &frame, &f)?.laplacian()])
        })
        .unwrap();
        assert!(out[0].abs() < 1e-9);
    }

    #[test]
    fn deterministic_across_policies() {
        let chart = torus(2);
        let f = ScalarField::parse("exp(sin(x1))*cos(x2)^2").unwrap();
        let a = integrate(Exec::Sequential, &chart, &f, 24).unwrap();
        let b = integrate(Exec::Parallel, &chart, &f, 24).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn constant_field_rows_are_exact() {
        let rows = integral_identities(Exec::Sequential, &torus(4), &ScalarField::constant(0.3), 2).unwrap();
        assert_eq!(rows.len(), 4);
        for r in rows {
            assert_eq!(r.check.residual, 0.0, "{r:?}");
        }
    }
}
