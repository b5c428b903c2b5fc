use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{identity, rng_for, Aggregate, Key, Outcome, Params, Row, Suite, VerifyConfig};
use crate::chart::{
    bidegree_covariance_check, cocycle_check, conformal_h4_check, conformal_operator_at, conformal_power_ops,
    curvature_at, field_jet, integral_identities, power_operator_at, ChartMetric, FdConfig, ScalarField,
};
use crate::curvinv::{
    avez_classic_residual, avez_type_residual, classic_newton, gauss_bonnet, gauss_bonnet_pair, gnf_residual, lovelock,
    lovelock_pair, newton_explicit, newton_formula_residual, newton_transform, pq_einstein_h_residual,
    product_curvature, quadratic_invariants, random_curvature, s3r_times_sp_signs, sigma_k, sigma_k_pair,
    sigma_weyl_split_residual, trace_relations_residual, Applicability, Check, CurvatureContext,
};
use crate::dfalg::{factf, random_form, random_symmetric, DoubleForm};
use crate::error::Result;
use crate::exec::Exec;
use crate::models::{elementary_symmetric, flat_torus, space_form, sphere};

type Emitted = Vec<(Key, Outcome)>;

fn key(id: &'static str, n: usize, k: Option<usize>) -> Key {
    Key { id, params: Params { n: Some(n), k, ..Params::default() } }
}

fn key_p(id: &'static str, n: usize, k: usize, p: usize) -> Key {
    Key { id, params: Params { n: Some(n), k: Some(k), p: Some(p), ..Params::default() } }
}

fn key_model(id: &'static str, n: usize, k: Option<usize>, model: &str) -> Key {
    Key { id, params: Params { n: Some(n), k, model: Some(model.to_string()), ..Params::default() } }
}

/// A residual measured against a reference magnitude rather than the sides.
fn against(value: f64, scale: f64) -> Check {
    Check { lhs: value, rhs: 0.0, residual: value.abs(), scale: scale.max(1.0) }
}

pub(super) fn run_suite(suite: Suite, cfg: &VerifyConfig, exec: Exec) -> Result<Vec<Row>> {
    match suite {
        Suite::Algebra => sweep(cfg, exec, 1, &cfg.dims(&[4, 5, 6, 7, 8]), algebra_trial),
        Suite::CurvatureIdentities => {
            let dims = cfg.dims(&[4, 5, 6, 7, 8]);
            let mut rows = sweep(cfg, exec, 2, &dims, curvature_trial)?;
            rows.extend(curvature_models(cfg, &dims)?);
            Ok(rows)
        }
        Suite::Newton => {
            let dims = cfg.dims(&[4, 5, 6, 7, 8]);
            let mut rows = sweep(cfg, exec, 3, &dims, newton_trial)?;
            rows.extend(newton_models(cfg, &dims)?);
            Ok(rows)
        }
        Suite::ConformalPointwise => pointwise(cfg, exec),
        Suite::ConformalIntegral => integral(cfg, exec),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

/// Run `trial` for every dimension and trial index; keep the worst outcome
/// per key.
fn sweep<F>(cfg: &VerifyConfig, exec: Exec, tag: u64, dims: &[usize], trial: F) -> Result<Vec<Row>>
where
    F: Fn(&VerifyConfig, usize, usize, &mut ChaCha8Rng) -> Result<Emitted> + Sync + Send,
{
    let mut rows = Vec::new();
    for &n in dims {
        let results = exec.map_range(cfg.trials, |t| trial(cfg, n, t, &mut rng_for(cfg.seed, tag, n, t)));
        let mut agg = Aggregate::default();
        for (t, r) in results.into_iter().enumerate() {
            for (k, o) in r? {
                agg.add(k, o, t);
            }
        }
        let shared = Params { seed: Some(cfg.seed), trials: Some(cfg.trials), ..Params::default() };
        rows.extend(agg.rows(cfg, &shared));
    }
    Ok(rows)
}

fn algebra_trial(cfg: &VerifyConfig, n: usize, t: usize, rng: &mut ChaCha8Rng) -> Result<Emitted> {
    let star = |w: &DoubleForm| if cfg.debug_corrupt_star { w.hodge_star_with_sign_defect() } else { w.hodge_star() };
    let mut out: Emitted = Vec::new();

    let mut adj = Check::scalar(0.0, 0.0);
    for r in 1..=2 {
        for (p, q) in [(0, 0), (1, 1), (2, 1), (2, 2)] {
            if p + r <= n && q + r <= n {
                let w = random_form(n, p, q, rng)?;
                let e = random_form(n, p + r, q + r, rng)?;
                adj = adj.worst(Check::scalar(w.times_metric_power(r)?.inner(&e)?, w.inner(&e.contract(r)?)?));
            }
        }
    }
    out.push((key("adjointness", n, None), adj.into()));

    let mut inv = Check::scalar(0.0, 0.0);
    for p in 0..=n {
        let w = random_form(n, p, p, rng)?;
        inv = inv.worst(Check::forms(&star(&star(&w)), &w)?);
    }
    out.push((key("star-involution", n, None), inv.into()));

    let (mut conj_g, mut conj_c) = (Check::scalar(0.0, 0.0), Check::scalar(0.0, 0.0));
    for r in 1..=2 {
        for p in 0..=3 {
            if p + r > n {
                continue;
            }
            let w = random_form(n, p, p, rng)?;
            conj_g = conj_g.worst(Check::forms(&star(&star(&w).contract(r)?), &w.times_metric_power(r)?)?);
            if r <= p {
                conj_c = conj_c.worst(Check::forms(&star(&star(&w).times_metric_power(r)?), &w.contract(r)?)?);
            }
        }
    }
    out.push((key("star-conjugation-g", n, None), conj_g.into()));
    out.push((key("star-conjugation-c", n, None), conj_c.into()));

    for k in (1..=3.min(n)).filter(|&k| cfg.keeps_k(k)) {
        let h = random_symmetric(n, rng)?;
        let hk = h.power(k)?;
        let mut worst = Check::scalar(0.0, 0.0);
        for _ in 0..4 {
            let xs: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            let ys: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            let m = DMatrix::from_fn(k, k, |i, j| h.eval_tuple(&xs[i..=i], &ys[j..=j]));
            worst = worst.worst(Check::scalar(hk.eval_tuple(&xs, &ys), factf(k) * m.determinant()));
        }
        out.push((key("determinant-law", n, Some(k)), worst.into()));
    }

    if t == 0 {
        let mut worst = Check::scalar(0.0, 0.0);
        for m in 0..=n {
            let gm = DoubleForm::metric_power(n, m)?;
            for r in 0..=m {
                let coef = factf(m) / factf(m - r) * factf(n - m + r) / factf(n - m);
                let expect = DoubleForm::metric_power(n, m - r)?.scale(coef);
                worst = worst.worst(Check::forms(&gm.contract(r)?, &expect)?);
            }
        }
        out.push((key("metric-power-contraction", n, None), worst.into()));
    }

    let (a, b, c) = (random_form(n, 1, 1, rng)?, random_form(n, 1, 1, rng)?, random_form(n, 1, 1, rng)?);
    let assoc = Check::forms(&a.product(&b)?.product(&c)?, &a.product(&b.product(&c)?)?)?;
    out.push((key("product-associativity", n, None), assoc.into()));

    let h2 = random_symmetric(n, rng)?.power(2)?;
    out.push((key("gauss-tensor-bianchi", n, None), against(h2.first_bianchi_residual()?, h2.max_abs()).into()));
    Ok(out)
}

fn curvature_trial(cfg: &VerifyConfig, n: usize, _t: usize, rng: &mut ChaCha8Rng) -> Result<Emitted> {
    let nf = n as f64;
    let ctx = random_curvature(n, 3, rng.random())?;
    let mut out: Emitted = Vec::new();
    let ks = |max: usize| (0..=max).filter(|&k| cfg.keeps_k(k));

    for k in ks(n / 2) {
        out.push((key("gauss-bonnet-two-expressions", n, Some(k)), gauss_bonnet_pair(&ctx, k)?.into()));
        if 2 * k < n {
            if let (a, Some(b)) = lovelock_pair(&ctx, k)? {
                out.push((key("lovelock-two-expressions", n, Some(k)), Check::forms(&a, &b)?.into()));
            }
        }
    }
    if n % 2 == 0 && cfg.keeps_k(n / 2) {
        let k = n / 2;
        let h = gauss_bonnet(&ctx, k)?;
        let term = ctx.power(k)?.contract(2 * k - 1)?.scale(1.0 / factf(2 * k - 1));
        let top = ctx.metric().scale(h).try_sub(&term)?;
        out.push((
            key("lovelock-top-vanishes", n, Some(k)),
            against(top.max_abs(), h.abs().max(term.max_abs())).into(),
        ));
    }

    let a = ctx.schouten()?;
    let h = random_symmetric(n, rng)?;
    let m = h.to_matrix()?;
    let eigs: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    let e = elementary_symmetric(&eigs);
    for k in ks(n) {
        out.push((key("sigma-two-expressions", n, Some(k)), sigma_k_pair(a, k)?.into()));
        out.push((key("sigma-eigenvalues", n, Some(k)), Check::scalar(sigma_k(&h, k)?, e[k]).into()));
    }
    out.push((key("sigma1-scal", n, None), Check::scalar(sigma_k(a, 1)?, ctx.scal() / (2.0 * (nf - 1.0))).into()));

    let w = ctx.weyl()?;
    let split = Check::forms(ctx.riemann(), &w.try_add(&ctx.metric().product(a)?)?)?;
    let trace = against(w.contract(1)?.max_abs(), ctx.riemann().max_abs());
    out.push((key("schouten-weyl-split", n, None), split.worst(trace).into()));

    let cf = CurvatureContext::conformally_flat(&random_symmetric(n, rng)?)?;
    for k in ks(n / 2) {
        if k <= 3 {
            out.push((key("sigma-weyl-split", n, Some(k)), sigma_weyl_split_residual(&ctx, k)?.into()));
        }
        let coef = factf(n - k) * factf(k) / factf(n - 2 * k);
        let c = Check::scalar(gauss_bonnet(&cf, k)?, coef * sigma_k(cf.schouten()?, k)?);
        out.push((key("conformally-flat-clause", n, Some(k)), c.into()));
    }

    let sigma2 = sigma_k(a, 2)?;
    let w2 = w.norm2();
    if n >= 4 {
        let c = Check::scalar(gauss_bonnet(&ctx, 2)?, w2 + 2.0 * (nf - 2.0) * (nf - 3.0) * sigma2);
        out.push((key("h4-weyl-sigma2", n, None), c.into()));
    }
    let s2 = ctx.scal() * ctx.scal();
    let quad = Check::scalar(2.0 * (nf - 2.0).powi(2) * sigma2, nf / (4.0 * (nf - 1.0)) * s2 - ctx.ricci().norm2());
    out.push((key("sigma2-quadratic", n, None), quad.into()));
    let q = quadratic_invariants(&ctx)?;
    out.push((key("conformal-flatness-deficiency", n, None), Check::scalar(q.confflat_def, w2).into()));

    let n1 = n / 2;
    let factor = |d: usize, rng: &mut ChaCha8Rng| -> Result<CurvatureContext> {
        if d >= 3 {
            random_curvature(d, 2, rng.random())
        } else {
            CurvatureContext::space_form(d, rng.random_range(-2.0..2.0))
        }
    };
    let (f1, f2) = (factor(n1, rng)?, factor(n - n1, rng)?);
    let prod = product_curvature(&f1, &f2)?;
    let h4 = |c: &CurvatureContext| if c.n() >= 4 { gauss_bonnet(c, 2) } else { Ok(0.0) };
    let law = h4(&f1)? + 0.5 * f1.scal() * f2.scal() + h4(&f2)?;
    out.push((key("product-h4-law", n, None), Check::scalar(gauss_bonnet(&prod, 2)?, law).into()));
    Ok(out)
}

/// Closed-form model rows of the curvature suite.
fn curvature_models(cfg: &VerifyConfig, dims: &[usize]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let row = |id: &str, params: Params, c: Check| {
        let ident = identity(id);
        Row::from_check(ident, params, c, cfg.tolerance(ident))
    };
    for &n in dims.iter().filter(|&&n| n >= 3) {
        let nf = n as f64;
        for kappa in [1.0, -0.5, 2.0] {
            let m = space_form(n, kappa)?;
            let ctx = m.curvature()?;
            let params = Params { n: Some(n), model: Some(m.name().to_string()), ..Params::default() };
            let s2 = ctx.scal() * ctx.scal();
            let e = Check::scalar(sigma_k(ctx.schouten()?, 2)?, s2 / (8.0 * nf * (nf - 1.0)));
            rows.push(row("einstein-sigma2", params.clone(), e));
            let q = quadratic_invariants(ctx)?;
            rows.push(row("space-form-deficiency", params, against(q.spaceform_def, ctx.riemann().norm2())));
        }
        if n % 2 == 0 && n >= 6 {
            let s = sphere(n / 2, 1.0)?;
            let ctx = product_curvature(s.curvature()?, s.curvature()?)?;
            let model = format!("{} x {}", s.name(), s.name());
            let s2 = ctx.scal() * ctx.scal();
            let e = Check::scalar(sigma_k(ctx.schouten()?, 2)?, s2 / (8.0 * nf * (nf - 1.0)));
            rows.push(row("einstein-sigma2", Params { n: Some(n), model: Some(model), ..Params::default() }, e));
        }
        if n >= 4 {
            let m = sphere(n, 1.0)?;
            let expect = factf(n) / (4.0 * factf(n - 4));
            let c = Check::scalar(gauss_bonnet(m.curvature()?, 2)?, expect);
            rows.push(row(
                "sphere-h4",
                Params { n: Some(n), model: Some(m.name().to_string()), ..Params::default() },
                c,
            ));
        }
    }
    let s2 = sphere(2, 1.0)?;
    let c = Check::scalar(gauss_bonnet(&product_curvature(s2.curvature()?, s2.curvature()?)?, 2)?, 2.0);
    rows.push(row(
        "product-h4-law",
        Params { n: Some(4), model: Some("S^2(1) x S^2(1)".into()), ..Params::default() },
        c,
    ));

    let r = 0.1;
    let signs = s3r_times_sp_signs(r, 2)?;
    let params = Params { n: Some(5), model: Some(format!("S^3({r}) x S^2(1)")), ..Params::default() };
    let ineq = |id: &str, value: f64, bound: f64, strict: bool| {
        let ident = identity(id);
        Row::inequality(ident, params.clone(), value, bound, strict, cfg.tolerance(ident))
    };
    rows.push(ineq("sign-min-sectional", signs.min_sectional, 0.0, false));
    rows.push(ineq("sign-min-ricci", signs.min_ricci_eig, 0.0, true));
    rows.push(ineq("sign-min-einstein", signs.min_einstein_eig, 0.0, true));
    rows.push(ineq("sign-h4", signs.h4, 0.0, true));
    rows.push(ineq("sign-sigma2", -signs.sigma2, 0.0, true));
    Ok(rows)
}

fn newton_trial(cfg: &VerifyConfig, n: usize, _t: usize, rng: &mut ChaCha8Rng) -> Result<Emitted> {
    let ctx = random_curvature(n, 3, rng.random())?;
    let r = ctx.riemann();
    let h = random_symmetric(n, rng)?;
    let mut out: Emitted = Vec::new();
    let keep = |k: usize| cfg.keeps_k(k);

    for k in (0..=3).filter(|&k| 2 * k + 2 <= n && keep(k)) {
        let c = Check::forms(&newton_transform(r, k)?, &newton_explicit(r, k)?)?;
        out.push((key("newton-explicit-curvature", n, Some(k)), c.into()));
    }
    for k in (0..n).filter(|&k| keep(k)) {
        let c = Check::forms(&newton_transform(&h, k)?, &newton_explicit(&h, k)?)?;
        out.push((key("newton-explicit-bilinear", n, Some(k)), c.into()));
        if k >= 1 {
            let c = Check::forms(&newton_transform(&h, k)?, &classic_newton(&h, k)?.scale(factf(k)))?;
            out.push((key("newton-classic", n, Some(k)), c.into()));
        }
    }
    if n >= 4 && keep(1) {
        let w = ctx.weyl()?;
        out.push((key("newton-trace-free", n, Some(1)), Check::forms(&newton_transform(w, 1)?, w)?.into()));
    }
    for k in (0..=n / 2).filter(|&k| 2 * k + 2 <= n && keep(k)) {
        out.push((key_p("newton-formula", n, k, 2), newton_formula_residual(r, k)?.into()));
        let gb = Check::scalar(gauss_bonnet(&ctx, k + 1)?, newton_transform(r, k)?.inner(r)?);
        out.push((key("gauss-bonnet-newton", n, Some(k)), gb.into()));
        let (t1, t2) = trace_relations_residual(&ctx, k)?;
        out.push((key("trace-relation-1", n, Some(k)), t1.into()));
        out.push((key("trace-relation-2", n, Some(k)), t2.into()));
        if k >= 1 {
            out.push((key("avez-type", n, Some(k)), avez_type_residual(&ctx, k)?.into()));
            let o = match pq_einstein_h_residual(&ctx, k)? {
                Applicability::Applicable(c) => Outcome::Checked(c),
                Applicability::NotApplicable { deviation } => Outcome::NotApplicable(deviation),
            };
            out.push((key_model("pq-einstein", n, Some(k), "random"), o));
        }
    }
    for k in (0..n).filter(|&k| keep(k)) {
        out.push((key_p("newton-formula", n, k, 1), newton_formula_residual(&h, k)?.into()));
    }
    if n >= 4 {
        out.push((key("avez-classic", n, None), avez_classic_residual(&ctx)?.into()));
    }
    let w1 = random_symmetric(n, rng)?;
    for k in (0..=n - 2).filter(|&k| keep(k)) {
        out.push((key_p("gnf", n, k, 2), gnf_residual(r, &h, k)?.into()));
    }
    for k in (0..n).filter(|&k| keep(k)) {
        out.push((key_p("gnf", n, k, 1), gnf_residual(&w1, &h, k)?.into()));
    }
    Ok(out)
}

fn newton_models(cfg: &VerifyConfig, dims: &[usize]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &n in dims {
        let m = space_form(n, 1.0)?;
        for k in (1..=n / 2).filter(|&k| 2 * k + 2 <= n && cfg.keeps_k(k)) {
            let ident = identity("pq-einstein");
            let params = Params { n: Some(n), k: Some(k), model: Some(m.name().to_string()), ..Params::default() };
            let tol = cfg.tolerance(ident);
            rows.push(match pq_einstein_h_residual(m.curvature()?, k)? {
                Applicability::Applicable(c) => Row::from_check(ident, params, c, tol),
                Applicability::NotApplicable { deviation } => Row::not_applicable(ident, params, deviation, tol),
            });
        }
    }
    Ok(rows)
}

fn keeps_dim(cfg: &VerifyConfig, n: usize) -> bool {
    cfg.n.as_ref().is_none_or(|ns| ns.contains(&n))
}

/// Uniform points on `[0, 2 pi)^n`.
fn torus_points(cfg: &VerifyConfig, n: usize, tag: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(cfg.seed, tag, n, 0);
    (0..cfg.samples).map(|_| (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect()).collect()
}

fn torus_chart(n: usize, fd: FdConfig) -> Result<ChartMetric> {
    Ok(flat_torus(n, 2.0 * PI)?.chart().clone().with_fd(fd))
}

/// Rows over sample points: worst per key, with the worst point attached.
fn sample_rows<F>(cfg: &VerifyConfig, exec: Exec, points: &[Vec<f64>], base: &Params, per_point: F) -> Result<Vec<Row>>
where
    F: Fn(&[f64]) -> Result<Vec<(&'static str, Check)>> + Sync + Send,
{
    let results = exec.map(points, |x| per_point(x));
    let mut agg = Aggregate::default();
    for (i, r) in results.into_iter().enumerate() {
        for (id, c) in r? {
            agg.add(Key { id, params: base.clone() }, c.into(), i);
        }
    }
    let shared = Params { trials: Some(points.len()), seed: Some(cfg.seed), ..Params::default() };
    let mut rows = agg.rows(cfg, &shared);
    for r in &mut rows {
        r.params.point = r.params.worst.map(|i| points[i].clone());
    }
    Ok(rows)
}

fn pointwise(cfg: &VerifyConfig, exec: Exec) -> Result<Vec<Row>> {
    let fd = cfg.fd()?;
    let mut rows = Vec::new();
    if keeps_dim(cfg, 4) {
        let m = sphere(4, 1.0)?;
        let chart = m.chart().clone().with_fd(fd);
        let exact = m.curvature()?.riemann().clone();
        let points = m.sample_points(cfg.samples, cfg.seed);
        let base = Params { n: Some(4), model: Some(m.name().to_string()), ..Params::default() };
        rows.extend(sample_rows(cfg, exec, &points, &base, |x| {
            let frame = curvature_at(&chart, x)?;
            Ok(vec![("sphere-chart-curvature", Check::forms(frame.curvature.riemann(), &exact)?)])
        })?);
        let err = |h: f64| -> Result<f64> {
            let c = m.chart().clone().with_fd(FdConfig { order: fd.order, step: Some(h) });
            curvature_at(&c, &points[0])?.curvature.riemann().max_diff(&exact)
        };
        let ratio = err(0.1)? / err(0.05)?;
        let expect = 2f64.powi(fd.order.as_int() as i32);
        let ident = identity("sphere-chart-convergence");
        let check = Check { lhs: ratio, rhs: expect, residual: (ratio - expect).abs(), scale: expect };
        let params = Params { point: Some(points[0].clone()), ..base.clone() };
        rows.push(Row::from_check(ident, params, check, cfg.tolerance(ident)));

        let chart = torus_chart(4, fd)?;
        let f = ScalarField::parse(&cfg.f)?;
        let phi = ScalarField::parse(&cfg.phi)?;
        let zero = ScalarField::constant(0.0);
        let base = Params { n: Some(4), model: Some("T^4".into()), field: Some(cfg.f.clone()), ..Params::default() };
        rows.extend(sample_rows(cfg, exec, &torus_points(cfg, 4, 10), &base, |x| {
            let r = conformal_h4_check(&chart, &f, x)?;
            Ok(vec![
                ("conformal-h4-law", r.check),
                ("conformal-weyl-law", r.weyl),
                ("conformal-riemann-law", r.riemann),
                ("conformal-volume-law", r.volume),
                ("cocycle", cocycle_check(&chart, &f, &phi, x)?),
                ("cocycle-trivial", cocycle_check(&chart, &f, &zero, x)?),
            ])
        })?);
    }
    if keeps_dim(cfg, 5) {
        let power_rows = |x: &[f64], chart: &ChartMetric, v: &ScalarField| -> Result<Vec<(&'static str, Check)>> {
            let ops = conformal_power_ops(chart, v, x)?;
            let nf = chart.dim() as f64;
            let k_eq = Check::scalar(ops.check.lhs, 8.0 * (nf - 3.0) / (nf - 4.0) * ops.k);
            Ok(vec![("power-law", ops.check), ("k-equation", k_eq)])
        };
        let m = sphere(5, 1.0)?;
        let chart = m.chart().clone().with_fd(fd);
        let v = ScalarField::parse(&cfg.sphere_v)?;
        let base = Params {
            n: Some(5),
            model: Some(m.name().to_string()),
            field: Some(cfg.sphere_v.clone()),
            ..Params::default()
        };
        rows.extend(sample_rows(cfg, exec, &m.sample_points(cfg.samples, cfg.seed), &base, |x| {
            power_rows(x, &chart, &v)
        })?);

        let chart = torus_chart(5, fd)?;
        let v = ScalarField::parse(&cfg.v)?;
        let a = ScalarField::parse(&cfg.a)?;
        let one = ScalarField::constant(1.0);
        let two = ScalarField::constant(2.0);
        let base = Params { n: Some(5), model: Some("T^5".into()), field: Some(cfg.v.clone()), ..Params::default() };
        rows.extend(sample_rows(cfg, exec, &torus_points(cfg, 5, 11), &base, |x| {
            let mut out = power_rows(x, &chart, &v)?;
            out.push(("bidegree-covariance", bidegree_covariance_check(&chart, &a, &v, x)?));
            out.push(("bidegree-trivial", bidegree_covariance_check(&chart, &one, &v, x)?));
            out.push(("bidegree-homothety", bidegree_covariance_check(&chart, &two, &v, x)?));
            Ok(out)
        })?);
    }
    Ok(rows)
}

fn integral_rows(cfg: &VerifyConfig, exec: Exec, chart: &ChartMetric, field: &str, model: &str) -> Result<Vec<Row>> {
    let f = ScalarField::parse(field)?;
    let params = Params {
        n: Some(chart.dim()),
        model: Some(model.to_string()),
        field: Some(field.to_string()),
        resolution: Some(cfg.resolution),
        ..Params::default()
    };
    Ok(integral_identities(exec, chart, &f, cfg.resolution)?
        .into_iter()
        .map(|r| {
            let ident = identity(r.id);
            Row::from_check(ident, params.clone(), r.check, cfg.tolerance(ident))
        })
        .collect())
}

fn integral(cfg: &VerifyConfig, exec: Exec) -> Result<Vec<Row>> {
    let fd = cfg.fd()?;
    let mut rows = Vec::new();
    if keeps_dim(cfg, 4) {
        rows.extend(integral_rows(cfg, exec, &torus_chart(4, fd)?, &cfg.f, "T^4")?);
    }
    if keeps_dim(cfg, 5) {
        rows.extend(integral_rows(cfg, exec, &torus_chart(5, fd)?, &cfg.v, "T^5")?);
    }
    Ok(rows)
}

/// Inputs of a conformal evaluation on a user chart: `field` is `f` when
/// `n = 4` and the positive `v` when `n > 4`.
pub struct ConformalInputs<'a> {
    pub chart: &'a ChartMetric,
    pub field: &'a ScalarField,
    /// Second field for the cocycle identity (`n = 4`).
    pub phi: Option<&'a ScalarField>,
    /// Positive factor for bi-degree covariance (`n > 4`).
    pub a: Option<&'a ScalarField>,
    pub points: &'a [Vec<f64>],
    /// Quadrature resolution; integral rows need a periodic chart.
    pub resolution: Option<usize>,
}

/// A pointwise value reported alongside the identity rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub name: &'static str,
    pub point: Vec<f64>,
    pub value: f64,
}

/// Conformal operators at the sample points, the transformation-law rows and
/// (on periodic charts) the integral rows.
pub fn conformal_rows(cfg: &VerifyConfig, exec: Exec, input: &ConformalInputs) -> Result<(Vec<Row>, Vec<Evaluation>)> {
    let chart = input.chart;
    let n = chart.dim();
    if n < 4 {
        return Err(crate::Error::Precondition(format!("conformal operators need n >= 4, got {n}")));
    }
    let field = input.field;
    let label = field.label().to_string();
    let base = Params { n: Some(n), field: Some(label.clone()), ..Params::default() };
    let evals = exec.map(input.points, |x| -> Result<Vec<Evaluation>> {
        let frame = curvature_at(chart, x)?;
        let fj = field_jet(chart, &frame, field)?;
        let t2 = lovelock(&frame.curvature, 1)?.to_matrix()?;
        let min_t2 = SymmetricEigen::new(t2).eigenvalues.min();
        let mut out = vec![Evaluation { name: "min_t2_eigenvalue", point: x.to_vec(), value: min_t2 }];
        if n == 4 {
            out.push(Evaluation {
                name: "conformal_operator",
                point: x.to_vec(),
                value: conformal_operator_at(&frame, &fj)?,
            });
        } else {
            let ops = conformal_power_ops(chart, field, x)?;
            out.push(Evaluation { name: "power_operator", point: x.to_vec(), value: power_operator_at(&frame, &fj)? });
            out.push(Evaluation { name: "k_operator", point: x.to_vec(), value: ops.k });
        }
        Ok(out)
    });
    let evals: Vec<Evaluation> = evals.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();

    let nf = n as f64;
    let mut rows = sample_rows(cfg, exec, input.points, &base, |x| {
        if n == 4 {
            let r = conformal_h4_check(chart, field, x)?;
            let mut out = vec![
                ("conformal-h4-law", r.check),
                ("conformal-weyl-law", r.weyl),
                ("conformal-riemann-law", r.riemann),
                ("conformal-volume-law", r.volume),
            ];
            if let Some(phi) = input.phi {
                out.push(("cocycle", cocycle_check(chart, field, phi, x)?));
            }
            Ok(out)
        } else {
            let ops = conformal_power_ops(chart, field, x)?;
            let k_eq = Check::scalar(ops.check.lhs, 8.0 * (nf - 3.0) / (nf - 4.0) * ops.k);
            let mut out = vec![("power-law", ops.check), ("k-equation", k_eq)];
            if let Some(a) = input.a {
                out.push(("bidegree-covariance", bidegree_covariance_check(chart, a, field, x)?));
            }
            Ok(out)
        }
    })?;
    if let (Some(res), true) = (input.resolution, chart.domain().is_periodic()) {
        let params = Params { resolution: Some(res), ..base };
        for r in integral_identities(exec, chart, field, res)? {
            let ident = identity(r.id);
            rows.push(Row::from_check(ident, params.clone(), r.check, cfg.tolerance(ident)));
        }
    }
    Ok((rows, evals))
}
