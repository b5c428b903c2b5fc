use std::time::Instant;

use gbcurv::chart::curvature_at;
use gbcurv::curvinv::{gauss_bonnet, lovelock, quadratic_invariants, sigma_k, CurvatureContext};
use gbcurv::exec::Exec;
use gbcurv::models::Oracle;
use gbcurv::verify::{self, conformal_rows, ConformalInputs, Evaluation, Row, Summary, VerifyConfig, SCHEMA_VERSION};
use serde::Serialize;

use crate::config::{field, Built, RunConfig};
use crate::Failure;

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Signs that separate curvature conditions (for instance positive `h_4`
/// with negative `sigma_2` on thin products).
#[derive(Debug, Serialize)]
pub struct SignFlags {
    pub ricci_positive: bool,
    pub einstein_tensor_positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h4_positive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_negative: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct Invariants {
    /// `None` for the exact algebraic curvature of a model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// `h_2k` for `k = 0..=n/2`.
    pub gauss_bonnet: Vec<f64>,
    pub scal: f64,
    /// `sigma_k(A)` of the Schouten tensor for `k = 0..=n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    pub ricci_range: [f64; 2],
    pub t2_range: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weyl_norm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub einstein_deficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal_flatness_deficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_form_deficiency: Option<f64>,
    pub signs: SignFlags,
}

#[derive(Debug, Serialize)]
pub struct InvariantsReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub manifold: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Oracle>,
    pub entries: Vec<Invariants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConformalReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub manifold: String,
    pub n: usize,
    pub config: VerifyConfig,
    pub evaluations: Vec<Evaluation>,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

#[derive(Debug, Serialize)]
pub struct IdentityList {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub identities: &'static [verify::Identity],
}

fn range(h: &gbcurv::dfalg::DoubleForm) -> gbcurv::Result<[f64; 2]> {
    let e = nalgebra::SymmetricEigen::new(h.to_matrix()?).eigenvalues;
    Ok([e.min(), e.max()])
}

fn invariants_of(ctx: &CurvatureContext, point: Option<Vec<f64>>) -> gbcurv::Result<Invariants> {
    let n = ctx.n();
    let gauss_bonnet = (0..=n / 2).map(|k| gauss_bonnet(ctx, k)).collect::<gbcurv::Result<Vec<_>>>()?;
    let sigma = match ctx.schouten() {
        Ok(a) => Some((0..=n).map(|k| sigma_k(a, k)).collect::<gbcurv::Result<Vec<_>>>()?),
        Err(_) => None,
    };
    let quad = if n >= 3 { Some(quadratic_invariants(ctx)?) } else { None };
    let ricci_range = range(ctx.ricci())?;
    let t2_range = range(&lovelock(ctx, 1)?)?;
    let h4 = gauss_bonnet.get(2).copied();
    let sigma2 = sigma.as_ref().map(|s| s[2]);
    Ok(Invariants {
        point,
        scal: ctx.scal(),
        ricci_range,
        t2_range,
        weyl_norm2: quad.map(|q| q.weyl_norm2),
        einstein_deficiency: quad.map(|q| q.einstein_def),
        conformal_flatness_deficiency: quad.map(|q| q.confflat_def),
        space_form_deficiency: quad.map(|q| q.spaceform_def),
        signs: SignFlags {
            ricci_positive: ricci_range[0] > 0.0,
            einstein_tensor_positive: t2_range[0] > 0.0,
            h4_positive: h4.map(|h| h > 0.0),
            sigma2_negative: sigma2.map(|s| s < 0.0),
        },
        gauss_bonnet,
        sigma,
    })
}

/// Exact invariants of a model, or finite-difference invariants at the given
/// points (the chart centre for an explicit metric without points).
pub fn invariants(cfg: &RunConfig, built: &Built, exec: Exec) -> Result<InvariantsReport, Failure> {
    let n = built.chart.dim();
    let points = match (&cfg.points, &built.model) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(_)) => None,
        (None, None) => Some(vec![built.chart.domain().center()]),
    };
    if let Some(ps) = &points {
        for p in ps {
            built.chart.domain().check_point(p).map_err(Failure::Config)?;
        }
    }
    let entries = match &points {
        None => {
            let model = built.model.as_ref().expect("model without points");
            vec![invariants_of(model.curvature().map_err(Failure::Runtime)?, None).map_err(Failure::Runtime)?]
        }
        Some(ps) => exec
            .map(ps, |x| invariants_of(&curvature_at(&built.chart, x)?.curvature, Some(x.clone())))
            .into_iter()
            .collect::<gbcurv::Result<Vec<_>>>()
            .map_err(Failure::Runtime)?,
    };
    Ok(InvariantsReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command: "invariants",
        manifold: built.name.clone(),
        n,
        oracle: built.model.as_ref().map(|m| m.oracle().clone()),
        entries,
        wall_time_s: None,
    })
}

pub fn verify(cfg: &VerifyConfig, exec: Exec) -> Result<verify::VerificationReport, Failure> {
    cfg.validate().map_err(Failure::Config)?;
    verify::run(cfg, exec).map_err(Failure::Runtime)
}

/// Conformal operators and transformation laws for `f` (`n = 4`) or `v`
/// (`n > 4`) on the configured manifold.
pub fn conformal(cfg: &RunConfig, vcfg: &VerifyConfig, built: &Built, exec: Exec) -> Result<ConformalReport, Failure> {
    vcfg.validate().map_err(Failure::Config)?;
    let n = built.chart.dim();
    if n < 4 {
        return Err(Failure::Config(gbcurv::Error::Precondition(format!("conformal needs n >= 4, got {n}"))));
    }
    let text = if n == 4 { &vcfg.f } else { &vcfg.v };
    let main = field(text, n).map_err(Failure::Config)?;
    let phi = match (&cfg.phi, n) {
        (Some(t), 4) => Some(field(t, n).map_err(Failure::Config)?),
        _ => None,
    };
    let a = match (&cfg.a, n) {
        (Some(t), m) if m > 4 => Some(field(t, n).map_err(Failure::Config)?),
        _ => None,
    };
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => built.chart.domain().sample_points(vcfg.samples, vcfg.seed),
    };
    for p in &points {
        built.chart.domain().check_point(p).map_err(Failure::Config)?;
    }
    let input = ConformalInputs {
        chart: &built.chart,
        field: &main,
        phi: phi.as_ref(),
        a: a.as_ref(),
        points: &points,
        resolution: Some(vcfg.resolution),
    };
    let (rows, evaluations) = conformal_rows(vcfg, exec, &input).map_err(Failure::Runtime)?;
    let summary = Summary::of(&rows);
    Ok(ConformalReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command: "conformal",
        manifold: built.name.clone(),
        n,
        config: vcfg.clone(),
        evaluations,
        rows,
        summary,
    })
}

pub fn list_identities() -> IdentityList {
    IdentityList { schema_version: SCHEMA_VERSION, tool_version: TOOL_VERSION, identities: verify::CATALOG }
}

/// Seconds since `start`, for the opt-in timing field.
pub fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}
