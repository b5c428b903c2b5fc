use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use gbcurv::chart::{ChartMetric, Domain, ExprMetric, FdConfig, ScalarField};
use gbcurv::exprlang;
use gbcurv::models::{ModelManifold, ModelSpec};
use gbcurv::verify::{Suite, VerifyConfig};
use serde::{Deserialize, Serialize};

/// A single value or a list, as accepted for `n` and `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A metric written out entrywise on a coordinate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMetric {
    pub metric: Vec<Vec<String>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Manifold {
    Model(ModelSpec),
    Explicit(ExplicitMetric),
}

/// A manifold ready for computation: a chart, plus the model when there is one.
pub struct Built {
    pub name: String,
    pub chart: ChartMetric,
    pub model: Option<ModelManifold>,
}

impl Manifold {
    pub fn build(&self, fd: FdConfig) -> gbcurv::Result<Built> {
        match self {
            Manifold::Model(spec) => {
                let m = spec.build()?;
                let chart = m.chart().clone().with_fd(fd);
                Ok(Built { name: m.name().to_string(), chart, model: Some(m) })
            }
            Manifold::Explicit(e) => {
                let field = Arc::new(ExprMetric::parse(&e.metric)?);
                let domain = Domain::new(e.lo.clone(), e.hi.clone(), e.periodic.clone())?;
                let chart = ChartMetric::new(field, domain)?.with_fd(fd);
                Ok(Built { name: "explicit".into(), chart, model: None })
            }
        }
    }
}

/// The JSON run configuration. Every key is optional; command-line flags
/// override the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifold: Option<Manifold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_v: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub debug_corrupt_star: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// The verification settings, defaults filled in.
    pub fn verify_config(&self) -> VerifyConfig {
        let d = VerifyConfig::default();
        VerifyConfig {
            suite: self.suite.unwrap_or(d.suite),
            n: self.n.as_ref().map(OneOrMany::values),
            k: self.k.as_ref().map(OneOrMany::values),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
            resolution: self.resolution.unwrap_or(d.resolution),
            fd_order: self.fd_order.unwrap_or(d.fd_order),
            fd_step: self.fd_step.or(d.fd_step),
            tol: self.tol,
            tolerances: self.tolerances.clone(),
            f: self.f.clone().unwrap_or(d.f),
            v: self.v.clone().unwrap_or(d.v),
            sphere_v: self.sphere_v.clone().unwrap_or(d.sphere_v),
            phi: self.phi.clone().unwrap_or(d.phi),
            a: self.a.clone().unwrap_or(d.a),
            debug_corrupt_star: self.debug_corrupt_star.unwrap_or(false),
        }
    }
}

/// Parse a field and check it only uses coordinates of an `n`-dimensional chart.
pub fn field(text: &str, n: usize) -> gbcurv::Result<ScalarField> {
    let expr = exprlang::parse(text)?;
    expr.check_dim(n)?;
    Ok(ScalarField::from_expr(expr))
}

/// `4`, `4,5,6` or `4..6` (inclusive).
pub fn parse_list(s: &str) -> Result<OneOrMany, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok(OneOrMany::Many((a..=b).collect()));
    }
    let items = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    Ok(if items.len() == 1 { OneOrMany::One(items[0]) } else { OneOrMany::Many(items) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("5").unwrap(), OneOrMany::One(5));
        assert_eq!(parse_list("4..6").unwrap().values(), vec![4, 5, 6]);
        assert_eq!(parse_list("4,6").unwrap().values(), vec![4, 6]);
        assert!(parse_list("6..4").is_err());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn manifold_forms() {
        let m: Manifold = serde_json::from_str(r#"{"model":"sphere","n":4,"radius":1}"#).unwrap();
        assert!(matches!(m, Manifold::Model(_)));
        let e: Manifold = serde_json::from_str(
            r#"{"metric":[["1","0"],["0","exp(sin(x1))"]],"lo":[0,0],"hi":[6.283185307179586,6.283185307179586],"periodic":[true,true]}"#,
        )
        .unwrap();
        assert!(matches!(e, Manifold::Explicit(_)));
        assert!(serde_json::from_str::<Manifold>(r#"{"model":"sphere","n":4,"radius":1,"extra":0}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed":1}"#).is_err());
    }
}
