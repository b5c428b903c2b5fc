//! Verification suites: every identity in [`catalog::CATALOG`] evaluated over
//! seeded random inputs, closed-form models and chart samples, collected
//! into a deterministic report.

pub mod catalog;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{FdConfig, FdOrder};
use crate::curvinv::Check;
use crate::error::{Error, Result};
use crate::exec::Exec;

pub use catalog::{identities, identity, Identity, CATALOG};
pub use suites::{conformal_rows, ConformalInputs, Evaluation};

/// Report format version; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Algebra,
    CurvatureIdentities,
    Newton,
    ConformalPointwise,
    ConformalIntegral,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Algebra,
        Suite::CurvatureIdentities,
        Suite::Newton,
        Suite::ConformalPointwise,
        Suite::ConformalIntegral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::CurvatureIdentities => "curvature-identities",
            Suite::Newton => "newton",
            Suite::ConformalPointwise => "conformal-pointwise",
            Suite::ConformalIntegral => "conformal-integral",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Parameters of a row; unset fields are omitted from the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Trial or sample index of the worst residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// For not-applicable rows: how far the precondition is from holding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

/// One reported identity evaluation. `residual` is the relative residual
/// and `status` is `fail` exactly when it exceeds `tolerance` (or is NaN).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub id: String,
    pub anchor: String,
    pub params: Params,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
}

impl Row {
    pub fn from_check(identity: &Identity, params: Params, check: Check, tolerance: f64) -> Self {
        let residual = check.relative();
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self {
            id: identity.id.to_string(),
            anchor: identity.anchor.to_string(),
            params,
            lhs: Some(check.lhs),
            rhs: Some(check.rhs),
            residual,
            tolerance,
            status,
        }
    }

    /// `value > bound` (strict) or `value >= bound - tolerance`; the residual
    /// is the amount of violation.
    pub fn inequality(
        identity: &Identity,
        params: Params,
        value: f64,
        bound: f64,
        strict: bool,
        tolerance: f64,
    ) -> Self {
        let violated = if strict { !(value > bound) } else { !(value >= bound - tolerance) };
        let residual = if violated { (bound - value).abs().max(f64::MIN_POSITIVE) } else { 0.0 };
        let status = if violated { Status::Fail } else { Status::Pass };
        Self {
            id: identity.id.to_string(),
            anchor: identity.anchor.to_string(),
            params,
            lhs: Some(value),
            rhs: Some(bound),
            residual,
            tolerance,
            status,
        }
    }

    pub fn not_applicable(identity: &Identity, mut params: Params, deviation: f64, tolerance: f64) -> Self {
        params.deviation = Some(deviation);
        Self {
            id: identity.id.to_string(),
            anchor: identity.anchor.to_string(),
            params,
            lhs: None,
            rhs: None,
            residual: 0.0,
            tolerance,
            status: Status::NotApplicable,
        }
    }
}

fn default_f() -> String {
    "0.1*sin(x1)*cos(x2)".into()
}
fn default_v() -> String {
    "1.2 + 0.1*sin(x1)".into()
}
fn default_sphere_v() -> String {
    "1 + 0.1*x1*x2 + 0.05*x3^2".into()
}
fn default_phi() -> String {
    "0.05*cos(x1 + x2)".into()
}
fn default_a() -> String {
    "1 + 0.1*sin(x1)*cos(x2)".into()
}

/// Everything that determines a verification run. Worker count is not part
/// of it: reports do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    /// Dimensions for the algebraic suites (default 4..=8). The chart suites
    /// run on fixed dimensions (4 and 5) and keep those listed here.
    pub n: Option<Vec<usize>>,
    /// Restrict the degree `k` where an identity has one.
    pub k: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    /// Chart sample points per pointwise identity.
    pub samples: usize,
    /// Grid points per active axis for quadrature.
    pub resolution: usize,
    pub fd_order: u32,
    pub fd_step: Option<f64>,
    /// Replaces every default tolerance.
    pub tol: Option<f64>,
    /// Per-identity tolerances, taking precedence over `tol`.
    pub tolerances: BTreeMap<String, f64>,
    /// Conformal exponent on flat `T^4`.
    #[serde(default = "default_f")]
    pub f: String,
    /// Positive conformal factor on flat `T^5`.
    #[serde(default = "default_v")]
    pub v: String,
    /// Positive conformal factor on the `S^5` chart.
    #[serde(default = "default_sphere_v")]
    pub sphere_v: String,
    /// Second field for the cocycle identity.
    #[serde(default = "default_phi")]
    pub phi: String,
    /// Positive factor for bi-degree covariance.
    #[serde(default = "default_a")]
    pub a: String,
    /// Negative control: use a Hodge star with one wrong sign.
    pub debug_corrupt_star: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            n: None,
            k: None,
            trials: 20,
            seed: 1,
            samples: 8,
            resolution: 16,
            fd_order: 4,
            fd_step: None,
            tol: None,
            tolerances: BTreeMap::new(),
            f: default_f(),
            v: default_v(),
            sphere_v: default_sphere_v(),
            phi: default_phi(),
            a: default_a(),
            debug_corrupt_star: false,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(ns) = &self.n {
            if let Some(&bad) = ns.iter().find(|&&n| !(2..=crate::dfalg::MAX_DIM).contains(&n)) {
                return Err(Error::Dimension(bad));
            }
        }
        if self.trials == 0 || self.samples == 0 || self.resolution == 0 {
            return Err(Error::Precondition("trials, samples and resolution must be positive".into()));
        }
        FdOrder::from_int(self.fd_order)?;
        if let Some(h) = self.fd_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::FdStep(format!("step {h} is not positive")));
            }
        }
        for (id, &t) in &self.tolerances {
            if !CATALOG.iter().any(|i| i.id == id) {
                return Err(Error::Precondition(format!("tolerance given for unknown identity {id:?}")));
            }
            if !(t >= 0.0) {
                return Err(Error::Precondition(format!("tolerance for {id} must be non-negative")));
            }
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(Error::Precondition("tolerance must be non-negative".into()));
            }
        }
        Ok(())
    }

    pub fn fd(&self) -> Result<FdConfig> {
        Ok(FdConfig { order: FdOrder::from_int(self.fd_order)?, step: self.fd_step })
    }

    pub fn tolerance(&self, identity: &Identity) -> f64 {
        self.tolerances.get(identity.id).copied().or(self.tol).unwrap_or(identity.tolerance)
    }

    fn dims(&self, default: &[usize]) -> Vec<usize> {
        match &self.n {
            Some(ns) => ns.clone(),
            None => default.to_vec(),
        }
    }

    fn keeps_k(&self, k: usize) -> bool {
        self.k.as_ref().is_none_or(|ks| ks.contains(&k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    /// Largest relative residual per identity id.
    pub max_residual: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Summary {
    pub fn of(rows: &[Row]) -> Self {
        let mut max_residual = BTreeMap::new();
        for r in rows {
            let e = max_residual.entry(r.id.clone()).or_insert(0.0f64);
            // NaN residuals must stay visible.
            if r.residual.is_nan() || r.residual > *e {
                *e = r.residual;
            }
        }
        let count = |s| rows.iter().filter(|r| r.status == s).count();
        Self {
            total: rows.len(),
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            not_applicable: count(Status::NotApplicable),
            max_residual,
            wall_time_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: VerifyConfig,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }
}

/// Run the configured suite(s).
pub fn run(config: &VerifyConfig, exec: Exec) -> Result<VerificationReport> {
    config.validate()?;
    let suites: Vec<Suite> = if config.suite == Suite::All { Suite::EACH.to_vec() } else { vec![config.suite] };
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(suites::run_suite(s, config, exec)?);
    }
    let summary = Summary::of(&rows);
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        rows,
        summary,
    })
}

/// Independent stream per (seed, tag, n, trial).
pub(crate) fn rng_for(seed: u64, tag: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag.wrapping_mul(0x1_0000).wrapping_add(n as u64));
    rng.set_word_pos(trial as u128 * (1 << 20));
    rng
}

/// Either a checked identity or a precondition that does not hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outcome {
    Checked(Check),
    NotApplicable(f64),
}

impl From<Check> for Outcome {
    fn from(c: Check) -> Self {
        Outcome::Checked(c)
    }
}

/// Worst outcome per key over trials, in first-seen key order.
#[derive(Debug, Default)]
pub(crate) struct Aggregate {
    entries: Vec<(Key, Outcome, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Key {
    pub id: &'static str,
    pub params: Params,
}

impl Aggregate {
    pub fn add(&mut self, key: Key, outcome: Outcome, trial: usize) {
        match self.entries.iter_mut().find(|(k, _, _)| *k == key) {
            None => self.entries.push((key, outcome, trial)),
            Some((_, current, at)) => {
                let replace = match (*current, outcome) {
                    (Outcome::Checked(a), Outcome::Checked(b)) => {
                        b.relative() > a.relative() || (b.relative().is_nan() && !a.relative().is_nan())
                    }
                    (Outcome::NotApplicable(_), Outcome::Checked(_)) => true,
                    (Outcome::NotApplicable(a), Outcome::NotApplicable(b)) => b < a,
                    (Outcome::Checked(_), Outcome::NotApplicable(_)) => false,
                };
                if replace {
                    *current = outcome;
                    *at = trial;
                }
            }
        }
    }

    pub fn rows(self, config: &VerifyConfig, shared: &Params) -> Vec<Row> {
        self.entries
            .into_iter()
            .map(|(key, outcome, at)| {
                let ident = identity(key.id);
                let tol = config.tolerance(ident);
                let mut params = key.params;
                params.seed = params.seed.or(shared.seed);
                params.trials = params.trials.or(shared.trials);
                params.worst = Some(at);
                match outcome {
                    Outcome::Checked(c) => Row::from_check(ident, params, c, tol),
                    Outcome::NotApplicable(d) => Row::not_applicable(ident, params, d, tol),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn fail_iff_residual_exceeds_tolerance() {
        let id = identity("avez-classic");
        let ok = Row::from_check(id, Params::default(), Check::scalar(1.0, 1.0 + 1e-12), 1e-9);
        assert_eq!(ok.status, Status::Pass);
        let bad = Row::from_check(id, Params::default(), Check::scalar(1.0, 2.0), 1e-9);
        assert_eq!(bad.status, Status::Fail);
        let nan = Row::from_check(id, Params::default(), Check::scalar(f64::NAN, 2.0), 1e-9);
        assert_eq!(nan.status, Status::Fail);
        let strict = Row::inequality(identity("sign-h4"), Params::default(), 0.0, 0.0, true, 0.0);
        assert_eq!(strict.status, Status::Fail);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let cfg: VerifyConfig = serde_json::from_str(r#"{"suite":"newton","trials":3}"#).unwrap();
        assert_eq!(cfg.suite, Suite::Newton);
        assert_eq!(cfg.f, default_f());
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"trails":3}"#).is_err());
        let bad = VerifyConfig { fd_order: 3, ..VerifyConfig::default() };
        assert!(bad.validate().is_err());
        let mut unknown = VerifyConfig::default();
        unknown.tolerances.insert("nope".into(), 1.0);
        assert!(unknown.validate().is_err());
    }
}
