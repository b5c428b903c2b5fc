use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr};

type Callback = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A smooth function on a chart: a parsed expression or a closure, plus the
/// set of coordinates it depends on (`None` means possibly all of them).
#[derive(Clone)]
pub struct ScalarField {
    f: Callback,
    axes: Option<BTreeSet<usize>>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

fn union(a: &Option<BTreeSet<usize>>, b: &Option<BTreeSet<usize>>) -> Option<BTreeSet<usize>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.union(b).copied().collect()),
        _ => None,
    }
}

impl ScalarField {
    pub fn new(
        label: impl Into<String>,
        axes: Option<BTreeSet<usize>>,
        f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), axes, label: label.into() }
    }

    pub fn from_expr(expr: Expr) -> Self {
        let axes = Some(expr.variables());
        let label = expr.to_string();
        Self::new(label, axes, move |x| expr.eval(x))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_expr(parse(text)?))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c.to_string(), Some(BTreeSet::new()), move |_| Ok(c))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        (self.f)(x)
    }

    pub fn axes(&self) -> Option<&BTreeSet<usize>> {
        self.axes.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.f.clone(), other.f.clone());
        let label = format!("({}) + ({})", self.label, other.label);
        Self::new(label, union(&self.axes, &other.axes), move |x| Ok(a(x)? + b(x)?))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.f.clone(), other.f.clone());
        let label = format!("({})*({})", self.label, other.label);
        Self::new(label, union(&self.axes, &other.axes), move |x| Ok(a(x)? * b(x)?))
    }

    /// `g(self)` pointwise; `name` is used for the label only.
    pub fn map(&self, name: &str, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let a = self.f.clone();
        let label = format!("{name}({})", self.label);
        Self::new(label, self.axes.clone(), move |x| {
            let v = g(a(x)?);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Eval(format!("non-finite value at {x:?}")))
            }
        })
    }

    /// `self^p`; errors where `self <= 0` unless `p` is an integer.
    pub fn powf(&self, p: f64) -> Self {
        self.map(&format!("pow[{p}]"), move |v| if p == p.round() { v.powi(p as i32) } else { v.powf(p) })
    }
}

/// A Riemannian metric on a coordinate chart, `x -> g(x)`.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// Coordinates `g` depends on (`None`: possibly all).
    fn axes(&self) -> Option<BTreeSet<usize>> {
        None
    }
}

/// The Euclidean metric.
#[derive(Debug, Clone, Copy)]
pub struct FlatMetric(pub usize);

impl MetricField for FlatMetric {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.0, self.0))
    }

    fn axes(&self) -> Option<BTreeSet<usize>> {
        Some(BTreeSet::new())
    }
}

/// Metric given entrywise by expressions; must be symmetric as written.
#[derive(Debug, Clone)]
pub struct ExprMetric {
    n: usize,
    entries: Vec<Expr>,
}

impl ExprMetric {
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Precondition("metric must be a non-empty square matrix".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::Precondition(format!(
                        "metric entries ({},{}) and ({},{}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let entries: Vec<Expr> = entries.into_iter().flatten().collect();
        for e in &entries {
            e.check_dim(n)?;
        }
        Ok(Self { n, entries })
    }

    pub fn parse(rows: &[Vec<String>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }
}

impl MetricField for ExprMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let vals = self.entries.iter().map(|e| e.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_row_slice(self.n, self.n, &vals))
    }

    fn axes(&self) -> Option<BTreeSet<usize>> {
        Some(self.entries.iter().flat_map(|e| e.variables()).collect())
    }
}

/// `weight(x) * base(x)`.
#[derive(Clone)]
pub struct ConformalMetric {
    pub base: Arc<dyn MetricField>,
    pub weight: ScalarField,
}

impl MetricField for ConformalMetric {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let w = self.weight.eval(x)?;
        Ok(self.base.eval(x)? * w)
    }

    fn axes(&self) -> Option<BTreeSet<usize>> {
        union(&self.base.axes(), &self.weight.axes().cloned())
    }
}

/// Riemannian product; the second factor uses the trailing coordinates.
#[derive(Clone)]
pub struct BlockMetric {
    pub first: Arc<dyn MetricField>,
    pub second: Arc<dyn MetricField>,
}

impl MetricField for BlockMetric {
    fn dim(&self) -> usize {
        self.first.dim() + self.second.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let (n1, n) = (self.first.dim(), self.dim());
        let mut g = DMatrix::zeros(n, n);
        g.view_mut((0, 0), (n1, n1)).copy_from(&self.first.eval(&x[..n1])?);
        g.view_mut((n1, n1), (n - n1, n - n1)).copy_from(&self.second.eval(&x[n1..])?);
        Ok(g)
    }

    fn axes(&self) -> Option<BTreeSet<usize>> {
        let n1 = self.first.dim();
        let shifted = self.second.axes().map(|s| s.into_iter().map(|i| i + n1).collect());
        union(&self.first.axes(), &shifted)
    }
}
