//! Central finite differences of vector-valued functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdOrder {
    Second,
    #[default]
    Fourth,
}

impl FdOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::Second),
            4 => Ok(Self::Fourth),
            _ => Err(Error::FdStep(format!("fd order must be 2 or 4, got {order}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::Second => 2,
            Self::Fourth => 4,
        }
    }

    /// Positive offsets `k` and weights `w` with
    /// `f' ~ sum w (f(+k) - f(-k)) / h`.
    fn first(self) -> &'static [(f64, f64)] {
        match self {
            Self::Second => &[(1.0, 0.5)],
            Self::Fourth => &[(1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)],
        }
    }

    /// Positive offsets `k` and weights `w` with
    /// `f'' ~ sum w (f(+k) + f(-k) - 2 f(0)) / h^2`.
    fn second(self) -> &'static [(f64, f64)] {
        match self {
            Self::Second => &[(1.0, 1.0)],
            Self::Fourth => &[(1.0, 4.0 / 3.0), (2.0, -1.0 / 12.0)],
        }
    }
}

/// Value, first and second partial derivatives of an `m`-component function.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: Vec<f64>,
    /// `first[i][c] = d_i F_c`
    pub first: Vec<Vec<f64>>,
    /// `second[i * n + j][c] = d_i d_j F_c`, symmetric in `(i, j)`.
    pub second: Vec<Vec<f64>>,
}

impl Jet {
    pub fn d2(&self, i: usize, j: usize) -> &[f64] {
        &self.second[i * self.first.len() + j]
    }
}

pub(crate) fn validate_steps(x: &[f64], steps: &[f64]) -> Result<()> {
    if steps.len() != x.len() {
        return Err(Error::DimensionMismatch(steps.len(), x.len()));
    }
    for (i, (&h, &xi)) in steps.iter().zip(x).enumerate() {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::FdStep(format!("step {h} on axis {} is not positive", i + 1)));
        }
        // Below this the stencil offsets are swamped by rounding of x itself.
        if h <= 1e3 * f64::EPSILON * xi.abs().max(1.0) {
            return Err(Error::FdStep(format!("step {h} on axis {} underflows at x = {xi}", i + 1)));
        }
    }
    Ok(())
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(axis, dx) in moves {
        y[axis] += dx;
    }
    y
}

/// Jet of `f` at `x` by central differences of the given order.
pub fn jet<F>(f: F, x: &[f64], steps: &[f64], order: FdOrder) -> Result<Jet>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    validate_steps(x, steps)?;
    let n = x.len();
    let value = f(x)?;
    let m = value.len();
    let mut first = vec![vec![0.0; m]; n];
    let mut second = vec![vec![0.0; m]; n * n];
    // Stencils are applied as differences against the mirrored point (and the
    // center), so constant components differentiate to exactly zero.
    for i in 0..n {
        let h = steps[i];
        for &(k, w) in order.second() {
            let fp = f(&shifted(x, &[(i, k * h)]))?;
            let fm = f(&shifted(x, &[(i, -k * h)]))?;
            let w1 = order.first().iter().find(|(b, _)| *b == k).map_or(0.0, |(_, w1)| *w1);
            for c in 0..m {
                second[i * n + i][c] += w * ((fp[c] - value[c]) + (fm[c] - value[c])) / (h * h);
                first[i][c] += w1 * (fp[c] - fm[c]) / h;
            }
        }
        for j in i + 1..n {
            let hj = steps[j];
            let mut acc = vec![0.0; m];
            for &(a, wa) in order.first() {
                let mut inner = vec![0.0; m];
                for &(b, wb) in order.first() {
                    let at = |sa: f64, sb: f64| f(&shifted(x, &[(i, sa * a * h), (j, sb * b * hj)]));
                    let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
                    for c in 0..m {
                        inner[c] += wb * ((pp[c] - pm[c]) - (mp[c] - mm[c]));
                    }
                }
                for c in 0..m {
                    acc[c] += wa * inner[c];
                }
            }
            for c in 0..m {
                acc[c] /= h * hj;
            }
            second[j * n + i] = acc.clone();
            second[i * n + j] = acc;
        }
    }
    Ok(Jet { value, first, second })
}
