//! Uncertainty, skewness and tail expectations of a fitted conditional
//! distribution.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{format_float, DesignMatrix, Quarter};
use crate::ncqr::{QuantileFit, QuantileGrid};
use crate::{Error, Result};

pub fn uncertainty(q10: f64, q90: f64) -> Result<f64> {
    if q90 < q10 {
        return Err(Error::Invariant(format!("upper quantile {q90} below lower quantile {q10}")));
    }
    Ok(q90 - q10)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skewness {
    pub value: f64,
    /// `q90 == q10`; `value` is then 0.
    pub degenerate: bool,
}

pub fn skewness(q10: f64, q50: f64, q90: f64) -> Skewness {
    let width = q90 - q10;
    if !(width > 0.0) {
        return Skewness { value: 0.0, degenerate: true };
    }
    let s = ((q90 - q50) - (q50 - q10)) / width;
    Skewness {
        value: s.clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// `(left, right)` with `left + right == u` exactly.
pub fn decompose(u: f64, s: f64) -> (f64, f64) {
    let left = u * (1.0 - s) / 2.0;
    (left, u - left)
}

/// Piecewise-linear quantile function through the grid points, extended
/// linearly to `(0, 1)` with the slope of the adjacent segment (never
/// negative).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    /// Knots including the extrapolated ends at 0 and 1.
    knots: Vec<(f64, f64)>,
}

impl QuantileFunction {
    pub fn new(taus: &QuantileGrid, values: &[f64]) -> Result<Self> {
        let t = taus.taus();
        if values.len() != t.len() {
            return Err(Error::Parameter(format!(
                "{} quantile values for {} levels",
                values.len(),
                t.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("quantile values must be finite".into()));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::Invariant(format!("quantile values decrease: {} then {}", w[0], w[1])));
        }
        let q = t.len();
        let slope = |a: usize, b: usize| ((values[b] - values[a]) / (t[b] - t[a])).max(0.0);
        let (lo_slope, hi_slope) = if q >= 2 { (slope(0, 1), slope(q - 2, q - 1)) } else { (0.0, 0.0) };
        let mut knots = Vec::with_capacity(q + 2);
        knots.push((0.0, values[0] - lo_slope * t[0]));
        knots.extend(t.iter().copied().zip(values.iter().copied()));
        knots.push((1.0, values[q - 1] + hi_slope * (1.0 - t[q - 1])));
        Ok(Self { knots })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|&(t, _)| t <= u).clamp(1, self.knots.len() - 1);
        let ((t0, v0), (t1, v1)) = (self.knots[i - 1], self.knots[i]);
        if t1 == t0 {
            return v1;
        }
        v0 + (v1 - v0) * (u - t0) / (t1 - t0)
    }

    /// Exact integral over `[a, b]` within `[0, 1]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        for w in self.knots.windows(2) {
            let (lo, hi) = (w[0].0.max(a), w[1].0.min(b));
            if hi > lo {
                total += (hi - lo) * (self.eval(lo) + self.eval(hi)) / 2.0;
            }
        }
        total
    }
}

/// Mean of the distribution below its `alpha` quantile.
pub fn expected_shortfall(qf: &QuantileFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("tail level {alpha} outside (0, 1)")));
    }
    Ok(qf.integral(0.0, alpha) / alpha)
}

/// Mean of the distribution above its `alpha` quantile.
pub fn expected_longrise(qf: &QuantileFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("tail level {alpha} outside (0, 1)")));
    }
    Ok(qf.integral(alpha, 1.0) / (1.0 - alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskOptions {
    pub lower: f64,
    pub upper: f64,
    pub es_alpha: f64,
    pub el_alpha: f64,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            lower: 0.1,
            upper: 0.9,
            es_alpha: 0.05,
            el_alpha: 0.95,
        }
    }
}

impl RiskOptions {
    pub fn validate(&self) -> Result<()> {
        let inside = |v: f64| v > 0.0 && v < 1.0;
        if !(inside(self.lower) && inside(self.upper) && self.lower < 0.5 && 0.5 < self.upper) {
            return Err(Error::Parameter(format!(
                "uncertainty levels must satisfy 0 < lower < 0.5 < upper < 1, got {} and {}",
                self.lower, self.upper
            )));
        }
        if !(inside(self.es_alpha) && inside(self.el_alpha) && self.es_alpha < self.el_alpha) {
            return Err(Error::Parameter("tail levels must satisfy 0 < es < el < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub u: f64,
    pub s: f64,
    pub left: f64,
    pub right: f64,
    pub es: f64,
    pub el: f64,
    pub degenerate: bool,
}

pub fn risk_point(taus: &QuantileGrid, values: &[f64], options: &RiskOptions) -> Result<RiskPoint> {
    let qf = QuantileFunction::new(taus, values)?;
    let (lo, mid, hi) = (qf.eval(options.lower), qf.eval(0.5), qf.eval(options.upper));
    let sk = skewness(lo, mid, hi);
    let (left, right) = decompose(uncertainty(lo, hi)?, sk.value);
    // Reported as the sum so the decomposition adds up exactly.
    let u = left + right;
    let (es, el) = if sk.degenerate {
        (mid, mid)
    } else {
        (
            expected_shortfall(&qf, options.es_alpha)?,
            expected_longrise(&qf, options.el_alpha)?,
        )
    };
    Ok(RiskPoint {
        u,
        s: sk.value,
        left,
        right,
        es,
        el,
        degenerate: sk.degenerate,
    })
}

/// One risk point per date.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskSeries {
    pub dates: Vec<Quarter>,
    pub points: Vec<RiskPoint>,
}

impl RiskSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# columns: date,U,S,left,right,ES,EL")?;
        writeln!(out, "date,U,S,left,right,ES,EL")?;
        for (d, p) in self.dates.iter().zip(&self.points) {
            let v: Vec<String> = [p.u, p.s, p.left, p.right, p.es, p.el].iter().map(|x| format_float(*x)).collect();
            writeln!(out, "{d},{}", v.join(","))?;
        }
        Ok(())
    }
}

/// Risk measures of the in-sample fitted quantiles, dated by the design row
/// (the conditioning date).
pub fn fitted_risk(fit: &QuantileFit, design: &DesignMatrix, options: &RiskOptions) -> Result<RiskSeries> {
    options.validate()?;
    let mut series = RiskSeries::default();
    for (row, date) in design.predictors.iter().zip(&design.row_dates) {
        let mut values = fit.evaluate_scaled(row);
        // Joint fits order quantiles up to solver round-off.
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                if values[i - 1] - values[i] > 1e-7 {
                    return Err(Error::Invariant(format!("fitted quantiles cross at {date}")));
                }
                values[i] = values[i - 1];
            }
        }
        series.dates.push(*date);
        series.points.push(risk_point(&fit.taus, &values, options)?);
    }
    Ok(series)
}
