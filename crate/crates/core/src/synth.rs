//! Seeded synthetic data with known conditional quantiles.
//!
//! All generators draw from `ChaCha8Rng`, so a seed fixes the output on every
//! platform.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{DesignMatrix, Quarter, TimeSeriesPanel};
use crate::{Error, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-median noise laws with closed-form quantile functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    /// `F^{-1}(tau) = scale * ln(tau / (1 - tau))`.
    Logistic { scale: f64 },
    /// `F^{-1}(tau) = scale * tan(pi (tau - 1/2))`.
    Cauchy { scale: f64 },
    /// Two exponential halves glued at zero with mass `left / (left + right)`
    /// below it; `left < right` skews to the right.
    TwoPieceExponential { left: f64, right: f64 },
}

impl Noise {
    pub fn quantile(&self, tau: f64) -> f64 {
        match *self {
            Noise::Logistic { scale } => scale * (tau / (1.0 - tau)).ln(),
            Noise::Cauchy { scale } => scale * (std::f64::consts::PI * (tau - 0.5)).tan(),
            Noise::TwoPieceExponential { left, right } => {
                let p = left / (left + right);
                let raw = if tau < p {
                    left * (tau / p).ln()
                } else {
                    -right * ((1.0 - tau) / (1.0 - p)).ln()
                };
                raw - self.median_offset()
            }
        }
    }

    fn median_offset(&self) -> f64 {
        match *self {
            Noise::Logistic { .. } | Noise::Cauchy { .. } => 0.0,
            Noise::TwoPieceExponential { left, right } => {
                let p = left / (left + right);
                if 0.5 < p {
                    left * (0.5 / p).ln()
                } else {
                    -right * (0.5 / (1.0 - p)).ln()
                }
            }
        }
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        self.quantile(u)
    }
}

/// `y_{t+1} = a + b'x_t + (c + d'x_t) e_{t+1}` with regressors bounded in
/// `[0, 1]`, so the conditional tau-quantile is
/// `a + b'x_t + (c + d'x_t) F^{-1}(tau)`, linear in `x_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationScaleDgp {
    pub intercept: f64,
    pub location: Vec<f64>,
    pub scale_intercept: f64,
    pub scale: Vec<f64>,
    pub noise: Noise,
    /// AR(1) persistence of the regressors.
    pub persistence: f64,
}

impl Default for LocationScaleDgp {
    fn default() -> Self {
        Self {
            intercept: 1.0,
            location: vec![2.0, -1.0],
            scale_intercept: 0.5,
            scale: vec![1.0, 0.0],
            noise: Noise::TwoPieceExponential { left: 0.5, right: 1.0 },
            persistence: 0.5,
        }
    }
}

impl LocationScaleDgp {
    pub fn n_regressors(&self) -> usize {
        self.location.len()
    }

    fn check(&self) -> Result<()> {
        if self.scale.len() != self.location.len() {
            return Err(Error::Parameter("location and scale loadings differ in length".into()));
        }
        if !(0.0..1.0).contains(&self.persistence) {
            return Err(Error::Parameter("persistence must lie in [0, 1)".into()));
        }
        // Scale must stay positive on the unit box.
        let worst = self.scale_intercept + self.scale.iter().map(|d| d.min(0.0)).sum::<f64>();
        if worst <= 0.0 {
            return Err(Error::Parameter("conditional scale not positive on [0, 1]^K".into()));
        }
        Ok(())
    }

    pub fn conditional_quantile(&self, x: &[f64], tau: f64) -> f64 {
        let loc = self.intercept + dot(&self.location, x);
        let sc = self.scale_intercept + dot(&self.scale, x);
        loc + sc * self.noise.quantile(tau)
    }

    /// Regressor paths `x_t` (rows) and the response series aligned so that
    /// `y[t]` depends on `x[t - 1]`; `y[0]` uses a burn-in draw.
    pub fn simulate(&self, len: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        self.check()?;
        let mut r = rng(seed);
        let k = self.n_regressors();
        let phi = self.persistence;
        let mut prev: Vec<f64> = (0..k).map(|_| r.random::<f64>()).collect();
        let mut xs = Vec::with_capacity(len);
        let mut ys = Vec::with_capacity(len);
        for _ in 0..len {
            let e = self.noise.sample(&mut r);
            let y = self.intercept
                + dot(&self.location, &prev)
                + (self.scale_intercept + dot(&self.scale, &prev)) * e;
            let x: Vec<f64> = prev.iter().map(|p| phi * p + (1.0 - phi) * r.random::<f64>()).collect();
            ys.push(y);
            xs.push(x.clone());
            prev = x;
        }
        Ok((xs, ys))
    }

    /// Quarterly panel with columns `y`, `x1..xK`, starting 1990Q1.
    pub fn panel(&self, len: usize, seed: u64) -> Result<TimeSeriesPanel> {
        let (xs, ys) = self.simulate(len, seed)?;
        let mut cols = vec![("y".to_string(), ys)];
        for j in 0..self.n_regressors() {
            cols.push((format!("x{}", j + 1), xs.iter().map(|x| x[j]).collect()));
        }
        TimeSeriesPanel::from_complete(Quarter::new(1990, 1)?, cols)
    }
}

/// Cross-sectional sparse design: `K` uniform regressors, only the listed ones
/// shift the location. Heavy-tailed noise by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDgp {
    pub n_regressors: usize,
    /// `(index, coefficient)` pairs.
    pub active: Vec<(usize, f64)>,
    pub noise: Noise,
}

impl Default for SparseDgp {
    fn default() -> Self {
        Self {
            n_regressors: 6,
            active: vec![(0, 3.0), (1, -3.0)],
            noise: Noise::Cauchy { scale: 0.1 },
        }
    }
}

impl SparseDgp {
    pub fn design(&self, n: usize, seed: u64) -> Result<DesignMatrix> {
        let mut r = rng(seed);
        let k = self.n_regressors;
        let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| r.random::<f64>()).collect()).collect();
        let y = raw
            .iter()
            .map(|x| {
                let loc: f64 = self.active.iter().map(|&(j, b)| b * x[j]).sum();
                1.0 + loc + self.noise.sample(&mut r)
            })
            .collect();
        let names: Vec<String> = (0..k).map(|j| format!("x{}", j + 1)).collect();
        DesignMatrix::from_raw(&names, raw, y)
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active.iter().any(|&(i, _)| i == j)
    }
}

/// Three-variable Gaussian VAR(1) whose coupling switches on halfway.
///
/// Before the switch the lag matrix and innovation covariance are diagonal, so
/// the generalized variance decomposition is the identity and total
/// spillover is zero. After it, every variable loads on the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSwitchVar {
    pub own_lag: f64,
    pub cross_lag: f64,
    pub correlation: f64,
}

impl Default for RegimeSwitchVar {
    fn default() -> Self {
        Self {
            own_lag: 0.4,
            cross_lag: 0.25,
            correlation: 0.5,
        }
    }
}

impl RegimeSwitchVar {
    pub fn lag_matrix(&self, coupled: bool) -> DMatrix<f64> {
        let c = if coupled { self.cross_lag } else { 0.0 };
        DMatrix::from_fn(3, 3, |i, j| if i == j { self.own_lag } else { c })
    }

    pub fn covariance(&self, coupled: bool) -> DMatrix<f64> {
        let r = if coupled { self.correlation } else { 0.0 };
        DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { r })
    }

    /// `len` observations; the coupled regime starts at `len / 2`.
    pub fn simulate(&self, len: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
        let mut r = rng(seed);
        let chol = |coupled| {
            self.covariance(coupled)
                .cholesky()
                .map(|c| c.l())
                .ok_or_else(|| Error::Parameter("innovation covariance not positive definite".into()))
        };
        let (l0, l1) = (chol(false)?, chol(true)?);
        let (a0, a1) = (self.lag_matrix(false), self.lag_matrix(true));
        let mut y = DVector::zeros(3);
        let mut out = Vec::with_capacity(len);
        for t in 0..len {
            let coupled = t >= len / 2;
            let z = DVector::from_fn(3, |_, _| r.sample::<f64, _>(StandardNormal));
            let (a, l) = if coupled { (&a1, &l1) } else { (&a0, &l0) };
            y = a * &y + l * z;
            out.push([y[0], y[1], y[2]]);
        }
        Ok(out)
    }
}

/// Panel for the end-to-end pipeline: a house-price index level `hpi` whose
/// log growth follows a location-scale model in the previous quarter's credit
/// growth (`credit` is the level), rate `rate` and stress index `stress`,
/// plus an `sri` series.
pub fn pipeline_panel(len: usize, seed: u64) -> Result<TimeSeriesPanel> {
    let mut r = rng(seed);
    let noise = Noise::TwoPieceExponential { left: 0.8, right: 0.5 };
    let mut hpi = 100.0_f64;
    let mut credit_level = 100.0_f64;
    let (mut rate, mut stress, mut sri) = (3.0_f64, 0.2_f64, 0.0_f64);
    let mut credit_growth = 0.8_f64;
    let mut cols: [Vec<f64>; 5] = Default::default();
    for _ in 0..len {
        let n1: f64 = r.sample(StandardNormal);
        let n2: f64 = r.sample(StandardNormal);
        let n3: f64 = r.sample(StandardNormal);
        let n4: f64 = r.sample(StandardNormal);
        // House prices respond to last quarter's conditions.
        let growth = 0.5 + 0.6 * credit_growth - 0.3 * rate + (0.6 + 3.0 * stress) * noise.sample(&mut r);
        credit_growth = 0.5 * credit_growth + 0.4 + 0.4 * n1;
        rate = (0.9 * rate + 0.3 + 0.25 * n2).max(0.0);
        stress = (0.85 * stress + 0.03 + 0.12 * n3).clamp(0.0, 1.0);
        sri = 0.8 * sri + 0.2 * credit_growth + 0.3 * n4;
        hpi *= (growth / 100.0).exp();
        credit_level *= (credit_growth / 100.0).exp();
        cols[0].push(round6(hpi));
        cols[1].push(round6(credit_level));
        cols[2].push(round6(rate));
        cols[3].push(round6(stress));
        cols[4].push(round6(sri));
    }
    let names = ["hpi", "credit", "rate", "stress", "sri"];
    TimeSeriesPanel::from_complete(
        Quarter::new(1995, 1)?,
        names.iter().map(|s| s.to_string()).zip(cols).collect(),
    )
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
