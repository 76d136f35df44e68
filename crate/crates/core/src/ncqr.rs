//! Linear quantile regression, independent and jointly non-crossing.
//!
//! All quantiles of a joint fit are stacked into a single linear program.
//! Writing `gamma_q = beta_q - beta_{q-1}` for the quantile differences, the
//! fitted curves cannot cross anywhere on `[0, 1]^K` when
//!
//! ```text
//! gamma_{0,q} >= sum_j max(0, -gamma_{j,q})      q = 2..Q
//! ```
//!
//! which is linear once the negative parts get their own variables. The
//! program is solved through its dual: each residual pair `(u+, u-)` of the
//! primal becomes a single dual variable boxed in `[tau - 1, tau]`, so the
//! tableau has one row per coefficient rather than one per observation. The
//! coefficients are then the (negated) row multipliers of the dual.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{format_float, DesignMatrix, ScalingParams};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, SolveOptions};

/// Coefficients with magnitude at or below this count as not selected.
pub const SELECTION_EPS: f64 = 1e-6;

/// Strictly increasing quantile levels in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileGrid {
    taus: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Parameter("quantile grid is empty".into()));
        }
        if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::Parameter(format!("quantile level {t} outside (0, 1)")));
        }
        if taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("quantile levels must be strictly increasing".into()));
        }
        Ok(Self { taus })
    }

    /// `{0.1, 0.2, ..., 0.9}`
    pub fn deciles() -> Self {
        Self {
            taus: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Position of `tau` in the grid, matched to 1e-12.
    pub fn index_of(&self, tau: f64) -> Option<usize> {
        self.taus.iter().position(|t| (t - tau).abs() < 1e-12)
    }
}

impl Default for QuantileGrid {
    fn default() -> Self {
        Self::deciles()
    }
}

impl TryFrom<Vec<f64>> for QuantileGrid {
    type Error = Error;

    fn try_from(taus: Vec<f64>) -> Result<Self> {
        Self::new(taus)
    }
}

impl From<QuantileGrid> for Vec<f64> {
    fn from(g: QuantileGrid) -> Self {
        g.taus
    }
}

/// The check function `rho_tau(u) = u * (tau - 1{u < 0})`.
pub fn pinball_loss(u: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Parameter(format!("quantile level {tau} outside (0, 1)")));
    }
    Ok(check_loss(u, tau))
}

#[inline]
pub(crate) fn check_loss(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        (tau - 1.0) * u
    } else {
        tau * u
    }
}

/// Coefficients of `Q` quantile regressions on the scaled domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFit {
    pub taus: QuantileGrid,
    pub regressors: Vec<String>,
    /// `Q x (K + 1)`, intercept first.
    pub betas: Vec<Vec<f64>>,
    /// Quantile differences; row `q` is `betas[q] - betas[q - 1]`.
    pub gammas: Vec<Vec<f64>>,
    pub scaling: ScalingParams,
    /// `Q x K`; true where `|beta| > SELECTION_EPS`.
    pub selection_mask: Vec<Vec<bool>>,
}

/// Quantile predictions for one predictor vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub quantiles: Vec<f64>,
    /// Some scaled coordinate fell outside `[0, 1]`; monotonicity in `tau`
    /// is only guaranteed inside the box.
    pub out_of_domain: bool,
}

impl QuantileFit {
    pub(crate) fn from_betas(
        taus: QuantileGrid,
        betas: Vec<Vec<f64>>,
        scaling: ScalingParams,
    ) -> Self {
        let gammas = betas
            .iter()
            .enumerate()
            .map(|(q, b)| {
                if q == 0 {
                    b.clone()
                } else {
                    b.iter().zip(&betas[q - 1]).map(|(x, y)| x - y).collect()
                }
            })
            .collect();
        let selection_mask = betas
            .iter()
            .map(|b| b[1..].iter().map(|v| v.abs() > SELECTION_EPS).collect())
            .collect();
        Self {
            taus,
            regressors: scaling.columns.iter().map(|c| c.name.clone()).collect(),
            betas,
            gammas,
            scaling,
            selection_mask,
        }
    }

    pub fn n_quantiles(&self) -> usize {
        self.betas.len()
    }

    pub fn n_regressors(&self) -> usize {
        self.scaling.len()
    }

    /// `x' beta_q` for a row already on the scaled domain (intercept first).
    pub fn evaluate_scaled(&self, row: &[f64]) -> Vec<f64> {
        self.betas
            .iter()
            .map(|b| b.iter().zip(row).map(|(c, x)| c * x).sum())
            .collect()
    }

    /// In-sample fitted quantiles, one vector per design row.
    pub fn fitted(&self, design: &DesignMatrix) -> Vec<Vec<f64>> {
        design.predictors.iter().map(|r| self.evaluate_scaled(r)).collect()
    }

    /// Total check loss per quantile over the design.
    pub fn pinball_losses(&self, design: &DesignMatrix) -> Vec<f64> {
        let mut totals = vec![0.0; self.n_quantiles()];
        for (row, y) in design.predictors.iter().zip(&design.response) {
            for (q, fitted) in self.evaluate_scaled(row).into_iter().enumerate() {
                totals[q] += check_loss(y - fitted, self.taus.taus()[q]);
            }
        }
        totals
    }

    /// Largest `x' beta_{q-1} - x' beta_q` over design rows; positive values
    /// are crossings.
    pub fn max_crossing(&self, design: &DesignMatrix) -> f64 {
        self.fitted(design)
            .iter()
            .flat_map(|f| f.windows(2).map(|w| w[0] - w[1]).collect::<Vec<_>>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Coefficients re-expressed on the raw regressor scale.
    pub fn unscaled_betas(&self) -> Vec<Vec<f64>> {
        self.betas
            .iter()
            .map(|b| {
                let mut out = Vec::with_capacity(b.len());
                let mut intercept = b[0];
                let mut slopes = Vec::with_capacity(b.len() - 1);
                for (coef, range) in b[1..].iter().zip(&self.scaling.columns) {
                    let width = range.max - range.min;
                    intercept -= coef * range.min / width;
                    slopes.push(coef / width);
                }
                out.push(intercept);
                out.extend(slopes);
                out
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Applies the stored scaling to `x_raw` and evaluates every quantile.
pub fn predict(fit: &QuantileFit, x_raw: &[f64]) -> Result<Prediction> {
    let scaled = fit.scaling.scale(x_raw)?;
    let out_of_domain = scaled.iter().any(|v| !(0.0..=1.0).contains(v));
    let mut row = Vec::with_capacity(scaled.len() + 1);
    row.push(1.0);
    row.extend(scaled);
    Ok(Prediction {
        quantiles: fit.evaluate_scaled(&row),
        out_of_domain,
    })
}

/// Weighted-l1 budget across quantiles: `sum_q sum_k w_{k,q} |beta_{k,q}| <= t`.
#[derive(Debug, Clone)]
pub(crate) struct BudgetConstraint<'a> {
    /// `Q x K`; an infinite weight pins the coefficient at zero.
    pub weights: &'a [Vec<f64>],
    pub t: f64,
    /// Regressor indices (0-based, excluding the intercept) left out of the budget.
    pub unpenalized: &'a [usize],
}

/// Builds and solves the stacked quantile program.
pub(crate) fn solve_joint(
    design: &DesignMatrix,
    taus: &QuantileGrid,
    noncrossing: bool,
    budget: Option<&BudgetConstraint<'_>>,
) -> Result<QuantileFit> {
    let n = design.n_rows();
    let k = design.n_regressors();
    let nq = taus.len();
    let p = k + 1;
    if n <= p {
        return Err(Error::Parameter(format!(
            "need more than {p} rows for {k} regressors, have {n}"
        )));
    }
    if let Some(b) = budget {
        if !(b.t >= 0.0) || !b.t.is_finite() {
            return Err(Error::Parameter(format!("budget {} must be finite and >= 0", b.t)));
        }
        if b.weights.len() != nq || b.weights.iter().any(|w| w.len() != k) {
            return Err(Error::Parameter("weights not shaped Q x K".into()));
        }
    }

    let penalized = |c: usize| -> bool {
        c > 0 && budget.is_some_and(|b| !b.unpenalized.contains(&(c - 1)))
    };
    let fixed = |q: usize, c: usize| -> bool {
        penalized(c) && budget.is_some_and(|b| b.weights[q][c - 1].is_infinite())
    };

    // Dual variable layout.
    let d_index = |q: usize, i: usize| q * n + i;
    let mut nvar = nq * n;
    let nc_index = |q: usize| q - 1; // offset added below; q >= 1
    let nc_base = nvar;
    if noncrossing {
        nvar += nq - 1;
    }
    let s_base = nvar;
    if noncrossing {
        nvar += (nq - 1) * k;
    }
    let s_index = |q: usize, j: usize| s_base + (q - 1) * k + j;
    let mut a_index = vec![vec![None; p]; nq];
    for (q, row) in a_index.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            if penalized(c) && !fixed(q, c) {
                *slot = Some(nvar);
                nvar += 2;
            }
        }
    }
    let budget_var = budget.map(|_| {
        nvar += 1;
        nvar - 1
    });

    let mut objective = vec![0.0; nvar];
    for q in 0..nq {
        for (i, y) in design.response.iter().enumerate() {
            objective[d_index(q, i)] = -y;
        }
    }
    if let (Some(b), Some(bv)) = (budget, budget_var) {
        objective[bv] = b.t;
    }
    let mut lp = LpProblem::new(objective);
    for (q, tau) in taus.taus().iter().enumerate() {
        for i in 0..n {
            lp.set_bounds(d_index(q, i), tau - 1.0, *tau)?;
        }
    }

    // One equality row per free coefficient.
    let mut beta_rows: Vec<Vec<Option<usize>>> = vec![vec![None; p]; nq];
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(n + 8);
    for q in 0..nq {
        for c in 0..p {
            if fixed(q, c) {
                continue;
            }
            entries.clear();
            for (i, row) in design.predictors.iter().enumerate() {
                if row[c] != 0.0 {
                    entries.push((d_index(q, i), row[c]));
                }
            }
            if noncrossing {
                if c == 0 {
                    if q >= 1 {
                        entries.push((nc_base + nc_index(q), 1.0));
                    }
                    if q + 1 < nq {
                        entries.push((nc_base + nc_index(q + 1), -1.0));
                    }
                } else {
                    if q >= 1 {
                        entries.push((s_index(q, c - 1), 1.0));
                    }
                    if q + 1 < nq {
                        entries.push((s_index(q + 1, c - 1), -1.0));
                    }
                }
            }
            if let Some(a) = a_index[q][c] {
                entries.push((a, -1.0));
                entries.push((a + 1, 1.0));
            }
            beta_rows[q][c] = Some(lp.num_eq());
            lp.add_eq_sparse(&entries, 0.0)?;
        }
    }
    // Rows for the negative-part variables of the quantile differences.
    if noncrossing {
        for q in 1..nq {
            for j in 0..k {
                lp.add_le_sparse(&[(nc_base + nc_index(q), -1.0), (s_index(q, j), 1.0)], 0.0)?;
            }
        }
    }
    // Rows for the absolute-value variables of penalized coefficients.
    if let (Some(b), Some(bv)) = (budget, budget_var) {
        for q in 0..nq {
            for c in 0..p {
                if let Some(a) = a_index[q][c] {
                    let w = b.weights[q][c - 1];
                    lp.add_le_sparse(&[(a, 1.0), (a + 1, 1.0), (bv, -w)], 0.0)?;
                }
            }
        }
    }

    let solution = solve_lp(&lp, &SolveOptions::default())?;
    match solution.status {
        LpStatus::Optimal => {}
        status => {
            return Err(Error::Estimation(format!(
                "quantile program terminated with status {status:?}"
            )))
        }
    }

    let betas: Vec<Vec<f64>> = beta_rows
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|r| r.map_or(0.0, |r| -solution.duals_eq[r]))
                .collect()
        })
        .collect();
    Ok(QuantileFit::from_betas(taus.clone(), betas, design.scaling.clone()))
}

/// Independent quantile regressions, one program per level. No crossing
/// guarantee.
pub fn fit_qr(design: &DesignMatrix, grid: &QuantileGrid) -> Result<QuantileFit> {
    let mut betas = Vec::with_capacity(grid.len());
    for &tau in grid.taus() {
        let single = QuantileGrid::new(vec![tau])?;
        let fit = solve_joint(design, &single, false, None)?;
        betas.push(fit.betas.into_iter().next().expect("one quantile"));
    }
    Ok(QuantileFit::from_betas(grid.clone(), betas, design.scaling.clone()))
}

/// Joint estimation of all quantiles under the non-crossing constraint on
/// `[0, 1]^K`.
pub fn fit_ncqr(design: &DesignMatrix, grid: &QuantileGrid) -> Result<QuantileFit> {
    solve_joint(design, grid, true, None)
}

/// Ordinary least squares on the design, reported on the raw regressor scale
/// (intercept first).
pub fn least_squares(design: &DesignMatrix) -> Result<Vec<f64>> {
    let (n, k) = (design.n_rows(), design.n_regressors() + 1);
    let x = DMatrix::from_fn(n, k, |r, c| design.predictors[r][c]);
    let y = DVector::from_column_slice(&design.response);
    let svd = x.svd(true, true);
    if !(svd.singular_values.min() > 1e-10 * svd.singular_values.max().max(1.0)) {
        return Err(Error::Estimation("least-squares design is rank deficient".into()));
    }
    let b = svd.solve(&y, 0.0).map_err(|e| Error::Estimation(e.to_string()))?;
    let mut intercept = b[0];
    let mut out = vec![0.0];
    for (coef, range) in b.iter().skip(1).zip(&design.scaling.columns) {
        let width = range.max - range.min;
        intercept -= coef * range.min / width;
        out.push(coef / width);
    }
    out[0] = intercept;
    Ok(out)
}

/// Raw-scale coefficients, one row per term and one column per quantile
/// (`tau_10` for 0.1), plus an optional least-squares column.
pub fn write_coefficients_csv<W: Write>(fit: &QuantileFit, ols: Option<&[f64]>, mut out: W) -> Result<()> {
    let mut cols = vec!["variable".to_string()];
    cols.extend(fit.taus.taus().iter().map(|t| format!("tau_{}", format_float((1e6 * 100.0 * t).round() / 1e6))));
    if ols.is_some() {
        cols.push("ols".into());
    }
    let header = cols.join(",");
    writeln!(out, "# columns: {header}")?;
    writeln!(out, "{header}")?;
    let betas = fit.unscaled_betas();
    let names = std::iter::once("intercept").chain(fit.regressors.iter().map(String::as_str));
    for (k, name) in names.enumerate() {
        let mut row: Vec<String> = betas.iter().map(|b| format_float(b[k])).collect();
        if let Some(o) = ols {
            row.push(format_float(o[k]));
        }
        writeln!(out, "{name},{}", row.join(","))?;
    }
    Ok(())
}
