//! Adaptive-LASSO budgeted non-crossing quantile regression and budget
//! selection by information criteria.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::DesignMatrix;
use crate::ncqr::{check_loss, fit_ncqr, fit_qr, solve_joint, BudgetConstraint, QuantileFit, QuantileGrid, SELECTION_EPS};
use crate::{Error, Result};

/// Pilot estimates smaller than this get an infinite weight.
pub const WEIGHT_EPS: f64 = 1e-6;

/// Reciprocal pilot coefficients, `Q x K`. Infinite entries pin the
/// coefficient at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveWeights {
    pub w: Vec<Vec<f64>>,
    /// Slopes of the pilot fit the weights were derived from.
    pub pilot: Vec<Vec<f64>>,
}

impl AdaptiveWeights {
    pub fn is_infinite(&self, q: usize, k: usize) -> bool {
        self.w[q][k].is_infinite()
    }

    /// `sum_q sum_k w |beta|` over penalized slopes. Returns infinity when a
    /// pinned coefficient is nonzero.
    pub fn weighted_norm(&self, fit: &QuantileFit, unpenalized: &[usize]) -> f64 {
        let mut total = 0.0;
        for (wq, bq) in self.w.iter().zip(&fit.betas) {
            for (k, (w, b)) in wq.iter().zip(&bq[1..]).enumerate() {
                if unpenalized.contains(&k) {
                    continue;
                }
                if w.is_infinite() {
                    if b.abs() > SELECTION_EPS {
                        return f64::INFINITY;
                    }
                } else {
                    total += w * b.abs();
                }
            }
        }
        total
    }
}

pub fn compute_weights(qr_fit: &QuantileFit, epsilon_w: f64) -> AdaptiveWeights {
    let pilot: Vec<Vec<f64>> = qr_fit.betas.iter().map(|b| b[1..].to_vec()).collect();
    let w = pilot
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| if t.abs() < epsilon_w { f64::INFINITY } else { 1.0 / t.abs() })
                .collect()
        })
        .collect();
    AdaptiveWeights { w, pilot }
}

/// Candidate budgets, strictly increasing and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BudgetGrid {
    t_values: Vec<f64>,
}

impl BudgetGrid {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::Parameter("budget grid is empty".into()));
        }
        if t_values.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Parameter("budgets must be finite and >= 0".into()));
        }
        if t_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("budgets must be strictly increasing".into()));
        }
        Ok(Self { t_values })
    }

    /// `points` log-spaced budgets from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || points < 2 {
            return Err(Error::Parameter(format!(
                "log grid needs 0 < lo < hi and >= 2 points, got lo={lo} hi={hi} points={points}"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (points - 1) as f64;
        let mut t: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
        t[0] = lo;
        t[points - 1] = hi;
        Self::new(t)
    }

    pub fn values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }
}

impl TryFrom<Vec<f64>> for BudgetGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BudgetGrid> for Vec<f64> {
    fn from(g: BudgetGrid) -> Self {
        g.t_values
    }
}

/// Default grid: `points` log-spaced budgets from 1e-3 up to the weighted norm
/// of the unconstrained joint fit, where the budget stops binding.
pub fn default_budget_grid(
    design: &DesignMatrix,
    grid: &QuantileGrid,
    weights: &AdaptiveWeights,
    unpenalized: &[usize],
    points: usize,
) -> Result<BudgetGrid> {
    let ncqr = fit_ncqr(design, grid)?;
    let mut hi = weights.weighted_norm(&ncqr, unpenalized);
    if !hi.is_finite() {
        // A pinned coefficient is active in the free fit; fall back to the
        // norm over the finite weights.
        hi = weights
            .w
            .iter()
            .zip(&ncqr.betas)
            .flat_map(|(wq, bq)| wq.iter().zip(&bq[1..]).enumerate().map(|(k, (w, b))| (k, w, b)).collect::<Vec<_>>())
            .filter(|(k, w, _)| w.is_finite() && !unpenalized.contains(k))
            .map(|(_, w, b)| w * b.abs())
            .sum();
    }
    let lo = 1e-3;
    if hi <= lo {
        return BudgetGrid::new(vec![0.0, lo]);
    }
    BudgetGrid::log_spaced(lo, hi, points)
}

pub fn fit_alasso(
    design: &DesignMatrix,
    grid: &QuantileGrid,
    weights: &AdaptiveWeights,
    t: f64,
    unpenalized: &[usize],
) -> Result<QuantileFit> {
    if let Some(&bad) = unpenalized.iter().find(|&&k| k >= design.n_regressors()) {
        return Err(Error::Parameter(format!("unpenalized column {bad} out of range")));
    }
    let budget = BudgetConstraint {
        weights: &weights.w,
        t,
        unpenalized,
    };
    solve_joint(design, grid, true, Some(&budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Bic,
    Aic,
}

/// Information criterion value; `degenerate` marks a perfect fit at some
/// quantile, reported as negative infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcValue {
    pub value: f64,
    pub degenerate: bool,
}

/// Number of slopes with `|beta| > SELECTION_EPS`, summed over quantiles.
pub fn selected_count(fit: &QuantileFit) -> usize {
    fit.selection_mask.iter().flatten().filter(|s| **s).count()
}

pub fn information_criterion(fit: &QuantileFit, design: &DesignMatrix, kind: Criterion) -> IcValue {
    let n = design.n_rows() as f64;
    let mut fit_term = 0.0;
    let taus = fit.taus.taus();
    for q in 0..fit.n_quantiles() {
        let loss: f64 = design
            .predictors
            .iter()
            .zip(&design.response)
            .map(|(x, y)| {
                let f: f64 = fit.betas[q].iter().zip(x).map(|(b, v)| b * v).sum();
                check_loss(y - f, taus[q])
            })
            .sum();
        if loss <= 0.0 {
            return IcValue { value: f64::NEG_INFINITY, degenerate: true };
        }
        fit_term += loss.ln();
    }
    let per_coef = match kind {
        Criterion::Bic => n.ln() / (2.0 * n),
        Criterion::Aic => 1.0 / n,
    };
    IcValue {
        value: fit_term + per_coef * selected_count(fit) as f64,
        degenerate: false,
    }
}

fn ser_ic<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_ic<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRecord {
    pub t: f64,
    /// `null` in JSON for a degenerate (perfect) fit.
    #[serde(serialize_with = "ser_ic", deserialize_with = "de_ic")]
    pub bic: f64,
    #[serde(serialize_with = "ser_ic", deserialize_with = "de_ic")]
    pub aic: f64,
    pub degenerate: bool,
    pub selected: usize,
    pub total_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<QuantileFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub criterion: Criterion,
    pub chosen_index: usize,
    pub records: Vec<BudgetRecord>,
    pub chosen_fit: QuantileFit,
}

impl SelectionResult {
    pub fn chosen_t(&self) -> f64 {
        self.records[self.chosen_index].t
    }

    /// JSON with the IC path and the chosen fit only.
    pub fn to_json(&self) -> Result<String> {
        let mut slim = self.clone();
        for r in &mut slim.records {
            r.fit = None;
        }
        serde_json::to_string_pretty(&slim).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Fits every budget (in parallel on the current rayon pool) and keeps the
/// criterion minimizer; ties go to the smaller budget.
pub fn grid_search(
    design: &DesignMatrix,
    grid: &QuantileGrid,
    weights: &AdaptiveWeights,
    budgets: &BudgetGrid,
    criterion: Criterion,
    unpenalized: &[usize],
) -> Result<SelectionResult> {
    let records = evaluate_budgets(design, grid, weights, budgets.values(), unpenalized)?;
    Ok(choose(records, criterion))
}

fn evaluate_budgets(
    design: &DesignMatrix,
    grid: &QuantileGrid,
    weights: &AdaptiveWeights,
    budgets: &[f64],
    unpenalized: &[usize],
) -> Result<Vec<BudgetRecord>> {
    let evaluated: Vec<Result<BudgetRecord>> = budgets
        .par_iter()
        .map(|&t| {
            let fit = fit_alasso(design, grid, weights, t, unpenalized)
                .map_err(|e| Error::Estimation(format!("budget t={t}: {e}")))?;
            let bic = information_criterion(&fit, design, Criterion::Bic);
            let aic = information_criterion(&fit, design, Criterion::Aic);
            Ok(BudgetRecord {
                t,
                bic: bic.value,
                aic: aic.value,
                degenerate: bic.degenerate,
                selected: selected_count(&fit),
                total_loss: fit.pinball_losses(design).iter().sum(),
                fit: Some(fit),
            })
        })
        .collect();
    evaluated.into_iter().collect()
}

/// `records` must be sorted by `t`.
fn choose(records: Vec<BudgetRecord>, criterion: Criterion) -> SelectionResult {
    let score = |r: &BudgetRecord| match criterion {
        Criterion::Bic => r.bic,
        Criterion::Aic => r.aic,
    };
    let mut chosen_index = 0;
    for (i, r) in records.iter().enumerate().skip(1) {
        if score(r) < score(&records[chosen_index]) {
            chosen_index = i;
        }
    }
    let chosen_fit = records[chosen_index].fit.clone().expect("fit kept until selection");
    SelectionResult {
        criterion,
        chosen_index,
        records,
        chosen_fit,
    }
}

/// Budget search settings for [`select_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionOptions {
    /// Explicit budgets; `None` builds the default log-spaced grid.
    pub budgets: Option<BudgetGrid>,
    pub grid_points: usize,
    /// Evenly spaced budgets added between the neighbours of the first-pass
    /// minimizer; 0 disables the second pass.
    pub refine_points: usize,
    pub criterion: Criterion,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            budgets: None,
            grid_points: 50,
            refine_points: 30,
            criterion: Criterion::Bic,
        }
    }
}

/// Pilot QR, weights, budget grid and selection in one call.
///
/// The log-spaced grid is coarse where the criterion usually bottoms out, so
/// a second pass fills the bracket around the first minimizer with evenly
/// spaced budgets. Both passes are reported together, sorted by `t`.
pub fn select_model(
    design: &DesignMatrix,
    grid: &QuantileGrid,
    unpenalized: &[usize],
    options: &SelectionOptions,
) -> Result<SelectionResult> {
    let pilot = fit_qr(design, grid)?;
    let weights = compute_weights(&pilot, WEIGHT_EPS);
    let budgets = match &options.budgets {
        Some(b) => b.clone(),
        None => default_budget_grid(design, grid, &weights, unpenalized, options.grid_points)?,
    };
    let first = grid_search(design, grid, &weights, &budgets, options.criterion, unpenalized)?;
    if options.refine_points == 0 || budgets.len() < 2 {
        return Ok(first);
    }
    let v = budgets.values();
    let i = first.chosen_index;
    let (lo, hi) = (v[i.saturating_sub(1)], v[(i + 1).min(v.len() - 1)]);
    let m = options.refine_points + 1;
    let extra: Vec<f64> = (1..m)
        .map(|k| lo + (hi - lo) * k as f64 / m as f64)
        .filter(|t| !v.contains(t))
        .collect();
    let mut records = first.records;
    records.extend(evaluate_budgets(design, grid, &weights, &extra, unpenalized)?);
    records.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(choose(records, options.criterion))
}
