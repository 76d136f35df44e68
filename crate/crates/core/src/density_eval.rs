//! Expanding-window forecasts and quantile-weighted CRPS.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alasso::{select_model, SelectionOptions};
use crate::data::{align, format_float, AlignedSample, DesignMatrix, ModelSpec, Quarter, TimeSeriesPanel};
use crate::ncqr::{check_loss, predict, QuantileGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    /// Date of the regressors the forecast conditions on.
    pub origin: Quarter,
    /// `origin + horizon`, the date of `realized`.
    pub date: Quarter,
    pub horizon: usize,
    pub predicted_quantiles: Vec<f64>,
    pub realized: f64,
    /// The forecast row scaled outside the window's `[0, 1]` box.
    pub out_of_domain: bool,
    pub budget: f64,
}

/// A window that produced no forecast and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedWindow {
    pub origin: Quarter,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastRun {
    pub records: Vec<ForecastRecord>,
    pub skipped: Vec<SkippedWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastOptions {
    pub initial_size: usize,
    pub selection: SelectionOptions,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        Self {
            initial_size: 50,
            selection: SelectionOptions::default(),
        }
    }
}

/// Aligns `panel` for `spec` and runs [`forecast_sample`].
pub fn expanding_forecast(
    panel: &TimeSeriesPanel,
    spec: &ModelSpec,
    grid: &QuantileGrid,
    options: &ForecastOptions,
) -> Result<ForecastRun> {
    let sample = align(panel, spec)?;
    forecast_sample(&sample, &spec.unpenalized_indices(), grid, options)
}

/// Window `s` holds the first `s` aligned rows and forecasts row `s`, for
/// `s = initial_size, ..., len - 1`. Scaling, weights and the budget are all
/// re-derived from the window alone.
pub fn forecast_sample(
    sample: &AlignedSample,
    unpenalized: &[usize],
    grid: &QuantileGrid,
    options: &ForecastOptions,
) -> Result<ForecastRun> {
    let need = options.initial_size + 1;
    if options.initial_size == 0 || sample.len() < need {
        return Err(Error::Parameter(format!(
            "expanding forecasts need at least {need} complete rows (initial window {} plus one), have {}",
            options.initial_size,
            sample.len()
        )));
    }
    let outcomes: Vec<Result<std::result::Result<ForecastRecord, SkippedWindow>>> = (options.initial_size
        ..sample.len())
        .into_par_iter()
        .map(|s| one_window(sample, s, unpenalized, grid, options))
        .collect();
    let mut run = ForecastRun::default();
    for o in outcomes {
        match o? {
            Ok(r) => run.records.push(r),
            Err(skip) => run.skipped.push(skip),
        }
    }
    Ok(run)
}

fn one_window(
    sample: &AlignedSample,
    s: usize,
    unpenalized: &[usize],
    grid: &QuantileGrid,
    options: &ForecastOptions,
) -> Result<std::result::Result<ForecastRecord, SkippedWindow>> {
    let origin = sample.dates[s];
    let design = match DesignMatrix::from_sample(&sample.head(s)) {
        Ok(d) => d,
        Err(e @ Error::Scaling { .. }) => {
            return Ok(Err(SkippedWindow {
                origin,
                reason: e.to_string(),
            }))
        }
        Err(e) => return Err(e),
    };
    let selection = select_model(&design, grid, unpenalized, &options.selection)
        .map_err(|e| Error::Estimation(format!("window ending before {origin}: {e}")))?;
    let pred = predict(&selection.chosen_fit, &sample.raw[s])?;
    Ok(Ok(ForecastRecord {
        origin,
        date: origin.offset(sample.horizon as i64),
        horizon: sample.horizon,
        predicted_quantiles: pred.quantiles,
        realized: sample.response[s],
        out_of_domain: pred.out_of_domain,
        budget: selection.chosen_t(),
    }))
}

/// Pinball loss of the realization against the `tau_index`-th forecast.
pub fn quantile_score(record: &ForecastRecord, taus: &QuantileGrid, tau_index: usize) -> Result<f64> {
    let (Some(q), Some(&tau)) = (record.predicted_quantiles.get(tau_index), taus.taus().get(tau_index)) else {
        return Err(Error::Parameter(format!("quantile index {tau_index} out of range")));
    };
    Ok(check_loss(record.realized - q, tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Uniform,
    Centre,
    Left,
    Right,
}

impl Weighting {
    pub const ALL: [Weighting; 4] = [Weighting::Uniform, Weighting::Centre, Weighting::Left, Weighting::Right];

    pub fn weight(self, tau: f64, n_quantiles: usize) -> f64 {
        match self {
            Weighting::Uniform => 1.0 / n_quantiles as f64,
            Weighting::Centre => tau * (1.0 - tau),
            Weighting::Left => (1.0 - tau) * (1.0 - tau),
            Weighting::Right => tau * tau,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Weighting::Uniform => "crps",
            Weighting::Centre => "centre",
            Weighting::Left => "left",
            Weighting::Right => "right",
        }
    }
}

/// `sum_q w(tau_q) QS_q` for one record.
pub fn weighted_score(record: &ForecastRecord, taus: &QuantileGrid, weighting: Weighting) -> Result<f64> {
    let q = taus.len();
    if record.predicted_quantiles.len() != q {
        return Err(Error::Parameter(format!(
            "record has {} quantiles, grid has {q}",
            record.predicted_quantiles.len()
        )));
    }
    let mut total = 0.0;
    for (i, &tau) in taus.taus().iter().enumerate() {
        total += weighting.weight(tau, q) * quantile_score(record, taus, i)?;
    }
    Ok(total)
}

/// Mean weighted score over the records.
pub fn qwcrps(records: &[ForecastRecord], taus: &QuantileGrid, weighting: Weighting) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Parameter("no forecast records to score".into()));
    }
    let mut total = 0.0;
    for r in records {
        total += weighted_score(r, taus, weighting)?;
    }
    Ok(total / records.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub horizon: usize,
    pub model: String,
    /// Uniform, centre, left, right.
    pub scores: [f64; 4],
    pub forecasts: usize,
}

/// Scores by horizon and model; rows keep insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreReport {
    pub rows: Vec<ScoreRow>,
}

impl ScoreReport {
    pub fn push(&mut self, model: &str, horizon: usize, records: &[ForecastRecord], taus: &QuantileGrid) -> Result<()> {
        let mut scores = [0.0; 4];
        for (s, w) in scores.iter_mut().zip(Weighting::ALL) {
            *s = qwcrps(records, taus, w)?;
        }
        self.rows.push(ScoreRow {
            horizon,
            model: model.to_string(),
            scores,
            forecasts: records.len(),
        });
        Ok(())
    }

    /// `best[row][col]`: the row has the smallest score in that column among
    /// rows of the same horizon.
    pub fn best_flags(&self) -> Vec<[bool; 4]> {
        self.rows
            .iter()
            .map(|row| {
                let mut flags = [false; 4];
                for (c, flag) in flags.iter_mut().enumerate() {
                    let min = self
                        .rows
                        .iter()
                        .filter(|r| r.horizon == row.horizon)
                        .map(|r| r.scores[c])
                        .fold(f64::INFINITY, f64::min);
                    *flag = row.scores[c] == min;
                }
                flags
            })
            .collect()
    }

    /// Rows sorted by horizon (stable within a horizon), one column per
    /// weighting plus a best-in-horizon marker for each.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# columns: horizon,model,forecasts,crps,centre,left,right,best_crps,best_centre,best_left,best_right"
        )?;
        writeln!(out, "horizon,model,forecasts,crps,centre,left,right,best_crps,best_centre,best_left,best_right")?;
        let flags = self.best_flags();
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.rows[i].horizon);
        for i in order {
            let r = &self.rows[i];
            let s: Vec<String> = r.scores.iter().map(|v| format_float(*v)).collect();
            let f: Vec<&str> = flags[i].iter().map(|b| if *b { "1" } else { "0" }).collect();
            writeln!(out, "{},{},{},{},{}", r.horizon, r.model, r.forecasts, s.join(","), f.join(","))?;
        }
        Ok(())
    }
}

/// One line per record: dates, realization, the quantile forecasts.
pub fn write_forecasts_csv<W: Write>(records: &[ForecastRecord], taus: &QuantileGrid, mut out: W) -> Result<()> {
    let qcols: Vec<String> = taus.taus().iter().map(|t| format!("q{}", format_float(*t))).collect();
    let header = format!("origin,date,horizon,realized,out_of_domain,budget,{}", qcols.join(","));
    writeln!(out, "# columns: {header}")?;
    writeln!(out, "{header}")?;
    for r in records {
        let q: Vec<String> = r.predicted_quantiles.iter().map(|v| format_float(*v)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.origin,
            r.date,
            r.horizon,
            format_float(r.realized),
            u8::from(r.out_of_domain),
            format_float(r.budget),
            q.join(",")
        )?;
    }
    Ok(())
}
