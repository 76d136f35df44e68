//! Small VARs, generalized variance decompositions and Diebold-Yilmaz
//! connectedness.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{format_float, Quarter, TimeSeriesPanel};
use crate::risk_metrics::RiskSeries;
use crate::{Error, Result};

/// Aligned multivariate series, one row per date.
#[derive(Debug, Clone, PartialEq)]
pub struct VarData {
    pub names: Vec<String>,
    pub dates: Vec<Quarter>,
    /// `T x N`.
    pub values: Vec<Vec<f64>>,
}

impl VarData {
    pub fn new(names: Vec<String>, dates: Vec<Quarter>, values: Vec<Vec<f64>>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Parameter(format!("{} dates for {} rows", dates.len(), values.len())));
        }
        if let Some(r) = values.iter().find(|r| r.len() != names.len()) {
            return Err(Error::Parameter(format!("row has {} values for {} variables", r.len(), names.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("VAR input contains non-finite values".into()));
        }
        Ok(Self { names, dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    fn slice(&self, start: usize, end: usize) -> VarData {
        VarData {
            names: self.names.clone(),
            dates: self.dates[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }
}

/// `(ES, EL, <sri_column>)` on the risk series dates. Every risk date must
/// carry an observation of the stress column.
pub fn join_risk_with(risk: &RiskSeries, panel: &TimeSeriesPanel, sri_column: &str) -> Result<VarData> {
    let sri = panel.require(sri_column)?;
    let mut missing = Vec::new();
    let mut values = Vec::with_capacity(risk.len());
    for (d, p) in risk.dates.iter().zip(&risk.points) {
        match panel.position(d).and_then(|i| sri.values[i]) {
            Some(v) => values.push(vec![p.es, p.el, v]),
            None => missing.push(d.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Join(missing));
    }
    VarData::new(vec!["ES".into(), "EL".into(), sri_column.to_string()], risk.dates.clone(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub variables: Vec<String>,
    pub lag_order: usize,
    /// `A_1..A_p`, each `N x N`.
    pub coefficients: Vec<DMatrix<f64>>,
    pub intercept: DVector<f64>,
    pub sigma: DMatrix<f64>,
    /// Dates of the equations actually fitted (the first `p` are lags only).
    pub dates: Vec<Quarter>,
    /// All companion eigenvalues inside the unit circle.
    pub stable: bool,
}

impl VarModel {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }
}

/// Equation-by-equation least squares with an intercept.
pub fn fit_var(data: &VarData, p: usize) -> Result<VarModel> {
    let n = data.n_vars();
    if n == 0 {
        return Err(Error::Parameter("VAR needs at least one variable".into()));
    }
    let t_all = data.len();
    if t_all <= n * p + 1 {
        return Err(Error::Parameter(format!(
            "VAR({p}) in {n} variables needs more than {} observations, have {t_all}",
            n * p + 1
        )));
    }
    let t = t_all - p;
    let k = 1 + n * p;
    let dof = t as i64 - (n * p) as i64 - 1;
    if dof < 1 {
        return Err(Error::Estimation(format!(
            "{t} usable observations leave no degrees of freedom for VAR({p})"
        )));
    }
    let x = DMatrix::from_fn(t, k, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / n + 1;
            data.values[p + r - lag][(c - 1) % n]
        }
    });
    let y = DMatrix::from_fn(t, n, |r, c| data.values[p + r][c]);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax.max(1.0)) {
        return Err(Error::Estimation(format!("VAR({p}) regressor matrix is rank deficient")));
    }
    let b = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Estimation(format!("least squares failed: {e}")))?;
    let resid = &y - &x * &b;
    let sigma = (resid.transpose() * &resid) / dof as f64;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let intercept = DVector::from_fn(n, |i, _| b[(0, i)]);
    let coefficients: Vec<DMatrix<f64>> = (0..p)
        .map(|l| DMatrix::from_fn(n, n, |i, j| b[(1 + l * n + j, i)]))
        .collect();
    let stable = is_stable(&coefficients, n);
    Ok(VarModel {
        variables: data.names.clone(),
        lag_order: p,
        coefficients,
        intercept,
        sigma,
        dates: data.dates[p..].to_vec(),
        stable,
    })
}

fn is_stable(a: &[DMatrix<f64>], n: usize) -> bool {
    let p = a.len();
    if p == 0 {
        return true;
    }
    let m = n * p;
    let mut companion = DMatrix::zeros(m, m);
    for (l, al) in a.iter().enumerate() {
        companion.view_mut((0, l * n), (n, n)).copy_from(al);
    }
    for i in n..m {
        companion[(i, i - n)] = 1.0;
    }
    match companion.try_schur(1e-12, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().all(|z| z.norm() < 1.0),
        None => false,
    }
}

/// Lag order in `1..=max_p` minimizing the Schwarz criterion on a common
/// sample.
pub fn select_lag_order(data: &VarData, max_p: usize) -> Result<usize> {
    if max_p == 0 {
        return Err(Error::Parameter("maximum lag order must be positive".into()));
    }
    let n = data.n_vars() as f64;
    let mut best: Option<(f64, usize)> = None;
    for p in 1..=max_p {
        let trimmed = data.slice(max_p - p, data.len());
        let Ok(model) = fit_var(&trimmed, p) else { continue };
        let t = (data.len() - max_p) as f64;
        let dof = t - n * p as f64 - 1.0;
        let ml = &model.sigma * (dof / t);
        let det = ml.determinant();
        if !(det > 0.0) {
            continue;
        }
        let bic = det.ln() + t.ln() / t * n * n * p as f64;
        if best.is_none_or(|(b, _)| bic < b) {
            best = Some((bic, p));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::Estimation("no lag order could be estimated".into()))
}

/// `Phi_0..Phi_h_max`.
pub fn ma_coefficients(model: &VarModel, h_max: usize) -> Vec<DMatrix<f64>> {
    let n = model.n_vars();
    let mut phi: Vec<DMatrix<f64>> = Vec::with_capacity(h_max + 1);
    phi.push(DMatrix::identity(n, n));
    for h in 1..=h_max {
        let mut acc = DMatrix::zeros(n, n);
        for j in 1..=h.min(model.lag_order) {
            acc += &model.coefficients[j - 1] * &phi[h - j];
        }
        phi.push(acc);
    }
    phi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FevdMethod {
    Generalized,
    Cholesky,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FevdTable {
    pub horizon: usize,
    pub method: FevdMethod,
    /// `raw[i][j]`: share of variable `i`'s forecast error variance due to
    /// shocks in `j`, before normalization.
    pub raw: DMatrix<f64>,
    pub normalized: DMatrix<f64>,
}

fn normalize_rows(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = raw.clone();
    for i in 0..raw.nrows() {
        let s: f64 = raw.row(i).sum();
        if !(s > 0.0) {
            return Err(Error::Estimation(format!("variance decomposition row {i} sums to {s}")));
        }
        for j in 0..raw.ncols() {
            out[(i, j)] /= s;
        }
    }
    Ok(out)
}

/// Generalized (Pesaran-Shin) decomposition over forecast steps `0..h`.
/// With `sigma_scaling` off, the `1 / sigma_jj` factor is dropped.
pub fn girf_fevd(model: &VarModel, h: usize, sigma_scaling: bool) -> Result<FevdTable> {
    if h == 0 {
        return Err(Error::Parameter("FEVD horizon must be positive".into()));
    }
    let n = model.n_vars();
    let s = &model.sigma;
    if let Some(j) = (0..n).find(|&j| !(s[(j, j)] > 0.0)) {
        return Err(Error::Parameter(format!("innovation variance of `{}` is not positive", model.variables[j])));
    }
    let phi = ma_coefficients(model, h - 1);
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = DVector::<f64>::zeros(n);
    for p in &phi {
        let ps = p * s;
        let psp = &ps * p.transpose();
        for i in 0..n {
            den[i] += psp[(i, i)];
            for j in 0..n {
                num[(i, j)] += ps[(i, j)] * ps[(i, j)];
            }
        }
    }
    let raw = DMatrix::from_fn(n, n, |i, j| {
        let scale = if sigma_scaling { 1.0 / s[(j, j)] } else { 1.0 };
        scale * num[(i, j)] / den[i]
    });
    let normalized = normalize_rows(&raw)?;
    Ok(FevdTable {
        horizon: h,
        method: FevdMethod::Generalized,
        raw,
        normalized,
    })
}

/// Orthogonalized decomposition with the lower Cholesky factor of `Sigma`
/// (ordering-dependent).
pub fn cholesky_fevd(model: &VarModel, h: usize) -> Result<FevdTable> {
    if h == 0 {
        return Err(Error::Parameter("FEVD horizon must be positive".into()));
    }
    let n = model.n_vars();
    let l = model
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Estimation("innovation covariance is not positive definite".into()))?
        .l();
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = DVector::<f64>::zeros(n);
    for p in ma_coefficients(model, h - 1) {
        let pl = &p * &l;
        for i in 0..n {
            for j in 0..n {
                num[(i, j)] += pl[(i, j)] * pl[(i, j)];
            }
            den[i] += pl.row(i).norm_squared();
        }
    }
    let raw = DMatrix::from_fn(n, n, |i, j| num[(i, j)] / den[i]);
    let normalized = normalize_rows(&raw)?;
    Ok(FevdTable {
        horizon: h,
        method: FevdMethod::Cholesky,
        raw,
        normalized,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectednessReport {
    /// `100 x` off-diagonal mass over `N`.
    pub total: f64,
    /// Spillover transmitted by each variable to the others.
    pub to_others: Vec<f64>,
    /// Spillover received by each variable from the others.
    pub from_others: Vec<f64>,
    /// `pairwise[i][j] = 100 (share of j's variance due to i - share of i's
    /// variance due to j)`; positive means `i` drives `j`.
    pub pairwise: DMatrix<f64>,
}

impl ConnectednessReport {
    pub fn net(&self) -> Vec<f64> {
        self.to_others.iter().zip(&self.from_others).map(|(t, f)| t - f).collect()
    }
}

pub fn connectedness(fevd: &FevdTable) -> ConnectednessReport {
    let th = &fevd.normalized;
    let n = th.nrows();
    let nf = n as f64;
    let mut off = 0.0;
    let mut to_others = vec![0.0; n];
    let mut from_others = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += th[(i, j)];
                from_others[i] += 100.0 * th[(i, j)] / nf;
                to_others[j] += 100.0 * th[(i, j)] / nf;
            }
        }
    }
    let mut pairwise = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let c = 100.0 * (th[(j, i)] - th[(i, j)]);
            pairwise[(i, j)] = c;
            pairwise[(j, i)] = -c;
        }
    }
    ConnectednessReport {
        total: 100.0 * off / nf,
        to_others,
        from_others,
        pairwise,
    }
}

/// One-standard-deviation generalized responses to a shock in `shock`:
/// `out[h][i] = (Phi_h Sigma e_j)_i / sqrt(sigma_jj)` for `h = 0..=h_max`.
pub fn impulse_response(model: &VarModel, h_max: usize, shock: usize) -> Result<Vec<Vec<f64>>> {
    let n = model.n_vars();
    if shock >= n {
        return Err(Error::Parameter(format!("shock index {shock} out of range for {n} variables")));
    }
    let sjj = model.sigma[(shock, shock)];
    if !(sjj > 0.0) {
        return Err(Error::Parameter(format!("innovation variance of `{}` is not positive", model.variables[shock])));
    }
    let col = model.sigma.column(shock) / sjj.sqrt();
    Ok(ma_coefficients(model, h_max)
        .iter()
        .map(|p| (p * &col).iter().copied().collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpilloverOptions {
    pub lag_order: usize,
    /// Choose the lag order by BIC up to this value instead (0 = off).
    pub select_lag_up_to: usize,
    pub horizon: usize,
    pub window: usize,
    pub sigma_scaling: bool,
    /// Steps of the impulse responses written out.
    pub irf_horizon: usize,
}

impl Default for SpilloverOptions {
    fn default() -> Self {
        Self {
            lag_order: 1,
            select_lag_up_to: 0,
            horizon: 12,
            window: 10,
            sigma_scaling: true,
            irf_horizon: 20,
        }
    }
}

/// A rolling window's connectedness, or why it has none.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingPoint {
    /// Last date in the window.
    pub date: Quarter,
    pub report: std::result::Result<ConnectednessReport, String>,
}

/// Re-estimates the VAR on every trailing window of `window` observations:
/// `len - window + 1` points, dated by each window's last observation.
pub fn rolling_spillover(
    data: &VarData,
    window: usize,
    p: usize,
    h: usize,
    sigma_scaling: bool,
) -> Result<Vec<RollingPoint>> {
    let n = data.n_vars();
    if window < n * p + 2 {
        return Err(Error::Parameter(format!(
            "rolling window {window} is shorter than {} (N p + 2)",
            n * p + 2
        )));
    }
    if data.len() < window {
        return Err(Error::Parameter(format!(
            "series of length {} is shorter than the rolling window {window}",
            data.len()
        )));
    }
    Ok((window..=data.len())
        .into_par_iter()
        .map(|end| {
            let sub = data.slice(end - window, end);
            let report = fit_var(&sub, p)
                .and_then(|m| girf_fevd(&m, h, sigma_scaling))
                .map(|f| connectedness(&f))
                .map_err(|e| e.to_string());
            RollingPoint {
                date: data.dates[end - 1],
                report,
            }
        })
        .collect())
}

fn pair_labels(names: &[String]) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            out.push((i, j, format!("C_{}_{}", names[i], names[j])));
        }
    }
    out
}

/// `date,status,total,to_X..,from_X..,C_X_Y..`; failed windows keep the date
/// with status `gap` and empty values.
pub fn write_rolling_csv<W: Write>(names: &[String], points: &[RollingPoint], mut out: W) -> Result<()> {
    let pairs = pair_labels(names);
    let mut cols = vec!["date".to_string(), "status".into(), "total".into()];
    cols.extend(names.iter().map(|v| format!("to_{v}")));
    cols.extend(names.iter().map(|v| format!("from_{v}")));
    cols.extend(pairs.iter().map(|p| p.2.clone()));
    let header = cols.join(",");
    writeln!(out, "# columns: {header}")?;
    writeln!(out, "{header}")?;
    for p in points {
        match &p.report {
            Ok(r) => {
                let mut v = vec![format_float(r.total)];
                v.extend(r.to_others.iter().map(|x| format_float(*x)));
                v.extend(r.from_others.iter().map(|x| format_float(*x)));
                v.extend(pairs.iter().map(|&(i, j, _)| format_float(r.pairwise[(i, j)])));
                writeln!(out, "{},ok,{}", p.date, v.join(","))?;
            }
            Err(_) => {
                writeln!(out, "{},gap{}", p.date, ",".repeat(cols.len() - 2))?;
            }
        }
    }
    Ok(())
}

/// `shock,horizon,<response per variable>`.
pub fn write_irf_csv<W: Write>(model: &VarModel, h_max: usize, mut out: W) -> Result<()> {
    let header = format!("shock,horizon,{}", model.variables.join(","));
    writeln!(out, "# columns: {header}")?;
    writeln!(out, "{header}")?;
    for (j, name) in model.variables.iter().enumerate() {
        for (h, row) in impulse_response(model, h_max, j)?.iter().enumerate() {
            let v: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
            writeln!(out, "{name},{h},{}", v.join(","))?;
        }
    }
    Ok(())
}

/// Full-sample FEVD as `from,<to per variable>` rows of percentages.
pub fn write_fevd_csv<W: Write>(names: &[String], fevd: &FevdTable, mut out: W) -> Result<()> {
    let header = format!("variable,{}", names.join(","));
    writeln!(out, "# columns: {header}")?;
    writeln!(out, "{header}")?;
    for (i, name) in names.iter().enumerate() {
        let v: Vec<String> = (0..names.len()).map(|j| format_float(100.0 * fevd.normalized[(i, j)])).collect();
        writeln!(out, "{name},{}", v.join(","))?;
    }
    Ok(())
}
