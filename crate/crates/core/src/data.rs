//! Quarterly panels, growth transforms and horizon-aligned design matrices.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar quarter, printed as `YYYYQn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::Format(format!("quarter {quarter} not in 1..=4")));
        }
        Ok(Self { year, quarter })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u8 {
        self.quarter
    }

    fn index(&self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    fn from_index(idx: i64) -> Self {
        Self {
            year: idx.div_euclid(4) as i32,
            quarter: (idx.rem_euclid(4) + 1) as u8,
        }
    }

    /// The quarter `n` periods later (or earlier for negative `n`).
    pub fn offset(&self, n: i64) -> Self {
        Self::from_index(self.index() + n)
    }

    pub fn periods_until(&self, later: &Quarter) -> i64 {
        later.index() - self.index()
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    /// Accepts `2005Q1`, `2005-Q1`, `2005 Q1` and ISO dates `2005-02-15`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Format(format!("cannot parse `{s}` as a quarter"));
        if let Some(pos) = s.find(['Q', 'q']) {
            let year = s[..pos]
                .trim_end_matches(['-', ' ', '/'])
                .parse::<i32>()
                .map_err(|_| bad())?;
            let q = s[pos + 1..].parse::<u8>().map_err(|_| bad())?;
            return Quarter::new(year, q).map_err(|_| bad());
        }
        let mut parts = s.split('-');
        let (Some(y), Some(m), Some(d), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let year = y.parse::<i32>().map_err(|_| bad())?;
        let month = m.parse::<u8>().map_err(|_| bad())?;
        let day = d.parse::<u8>().map_err(|_| bad())?;
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return Err(bad());
        }
        Quarter::new(year, (month - 1) / 3 + 1)
    }
}

impl Serialize for Quarter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    QoQ,
    YoY,
    Biannual,
    FirstDiff,
    Level,
}

impl TransformKind {
    pub fn lag(self) -> usize {
        match self {
            TransformKind::QoQ | TransformKind::FirstDiff => 1,
            TransformKind::YoY => 4,
            TransformKind::Biannual => 8,
            TransformKind::Level => 0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            TransformKind::QoQ => "qoq",
            TransformKind::YoY => "yoy",
            TransformKind::Biannual => "bia",
            TransformKind::FirstDiff => "d1",
            TransformKind::Level => "lvl",
        }
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qoq" => Ok(TransformKind::QoQ),
            "yoy" => Ok(TransformKind::YoY),
            "biannual" | "bia" => Ok(TransformKind::Biannual),
            "firstdiff" | "first_diff" | "diff" | "d1" => Ok(TransformKind::FirstDiff),
            "level" | "lvl" => Ok(TransformKind::Level),
            other => Err(Error::Parameter(format!("unknown transform kind `{other}`"))),
        }
    }
}

/// How a column came to be.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformTag {
    Raw,
    Derived { source: String, kind: TransformKind },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
    pub tag: TransformTag,
}

/// Dated quarterly columns of equal length. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    dates: Vec<Quarter>,
    columns: Vec<Series>,
}

impl TimeSeriesPanel {
    pub fn new(dates: Vec<Quarter>, columns: Vec<Series>) -> Result<Self> {
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Ordering(format!(
                    "dates not strictly increasing at {} -> {}",
                    pair[0], pair[1]
                )));
            }
            if pair[0].periods_until(&pair[1]) != 1 {
                return Err(Error::Ordering(format!(
                    "gap between {} and {}: dates must be consecutive quarters",
                    pair[0], pair[1]
                )));
            }
        }
        for (i, col) in columns.iter().enumerate() {
            if col.values.len() != dates.len() {
                return Err(Error::Format(format!(
                    "column `{}` has {} values for {} dates",
                    col.name,
                    col.values.len(),
                    dates.len()
                )));
            }
            if columns[..i].iter().any(|c| c.name == col.name) {
                return Err(Error::Format(format!("duplicate column `{}`", col.name)));
            }
        }
        Ok(Self { dates, columns })
    }

    /// Builds a panel of fully observed columns starting at `start`.
    pub fn from_complete(start: Quarter, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let len = columns.first().map_or(0, |c| c.1.len());
        let dates = (0..len as i64).map(|i| start.offset(i)).collect();
        let columns = columns
            .into_iter()
            .map(|(name, values)| Series {
                name,
                values: values.into_iter().map(Some).collect(),
                tag: TransformTag::Raw,
            })
            .collect();
        Self::new(dates, columns)
    }

    pub fn dates(&self) -> &[Quarter] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn columns(&self) -> &[Series] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&Series> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Series> {
        self.column(name)
            .ok_or_else(|| Error::Parameter(format!("column `{name}` not in panel")))
    }

    pub fn position(&self, date: &Quarter) -> Option<usize> {
        self.dates.binary_search(date).ok()
    }

    /// Writes the panel as CSV with a leading `date` column.
    /// Header comment with the column schema, then a plain CSV table that
    /// [`load_panel`] reads back.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["date".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        writeln!(out, "# columns: {}", header.join(","))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        for (i, date) in self.dates.iter().enumerate() {
            let mut rec = vec![date.to_string()];
            rec.extend(self.columns.iter().map(|c| match c.values[i] {
                Some(v) => format_float(v),
                None => String::new(),
            }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip representation, used for every float written to disk.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        // normalise -0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a comma-separated panel with a header row. Cells that are empty,
/// `NA`, or unparseable become missing values.
pub fn load_panel<R: Read>(source: R, date_column: &str) -> Result<TimeSeriesPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().any(|h| h.is_empty()) {
        return Err(Error::Format("header row missing or has empty names".into()));
    }
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::Format(format!("date column `{date_column}` not in header")))?;
    let names: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != date_idx)
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    for (k, (_, name)) in names.iter().enumerate() {
        if names[..k].iter().any(|(_, n)| n == name) {
            return Err(Error::Format(format!("duplicate column `{name}`")));
        }
    }

    let mut dates = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record?;
        let date: Quarter = record
            .get(date_idx)
            .ok_or_else(|| Error::Format("row without date cell".into()))?
            .parse()?;
        dates.push(date);
        for (k, (idx, _)) in names.iter().enumerate() {
            values[k].push(record.get(*idx).and_then(parse_cell));
        }
    }
    let columns = names
        .into_iter()
        .zip(values)
        .map(|((_, name), values)| Series {
            name,
            values,
            tag: TransformTag::Raw,
        })
        .collect();
    TimeSeriesPanel::new(dates, columns)
}

/// Appends `<column>_<suffix>` computed with `kind`.
///
/// Growth rates are log differences times 100; `FirstDiff` is a plain
/// difference. Entries whose lag is unavailable, missing, or non-positive
/// (for log growth) become missing.
pub fn transform(panel: &TimeSeriesPanel, column: &str, kind: TransformKind) -> Result<TimeSeriesPanel> {
    let src = panel.require(column)?;
    let lag = kind.lag();
    if panel.len() <= lag {
        return Err(Error::Parameter(format!(
            "{kind:?} on `{column}` needs more than {lag} observations, panel has {}",
            panel.len()
        )));
    }
    let log_growth = |cur: f64, prev: f64| {
        (cur > 0.0 && prev > 0.0).then(|| 100.0 * (cur.ln() - prev.ln()))
    };
    let values: Vec<Option<f64>> = (0..panel.len())
        .map(|t| {
            if t < lag {
                return None;
            }
            let cur = src.values[t]?;
            if lag == 0 {
                return Some(cur);
            }
            let prev = src.values[t - lag]?;
            match kind {
                TransformKind::FirstDiff => Some(cur - prev),
                _ => log_growth(cur, prev),
            }
        })
        .collect();
    let name = format!("{column}_{}", kind.suffix());
    let mut columns = panel.columns.clone();
    columns.push(Series {
        name,
        values,
        tag: TransformTag::Derived {
            source: column.to_string(),
            kind,
        },
    });
    TimeSeriesPanel::new(panel.dates.clone(), columns)
}

/// A named regression of `target` (`horizon` quarters ahead) on `regressors`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub target: String,
    pub regressors: Vec<String>,
    /// Regressors left out of the adaptive-LASSO budget.
    #[serde(default)]
    pub unpenalized: Vec<String>,
    pub horizon: usize,
}

impl ModelSpec {
    pub fn validate(&self, panel: &TimeSeriesPanel) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Parameter(format!("model `{}`: horizon must be positive", self.name)));
        }
        panel.require(&self.target)?;
        for (i, r) in self.regressors.iter().enumerate() {
            panel.require(r)?;
            if self.regressors[..i].contains(r) {
                return Err(Error::Parameter(format!(
                    "model `{}`: regressor `{r}` listed twice",
                    self.name
                )));
            }
        }
        if let Some(u) = self.unpenalized.iter().find(|u| !self.regressors.contains(u)) {
            return Err(Error::Parameter(format!(
                "model `{}`: unpenalized `{u}` is not a regressor",
                self.name
            )));
        }
        Ok(())
    }

    /// Indices (into `regressors`) of the columns exempt from the budget.
    pub fn unpenalized_indices(&self) -> Vec<usize> {
        self.regressors
            .iter()
            .enumerate()
            .filter(|(_, r)| self.unpenalized.contains(r))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Min-max ranges of the fitting sample, one per regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub columns: Vec<ColumnRange>,
}

impl ScalingParams {
    pub fn fit(names: &[String], rows: &[Vec<f64>]) -> Result<Self> {
        let columns = names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let (min, max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[k]), hi.max(r[k]))
                });
                if !(max > min) {
                    return Err(Error::Scaling { column: name.clone() });
                }
                Ok(ColumnRange {
                    name: name.clone(),
                    min,
                    max,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { columns })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Maps raw regressor values onto the fitting sample's `[0, 1]` box.
    /// Values outside the fitting range map outside `[0, 1]` unclipped.
    pub fn scale(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.columns.len() {
            return Err(Error::Parameter(format!(
                "expected {} regressor values, got {}",
                self.columns.len(),
                raw.len()
            )));
        }
        Ok(raw
            .iter()
            .zip(&self.columns)
            .map(|(v, c)| (v - c.min) / (c.max - c.min))
            .collect())
    }

    pub fn unscale(&self, scaled: &[f64]) -> Result<Vec<f64>> {
        if scaled.len() != self.columns.len() {
            return Err(Error::Parameter(format!(
                "expected {} scaled values, got {}",
                self.columns.len(),
                scaled.len()
            )));
        }
        Ok(scaled
            .iter()
            .zip(&self.columns)
            .map(|(v, c)| c.min + v * (c.max - c.min))
            .collect())
    }
}

/// Complete, horizon-aligned rows before scaling.
///
/// Row `t` pairs the regressors observed at `dates[t]` with the target
/// observed `horizon` quarters later.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSample {
    pub regressor_names: Vec<String>,
    pub dates: Vec<Quarter>,
    pub raw: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub horizon: usize,
}

impl AlignedSample {
    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> AlignedSample {
        AlignedSample {
            regressor_names: self.regressor_names.clone(),
            dates: self.dates[..n].to_vec(),
            raw: self.raw[..n].to_vec(),
            response: self.response[..n].to_vec(),
            horizon: self.horizon,
        }
    }
}

/// Pairs regressors at `t` with the target at `t + h`, dropping any row with
/// a missing entry.
pub fn align(panel: &TimeSeriesPanel, spec: &ModelSpec) -> Result<AlignedSample> {
    spec.validate(panel)?;
    let target = &panel.require(&spec.target)?.values;
    let regs: Vec<&Vec<Option<f64>>> = spec
        .regressors
        .iter()
        .map(|r| panel.require(r).map(|s| &s.values))
        .collect::<Result<_>>()?;
    let h = spec.horizon;
    let mut sample = AlignedSample {
        regressor_names: spec.regressors.clone(),
        dates: Vec::new(),
        raw: Vec::new(),
        response: Vec::new(),
        horizon: h,
    };
    for t in 0..panel.len().saturating_sub(h) {
        let Some(y) = target[t + h] else { continue };
        let row: Option<Vec<f64>> = regs.iter().map(|c| c[t]).collect();
        if let Some(row) = row {
            sample.dates.push(panel.dates()[t]);
            sample.raw.push(row);
            sample.response.push(y);
        }
    }
    Ok(sample)
}

/// Response vector and scaled predictors with a leading intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub response: Vec<f64>,
    /// Rows of `[1, x_1, ..., x_K]` on the scaled domain.
    pub predictors: Vec<Vec<f64>>,
    pub row_dates: Vec<Quarter>,
    pub scaling: ScalingParams,
    pub horizon: usize,
}

impl DesignMatrix {
    /// Scales `sample` with its own min-max ranges.
    pub fn from_sample(sample: &AlignedSample) -> Result<Self> {
        let k = sample.regressor_names.len();
        if sample.len() < k + 2 {
            return Err(Error::Parameter(format!(
                "need at least {} complete rows for {k} regressors, have {}",
                k + 2,
                sample.len()
            )));
        }
        let scaling = ScalingParams::fit(&sample.regressor_names, &sample.raw)?;
        let predictors = sample
            .raw
            .iter()
            .map(|r| {
                let mut row = Vec::with_capacity(k + 1);
                row.push(1.0);
                row.extend(scaling.scale(r)?);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            response: sample.response.clone(),
            predictors,
            row_dates: sample.dates.clone(),
            scaling,
            horizon: sample.horizon,
        })
    }

    /// Builds a design from raw regressor rows without dates.
    pub fn from_raw(names: &[String], raw: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        if raw.len() != response.len() {
            return Err(Error::Parameter(format!(
                "{} predictor rows for {} responses",
                raw.len(),
                response.len()
            )));
        }
        if let Some(r) = raw.iter().find(|r| r.len() != names.len()) {
            return Err(Error::Parameter(format!(
                "predictor row has {} values for {} names",
                r.len(),
                names.len()
            )));
        }
        let start = Quarter::new(2000, 1)?;
        let sample = AlignedSample {
            regressor_names: names.to_vec(),
            dates: (0..response.len() as i64).map(|i| start.offset(i)).collect(),
            raw,
            response,
            horizon: 1,
        };
        Self::from_sample(&sample)
    }

    pub fn intercept_only(response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        Self::from_raw(&[], vec![Vec::new(); n], response)
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    /// Number of regressors, excluding the intercept.
    pub fn n_regressors(&self) -> usize {
        self.scaling.len()
    }

    pub fn regressor_names(&self) -> Vec<String> {
        self.scaling.columns.iter().map(|c| c.name.clone()).collect()
    }
}

/// Aligns and scales `panel` according to `spec`.
pub fn build_design(panel: &TimeSeriesPanel, spec: &ModelSpec) -> Result<DesignMatrix> {
    DesignMatrix::from_sample(&align(panel, spec)?)
}
