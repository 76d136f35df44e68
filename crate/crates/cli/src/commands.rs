use std::fs;
use std::path::{Path, PathBuf};

use har_core::alasso::{select_model, SelectionResult};
use har_core::data::{build_design, load_panel, transform, DesignMatrix, ModelSpec, TimeSeriesPanel};
use har_core::density_eval::{expanding_forecast, write_forecasts_csv, ForecastOptions, ScoreReport};
use har_core::ncqr::{least_squares, write_coefficients_csv, QuantileGrid};
use har_core::risk_metrics::{fitted_risk, RiskSeries};
use har_core::spillover::{
    connectedness, fit_var, girf_fevd, join_risk_with, rolling_spillover, select_lag_order, write_fevd_csv,
    write_irf_csv, write_rolling_csv,
};
use har_core::synth::pipeline_panel;

use crate::config::RunConfig;
use crate::{CliError, CommonArgs};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Fit,
    Forecast,
    Risk,
    Spillover,
    Synth,
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
}

impl Context {
    fn new(args: &CommonArgs, needs_config: bool) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(p) => RunConfig::load(p)?,
            None if needs_config => return Err(CliError::Validation("--config is required".into())),
            None => RunConfig::default(),
        };
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        let out = args
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .ok_or_else(|| CliError::Validation("no output directory: pass --out or set out_dir".into()))?;
        Ok(Self { cfg, out })
    }

    fn panel(&self) -> Result<TimeSeriesPanel, CliError> {
        let path = self
            .cfg
            .data
            .as_ref()
            .ok_or_else(|| CliError::Validation("data: path to the input panel is required".into()))?;
        let file = fs::File::open(path)
            .map_err(|e| CliError::Validation(format!("data: cannot open {}: {e}", path.display())))?;
        let mut panel = load_panel(file, &self.cfg.date_column).map_err(|e| CliError::Validation(format!("data: {e}")))?;
        for (i, t) in self.cfg.transforms.iter().enumerate() {
            panel = transform(&panel, &t.column, t.kind)
                .map_err(|e| CliError::Validation(format!("transforms[{i}]: {e}")))?;
        }
        self.cfg.validate(&panel)?;
        Ok(panel)
    }

    fn run_dir(&self, spec: &ModelSpec) -> Result<PathBuf, CliError> {
        let dir = self.out.join(format!("{}_h{}", spec.name, spec.horizon));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Vec<u8>) -> har_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

struct Fitted {
    design: DesignMatrix,
    selection: SelectionResult,
}

fn fit_one(panel: &TimeSeriesPanel, spec: &ModelSpec, grid: &QuantileGrid, ctx: &Context) -> Result<Fitted, CliError> {
    let label = format!("{} h={}", spec.name, spec.horizon);
    let design = build_design(panel, spec).map_err(|e| CliError::from(e).context(&label))?;
    let selection = select_model(&design, grid, &spec.unpenalized_indices(), &ctx.cfg.selection()?)
        .map_err(|e| CliError::from(e).context(&label))?;
    Ok(Fitted { design, selection })
}

impl CliError {
    fn context(self, what: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

pub fn execute(kind: Kind, args: &CommonArgs) -> Result<(), CliError> {
    let ctx = Context::new(args, !matches!(kind, Kind::Synth))?;
    fs::create_dir_all(&ctx.out)?;
    match kind {
        Kind::Synth => synth(&ctx),
        Kind::Fit => fit(&ctx),
        Kind::Forecast => forecast(&ctx),
        Kind::Risk => risk(&ctx),
        Kind::Spillover => spillover(&ctx),
    }
}

fn synth(ctx: &Context) -> Result<(), CliError> {
    let panel = pipeline_panel(ctx.cfg.synth.length, ctx.cfg.seed)?;
    let path = ctx.out.join(&ctx.cfg.synth.file_name);
    write_with(&path, |w| panel.write_csv(w))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fit(ctx: &Context) -> Result<(), CliError> {
    let panel = ctx.panel()?;
    let grid = ctx.cfg.grid()?;
    for spec in ctx.cfg.runs() {
        let f = fit_one(&panel, &spec, &grid, ctx)?;
        let dir = ctx.run_dir(&spec)?;
        let fit = &f.selection.chosen_fit;
        write_with(&dir.join("fit.json"), |w| {
            w.extend(fit.to_json()?.into_bytes());
            w.push(b'\n');
            Ok(())
        })?;
        write_with(&dir.join("selection.json"), |w| {
            w.extend(f.selection.to_json()?.into_bytes());
            w.push(b'\n');
            Ok(())
        })?;
        let ols = least_squares(&f.design).ok();
        write_with(&dir.join("coefficients.csv"), |w| write_coefficients_csv(fit, ols.as_deref(), w))?;
        println!(
            "{} h={}: t* = {}, {} rows",
            spec.name,
            spec.horizon,
            f.selection.chosen_t(),
            f.design.n_rows()
        );
    }
    Ok(())
}

fn forecast(ctx: &Context) -> Result<(), CliError> {
    let panel = ctx.panel()?;
    let grid = ctx.cfg.grid()?;
    let options = ForecastOptions {
        initial_size: ctx.cfg.initial_size,
        selection: ctx.cfg.selection()?,
    };
    let mut report = ScoreReport::default();
    for spec in ctx.cfg.runs() {
        let label = format!("{} h={}", spec.name, spec.horizon);
        let run = expanding_forecast(&panel, &spec, &grid, &options).map_err(|e| CliError::from(e).context(&label))?;
        for s in &run.skipped {
            eprintln!("{label}: skipped window at {}: {}", s.origin, s.reason);
        }
        let dir = ctx.run_dir(&spec)?;
        write_with(&dir.join("forecasts.csv"), |w| write_forecasts_csv(&run.records, &grid, w))?;
        report.push(&spec.name, spec.horizon, &run.records, &grid).map_err(|e| CliError::from(e).context(&label))?;
        println!("{label}: {} forecasts", run.records.len());
    }
    write_with(&ctx.out.join("scores.csv"), |w| report.write_csv(w))?;
    Ok(())
}

fn risk_for(panel: &TimeSeriesPanel, spec: &ModelSpec, grid: &QuantileGrid, ctx: &Context) -> Result<RiskSeries, CliError> {
    let f = fit_one(panel, spec, grid, ctx)?;
    fitted_risk(&f.selection.chosen_fit, &f.design, &ctx.cfg.risk)
        .map_err(|e| CliError::from(e).context(&format!("{} h={}", spec.name, spec.horizon)))
}

fn risk(ctx: &Context) -> Result<(), CliError> {
    let panel = ctx.panel()?;
    let grid = ctx.cfg.grid()?;
    for spec in ctx.cfg.runs() {
        let series = risk_for(&panel, &spec, &grid, ctx)?;
        let dir = ctx.run_dir(&spec)?;
        write_with(&dir.join("risk.csv"), |w| series.write_csv(w))?;
        println!("{} h={}: {} dates", spec.name, spec.horizon, series.len());
    }
    Ok(())
}

fn spillover(ctx: &Context) -> Result<(), CliError> {
    let panel = ctx.panel()?;
    let grid = ctx.cfg.grid()?;
    let sp = &ctx.cfg.spillover;
    if panel.column(&sp.sri_column).is_none() {
        return Err(CliError::Validation(format!(
            "spillover.sri_column: column `{}` not found",
            sp.sri_column
        )));
    }
    let entry = ctx.cfg.spillover_spec();
    // Pairwise C(ES, SRI) and C(EL, SRI) per model horizon.
    let mut table: Vec<(usize, f64, f64)> = Vec::new();
    for &h in &ctx.cfg.horizons {
        let spec = ctx.cfg.model_spec(entry, h);
        let label = format!("{} h={h}", spec.name);
        let series = risk_for(&panel, &spec, &grid, ctx)?;
        let data = join_risk_with(&series, &panel, &sp.sri_column).map_err(|e| CliError::from(e).context(&label))?;
        if let Some(why) = degenerate_tails(&data) {
            return Err(CliError::Runtime(format!(
                "{label}: {why}; the chosen fit's tail quantiles do not move independently, so the VAR is singular"
            )));
        }
        let p = if sp.var.select_lag_up_to > 0 {
            select_lag_order(&data, sp.var.select_lag_up_to).map_err(|e| CliError::from(e).context(&label))?
        } else {
            sp.var.lag_order
        };
        let model = fit_var(&data, p).map_err(|e| CliError::from(e).context(&label))?;
        if !model.stable {
            eprintln!("{label}: VAR({p}) is not stable; impulse responses will not decay");
        }
        let fevd = girf_fevd(&model, sp.var.horizon, sp.var.sigma_scaling).map_err(|e| CliError::from(e).context(&label))?;
        let report = connectedness(&fevd);
        table.push((h, report.pairwise[(0, 2)], report.pairwise[(1, 2)]));
        let rolling = rolling_spillover(&data, sp.var.window, p, sp.var.horizon, sp.var.sigma_scaling)
            .map_err(|e| CliError::from(e).context(&label))?;
        let dir = ctx.run_dir(&spec)?;
        write_with(&dir.join("fevd.csv"), |w| write_fevd_csv(&data.names, &fevd, w))?;
        write_with(&dir.join("irf.csv"), |w| write_irf_csv(&model, sp.var.irf_horizon, w))?;
        write_with(&dir.join("rolling_spillover.csv"), |w| write_rolling_csv(&data.names, &rolling, w))?;
        println!("{label}: VAR({p}), total spillover {:.2}", report.total);
    }
    write_with(&ctx.out.join("connectedness.csv"), |w| {
        use std::io::Write;
        let cols: Vec<String> = table.iter().map(|(h, _, _)| format!("h{h}")).collect();
        let header = format!("pair,{}", cols.join(","));
        writeln!(w, "# columns: {header}")?;
        writeln!(w, "{header}")?;
        for (name, pick) in [("ES", 1usize), ("EL", 2)] {
            let v: Vec<String> = table
                .iter()
                .map(|r| har_core::data::format_float(if pick == 1 { r.1 } else { r.2 }))
                .collect();
            writeln!(w, "C_{name}_{},{}", sp.sri_column, v.join(","))?;
        }
        Ok(())
    })?;
    Ok(())
}

/// ES or EL constant, or one an exact affine function of the other, up to
/// round-off.
fn degenerate_tails(data: &har_core::spillover::VarData) -> Option<String> {
    let n = data.len() as f64;
    let col = |j: usize| data.values.iter().map(move |r| r[j]);
    let (ma, mb) = (col(0).sum::<f64>() / n, col(1).sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in col(0).zip(col(1)) {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    for (name, ss, m) in [("ES", saa, ma), ("EL", sbb, mb)] {
        if !((ss / n).sqrt() > 1e-10 * m.abs().max(1.0)) {
            return Some(format!("{name} is constant over the sample"));
        }
    }
    let r = sab / (saa * sbb).sqrt();
    (!(1.0 - r.abs() > 1e-10)).then(|| format!("ES and EL are exact affine functions of each other (correlation {r})"))
}
