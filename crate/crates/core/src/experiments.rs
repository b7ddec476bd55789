//! Sweeps of empirical error and bounds, minimum-step searches, log-log
//! fits and CSV / gnuplot output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{BoundEngine, BoundKind, EpsilonPolicy};
use crate::models::{build_model, ModelParams};
use crate::product_formula::ProductFormula;

/// Default ceiling of the minimum-step search.
pub const DEFAULT_R_MAX: u64 = 1 << 24;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Time,
    Steps,
    Size,
}

impl Variable {
    /// CSV header of the x column.
    pub fn column(self) -> &'static str {
        match self {
            Variable::Time => "t",
            Variable::Steps => "r",
            Variable::Size => "n",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    /// Grid points; integral variables are rounded to the nearest integer.
    pub fn points(&self, variable: Variable) -> Result<Vec<f64>> {
        let mut pts = match self {
            Grid::List(v) => v.clone(),
            &Grid::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count < 2 {
                    return Err(Error::invalid(format!("grid count must be at least 2, got {count}")));
                }
                if spacing == Spacing::Log && (start <= 0.0 || stop <= 0.0) {
                    return Err(Error::invalid("log grid needs positive endpoints"));
                }
                let last = (count - 1) as f64;
                (0..count)
                    .map(|i| {
                        if i == count - 1 {
                            return stop;
                        }
                        let f = i as f64 / last;
                        match spacing {
                            Spacing::Linear => start + f * (stop - start),
                            Spacing::Log => start * (stop / start).powf(f),
                        }
                    })
                    .collect()
            }
        };
        if variable != Variable::Time {
            pts.iter_mut().for_each(|x| *x = x.round());
        }
        if pts.len() < 2 {
            return Err(Error::invalid("a grid needs at least 2 points"));
        }
        if pts.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::invalid("grid points must be finite and positive"));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        Ok(pts)
    }
}

/// The quantities held fixed while one variable is swept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    pub t: Option<f64>,
    pub r: Option<u64>,
    /// For size sweeps: `t = t_per_n·n`.
    pub t_per_n: Option<f64>,
}

impl Fixed {
    fn time_for(&self, n: usize) -> Result<f64> {
        match (self.t, self.t_per_n) {
            (Some(t), None) => Ok(t),
            (None, Some(k)) => Ok(k * n as f64),
            _ => Err(Error::invalid("exactly one of t and t_per_n must be set")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub model: ModelParams,
    pub pf_order: u32,
    pub variable: Variable,
    pub grid: Grid,
    pub fixed: Fixed,
    pub bounds: Vec<BoundKind>,
    pub epsilon_policy: EpsilonPolicy,
    /// Row index range for the log-log fits; all rows when absent.
    pub fit_window: Option<[usize; 2]>,
}

impl SweepSpec {
    /// Requested bounds, deduplicated, in canonical column order.
    pub fn columns(&self) -> Vec<BoundKind> {
        let mut b = self.bounds.clone();
        b.sort();
        b.dedup();
        b
    }
}

/// Search strategy of [`estimate_min_steps`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    Empirical,
    /// The interference bound: `approx_split` for PF1 on models with a
    /// split, `interference_pf1` for other PF1 runs, `general` otherwise.
    Interference,
    Triangle,
}

impl StepMethod {
    pub fn name(self) -> &'static str {
        match self {
            StepMethod::Empirical => "empirical",
            StepMethod::Interference => "interference",
            StepMethod::Triangle => "triangle",
        }
    }

    fn bound(self, pf_order: u32, split: bool) -> Option<BoundKind> {
        match self {
            StepMethod::Empirical => None,
            StepMethod::Interference if pf_order == 1 && split => Some(BoundKind::ApproxSplit),
            StepMethod::Interference if pf_order == 1 => Some(BoundKind::InterferencePf1),
            StepMethod::Interference => Some(BoundKind::General),
            StepMethod::Triangle => Some(BoundKind::Triangle),
        }
    }
}

/// Minimum step counts over a range of sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepsSpec {
    pub name: String,
    pub model: ModelParams,
    pub pf_order: u32,
    pub sizes: Vec<usize>,
    pub fixed: Fixed,
    pub epsilon_target: f64,
    pub methods: Vec<StepMethod>,
    pub r_max: u64,
    pub epsilon_policy: EpsilonPolicy,
    pub fit_window: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    /// One value per column, in column order.
    pub values: Vec<f64>,
    /// Seconds spent on the row in this run; 0 for rows resumed from disk.
    pub wall_time: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub name: String,
    pub variable: Variable,
    /// Column names after the x column.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Log-log fit per column; `None` where the window holds nonpositive values.
    pub fits: Vec<Option<Fit>>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| (r.x, r.values[i])).collect())
    }

    pub fn fit(&self, name: &str) -> Option<Fit> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.fits[i]
    }
}

// ---------------------------------------------------------------------------
// CSV

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_x(x: f64, variable: Variable) -> String {
    match variable {
        Variable::Time => fmt_float(x),
        _ => format!("{}", x as u64),
    }
}

fn csv_header(variable: Variable, columns: &[String]) -> String {
    let mut h = vec![variable.column().to_string()];
    h.extend(columns.iter().cloned());
    h.join(",")
}

fn csv_line(row: &SweepRow, variable: Variable) -> String {
    let mut f = vec![fmt_x(row.x, variable)];
    f.extend(row.values.iter().map(|v| fmt_float(*v)));
    f.join(",")
}

/// The CSV text of a result: header, then one line per row.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = csv_header(result.variable, &result.columns);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&csv_line(row, result.variable));
        out.push('\n');
    }
    out
}

/// Parses CSV text written by [`to_csv`] into its header and numeric rows.
/// A trailing line without a newline is treated as incomplete and dropped.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.split_inclusive('\n');
    let header = lines.next().filter(|l| l.ends_with('\n')).ok_or(Error::Parse {
        what: "csv",
        detail: "missing header".into(),
    })?;
    let header: Vec<String> = header.trim_end().split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let vals = line
            .trim_end()
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                what: "csv",
                detail: format!("row {}: {e}", i + 1),
            })?;
        if vals.len() != header.len() {
            return Err(Error::Parse {
                what: "csv",
                detail: format!("row {} has {} fields, header has {}", i + 1, vals.len(), header.len()),
            });
        }
        rows.push(vals);
    }
    Ok((header, rows))
}

// ---------------------------------------------------------------------------
// Fits

/// Least squares of `log y` on `log x` over `window`.
pub fn fit_exponent(points: &[(f64, f64)], window: Range<usize>) -> Result<Fit> {
    let pts = points
        .get(window.clone())
        .ok_or_else(|| Error::invalid(format!("fit window {window:?} exceeds {} points", points.len())))?;
    if pts.len() < 2 {
        return Err(Error::invalid("a fit needs at least 2 points"));
    }
    if let Some(p) = pts.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::invalid(format!("log-log fit needs positive values, got {p:?}")));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
    })
}

fn fits_for(rows: &[SweepRow], n_cols: usize, window: Option<[usize; 2]>) -> Vec<Option<Fit>> {
    let w = window.map(|[a, b]| a..b).unwrap_or(0..rows.len());
    (0..n_cols)
        .map(|c| {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.values[c])).collect();
            fit_exponent(&pts, w.clone()).ok()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Row driver

/// Evaluates `eval` at every point, in parallel batches, appending each batch
/// to `csv` in grid order. Rows already present in `csv` under the same
/// header and grid are reused.
fn run_rows<F>(
    variable: Variable,
    columns: &[String],
    points: &[f64],
    csv: Option<&Path>,
    eval: F,
) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let header = csv_header(variable, columns);
    let mut rows: Vec<SweepRow> = Vec::new();
    if let Some(path) = csv {
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            if let Ok((h, parsed)) = parse_csv(&text) {
                if h.join(",") == header {
                    for (vals, &x) in parsed.iter().zip(points) {
                        if vals[0].to_bits() != x.to_bits() {
                            break;
                        }
                        rows.push(SweepRow {
                            x,
                            values: vals[1..].to_vec(),
                            wall_time: 0.0,
                        });
                    }
                }
            }
        }
        let mut text = format!("{header}\n");
        for row in &rows {
            text.push_str(&csv_line(row, variable));
            text.push('\n');
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }

    let mut file = match csv {
        Some(path) => Some((
            fs::OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?,
            path,
        )),
        None => None,
    };
    let batch = rayon::current_num_threads().max(1);
    for chunk in points[rows.len()..].chunks(batch) {
        let done: Vec<SweepRow> = chunk
            .par_iter()
            .map(|&x| {
                let start = Instant::now();
                let values = eval(x)?;
                Ok(SweepRow {
                    x,
                    values,
                    wall_time: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<_>>()?;
        if let Some((f, path)) = file.as_mut() {
            let mut text = String::new();
            for row in &done {
                text.push_str(&csv_line(row, variable));
                text.push('\n');
            }
            f.write_all(text.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| Error::io(*path, e))?;
        }
        rows.extend(done);
    }
    Ok(rows)
}

fn engine_for(params: &ModelParams, pf_order: u32, bounds: &[BoundKind]) -> Result<BoundEngine> {
    let model = build_model(params)?;
    let pf = ProductFormula::new(model.hamiltonian, pf_order)?;
    let engine = BoundEngine::new(pf, model.split.as_ref(), bounds)?;
    let available = engine.available();
    if let Some(b) = bounds.iter().find(|b| !available.contains(b)) {
        return Err(Error::invalid(format!(
            "bound {} is not available for this model and order {pf_order}",
            b.name()
        )));
    }
    Ok(engine)
}

fn report_values(
    engine: &BoundEngine,
    t: f64,
    r: u64,
    bounds: &[BoundKind],
    policy: EpsilonPolicy,
) -> Result<Vec<f64>> {
    let rep = engine.report(t, r, bounds, policy)?;
    let mut v = vec![rep.empirical];
    v.extend(bounds.iter().map(|b| rep.get(*b).unwrap_or(f64::NAN)));
    Ok(v)
}

/// Runs a sweep, flushing rows to `csv` as they complete.
pub fn run_sweep(spec: &SweepSpec, csv: Option<&Path>) -> Result<SweepResult> {
    let points = spec.grid.points(spec.variable)?;
    let bounds = spec.columns();
    let mut columns = vec!["empirical".to_string()];
    columns.extend(bounds.iter().map(|b| b.name().to_string()));
    let policy = spec.epsilon_policy;

    let rows = match spec.variable {
        Variable::Time | Variable::Steps => {
            crate::dense::check_dense_size(spec.model.n_qubits())?;
            let engine = engine_for(&spec.model, spec.pf_order, &bounds)?;
            let (t, r) = (spec.fixed.t, spec.fixed.r);
            if spec.variable == Variable::Time && r.is_none() {
                return Err(Error::invalid("a time sweep needs a fixed r"));
            }
            if spec.variable == Variable::Steps && t.is_none() {
                return Err(Error::invalid("a step sweep needs a fixed t"));
            }
            run_rows(spec.variable, &columns, &points, csv, |x| match spec.variable {
                Variable::Time => report_values(&engine, x, r.unwrap_or(1), &bounds, policy),
                _ => report_values(&engine, t.unwrap_or(0.0), x as u64, &bounds, policy),
            })?
        }
        Variable::Size => {
            let r = spec
                .fixed
                .r
                .ok_or_else(|| Error::invalid("a size sweep needs a fixed r"))?;
            for &x in &points {
                let p = ModelParams {
                    n: x as usize,
                    ..spec.model.clone()
                };
                crate::dense::check_dense_size(p.n_qubits())?;
                spec.fixed.time_for(p.n)?;
            }
            run_rows(spec.variable, &columns, &points, csv, |x| {
                let p = ModelParams {
                    n: x as usize,
                    ..spec.model.clone()
                };
                let engine = engine_for(&p, spec.pf_order, &bounds)?;
                report_values(&engine, spec.fixed.time_for(p.n)?, r, &bounds, policy)
            })?
        }
    };
    let fits = fits_for(&rows, columns.len(), spec.fit_window);
    Ok(SweepResult {
        name: spec.name.clone(),
        variable: spec.variable,
        columns,
        rows,
        fits,
    })
}

// ---------------------------------------------------------------------------
// Minimum steps

/// Smallest `r` with the selected error measure at most `eps_target`.
pub fn estimate_min_steps(
    params: &ModelParams,
    pf_order: u32,
    t: f64,
    eps_target: f64,
    method: StepMethod,
) -> Result<u64> {
    let split = build_model(params)?.split.is_some();
    let bounds: Vec<BoundKind> = method.bound(pf_order, split).into_iter().collect();
    let engine = engine_for(params, pf_order, &bounds)?;
    estimate_min_steps_in(&engine, t, eps_target, method, EpsilonPolicy::AutoMin, DEFAULT_R_MAX)
}

/// Doubling then bisection. Every returned `r` has been evaluated directly
/// and passes; `r − 1` has been evaluated and fails unless `r = 1`.
pub fn estimate_min_steps_in(
    engine: &BoundEngine,
    t: f64,
    eps_target: f64,
    method: StepMethod,
    policy: EpsilonPolicy,
    r_max: u64,
) -> Result<u64> {
    if eps_target.is_nan() || eps_target <= 0.0 {
        return Err(Error::invalid(format!(
            "error target must be positive, got {eps_target}"
        )));
    }
    let pf = engine.product_formula();
    let split = engine.available().contains(&BoundKind::ApproxSplit);
    let bound = method.bound(pf.order(), split);
    let mut seen = BTreeMap::new();
    let mut passes = |r: u64| -> Result<bool> {
        if let Some(&v) = seen.get(&r) {
            return Ok(v);
        }
        let err = match bound {
            None => pf.empirical_error(t, r)?,
            Some(BoundKind::Triangle) => pf.triangle_bound_numeric(t, r)?,
            Some(b) => engine
                .bounds_only(t, r, &[b], policy)?
                .get(b)
                .ok_or_else(|| Error::invalid(format!("bound {} unavailable", b.name())))?,
        };
        let ok = err <= eps_target;
        seen.insert(r, ok);
        Ok(ok)
    };
    if passes(1)? {
        return Ok(1);
    }
    let (mut lo, mut hi) = (1u64, 2u64);
    loop {
        if hi > r_max {
            return Err(Error::SearchExhausted { r_max });
        }
        if passes(hi)? {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Minimum step counts for every size and method; columns are the methods
/// in the order `empirical, interference, triangle`.
pub fn run_steps(spec: &StepsSpec, csv: Option<&Path>) -> Result<SweepResult> {
    let mut methods = spec.methods.clone();
    methods.sort();
    methods.dedup();
    let columns: Vec<String> = methods.iter().map(|m| m.name().to_string()).collect();
    let points: Vec<f64> = spec.sizes.iter().map(|&n| n as f64).collect();
    if points.len() < 2 || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "sizes must be strictly increasing with at least 2 entries",
        ));
    }
    for &n in &spec.sizes {
        let p = ModelParams {
            n,
            ..spec.model.clone()
        };
        crate::dense::check_dense_size(p.n_qubits())?;
        spec.fixed.time_for(n)?;
    }
    let rows = run_rows(Variable::Size, &columns, &points, csv, |x| {
        let n = x as usize;
        let p = ModelParams {
            n,
            ..spec.model.clone()
        };
        let t = spec.fixed.time_for(n)?;
        let split = build_model(&p)?.split.is_some();
        let bounds: Vec<BoundKind> = methods.iter().filter_map(|m| m.bound(spec.pf_order, split)).collect();
        let engine = engine_for(&p, spec.pf_order, &bounds)?;
        methods
            .par_iter()
            .map(|&m| {
                estimate_min_steps_in(&engine, t, spec.epsilon_target, m, spec.epsilon_policy, spec.r_max)
                    .map(|r| r as f64)
            })
            .collect()
    })?;
    let fits = fits_for(&rows, columns.len(), spec.fit_window);
    Ok(SweepResult {
        name: spec.name.clone(),
        variable: Variable::Size,
        columns,
        rows,
        fits,
    })
}

// ---------------------------------------------------------------------------
// Output

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Plotscript,
}

/// Gnuplot script plotting every column of `<name>.csv` on log-log axes.
pub fn plotscript(result: &SweepResult, csv_name: &str) -> String {
    let ylabel = if result.variable == Variable::Size {
        "steps"
    } else {
        "error"
    };
    let stem = csv_name.strip_suffix(".csv").unwrap_or(csv_name);
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 800,600 noenhanced\n");
    s.push_str(&format!("set output '{stem}.png'\n"));
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\n");
    s.push_str(&format!("set xlabel '{}'\n", result.variable.column()));
    s.push_str(&format!("set ylabel '{ylabel}'\n"));
    s.push_str("set key top left autotitle columnhead\n");
    let series: Vec<String> = result
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let style = if i == 0 { "linespoints" } else { "lines" };
            let src = if i == 0 { format!("'{csv_name}'") } else { "''".into() };
            format!("{src} using 1:{} with {style} title '{c}'", i + 2)
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&series.join(", \\\n     "));
    s.push('\n');
    s
}

/// Writes the requested formats as `<dir>/<name>.csv` and `<dir>/<name>.gp`.
pub fn emit_outputs(result: &SweepResult, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_name = format!("{}.csv", result.name);
    let mut written = Vec::new();
    for f in formats {
        let (path, text) = match f {
            OutputFormat::Csv => (dir.join(&csv_name), to_csv(result)),
            OutputFormat::Plotscript => (dir.join(format!("{}.gp", result.name)), plotscript(result, &csv_name)),
        };
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Config files

fn default_order() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Variable,
    pub grid: Grid,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub r: Option<u64>,
    #[serde(default)]
    pub t_per_n: Option<f64>,
    #[serde(default)]
    pub bounds: Vec<BoundKind>,
    #[serde(default)]
    pub fit_window: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsSection {
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub t_per_n: Option<f64>,
    pub epsilon_target: f64,
    pub methods: Vec<StepMethod>,
    #[serde(default)]
    pub r_max: Option<u64>,
    #[serde(default)]
    pub fit_window: Option<[usize; 2]>,
}

/// A single evaluation point for `bounds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSection {
    pub t: f64,
    pub r: u64,
    #[serde(default)]
    pub bounds: Option<Vec<BoundKind>>,
}

/// One experiment file: a model, a formula order and any of a sweep, a
/// step-count table and a single point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelParams,
    #[serde(default = "default_order")]
    pub pf_order: u32,
    /// Marks configs whose runtime is far beyond a desk run.
    #[serde(default)]
    pub extended: bool,
    #[serde(default)]
    pub epsilon_policy: EpsilonPolicy,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub steps: Option<StepsSection>,
    #[serde(default)]
    pub point: Option<PointSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "config",
            detail: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        let s = self.sweep.as_ref()?;
        Some(SweepSpec {
            name: self.name.clone(),
            model: self.model.clone(),
            pf_order: self.pf_order,
            variable: s.variable,
            grid: s.grid.clone(),
            fixed: Fixed {
                t: s.t,
                r: s.r,
                t_per_n: s.t_per_n,
            },
            bounds: s.bounds.clone(),
            epsilon_policy: self.epsilon_policy,
            fit_window: s.fit_window,
        })
    }

    pub fn steps_spec(&self) -> Option<StepsSpec> {
        let s = self.steps.as_ref()?;
        let name = if self.sweep.is_some() {
            format!("{}_steps", self.name)
        } else {
            self.name.clone()
        };
        Some(StepsSpec {
            name,
            model: self.model.clone(),
            pf_order: self.pf_order,
            sizes: s.sizes.clone(),
            fixed: Fixed {
                t: s.t,
                r: None,
                t_per_n: s.t_per_n,
            },
            epsilon_target: s.epsilon_target,
            methods: s.methods.clone(),
            r_max: s.r_max.unwrap_or(DEFAULT_R_MAX),
            epsilon_policy: self.epsilon_policy,
            fit_window: s.fit_window,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Couplings, ModelKind};

    #[test]
    fn fit_exact_power() {
        let pts: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, (x as f64).powi(3))).collect();
        let f = fit_exponent(&pts, 0..5).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_constant() {
        let pts: Vec<(f64, f64)> = (1..5).map(|x| (x as f64, 5.0)).collect();
        let f = fit_exponent(&pts, 0..4).unwrap();
        assert!(f.slope.abs() < 1e-14);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        let pts = [(1.0, 1.0), (2.0, 0.0), (3.0, 2.0)];
        assert!(fit_exponent(&pts, 0..3).is_err());
        assert!(fit_exponent(&pts, 2..3).is_err());
        assert!(fit_exponent(&pts, 0..4).is_err());
    }

    #[test]
    fn log_grid() {
        let g = Grid::Range {
            start: 1.0,
            stop: 100.0,
            count: 3,
            spacing: Spacing::Log,
        };
        let p = g.points(Variable::Time).unwrap();
        assert!((p[1] - 10.0).abs() < 1e-12);
        assert_eq!(p[2], 100.0);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::List(vec![1.0, 1.0]).points(Variable::Time).is_err());
        assert!(Grid::List(vec![2.0]).points(Variable::Time).is_err());
        // Rounding collapses these step counts.
        assert!(Grid::List(vec![1.2, 1.4]).points(Variable::Steps).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let result = SweepResult {
            name: "x".into(),
            variable: Variable::Time,
            columns: vec!["empirical".into(), "triangle".into()],
            rows: vec![
                SweepRow {
                    x: 0.1,
                    values: vec![1.0 / 3.0, 2e-300],
                    wall_time: 0.0,
                },
                SweepRow {
                    x: 7.0,
                    values: vec![std::f64::consts::PI, 123456.789],
                    wall_time: 0.0,
                },
            ],
            fits: vec![None, None],
        };
        let text = to_csv(&result);
        let (h, rows) = parse_csv(&text).unwrap();
        assert_eq!(h, vec!["t", "empirical", "triangle"]);
        for (row, parsed) in result.rows.iter().zip(&rows) {
            assert_eq!(row.x.to_bits(), parsed[0].to_bits());
            for (a, b) in row.values.iter().zip(&parsed[1..]) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn min_steps_commuting_is_one() {
        let p = ModelParams::new(ModelKind::Tfi, 3);
        for m in [StepMethod::Empirical, StepMethod::Triangle, StepMethod::Interference] {
            assert_eq!(estimate_min_steps(&p, 1, 5.0, 1e-6, m).unwrap(), 1);
        }
    }

    fn tfi3() -> ModelParams {
        ModelParams::new(ModelKind::Tfi, 3).couplings(Couplings {
            h: 1.0,
            ..Couplings::default()
        })
    }

    #[test]
    fn min_steps_is_minimal() {
        let p = tfi3();
        let r = estimate_min_steps(&p, 1, 1.0, 1e-2, StepMethod::Empirical).unwrap();
        let model = build_model(&p).unwrap();
        let pf = ProductFormula::new(model.hamiltonian, 1).unwrap();
        assert!(pf.empirical_error(1.0, r).unwrap() <= 1e-2);
        assert!(pf.empirical_error(1.0, r - 1).unwrap() > 1e-2);
    }

    #[test]
    fn search_exhausted() {
        let p = tfi3();
        let engine = engine_for(&p, 1, &[]).unwrap();
        let e = estimate_min_steps_in(&engine, 1.0, 1e-12, StepMethod::Empirical, EpsilonPolicy::AutoMin, 8);
        assert!(matches!(e, Err(Error::SearchExhausted { r_max: 8 })));
    }

    #[test]
    fn config_sections() {
        let cfg = ExperimentConfig::parse(
            r#"{"name": "a", "model": {"model": "tfi", "n": 3},
                "sweep": {"variable": "time", "grid": [1, 2], "r": 10, "bounds": ["triangle"]},
                "steps": {"sizes": [3, 4], "t_per_n": 1, "epsilon_target": 0.01, "methods": ["empirical"]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.pf_order, 1);
        assert_eq!(cfg.sweep_spec().unwrap().fixed.r, Some(10));
        assert_eq!(cfg.steps_spec().unwrap().name, "a_steps");
        assert!(ExperimentConfig::parse(r#"{"name": "a", "model": {"model": "tfi", "n": 3}, "bogus": 1}"#).is_err());
    }
}
