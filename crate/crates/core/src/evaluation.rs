//! Regression batteries and report emission.
//!
//! Every battery returns a [`BatteryReport`]; [`write_report`] lays reports
//! out as one directory per battery with fixed file names and fixed float
//! formatting so identical inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{signal_column, Variant};
use crate::econometrics::{fit_fe_ols, gap, pearson_matrix, RegressionResult, RegressionSpec};
use crate::error::{Error, Result};
use crate::frame::{format_value, Frame};
use crate::llm::RecognitionOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecognitionReport {
    pub documents: usize,
    pub firm: f64,
    pub year: f64,
    pub firm_and_year: f64,
    pub firm_or_year: f64,
}

/// Percentages of documents whose firm, year, both, or either was
/// recognized.
pub fn recognition_report(outcomes: &[RecognitionOutcome]) -> Result<RecognitionReport> {
    if outcomes.is_empty() {
        return Err(Error::InsufficientData("recognition report over zero documents".into()));
    }
    let n = outcomes.len();
    let pct = |f: &dyn Fn(&RecognitionOutcome) -> bool| 100.0 * outcomes.iter().filter(|o| f(o)).count() as f64 / n as f64;
    Ok(RecognitionReport {
        documents: n,
        firm: pct(&|o| o.firm_hit),
        year: pct(&|o| o.year_hit),
        firm_and_year: pct(&|o| o.firm_hit && o.year_hit),
        firm_or_year: pct(&|o| o.firm_hit || o.year_hit),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Battery {
    InformationLoss,
    Correlation,
    Quarterly,
    Gap,
    Multitask,
    Interaction,
}

impl Battery {
    pub const ALL: [Battery; 6] = [
        Battery::InformationLoss,
        Battery::Correlation,
        Battery::Quarterly,
        Battery::Gap,
        Battery::Multitask,
        Battery::Interaction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Battery::InformationLoss => "information_loss",
            Battery::Correlation => "correlation",
            Battery::Quarterly => "quarterly",
            Battery::Gap => "gap",
            Battery::Multitask => "multitask",
            Battery::Interaction => "interaction",
        }
    }
}

impl std::str::FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown battery {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub dependent: String,
    pub measure: String,
    pub controls: Vec<String>,
    pub variants: Vec<Variant>,
    pub baseline: Variant,
    pub compare: Variant,
    pub gap_determinants: Vec<String>,
    pub moderators: Vec<String>,
    pub winsorize: bool,
    pub standardize: bool,
    pub jobs: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        EvaluationConfig {
            dependent: "DGTW".into(),
            measure: "Sentiment".into(),
            controls: s(&[
                "FE",
                "DGTW_t-1",
                "DGTW_t-2",
                "DGTW_t-3",
                "DGTW_t-22_t-4",
                "DGTW_t-253_t-23",
                "ln_Size",
                "ln_BM",
                "ln_Turnover",
            ]),
            variants: vec![Variant::Raw, Variant::Trf],
            baseline: Variant::Raw,
            compare: Variant::Trf,
            gap_determinants: s(&["Uncertainty_RAW", "ln_Size", "TNIC3TSIMM", "TNIC3HHI", "Coverage", "EntityPct_TRF"]),
            moderators: s(&["Pre", "RecognitionFirm_TRF", "Gap"]),
            winsorize: true,
            standardize: true,
            jobs: 1,
        }
    }
}

/// The four forward-looking outcomes: (outcome, measure, controls).
pub fn multitask_designs() -> Vec<(&'static str, &'static str, Vec<&'static str>)> {
    vec![
        ("Vol_post", "Uncertainty", vec!["Vol_pre", "Alpha_pre", "Abs_Abnormal_Ret", "ln_Size", "ln_BM"]),
        ("Capx_t+2", "Investment", vec!["Capx_t", "Leverage", "ln_Total_Asset"]),
        ("SaleChange_t", "Economy", vec!["SaleChange_t-2", "BM", "ln_Total_Asset", "Tangibility"]),
        ("ValueAddChange_t", "Economy", vec!["ValueAddChange_t-2", "BM", "ln_Total_Asset", "Tangibility"]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub spec_id: String,
    /// Variant label: one variant, or `A+B` for a horse race.
    pub variant: String,
    pub dependent: String,
    pub result: Option<RegressionResult>,
    pub error: Option<String>,
}

impl FitRecord {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.result.as_ref()?.coefficient(name).map(|c| c.estimate)
    }

    pub fn adj_r_squared(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.adj_r_squared)
    }
}

/// An extra delimited table emitted next to the standard files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub name: String,
    pub fits: Vec<FitRecord>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl BatteryReport {
    fn new(name: &str) -> Self {
        BatteryReport { name: name.to_string(), fits: Vec::new(), tables: Vec::new(), notes: Vec::new() }
    }

    pub fn fit(&self, spec_id: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.spec_id == spec_id)
    }
}

struct Job {
    variant: String,
    spec: RegressionSpec,
}

impl EvaluationConfig {
    fn spec(&self, id: String, dependent: &str, regressors: Vec<String>) -> RegressionSpec {
        RegressionSpec {
            id,
            dependent: dependent.to_string(),
            regressors,
            interactions: Vec::new(),
            winsorize: self.winsorize,
            standardize: self.standardize,
            winsor_limits: (0.01, 0.99),
        }
    }

    fn column(&self, variant: Variant) -> String {
        signal_column(&self.measure, variant)
    }
}

fn require(frame: &Frame, columns: &[String], what: &str) -> Result<()> {
    for c in columns {
        if !frame.has_column(c) {
            return Err(Error::Config(format!("{what} column {c:?} is not present in the frame")));
        }
    }
    Ok(())
}

fn run_jobs(frame: &Frame, jobs: Vec<Job>, threads: usize, notes: &mut Vec<String>) -> Vec<FitRecord> {
    let run = |job: &Job| {
        let fitted = fit_fe_ols(&job.spec, frame);
        FitRecord {
            spec_id: job.spec.id.clone(),
            variant: job.variant.clone(),
            dependent: job.spec.dependent.clone(),
            error: fitted.as_ref().err().map(|e| e.to_string()),
            result: fitted.ok(),
        }
    };
    let records: Vec<FitRecord> = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(|| jobs.par_iter().map(run).collect()),
        Err(_) => jobs.iter().map(run).collect(),
    };
    for r in &records {
        if let Some(e) = &r.error {
            notes.push(format!("{}: {e}", r.spec_id));
        }
    }
    records
}

/// Solo fits per variant and horse races of each variant against the
/// baseline, with and without controls, plus coefficient and adjusted-R²
/// deltas relative to the baseline.
pub fn information_loss_battery(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::InformationLoss.name());
    if config.variants.is_empty() {
        report.notes.push("no variants requested; zero specifications run".into());
        return Ok(report);
    }
    let base = config.baseline;
    let mut needed: Vec<String> = config.variants.iter().map(|v| config.column(*v)).collect();
    needed.push(config.column(base));
    require(frame, &needed, "signal")?;
    require(frame, &[config.dependent.clone()], "dependent")?;
    require(frame, &config.controls, "control")?;

    let mut jobs = Vec::new();
    let control_sets: Vec<(&str, Vec<String>)> = if config.controls.is_empty() {
        vec![("", Vec::new())]
    } else {
        vec![("", Vec::new()), ("_ctrl", config.controls.clone())]
    };
    for (suffix, controls) in &control_sets {
        for v in &config.variants {
            let mut regs = vec![config.column(*v)];
            regs.extend(controls.iter().cloned());
            jobs.push(Job { variant: v.to_string(), spec: config.spec(format!("solo_{v}{suffix}"), &config.dependent, regs) });
        }
        for v in config.variants.iter().filter(|v| **v != base) {
            let mut regs = vec![config.column(base), config.column(*v)];
            regs.extend(controls.iter().cloned());
            jobs.push(Job {
                variant: format!("{base}+{v}"),
                spec: config.spec(format!("race_{base}_{v}{suffix}"), &config.dependent, regs),
            });
        }
    }
    report.fits = run_jobs(frame, jobs, config.jobs, &mut report.notes);

    let mut rows = Vec::new();
    for (suffix, _) in &control_sets {
        let base_solo = report.fit(&format!("solo_{base}{suffix}")).cloned();
        for v in config.variants.iter().filter(|v| **v != base) {
            let solo = report.fit(&format!("solo_{v}{suffix}"));
            let race_id = format!("race_{base}_{v}{suffix}");
            let race = report.fit(&race_id);
            let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
            let base_col = config.column(base);
            let col = config.column(*v);
            let solo_base_coef = base_solo.as_ref().and_then(|f| f.estimate(&base_col));
            let solo_coef = solo.and_then(|f| f.estimate(&col));
            let race_base = race.and_then(|f| f.estimate(&base_col));
            let race_v = race.and_then(|f| f.estimate(&col));
            rows.push(vec![
                format!("{v}{suffix}"),
                v.to_string(),
                format_value(diff(solo_coef, solo_base_coef)),
                format_value(diff(solo.and_then(FitRecord::adj_r_squared), base_solo.as_ref().and_then(FitRecord::adj_r_squared))),
                race_id,
                format_value(diff(race_base, race_v)),
                race.and_then(|f| f.result.as_ref()).map_or(String::new(), |r| r.n.to_string()),
            ]);
        }
    }
    report.tables.push(Table {
        file: "deltas.csv".into(),
        header: ["spec_id", "variant", "solo_coef_delta", "solo_adj_r2_delta", "race_spec_id", "race_coef_gap", "N"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    Ok(report)
}

/// Pearson correlations among the measure's variant columns.
pub fn correlation_battery(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::Correlation.name());
    let columns: Vec<String> = config.variants.iter().map(|v| config.column(*v)).collect();
    require(frame, &columns, "signal")?;
    if columns.len() < 2 {
        report.notes.push("fewer than two variants; no correlations".into());
        return Ok(report);
    }
    let m = pearson_matrix(frame, &columns)?;
    let mut header = vec!["variable".to_string()];
    header.extend(m.names.iter().cloned());
    let rows = m
        .names
        .iter()
        .zip(&m.values)
        .map(|(name, row)| std::iter::once(name.clone()).chain(row.iter().map(|v| format!("{v:.6}"))).collect())
        .collect();
    report.tables.push(Table { file: "correlation.csv".into(), header, rows });
    Ok(report)
}

/// Per-quarter solo fits of the baseline and comparison signals, with the
/// independent variables re-standardized inside each quarter.
pub fn quarterly_series(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::Quarterly.name());
    let (a, b) = (config.baseline, config.compare);
    require(frame, &[config.column(a), config.column(b), config.dependent.clone()], "quarterly")?;
    require(frame, &config.controls, "control")?;
    let mut quarters: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in 0..frame.len() {
        quarters.entry(frame.quarter_of(r)).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (quarter, idx) in &quarters {
        let sub = frame.take(idx);
        let dates = sub.date.iter().collect::<std::collections::BTreeSet<_>>().len();
        let min_rows = 1 + config.controls.len() + dates + 5;
        if sub.len() < min_rows {
            report.notes.push(format!("{quarter}: skipped, {} rows below the minimum of {min_rows}", sub.len()));
            continue;
        }
        let mut jobs = Vec::new();
        for v in [a, b] {
            let mut regs = vec![config.column(v)];
            regs.extend(config.controls.iter().cloned());
            jobs.push(Job { variant: v.to_string(), spec: config.spec(format!("q{quarter}_{v}"), &config.dependent, regs) });
        }
        let recs = run_jobs(&sub, jobs, config.jobs, &mut report.notes);
        let ca = recs[0].estimate(&config.column(a));
        let cb = recs[1].estimate(&config.column(b));
        rows.push(vec![quarter.clone(), format_value(ca), format_value(cb), format_value(ca.zip(cb).map(|(x, y)| x - y))]);
        fits.extend(recs);
    }
    if quarters.is_empty() {
        report.notes.push("no rows; empty series".into());
    }
    report.fits = fits;
    report.tables.push(Table {
        file: "series.csv".into(),
        header: vec!["quarter".into(), format!("coeff_{a}"), format!("coeff_{b}"), "difference".into()],
        rows,
    });
    Ok(report)
}

/// Adds a `Gap` column, the absolute difference between the baseline and
/// comparison scores, unless the frame already has one.
pub fn with_gap(frame: &Frame, config: &EvaluationConfig) -> Result<Frame> {
    let mut out = frame.clone();
    if !out.has_column("Gap") {
        let a = frame.column(&config.column(config.baseline))?;
        let b = frame.column(&config.column(config.compare))?;
        out.set_column("Gap", a.iter().zip(b).map(|(x, y)| gap(*x, *y)).collect())?;
    }
    Ok(out)
}

/// Univariate regressions of the gap on each determinant, then the
/// comparison signal interacted with the gap.
pub fn gap_battery(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::Gap.name());
    let frame = with_gap(frame, config)?;
    let mut jobs = Vec::new();
    for det in &config.gap_determinants {
        if !frame.has_column(det) {
            report.notes.push(format!("gap_on_{det}: determinant column not present; skipped"));
            continue;
        }
        jobs.push(Job { variant: config.compare.to_string(), spec: config.spec(format!("gap_on_{det}"), "Gap", vec![det.clone()]) });
    }
    if config.gap_determinants.is_empty() {
        report.notes.push("no gap determinants requested".into());
    }
    let signal = config.column(config.compare);
    require(&frame, &[signal.clone(), config.dependent.clone()], "gap interaction")?;
    let mut with_controls = vec![signal.clone(), "Gap".to_string()];
    with_controls.extend(config.controls.iter().filter(|c| frame.has_column(c)).cloned());
    for (id, regs) in [("gap_interaction", vec![signal.clone(), "Gap".to_string()]), ("gap_interaction_ctrl", with_controls)] {
        let mut spec = config.spec(id.to_string(), &config.dependent, regs);
        spec.interactions.push((signal.clone(), "Gap".to_string()));
        jobs.push(Job { variant: config.compare.to_string(), spec });
    }
    report.fits = run_jobs(&frame, jobs, config.jobs, &mut report.notes);
    Ok(report)
}

/// Horse races of the baseline and comparison variants on the four
/// forward-looking outcomes.
pub fn multitask_battery(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::Multitask.name());
    let (a, b) = (config.baseline, config.compare);
    let mut jobs = Vec::new();
    for (outcome, measure, controls) in multitask_designs() {
        let ca = signal_column(measure, a);
        let cb = signal_column(measure, b);
        let controls: Vec<String> = controls.into_iter().map(String::from).collect();
        require(frame, &[outcome.to_string()], "outcome")?;
        require(frame, &[ca.clone(), cb.clone()], "signal")?;
        require(frame, &controls, "control")?;
        let mut regs = vec![ca, cb];
        regs.extend(controls);
        jobs.push(Job { variant: format!("{a}+{b}"), spec: config.spec(format!("{outcome}~{measure}"), outcome, regs) });
    }
    report.fits = run_jobs(frame, jobs, config.jobs, &mut report.notes);
    Ok(report)
}

/// Signal × moderator fits for each configured moderator and for the
/// baseline and comparison variants.
pub fn interaction_battery(frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::new(Battery::Interaction.name());
    let frame = with_gap(frame, config)?;
    require(&frame, &[config.dependent.clone()], "dependent")?;
    let controls: Vec<String> = config.controls.iter().filter(|c| frame.has_column(c)).cloned().collect();
    let mut jobs = Vec::new();
    for z in &config.moderators {
        if !frame.has_column(z) {
            report.notes.push(format!("moderator {z}: column not present; skipped"));
            continue;
        }
        for v in [config.baseline, config.compare] {
            let signal = config.column(v);
            require(&frame, &[signal.clone()], "signal")?;
            let mut regs = vec![signal.clone(), z.clone()];
            regs.extend(controls.iter().cloned());
            let mut spec = config.spec(format!("{v}_x_{z}"), &config.dependent, regs);
            spec.interactions.push((signal, z.clone()));
            jobs.push(Job { variant: v.to_string(), spec });
        }
    }
    report.fits = run_jobs(&frame, jobs, config.jobs, &mut report.notes);
    Ok(report)
}

pub fn run_battery(battery: Battery, frame: &Frame, config: &EvaluationConfig) -> Result<BatteryReport> {
    match battery {
        Battery::InformationLoss => information_loss_battery(frame, config),
        Battery::Correlation => correlation_battery(frame, config),
        Battery::Quarterly => quarterly_series(frame, config),
        Battery::Gap => gap_battery(frame, config),
        Battery::Multitask => multitask_battery(frame, config),
        Battery::Interaction => interaction_battery(frame, config),
    }
}

fn coefficient_rows(report: &BatteryReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for f in &report.fits {
        let Some(r) = &f.result else { continue };
        for c in &r.coefficients {
            rows.push(vec![
                f.spec_id.clone(),
                f.variant.clone(),
                f.dependent.clone(),
                c.name.clone(),
                format_value(Some(c.estimate)),
                format_value(Some(c.std_error)),
                format_value(Some(c.t_stat)),
                format_value(Some(c.p_value)),
                c.stars().to_string(),
                r.n.to_string(),
                r.clusters.to_string(),
            ]);
        }
    }
    rows
}

fn summary_rows(report: &BatteryReport) -> Vec<Vec<String>> {
    report
        .fits
        .iter()
        .map(|f| match &f.result {
            Some(r) => vec![
                f.spec_id.clone(),
                f.variant.clone(),
                f.dependent.clone(),
                "ok".into(),
                r.n.to_string(),
                r.clusters.to_string(),
                format_value(Some(r.r_squared)),
                format_value(Some(r.adj_r_squared)),
                r.dropped.to_string(),
                String::new(),
            ],
            None => vec![
                f.spec_id.clone(),
                f.variant.clone(),
                f.dependent.clone(),
                "error".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                f.error.clone().unwrap_or_default(),
            ],
        })
        .collect()
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Regression table in the usual layout: one column per fit, coefficient
/// with significance marks over the t-statistic in parentheses.
pub fn render_table(report: &BatteryReport) -> String {
    let fits: Vec<&FitRecord> = report.fits.iter().collect();
    let mut names: Vec<String> = Vec::new();
    for f in &fits {
        if let Some(r) = &f.result {
            for c in &r.coefficients {
                if !names.contains(&c.name) {
                    names.push(c.name.clone());
                }
            }
        }
    }
    let mut grid: Vec<Vec<String>> = Vec::new();
    grid.push(std::iter::once(String::new()).chain(fits.iter().map(|f| f.spec_id.clone())).collect());
    grid.push(std::iter::once("dependent".to_string()).chain(fits.iter().map(|f| f.dependent.clone())).collect());
    for name in &names {
        let mut est = vec![name.clone()];
        let mut t = vec![String::new()];
        for f in &fits {
            match f.result.as_ref().and_then(|r| r.coefficient(name)) {
                Some(c) => {
                    est.push(format!("{:.3}{}", c.estimate, c.stars()));
                    t.push(format!("({:.2})", c.t_stat));
                }
                None => {
                    est.push(String::new());
                    t.push(String::new());
                }
            }
        }
        grid.push(est);
        grid.push(t);
    }
    let stat = |label: &str, f: &dyn Fn(&RegressionResult) -> String| -> Vec<String> {
        std::iter::once(label.to_string())
            .chain(fits.iter().map(|fit| fit.result.as_ref().map_or("n/a".to_string(), f)))
            .collect()
    };
    grid.push(stat("Adj. R2 (%)", &|r| format!("{:.2}", 100.0 * r.adj_r_squared)));
    grid.push(stat("N", &|r| r.n.to_string()));
    grid.push(stat("Clusters", &|r| r.clusters.to_string()));

    let cols = grid[0].len();
    let widths: Vec<usize> = (0..cols).map(|j| grid.iter().map(|row| row[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in grid.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, cell)| if j == 0 { format!("{cell:<w$}", w = widths[j]) } else { format!("{cell:>w$}", w = widths[j]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 1 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    out.push_str("Date fixed effects; t-statistics from date-clustered standard errors. * p<0.10, ** p<0.05, *** p<0.01.\n");
    out
}

fn render_extra(table: &Table) -> String {
    let mut grid = vec![table.header.clone()];
    grid.extend(table.rows.iter().cloned());
    let cols = table.header.len();
    let widths: Vec<usize> =
        (0..cols).map(|j| grid.iter().map(|r| r.get(j).map_or(0, |c| c.chars().count())).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &grid {
        let line: Vec<String> = row.iter().enumerate().map(|(j, c)| format!("{c:>w$}", w = widths[j])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub const COEFFICIENT_HEADER: [&str; 11] =
    ["spec_id", "variant", "dependent", "regressor", "estimate", "std_error", "t_stat", "p_value", "stars", "N", "clusters"];
pub const SUMMARY_HEADER: [&str; 10] =
    ["spec_id", "variant", "dependent", "status", "N", "clusters", "r2", "adj_r2", "dropped", "message"];

/// Writes `coefficients.csv`, `summary.csv`, `table.txt`, `notes.txt` and
/// any extra tables for one battery into `dir`.
pub fn write_battery(dir: &Path, report: &BatteryReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join("coefficients.csv"), &COEFFICIENT_HEADER.map(String::from), &coefficient_rows(report))?;
    write_csv(&dir.join("summary.csv"), &SUMMARY_HEADER.map(String::from), &summary_rows(report))?;
    let mut text = String::new();
    if !report.fits.is_empty() {
        text.push_str(&render_table(report));
    }
    for t in &report.tables {
        write_csv(&dir.join(&t.file), &t.header, &t.rows)?;
        let _ = write!(text, "\n{}\n{}", t.file, render_extra(t));
    }
    let table_path = dir.join("table.txt");
    std::fs::write(&table_path, text).map_err(|e| Error::io(&table_path, e))?;
    let notes_path = dir.join("notes.txt");
    let notes: String = report.notes.iter().map(|n| format!("{n}\n")).collect();
    std::fs::write(&notes_path, notes).map_err(|e| Error::io(&notes_path, e))
}

pub fn write_report(root: &Path, reports: &[BatteryReport]) -> Result<()> {
    for r in reports {
        write_battery(&root.join(&r.name), r)?;
    }
    Ok(())
}

pub fn write_recognition(dir: &Path, variant_reports: &[(String, RecognitionReport)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = ["variant", "documents", "firm", "year", "firm_and_year", "firm_or_year"].map(String::from);
    let rows: Vec<Vec<String>> = variant_reports
        .iter()
        .map(|(v, r)| {
            vec![
                v.clone(),
                r.documents.to_string(),
                format!("{:.2}", r.firm),
                format!("{:.2}", r.year),
                format!("{:.2}", r.firm_and_year),
                format!("{:.2}", r.firm_or_year),
            ]
        })
        .collect();
    write_csv(&dir.join("recognition.csv"), &header, &rows)?;
    let t = Table { file: "recognition.csv".into(), header: header.to_vec(), rows };
    let path = dir.join("table.txt");
    std::fs::write(&path, render_extra(&t)).map_err(|e| Error::io(&path, e))
}
