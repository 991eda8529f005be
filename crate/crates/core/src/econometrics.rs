//! Winsorization, standardization, OLS with absorbed date fixed effects and
//! date-clustered standard errors, Pearson correlations.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::NaiveDate;
use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Empirical percentile with linear interpolation between order statistics:
/// `h = (n − 1)·p`, result `x[⌊h⌋] + (h − ⌊h⌋)·(x[⌊h⌋+1] − x[⌊h⌋])` on the
/// ascending sample.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Clamp cuts computed from the non-missing values.
pub fn winsor_cuts(values: &[Option<f64>], lower: f64, upper: f64) -> Result<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
    if sorted.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "winsorization needs at least 2 non-missing values, got {}",
            sorted.len()
        )));
    }
    sorted.sort_by(f64::total_cmp);
    Ok((percentile(&sorted, lower), percentile(&sorted, upper)))
}

pub fn winsorize(values: &[Option<f64>], lower: f64, upper: f64) -> Result<Vec<Option<f64>>> {
    let (lo, hi) = winsor_cuts(values, lower, upper)?;
    Ok(values.iter().map(|v| v.map(|x| x.clamp(lo, hi))).collect())
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss: f64 = values.map(|x| (x - mean).powi(2)).sum();
    let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd, n)
}

/// Mean 0, sample standard deviation 1 over the non-missing entries.
pub fn standardize(values: &[Option<f64>], name: &str) -> Result<Vec<Option<f64>>> {
    let (mean, sd, n) = mean_sd(values.iter().flatten().copied());
    if n < 2 || !(sd > 0.0) {
        return Err(Error::ZeroVariance(name.to_string()));
    }
    Ok(values.iter().map(|v| v.map(|x| (x - mean) / sd)).collect())
}

/// Absolute difference between two scores; missing if either is.
pub fn gap(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

/// Name of the product column for an interaction.
pub fn interaction_name(a: &str, b: &str) -> String {
    format!("{a}:{b}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub id: String,
    pub dependent: String,
    pub regressors: Vec<String>,
    /// Products of pairs of declared regressors, appended after them.
    #[serde(default)]
    pub interactions: Vec<(String, String)>,
    #[serde(default = "yes")]
    pub winsorize: bool,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default = "default_limits")]
    pub winsor_limits: (f64, f64),
}

fn yes() -> bool {
    true
}

fn default_limits() -> (f64, f64) {
    (0.01, 0.99)
}

impl RegressionSpec {
    pub fn new(id: impl Into<String>, dependent: impl Into<String>, regressors: &[&str]) -> Self {
        RegressionSpec {
            id: id.into(),
            dependent: dependent.into(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            interactions: Vec::new(),
            winsorize: true,
            standardize: true,
            winsor_limits: default_limits(),
        }
    }

    pub fn with_interaction(mut self, a: &str, b: &str) -> Self {
        self.interactions.push((a.to_string(), b.to_string()));
        self
    }

    pub fn raw(mut self) -> Self {
        self.winsorize = false;
        self.standardize = false;
        self
    }

    /// Regressor names in design order, interactions last.
    pub fn design_names(&self) -> Vec<String> {
        let mut names = self.regressors.clone();
        names.extend(self.interactions.iter().map(|(a, b)| interaction_name(a, b)));
        names
    }

    fn validate(&self) -> Result<()> {
        if self.regressors.is_empty() {
            return Err(Error::Config(format!("specification {} has no regressors", self.id)));
        }
        for (a, b) in &self.interactions {
            for part in [a, b] {
                if !self.regressors.contains(part) {
                    return Err(Error::Config(format!(
                        "specification {}: interaction term {part:?} is not a declared regressor",
                        self.id
                    )));
                }
            }
        }
        let names = self.design_names();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) || *n == self.dependent {
                return Err(Error::Config(format!("specification {}: variable {n:?} listed twice", self.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl Coefficient {
    /// Conventional significance marks at 10%, 5% and 1%.
    pub fn stars(&self) -> &'static str {
        stars(self.p_value)
    }
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub spec_id: String,
    pub dependent: String,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    pub clusters: usize,
    /// Rows dropped by listwise deletion.
    pub dropped: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimate(&self, name: &str) -> f64 {
        self.coefficient(name).map_or(f64::NAN, |c| c.estimate)
    }
}

/// Design after deletion and preprocessing, rows sorted by (date, firm).
#[derive(Debug, Clone)]
pub struct Design {
    pub names: Vec<String>,
    pub y: Vec<f64>,
    /// Column-major regressors.
    pub x: Vec<Vec<f64>>,
    pub dates: Vec<NaiveDate>,
    pub dropped: usize,
}

/// Listwise deletion, winsorization, standardization and interaction
/// construction, in that order. Rows come back sorted so results do not
/// depend on input order.
pub fn build_design(spec: &RegressionSpec, frame: &Frame) -> Result<Design> {
    spec.validate()?;
    let dep = frame.column(&spec.dependent)?;
    let regs: Vec<&[Option<f64>]> = spec.regressors.iter().map(|r| frame.column(r)).collect::<Result<_>>()?;

    let mut missing: IndexMap<&str, usize> = IndexMap::new();
    let mut rows = Vec::new();
    for r in 0..frame.len() {
        let mut complete = true;
        for (name, col) in std::iter::once((&spec.dependent, dep)).chain(spec.regressors.iter().zip(regs.iter().copied())) {
            if col[r].is_none() {
                *missing.entry(name.as_str()).or_insert(0) += 1;
                complete = false;
            }
        }
        if complete {
            rows.push(r);
        }
    }
    if !missing.is_empty() {
        let detail: Vec<String> = missing.iter().map(|(k, v)| format!("{k}={v}")).collect();
        log::info!("{}: listwise deletion dropped {} rows (missing {})", spec.id, frame.len() - rows.len(), detail.join(", "));
    }

    let row_key = |&r: &usize| -> (NaiveDate, &str, Vec<f64>) {
        let mut vals = vec![dep[r].unwrap()];
        vals.extend(regs.iter().map(|c| c[r].unwrap()));
        (frame.date[r], frame.firm_id[r].as_str(), vals)
    };
    rows.sort_by(|a, b| {
        let (da, fa, va) = row_key(a);
        let (db, fb, vb) = row_key(b);
        da.cmp(&db).then_with(|| fa.cmp(fb)).then_with(|| {
            va.iter().zip(&vb).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
        })
    });

    let pick = |col: &[Option<f64>]| -> Vec<Option<f64>> { rows.iter().map(|&r| col[r]).collect() };
    let mut y = pick(dep);
    let mut x: Vec<Vec<Option<f64>>> = regs.iter().map(|c| pick(c)).collect();
    if spec.winsorize && rows.len() >= 2 {
        let (lo, hi) = spec.winsor_limits;
        y = winsorize(&y, lo, hi)?;
        for col in &mut x {
            *col = winsorize(col, lo, hi)?;
        }
    }
    if spec.standardize {
        for (col, name) in x.iter_mut().zip(&spec.regressors) {
            // a constant regressor is left as is; it fails the rank check
            if let Ok(z) = standardize(col, name) {
                *col = z;
            }
        }
    }
    let mut x: Vec<Vec<f64>> = x.into_iter().map(|c| c.into_iter().flatten().collect()).collect();
    for (a, b) in &spec.interactions {
        let ia = spec.regressors.iter().position(|r| r == a).unwrap();
        let ib = spec.regressors.iter().position(|r| r == b).unwrap();
        let product = x[ia].iter().zip(&x[ib]).map(|(p, q)| p * q).collect();
        x.push(product);
    }
    Ok(Design {
        names: spec.design_names(),
        y: y.into_iter().flatten().collect(),
        x,
        dates: rows.iter().map(|&r| frame.date[r]).collect(),
        dropped: frame.len() - rows.len(),
    })
}

/// Subtracts date-group means in place. Groups are indexed in date order.
fn demean(values: &mut [f64], groups: &[usize], n_groups: usize) {
    let mut sum = vec![0.0; n_groups];
    let mut count = vec![0usize; n_groups];
    for (v, &g) in values.iter().zip(groups) {
        sum[g] += v;
        count[g] += 1;
    }
    for (v, &g) in values.iter_mut().zip(groups) {
        *v -= sum[g] / count[g] as f64;
    }
}

/// Modified Gram-Schmidt over the demeaned columns; returns the names of a
/// dependent set if one exists.
fn collinear_columns(x: &[Vec<f64>], names: &[String]) -> Option<Vec<String>> {
    const TOL: f64 = 1e-9;
    let mut basis: Vec<(usize, Vec<f64>)> = Vec::new();
    for (j, col) in x.iter().enumerate() {
        let norm0 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = col.clone();
        let mut involved = Vec::new();
        for (k, q) in &basis {
            let proj: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            if proj.abs() > TOL * norm0.max(f64::MIN_POSITIVE) {
                involved.push(*k);
            }
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= TOL * norm0 {
            let mut out: Vec<String> = involved.into_iter().map(|k| names[k].clone()).collect();
            out.push(names[j].clone());
            return Some(out);
        }
        for vi in &mut v {
            *vi /= norm;
        }
        basis.push((j, v));
    }
    None
}

/// OLS of `dependent` on the regressors with date fixed effects absorbed by
/// within-date demeaning, standard errors clustered by date.
///
/// Cluster correction `G/(G−1)·(N−1)/(N−K)` with K the number of slope
/// regressors (the date effects are nested in the clusters). Adjusted R²
/// treats the date effects as estimated parameters: `1 − (1−R²)(N−1)/(N−K−G)`
/// with R² measured about the grand mean. p-values use Student t with G−1
/// degrees of freedom.
pub fn fit_fe_ols(spec: &RegressionSpec, frame: &Frame) -> Result<RegressionResult> {
    let design = build_design(spec, frame)?;
    fit_design(&spec.id, &spec.dependent, design)
}

pub fn fit_design(spec_id: &str, dependent: &str, design: Design) -> Result<RegressionResult> {
    let Design { names, y, mut x, dates, dropped } = design;
    let n = y.len();
    let k = x.len();
    let mut group_of = BTreeMap::new();
    for d in &dates {
        let next = group_of.len();
        group_of.entry(*d).or_insert(next);
    }
    let g = group_of.len();
    if n == 0 {
        return Err(Error::InsufficientData(format!("{spec_id}: no complete rows")));
    }
    if g < 2 {
        return Err(Error::SingleCluster);
    }
    if n <= k + g {
        return Err(Error::InsufficientData(format!(
            "{spec_id}: {n} rows for {k} regressors and {g} date effects"
        )));
    }
    let groups: Vec<usize> = dates.iter().map(|d| group_of[d]).collect();

    let grand_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - grand_mean).powi(2)).sum();
    let mut yt = y;
    demean(&mut yt, &groups, g);
    for col in &mut x {
        demean(col, &groups, g);
    }
    if let Some(cols) = collinear_columns(&x, &names) {
        return Err(Error::RankDeficient(cols));
    }

    let xm = DMatrix::from_fn(n, k, |i, j| x[j][i]);
    let yv = DVector::from_vec(yt);
    let xtx = xm.transpose() * &xm;
    let bread = xtx
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| xtx.clone().try_inverse())
        .ok_or_else(|| Error::RankDeficient(names.clone()))?;
    let beta = &bread * (xm.transpose() * &yv);
    let resid = &yv - &xm * &beta;
    let ssr = resid.norm_squared();

    let mut scores = DMatrix::<f64>::zeros(g, k);
    for i in 0..n {
        for j in 0..k {
            scores[(groups[i], j)] += xm[(i, j)] * resid[i];
        }
    }
    let meat = scores.transpose() * &scores;
    let c = (g as f64 / (g - 1) as f64) * ((n - 1) as f64 / (n - k) as f64);
    let vcov = (&bread * meat * &bread) * c;

    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    let adj = 1.0 - (1.0 - r2) * (n - 1) as f64 / (n - k - g) as f64;
    let tdist = StudentsT::new(0.0, 1.0, (g - 1) as f64).expect("positive degrees of freedom");
    let coefficients = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let se = vcov[(j, j)].max(0.0).sqrt();
            let t = beta[j] / se;
            let p = if t.is_finite() { 2.0 * (1.0 - tdist.cdf(t.abs())) } else if se == 0.0 { 0.0 } else { f64::NAN };
            Coefficient { name, estimate: beta[j], std_error: se, t_stat: t, p_value: p }
        })
        .collect();
    Ok(RegressionResult {
        spec_id: spec_id.to_string(),
        dependent: dependent.to_string(),
        coefficients,
        r_squared: r2,
        adj_r_squared: adj,
        n,
        clusters: g,
        dropped,
    })
}

/// Fit with two competing signals side by side.
pub fn horse_race(
    spec_id: &str,
    dependent: &str,
    signal_a: &str,
    signal_b: &str,
    controls: &[String],
    frame: &Frame,
) -> Result<RegressionResult> {
    let mut regs = vec![signal_a.to_string(), signal_b.to_string()];
    regs.extend(controls.iter().cloned());
    let spec = RegressionSpec {
        id: spec_id.to_string(),
        dependent: dependent.to_string(),
        regressors: regs,
        ..RegressionSpec::new("", "", &[])
    };
    fit_fe_ols(&spec, frame)
}

/// Signal, moderator and their product as regressors, plus controls.
pub fn interaction_fit(
    base: &RegressionSpec,
    signal: &str,
    moderator: &str,
    frame: &Frame,
) -> Result<RegressionResult> {
    if !frame.has_column(moderator) {
        return Err(Error::Config(format!("moderator column {moderator:?} not present")));
    }
    let mut spec = base.clone();
    let mut regs = vec![signal.to_string(), moderator.to_string()];
    regs.extend(base.regressors.iter().filter(|r| *r != signal && *r != moderator).cloned());
    spec.regressors = regs;
    spec.interactions = vec![(signal.to_string(), moderator.to_string())];
    fit_fe_ols(&spec, frame)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Pairwise-complete observation counts.
    pub counts: Vec<Vec<usize>>,
}

fn pearson_pair(a: &[Option<f64>], b: &[Option<f64>], names: (&str, &str)) -> Result<(f64, usize)> {
    let pairs: Vec<(f64, f64)> = a.iter().zip(b).filter_map(|(x, y)| Some(((*x)?, (*y)?))).collect();
    let n = pairs.len();
    let (ma, sa, _) = mean_sd(pairs.iter().map(|p| p.0));
    let (mb, sb, _) = mean_sd(pairs.iter().map(|p| p.1));
    if n < 2 || !(sa > 0.0) {
        return Err(Error::ZeroVariance(names.0.to_string()));
    }
    if !(sb > 0.0) {
        return Err(Error::ZeroVariance(names.1.to_string()));
    }
    let cov: f64 = pairs.iter().map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1) as f64;
    Ok(((cov / (sa * sb)).clamp(-1.0, 1.0), n))
}

/// Pearson correlations over pairwise-complete observations.
pub fn pearson_matrix(frame: &Frame, columns: &[String]) -> Result<CorrelationMatrix> {
    let cols: Vec<&[Option<f64>]> = columns.iter().map(|c| frame.column(c)).collect::<Result<_>>()?;
    let m = columns.len();
    let mut values = vec![vec![1.0; m]; m];
    let mut counts = vec![vec![0; m]; m];
    for i in 0..m {
        for j in i..m {
            let (r, n) = pearson_pair(cols[i], cols[j], (&columns[i], &columns[j]))?;
            let r = if i == j { 1.0 } else { r };
            values[i][j] = r;
            values[j][i] = r;
            counts[i][j] = n;
            counts[j][i] = n;
        }
    }
    Ok(CorrelationMatrix { names: columns.to_vec(), values, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frame(dates: &[u32], cols: &[(&str, Vec<f64>)]) -> Frame {
        let n = dates.len();
        let mut f = Frame::new(
            (0..n).map(|i| format!("f{i}")).collect(),
            dates.iter().map(|&d| NaiveDate::from_ymd_opt(2020, 1, d).unwrap()).collect(),
        )
        .unwrap();
        for (name, v) in cols {
            f.set_column(*name, v.iter().map(|x| Some(*x)).collect()).unwrap();
        }
        f
    }

    #[test]
    fn percentile_convention() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_relative_eq!(percentile(&v, 0.01), 1.99, epsilon = 1e-12);
        assert_relative_eq!(percentile(&v, 0.99), 99.01, epsilon = 1e-12);
        let w = winsorize(&v.iter().map(|x| Some(*x)).collect::<Vec<_>>(), 0.01, 0.99).unwrap();
        assert_relative_eq!(w[0].unwrap(), 1.99, epsilon = 1e-12);
        assert_relative_eq!(w[99].unwrap(), 99.01, epsilon = 1e-12);
        assert_eq!(w[50], Some(51.0));
    }

    #[test]
    fn winsorize_edge_cases() {
        let c = vec![Some(3.0); 5];
        assert_eq!(winsorize(&c, 0.01, 0.99).unwrap(), c);
        assert!(winsorize(&[None, None], 0.01, 0.99).is_err());
        assert_eq!(winsorize(&[Some(1.0), None, Some(2.0)], 0.0, 1.0).unwrap()[1], None);
    }

    #[test]
    fn standardize_examples() {
        let z = standardize(&[Some(1.0), Some(2.0), Some(3.0)], "x").unwrap();
        assert_eq!(z, vec![Some(-1.0), Some(0.0), Some(1.0)]);
        match standardize(&[Some(1.0), Some(1.0)], "Pre") {
            Err(Error::ZeroVariance(name)) => assert_eq!(name, "Pre"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_fit() {
        let dates = [1, 1, 1, 2, 2, 2, 3, 3, 3];
        let x: Vec<f64> = vec![0.3, -1.0, 2.0, 0.5, 1.5, -0.7, 0.1, 0.9, -2.2];
        let y: Vec<f64> = x.iter().zip(&dates).map(|(x, d)| 2.0 * x + f64::from(*d) * 10.0).collect();
        let f = frame(&dates, &[("y", y), ("x", x)]);
        let r = fit_fe_ols(&RegressionSpec::new("s", "y", &["x"]).raw(), &f).unwrap();
        assert_relative_eq!(r.estimate("x"), 2.0, epsilon = 1e-10);
        assert_relative_eq!(r.adj_r_squared, 1.0, epsilon = 1e-12);
        assert_eq!((r.n, r.clusters), (9, 3));
    }

    #[test]
    fn degenerate_designs() {
        let dates = [1, 1, 1, 2, 2, 2];
        let x = vec![1.0, 2.0, 4.0, 3.0, 5.0, 8.0];
        let f = frame(&dates, &[("y", vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0]), ("a", x.clone()), ("b", x)]);
        match fit_fe_ols(&RegressionSpec::new("s", "y", &["a", "b"]).raw(), &f) {
            Err(Error::RankDeficient(cols)) => assert_eq!(cols, ["a", "b"]),
            other => panic!("{other:?}"),
        }
        let one = frame(&[1, 1, 1, 1], &[("y", vec![1.0, 2.0, 3.0, 5.0]), ("x", vec![1.0, 3.0, 2.0, 4.0])]);
        assert!(matches!(fit_fe_ols(&RegressionSpec::new("s", "y", &["x"]), &one), Err(Error::SingleCluster)));
    }

    #[test]
    fn zero_moderator_is_rank_error() {
        let dates = [1, 1, 1, 1, 2, 2, 2, 2];
        let f = frame(
            &dates,
            &[
                ("y", vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 0.5, 2.5]),
                ("s", vec![0.1, 0.5, -0.3, 1.2, 0.7, -1.0, 0.2, 0.4]),
                ("z", vec![0.0; 8]),
            ],
        );
        let r = interaction_fit(&RegressionSpec::new("i", "y", &[]), "s", "z", &f);
        assert!(matches!(r, Err(Error::RankDeficient(_))), "{r:?}");
    }

    #[test]
    fn gap_values() {
        assert_relative_eq!(gap(Some(0.8), Some(0.5)).unwrap(), 0.3, epsilon = 1e-15);
        assert_eq!(gap(Some(0.4), Some(0.4)), Some(0.0));
        assert_relative_eq!(gap(Some(-0.2), Some(0.4)).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(gap(None, Some(0.1)), None);
    }

    #[test]
    fn pearson_basics() {
        let x = vec![1.0, 2.0, 4.0, 3.0];
        let f = frame(&[1, 1, 2, 2], &[("x", x.clone()), ("nx", x.iter().map(|v| -v).collect())]);
        let m = pearson_matrix(&f, &["x".into(), "nx".into()]).unwrap();
        assert_eq!(m.values[0][0], 1.0);
        assert_relative_eq!(m.values[0][1], -1.0, epsilon = 1e-15);
        assert_eq!(m.values[0][1], m.values[1][0]);
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(stars(0.009), "***");
        assert_eq!(stars(0.049), "**");
        assert_eq!(stars(0.099), "*");
        assert_eq!(stars(0.10), "");
    }
}
