//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anonloss::corpus::{aggregate_signals, join_panel, Variant};
use anonloss::econometrics::{fit_fe_ols, RegressionSpec};
use anonloss::evaluation::{information_loss_battery, recognition_report, EvaluationConfig};
use anonloss::llm::{
    parse_response, score_identity, sentiment_score, Direction, Gateway, OrdinalEncoding, PromptKind, RecognitionOutcome,
    ResponseCache,
};
use anonloss::pipeline::{anonymize_documents, extract_signals, Measure, SpanSource};
use anonloss::synthetic::{generate, SyntheticConfig};
use anonloss::{anonymize, restore, CategorySet, EntitySpan, EntityType, Frame, Gazetteer, Recognizer, RecognizerConfig, WordTokenizer};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROUND_TRIP_DOCS: usize = 1000;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(10);
const ORACLE_INSTANCES: usize = 200;
const ORACLE_REL_TOL: f64 = 1e-8;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const RESCALE_INSTANCES: usize = 50;
const RESCALE_TOL: f64 = 1e-10;
const RECOVERY_SEEDS: u64 = 100;
const RECOVERY_MIN_SHARE: f64 = 0.95;
const RECOVERY_SNR: f64 = 2.0;
const RECOVERY_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

// 1 ------------------------------------------------------------------------

const WORDS: [&str; 16] = [
    "revenue", "grew", "café", "Zürich", "margin", "naïve", "東京", "quarter", "déjà", "vu", "guidance", "the", "of",
    "Ærø", "ünïcödé", "deal",
];
const TYPES: [EntityType; 8] = [
    EntityType::Org,
    EntityType::Person,
    EntityType::Gpe,
    EntityType::Money,
    EntityType::Date,
    EntityType::Product,
    EntityType::Percent,
    EntityType::Norp,
];

fn random_document(rng: &mut ChaCha8Rng) -> (String, Vec<EntitySpan>) {
    let n = rng.random_range(1..120);
    let mut text = String::new();
    let mut bounds = Vec::new();
    let mut chars = 0usize;
    for i in 0..n {
        if i > 0 {
            let sep = [" ", ", ", "; ", " – ", ". "][rng.random_range(0..5)];
            text.push_str(sep);
            chars += sep.chars().count();
        }
        let w = WORDS[rng.random_range(0..WORDS.len())];
        bounds.push((chars, chars + w.chars().count()));
        text.push_str(w);
        chars += w.chars().count();
    }
    let chars_vec: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bounds.len() {
        if rng.random_bool(0.3) {
            let len = rng.random_range(1..=3).min(bounds.len() - i);
            let (start, end) = (bounds[i].0, bounds[i + len - 1].1);
            let surface: String = chars_vec[start..end].iter().collect();
            spans.push(EntitySpan::new(start, end, TYPES[rng.random_range(0..TYPES.len())].clone(), surface));
            i += len + 1;
        } else {
            i += 1;
        }
    }
    (text, spans)
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut masked = 0;
    for d in 0..ROUND_TRIP_DOCS {
        let (text, spans) = random_document(&mut rng);
        let a = anonymize(&text, &spans, CategorySet::ALL).map_err(|e| format!("doc {d}: {e}"))?;
        masked += spans.len();
        let back = restore(&a.text, &a.map);
        check(back.as_bytes() == text.as_bytes(), || format!("doc {d} differs after restore"))?;
    }
    let elapsed = started.elapsed();
    check(elapsed < ROUND_TRIP_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{ROUND_TRIP_DOCS} docs, {masked} spans, {elapsed:.2?}"))
}

// 2 ------------------------------------------------------------------------

fn mapping_conformance() -> Outcome {
    let mut gazetteer = Gazetteer::new();
    gazetteer.add(EntityType::Org, "Apple");
    gazetteer.add(EntityType::Person, "Tim Cook");
    gazetteer.add(EntityType::Person, "Luca Maestri");
    let r = Recognizer::new(&RecognizerConfig { gazetteer, number_patterns: true }).map_err(|e| e.to_string())?;

    let fixture = "Speaking on behalf of Apple are CEO Tim Cook and CFO Luca Maestri. Apple thanked Tim Cook.";
    let a = anonymize(fixture, &r.recognize(fixture), CategorySet::ALL).map_err(|e| e.to_string())?;
    let got: Vec<(String, String)> = a.map.entries().map(|e| (e.surface.clone(), e.placeholder.to_string())).collect();
    let want = [("Apple", "ORG_1"), ("Tim Cook", "PERSON_1"), ("Luca Maestri", "PERSON_2")]
        .map(|(s, p)| (s.to_string(), p.to_string()));
    check(got == want, || format!("map {got:?}"))?;
    check(
        a.text == "Speaking on behalf of ORG_1 are CEO PERSON_1 and CFO PERSON_2. ORG_1 thanked PERSON_1.",
        || format!("text {:?}", a.text),
    )?;

    let example = "Today, Apple is reporting revenue of $119.6 billion for the December quarter, up 2% from a year ago \
                   despite having one less week in the quarter.";
    let skeleton = "DATE_1, ORG_1 is reporting revenue of MONEY_1 for DATE_2, up PERCENT_1 from DATE_3 despite having \
                    DATE_4 in DATE_5.";
    let b = anonymize(example, &r.recognize(example), CategorySet::ALL).map_err(|e| e.to_string())?;
    check(b.text == skeleton, || format!("example gave {:?}", b.text))?;
    Ok("fixture map and example skeleton match".into())
}

// 3 and 4 ------------------------------------------------------------------

struct Instance {
    y: Vec<f64>,
    x: Vec<Vec<f64>>,
    clusters: Vec<usize>,
    n_clusters: usize,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let g = rng.random_range(2..=5);
    let k = rng.random_range(1..=4);
    let n = rng.random_range(k + g + 2..=50);
    let effects: Vec<f64> = (0..g).map(|_| rng.random_range(-3.0..3.0)).collect();
    let slopes: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut clusters: Vec<usize> = (0..g).collect();
    clusters.extend((g..n).map(|_| rng.random_range(0..g)));
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &c in &clusters {
        let row: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0) * 3.0 + c as f64 * 0.5).collect();
        let noise = rng.random_range(-1.0..1.0) * (1.0 + row[0].abs());
        y.push(effects[c] + row.iter().zip(&slopes).map(|(a, b)| a * b).sum::<f64>() + noise);
        x.push(row);
    }
    Instance { y, x, clusters, n_clusters: g }
}

fn instance_frame(inst: &Instance) -> Frame {
    let n = inst.y.len();
    let base = NaiveDate::from_ymd_opt(2022, 3, 1).unwrap();
    let dates = inst.clusters.iter().map(|&c| base + chrono::Duration::days(c as i64)).collect();
    let firms = (0..n).map(|i| format!("f{i}")).collect();
    let mut frame = Frame::new(firms, dates).unwrap();
    frame.set_column("y", inst.y.iter().copied().map(Some).collect()).unwrap();
    for j in 0..inst.x[0].len() {
        frame.set_column(format!("x{j}"), inst.x.iter().map(|r| Some(r[j])).collect()).unwrap();
    }
    frame
}

fn regressors(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("x{j}")).collect()
}

fn spec(k: usize) -> RegressionSpec {
    let names = regressors(k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    RegressionSpec::new("acceptance", "y", &refs)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let started = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..ORACLE_INSTANCES {
        let inst = random_instance(&mut rng);
        let k = inst.x[0].len();
        let want = oracle::dummy_ols(&inst.y, &inst.x, &inst.clusters, inst.n_clusters)
            .ok_or_else(|| format!("instance {i}: oracle singular"))?;
        let got = fit_fe_ols(&spec(k).raw(), &instance_frame(&inst)).map_err(|e| format!("instance {i}: {e}"))?;
        for (j, name) in regressors(k).iter().enumerate() {
            let c = got.coefficient(name).ok_or_else(|| format!("instance {i}: no {name}"))?;
            for (what, g, w) in [("coefficient", c.estimate, want.beta[j]), ("std error", c.std_error, want.se[j])] {
                let e = rel_err(g, w);
                worst = worst.max(e);
                check(e <= ORACLE_REL_TOL, || format!("instance {i} {name} {what}: {g} vs {w}"))?;
            }
        }
        let e = rel_err(got.adj_r_squared, want.adj_r2);
        worst = worst.max(e);
        check(e <= ORACLE_REL_TOL, || format!("instance {i} adj R2: {} vs {}", got.adj_r_squared, want.adj_r2))?;
    }
    let elapsed = started.elapsed();
    check(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{ORACLE_INSTANCES} instances, worst relative error {worst:.1e}, {elapsed:.2?}"))
}

fn rescale_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..RESCALE_INSTANCES {
        let mut inst = random_instance(&mut rng);
        let k = inst.x[0].len();
        let j = rng.random_range(0..k);
        let factor = rng.random_range(-3.0f64..3.0).exp();
        let name = format!("x{j}");
        let raw_before = fit_fe_ols(&spec(k).raw(), &instance_frame(&inst)).map_err(|e| e.to_string())?;
        let std_before = fit_fe_ols(&spec(k), &instance_frame(&inst)).map_err(|e| e.to_string())?;
        for row in &mut inst.x {
            row[j] *= factor;
        }
        let raw_after = fit_fe_ols(&spec(k).raw(), &instance_frame(&inst)).map_err(|e| e.to_string())?;
        let std_after = fit_fe_ols(&spec(k), &instance_frame(&inst)).map_err(|e| e.to_string())?;
        let (b0, b1) = (raw_before.coefficient(&name).unwrap(), raw_after.coefficient(&name).unwrap());
        let checks = [
            ("coefficient × factor", b1.estimate * factor, b0.estimate),
            ("raw t", b1.t_stat, b0.t_stat),
            ("standardized t", std_after.coefficient(&name).unwrap().t_stat, std_before.coefficient(&name).unwrap().t_stat),
        ];
        for (what, g, w) in checks {
            let e = rel_err(g, w);
            worst = worst.max(e);
            check(e <= RESCALE_TOL, || format!("instance {i} {what}: {g} vs {w} (factor {factor})"))?;
        }
    }
    Ok(format!("{RESCALE_INSTANCES} instances, worst relative error {worst:.1e}"))
}

// 5 ------------------------------------------------------------------------

fn recovery_seed(seed: u64) -> Result<bool, String> {
    let data = generate(&SyntheticConfig {
        seed,
        firms: 20,
        slots: 10,
        signal_to_noise: RECOVERY_SNR,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let recognizer = Recognizer::new(&data.recognizer_config()).map_err(|e| e.to_string())?;
    let provider = Arc::new(data.mock_provider().map_err(|e| e.to_string())?);
    let gateway = Gateway::new(provider, ResponseCache::in_memory(), Default::default());
    let source = SpanSource { recognizer: &recognizer, external: None };
    let texts = anonymize_documents(&data.documents, &source, &[Variant::Raw, Variant::Trf], None, &WordTokenizer, 1)
        .map_err(|e| e.to_string())?
        .texts;
    let (records, _) = extract_signals(
        &gateway,
        &data.documents,
        &texts,
        &[Measure::Sentiment],
        &data.calendar,
        &OrdinalEncoding::default(),
        1,
    )
    .map_err(|e| e.to_string())?;
    let (frame, _) = join_panel(&aggregate_signals(&records), &data.panel).map_err(|e| e.to_string())?;
    let report = information_loss_battery(&frame, &EvaluationConfig::default()).map_err(|e| e.to_string())?;
    let adj = |id: &str| report.fit(id).and_then(|f| f.adj_r_squared());
    let race = report.fit("race_RAW_TRF");
    let coef = |c: &str| race.and_then(|f| f.estimate(c));
    match (adj("solo_RAW"), adj("solo_TRF"), coef("Sentiment_RAW"), coef("Sentiment_TRF")) {
        (Some(r2_raw), Some(r2_trf), Some(b_raw), Some(b_trf)) => Ok(r2_trf < r2_raw && b_raw > b_trf),
        _ => Err(format!("seed {seed}: a fit failed: {:?}", report.fits.iter().map(|f| &f.error).collect::<Vec<_>>())),
    }
}

fn information_loss_recovery() -> Outcome {
    let started = Instant::now();
    let mut hits = 0;
    for seed in 0..RECOVERY_SEEDS {
        if recovery_seed(seed)? {
            hits += 1;
        }
    }
    let elapsed = started.elapsed();
    let share = hits as f64 / RECOVERY_SEEDS as f64;
    check(share >= RECOVERY_MIN_SHARE, || format!("recovered in {hits}/{RECOVERY_SEEDS} seeds"))?;
    check(elapsed < RECOVERY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("recovered in {hits}/{RECOVERY_SEEDS} seeds, {elapsed:.2?}"))
}

// 6 ------------------------------------------------------------------------

fn parser_strictness() -> Outcome {
    let valid: [(PromptKind, &str); 30] = [
        (PromptKind::Recognize, "**Company Estimate: AAPL**,**Year Estimate: 2019**"),
        (PromptKind::Recognize, "**Company Estimate: MSFT**,**Year Estimate: 2021**"),
        (PromptKind::Recognize, "**Company Estimate: BRK.B**,**Year Estimate: 2018**"),
        (PromptKind::Recognize, "**Company Estimate: BF-B**,**Year Estimate: 2017**"),
        (PromptKind::Recognize, "**Company Estimate: F**,**Year Estimate: 2010**"),
        (PromptKind::Recognize, "**Company Estimate: UNKN**,**Year Estimate: 2019**."),
        (PromptKind::Recognize, "  **Company Estimate: NVDA**,**Year Estimate: 2023**\n"),
        (PromptKind::Recognize, "**Company Estimate: goog**,**Year Estimate: 2015**"),
        (PromptKind::Recognize, "**Company Estimate: T**,**Year Estimate: 1999**"),
        (PromptKind::Recognize, "**Company Estimate: XOM**,**Year Estimate: 2020**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: 0.6**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 0**,**Magnitude Estimate: 0.25**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: 1**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 0**,**Magnitude Estimate: 0**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: 1.0**."),
        (PromptKind::SentimentNews, "**Direction Estimate: NA**,**Magnitude Estimate: NA**"),
        (PromptKind::SentimentNews, "**Direction Estimate: 0**,**Magnitude Estimate: 0.999**"),
        (PromptKind::SentimentNews, " **Direction Estimate: 1**,**Magnitude Estimate: 0.05** "),
        (PromptKind::SentimentNews, "**Direction Estimate: NA**,**Magnitude Estimate: 0.0**"),
        (PromptKind::SentimentNews, "**Direction Estimate: 1**,**Magnitude Estimate: 0.3333**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.35**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 1**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 1.0**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.5**."),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.125**\n"),
        (PromptKind::Uncertainty, "  **Uncertainty Score: 0.9**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.01**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.75**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.000**"),
    ];
    let near_miss: [(PromptKind, &str); 30] = [
        (PromptKind::Recognize, "**Company Estimate: AAPL**, **Year Estimate: 2019**"),
        (PromptKind::Recognize, "**Company Estimate: AAPL**,**Year Estimate: 19**"),
        (PromptKind::Recognize, "Company Estimate: AAPL,Year Estimate: 2019"),
        (PromptKind::Recognize, "**Company Estimate: AAPL**"),
        (PromptKind::Recognize, "**Company Estimate: Apple Inc**,**Year Estimate: 2019**"),
        (PromptKind::Recognize, "**Company estimate: AAPL**,**Year Estimate: 2019**"),
        (PromptKind::Recognize, "**Company Estimate: AAPL**,**Year Estimate: 2019** I think"),
        (PromptKind::Recognize, "**Company Estimate: **,**Year Estimate: 2019**"),
        (PromptKind::Recognize, "**Company Estimate: AAPL**,**Year Estimate: 2019**.."),
        (PromptKind::Recognize, "**Year Estimate: 2019**,**Company Estimate: AAPL**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 2**,**Magnitude Estimate: 0.6**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: 1.2**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: -0.4**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1**,**Magnitude Estimate: .6**"),
        (PromptKind::SentimentTranscript, "**Direction Estimate: 1** **Magnitude Estimate: 0.6**"),
        (PromptKind::SentimentNews, "**Direction Estimate: 1**,**Magnitude Estimate: NA**"),
        (PromptKind::SentimentNews, "**Direction Estimate: positive**,**Magnitude Estimate: 0.6**"),
        (PromptKind::SentimentNews, "*Direction Estimate: 1*,*Magnitude Estimate: 0.6*"),
        (PromptKind::SentimentNews, "Direction Estimate: 1, Magnitude Estimate: 0.6"),
        (PromptKind::SentimentNews, "**Direction Estimate: 1**,**Magnitude Estimate: 0.6**\nBecause margins grew."),
        (PromptKind::Uncertainty, "**Uncertainty Score: 1.4**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: -0.2**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: high**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.3"),
        (PromptKind::Uncertainty, "Uncertainty Score: 0.3"),
        (PromptKind::Uncertainty, "**Uncertainty score: 0.3**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 30%**"),
        (PromptKind::Uncertainty, "**Uncertainty Score:0.3**"),
        (PromptKind::Uncertainty, "**Uncertainty Score: 0.3** (moderate)"),
        (PromptKind::Uncertainty, "**Uncertainty Score: NA**"),
    ];
    for (kind, s) in valid {
        check(parse_response(kind, s).is_ok(), || format!("rejected valid {kind} answer {s:?}"))?;
    }
    for (kind, s) in near_miss {
        check(parse_response(kind, s).is_err(), || format!("accepted near miss {kind} answer {s:?}"))?;
    }
    Ok(format!("{} valid accepted, {} near misses rejected", valid.len(), near_miss.len()))
}

// 7 ------------------------------------------------------------------------

fn counted(table: &[(bool, bool)]) -> [f64; 4] {
    let n = table.len();
    let (mut firm, mut year, mut both, mut either) = (0usize, 0usize, 0usize, 0usize);
    for &(f, y) in table {
        firm += usize::from(f);
        year += usize::from(y);
        both += usize::from(f && y);
        either += usize::from(f || y);
    }
    [firm, year, both, either].map(|c| 100.0 * c as f64 / n as f64)
}

fn compare_table(table: &[(bool, bool)]) -> Result<(), String> {
    let outcomes: Vec<RecognitionOutcome> = table
        .iter()
        .map(|&(f, y)| score_identity(Some((if f { "TRUE" } else { "FALSE" }, if y { 2020 } else { 2019 })), "TRUE", 2020))
        .collect();
    let r = recognition_report(&outcomes).map_err(|e| e.to_string())?;
    let got = [r.firm, r.year, r.firm_and_year, r.firm_or_year];
    check(got == counted(table), || format!("table {table:?}: {got:?} vs {:?}", counted(table)))
}

fn recognition_arithmetic() -> Outcome {
    let cell = |code: usize| (code & 1 == 1, code & 2 == 2);
    let mut tables = 0usize;
    // every table up to eight documents
    for n in 4..=8 {
        for mut code in 0..4usize.pow(n as u32) {
            let mut table = Vec::with_capacity(n);
            for _ in 0..n {
                table.push(cell(code % 4));
                code /= 4;
            }
            compare_table(&table)?;
            tables += 1;
        }
    }
    // every composition of cell counts up to sixteen documents
    for n in 4..=16usize {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let d = n - a - b - c;
                    let mut table = Vec::with_capacity(n);
                    for (count, code) in [(a, 0), (b, 1), (c, 2), (d, 3)] {
                        table.extend(std::iter::repeat_n(cell(code), count));
                    }
                    compare_table(&table)?;
                    tables += 1;
                }
            }
        }
    }
    Ok(format!("{tables} truth tables"))
}

// 8 ------------------------------------------------------------------------

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn end_to_end_determinism() -> Outcome {
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic20/anonloss.toml");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for (run, jobs) in [("a", "1"), ("b", "4")] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_anonloss"))
            .args(["--config", bundled.to_str().unwrap(), "--seed", "7", "--jobs", jobs, "--out", out.to_str().unwrap(), "run"])
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || format!("run {run} failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        reports.push(tree(&out.join("report")));
    }
    check(!reports[0].is_empty(), || "empty report directory".into())?;
    let names: Vec<&PathBuf> = reports[0].keys().collect();
    check(names == reports[1].keys().collect::<Vec<_>>(), || "different file sets".into())?;
    for (name, bytes) in &reports[0] {
        check(reports[1][name] == *bytes, || format!("{} differs", name.display()))?;
    }
    Ok(format!("{} report files identical across two runs", reports[0].len()))
}

// 9 ------------------------------------------------------------------------

fn sentiment_formula() -> Outcome {
    let mut points = 0;
    for step in 0..=20 {
        let m = f64::from(step) / 20.0;
        let up = sentiment_score(Direction::Bullish, m).map_err(|e| e.to_string())?.unwrap();
        let down = sentiment_score(Direction::Bearish, m).map_err(|e| e.to_string())?.unwrap();
        for (d, s) in [(1.0, up), (0.0, down)] {
            check(s == (2.0 * d - 1.0) * m, || format!("direction {d} magnitude {m}: {s}"))?;
            check((-1.0..=1.0).contains(&s), || format!("{s} out of range"))?;
            points += 1;
        }
        check(up == -down, || format!("not odd at magnitude {m}"))?;
    }
    check(sentiment_score(Direction::NotAvailable, 0.5).unwrap().is_none(), || "NA direction scored".into())?;
    Ok(format!("{points} grid points"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 anonymization round trip", round_trip),
        ("2 mapping conformance", mapping_conformance),
        ("3 econometrics oracle equivalence", oracle_equivalence),
        ("4 rescaling and t invariance", rescale_invariance),
        ("5 synthetic information-loss recovery", information_loss_recovery),
        ("6 parser strictness", parser_strictness),
        ("7 recognition arithmetic", recognition_arithmetic),
        ("8 end-to-end determinism", end_to_end_determinism),
        ("9 sentiment formula", sentiment_formula),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
