use std::hint::black_box;

use anonloss::econometrics::{fit_fe_ols, RegressionSpec};
use anonloss::synthetic::{generate, SyntheticConfig};
use anonloss::{apply_map, build_entity_map, CategorySet, Frame, Recognizer};
use chrono::NaiveDate;
use criterion::{criterion_group, criterion_main, Criterion};

fn corpus() -> (Recognizer, Vec<String>) {
    let data = generate(&SyntheticConfig { firms: 20, slots: 5, ..Default::default() }).unwrap();
    let recognizer = Recognizer::new(&data.recognizer_config()).unwrap();
    (recognizer, data.documents.into_iter().map(|d| d.text).collect())
}

fn recognizer(c: &mut Criterion) {
    let (r, texts) = corpus();
    c.bench_function("recognize_100_transcripts", |b| {
        b.iter(|| texts.iter().map(|t| r.recognize(black_box(t)).len()).sum::<usize>())
    });
}

fn anonymize(c: &mut Criterion) {
    let (r, texts) = corpus();
    let prepared: Vec<_> = texts
        .iter()
        .map(|t| {
            let spans = r.recognize(t);
            let map = build_entity_map(&spans);
            (t, spans, map)
        })
        .collect();
    c.bench_function("apply_map_100_transcripts", |b| {
        b.iter(|| {
            for (t, spans, map) in &prepared {
                black_box(apply_map(t, spans, map, CategorySet::ALL).unwrap());
            }
        })
    });
}

fn regression(c: &mut Criterion) {
    let n = 20_000;
    let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let dates = (0..n).map(|i| base + chrono::Duration::days((i % 250) as i64)).collect();
    let firms = (0..n).map(|i| format!("f{}", i / 250)).collect();
    let mut frame = Frame::new(firms, dates).unwrap();
    let wave = |i: usize, k: f64| ((i as f64 * k).sin() * 1000.0).fract();
    let names = ["x0", "x1", "x2", "x3", "x4", "x5", "x6", "x7"];
    for (j, name) in names.iter().enumerate() {
        frame.set_column(*name, (0..n).map(|i| Some(wave(i, 1.3 + j as f64))).collect()).unwrap();
    }
    let y = (0..n).map(|i| Some(wave(i, 0.7) + 0.3 * wave(i, 1.3))).collect();
    frame.set_column("y", y).unwrap();
    let spec = RegressionSpec::new("bench", "y", &names);
    c.bench_function("fit_fe_ols_20k_rows_8_regressors", |b| b.iter(|| fit_fe_ols(black_box(&spec), &frame).unwrap()));
}

criterion_group!(benches, recognizer, anonymize, regression);
criterion_main!(benches);
