//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are reported but expected to stay red.

mod common;

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nightjar::corpus::{self, Annotation};
use nightjar::detect::run_regex_detectors;
use nightjar::eval::{evaluate_corpus, f1_score, macro_average, Scores};
use nightjar::masking::{Masker, PolicyPreset, ReplacementPolicy, ValuePool};
use nightjar::model::{Detection, EntityLabel, Tweet};
use nightjar::pipeline::Pipeline;
use nightjar::recognizer::{recognize_builtin, union_combine, Gazetteer, GazetteerRecognizer};
use nightjar::synth::{generate_synthetic_corpus, generate_with_gazetteer, InjectionRates};
use nightjar::text::slice_chars;
use nightjar::tokenizer::tokenize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met as stated; see the README.
const KNOWN_UNATTAINABLE: &[&str] = &["published-aggregates"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, result: Result<String, String>) -> Outcome {
    match result {
        Ok(detail) => Outcome { name, pass: true, detail },
        Err(detail) => Outcome { name, pass: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn regex_perfection() -> Result<String, String> {
    let started = Instant::now();
    let gold = generate_synthetic_corpus(1, 500, &InjectionRates::default()).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::regex_only();
    let preds: Vec<Annotation> = gold
        .iter()
        .map(|g| Annotation::from_detections(&g.tweet, &pipeline.detect(&g.tweet).unwrap()))
        .collect();
    let report = evaluate_corpus(&gold, &preds).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let mut spans = 0;
    for label in EntityLabel::REMOVAL {
        let row = report.row(label).ok_or_else(|| format!("no gold for {label}"))?;
        let s = &row.scores;
        ensure(
            s.precision == 1.0 && s.recall == 1.0 && s.f1 == 1.0 && s.aon_recall == 1.0,
            || format!("{label}: P={} R={} F1={} AON={}", s.precision, s.recall, s.f1, s.aon_recall),
        )?;
        spans += row.counts.gold;
    }
    ensure(elapsed.as_secs_f64() <= 5.0, || format!("took {elapsed:?}"))?;
    Ok(format!("6 removal labels, {spans} gold spans, all 1.0, {:.2}s", elapsed.as_secs_f64()))
}

fn metric_oracle() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + trial);
        let (gold, preds) = common::random_micro_corpus(&mut rng);
        match (evaluate_corpus(&gold, &preds), common::oracle_report(&gold, &preds)) {
            (Ok(report), Some(oracle)) => {
                common::compare(&report, &oracle, 1e-12).map_err(|e| format!("corpus {trial}: {e}"))?;
                worst = worst.max((report.micro.scores.f1 - oracle.micro.f1).abs());
                worst = worst.max((report.macro_.scores.f1 - oracle.macro_.f1).abs());
            }
            (Err(_), None) => {}
            (r, o) => return Err(format!("corpus {trial}: report ok={} oracle some={}", r.is_ok(), o.is_some())),
        }
    }
    Ok(format!("100 micro-corpora agree within 1e-12 (largest aggregate gap {worst:e})"))
}

fn published_aggregates() -> Result<String, String> {
    let rows = [
        (1.0, 1.0),
        (0.685, 0.991),
        (0.144, 0.735),
        (0.02, 0.308),
        (0.0, 0.0),
        (0.154, 0.5),
        (0.278, 1.0),
        (0.2, 1.0),
        (0.037, 0.333),
        (1.0, 1.0),
    ];
    let scores: Vec<Scores> = rows
        .iter()
        .map(|&(p, r)| Scores { precision: p, recall: r, f1: f1_score(p, r), aon_recall: 0.0 })
        .collect();
    let m = macro_average(&scores).map_err(|e| e.to_string())?;
    let micro_f1 = f1_score(0.54, 0.961);
    let user_f1 = f1_score(0.685, 0.991);
    let checks = [
        ("macro P", m.precision, 0.352),
        ("macro R", m.recall, 0.687),
        ("micro F1", micro_f1, 0.692),
        ("username F1", user_f1, 0.81),
    ];
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, got, want)| {
            let ok = (got - want).abs() <= 5e-4;
            format!("{name} {got:.6} vs {want} {}", if ok { "ok" } else { "MISS" })
        })
        .collect();
    let detail = detail.join("; ");
    if checks.iter().all(|(_, got, want)| (got - want).abs() <= 5e-4) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn union_dominance() -> Result<String, String> {
    let base = Gazetteer::builtin();
    let mut rates = InjectionRates::zero();
    for label in EntityLabel::ENTITY {
        rates.labels.insert(label, 0.6);
    }
    let (mut sum_a, mut sum_b, mut sum_u) = (0.0, 0.0, 0.0);
    for trial in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0DD5_0000 + trial);
        let keep_a = rng.random_range(0.2..0.8);
        let keep_b = rng.random_range(0.2..0.8);
        let gaz_a = base.filtered(|_, _| rng.random_bool(keep_a)).with_case_insensitive(rng.random_bool(0.5));
        let gaz_b = base.filtered(|_, _| rng.random_bool(keep_b)).with_case_insensitive(rng.random_bool(0.5));
        let n = rng.random_range(5..=30);
        let gold = generate_with_gazetteer(rng.random(), n, &rates, &base).map_err(|e| e.to_string())?;

        let (mut da, mut db, mut du) = (Vec::new(), Vec::new(), Vec::new());
        for g in &gold {
            let tokens = tokenize(&g.tweet.text);
            let a = recognize_builtin(&g.tweet, &tokens, &gaz_a, "a");
            let b = recognize_builtin(&g.tweet, &tokens, &gaz_b, "b");
            let u = union_combine(&g.tweet.text, &tokens, &[("a".into(), a.clone()), ("b".into(), b.clone())])
                .map_err(|e| e.to_string())?;
            da.push(a);
            db.push(b);
            du.push(u);
        }
        let (ra, rb, ru) = (
            common::pooled_recall(&gold, &da),
            common::pooled_recall(&gold, &db),
            common::pooled_recall(&gold, &du),
        );
        ensure(ru >= ra && ru >= rb, || format!("trial {trial}: union {ru} vs {ra}, {rb}"))?;
        for label in EntityLabel::ENTITY {
            let (la, lb, lu) = (
                common::label_recall(&gold, &da, label),
                common::label_recall(&gold, &db, label),
                common::label_recall(&gold, &du, label),
            );
            ensure(lu >= la && lu >= lb, || format!("trial {trial} {label}: union {lu} vs {la}, {lb}"))?;
        }
        sum_a += ra;
        sum_b += rb;
        sum_u += ru;
    }
    Ok(format!(
        "500 trials, union >= each component overall and per label (mean recall a={:.3} b={:.3} union={:.3})",
        sum_a / 500.0,
        sum_b / 500.0,
        sum_u / 500.0
    ))
}

fn determinism() -> Result<String, String> {
    let bin = option_env!("CARGO_BIN_EXE_nightjar").ok_or("binary not built (enable the `cli` feature)")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gold = generate_synthetic_corpus(11, 400, &InjectionRates::default()).map_err(|e| e.to_string())?;
    let tweets: Vec<Tweet> = gold.into_iter().map(|g| g.tweet).collect();
    let input = dir.path().join("tweets.jsonl");
    corpus::write_tweets(&tweets, corpus::create(&input).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    fs::write(&config, "[masking]\npolicy = \"default\"\n[masking.actions]\nURL = \"delete\"\n").map_err(|e| e.to_string())?;

    let run = |jobs: &str, out: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(out);
        let status = Command::new(bin)
            .args(["mask", "--seed", "20240101", "--jobs", jobs])
            .arg("--input")
            .arg(&input)
            .arg("--config")
            .arg(&config)
            .arg("--output")
            .arg(&path)
            .env_remove("NIGHTJAR_CONFIG")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("mask exited with {status}"))?;
        fs::read(&path).map_err(|e| e.to_string())
    };
    let first = run("1", "a.jsonl")?;
    let second = run("1", "b.jsonl")?;
    let parallel = run("8", "c.jsonl")?;
    ensure(!first.is_empty(), || "empty output".into())?;
    ensure(first == second, || "two --jobs 1 runs differ".into())?;
    ensure(first == parallel, || "--jobs 1 and --jobs 8 differ".into())?;
    Ok(format!("{} tweets, {} bytes identical across 2 runs and --jobs 1/8", tweets.len(), first.len()))
}

const CORNER_CASES: &[&str] = &[
    "call 555-123-4567",
    "a https://x.io/1 @bob b",
    "(https://x.io/1) ok",
    "@a",
    "mail me at a.b@example.com or @joe_s",
    "zip 90210, Austin TX 78701",
    "90210-1234 Beverly Hills",
    "ref AB12CD34EF and #promo2024code99",
    "Shout out to Katie for making this event happen",
    "@x @y @z",
    "+44 20 7946 0958 then www.example.com/a?b=1.",
    "see t.co/AbC and bit.ly/xyz!",
    "Katie's friend @katie_b is in New York City",
    "email me@host.com ok",
    "👋 Katie 👋 555.123.4567 👋",
];

fn safety_closure() -> Result<String, String> {
    let mut corpora: Vec<Vec<Tweet>> = (1..=5)
        .map(|seed| {
            generate_synthetic_corpus(seed, 300, &InjectionRates::default())
                .map(|c| c.into_iter().map(|g| g.tweet).collect())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    corpora.push(CORNER_CASES.iter().enumerate().map(|(i, t)| Tweet::new(format!("c{i}"), *t)).collect());

    let pipeline = Pipeline::new(
        nightjar::detect::RegexDetectors::default(),
        vec![Box::new(GazetteerRecognizer::new("builtin", Gazetteer::builtin()))],
    )
    .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for preset in [PolicyPreset::Default, PolicyPreset::Placeholder, PolicyPreset::Delete] {
        let masker = Masker::new(ReplacementPolicy::preset(preset, 3), ValuePool::builtin()).map_err(|e| e.to_string())?;
        for tweets in &corpora {
            for t in tweets {
                let dets = pipeline.detect(t).map_err(|e| e.to_string())?;
                let m = masker.mask_tweet(t, &dets).map_err(|e| e.to_string())?;
                let again = run_regex_detectors(&Tweet::new("again", m.masked_text.as_str()));
                ensure(again.is_empty(), || format!("{preset:?} {:?} -> {:?} still has {again:?}", t.text, m.masked_text))?;
                ensure(m.replay() == m.masked_text, || format!("replay mismatch for {}", t.id))?;
                outside_edits_preserved(t, &dets, &m.edits)?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} masked tweets (3 policies), zero re-detections, text outside edits unchanged"))
}

// Edits may only widen a detection by whitespace; everything else must be
// copied verbatim by `replay`.
fn outside_edits_preserved(t: &Tweet, dets: &[Detection], edits: &[nightjar::model::Edit]) -> Result<(), String> {
    ensure(dets.len() == edits.len(), || format!("{}: edit count", t.id))?;
    let mut prev = 0;
    for (d, e) in dets.iter().zip(edits) {
        ensure(e.start >= prev && e.start <= d.span.start && d.span.end <= e.end, || format!("{}: edit {e:?}", t.id))?;
        let widened = slice_chars(&t.text, nightjar::model::Span::new(e.start, d.span.start.max(e.start)))
            .map(str::to_string)
            .unwrap_or_default()
            + &t.text.chars().skip(d.span.end).take(e.end - d.span.end).collect::<String>();
        ensure(widened.chars().all(char::is_whitespace), || format!("{}: edit {e:?} eats {widened:?}", t.id))?;
        prev = e.end;
    }
    Ok(())
}

fn verified_gating() -> Result<String, String> {
    let rates: InjectionRates = "ALL=0,PHONE=1,EMAIL=1,URL=0.5,USERNAME=0.5,VERIFIED=0".parse().map_err(|e: nightjar::Error| e.to_string())?;
    let gold = generate_synthetic_corpus(7, 200, &rates).map_err(|e| e.to_string())?;
    let (mut phones, mut emails, mut kept) = (0, 0, 0);
    for g in &gold {
        let open = run_regex_detectors(&g.tweet);
        let gated = run_regex_detectors(&g.tweet.clone().verified(true));
        let count = |ds: &[Detection], l: EntityLabel| ds.iter().filter(|d| d.label == l).count();
        phones += count(&open, EntityLabel::Phone);
        emails += count(&open, EntityLabel::Email);
        ensure(count(&gated, EntityLabel::Phone) + count(&gated, EntityLabel::Email) == 0, || {
            format!("verified copy of {} still has phone/email", g.tweet.id)
        })?;
        let pick = |ds: &[Detection]| -> Vec<Detection> {
            ds.iter().filter(|d| matches!(d.label, EntityLabel::Url | EntityLabel::Username)).cloned().collect()
        };
        ensure(pick(&open) == pick(&gated), || format!("URL/username differ on {}", g.tweet.id))?;
        kept += pick(&gated).len();
    }
    ensure(phones == 200 && emails == 200, || format!("unverified copies: {phones} phones, {emails} emails"))?;
    Ok(format!("200 pairs: 0 phone/email on verified (vs {phones}/{emails}), {kept} URL/username detections identical"))
}

fn main() -> ExitCode {
    let outcomes = vec![
        outcome("regex-perfection", regex_perfection()),
        outcome("metric-oracle", metric_oracle()),
        outcome("published-aggregates", published_aggregates()),
        outcome("union-dominance", union_dominance()),
        outcome("determinism", determinism()),
        outcome("safety-closure", safety_closure()),
        outcome("verified-gating", verified_gating()),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_UNATTAINABLE.contains(&o.name);
        let note = match (o.pass, known) {
            (false, true) => " (known unattainable)",
            (true, true) => " (listed as unattainable but passed)",
            _ => "",
        };
        println!("{} {}: {}{note}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
