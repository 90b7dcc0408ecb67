//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//!     cargo test -p tashkeel-eval --test acceptance

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use common::*;
use tashkeel_eval::corpusio::{self, CaseEnding, Report, ReportFormat};
use tashkeel_eval::metrics::{self, Condition, ConditionLabel, CoverageMode};
use tashkeel_eval::{align, edit_distance, matched_pairs, EditKind, LexiconModel, SentenceForm};

const RATIO_TOLERANCE: f64 = 1e-9;

fn parse_lines(name: &str) -> Vec<SentenceForm> {
    let path = fixture_dir().join(name);
    corpusio::load_lines(&path).unwrap().iter().map(|l| sentence(l)).collect()
}

fn check_alignment_oracle() {
    let started = Instant::now();
    let eq = |a: &u8, b: &u8| a == b;

    let mut binary: Vec<Vec<u8>> = Vec::new();
    for len in 0..=4 {
        for bits in 0..(1u32 << len) {
            binary.push((0..len).map(|i| ((bits >> i) & 1) as u8).collect());
        }
    }
    let mut checked = 0;
    for a in &binary {
        for b in &binary {
            let expected = brute_force_distance(a, b, eq);
            assert_eq!(edit_distance(a, b, eq), expected, "{a:?} / {b:?}");
            let path = align(a, b, eq);
            assert_eq!(path.cost, expected, "{a:?} / {b:?}");
            assert_path_consumes(&path, a.len(), b.len());
            checked += 1;
        }
    }
    assert_eq!(checked, 31 * 31);

    let mut rng = StdRng::seed_from_u64(0x5eed_a119);
    for _ in 0..500 {
        let a = sentence(&random_word(&mut rng, 6, false));
        let b = sentence(&random_word(&mut rng, 6, false));
        let (ga, gb) = (a.words()[0].graphemes(), b.words()[0].graphemes());
        let geq = |x: &tashkeel_eval::GraphemeUnit, y: &tashkeel_eval::GraphemeUnit| x == y;
        let expected = brute_force_distance(ga, gb, geq);
        let path = align(ga, gb, geq);
        assert_eq!(path.cost, expected, "{a} / {b}");
        assert_eq!(edit_distance(ga, gb, geq), expected);
        assert_path_consumes(&path, ga.len(), gb.len());
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}

fn assert_path_consumes(path: &tashkeel_eval::AlignmentPath, n: usize, m: usize) {
    let refs: Vec<usize> = path.ops.iter().filter_map(|op| op.ref_index).collect();
    let hyps: Vec<usize> = path.ops.iter().filter_map(|op| op.hyp_index).collect();
    assert_eq!(refs, (0..n).collect::<Vec<_>>());
    assert_eq!(hyps, (0..m).collect::<Vec<_>>());
    let non_match = path.ops.iter().filter(|op| op.kind != EditKind::Match).count();
    assert_eq!(non_match, path.cost);
}

fn check_identity_suite() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..6);
        let corpus: Vec<SentenceForm> = (0..n).map(|_| sentence(&random_sentence(&mut rng, 6, true))).collect();
        let report = metrics::evaluate_asr(&corpus, &corpus, Condition::new(ConditionLabel::ManuallyDiacritized), CoverageMode::Marks).unwrap();
        let m = report.metrics;
        assert_eq!([m.wer_plain, m.cer_plain, m.wer_diac, m.cer_diac], [0.0; 4]);
        assert_eq!(m.precision_with_case, Some(1.0));
        assert_eq!(m.precision_without_case.unwrap_or(1.0), 1.0);
        assert_eq!(m.coverage_hyp, m.coverage_ref);
        let d = metrics::evaluate_diacritizer(&corpus, &corpus, "self", CoverageMode::Marks).unwrap();
        assert_eq!(d.metrics.der_with_case, Some(0.0));
        assert_eq!(d.metrics.der_without_case.unwrap_or(0.0), 0.0);
        assert_eq!(d.metrics.coverage, m.coverage_ref);
    }
    // the mini-corpus reference against itself
    let refs = parse_lines("ref.txt");
    let m = metrics::evaluate_asr(&refs, &refs, Condition::new(ConditionLabel::ManuallyDiacritized), CoverageMode::Marks)
        .unwrap()
        .metrics;
    assert_eq!([m.wer_plain, m.cer_plain, m.wer_diac, m.cer_diac], [0.0; 4]);
    assert_eq!((m.precision_with_case, m.precision_without_case), (Some(1.0), Some(1.0)));
    assert_eq!(m.coverage_hyp, m.coverage_ref);
}

fn check_coarsening_monotonicity() {
    let mut rng = StdRng::seed_from_u64(1234);
    for case in 0..1000 {
        let n = rng.gen_range(1..5);
        let refs_text: Vec<String> = (0..n).map(|_| random_sentence(&mut rng, 6, false)).collect();
        let hyps_text: Vec<String> = refs_text.iter().map(|r| corrupt(&mut rng, r)).collect();
        let refs: Vec<_> = refs_text.iter().map(|t| sentence(t)).collect();
        let hyps: Vec<_> = hyps_text.iter().map(|t| sentence(t)).collect();
        let plain = metrics::wer(&refs, &hyps, false).unwrap();
        let diac = metrics::wer(&refs, &hyps, true).unwrap();
        assert!(plain <= diac, "case {case}: {plain} > {diac}\n{refs_text:?}\n{hyps_text:?}");
    }
}

fn check_both_marked_rule_fixture() {
    // ein+fatha lam+kasra mim+fatha  vs  ein+fatha lam mim+damma
    let gold = sentence("\u{0639}\u{064E}\u{0644}\u{0650}\u{0645}\u{064E}");
    let pred = sentence("\u{0639}\u{064E}\u{0644}\u{0645}\u{064F}");
    let pairs = matched_pairs(&gold, &pred);
    assert_eq!(metrics::precision(&pairs, true).unwrap().ratio(), Some(0.5));
    assert_eq!(metrics::precision(&pairs, false).unwrap().ratio(), Some(1.0));
    assert_eq!(metrics::der(&gold, &pred, true).unwrap().ratio(), Some(2.0 / 3.0));
    assert_eq!(metrics::der(&gold, &pred, false).unwrap().ratio(), Some(0.5));
}

fn compare_with_expected(report: &Report, expected: &Value) {
    let emitted = corpusio::emit_report(report, ReportFormat::Json, CaseEnding::Both);
    let got: Value = serde_json::from_slice(&emitted).unwrap();
    let exp_metrics = expected["metrics"].as_object().unwrap();
    let got_metrics = got["metrics"].as_object().unwrap();
    assert_eq!(exp_metrics.len(), got_metrics.len());
    for (name, exp) in exp_metrics {
        let g = &got_metrics[name];
        match (exp.as_f64(), g.as_f64()) {
            (Some(e), Some(v)) => assert!((e - v).abs() <= RATIO_TOLERANCE, "{name}: expected {e}, got {v}"),
            (None, None) => assert!(exp.is_null() && g.is_null(), "{name}"),
            _ => panic!("{name}: expected {exp}, got {g}"),
        }
    }
    assert_eq!(got["counts"], expected["counts"]);
}

fn check_mini_corpus_regression() {
    let started = Instant::now();
    let expected: Value = serde_json::from_str(&read_fixture("expected.json")).unwrap();
    let dir = fixture_dir();
    let records = corpusio::load_parallel(&dir.join("ref.txt"), &dir.join("hyp.txt")).unwrap();
    assert_eq!(records.len(), 20);
    let refs: Vec<_> = records.iter().map(|r| sentence(&r.reference)).collect();
    let hyps: Vec<_> = records.iter().map(|r| sentence(r.hyp.as_deref().unwrap())).collect();

    let md = metrics::evaluate_asr(&refs, &hyps, Condition::new(ConditionLabel::ManuallyDiacritized), CoverageMode::Marks).unwrap();
    compare_with_expected(&md.into(), &expected["asr_md"]);
    let md_letters = metrics::evaluate_asr(&refs, &hyps, Condition::new(ConditionLabel::ManuallyDiacritized), CoverageMode::MarkedLetters).unwrap();
    compare_with_expected(&md_letters.into(), &expected["asr_md_marked_letters"]);

    let model = LexiconModel::load(read_fixture("model.tsv").as_bytes()).unwrap();
    let trained = LexiconModel::train(&parse_lines("train.txt")).unwrap();
    assert_eq!(trained.save(), read_fixture("model.tsv"));

    let ud_hyps: Vec<_> = hyps.iter().map(|h| model.restore(&h.strip())).collect();
    let ud = metrics::evaluate_asr(&refs, &ud_hyps, Condition::tagged(ConditionLabel::Undiacritized, "UD+lexicon"), CoverageMode::Marks).unwrap();
    compare_with_expected(&ud.into(), &expected["pipeline_ud"]);

    let ad_refs: Vec<_> = refs.iter().map(|r| model.restore(&r.strip())).collect();
    let ad = metrics::evaluate_asr(&ad_refs, &hyps, Condition::tagged(ConditionLabel::AutomaticallyDiacritized, "AD:lexicon"), CoverageMode::Marks).unwrap();
    compare_with_expected(&ad.into(), &expected["pipeline_ad"]);

    let diac = metrics::evaluate_diacritizer(&refs, &ad_refs, "lexicon", CoverageMode::Marks).unwrap();
    compare_with_expected(&diac.into(), &expected["diac_lexicon"]);

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
}

fn check_restorer_round_trip() {
    let lines = corpusio::load_lines(&fixture_dir().join("ref.txt")).unwrap();
    let corpus: Vec<_> = lines.iter().map(|l| sentence(l)).collect();
    let model = LexiconModel::train(&corpus).unwrap();
    assert_eq!(model.stats().ambiguity_rate, 0.0);
    let restored: Vec<_> = corpus.iter().map(|s| model.restore(&s.strip())).collect();
    for (line, r) in lines.iter().zip(&restored) {
        assert_eq!(&r.render(), line);
    }
    let report = metrics::evaluate_diacritizer(&corpus, &restored, "lexicon", CoverageMode::Marks).unwrap();
    assert_eq!(report.metrics.der_with_case, Some(0.0));
    assert_eq!(report.metrics.der_without_case, Some(0.0));
    assert_eq!(report.metrics.coverage, Some(metrics::coverage(&corpus, CoverageMode::Marks).unwrap()));
}

fn check_degenerate_inputs() {
    let gold = parse_lines("ref.txt");
    let stripped: Vec<_> = gold.iter().map(SentenceForm::strip).collect();

    let asr = metrics::evaluate_asr(&gold, &stripped, Condition::new(ConditionLabel::Undiacritized), CoverageMode::Marks).unwrap();
    assert_eq!(asr.metrics.precision_with_case, None);
    assert_eq!(asr.metrics.precision_without_case, None);
    assert_eq!(asr.counts.compared_positions_with_case, 0);

    let diac = metrics::evaluate_diacritizer(&gold, &stripped, "none", CoverageMode::Marks).unwrap();
    assert_eq!(diac.metrics.der_with_case, Some(1.0));
    assert_eq!(diac.metrics.der_without_case, Some(1.0));
    assert_eq!(diac.metrics.coverage, Some(0.0));

    let empty = vec![sentence("")];
    assert_eq!(metrics::wer(&empty, &empty, true), Err(tashkeel_eval::MetricError::EmptyReference));
    assert_eq!(metrics::cer(&empty, &empty, false), Err(tashkeel_eval::MetricError::EmptyReference));
    assert_eq!(metrics::coverage(&[sentence("abc")], CoverageMode::Marks), Err(tashkeel_eval::MetricError::NoArabicLetters));

    let tmp = tempfile::tempdir().unwrap();
    let empty_file = tmp.path().join("empty.txt");
    std::fs::write(&empty_file, "").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_tashkeel-eval"))
        .arg("stats")
        .arg(&empty_file)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let lone = tmp.path().join("lone.txt");
    std::fs::write(&lone, "\u{064B}\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_tashkeel-eval"))
        .args(["--strict", "strip"])
        .arg(&lone)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

fn markdown_cells(line: &str) -> Vec<String> {
    line.trim()
        .trim_start_matches('|')
        .trim_end_matches('|')
        .split('|')
        .map(|c| c.trim().to_string())
        .collect()
}

fn check_report_shape() {
    let dir = fixture_dir();
    let refs = parse_lines("ref.txt");
    let hyps: Vec<_> = corpusio::load_lines(&dir.join("hyp.txt")).unwrap().iter().map(|l| sentence(l)).collect();
    let model = LexiconModel::load(read_fixture("model.tsv").as_bytes()).unwrap();

    let md = metrics::evaluate_asr(&refs, &hyps, Condition::new(ConditionLabel::ManuallyDiacritized), CoverageMode::Marks).unwrap();
    let ud_hyps: Vec<_> = hyps.iter().map(|h| model.restore(&h.strip())).collect();
    let ud = metrics::evaluate_asr(&refs, &ud_hyps, Condition::tagged(ConditionLabel::Undiacritized, "UD+lexicon"), CoverageMode::Marks).unwrap();
    let pred: Vec<_> = refs.iter().map(|r| model.restore(&r.strip())).collect();
    let diac = metrics::evaluate_diacritizer(&refs, &pred, "lexicon", CoverageMode::Marks).unwrap();

    for (report, golden, metric_columns) in [
        (Report::from(md), "golden/asr_md.md", 7),
        (Report::from(ud), "golden/pipeline_ud.md", 7),
        (Report::from(diac), "golden/diac_lexicon.md", 3),
    ] {
        let out = String::from_utf8(corpusio::emit_report(&report, ReportFormat::Markdown, CaseEnding::Both)).unwrap();
        let golden_text = read_fixture(golden);
        let (got, exp): (Vec<_>, Vec<_>) = (out.lines().collect(), golden_text.lines().collect());
        assert_eq!(got.len(), 3, "{golden}");
        assert_eq!(got.len(), exp.len(), "{golden}");
        for (g, e) in got.iter().zip(&exp) {
            let (gc, ec) = (markdown_cells(g), markdown_cells(e));
            assert_eq!(gc.len(), metric_columns + 1, "{golden}: {g}");
            assert_eq!(gc, ec, "{golden}");
        }
        assert_eq!(out, golden_text, "{golden}");
    }
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_tashkeel-eval")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn check_parallel_determinism() {
    let dir = fixture_dir();
    let r = dir.join("ref.txt");
    let h = dir.join("hyp.txt");
    let m = dir.join("model.tsv");
    let (r, h, m) = (r.to_str().unwrap(), h.to_str().unwrap(), m.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["--format", "json", "eval-asr", "--ref", r, "--hyp", h, "--condition", "md"],
        vec!["--format", "json", "pipeline", "--ref", r, "--hyp", h, "--model", m],
        vec!["--format", "json", "eval-diac", "--gold", r, "--pred", r],
    ];
    for cmd in commands {
        let with_jobs = |n: &'static str| {
            let mut args = cmd.clone();
            args.extend(["--jobs", n]);
            args
        };
        let baseline = run_cli(&with_jobs("1"));
        for _ in 0..20 {
            assert_eq!(run_cli(&with_jobs("8")), baseline, "{cmd:?}");
            assert_eq!(run_cli(&with_jobs("1")), baseline, "{cmd:?}");
        }
    }
}

fn main() {
    let criteria: [(&str, fn()); 9] = [
        ("alignment oracle equivalence", check_alignment_oracle),
        ("identity suite", check_identity_suite),
        ("coarsening monotonicity (wer_plain <= wer_diac)", check_coarsening_monotonicity),
        ("precision vs DER on a partly marked prediction", check_both_marked_rule_fixture),
        ("mini-corpus regression (tol 1e-9)", check_mini_corpus_regression),
        ("restorer round trip", check_restorer_round_trip),
        ("degenerate-input contracts", check_degenerate_inputs),
        ("report shape vs golden markdown", check_report_shape),
        ("determinism under --jobs 8 vs --jobs 1", check_parallel_determinism),
    ];
    panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {name} ({:.2?})",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
