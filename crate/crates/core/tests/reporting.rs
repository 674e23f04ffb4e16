mod common;

use common::data;
use tntc::pipeline::{run_pipeline, Mode, RunConfig, Stage};
use tntc::report::{read_structured, render, OutputFormat};
use tntc::rtca::{select_critical, Contingency, RtcaStats};
use tntc::tntc::RankingMethod;
use tntc::{BranchId, GenId};

fn tntc_config(workers: usize) -> RunConfig {
    let mut cfg = RunConfig::new(data("rts24_revised.m"), Mode::Tntc);
    cfg.methods = vec![RankingMethod::Ftdf(20), RankingMethod::Tsdf(20), RankingMethod::Ce];
    cfg.workers = workers;
    cfg
}

#[test]
fn structured_report_round_trips() {
    let report = run_pipeline(&tntc_config(1)).unwrap();
    let text = render(&report, OutputFormat::Structured).unwrap();
    let back = read_structured(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn structured_reports_are_byte_identical_across_runs_and_workers() {
    let texts: Vec<String> = [1, 1, 3]
        .into_iter()
        .map(|w| {
            let mut r = run_pipeline(&tntc_config(w)).unwrap().without_timings();
            r.config.workers = 0;
            render(&r, OutputFormat::Structured).unwrap()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2]);
}

#[test]
fn stages_follow_the_mode() {
    let r = run_pipeline(&tntc_config(1)).unwrap();
    let stages: Vec<Stage> = r.stages.iter().map(|s| s.stage).collect();
    assert_eq!(stages, [Stage::Load, Stage::BaseCase, Stage::Rtca, Stage::Tntc, Stage::Tntc, Stage::Tntc]);
    assert!(r.stages.iter().all(|s| s.seconds >= 0.0));
    let labels: Vec<_> = r.stages.iter().filter_map(|s| s.label.clone()).collect();
    assert_eq!(labels, ["FTDF20", "TSDF20", "CE"]);
}

#[test]
fn delimited_rows_resort_to_critical_order() {
    let mut cfg = RunConfig::new(data("rts24_revised.m"), Mode::Rtca);
    cfg.workers = 1;
    let report = run_pipeline(&cfg).unwrap();
    let rtca = report.rtca.as_ref().unwrap();
    let text = render(&report, OutputFormat::Delimited).unwrap();
    let mut rows: Vec<(usize, Contingency, f64)> = text
        .lines()
        .skip(1)
        .enumerate()
        .filter_map(|(pos, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let id: usize = f[1].parse().unwrap();
            let c = match f[0] {
                "generator" => Contingency::Generator(GenId(id)),
                _ => Contingency::Branch(BranchId(id)),
            };
            let excess: f64 = f[3].parse().unwrap();
            (f[2] == "true" && excess > 0.0).then_some((pos, c, excess))
        })
        .collect();
    // descending total excess, list order among equals
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let resorted: Vec<Contingency> = rows.into_iter().map(|r| r.1).collect();
    assert_eq!(resorted, rtca.critical);
    assert_eq!(select_critical(rtca), rtca.critical);
}

#[test]
fn stored_statistics_match_raw_results() {
    let mut cfg = RunConfig::new(data("rts24_revised.m"), Mode::Rtca);
    cfg.workers = 1;
    let report = run_pipeline(&cfg).unwrap();
    let rtca = report.rtca.unwrap();
    let totals: Vec<f64> = rtca.critical_results().map(|r| r.violations.total_excess).collect();
    let fresh = RtcaStats::from_values(&totals);
    for (a, b) in [
        (fresh.max, rtca.stats.max),
        (fresh.min, rtca.stats.min),
        (fresh.mean, rtca.stats.mean),
        (fresh.median, rtca.stats.median),
        (fresh.stddev, rtca.stats.stddev),
    ] {
        assert!((a - b).abs() <= 0.05);
    }
    assert_eq!(fresh.count, rtca.critical.len());
    for c in &rtca.critical {
        assert!(rtca.result(*c).unwrap().is_critical());
    }
}

#[test]
fn human_report_has_reduction_table() {
    let mut cfg = RunConfig::new(data("rts24_revised.m"), Mode::Tntc);
    cfg.methods = vec![RankingMethod::Ftdf(20)];
    cfg.workers = 1;
    let text = render(&run_pipeline(&cfg).unwrap(), OutputFormat::Human).unwrap();
    let header = text
        .lines()
        .skip_while(|l| !l.starts_with("Violation reduction in percent with TNTC solutions (FTDF20)"))
        .nth(1)
        .unwrap();
    assert_eq!(header.matches("solution ").count(), 5);
}
