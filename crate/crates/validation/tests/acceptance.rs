//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Seeds are fixed up front: 1..=20 for the bound check, 2014 for the flow
//! sweep and burstiness table, 1..=10 for the window and content checks.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use vmac_core::admission::{
    decide_average, decide_instantaneous, quality_class_rate, AdmissionRequest, LinkConfig, QualityClass,
};
use vmac_core::bounds::{empirical_exceedance, hoeffding_delta, HoeffdingQuery};
use vmac_core::experiments::{
    run_burstiness_table, run_content_comparison, run_probability_sweep, run_rate_timeseries, run_window_sweep,
    sample_scenario, stream_seed, ExperimentConfig, RateKind, ScenarioPins, SeriesSource,
};
use vmac_core::rate::{average_aggregate_rate, MeasurementWindow};
use vmac_core::synth::synth_bounded_trace;
use vmac_core::trace::{ContentClass, FlowInstance, FlowRateBounds, VideoTrace};
use vmac_core::Execution;
use vmac_validation::{bundled_traces, bundled_traces_dir, sports_news_library, vmac, FPS};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn hoeffding_bound_holds() -> Outcome {
    let started = Instant::now();
    let (min, max) = (1e6, 3e6);
    let width = max - min;
    let bounds = FlowRateBounds::new(min, max).unwrap();
    let eps_fracs = [0.1, 0.25, 0.5, 0.75, 1.0];
    let mut worst_margin = f64::INFINITY;
    let mut violations = Vec::new();
    let mut checks = 0;
    for master in 1..=20u64 {
        for n in [2usize, 5, 10, 20] {
            let flows: Vec<FlowInstance> = (0..n)
                .map(|k| {
                    let seed = stream_seed(master, ((n as u64) << 16) | k as u64);
                    let trace = synth_bounded_trace(20_000, bounds, FPS, seed).unwrap();
                    FlowInstance::new(Arc::new(trace), 0, k as u64)
                })
                .collect();
            for frac in eps_fracs {
                let eps = frac * width;
                let delta = hoeffding_delta(&HoeffdingQuery::uniform(n, eps, width).unwrap())
                    .unwrap()
                    .delta;
                let emp = empirical_exceedance(&flows, 5, eps, 10_000, master, Execution::Parallel).unwrap();
                checks += 1;
                worst_margin = worst_margin.min(delta - emp);
                if emp > delta {
                    violations.push(format!("seed {master} n={n} eps={frac}w: {emp} > {delta}"));
                }
            }
        }
    }
    let elapsed = started.elapsed();
    let in_time = elapsed < Duration::from_secs(60);
    Outcome {
        pass: violations.is_empty() && in_time,
        detail: format!(
            "{checks} (seed, n, eps) checks, {} violations, min(delta - empirical) = {worst_margin:.4}, {:.1}s (limit 60s){}",
            violations.len(),
            elapsed.as_secs_f64(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    }
}

fn sweep_config() -> ExperimentConfig {
    ExperimentConfig::new(bundled_traces(), vec![2, 5, 10, 15, 20, 30, 40], 2014)
}

fn decreasing_trend() -> Outcome {
    let started = Instant::now();
    let cfg = sweep_config();
    let sweep = run_probability_sweep(&cfg).unwrap();
    let elapsed = started.elapsed();
    let p = |n| sweep.row(n).unwrap().probability.mean;
    let band_ok = sweep
        .rows
        .iter()
        .filter(|r| r.flow_count >= 15)
        .all(|r| (0.40..=0.60).contains(&r.probability.mean));
    let curve: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{}:{:.3}", r.flow_count, r.probability.mean))
        .collect();
    Outcome {
        pass: p(5) > p(40) && band_ok && elapsed < Duration::from_secs(120),
        detail: format!(
            "P(5)={:.3} vs P(40)={:.3}; n>=15 within [0.40, 0.60]: {band_ok}; curve {}; {:.1}s (limit 120s)",
            p(5),
            p(40),
            curve.join(" "),
            elapsed.as_secs_f64()
        ),
    }
}

fn burstiness_ordering() -> Outcome {
    let cfg = sweep_config();
    let rows = run_burstiness_table(&cfg, &cfg.flow_counts, 5000).unwrap();
    let get = |n, kind, source| {
        rows.iter()
            .find(|r| r.flow_count == n && r.rate_kind == kind && r.source == source)
            .unwrap()
    };
    // gated on the per-slot series; the decision samples are reported only
    let ordered = |source| {
        cfg.flow_counts
            .iter()
            .filter(|&&n| {
                let avg = get(n, RateKind::Average, source);
                let inst = get(n, RateKind::Instantaneous, source);
                !(avg.peak_to_mean <= inst.peak_to_mean && avg.cov <= inst.cov)
            })
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
    };
    let unordered = ordered(SeriesSource::Slots);
    let unordered_decisions = ordered(SeriesSource::Decisions);
    let ordering_ok = unordered.is_empty();
    let cov = |n, source| get(n, RateKind::Instantaneous, source).cov;
    let ratio_slots = cov(40, SeriesSource::Slots) / cov(5, SeriesSource::Slots);
    let ratio_decisions = cov(40, SeriesSource::Decisions) / cov(5, SeriesSource::Decisions);
    let ratio_avg =
        get(40, RateKind::Average, SeriesSource::Slots).cov / get(5, RateKind::Average, SeriesSource::Slots).cov;
    let ratio_ok = ratio_slots <= 0.15;
    let gap = get(5, RateKind::Instantaneous, SeriesSource::Slots).peak_to_mean
        - get(5, RateKind::Average, SeriesSource::Slots).peak_to_mean;
    let gap_ok = gap >= 0.03;
    Outcome {
        pass: ordering_ok && ratio_ok && gap_ok,
        detail: format!(
            "avg <= inst for PMR and CoV at every flow count: {ordering_ok} \
             (unordered counts: slots {unordered:?}, decision samples {unordered_decisions:?}); \
             CoV(40)/CoV(5) = {ratio_slots:.3} (needs <= 0.15; average series {ratio_avg:.3}, decision samples {ratio_decisions:.3}; independent flows scale as sqrt(5/40) = 0.354); \
             PMR gap at 5 flows = {gap:.4} (needs >= 0.03)"
        ),
    }
}

fn window_effect() -> Outcome {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for master in 1..=10u64 {
        let cfg = ExperimentConfig::new(bundled_traces(), vec![40], master);
        let rows = run_window_sweep(&cfg, 40, &[5, 25]).unwrap();
        let (p5, p25) = (rows[0].probability.mean, rows[1].probability.mean);
        wins += (p25 >= p5) as usize;
        pairs.push(format!("{p5:.3}/{p25:.3}"));
    }
    Outcome {
        pass: wins >= 8,
        detail: format!(
            "P(w=25) >= P(w=5) at 40 flows in {wins}/10 seeds (needs 8); w5/w25: {}",
            pairs.join(" ")
        ),
    }
}

fn content_effect() -> Outcome {
    let lib = sports_news_library();
    let mut wins = 0;
    let mut cells = Vec::new();
    for master in 1..=10u64 {
        let cfg = ExperimentConfig::new(lib.clone(), vec![5, 40], master);
        let rows = run_content_comparison(&cfg, &[ContentClass::Sports, ContentClass::News], &[5, 40]).unwrap();
        let p = |class, n| {
            rows.iter()
                .find(|r| r.class == class && r.flow_count == n)
                .unwrap()
                .probability
                .mean
        };
        let (s5, n5) = (p(ContentClass::Sports, 5), p(ContentClass::News, 5));
        let (s40, n40) = (p(ContentClass::Sports, 40), p(ContentClass::News, 40));
        let ok = s5 > n5 && (s40 - n40).abs() < (s5 - n5).abs();
        wins += ok as usize;
        cells.push(format!("{s5:.2}-{n5:.2}|{s40:.2}-{n40:.2}"));
    }
    Outcome {
        pass: wins >= 8,
        detail: format!(
            "sports above news at 5 flows and gap shrinks at 40 in {wins}/10 seeds (needs 8); sports-news at 5|40: {}",
            cells.join(" ")
        ),
    }
}

fn cbr_exactness() -> Outcome {
    let lib: Vec<VideoTrace> = [5_000u64, 20_000, 45_000]
        .iter()
        .map(|&size| VideoTrace::from_sizes(format!("cbr{size}"), vec![size; 400], FPS, ContentClass::Unknown).unwrap())
        .collect();
    let mut failures = Vec::new();
    let cfg = ExperimentConfig::new(lib.clone(), vec![1, 2, 5, 10, 40], 7);

    for &n in &cfg.flow_counts {
        let ts = run_rate_timeseries(&cfg, n, 400, stream_seed(7, n as u64)).unwrap();
        if ts.instantaneous != ts.average {
            failures.push(format!("timeseries differs at n={n}"));
        }
    }
    let sweep = run_probability_sweep(&cfg).unwrap();
    if sweep
        .rows
        .iter()
        .any(|r| r.probability.mean != 0.0 || r.probability.ci_half_width != 0.0)
    {
        failures.push("nonzero probability".into());
    }
    for r in run_burstiness_table(&cfg, &cfg.flow_counts, 400)
        .unwrap()
        .iter()
        .filter(|r| r.source == SeriesSource::Slots)
    {
        if r.peak_to_mean != 1.0 || r.cov != 0.0 {
            failures.push(format!(
                "n={} {}: pmr={} cov={}",
                r.flow_count,
                r.rate_kind.name(),
                r.peak_to_mean,
                r.cov
            ));
        }
    }
    let library: Vec<Arc<VideoTrace>> = lib.into_iter().map(Arc::new).collect();
    let mut decisions = 0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 40) as usize;
        let (_, sample) = sample_scenario(&library, n, 5, seed, ScenarioPins::default()).unwrap();
        if sample.average != sample.instantaneous {
            failures.push(format!("sample {seed}: average != instantaneous"));
        }
        for cap_mbps in [10.0, 50.0, 100.0, 200.0, 400.0] {
            let link = LinkConfig::new("l", cap_mbps * 1e6).unwrap();
            for class in QualityClass::ALL {
                let req = AdmissionRequest::for_class(class);
                decisions += 1;
                if decide_average(&sample, &req, &link).verdict != decide_instantaneous(&sample, &req, &link).verdict {
                    failures.push(format!("sample {seed}: policies disagree at {cap_mbps} Mbps"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "series equal, probabilities 0, PMR 1, CoV 0, {decisions} paired decisions agree: {}",
            if failures.is_empty() {
                "yes".to_string()
            } else {
                failures.join("; ")
            }
        ),
    }
}

fn closed_forms() -> Outcome {
    let d = hoeffding_delta(&HoeffdingQuery::from_widths(1.0, &[2.0, 2.0]).unwrap())
        .unwrap()
        .delta;
    let delta_ok = (d - (-1.0f64).exp()).abs() <= 1e-12;

    // 1..5 Mbps at 25 fps is 5000 * k bytes per frame
    let trace = VideoTrace::from_sizes("ramp", (1..=5).map(|k| 5000 * k), FPS, ContentClass::Unknown).unwrap();
    let flow = [FlowInstance::new(Arc::new(trace), 0, 0)];
    let avg = average_aggregate_rate(&flow, MeasurementWindow::new(4, 5).unwrap()).unwrap();
    let avg_ok = avg == 3e6;

    let rates: Vec<f64> = QualityClass::ALL.iter().map(|&c| quality_class_rate(c)).collect();
    let rates_ok = rates == [11e6, 8e6, 2e6, 1.25e6];
    Outcome {
        pass: delta_ok && avg_ok && rates_ok,
        detail: format!(
            "delta={d:.15} (e^-1 within 1e-12: {delta_ok}); window average {avg} bps; class rates {rates:?}"
        ),
    }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let traces = bundled_traces_dir();
    let traces = traces.to_str().unwrap();
    let content_dir = dir.join("content");
    std::fs::create_dir(&content_dir).unwrap();
    for (class, seed) in [("sports", "201"), ("sports", "202"), ("news", "211"), ("news", "212")] {
        let path = content_dir.join(format!("{class}_{seed}.trace"));
        let run = vmac(&[
            "synth",
            "--class",
            class,
            "--frames",
            "3000",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(run.status, 0);
    }
    let content_dir = content_dir.to_str().unwrap();

    // (command line, takes --traces-dir, writes --out, honours --sequential)
    let commands = [
        (
            "sweep-flows --flows 2,5,10,40 --runs 50 --reps 3 --seed 11".to_string(),
            true,
            true,
        ),
        (
            "timeseries --flows 20 --duration 2000 --seed 11".to_string(),
            true,
            true,
        ),
        (
            "burstiness --flows 5,40 --duration 2000 --runs 50 --reps 3 --seed 11".to_string(),
            true,
            true,
        ),
        (
            "sweep-window --flows 40 --windows 5:25:10 --runs 50 --reps 3 --seed 11".to_string(),
            true,
            true,
        ),
        (
            format!("content --traces-dir {content_dir} --flows 5,40 --runs 50 --reps 3 --seed 11"),
            false,
            true,
        ),
        ("synth --class movie --frames 500 --seed 11".to_string(), false, true),
        ("hoeffding --n 5 --epsilon 0.3 --widths 2".to_string(), false, false),
        (
            "admit --policy avg --capacity-mbps 100 --class hdready --flows 10 --seed 11".to_string(),
            true,
            false,
        ),
        (format!("ingest {traces}/news_a.trace"), false, false),
    ];

    let mut mismatches = Vec::new();
    for (line, takes_dir, writes_file) in &commands {
        let name = line.split_whitespace().next().unwrap();
        let mut outputs = Vec::new();
        for (run, sequential) in [(0, false), (1, false), (2, true)] {
            let mut args: Vec<String> = line.split_whitespace().map(String::from).collect();
            if *takes_dir {
                args.extend(["--traces-dir".into(), traces.into()]);
            }
            // same file name on every run: synth embeds it as the trace id
            let run_dir = dir.join(format!("run{run}"));
            std::fs::create_dir_all(&run_dir).unwrap();
            let file = run_dir.join(format!("{name}.out"));
            if *writes_file {
                args.extend(["--out".into(), file.to_str().unwrap().into()]);
            }
            let parallel_aware = *takes_dir || name == "content";
            if sequential && parallel_aware {
                args.push("--sequential".into());
            }
            let result = vmac(&args);
            let bytes = if *writes_file {
                std::fs::read(&file).unwrap_or_default()
            } else {
                result.stdout
            };
            if result.status > 1 || bytes.is_empty() {
                mismatches.push(format!(
                    "{name} failed ({}): {}",
                    result.status,
                    String::from_utf8_lossy(&result.stderr).trim()
                ));
            }
            outputs.push(bytes);
        }
        if outputs[0] != outputs[1] {
            mismatches.push(format!("{name}: parallel reruns differ"));
        }
        if outputs[0] != outputs[2] {
            mismatches.push(format!("{name}: sequential differs from parallel"));
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "{} commands, each run twice in parallel and once sequentially: {}",
            commands.len(),
            if mismatches.is_empty() {
                "byte-identical".to_string()
            } else {
                mismatches.join("; ")
            }
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("hoeffding bound holds empirically", hoeffding_bound_holds),
        (
            "probability decreases with flow count and settles near 1/2",
            decreasing_trend,
        ),
        ("average series less bursty than instantaneous", burstiness_ordering),
        ("longer window raises the probability at 40 flows", window_effect),
        ("high-variance content above low-variance, gap shrinks", content_effect),
        ("constant-rate library is exact", cbr_exactness),
        ("closed-form spot checks", closed_forms),
        ("cli output is deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let outcome = check();
        failed += !outcome.pass as usize;
        println!(
            "{} [{}] {label}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
