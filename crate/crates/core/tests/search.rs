use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oamlab::cycle::BasisSpec;
use oamlab::search::{
    parity_sorter_elements, random_config, random_element, search_loop, verify_finding,
    CycleCriteria, Criteria, FindingRecord, SearchParams, SearchSpace, SearchTask, SrvCriteria,
    Toolbox,
};
use oamlab::setup::{Element, ExperimentConfig};
use oamlab::Simulator;

/// Upper 0.1% points of the chi-square distribution by degrees of freedom.
fn chi2_crit(df: usize) -> f64 {
    match df {
        1 => 10.828,
        5 => 20.515,
        14 => 36.123,
        17 => 40.790,
        _ => panic!("no critical value for df {df}"),
    }
}

fn chi2<K: Ord>(counts: &BTreeMap<K, usize>, cells: usize) -> f64 {
    assert_eq!(counts.len(), cells, "some cells never drawn");
    let n: usize = counts.values().sum();
    let e = n as f64 / cells as f64;
    counts.values().map(|&o| (o as f64 - e).powi(2) / e).sum()
}

#[test]
fn sampler_is_uniform() {
    let tb = Toolbox::cycle_default();
    let space = SearchSpace::cycle_default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut lengths = BTreeMap::new();
    for _ in 0..15_000 {
        *lengths.entry(random_config(&tb, &space, &mut rng).len()).or_insert(0) += 1;
    }
    assert!(chi2(&lengths, 15) < chi2_crit(14), "{lengths:?}");

    let mut kinds = BTreeMap::new();
    let mut pairs = BTreeMap::new();
    let mut shifts = BTreeMap::new();
    let mut prisms = BTreeMap::new();
    for _ in 0..60_000 {
        let e = random_element(&tb, &space, &mut rng);
        *kinds.entry(e.kind().unwrap().name()).or_insert(0) += 1;
        match e {
            Element::BS(p, q) | Element::PBS(p, q) => *pairs.entry((p, q)).or_insert(0) += 1,
            Element::OAMHolo(_, n) => *shifts.entry(n).or_insert(0) += 1,
            Element::DP(_, n) => *prisms.entry(n).or_insert(0) += 1,
            _ => {}
        }
    }
    assert!(chi2(&kinds, 6) < chi2_crit(5), "{kinds:?}");
    assert!(chi2(&pairs, 6) < chi2_crit(5), "{pairs:?}");
    assert!(chi2(&shifts, 18) < chi2_crit(17), "{shifts:?}");
    assert!(!shifts.contains_key(&0));
    assert!(chi2(&prisms, 2) < chi2_crit(1), "{prisms:?}");
}

#[test]
fn learned_composites_are_drawn_like_primitives() {
    let mut tb = Toolbox::cycle_default();
    tb.inject("LI", parity_sorter_elements());
    let space = SearchSpace::cycle_default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut kinds = BTreeMap::new();
    for _ in 0..21_000 {
        let e = random_element(&tb, &space, &mut rng);
        let key = if e.is_composite() { "composite" } else { e.kind().unwrap().name() };
        *kinds.entry(key).or_insert(0) += 1;
    }
    // 7 cells; df 6 critical value at 0.1%
    assert!(chi2(&kinds, 7) < 22.458, "{kinds:?}");
}

#[test]
fn forgetting_rate_matches_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = 0.1;
    let (mut offered, mut removed) = (0usize, 0usize);
    for _ in 0..2000 {
        let mut tb = Toolbox::cycle_default();
        for i in 0..20 {
            tb.inject(&format!("K{i}"), vec![Element::HWP(oamlab::path('a'))]);
        }
        offered += 20;
        removed += tb.forget(&mut rng, p);
        assert_eq!(tb.primitives.len(), 6);
    }
    let rate = removed as f64 / offered as f64;
    let sigma = (p * (1.0 - p) / offered as f64).sqrt();
    assert!((rate - p).abs() < 4.0 * sigma, "rate {rate}");
    let mut tb = Toolbox::cycle_default();
    tb.inject("K", vec![]);
    assert_eq!(tb.forget(&mut rng, 0.0), 0);
    assert_eq!(tb.forget(&mut rng, 1.0), 1);
}

fn cycle_task() -> SearchTask {
    SearchTask {
        sim: Simulator::default(),
        criteria: Criteria::Cycle(CycleCriteria {
            min_length: 3,
            basis: BasisSpec::default(),
        }),
    }
}

fn cycle_toolbox() -> Toolbox {
    let mut tb = Toolbox::cycle_default();
    tb.inject("LI", parity_sorter_elements());
    tb
}

fn strip_times(r: &FindingRecord) -> FindingRecord {
    FindingRecord {
        found_at_unix_ms: 0,
        elapsed_ms: 0,
        ..r.clone()
    }
}

#[test]
fn single_worker_runs_are_reproducible() {
    let mut params = SearchParams::new(4, SearchSpace::cycle_default());
    params.iterations = Some(1000);
    let a = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    let b = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    assert!(!a.findings.is_empty());
    let ra: Vec<_> = a.findings.iter().map(|f| strip_times(&f.record)).collect();
    let rb: Vec<_> = b.findings.iter().map(|f| strip_times(&f.record)).collect();
    assert_eq!(ra, rb);
    assert_eq!(a.learn_events, b.learn_events);
    assert_eq!(a.toolbox, b.toolbox);
}

#[test]
fn learning_changes_nothing_before_the_first_learn_event() {
    let mut params = SearchParams::new(0, SearchSpace::cycle_default());
    params.iterations = Some(1000);
    params.trace = true;
    let on = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    params.learning = false;
    let off = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    let first = *on.learn_events.first().expect("no learn event") as usize;
    assert!(off.learn_events.is_empty());
    assert_eq!(on.trace[0][..=first], off.trace[0][..=first]);
    assert_eq!(on.findings[0].record.iteration, off.findings[0].record.iteration);
    assert_eq!(off.toolbox, cycle_toolbox());
    // learned composites carry the cycle length in their name
    assert!(on.toolbox.learned.iter().skip(1).all(|l| l.composite.name.starts_with('C')));
}

#[test]
fn every_finding_reverifies_and_simplified_is_not_longer() {
    for seed in 0..3 {
        let mut params = SearchParams::new(seed, SearchSpace::cycle_default());
        params.iterations = Some(600);
        let task = cycle_task();
        let out = search_loop(&params, &task, cycle_toolbox()).unwrap();
        for f in &out.findings {
            assert!(verify_finding(&f.record, &task).unwrap(), "{:?}", f.record);
            assert!(f.simplified.expanded().len() <= f.config.expanded().len());
            assert!(f.record.cycle_length().unwrap() >= 3);
        }
        let mut keys: Vec<String> = out.findings.iter().map(|f| f.outcome.class_key()).collect();
        let n = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), n, "duplicate classes reported");
    }
}

#[test]
fn srv_search_findings_reverify() {
    let task = SearchTask {
        sim: Simulator::default(),
        criteria: Criteria::Srv(SrvCriteria::default()),
    };
    let mut params = SearchParams::new(1, SearchSpace {
        max_elements: 6,
        ..SearchSpace::srv_default()
    });
    params.iterations = Some(300);
    let out = search_loop(&params, &task, Toolbox::srv_default()).unwrap();
    assert!(!out.findings.is_empty());
    for f in &out.findings {
        assert!(verify_finding(&f.record, &task).unwrap(), "{:?}", f.record);
        assert!(f.record.srv.unwrap().iter().all(|&r| r >= 2));
    }
    // srv findings never become composites
    assert!(out.learn_events.is_empty());
    assert_eq!(out.toolbox, Toolbox::srv_default());
}

#[test]
fn parallel_workers_share_the_budget() {
    let mut params = SearchParams::new(9, SearchSpace::cycle_default());
    params.iterations = Some(800);
    params.workers = 4;
    let task = cycle_task();
    let out = search_loop(&params, &task, cycle_toolbox()).unwrap();
    assert_eq!(out.iterations, 800);
    for f in &out.findings {
        assert!(f.record.worker < 4);
        assert!(verify_finding(&f.record, &task).unwrap());
    }
}

#[test]
fn findings_file_has_one_json_object_per_line() {
    let file = std::env::temp_dir().join(format!("oamlab-findings-{}.jsonl", std::process::id()));
    let _ = std::fs::remove_file(&file);
    let mut params = SearchParams::new(2, SearchSpace::cycle_default());
    params.iterations = Some(400);
    params.out = Some(file.clone());
    let out = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    let text = std::fs::read_to_string(&file).unwrap();
    std::fs::remove_file(&file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), out.findings.len());
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["seed", "iteration", "config_dsl", "simplified_dsl", "trigger", "state", "cycle", "found_at_unix_ms"] {
            assert!(v.get(key).is_some(), "missing {key}: {line}");
        }
        let r: FindingRecord = serde_json::from_str(line).unwrap();
        assert_eq!(r.seed, 2);
        assert!(verify_finding(&r, &cycle_task()).unwrap());
    }
}

#[test]
fn budgets_are_validated() {
    let mut params = SearchParams::new(0, SearchSpace::cycle_default());
    params.iterations = None;
    assert!(search_loop(&params, &cycle_task(), cycle_toolbox()).is_err());
    params.iterations = Some(1);
    params.p_forget = 1.5;
    assert!(search_loop(&params, &cycle_task(), cycle_toolbox()).is_err());
    params.p_forget = 0.1;
    params.iterations = None;
    params.time_limit = Some(std::time::Duration::from_millis(50));
    let out = search_loop(&params, &cycle_task(), cycle_toolbox()).unwrap();
    assert!(out.iterations > 0);
}

#[test]
fn empty_setups_never_qualify() {
    assert!(cycle_task().evaluate(&ExperimentConfig::default(), None).unwrap().is_none());
}
