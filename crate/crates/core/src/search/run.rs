use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::setup::ExperimentConfig;

use super::evaluate::{outcome_state, Criteria, FindingRecord, Outcome, SearchTask};
use super::sampler::{random_config, SearchSpace};
use super::simplify::{simplify, BehaviorCheck, CycleCheck, HeraldedStateCheck, SimplifyOptions};
use super::toolbox::{LearnPolicy, Toolbox};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub seed: u64,
    pub workers: usize,
    /// Total sampled setups across all workers.
    pub iterations: Option<u64>,
    pub time_limit: Option<Duration>,
    pub learning: bool,
    pub p_forget: f64,
    pub policy: LearnPolicy,
    pub space: SearchSpace,
    pub simplify: bool,
    pub out: Option<PathBuf>,
    /// Keep the DSL of every sampled setup (single-worker debugging).
    pub trace: bool,
}

impl SearchParams {
    pub fn new(seed: u64, space: SearchSpace) -> Self {
        SearchParams {
            seed,
            workers: 1,
            iterations: Some(1000),
            time_limit: None,
            learning: true,
            p_forget: 0.1,
            policy: LearnPolicy::default(),
            space,
            simplify: true,
            out: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub record: FindingRecord,
    pub config: ExperimentConfig,
    pub simplified: ExperimentConfig,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub findings: Vec<Finding>,
    pub toolbox: Toolbox,
    pub iterations: u64,
    /// Iterations at which a composite was learned.
    pub learn_events: Vec<u64>,
    /// Per worker, the sampled setups in order, when tracing.
    pub trace: Vec<Vec<String>>,
}

/// Independent random streams for worker `w`: one for sampling, one for forgetting.
pub fn worker_rngs(seed: u64, w: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sample = ChaCha8Rng::seed_from_u64(seed);
    sample.set_stream(2 * w as u64);
    let mut forget = ChaCha8Rng::seed_from_u64(seed);
    forget.set_stream(2 * w as u64 + 1);
    (sample, forget)
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

struct Shared {
    toolbox: RwLock<Arc<Toolbox>>,
    seen: Mutex<HashSet<String>>,
    findings: Mutex<Vec<Finding>>,
    learn_events: Mutex<Vec<u64>>,
    sink: Mutex<Option<BufWriter<File>>>,
    counter: AtomicU64,
    start: Instant,
}

fn behavior_check(task: &SearchTask, config: &ExperimentConfig, outcome: &Outcome) -> Result<Box<dyn BehaviorCheck>> {
    Ok(match (&task.criteria, outcome) {
        (Criteria::Srv(c), Outcome::Srv { trigger, .. }) => Box::new(HeraldedStateCheck::capture(
            task.experiment(),
            config,
            c.dc,
            trigger.clone(),
        )?),
        (Criteria::Cycle(c), Outcome::Cycle(_)) => {
            Box::new(CycleCheck::capture(task.sim, config, c.basis.clone())?)
        }
        _ => return Err(Error::InvalidParameter("outcome does not match task".into())),
    })
}

fn make_record(
    params: &SearchParams,
    task: &SearchTask,
    worker: usize,
    iteration: u64,
    config: &ExperimentConfig,
    simplified: &ExperimentConfig,
    outcome: &Outcome,
    elapsed: Duration,
) -> FindingRecord {
    let (mode, dc) = match &task.criteria {
        Criteria::Srv(c) => ("srv", Some(c.dc)),
        Criteria::Cycle(_) => ("cycle", None),
    };
    let (trigger, srv, cycle) = match outcome {
        Outcome::Srv { trigger, srv, .. } => (Some(trigger.to_string()), Some(srv.0), None),
        Outcome::Cycle(c) => (
            None,
            None,
            Some(c.states.iter().map(|m| m.to_short()).collect()),
        ),
    };
    FindingRecord {
        seed: params.seed,
        worker,
        iteration,
        mode: mode.into(),
        convention: task.sim.bs.to_string(),
        dc,
        config_dsl: crate::dsl::print_setup(config),
        simplified_dsl: crate::dsl::print_setup(simplified),
        trigger,
        state: outcome_state(outcome).to_text(),
        srv,
        cycle,
        found_at_unix_ms: unix_ms(),
        elapsed_ms: elapsed.as_millis(),
    }
}

fn worker_loop(
    w: usize,
    params: &SearchParams,
    task: &SearchTask,
    shared: &Shared,
) -> Result<Vec<String>> {
    let (mut rng, mut forget_rng) = worker_rngs(params.seed, w);
    let source = task.source()?;
    let mut trace = Vec::new();
    loop {
        if params
            .time_limit
            .is_some_and(|t| shared.start.elapsed() >= t)
        {
            break;
        }
        let iteration = shared.counter.fetch_add(1, Ordering::SeqCst);
        if params.iterations.is_some_and(|n| iteration >= n) {
            break;
        }
        // adopt the latest toolbox at iteration boundaries
        let toolbox = shared.toolbox.read().unwrap().clone();
        let config = random_config(&toolbox, &params.space, &mut rng);
        if params.trace {
            trace.push(crate::dsl::print_setup(&config));
        }
        let outcome = match task.evaluate(&config, source.as_ref()) {
            Ok(Some(o)) => o,
            // setups that run past the cutoff or are otherwise invalid are skipped
            Ok(None) | Err(_) => continue,
        };
        let key = outcome.class_key();
        if shared.seen.lock().unwrap().contains(&key) {
            continue;
        }
        let simplified = if params.simplify {
            let check = behavior_check(task, &config, &outcome)?;
            simplify(&config, check.as_ref(), SimplifyOptions::default()).unwrap_or_else(|_| config.clone())
        } else {
            config.clone()
        };
        if !shared.seen.lock().unwrap().insert(key) {
            continue;
        }
        let record = make_record(
            params,
            task,
            w,
            iteration,
            &config,
            &simplified,
            &outcome,
            shared.start.elapsed(),
        );
        if let Some(sink) = shared.sink.lock().unwrap().as_mut() {
            let line = serde_json::to_string(&record).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(sink, "{line}")?;
            sink.flush()?;
        }
        if params.learning {
            if let Outcome::Cycle(c) = &outcome {
                if params.policy.admits(c) {
                    let mut slot = shared.toolbox.write().unwrap();
                    let mut tb = (**slot).clone();
                    tb.forget(&mut forget_rng, params.p_forget);
                    tb.learn(&simplified, iteration, c);
                    *slot = Arc::new(tb);
                    shared.learn_events.lock().unwrap().push(iteration);
                }
            }
        }
        shared.findings.lock().unwrap().push(Finding {
            record,
            config,
            simplified,
            outcome,
        });
    }
    Ok(trace)
}

/// Samples, evaluates, simplifies, learns and reports until the budget runs
/// out. With one worker the run is fully determined by the seed.
pub fn search_loop(params: &SearchParams, task: &SearchTask, toolbox: Toolbox) -> Result<SearchOutcome> {
    if params.iterations.is_none() && params.time_limit.is_none() {
        return Err(Error::InvalidParameter("search needs an iteration or time budget".into()));
    }
    if !(0.0..=1.0).contains(&params.p_forget) {
        return Err(Error::InvalidParameter(format!("p_forget {} outside [0,1]", params.p_forget)));
    }
    let sink = match &params.out {
        Some(p) => Some(BufWriter::new(
            std::fs::OpenOptions::new().create(true).append(true).open(p)?,
        )),
        None => None,
    };
    let shared = Shared {
        toolbox: RwLock::new(Arc::new(toolbox)),
        seen: Mutex::new(HashSet::new()),
        findings: Mutex::new(Vec::new()),
        learn_events: Mutex::new(Vec::new()),
        sink: Mutex::new(sink),
        counter: AtomicU64::new(0),
        start: Instant::now(),
    };
    let workers = params.workers.max(1);
    let traces: Vec<Result<Vec<String>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let shared = &shared;
                s.spawn(move || worker_loop(w, params, task, shared))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let trace = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let iterations = shared.counter.load(Ordering::SeqCst);
    let iterations = params.iterations.map_or(iterations, |n| iterations.min(n));
    let mut findings = shared.findings.into_inner().unwrap();
    findings.sort_by_key(|f| f.record.iteration);
    let mut learn_events = shared.learn_events.into_inner().unwrap();
    learn_events.sort_unstable();
    Ok(SearchOutcome {
        findings,
        toolbox: (*shared.toolbox.into_inner().unwrap()).clone(),
        iterations,
        learn_events,
        trace,
    })
}
