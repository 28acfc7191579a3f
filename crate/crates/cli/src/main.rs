use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use oamlab::cycle::{all_cycles, transform_basis, BasisSpec};
use oamlab::detect::Trigger;
use oamlab::dsl::{SetupDocument, SetupMode};
use oamlab::manifest::GoldenManifest;
use oamlab::search::{
    search_loop, simplify, verify_finding, BehaviorCheck, CycleCheck, CycleCriteria, Criteria,
    FindingRecord, HeraldedStateCheck, SearchParams, SearchSpace, SearchTask, SimplifyOptions,
    SrvCriteria, Toolbox,
};
use oamlab::spdc::{verify_dc_stability, SrvExperiment};
use oamlab::srv::{ghz_dimension, is_max_entangled, srv_of_state};
use oamlab::{BsConvention, PathId, Polarization, QuantumState, Simulator};

/// DC values above this need `--allow-large-dc`.
const DC_SOFT_LIMIT: u32 = 10;

#[derive(Parser)]
#[command(name = "oamlab", version, about = "Simulate and search multi-photon OAM setups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Srv,
    Cycle,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Mirror,
    Symmetric,
}

impl From<Convention> for BsConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Mirror => BsConvention::Mirror,
            Convention::Symmetric => BsConvention::Symmetric,
        }
    }
}

#[derive(clap::Args)]
struct SetupArgs {
    /// Setup file (element list, optionally preceded by `@` directives).
    setup: PathBuf,
    /// Beam splitter phase rule; overrides `@convention`.
    #[arg(long, value_enum)]
    convention: Option<Convention>,
    /// Pair-emission cutoff; overrides `@dc`.
    #[arg(long)]
    dc: Option<u32>,
    /// Trigger superposition such as `|0>+|1>`; overrides `@trigger`.
    #[arg(long)]
    trigger: Option<String>,
}

#[derive(clap::Args)]
struct BasisArgs {
    /// Basis paths, e.g. `a,b`; overrides `@basis`.
    #[arg(long, value_delimiter = ',')]
    paths: Option<Vec<char>>,
    #[arg(long, value_delimiter = ',', default_value = "H,V")]
    pols: Vec<String>,
    #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
    oam_min: i32,
    #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
    oam_max: i32,
}

#[derive(Subcommand)]
enum Command {
    /// Print the output state of a setup.
    Eval {
        #[command(flatten)]
        setup: SetupArgs,
        /// Apply the setup to this state (text format) instead of the SPDC source.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Schmidt rank vector and GHZ test of a three-photon state file.
    Analyze {
        state: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "b,c,d")]
        parties: Vec<char>,
    },
    /// Longest cycle of a setup over a single-photon basis.
    Cycle {
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        basis: BasisArgs,
        /// Also list every shorter cycle except fixed points.
        #[arg(long)]
        all: bool,
    },
    /// Re-run a heralded setup for a range of DC values.
    DcCheck {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 1)]
        from: u32,
        #[arg(long, default_value_t = 10)]
        to: u32,
        /// Permit DC values above 10 (up to 25).
        #[arg(long)]
        allow_large_dc: bool,
    },
    /// Remove elements that do not change what the setup does.
    Simplify {
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        basis: BasisArgs,
    },
    /// Randomized search for setups.
    Search {
        #[arg(long, value_enum, default_value = "srv")]
        mode: Mode,
        #[arg(long, env = "OAMLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        minutes: Option<f64>,
        #[arg(long, value_enum, default_value = "on")]
        learn: OnOff,
        #[arg(long, default_value_t = 0.1)]
        p_forget: f64,
        #[arg(long, default_value_t = 15)]
        max_elements: usize,
        #[arg(long, default_value_t = 1)]
        dc: u32,
        #[arg(long, value_enum)]
        convention: Option<Convention>,
        /// Minimum cycle length in cycle mode.
        #[arg(long, default_value_t = 3)]
        min_length: usize,
        /// Seed the toolbox with the parity sorter as a composite.
        #[arg(long)]
        inject_sorter: bool,
        /// Findings file (JSON lines, appended).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every finding in a findings file.
    Verify {
        findings: PathBuf,
    },
    /// Run the golden manifest; exits nonzero if anything disagrees.
    Reproduce {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
}

type CliResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn paths_from(chars: &[char]) -> CliResult<Vec<PathId>> {
    chars.iter().map(|c| PathId::new(*c).map_err(err)).collect()
}

struct Loaded {
    doc: SetupDocument,
    sim: Simulator,
    dc: u32,
    trigger: Option<Trigger>,
}

fn load(args: &SetupArgs) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(&args.setup).map_err(|e| format!("{}: {e}", args.setup.display()))?;
    let doc = SetupDocument::parse(&text).map_err(|e| format!("{}: {e}", args.setup.display()))?;
    let convention = args
        .convention
        .map(BsConvention::from)
        .or(doc.convention)
        .unwrap_or_default();
    let trigger = match &args.trigger {
        Some(t) => Some(t.parse().map_err(err)?),
        None => doc.trigger.clone(),
    };
    Ok(Loaded {
        sim: Simulator::with_convention(convention),
        dc: args.dc.or(doc.dc).unwrap_or(1),
        trigger,
        doc,
    })
}

fn basis_from(args: &BasisArgs, doc: &SetupDocument) -> CliResult<BasisSpec> {
    let paths = match &args.paths {
        Some(p) => paths_from(p)?,
        None => doc.basis_paths.clone().unwrap_or_else(|| BasisSpec::default().paths),
    };
    let pols = args
        .pols
        .iter()
        .map(|p| p.parse::<Polarization>().map_err(err))
        .collect::<CliResult<Vec<_>>>()?;
    if args.oam_min > args.oam_max {
        return Err("--oam-min exceeds --oam-max".into());
    }
    Ok(BasisSpec {
        paths,
        oam_min: args.oam_min,
        oam_max: args.oam_max,
        pols,
    })
}

fn eval(setup: &SetupArgs, input: Option<&Path>) -> CliResult<()> {
    let l = load(setup)?;
    let out = match input {
        Some(p) => {
            let s = QuantumState::parse_text(&std::fs::read_to_string(p).map_err(err)?).map_err(err)?;
            l.sim.apply_setup(&l.doc.config, &s).map_err(err)?
        }
        None => {
            let exp = SrvExperiment::with_sim(l.sim);
            match &l.trigger {
                Some(t) => exp.heralded(&l.doc.config, l.dc, t).map_err(err)?,
                None => exp.post_selected(&l.doc.config, l.dc).map_err(err)?,
            }
        }
    };
    print!("{}", out.to_text());
    Ok(())
}

fn analyze(state: &Path, parties: &[char]) -> CliResult<()> {
    let s = QuantumState::parse_text(&std::fs::read_to_string(state).map_err(err)?).map_err(err)?;
    let ps = paths_from(parties)?;
    let parties: [PathId; 3] = ps.try_into().map_err(|_| "need exactly three parties".to_string())?;
    let srv = srv_of_state(&s, parties).map_err(err)?;
    let [x, y, z] = srv.sorted();
    println!("srv {srv}");
    println!("class ({x},{y},{z})");
    println!("max_entangled {}", is_max_entangled(&s, parties, 1e-6).map_err(err)?);
    match ghz_dimension(&s, parties, 1e-6).map_err(err)? {
        Some(d) => println!("ghz {d}"),
        None => println!("ghz none"),
    }
    Ok(())
}

fn cycle(setup: &SetupArgs, basis: &BasisArgs, all: bool) -> CliResult<()> {
    let l = load(setup)?;
    let basis = basis_from(basis, &l.doc)?;
    let map = transform_basis(&l.sim, &l.doc.config, &basis).map_err(err)?;
    let cycles = all_cycles(&map);
    if cycles.is_empty() {
        println!("no cycle");
        return Ok(());
    }
    let shown = if all { &cycles[..] } else { &cycles[..1] };
    for c in shown.iter().filter(|c| c.length > 1 || !all) {
        let s: Vec<String> = c.states.iter().map(|m| m.to_short()).collect();
        println!("{} : {}", c.length, s.join(" -> "));
    }
    Ok(())
}

fn dc_check(setup: &SetupArgs, from: u32, to: u32, allow_large: bool) -> CliResult<bool> {
    let l = load(setup)?;
    if to > DC_SOFT_LIMIT && !allow_large {
        return Err(format!("DC above {DC_SOFT_LIMIT} requires --allow-large-dc"));
    }
    if to > 25 {
        return Err("DC above 25 is not supported".into());
    }
    let trigger = l.trigger.ok_or("dc-check needs a trigger (--trigger or @trigger)")?;
    let exp = SrvExperiment::with_sim(l.sim);
    let report = verify_dc_stability(&exp, &l.doc.config, &trigger, from, to).map_err(err)?;
    println!("{:>3}  {:<12} {:<5} {:>6}  distance", "dc", "srv", "ghz", "terms");
    for p in &report.points {
        println!(
            "{:>3}  {:<12} {:<5} {:>6}  {:.3e}",
            p.dc,
            p.srv.map_or("-".into(), |s| s.to_string()),
            p.ghz.map_or("-".into(), |g| g.to_string()),
            p.terms,
            p.distance_from_first
        );
    }
    match report.first_change {
        None => println!("stable"),
        Some(dc) => println!("changes at dc {dc}"),
    }
    Ok(report.stable())
}

fn simplify_cmd(setup: &SetupArgs, basis: &BasisArgs) -> CliResult<()> {
    let l = load(setup)?;
    let check: Box<dyn BehaviorCheck> = match l.doc.mode {
        SetupMode::Srv => {
            let trigger = l.trigger.ok_or("srv simplification needs a trigger")?;
            Box::new(
                HeraldedStateCheck::capture(SrvExperiment::with_sim(l.sim), &l.doc.config, l.dc, trigger)
                    .map_err(err)?,
            )
        }
        SetupMode::Cycle => {
            let basis = basis_from(basis, &l.doc)?;
            Box::new(CycleCheck::capture(l.sim, &l.doc.config, basis).map_err(err)?)
        }
    };
    let out = simplify(&l.doc.config, check.as_ref(), SimplifyOptions::default()).map_err(err)?;
    print!("{}", SetupDocument { config: out, ..l.doc }.print());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn search(
    mode: Mode,
    seed: u64,
    workers: usize,
    iterations: Option<u64>,
    minutes: Option<f64>,
    learn: OnOff,
    p_forget: f64,
    max_elements: usize,
    dc: u32,
    convention: Option<Convention>,
    min_length: usize,
    inject_sorter: bool,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let sim = Simulator::with_convention(convention.map(Into::into).unwrap_or_default());
    let (task, space, mut toolbox) = match mode {
        Mode::Srv => (
            SearchTask {
                sim,
                criteria: Criteria::Srv(SrvCriteria {
                    dc,
                    ..SrvCriteria::default()
                }),
            },
            SearchSpace::srv_default(),
            Toolbox::srv_default(),
        ),
        Mode::Cycle => (
            SearchTask {
                sim,
                criteria: Criteria::Cycle(CycleCriteria {
                    min_length,
                    ..CycleCriteria::default()
                }),
            },
            SearchSpace::cycle_default(),
            Toolbox::cycle_default(),
        ),
    };
    if inject_sorter {
        toolbox.inject("LI", oamlab::search::parity_sorter_elements());
    }
    let mut params = SearchParams::new(seed, SearchSpace { max_elements, ..space });
    params.workers = workers;
    params.iterations = iterations;
    params.time_limit = minutes.map(|m| Duration::from_secs_f64(m * 60.0));
    if params.iterations.is_none() && params.time_limit.is_none() {
        params.iterations = Some(1000);
    }
    params.learning = learn == OnOff::On;
    params.p_forget = p_forget;
    params.out = out;
    let outcome = search_loop(&params, &task, toolbox).map_err(err)?;
    println!(
        "iterations {}  findings {}  learned {}",
        outcome.iterations,
        outcome.findings.len(),
        outcome.learn_events.len()
    );
    for f in &outcome.findings {
        let r = &f.record;
        let what = match (&r.srv, &r.cycle) {
            (Some(s), _) => format!("srv {:?} trigger {}", s, r.trigger.as_deref().unwrap_or("")),
            (_, Some(c)) => format!("cycle {} : {}", c.len(), c.join(" -> ")),
            _ => String::new(),
        };
        println!("#{} (worker {}) {what}", r.iteration, r.worker);
        for line in r.simplified_dsl.lines() {
            println!("    {line}");
        }
    }
    Ok(())
}

fn verify(path: &Path) -> CliResult<bool> {
    let text = std::fs::read_to_string(path).map_err(err)?;
    let mut all_ok = true;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let r: FindingRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let sim = Simulator::with_convention(r.convention.parse().map_err(err)?);
        let criteria = match r.mode.as_str() {
            "srv" => Criteria::Srv(SrvCriteria {
                dc: r.dc.unwrap_or(1),
                ..SrvCriteria::default()
            }),
            _ => Criteria::Cycle(CycleCriteria {
                min_length: 1,
                ..CycleCriteria::default()
            }),
        };
        let ok = verify_finding(&r, &SearchTask { sim, criteria }).map_err(err)?;
        all_ok &= ok;
        println!("line {} iteration {}: {}", i + 1, r.iteration, if ok { "ok" } else { "FAILED" });
    }
    Ok(all_ok)
}

fn reproduce(manifest: Option<&Path>, json: bool) -> CliResult<bool> {
    let m = match manifest {
        Some(p) => GoldenManifest::load(p).map_err(err)?,
        None => GoldenManifest::builtin(),
    };
    let report = oamlab::reproduce::reproduce(&m).map_err(err)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(err)?);
    } else {
        print!("{}", report.render());
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Eval { setup, input } => eval(&setup, input.as_deref()).map(|_| true),
        Command::Analyze { state, parties } => analyze(&state, &parties).map(|_| true),
        Command::Cycle { setup, basis, all } => cycle(&setup, &basis, all).map(|_| true),
        Command::DcCheck {
            setup,
            from,
            to,
            allow_large_dc,
        } => dc_check(&setup, from, to, allow_large_dc),
        Command::Simplify { setup, basis } => simplify_cmd(&setup, &basis).map(|_| true),
        Command::Search {
            mode,
            seed,
            workers,
            iterations,
            minutes,
            learn,
            p_forget,
            max_elements,
            dc,
            convention,
            min_length,
            inject_sorter,
            out,
        } => search(
            mode,
            seed,
            workers,
            iterations,
            minutes,
            learn,
            p_forget,
            max_elements,
            dc,
            convention,
            min_length,
            inject_sorter,
            out,
        )
        .map(|_| true),
        Command::Verify { findings } => verify(&findings),
        Command::Reproduce { manifest, json } => reproduce(manifest.as_deref(), json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
