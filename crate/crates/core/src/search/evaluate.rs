use serde::{Deserialize, Serialize};

use crate::cycle::{find_largest_cycle, BasisSpec, CycleResult};
use crate::detect::Trigger;
use crate::dsl::parse_setup;
use crate::elements::Simulator;
use crate::error::{Error, Result};
use crate::mode::ModeLabel;
use crate::setup::ExperimentConfig;
use crate::spdc::SrvExperiment;
use crate::srv::{is_max_entangled, is_nontrivial, srv_of_state, SchmidtRankVector};
use crate::state::QuantumState;

#[derive(Debug, Clone, PartialEq)]
pub struct SrvCriteria {
    pub dc: u32,
    pub require_nontrivial: bool,
    pub require_max_entangled: bool,
    /// Sorted target class, if only one class is wanted.
    pub target: Option<[usize; 3]>,
}

impl Default for SrvCriteria {
    fn default() -> Self {
        SrvCriteria {
            dc: 1,
            require_nontrivial: true,
            require_max_entangled: true,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCriteria {
    pub min_length: usize,
    pub basis: BasisSpec,
}

impl Default for CycleCriteria {
    fn default() -> Self {
        CycleCriteria {
            min_length: 3,
            basis: BasisSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Criteria {
    Srv(SrvCriteria),
    Cycle(CycleCriteria),
}

/// What a candidate setup is judged by, and under which element rules.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTask {
    pub sim: Simulator,
    pub criteria: Criteria,
}

/// Equal-modulus tolerance for maximal entanglement.
pub const MAX_ENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Srv {
        trigger: Trigger,
        state: QuantumState,
        srv: SchmidtRankVector,
    },
    Cycle(CycleResult),
}

impl Outcome {
    /// Findings with equal keys are treated as the same discovery.
    pub fn class_key(&self) -> String {
        match self {
            Outcome::Srv { srv, .. } => format!("srv{:?}", srv.sorted()),
            Outcome::Cycle(c) => format!("cycle{}", c.length),
        }
    }
}

/// Trigger superpositions tried for a marginal: single values, unordered
/// pairs, then runs of three neighbouring values.
pub fn trigger_candidates(marginal: &[i32]) -> Vec<Trigger> {
    let mut out: Vec<Trigger> = marginal.iter().map(|&l| Trigger::uniform(&[l])).collect();
    for i in 0..marginal.len() {
        for j in i + 1..marginal.len() {
            out.push(Trigger::uniform(&[marginal[i], marginal[j]]));
        }
    }
    for w in marginal.windows(3) {
        out.push(Trigger::uniform(w));
    }
    out
}

fn srv_accepts(
    exp: &SrvExperiment,
    state: &QuantumState,
    crit: &SrvCriteria,
) -> Result<Option<SchmidtRankVector>> {
    if state.is_empty() {
        return Ok(None);
    }
    let srv = srv_of_state(state, exp.parties)?;
    if crit.require_nontrivial && !is_nontrivial(&srv) {
        return Ok(None);
    }
    if crit.target.is_some_and(|t| t != srv.sorted()) {
        return Ok(None);
    }
    if crit.require_max_entangled && !is_max_entangled(state, exp.parties, MAX_ENT_TOL)? {
        return Ok(None);
    }
    Ok(Some(srv))
}

/// Tries every trigger candidate in order and returns the first that meets
/// the criteria.
pub fn evaluate_srv_candidate(
    exp: &SrvExperiment,
    config: &ExperimentConfig,
    crit: &SrvCriteria,
    source: &QuantumState,
) -> Result<Option<Outcome>> {
    let post = exp.post_selected_from(config, source)?;
    if post.is_empty() {
        return Ok(None);
    }
    // polarization-changing setups can leave the parties without a tensor
    for trigger in trigger_candidates(&exp.trigger_marginal(&post)) {
        let state = exp.herald(&post, &trigger)?;
        match srv_accepts(exp, &state, crit) {
            Ok(Some(srv)) => return Ok(Some(Outcome::Srv { trigger, state, srv })),
            Ok(None) | Err(Error::Tensor(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

pub fn evaluate_cycle_candidate(
    sim: &Simulator,
    config: &ExperimentConfig,
    crit: &CycleCriteria,
) -> Result<Option<Outcome>> {
    Ok(find_largest_cycle(sim, config, &crit.basis)?
        .filter(|c| c.length >= crit.min_length)
        .map(Outcome::Cycle))
}

impl SearchTask {
    pub fn experiment(&self) -> SrvExperiment {
        SrvExperiment::with_sim(self.sim)
    }

    /// The SPDC input for srv tasks, built once and reused.
    pub fn source(&self) -> Result<Option<QuantumState>> {
        match &self.criteria {
            Criteria::Srv(c) => Ok(Some(self.experiment().source(c.dc)?)),
            Criteria::Cycle(_) => Ok(None),
        }
    }

    pub fn evaluate(&self, config: &ExperimentConfig, source: Option<&QuantumState>) -> Result<Option<Outcome>> {
        match &self.criteria {
            Criteria::Srv(c) => {
                let exp = self.experiment();
                let owned;
                let source = match source {
                    Some(s) => s,
                    None => {
                        owned = exp.source(c.dc)?;
                        &owned
                    }
                };
                evaluate_srv_candidate(&exp, config, c, source)
            }
            Criteria::Cycle(c) => evaluate_cycle_candidate(&self.sim, config, c),
        }
    }
}

/// One persisted discovery, as written to the findings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingRecord {
    pub seed: u64,
    pub worker: usize,
    pub iteration: u64,
    pub mode: String,
    pub convention: String,
    pub dc: Option<u32>,
    pub config_dsl: String,
    pub simplified_dsl: String,
    pub trigger: Option<String>,
    pub state: String,
    pub srv: Option<[usize; 3]>,
    pub cycle: Option<Vec<String>>,
    pub found_at_unix_ms: u128,
    pub elapsed_ms: u128,
}

impl FindingRecord {
    pub fn cycle_length(&self) -> Option<usize> {
        self.cycle.as_ref().map(|c| c.len())
    }
}

/// The state an outcome is summarized by: the heralded state, or the
/// superposition of the cycle states for cycle findings.
pub fn outcome_state(o: &Outcome) -> QuantumState {
    match o {
        Outcome::Srv { state, .. } => state.clone(),
        Outcome::Cycle(c) => QuantumState::from_terms(
            c.states
                .iter()
                .map(|m| (crate::state::PhotonTerm::new([*m]), num_complex::Complex64::new(1.0, 0.0))),
        ),
    }
}

/// Re-runs a recorded finding from its simplified setup and checks that the
/// recorded result comes out again.
pub fn verify_finding(record: &FindingRecord, task: &SearchTask) -> Result<bool> {
    let config = parse_setup(&record.simplified_dsl)?;
    match &task.criteria {
        Criteria::Srv(c) => {
            let exp = task.experiment();
            let trigger: Trigger = record
                .trigger
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("srv finding without trigger".into()))?
                .parse()?;
            let state = exp.heralded(&config, record.dc.unwrap_or(c.dc), &trigger)?;
            let recorded = QuantumState::parse_text(&record.state)?;
            let srv = srv_of_state(&state, exp.parties)?;
            Ok(record.srv.is_some_and(|s| s == srv.0)
                && state.equiv(&recorded, 1e-6)
                && srv_accepts(&exp, &state, c)?.is_some())
        }
        Criteria::Cycle(c) => {
            let Some(found) = find_largest_cycle(&task.sim, &config, &c.basis)? else {
                return Ok(false);
            };
            let want = record
                .cycle
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("cycle finding without cycle".into()))?
                .iter()
                .map(|s| ModeLabel::parse_short(s))
                .collect::<Result<Vec<_>>>()?;
            Ok(found.length >= c.min_length && found.states == want)
        }
    }
}
