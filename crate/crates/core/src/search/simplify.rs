//! Shrinks a setup while a behavior check keeps holding.
//!
//! Three kinds of edits are tried, repeatedly, until none applies:
//! removing up to four elements at once, replacing an element by a mirror on
//! one of its paths, and removing a two-path element while swapping its two
//! paths in everything downstream.

use crate::cycle::{find_largest_cycle, BasisSpec, CycleResult};
use crate::detect::Trigger;
use crate::elements::Simulator;
use crate::error::{Error, Result};
use crate::mode::{ModeLabel, PathId};
use crate::setup::{Element, ExperimentConfig};
use crate::spdc::SrvExperiment;
use crate::state::QuantumState;

pub trait BehaviorCheck {
    fn holds(&self, config: &ExperimentConfig) -> bool;
}

impl<F: Fn(&ExperimentConfig) -> bool> BehaviorCheck for F {
    fn holds(&self, config: &ExperimentConfig) -> bool {
        self(config)
    }
}

/// The heralded state for a fixed trigger must stay the same up to phase.
pub struct HeraldedStateCheck {
    exp: SrvExperiment,
    source: QuantumState,
    trigger: Trigger,
    reference: QuantumState,
}

impl HeraldedStateCheck {
    pub fn capture(exp: SrvExperiment, config: &ExperimentConfig, dc: u32, trigger: Trigger) -> Result<Self> {
        let source = exp.source(dc)?;
        let reference = exp.herald(&exp.post_selected_from(config, &source)?, &trigger)?;
        Ok(HeraldedStateCheck {
            exp,
            source,
            trigger,
            reference,
        })
    }
}

impl BehaviorCheck for HeraldedStateCheck {
    fn holds(&self, config: &ExperimentConfig) -> bool {
        self.exp
            .post_selected_from(config, &self.source)
            .and_then(|p| self.exp.herald(&p, &self.trigger))
            .is_ok_and(|s| s.equiv(&self.reference, 1e-6))
    }
}

/// The longest cycle must keep the same states in the same order.
pub struct CycleCheck {
    sim: Simulator,
    basis: BasisSpec,
    reference: Option<Vec<ModeLabel>>,
}

impl CycleCheck {
    pub fn capture(sim: Simulator, config: &ExperimentConfig, basis: BasisSpec) -> Result<Self> {
        let reference = find_largest_cycle(&sim, config, &basis)?.map(|c: CycleResult| c.states);
        Ok(CycleCheck {
            sim,
            basis,
            reference,
        })
    }
}

impl BehaviorCheck for CycleCheck {
    fn holds(&self, config: &ExperimentConfig) -> bool {
        find_largest_cycle(&self.sim, config, &self.basis)
            .is_ok_and(|c| c.map(|c| c.states) == self.reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifyOptions {
    /// Largest number of elements removed in one step.
    pub max_subset: usize,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        SimplifyOptions { max_subset: 4 }
    }
}

fn without(config: &ExperimentConfig, drop: &[usize]) -> ExperimentConfig {
    ExperimentConfig::new(
        config
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, e)| e.clone())
            .collect(),
    )
}

/// Calls `f` with every increasing index tuple of size `k` below `n` whose
/// elements share a path, stopping when `f` returns true.
fn for_each_subset(
    elements: &[Element],
    k: usize,
    f: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    fn rec(
        elements: &[Element],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        common: Vec<PathId>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..elements.len() {
            let ps = elements[i].paths();
            let next: Vec<PathId> = if cur.is_empty() {
                ps
            } else {
                common.iter().copied().filter(|p| ps.contains(p)).collect()
            };
            if next.is_empty() {
                continue;
            }
            cur.push(i);
            if rec(elements, k, i + 1, cur, next, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(elements, k, 0, &mut Vec::new(), Vec::new(), f)
}

fn try_removal(config: &ExperimentConfig, check: &dyn BehaviorCheck, max_subset: usize) -> Option<ExperimentConfig> {
    for k in 1..=max_subset.min(config.len()) {
        let mut found = None;
        for_each_subset(&config.elements, k, &mut |idx| {
            let cand = without(config, idx);
            if check.holds(&cand) {
                found = Some(cand);
                true
            } else {
                false
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn try_substitution(config: &ExperimentConfig, check: &dyn BehaviorCheck) -> Option<ExperimentConfig> {
    for (i, e) in config.elements.iter().enumerate() {
        if matches!(e, Element::Reflection(_)) {
            continue;
        }
        for p in e.paths() {
            let mut cand = config.clone();
            cand.elements[i] = Element::Reflection(p);
            if check.holds(&cand) {
                return Some(cand);
            }
        }
    }
    None
}

fn try_rewire(config: &ExperimentConfig, check: &dyn BehaviorCheck) -> Option<ExperimentConfig> {
    for (i, e) in config.elements.iter().enumerate() {
        let (p, q) = match e {
            Element::BS(p, q) | Element::PBS(p, q) | Element::LI(p, q) => (*p, *q),
            _ => continue,
        };
        let swap = |x: PathId| {
            if x == p {
                q
            } else if x == q {
                p
            } else {
                x
            }
        };
        let mut elements: Vec<Element> = config.elements[..i].to_vec();
        elements.extend(config.elements[i + 1..].iter().map(|e| e.map_paths(&swap)));
        let cand = ExperimentConfig::new(elements);
        if check.holds(&cand) {
            return Some(cand);
        }
    }
    None
}

/// Repeats removal, mirror substitution and rewiring until none applies.
/// The result is never longer than the input and satisfies `check`.
pub fn simplify(
    config: &ExperimentConfig,
    check: &dyn BehaviorCheck,
    opts: SimplifyOptions,
) -> Result<ExperimentConfig> {
    if !check.holds(config) {
        return Err(Error::InconsistentBehaviorCheck);
    }
    let mut cur = config.clone();
    loop {
        if let Some(c) = try_removal(&cur, check, opts.max_subset) {
            cur = c;
            continue;
        }
        if let Some(c) = try_substitution(&cur, check) {
            cur = c;
            continue;
        }
        if let Some(c) = try_rewire(&cur, check) {
            cur = c;
            continue;
        }
        return Ok(cur);
    }
}
