use std::sync::Arc;

use rand::Rng;

use crate::cycle::{coupled_dofs, CycleResult};
use crate::mode::path;
use crate::setup::{Composite, Element, ElementKind, ExperimentConfig};

/// A composite added by learning, with when and why it was admitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Learned {
    pub composite: Arc<Composite>,
    pub learned_at: u64,
    pub cycle_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Toolbox {
    pub primitives: Vec<ElementKind>,
    pub learned: Vec<Learned>,
    next_id: usize,
}

/// When a finding becomes a composite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnPolicy {
    pub min_cycle_length: usize,
    pub min_coupled_dofs: usize,
}

impl Default for LearnPolicy {
    fn default() -> Self {
        LearnPolicy {
            min_cycle_length: 3,
            min_coupled_dofs: 2,
        }
    }
}

impl LearnPolicy {
    pub fn admits(&self, cycle: &CycleResult) -> bool {
        cycle.length >= self.min_cycle_length || coupled_dofs(cycle) >= self.min_coupled_dofs
    }
}

impl Toolbox {
    pub fn new(primitives: Vec<ElementKind>) -> Self {
        Toolbox {
            primitives,
            learned: Vec::new(),
            next_id: 0,
        }
    }

    /// Beam splitters, mirrors, dove prisms, holograms (plain and superposing)
    /// and parity sorters.
    pub fn srv_default() -> Self {
        Toolbox::new(vec![
            ElementKind::BS,
            ElementKind::Reflection,
            ElementKind::DP,
            ElementKind::OAMHolo,
            ElementKind::OAMHoloSP,
            ElementKind::LI,
        ])
    }

    /// Beam splitters (plain and polarizing), dove prisms, mirrors,
    /// holograms and half-wave plates.
    pub fn cycle_default() -> Self {
        Toolbox::new(vec![
            ElementKind::BS,
            ElementKind::PBS,
            ElementKind::DP,
            ElementKind::Reflection,
            ElementKind::OAMHolo,
            ElementKind::HWP,
        ])
    }

    /// Number of choices the sampler picks from.
    pub fn choices(&self) -> usize {
        self.primitives.len() + self.learned.len()
    }

    /// Adds a composite directly, e.g. to seed the toolbox.
    pub fn inject(&mut self, name: &str, elements: Vec<Element>) -> Arc<Composite> {
        let c = Arc::new(Composite {
            name: name.to_string(),
            elements,
        });
        self.learned.push(Learned {
            composite: c.clone(),
            learned_at: 0,
            cycle_length: None,
        });
        c
    }

    /// Appends `config` as a new composite.
    pub fn learn(&mut self, config: &ExperimentConfig, iteration: u64, cycle: &CycleResult) -> Arc<Composite> {
        self.next_id += 1;
        let c = Arc::new(Composite {
            name: format!("C{}_{}", self.next_id, cycle.length),
            elements: config.elements.clone(),
        });
        self.learned.push(Learned {
            composite: c.clone(),
            learned_at: iteration,
            cycle_length: Some(cycle.length),
        });
        c
    }

    /// Evicts each learned composite independently with probability `p`.
    /// Returns how many were removed.
    pub fn forget<R: Rng>(&mut self, rng: &mut R, p: f64) -> usize {
        let before = self.learned.len();
        self.learned.retain(|_| !rng.random_bool(p));
        before - self.learned.len()
    }
}

/// The OAM parity sorter written out as primitives on paths `a` and `b`.
pub fn parity_sorter_elements() -> Vec<Element> {
    let (a, b) = (path('a'), path('b'));
    vec![
        Element::BS(a, b),
        Element::Reflection(a),
        Element::DP(a, 1),
        Element::Reflection(b),
        Element::Reflection(b),
        Element::BS(a, b),
    ]
}
