use rand::seq::IndexedRandom;
use rand::Rng;

use crate::mode::{path, PathId};
use crate::setup::{Element, ElementKind, ExperimentConfig};

use super::toolbox::Toolbox;

/// Where and how large random setups may be.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub paths: Vec<PathId>,
    pub max_elements: usize,
    /// Hologram shifts are drawn from `-max_shift..=max_shift` without zero.
    pub max_shift: i32,
    pub dp_values: Vec<i32>,
}

impl SearchSpace {
    pub fn srv_default() -> Self {
        SearchSpace {
            paths: "abcdef".chars().map(path).collect(),
            ..Self::base()
        }
    }

    pub fn cycle_default() -> Self {
        SearchSpace {
            paths: "abc".chars().map(path).collect(),
            ..Self::base()
        }
    }

    fn base() -> Self {
        SearchSpace {
            paths: Vec::new(),
            max_elements: 15,
            max_shift: 9,
            dp_values: vec![1, 2],
        }
    }

    /// Checks a primitive against the parameter ranges and path set.
    pub fn allows(&self, e: &Element) -> bool {
        if e.is_composite() {
            return true;
        }
        let paths_ok = e.paths().iter().all(|p| self.paths.contains(p));
        let param_ok = match e {
            Element::OAMHolo(_, n) | Element::OAMHoloSP(_, n) => *n != 0 && n.abs() <= self.max_shift,
            Element::DP(_, n) => self.dp_values.contains(n),
            _ => true,
        };
        paths_ok && param_ok
    }
}

fn random_param<R: Rng>(kind: ElementKind, space: &SearchSpace, rng: &mut R) -> i32 {
    match kind {
        ElementKind::OAMHolo | ElementKind::OAMHoloSP => {
            let n = rng.random_range(1..=space.max_shift);
            if rng.random_bool(0.5) {
                n
            } else {
                -n
            }
        }
        ElementKind::DP => *space.dp_values.choose(rng).unwrap(),
        _ => 0,
    }
}

/// Draws one element: kind uniform over primitives and learned composites,
/// paths uniform (ordered distinct pairs for two-path elements).
pub fn random_element<R: Rng>(toolbox: &Toolbox, space: &SearchSpace, rng: &mut R) -> Element {
    let k = rng.random_range(0..toolbox.choices());
    if k >= toolbox.primitives.len() {
        return Element::Composite(toolbox.learned[k - toolbox.primitives.len()].composite.clone());
    }
    let kind = toolbox.primitives[k];
    let n = space.paths.len();
    let p = rng.random_range(0..n);
    let mut paths = vec![space.paths[p]];
    if kind.path_count() == 2 {
        let mut q = rng.random_range(0..n - 1);
        if q >= p {
            q += 1;
        }
        paths.push(space.paths[q]);
    }
    Element::from_parts(kind, &paths, random_param(kind, space, rng))
}

/// A setup with `1..=max_elements` elements, length drawn uniformly.
pub fn random_config<R: Rng>(toolbox: &Toolbox, space: &SearchSpace, rng: &mut R) -> ExperimentConfig {
    assert!(toolbox.choices() > 0, "empty toolbox");
    assert!(space.paths.len() >= 2, "need at least two paths");
    let len = rng.random_range(1..=space.max_elements);
    ExperimentConfig::new((0..len).map(|_| random_element(toolbox, space, rng)).collect())
}
