//! Single-photon basis maps and their cycles.

use num_complex::Complex64;
use serde::Serialize;

use crate::elements::Simulator;
use crate::error::{Error, Result};
use crate::mode::{path, ModeLabel, PathId, Polarization};
use crate::setup::ExperimentConfig;
use crate::state::QuantumState;

/// Allowed deviation of a mapped amplitude's modulus from 1, and the largest
/// off-target norm fraction still counted as a clean image.
pub const IMAGE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    pub paths: Vec<PathId>,
    pub oam_min: i32,
    pub oam_max: i32,
    pub pols: Vec<Polarization>,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec {
            paths: vec![path('a')],
            oam_min: -10,
            oam_max: 10,
            pols: vec![Polarization::H, Polarization::V],
        }
    }
}

impl BasisSpec {
    /// All basis states in ascending order.
    pub fn states(&self) -> Vec<ModeLabel> {
        let mut v = Vec::new();
        for &p in &self.paths {
            for l in self.oam_min..=self.oam_max {
                for &pol in &self.pols {
                    v.push(ModeLabel::new(p, l, pol));
                }
            }
        }
        v.sort();
        v
    }

    pub fn contains(&self, m: &ModeLabel) -> bool {
        self.paths.contains(&m.path)
            && (self.oam_min..=self.oam_max).contains(&m.oam)
            && self.pols.contains(&m.pol)
    }
}

/// Each basis state with its clean image, if it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMap {
    pub entries: Vec<(ModeLabel, Option<(ModeLabel, Complex64)>)>,
}

impl BasisMap {
    pub fn image(&self, m: &ModeLabel) -> Option<(ModeLabel, Complex64)> {
        self.entries
            .binary_search_by(|(k, _)| k.cmp(m))
            .ok()
            .and_then(|i| self.entries[i].1)
    }
}

/// Returns the single basis state `out` is proportional to, with its amplitude.
fn clean_image(out: &QuantumState, basis: &BasisSpec) -> Option<(ModeLabel, Complex64)> {
    let (term, amp) = out.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    if term.photon_count() != 1 {
        return None;
    }
    let m = term.modes()[0];
    let total = out.norm();
    let off = (total * total - amp.norm_sqr()).max(0.0).sqrt();
    let ok = basis.contains(&m)
        && (amp.norm() - 1.0).abs() <= IMAGE_TOL
        && off <= IMAGE_TOL * total;
    ok.then_some((m, *amp))
}

/// Sends every basis state through the setup. States that run past the OAM
/// cutoff are left without an image; other errors abort.
pub fn transform_basis(sim: &Simulator, config: &ExperimentConfig, basis: &BasisSpec) -> Result<BasisMap> {
    let mut entries = Vec::new();
    for m in basis.states() {
        let image = match sim.apply_setup(config, &QuantumState::single(m)) {
            Ok(out) => clean_image(&out, basis),
            Err(Error::Element { source, .. }) if matches!(*source, Error::OamCutoff { .. }) => None,
            Err(e) => return Err(e),
        };
        entries.push((m, image));
    }
    Ok(BasisMap { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult {
    pub length: usize,
    #[serde(serialize_with = "ser_modes")]
    pub states: Vec<ModeLabel>,
    /// `phases[k]` is the amplitude picked up going from `states[k]` to the next.
    #[serde(serialize_with = "ser_phases")]
    pub phases: Vec<Complex64>,
}

fn ser_modes<S: serde::Serializer>(v: &[ModeLabel], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|m| m.to_short()))
}

fn ser_phases<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| [c.re, c.im]))
}

impl CycleResult {
    /// Position of `m` in the cycle.
    pub fn position(&self, m: &ModeLabel) -> Option<usize> {
        self.states.iter().position(|s| s == m)
    }

    pub fn rotated_to(&self, start: usize) -> CycleResult {
        let mut states = self.states.clone();
        let mut phases = self.phases.clone();
        states.rotate_left(start);
        phases.rotate_left(start);
        CycleResult {
            length: self.length,
            states,
            phases,
        }
    }
}

/// Every cycle of the map, each rotated to start at its smallest state, sorted
/// by length (longest first) and then by starting state.
pub fn all_cycles(map: &BasisMap) -> Vec<CycleResult> {
    let n = map.entries.len();
    let index = |m: &ModeLabel| map.entries.binary_search_by(|(k, _)| k.cmp(m)).ok();
    let next: Vec<Option<usize>> = map
        .entries
        .iter()
        .map(|(_, im)| im.and_then(|(m, _)| index(&m)))
        .collect();
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut mark = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if mark[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            if mark[i] == 2 {
                break;
            }
            if mark[i] == 1 {
                let from = walk.iter().position(|&w| w == i).unwrap();
                let members: Vec<usize> = walk[from..].to_vec();
                let states = members.iter().map(|&k| map.entries[k].0).collect();
                let phases = members
                    .iter()
                    .map(|&k| map.entries[k].1.unwrap().1)
                    .collect();
                let c = CycleResult {
                    length: members.len(),
                    states,
                    phases,
                };
                let min = (0..c.length).min_by_key(|&k| c.states[k]).unwrap();
                cycles.push(c.rotated_to(min));
                break;
            }
            mark[i] = 1;
            walk.push(i);
            cur = next[i];
        }
        for w in walk {
            mark[w] = 2;
        }
    }
    cycles.sort_by(|a, b| b.length.cmp(&a.length).then(a.states[0].cmp(&b.states[0])));
    cycles
}

/// The longest cycle; ties go to the cycle with the smallest starting state.
pub fn largest_cycle(map: &BasisMap) -> Option<CycleResult> {
    all_cycles(map).into_iter().next()
}

pub fn find_largest_cycle(
    sim: &Simulator,
    config: &ExperimentConfig,
    basis: &BasisSpec,
) -> Result<Option<CycleResult>> {
    Ok(largest_cycle(&transform_basis(sim, config, basis)?))
}

/// How many of path, OAM and polarization change somewhere along the cycle.
pub fn coupled_dofs(c: &CycleResult) -> usize {
    let first = c.states[0];
    let path_varies = c.states.iter().any(|m| m.path != first.path);
    let oam_varies = c.states.iter().any(|m| m.oam != first.oam);
    let pol_varies = c.states.iter().any(|m| m.pol != first.pol);
    [path_varies, oam_varies, pol_varies]
        .iter()
        .filter(|x| **x)
        .count()
}
