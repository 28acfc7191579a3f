//! Down-conversion sources and the heralded three-photon pipeline.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::detect::{post_select_coincidence, project_trigger, Trigger};
use crate::elements::Simulator;
use crate::error::{Error, Result};
use crate::mode::{path, ModeLabel, PathId, Polarization};
use crate::setup::ExperimentConfig;
use crate::srv::{ghz_dimension, schmidt_rank_vector, to_tensor, SchmidtRankVector, RANK_TOL};
use crate::state::{PhotonTerm, QuantumState};

/// Two pair-emitting crystals, each producing `Σ x[ℓ] y[-ℓ]` for `|ℓ| <= dc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcSpec {
    pub dc: u32,
    pub pairs: Vec<(PathId, PathId)>,
}

impl SpdcSpec {
    pub fn new(dc: u32) -> Self {
        SpdcSpec {
            dc,
            pairs: vec![(path('a'), path('b')), (path('c'), path('d'))],
        }
    }
}

/// `(Σ_pairs Σ_ℓ x[ℓ,H] y[-ℓ,H])²`, unnormalized. Terms where one crystal
/// emits twice are kept; coincidence post-selection removes them later.
pub fn build_double_spdc(spec: &SpdcSpec) -> Result<QuantumState> {
    if spec.dc == 0 {
        return Err(Error::InvalidParameter("dc must be at least 1".into()));
    }
    let dc = spec.dc as i32;
    let one = Complex64::new(1.0, 0.0);
    let mut single = Vec::new();
    for &(x, y) in &spec.pairs {
        for l in -dc..=dc {
            single.push([ModeLabel::h(x, l), ModeLabel::h(y, -l)]);
        }
    }
    let mut terms = Vec::with_capacity(single.len() * single.len());
    for p in &single {
        for q in &single {
            terms.push((PhotonTerm::new(p.iter().chain(q.iter()).copied()), one));
        }
    }
    Ok(QuantumState::from_terms(terms))
}

/// Source, detectors and trigger arm of a heralded tripartite experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SrvExperiment {
    pub sim: Simulator,
    pub pairs: Vec<(PathId, PathId)>,
    pub trigger_path: PathId,
    pub parties: [PathId; 3],
}

impl Default for SrvExperiment {
    fn default() -> Self {
        SrvExperiment {
            sim: Simulator::default(),
            pairs: vec![(path('a'), path('b')), (path('c'), path('d'))],
            trigger_path: path('a'),
            parties: [path('b'), path('c'), path('d')],
        }
    }
}

impl SrvExperiment {
    pub fn with_sim(sim: Simulator) -> Self {
        SrvExperiment {
            sim,
            ..Self::default()
        }
    }

    pub fn detectors(&self) -> Vec<PathId> {
        let mut v = vec![self.trigger_path];
        v.extend(self.parties);
        v
    }

    pub fn source(&self, dc: u32) -> Result<QuantumState> {
        build_double_spdc(&SpdcSpec {
            dc,
            pairs: self.pairs.clone(),
        })
    }

    /// Four-fold coincidences after the setup, before triggering.
    pub fn post_selected(&self, config: &ExperimentConfig, dc: u32) -> Result<QuantumState> {
        let out = self.sim.apply_setup(config, &self.source(dc)?)?;
        Ok(post_select_coincidence(&out, &self.detectors()))
    }

    pub fn post_selected_from(&self, config: &ExperimentConfig, source: &QuantumState) -> Result<QuantumState> {
        let out = self.sim.apply_setup(config, source)?;
        Ok(post_select_coincidence(&out, &self.detectors()))
    }

    pub fn herald(&self, post_selected: &QuantumState, trigger: &Trigger) -> Result<QuantumState> {
        project_trigger(post_selected, self.trigger_path, trigger)
    }

    /// The unnormalized three-photon state left after triggering.
    pub fn heralded(&self, config: &ExperimentConfig, dc: u32, trigger: &Trigger) -> Result<QuantumState> {
        self.herald(&self.post_selected(config, dc)?, trigger)
    }

    /// OAM values seen in the trigger arm, with H polarization, sorted.
    pub fn trigger_marginal(&self, post_selected: &QuantumState) -> Vec<i32> {
        let mut v: Vec<i32> = post_selected
            .modes()
            .filter(|m| m.path == self.trigger_path && m.pol == Polarization::H)
            .map(|m| m.oam)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcPoint {
    pub dc: u32,
    /// `None` when the heralded state is empty or not a three-party state.
    pub srv: Option<SchmidtRankVector>,
    pub ghz: Option<usize>,
    pub terms: usize,
    /// `1 - |<ψ_from|ψ_dc>|` after normalization.
    pub distance_from_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcStabilityReport {
    pub points: Vec<DcPoint>,
    /// First DC whose sorted SRV or GHZ dimension differs from the first point.
    pub first_change: Option<u32>,
}

impl DcStabilityReport {
    pub fn stable(&self) -> bool {
        self.first_change.is_none()
    }
}

/// Re-runs the heralded pipeline for each DC in `dc_from..=dc_to`, in parallel.
pub fn verify_dc_stability(
    exp: &SrvExperiment,
    config: &ExperimentConfig,
    trigger: &Trigger,
    dc_from: u32,
    dc_to: u32,
) -> Result<DcStabilityReport> {
    if dc_from == 0 || dc_to < dc_from {
        return Err(Error::InvalidParameter(format!(
            "invalid DC range {dc_from}..={dc_to}"
        )));
    }
    let states: Vec<(u32, QuantumState)> = (dc_from..=dc_to)
        .into_par_iter()
        .map(|dc| Ok((dc, exp.heralded(config, dc, trigger)?)))
        .collect::<Result<_>>()?;
    let first = &states[0].1;
    let mut points = Vec::with_capacity(states.len());
    for (dc, s) in &states {
        let (srv, ghz) = match to_tensor(s, exp.parties) {
            Ok(t) if !s.is_empty() => (
                Some(schmidt_rank_vector(&t, RANK_TOL)),
                ghz_dimension(s, exp.parties, 1e-9)?,
            ),
            _ => (None, None),
        };
        points.push(DcPoint {
            dc: *dc,
            srv,
            ghz,
            terms: s.len(),
            distance_from_first: first.distance(s),
        });
    }
    let key = |p: &DcPoint| (p.srv.map(|s| s.sorted()), p.ghz);
    let first_change = points
        .iter()
        .find(|p| key(p) != key(&points[0]))
        .map(|p| p.dc);
    Ok(DcStabilityReport {
        points,
        first_change,
    })
}
