//! Runs the golden manifest and compares against the expected outputs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cycle::{all_cycles, transform_basis, CycleResult};
use crate::elements::{BsConvention, Simulator};
use crate::error::Result;
use crate::manifest::{CycleCase, CycleEntry, GoldenManifest, SrvCase};
use crate::mode::ModeLabel;
use crate::spdc::SrvExperiment;
use crate::srv::{srv_of_state, SchmidtRankVector};

/// Per-amplitude tolerance when comparing normalized states.
pub const STATE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDiff {
    /// Party OAM triples printed but not produced.
    pub missing: Vec<[i32; 3]>,
    /// Produced but not printed.
    pub extra: Vec<[i32; 3]>,
    /// Present in both but with a different relative amplitude.
    pub amplitude: Vec<[i32; 3]>,
}

impl StateDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.amplitude.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrvCaseReport {
    pub row: usize,
    pub label: String,
    pub dc: u32,
    pub expected_srv: [usize; 3],
    /// In party order b, c, d.
    pub computed_srv: Option<SchmidtRankVector>,
    pub srv_match: bool,
    pub state_match: bool,
    pub diff: StateDiff,
    pub error: Option<String>,
}

fn triple(t: &crate::state::PhotonTerm, parties: [crate::mode::PathId; 3]) -> [i32; 3] {
    parties.map(|p| t.in_path(p).next().map_or(i32::MIN, |m| m.oam))
}

pub fn run_srv_case(case: &SrvCase, sim: Simulator) -> SrvCaseReport {
    let exp = SrvExperiment::with_sim(sim);
    let mut report = SrvCaseReport {
        row: case.row,
        label: case.label.clone(),
        dc: case.dc,
        expected_srv: case.srv,
        computed_srv: None,
        srv_match: false,
        state_match: false,
        diff: StateDiff {
            missing: vec![],
            extra: vec![],
            amplitude: vec![],
        },
        error: None,
    };
    let state = match exp.heralded(&case.setup, case.dc, &case.trigger) {
        Ok(s) => s,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    match srv_of_state(&state, exp.parties) {
        Ok(srv) => {
            let mut want = case.srv;
            want.sort_unstable_by(|a, b| b.cmp(a));
            report.srv_match = srv.sorted() == want;
            report.computed_srv = Some(srv);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    let expected = case.state.to_state(exp.parties);
    report.state_match = state.equiv(&expected, STATE_TOL);

    let (s, e) = (state.normalized(), expected.normalized());
    let ov = s.inner(&e);
    let phase = if ov.norm() > 1e-12 { ov / ov.norm() } else { 1.0.into() };
    for (t, a) in e.iter() {
        let got = s.amplitude(t);
        if got.norm() == 0.0 {
            report.diff.missing.push(triple(t, exp.parties));
        } else if (got * phase - a).norm() > STATE_TOL {
            report.diff.amplitude.push(triple(t, exp.parties));
        }
    }
    for (t, _) in s.iter() {
        if e.amplitude(t).norm() == 0.0 {
            report.diff.extra.push(triple(t, exp.parties));
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrvSuiteReport {
    pub convention: String,
    pub cases: Vec<SrvCaseReport>,
}

impl SrvSuiteReport {
    pub fn srv_agreement(&self) -> usize {
        self.cases.iter().filter(|c| c.srv_match).count()
    }

    pub fn state_agreement(&self) -> usize {
        self.cases.iter().filter(|c| c.state_match).count()
    }
}

pub fn run_srv_suite(manifest: &GoldenManifest, convention: BsConvention) -> SrvSuiteReport {
    let sim = Simulator::with_convention(convention);
    SrvSuiteReport {
        convention: convention.to_string(),
        cases: manifest.srv.iter().map(|c| run_srv_case(c, sim)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleCaseReport {
    pub row: usize,
    pub label: String,
    pub expected_length: usize,
    pub computed_length: Option<usize>,
    /// The computed cycle through the first listed state, rotated to start there.
    pub matched_cycle: Option<CycleResult>,
    /// The listed states occur on a longest cycle in the listed order.
    pub sequence_match: bool,
    /// Listed states that are not on that cycle, or out of order.
    #[serde(serialize_with = "ser_modes")]
    pub unmatched_listed: Vec<ModeLabel>,
    /// Cycle states the listing leaves out.
    #[serde(serialize_with = "ser_modes")]
    pub omitted: Vec<ModeLabel>,
    /// Another row with an identical setup.
    pub same_setup_as: Option<String>,
    pub error: Option<String>,
}

fn ser_modes<S: serde::Serializer>(v: &[ModeLabel], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|m| m.to_short()))
}

impl CycleCaseReport {
    pub fn length_match(&self) -> bool {
        self.computed_length == Some(self.expected_length)
    }

    pub fn passed(&self) -> bool {
        self.length_match() && self.sequence_match
    }
}

/// Checks `listed` against `cycle`: after rotating to the first listed state,
/// every listed state must appear at a strictly later position.
fn match_listing(cycle: &CycleResult, listed: &[ModeLabel]) -> (Vec<ModeLabel>, Vec<ModeLabel>) {
    let Some(start) = listed.first().and_then(|m| cycle.position(m)) else {
        return (listed.to_vec(), cycle.states.clone());
    };
    let rot = cycle.rotated_to(start);
    let mut unmatched = Vec::new();
    let mut used = vec![false; rot.length];
    let mut pos = 0;
    for m in listed {
        match rot.states.iter().skip(pos).position(|s| s == m) {
            Some(off) => {
                pos += off;
                used[pos] = true;
                pos += 1;
            }
            _ => unmatched.push(*m),
        }
    }
    let omitted = rot
        .states
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(s, _)| *s)
        .collect();
    (unmatched, omitted)
}

pub fn run_cycle_case(case: &CycleCase, sim: Simulator) -> CycleCaseReport {
    let mut report = CycleCaseReport {
        row: case.row,
        label: case.label.clone(),
        expected_length: case.length,
        computed_length: None,
        matched_cycle: None,
        sequence_match: false,
        unmatched_listed: vec![],
        omitted: vec![],
        same_setup_as: None,
        error: None,
    };
    let map = match transform_basis(&sim, &case.setup, &case.basis) {
        Ok(m) => m,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let cycles = all_cycles(&map);
    let Some(longest) = cycles.first() else {
        return report;
    };
    report.computed_length = Some(longest.length);
    let listed: Vec<ModeLabel> = case
        .listed
        .iter()
        .filter_map(|e| match e {
            CycleEntry::State(m) => Some(*m),
            CycleEntry::Elision => None,
        })
        .collect();
    // prefer a longest cycle through the first listed state
    let through_first = |c: &&CycleResult| listed.first().is_some_and(|m| c.position(m).is_some());
    let best = cycles
        .iter()
        .filter(|c| c.length == longest.length)
        .find(through_first)
        .or_else(|| cycles.iter().find(through_first));
    match best {
        Some(c) => {
            let (unmatched, omitted) = match_listing(c, &listed);
            report.sequence_match = c.length == longest.length && unmatched.is_empty();
            report.unmatched_listed = unmatched;
            report.omitted = omitted;
            report.matched_cycle = Some(c.rotated_to(c.position(&listed[0]).unwrap()));
        }
        None => report.unmatched_listed = listed,
    }
    report
}

pub fn run_cycle_suite(manifest: &GoldenManifest, sim: Simulator) -> Vec<CycleCaseReport> {
    let mut out: Vec<CycleCaseReport> = manifest.cycle.iter().map(|c| run_cycle_case(c, sim)).collect();
    for (i, a) in manifest.cycle.iter().enumerate() {
        if let Some(b) = manifest
            .cycle
            .iter()
            .find(|b| b.row != a.row && b.setup == a.setup && b.basis == a.basis)
        {
            out[i].same_setup_as = Some(b.label.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    /// The suite under the manifest's convention.
    pub srv: SrvSuiteReport,
    /// The same rows under the other convention.
    pub srv_alternate: SrvSuiteReport,
    pub cycles: Vec<CycleCaseReport>,
}

/// Fraction of state matches required for the SRV suite.
pub const STATE_AGREEMENT_MIN: f64 = 0.9;

impl ReproduceReport {
    pub fn srv_ok(&self) -> bool {
        self.srv.srv_agreement() == self.srv.cases.len()
            && self.srv.state_agreement() as f64 >= STATE_AGREEMENT_MIN * self.srv.cases.len() as f64
    }

    pub fn cycles_ok(&self) -> bool {
        self.cycles.iter().all(|c| c.passed())
    }

    pub fn passed(&self) -> bool {
        self.srv_ok() && self.cycles_ok()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let n = self.srv.cases.len();
        let _ = writeln!(
            out,
            "srv suite ({} BS rule): SRV {}/{}  state {}/{}",
            self.srv.convention,
            self.srv.srv_agreement(),
            n,
            self.srv.state_agreement(),
            n
        );
        let _ = writeln!(
            out,
            "srv suite ({} BS rule): SRV {}/{}  state {}/{}",
            self.srv_alternate.convention,
            self.srv_alternate.srv_agreement(),
            n,
            self.srv_alternate.state_agreement(),
            n
        );
        for (c, alt) in self.srv.cases.iter().zip(&self.srv_alternate.cases) {
            let got = c.computed_srv.map_or("-".into(), |s| s.to_string());
            let _ = writeln!(
                out,
                "  {} row {:>2} dc {} {:<10} got {:<10} srv {:<8} state {:<8} ({} rule: {})",
                if c.srv_match && c.state_match { "PASS" } else { "FAIL" },
                c.row,
                c.dc,
                c.label,
                got,
                if c.srv_match { "ok" } else { "MISMATCH" },
                if c.state_match { "ok" } else { "MISMATCH" },
                self.srv_alternate.convention,
                if alt.state_match { "ok" } else { "mismatch" },
            );
            if !c.diff.is_empty() {
                let _ = writeln!(
                    out,
                    "      missing {:?} extra {:?} amplitude {:?}",
                    c.diff.missing, c.diff.extra, c.diff.amplitude
                );
            }
            if let Some(e) = &c.error {
                let _ = writeln!(out, "      error: {e}");
            }
        }
        for c in &self.cycles {
            let _ = writeln!(
                out,
                "  {} cycle {:<45} length {} got {}  sequence {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.label,
                c.expected_length,
                c.computed_length.map_or("-".into(), |l| l.to_string()),
                if c.sequence_match { "ok" } else { "MISMATCH" }
            );
            if let Some(m) = &c.matched_cycle {
                let s: Vec<String> = m.states.iter().map(|s| s.to_short()).collect();
                let _ = writeln!(out, "      cycle: {}", s.join(" -> "));
            }
            if !c.unmatched_listed.is_empty() {
                let s: Vec<String> = c.unmatched_listed.iter().map(|s| s.to_short()).collect();
                let _ = writeln!(out, "      listed but not on cycle: {}", s.join(" "));
            }
            if !c.omitted.is_empty() {
                let s: Vec<String> = c.omitted.iter().map(|s| s.to_short()).collect();
                let _ = writeln!(out, "      on cycle but not listed: {}", s.join(" "));
            }
            if let Some(o) = &c.same_setup_as {
                let _ = writeln!(out, "      identical setup to `{o}`");
            }
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn reproduce(manifest: &GoldenManifest) -> Result<ReproduceReport> {
    let alt = match manifest.srv_convention {
        BsConvention::Mirror => BsConvention::Symmetric,
        BsConvention::Symmetric => BsConvention::Mirror,
    };
    Ok(ReproduceReport {
        srv: run_srv_suite(manifest, manifest.srv_convention),
        srv_alternate: run_srv_suite(manifest, alt),
        cycles: run_cycle_suite(manifest, Simulator::default()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::path;
    use num_complex::Complex64;

    fn cyc(states: &[ModeLabel]) -> CycleResult {
        CycleResult {
            length: states.len(),
            states: states.to_vec(),
            phases: vec![Complex64::new(1.0, 0.0); states.len()],
        }
    }

    #[test]
    fn listing_match_allows_gaps_in_order() {
        let m: Vec<ModeLabel> = (0..6).map(|l| ModeLabel::h(path('a'), l)).collect();
        let c = cyc(&m);
        let (un, om) = match_listing(&c, &[m[2], m[3], m[5], m[0]]);
        assert!(un.is_empty());
        assert_eq!(om, vec![m[4], m[1]]);
        let (un, _) = match_listing(&c, &[m[2], m[4], m[3]]);
        assert_eq!(un, vec![m[3]]);
        let (un, _) = match_listing(&c, &[ModeLabel::v(path('a'), 0)]);
        assert_eq!(un.len(), 1);
    }
}
