//! The golden manifest of known setups and their expected outputs.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::cycle::BasisSpec;
use crate::detect::Trigger;
use crate::dsl::parse_setup;
use crate::elements::BsConvention;
use crate::error::{Error, Result};
use crate::mode::{ModeLabel, PathId, Polarization};
use crate::setup::ExperimentConfig;
use crate::state::{PhotonTerm, QuantumState};

const BUILTIN: &str = include_str!("../data/golden.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    #[serde(default)]
    srv_convention: Option<String>,
    #[serde(default)]
    srv: Vec<RawSrv>,
    #[serde(default)]
    cycle: Vec<RawCycle>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSrv {
    label: String,
    dc: u32,
    setup: Vec<String>,
    trigger: Vec<i32>,
    srv: [usize; 3],
    state: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCycle {
    label: String,
    length: usize,
    setup: Vec<String>,
    paths: Vec<char>,
    pols: Vec<String>,
    cycle: Vec<String>,
}

/// A three-party state as printed: coefficient and OAM of each party.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedState {
    pub terms: Vec<(Complex64, [i32; 3])>,
}

impl ExpectedState {
    /// Parses sums like `-I*FF2[-1]*FF3[0]*FF4[1] + FF2[0] FF3[0] FF4[0]`.
    /// Parentheses are ignored; `I` is the imaginary unit.
    pub fn parse(s: &str) -> Result<ExpectedState> {
        let bad = |msg: String| Error::InvalidParameter(format!("state `{s}`: {msg}"));
        let cleaned: String = s.chars().filter(|c| *c != '(' && *c != ')').collect();
        let chars: Vec<char> = cleaned.chars().collect();
        let mut terms = Vec::new();
        let mut coef = Complex64::new(1.0, 0.0);
        let mut party: [Option<i32>; 3] = [None; 3];
        let mut seen_factor = false;
        let mut i = 0;

        let mut finish = |coef: Complex64, party: [Option<i32>; 3]| -> Result<()> {
            match party {
                [Some(x), Some(y), Some(z)] => {
                    terms.push((coef, [x, y, z]));
                    Ok(())
                }
                _ => Err(bad("term does not name all three parties".into())),
            }
        };

        while i < chars.len() {
            let c = chars[i];
            match c {
                ' ' | '*' => i += 1,
                '+' | '-' => {
                    if seen_factor {
                        finish(coef, party)?;
                        coef = Complex64::new(1.0, 0.0);
                        party = [None; 3];
                        seen_factor = false;
                    }
                    if c == '-' {
                        coef = -coef;
                    }
                    i += 1;
                }
                'I' => {
                    coef *= Complex64::new(0.0, 1.0);
                    i += 1;
                }
                'F' => {
                    let rest: String = chars[i..].iter().collect();
                    let open = rest.find('[').ok_or_else(|| bad("missing `[`".into()))?;
                    let close = rest.find(']').ok_or_else(|| bad("missing `]`".into()))?;
                    let k: usize = match &rest[..open] {
                        "FF2" => 0,
                        "FF3" => 1,
                        "FF4" => 2,
                        other => return Err(bad(format!("unknown symbol `{other}`"))),
                    };
                    let l: i32 = rest[open + 1..close]
                        .parse()
                        .map_err(|_| bad("bad OAM value".into()))?;
                    if party[k].is_some() {
                        return Err(bad("party repeated within a term".into()));
                    }
                    party[k] = Some(l);
                    seen_factor = true;
                    i += rest[..=close].chars().count();
                }
                d if d.is_ascii_digit() => {
                    let mut j = i;
                    while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                        j += 1;
                    }
                    let num: String = chars[i..j].iter().collect();
                    coef *= num.parse::<f64>().map_err(|_| bad(format!("bad number `{num}`")))?;
                    i = j;
                }
                other => return Err(bad(format!("unexpected `{other}`"))),
            }
        }
        if !seen_factor {
            return Err(bad("empty or dangling term".into()));
        }
        finish(coef, party)?;
        Ok(ExpectedState { terms })
    }

    /// The state with party `k` in `parties[k]`, all photons H.
    pub fn to_state(&self, parties: [PathId; 3]) -> QuantumState {
        QuantumState::from_terms(self.terms.iter().map(|(c, l)| {
            (
                PhotonTerm::new((0..3).map(|k| ModeLabel::h(parties[k], l[k]))),
                *c,
            )
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrvCase {
    pub row: usize,
    pub label: String,
    pub dc: u32,
    pub setup: ExperimentConfig,
    pub setup_text: Vec<String>,
    pub trigger: Trigger,
    pub srv: [usize; 3],
    pub state: ExpectedState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleEntry {
    State(ModeLabel),
    /// States left out of the listing.
    Elision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCase {
    pub row: usize,
    pub label: String,
    pub length: usize,
    pub setup: ExperimentConfig,
    pub setup_text: Vec<String>,
    pub basis: BasisSpec,
    pub listed: Vec<CycleEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenManifest {
    pub srv_convention: BsConvention,
    pub srv: Vec<SrvCase>,
    pub cycle: Vec<CycleCase>,
}

impl GoldenManifest {
    /// The manifest shipped with the crate.
    pub fn builtin() -> GoldenManifest {
        GoldenManifest::parse(BUILTIN).expect("bundled manifest is valid")
    }

    pub fn load(path: &Path) -> Result<GoldenManifest> {
        GoldenManifest::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<GoldenManifest> {
        let raw: RawManifest = toml::from_str(text).map_err(|e| Error::Manifest {
            row: 0,
            label: String::new(),
            message: e.to_string(),
        })?;
        let srv_convention = match raw.srv_convention {
            Some(c) => c.parse().map_err(|e: Error| Error::Manifest {
                row: 0,
                label: "srv_convention".into(),
                message: e.to_string(),
            })?,
            None => BsConvention::default(),
        };

        let mut srv = Vec::new();
        for (i, r) in raw.srv.into_iter().enumerate() {
            let row = i + 1;
            let err = |message: String| Error::Manifest {
                row,
                label: r.label.clone(),
                message,
            };
            if r.dc == 0 {
                return Err(err("dc must be positive".into()));
            }
            if r.trigger.is_empty() {
                return Err(err("empty trigger".into()));
            }
            let setup = parse_setup(&r.setup.join("\n")).map_err(|e| err(e.to_string()))?;
            let state = ExpectedState::parse(&r.state).map_err(|e| err(e.to_string()))?;
            srv.push(SrvCase {
                row,
                dc: r.dc,
                setup,
                trigger: Trigger::uniform(&r.trigger),
                srv: r.srv,
                state,
                label: r.label,
                setup_text: r.setup,
            });
        }

        let mut cycle = Vec::new();
        for (i, r) in raw.cycle.into_iter().enumerate() {
            let row = i + 1;
            let err = |message: String| Error::Manifest {
                row,
                label: r.label.clone(),
                message,
            };
            let setup = parse_setup(&r.setup.join("\n")).map_err(|e| err(e.to_string()))?;
            let paths = r
                .paths
                .iter()
                .map(|c| PathId::new(*c))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| err(e.to_string()))?;
            let pols = r
                .pols
                .iter()
                .map(|p| p.parse::<Polarization>())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| err(e.to_string()))?;
            let listed = r
                .cycle
                .iter()
                .map(|s| {
                    if s.trim() == "..." {
                        Ok(CycleEntry::Elision)
                    } else {
                        ModeLabel::parse_short(s).map(CycleEntry::State)
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| err(e.to_string()))?;
            if r.length == 0 {
                return Err(err("length must be positive".into()));
            }
            cycle.push(CycleCase {
                row,
                length: r.length,
                setup,
                basis: BasisSpec {
                    paths,
                    pols,
                    ..BasisSpec::default()
                },
                listed,
                label: r.label,
                setup_text: r.setup,
            });
        }
        Ok(GoldenManifest {
            srv_convention,
            srv,
            cycle,
        })
    }
}
