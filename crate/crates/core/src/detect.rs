//! Coincidence post-selection and heralding (trigger) projection.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mode::{PathId, Polarization};
use crate::state::{PhotonTerm, QuantumState};

/// Keeps terms with exactly one photon in each of `paths`. Photons in other
/// paths are not constrained.
pub fn post_select_coincidence(state: &QuantumState, paths: &[PathId]) -> QuantumState {
    state.filter(|t| paths.iter().all(|p| t.photons_in(*p) == 1))
}

/// A superposition of OAM values that the trigger detector projects onto.
#[derive(Debug, Clone, PartialEq)]
pub struct Trigger {
    pub components: Vec<(i32, Complex64)>,
    pub pol: Polarization,
}

impl Trigger {
    /// Equal-weight, unnormalized superposition of the given OAM values.
    pub fn uniform(oams: &[i32]) -> Self {
        Trigger {
            components: oams
                .iter()
                .map(|&l| (l, Complex64::new(1.0, 0.0)))
                .collect(),
            pol: Polarization::H,
        }
    }

    pub fn oams(&self) -> Vec<i32> {
        self.components.iter().map(|(l, _)| *l).collect()
    }

    fn coefficient(&self, oam: i32, pol: Polarization) -> Complex64 {
        if pol != self.pol {
            return Complex64::default();
        }
        self.components
            .iter()
            .filter(|(l, _)| *l == oam)
            .map(|(_, c)| *c)
            .sum()
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, c)) in self.components.iter().enumerate() {
            let one = Complex64::new(1.0, 0.0);
            if *c == one {
                if i > 0 {
                    f.write_str("+")?;
                }
            } else if *c == -one {
                f.write_str("-")?;
            } else {
                if i > 0 {
                    f.write_str("+")?;
                }
                write!(f, "({},{})", c.re, c.im)?;
            }
            write!(f, "|{l}>")?;
        }
        Ok(())
    }
}

impl FromStr for Trigger {
    type Err = Error;

    /// Accepts `|0>+|1>`, `-|2>`, `(0.5,0)|1>` or a plain list `0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidParameter(format!("malformed trigger `{s}`"));
        if s.is_empty() {
            return Err(bad());
        }
        if !s.contains('|') {
            let oams = s
                .split(',')
                .map(|x| x.parse::<i32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Trigger::uniform(&oams));
        }
        let mut components = Vec::new();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let bar = rest.find('|').ok_or_else(bad)?;
            let close = rest.find('>').ok_or_else(bad)?;
            if close < bar {
                return Err(bad());
            }
            let coef = match &rest[..bar] {
                "" | "+" => Complex64::new(1.0, 0.0),
                "-" => Complex64::new(-1.0, 0.0),
                other => {
                    let inner = other
                        .trim_start_matches('+')
                        .strip_prefix('(')
                        .and_then(|x| x.strip_suffix(')'))
                        .ok_or_else(bad)?;
                    let (re, im) = inner.split_once(',').ok_or_else(bad)?;
                    Complex64::new(
                        re.parse().map_err(|_| bad())?,
                        im.parse().map_err(|_| bad())?,
                    )
                }
            };
            let l = rest[bar + 1..close].parse::<i32>().map_err(|_| bad())?;
            components.push((l, coef));
            rest = &rest[close + 1..];
        }
        Ok(Trigger {
            components,
            pol: Polarization::H,
        })
    }
}

/// Contracts the single photon in path `p` against the trigger, leaving the
/// state of the other photons. Every term must hold exactly one photon in `p`.
pub fn project_trigger(state: &QuantumState, p: PathId, trigger: &Trigger) -> Result<QuantumState> {
    let mut terms: Vec<(PhotonTerm, Complex64)> = Vec::new();
    for (t, a) in state.iter() {
        let mut in_p = t.in_path(p);
        let m = match (in_p.next(), in_p.next()) {
            (Some(m), None) => *m,
            _ => {
                return Err(Error::MissingTriggerPhoton {
                    path: p,
                    term: t.to_string(),
                })
            }
        };
        let c = trigger.coefficient(m.oam, m.pol);
        if c != Complex64::default() {
            terms.push((t.without_path(p), a * c.conj()));
        }
    }
    Ok(QuantumState::from_terms(terms))
}
