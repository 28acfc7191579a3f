//! Substitution rules for each optical element.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use smallvec::smallvec;

use crate::error::{Error, Result};
use crate::mode::{ModeLabel, PathId, Polarization};
use crate::setup::{Element, ExperimentConfig};
use crate::state::{ModeImage, QuantumState};

pub const DEFAULT_L_MAX: i32 = 36;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Phase picked up on the reflected arm of a non-polarizing beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BsConvention {
    /// The reflected arm behaves like a mirror: `-i` for H, `+i` for V.
    #[default]
    Mirror,
    /// `+i` on the reflected arm for both polarizations.
    Symmetric,
}

impl std::str::FromStr for BsConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(BsConvention::Mirror),
            "symmetric" => Ok(BsConvention::Symmetric),
            other => Err(Error::InvalidParameter(format!(
                "unknown beam splitter convention `{other}` (mirror|symmetric)"
            ))),
        }
    }
}

impl std::fmt::Display for BsConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BsConvention::Mirror => "mirror",
            BsConvention::Symmetric => "symmetric",
        })
    }
}

/// Applies elements to states under a given OAM cutoff and BS convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulator {
    pub l_max: i32,
    pub bs: BsConvention,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator {
            l_max: DEFAULT_L_MAX,
            bs: BsConvention::default(),
        }
    }
}

fn reflect_mode(m: &ModeLabel) -> (ModeLabel, Complex64) {
    let phase = match m.pol {
        Polarization::H => -I,
        Polarization::V => I,
    };
    (ModeLabel { oam: -m.oam, ..*m }, phase)
}

fn other_path(p: PathId, a: PathId, b: PathId) -> PathId {
    if p == a {
        b
    } else {
        a
    }
}

fn distinct(name: &str, p: PathId, q: PathId) -> Result<()> {
    if p == q {
        Err(Error::InvalidWiring(format!("{name} needs two distinct paths, got {p},{q}")))
    } else {
        Ok(())
    }
}

impl Simulator {
    pub fn with_convention(bs: BsConvention) -> Self {
        Simulator {
            bs,
            ..Simulator::default()
        }
    }

    fn check_cutoff(&self, s: &QuantumState, paths: &[PathId]) -> Result<()> {
        for m in s.modes() {
            if paths.contains(&m.path) && m.oam.abs() > self.l_max {
                return Err(Error::OamCutoff {
                    path: m.path,
                    oam: m.oam,
                    l_max: self.l_max,
                });
            }
        }
        Ok(())
    }

    pub fn reflection(&self, s: &QuantumState, p: PathId) -> QuantumState {
        s.substitute(|m| {
            (m.path == p).then(|| {
                let (r, c) = reflect_mode(m);
                smallvec![(r, c)]
            })
        })
    }

    pub fn bs(&self, s: &QuantumState, p: PathId, q: PathId) -> Result<QuantumState> {
        distinct("BS", p, q)?;
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let bs = self.bs;
        Ok(s.substitute(|m| {
            if m.path != p && m.path != q {
                return None;
            }
            let through = ModeLabel {
                path: other_path(m.path, p, q),
                ..*m
            };
            let (r, c) = match bs {
                BsConvention::Mirror => reflect_mode(m),
                BsConvention::Symmetric => (ModeLabel { oam: -m.oam, ..*m }, I),
            };
            Some(smallvec![(through, h), (r, c * h)])
        }))
    }

    pub fn pbs(&self, s: &QuantumState, p: PathId, q: PathId) -> Result<QuantumState> {
        distinct("PBS", p, q)?;
        Ok(s.substitute(|m| {
            if m.path != p && m.path != q {
                return None;
            }
            Some(match m.pol {
                Polarization::H => smallvec![(
                    ModeLabel {
                        path: other_path(m.path, p, q),
                        ..*m
                    },
                    ONE
                )],
                Polarization::V => smallvec![(ModeLabel { oam: -m.oam, ..*m }, I)],
            })
        }))
    }

    pub fn hwp(&self, s: &QuantumState, p: PathId) -> QuantumState {
        s.substitute(|m| {
            (m.path == p).then(|| {
                let sign = match m.pol {
                    Polarization::H => ONE,
                    Polarization::V => -ONE,
                };
                smallvec![(
                    ModeLabel {
                        pol: m.pol.flip(),
                        ..*m
                    },
                    sign
                )]
            })
        })
    }

    pub fn holo(&self, s: &QuantumState, p: PathId, n: i32) -> Result<QuantumState> {
        let out = s.substitute(|m| {
            (m.path == p).then(|| smallvec![(ModeLabel { oam: m.oam + n, ..*m }, ONE)])
        });
        self.check_cutoff(&out, &[p])?;
        Ok(out)
    }

    /// Non-unitary: sends `ℓ` to `(ℓ + ℓ+n)/√2`.
    pub fn holo_sp(&self, s: &QuantumState, p: PathId, n: i32) -> Result<QuantumState> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let out = s.substitute(|m| {
            (m.path == p).then(|| -> ModeImage {
                smallvec![(*m, h), (ModeLabel { oam: m.oam + n, ..*m }, h)]
            })
        });
        self.check_cutoff(&out, &[p])?;
        Ok(out)
    }

    /// Dove prism: phase `exp(iπℓ/n)` followed by a reflection.
    pub fn dp(&self, s: &QuantumState, p: PathId, n: i32) -> Result<QuantumState> {
        if n <= 0 {
            return Err(Error::InvalidParameter(format!(
                "DP parameter must be positive, got {n}"
            )));
        }
        Ok(s.substitute(|m| {
            (m.path == p).then(|| {
                let phase = Complex64::from_polar(1.0, PI * m.oam as f64 / n as f64);
                let (r, c) = reflect_mode(m);
                smallvec![(r, c * phase)]
            })
        }))
    }

    /// OAM parity sorter built from two beam splitters, mirrors and a dove prism.
    pub fn li(&self, s: &QuantumState, p: PathId, q: PathId) -> Result<QuantumState> {
        distinct("LI", p, q)?;
        let s = self.bs(s, p, q)?;
        let s = self.reflection(&s, p);
        let s = self.dp(&s, p, 1)?;
        let s = self.reflection(&s, q);
        let s = self.reflection(&s, q);
        self.bs(&s, p, q)
    }

    pub fn apply(&self, e: &Element, s: &QuantumState) -> Result<QuantumState> {
        match e {
            Element::Reflection(p) => Ok(self.reflection(s, *p)),
            Element::BS(p, q) => self.bs(s, *p, *q),
            Element::PBS(p, q) => self.pbs(s, *p, *q),
            Element::HWP(p) => Ok(self.hwp(s, *p)),
            Element::OAMHolo(p, n) => self.holo(s, *p, *n),
            Element::OAMHoloSP(p, n) => self.holo_sp(s, *p, *n),
            Element::DP(p, n) => self.dp(s, *p, *n),
            Element::LI(p, q) => self.li(s, *p, *q),
            Element::Composite(c) => {
                let mut s = s.clone();
                for e in &c.elements {
                    s = self.apply(e, &s)?;
                }
                Ok(s)
            }
        }
    }

    /// Applies every element in order. Errors name the failing element.
    pub fn apply_setup(&self, config: &ExperimentConfig, s: &QuantumState) -> Result<QuantumState> {
        let mut s = s.clone();
        for (index, e) in config.elements.iter().enumerate() {
            s = self.apply(e, &s).map_err(|source| Error::Element {
                index,
                element: e.to_string(),
                source: Box::new(source),
            })?;
        }
        Ok(s)
    }
}
