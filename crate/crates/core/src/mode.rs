//! Mode labels: a photon in a given path, OAM value and polarization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spatial path, identified by a lowercase letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "char", into = "char")]
pub struct PathId(u8);

impl PathId {
    pub fn new(c: char) -> Result<Self> {
        if c.is_ascii_lowercase() {
            Ok(PathId(c as u8))
        } else {
            Err(Error::InvalidParameter(format!("invalid path label `{c}`")))
        }
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }

    /// Zero-based position in the alphabet (`a` is 0).
    pub fn index(self) -> usize {
        (self.0 - b'a') as usize
    }
}

impl TryFrom<char> for PathId {
    type Error = Error;
    fn try_from(c: char) -> Result<Self> {
        PathId::new(c)
    }
}

impl From<PathId> for char {
    fn from(p: PathId) -> char {
        p.as_char()
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Shorthand for building path ids in code and tests. Panics on a bad label.
pub fn path(c: char) -> PathId {
    PathId::new(c).expect("path label must be a lowercase ASCII letter")
}

/// The set of paths an experiment may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAlphabet {
    paths: Vec<PathId>,
}

impl PathAlphabet {
    /// Paths `a` through `last`.
    pub fn up_to(last: char) -> Result<Self> {
        let last = PathId::new(last)?;
        Ok(PathAlphabet {
            paths: (b'a'..=last.0).map(PathId).collect(),
        })
    }

    pub fn contains(&self, p: PathId) -> bool {
        self.paths.contains(&p)
    }

    pub fn paths(&self) -> &[PathId] {
        &self.paths
    }
}

impl Default for PathAlphabet {
    fn default() -> Self {
        PathAlphabet::up_to('f').unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flip(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

impl FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            other => Err(Error::InvalidParameter(format!(
                "invalid polarization `{other}`"
            ))),
        }
    }
}

/// One photonic mode. Ordering is by path, then OAM, then polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: PathId,
    pub oam: i32,
    pub pol: Polarization,
}

impl ModeLabel {
    pub fn new(path: PathId, oam: i32, pol: Polarization) -> Self {
        ModeLabel { path, oam, pol }
    }

    pub fn h(path: PathId, oam: i32) -> Self {
        ModeLabel::new(path, oam, Polarization::H)
    }

    pub fn v(path: PathId, oam: i32) -> Self {
        ModeLabel::new(path, oam, Polarization::V)
    }

    /// The `oam,pol,path` notation used for cycle listings.
    pub fn to_short(&self) -> String {
        format!("{},{},{}", self.oam, self.pol, self.path)
    }

    pub fn parse_short(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("expected `oam,pol,path`, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let oam = parts[0].parse().map_err(|_| bad())?;
        let pol = parts[1].parse()?;
        let mut chars = parts[2].chars();
        let p = match (chars.next(), chars.next()) {
            (Some(c), None) => PathId::new(c)?,
            _ => return Err(bad()),
        };
        Ok(ModeLabel::new(p, oam, pol))
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}]", self.path, self.oam, self.pol)
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    /// Parses `path[oam,pol]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("expected `path[oam,pol]`, got `{s}`"));
        let open = s.find('[').ok_or_else(bad)?;
        if !s.ends_with(']') {
            return Err(bad());
        }
        let mut name = s[..open].chars();
        let p = match (name.next(), name.next()) {
            (Some(c), None) => PathId::new(c)?,
            _ => return Err(bad()),
        };
        let inner = &s[open + 1..s.len() - 1];
        let (oam, pol) = inner.split_once(',').ok_or_else(bad)?;
        let oam = oam.trim().parse().map_err(|_| bad())?;
        Ok(ModeLabel::new(p, oam, pol.parse()?))
    }
}
