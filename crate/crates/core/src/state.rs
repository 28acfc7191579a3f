//! Sparse polynomial representation of multi-photon states.
//!
//! A state is a map from a canonical, sorted multiset of modes to a complex
//! amplitude. Creation operators are treated as commuting symbols, so the
//! stored coefficients carry no `sqrt(n!)` factors for repeated modes.
//! [`QuantumState::norm`] accounts for those factors when measuring length.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::mode::{ModeLabel, PathId};

/// Amplitudes at or below this modulus are dropped after every operation.
pub const EPS_ZERO: f64 = 1e-9;

/// A product of creation operators, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PhotonTerm(SmallVec<[ModeLabel; 4]>);

impl PhotonTerm {
    pub fn new(modes: impl IntoIterator<Item = ModeLabel>) -> Self {
        let mut v: SmallVec<[ModeLabel; 4]> = modes.into_iter().collect();
        v.sort_unstable();
        PhotonTerm(v)
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.0
    }

    pub fn photon_count(&self) -> usize {
        self.0.len()
    }

    pub fn photons_in(&self, p: PathId) -> usize {
        self.0.iter().filter(|m| m.path == p).count()
    }

    pub fn in_path(&self, p: PathId) -> impl Iterator<Item = &ModeLabel> {
        self.0.iter().filter(move |m| m.path == p)
    }

    /// The term with every photon in `p` removed.
    pub fn without_path(&self, p: PathId) -> PhotonTerm {
        PhotonTerm(self.0.iter().copied().filter(|m| m.path != p).collect())
    }

    /// Product of `n!` over the multiplicity `n` of each distinct mode.
    pub fn bunching_weight(&self) -> f64 {
        let mut w = 1.0;
        let mut run = 1u32;
        for i in 1..self.0.len() {
            if self.0[i] == self.0[i - 1] {
                run += 1;
                w *= run as f64;
            } else {
                run = 1;
            }
        }
        w
    }
}

impl fmt::Display for PhotonTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Image of a single mode under a linear substitution.
pub type ModeImage = SmallVec<[(ModeLabel, Complex64); 2]>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumState {
    terms: BTreeMap<PhotonTerm, Complex64>,
}

impl QuantumState {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single photon in `mode` with amplitude 1.
    pub fn single(mode: ModeLabel) -> Self {
        Self::from_terms([(PhotonTerm::new([mode]), Complex64::new(1.0, 0.0))])
    }

    /// Sums the given terms, merging duplicates and pruning near-zero amplitudes.
    pub fn from_terms(terms: impl IntoIterator<Item = (PhotonTerm, Complex64)>) -> Self {
        let mut s = QuantumState::new();
        for (t, a) in terms {
            *s.terms.entry(t).or_default() += a;
        }
        s.prune(EPS_ZERO);
        s
    }

    pub fn add_term(&mut self, term: PhotonTerm, amp: Complex64) {
        let total = self.amplitude(&term) + amp;
        if total.norm() <= EPS_ZERO {
            self.terms.remove(&term);
        } else {
            self.terms.insert(term, total);
        }
    }

    pub fn prune(&mut self, eps: f64) {
        self.terms.retain(|_, a| a.norm() > eps);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&PhotonTerm, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, term: &PhotonTerm) -> Complex64 {
        self.terms.get(term).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.terms.keys().flat_map(|t| t.modes().iter())
    }

    pub fn scaled(&self, c: Complex64) -> QuantumState {
        QuantumState::from_terms(self.terms.iter().map(|(t, a)| (t.clone(), a * c)))
    }

    pub fn plus(&self, other: &QuantumState) -> QuantumState {
        QuantumState::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(t, a)| (t.clone(), *a)),
        )
    }

    /// Fock-space inner product `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        let mut acc = Complex64::default();
        for (t, a) in &self.terms {
            if let Some(b) = other.terms.get(t) {
                acc += a.conj() * b * t.bunching_weight();
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(t, a)| a.norm_sqr() * t.bunching_weight())
            .sum::<f64>()
            .sqrt()
    }

    /// The state scaled to unit norm; the zero state is returned unchanged.
    pub fn normalized(&self) -> QuantumState {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        let mut s = self.clone();
        for a in s.terms.values_mut() {
            *a /= n;
        }
        s
    }

    /// Equality up to normalization and a global phase, within `tol` per amplitude.
    pub fn equiv(&self, other: &QuantumState, tol: f64) -> bool {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return true,
            (true, false) | (false, true) => return false,
            _ => {}
        }
        let (s, o) = (self.normalized(), other.normalized());
        let ov = s.inner(&o);
        if ov.norm() < 1e-12 {
            return false;
        }
        // phase taking s onto o
        let phase = ov / ov.norm();
        let close = |t: &PhotonTerm| (s.amplitude(t) * phase - o.amplitude(t)).norm() <= tol;
        s.terms.keys().all(close) && o.terms.keys().all(close)
    }

    /// `1 - |<a|b>|` for the normalized states. Zero for equivalent states.
    pub fn distance(&self, other: &QuantumState) -> f64 {
        if self.is_empty() || other.is_empty() {
            return if self.is_empty() && other.is_empty() {
                0.0
            } else {
                1.0
            };
        }
        (1.0 - self.normalized().inner(&other.normalized()).norm()).max(0.0)
    }

    /// Applies a per-mode linear substitution. Modes for which `rule` returns
    /// `None` are left untouched.
    pub fn substitute<F>(&self, rule: F) -> QuantumState
    where
        F: Fn(&ModeLabel) -> Option<ModeImage>,
    {
        let mut out: BTreeMap<PhotonTerm, Complex64> = BTreeMap::new();
        let mut images: Vec<ModeImage> = Vec::new();
        let mut modes: SmallVec<[ModeLabel; 4]> = SmallVec::new();
        for (term, amp) in &self.terms {
            images.clear();
            for m in term.modes() {
                images.push(rule(m).unwrap_or_else(|| {
                    let mut v = ModeImage::new();
                    v.push((*m, Complex64::new(1.0, 0.0)));
                    v
                }));
            }
            // odometer over the choice of image per mode
            let mut idx = vec![0usize; images.len()];
            loop {
                let mut a = *amp;
                modes.clear();
                for (k, im) in images.iter().enumerate() {
                    let (m, c) = im[idx[k]];
                    a *= c;
                    modes.push(m);
                }
                modes.sort_unstable();
                *out.entry(PhotonTerm(modes.clone())).or_default() += a;

                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < images[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        let mut s = QuantumState { terms: out };
        s.prune(EPS_ZERO);
        s
    }

    /// Keeps only terms for which `keep` holds.
    pub fn filter<F: Fn(&PhotonTerm) -> bool>(&self, keep: F) -> QuantumState {
        QuantumState {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, a)| (t.clone(), *a))
                .collect(),
        }
    }

    /// Serializes as one `re im : mode * mode ...` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, a) in &self.terms {
            // drop rounding residue such as cos(pi/2) in one component
            let floor = a.norm() * 1e-13;
            let clean = |x: f64| if x.abs() < floor { 0.0 } else { x };
            out.push_str(&format_g12(clean(a.re)));
            out.push(' ');
            out.push_str(&format_g12(clean(a.im)));
            out.push_str(" :");
            if t.photon_count() > 0 {
                out.push(' ');
                out.push_str(&t.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<QuantumState> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| {
                Error::InvalidParameter(format!("state line {}: {msg}: `{line}`", lineno + 1))
            };
            let (amp, modes) = line.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let mut nums = amp.split_whitespace();
            let re: f64 = nums
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| bad("bad real part"))?;
            let im: f64 = nums
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| bad("bad imaginary part"))?;
            if nums.next().is_some() {
                return Err(bad("extra tokens before `:`"));
            }
            let modes = modes.trim();
            let ms = if modes.is_empty() {
                Vec::new()
            } else {
                modes
                    .split('*')
                    .map(|m| m.parse::<ModeLabel>())
                    .collect::<Result<Vec<_>>>()?
            };
            terms.push((PhotonTerm::new(ms), Complex64::new(re, im)));
        }
        Ok(QuantumState::from_terms(terms))
    }
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for QuantumState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QuantumState::parse_text(s)
    }
}

/// Formats like C's `%.12g`, with negative zero printed as `0`.
pub fn format_g12(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..SIG).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
