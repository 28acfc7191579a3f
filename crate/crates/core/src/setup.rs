//! Optical elements and experimental configurations.

use std::fmt;
use std::sync::Arc;

use crate::mode::{PathAlphabet, PathId};

/// Element types, without their wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Reflection,
    BS,
    PBS,
    HWP,
    OAMHolo,
    OAMHoloSP,
    DP,
    LI,
}

impl ElementKind {
    pub const ALL: [ElementKind; 8] = [
        ElementKind::Reflection,
        ElementKind::BS,
        ElementKind::PBS,
        ElementKind::HWP,
        ElementKind::OAMHolo,
        ElementKind::OAMHoloSP,
        ElementKind::DP,
        ElementKind::LI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Reflection => "Reflection",
            ElementKind::BS => "BS",
            ElementKind::PBS => "PBS",
            ElementKind::HWP => "HWP",
            ElementKind::OAMHolo => "OAMHolo",
            ElementKind::OAMHoloSP => "OAMHoloSP",
            ElementKind::DP => "DP",
            ElementKind::LI => "LI",
        }
    }

    /// Accepts the canonical names plus the `OAMHoloSP2` alias.
    pub fn from_name(s: &str) -> Option<ElementKind> {
        Some(match s {
            "Reflection" => ElementKind::Reflection,
            "BS" => ElementKind::BS,
            "PBS" => ElementKind::PBS,
            "HWP" => ElementKind::HWP,
            "OAMHolo" => ElementKind::OAMHolo,
            "OAMHoloSP" | "OAMHoloSP2" => ElementKind::OAMHoloSP,
            "DP" => ElementKind::DP,
            "LI" => ElementKind::LI,
            _ => return None,
        })
    }

    pub fn path_count(self) -> usize {
        match self {
            ElementKind::BS | ElementKind::PBS | ElementKind::LI => 2,
            _ => 1,
        }
    }

    pub fn has_param(self) -> bool {
        matches!(
            self,
            ElementKind::OAMHolo | ElementKind::OAMHoloSP | ElementKind::DP
        )
    }

    /// Number of arguments after the input placeholder.
    pub fn arity(self) -> usize {
        self.path_count() + usize::from(self.has_param())
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named, fixed sequence of elements that acts as a single element.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub name: String,
    pub elements: Vec<Element>,
}

impl Composite {
    /// The composite with every nested composite expanded away.
    pub fn primitives(&self) -> Vec<Element> {
        expand(&self.elements)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Reflection(PathId),
    BS(PathId, PathId),
    PBS(PathId, PathId),
    HWP(PathId),
    OAMHolo(PathId, i32),
    OAMHoloSP(PathId, i32),
    DP(PathId, i32),
    LI(PathId, PathId),
    Composite(Arc<Composite>),
}

impl Element {
    pub fn from_parts(kind: ElementKind, paths: &[PathId], param: i32) -> Element {
        let p = paths[0];
        let q = || paths[1];
        match kind {
            ElementKind::Reflection => Element::Reflection(p),
            ElementKind::BS => Element::BS(p, q()),
            ElementKind::PBS => Element::PBS(p, q()),
            ElementKind::HWP => Element::HWP(p),
            ElementKind::OAMHolo => Element::OAMHolo(p, param),
            ElementKind::OAMHoloSP => Element::OAMHoloSP(p, param),
            ElementKind::DP => Element::DP(p, param),
            ElementKind::LI => Element::LI(p, q()),
        }
    }

    /// `None` for composites.
    pub fn kind(&self) -> Option<ElementKind> {
        Some(match self {
            Element::Reflection(_) => ElementKind::Reflection,
            Element::BS(..) => ElementKind::BS,
            Element::PBS(..) => ElementKind::PBS,
            Element::HWP(_) => ElementKind::HWP,
            Element::OAMHolo(..) => ElementKind::OAMHolo,
            Element::OAMHoloSP(..) => ElementKind::OAMHoloSP,
            Element::DP(..) => ElementKind::DP,
            Element::LI(..) => ElementKind::LI,
            Element::Composite(_) => return None,
        })
    }

    /// Every path the element touches, in argument order, without repeats.
    pub fn paths(&self) -> Vec<PathId> {
        match self {
            Element::Reflection(p)
            | Element::HWP(p)
            | Element::OAMHolo(p, _)
            | Element::OAMHoloSP(p, _)
            | Element::DP(p, _) => vec![*p],
            Element::BS(p, q) | Element::PBS(p, q) | Element::LI(p, q) => vec![*p, *q],
            Element::Composite(c) => {
                let mut v: Vec<PathId> = Vec::new();
                for e in &c.elements {
                    for p in e.paths() {
                        if !v.contains(&p) {
                            v.push(p);
                        }
                    }
                }
                v
            }
        }
    }

    pub fn param(&self) -> Option<i32> {
        match self {
            Element::OAMHolo(_, n) | Element::OAMHoloSP(_, n) | Element::DP(_, n) => Some(*n),
            _ => None,
        }
    }

    /// The same element with every path label passed through `f`.
    pub fn map_paths(&self, f: &impl Fn(PathId) -> PathId) -> Element {
        match self {
            Element::Reflection(p) => Element::Reflection(f(*p)),
            Element::BS(p, q) => Element::BS(f(*p), f(*q)),
            Element::PBS(p, q) => Element::PBS(f(*p), f(*q)),
            Element::HWP(p) => Element::HWP(f(*p)),
            Element::OAMHolo(p, n) => Element::OAMHolo(f(*p), *n),
            Element::OAMHoloSP(p, n) => Element::OAMHoloSP(f(*p), *n),
            Element::DP(p, n) => Element::DP(f(*p), *n),
            Element::LI(p, q) => Element::LI(f(*p), f(*q)),
            Element::Composite(c) => Element::Composite(Arc::new(Composite {
                name: c.name.clone(),
                elements: c.elements.iter().map(|e| e.map_paths(f)).collect(),
            })),
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, Element::Composite(_))
    }

    /// Flat notation with the given input placeholder, e.g. `BS[XXX,a,b]`.
    pub fn to_dsl(&self, placeholder: &str) -> String {
        match self {
            Element::Composite(c) => format!("{}[{placeholder}]", c.name),
            _ => {
                let kind = self.kind().unwrap();
                let mut s = format!("{}[{placeholder}", kind.name());
                for p in self.paths() {
                    s.push(',');
                    s.push(p.as_char());
                }
                if let Some(n) = self.param() {
                    s.push_str(&format!(",{n}"));
                }
                s.push(']');
                s
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl("XXX"))
    }
}

/// Replaces composites by their primitive elements, recursively.
pub fn expand(elements: &[Element]) -> Vec<Element> {
    let mut out = Vec::with_capacity(elements.len());
    for e in elements {
        match e {
            Element::Composite(c) => out.extend(expand(&c.elements)),
            other => out.push(other.clone()),
        }
    }
    out
}

/// An ordered list of elements, applied first to last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub elements: Vec<Element>,
}

impl ExperimentConfig {
    pub fn new(elements: Vec<Element>) -> Self {
        ExperimentConfig { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Paths referenced by any element, sorted.
    pub fn used_paths(&self) -> Vec<PathId> {
        let mut v: Vec<PathId> = self.elements.iter().flat_map(|e| e.paths()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Checks that every path label lies in `alphabet`.
    pub fn paths_within(&self, alphabet: &PathAlphabet) -> bool {
        self.used_paths().into_iter().all(|p| alphabet.contains(p))
    }

    pub fn expanded(&self) -> ExperimentConfig {
        ExperimentConfig::new(expand(&self.elements))
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_setup(self))
    }
}
