#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;

use oamlab::mode::{path, ModeLabel, PathId, Polarization};
use oamlab::setup::Element;
use oamlab::state::{PhotonTerm, QuantumState};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|lA,lB,lC,lD>` with all photons horizontally polarized.
pub fn ket4(l: [i32; 4]) -> PhotonTerm {
    PhotonTerm::new(['a', 'b', 'c', 'd'].iter().zip(l).map(|(&p, l)| ModeLabel::h(path(p), l)))
}

/// `|lB,lC,lD>`.
pub fn ket3(l: [i32; 3]) -> PhotonTerm {
    PhotonTerm::new(['b', 'c', 'd'].iter().zip(l).map(|(&p, l)| ModeLabel::h(path(p), l)))
}

pub fn state4(terms: &[(f64, [i32; 4])]) -> QuantumState {
    QuantumState::from_terms(terms.iter().map(|(a, l)| (ket4(*l), c(*a, 0.0))))
}

pub fn state3(terms: &[(f64, [i32; 3])]) -> QuantumState {
    QuantumState::from_terms(terms.iter().map(|(a, l)| (ket3(*l), c(*a, 0.0))))
}

pub const PATHS: [char; 4] = ['a', 'b', 'c', 'd'];

pub fn random_mode<R: Rng>(rng: &mut R, paths: &[char], oam: i32) -> ModeLabel {
    let p = path(paths[rng.random_range(0..paths.len())]);
    let pol = if rng.random_bool(0.5) {
        Polarization::H
    } else {
        Polarization::V
    };
    ModeLabel::new(p, rng.random_range(-oam..=oam), pol)
}

/// A random superposition of up to `max_terms` terms with 1..=`max_photons`
/// photons each, bunching allowed.
pub fn random_state<R: Rng>(rng: &mut R, max_terms: usize, max_photons: usize) -> QuantumState {
    let n_terms = rng.random_range(1..=max_terms);
    let mut s = QuantumState::new();
    while s.len() < n_terms {
        let k = rng.random_range(1..=max_photons);
        let term = PhotonTerm::new((0..k).map(|_| random_mode(rng, &PATHS, 4)));
        s.add_term(term, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    }
    s
}

/// A random element of each unitary kind, on paths a..d.
pub fn random_unitaries<R: Rng>(rng: &mut R) -> Vec<Element> {
    let mut pair = || {
        let p = rng.random_range(0..4usize);
        let mut q = rng.random_range(0..3usize);
        if q >= p {
            q += 1;
        }
        (path(PATHS[p]), path(PATHS[q]))
    };
    let (p1, q1) = pair();
    let (p2, q2) = pair();
    let (p3, q3) = pair();
    let one = path(PATHS[rng.random_range(0..4usize)]);
    vec![
        Element::Reflection(one),
        Element::BS(p1, q1),
        Element::PBS(p2, q2),
        Element::HWP(one),
        Element::OAMHolo(one, rng.random_range(-9..=9)),
        Element::DP(one, rng.random_range(1..=2)),
        Element::LI(p3, q3),
    ]
}

/// Exact rank by Gaussian elimination over the rationals.
pub fn exact_rank(rows: Vec<Vec<Rational64>>) -> usize {
    let mut m = rows;
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(pivot) = (rank..n_rows).find(|&r| m[r][col] != Rational64::from_integer(0)) else {
            continue;
        };
        m.swap(rank, pivot);
        let pv = m[rank][col];
        for r in 0..n_rows {
            if r != rank && m[r][col] != Rational64::from_integer(0) {
                let f = m[r][col] / pv;
                for k in col..n_cols {
                    let sub = f * m[rank][k];
                    m[r][k] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Schmidt rank vector of an integer tensor, computed exactly.
pub fn exact_srv(dims: [usize; 3], data: &[i64]) -> [usize; 3] {
    let at = |i: usize, j: usize, k: usize| data[(i * dims[1] + j) * dims[2] + k];
    let mut out = [0; 3];
    for (party, slot) in out.iter_mut().enumerate() {
        let mut rows = Vec::new();
        for x in 0..dims[party] {
            let mut row = Vec::new();
            let (o1, o2) = match party {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for y in 0..dims[o1] {
                for z in 0..dims[o2] {
                    let mut idx = [0; 3];
                    idx[party] = x;
                    idx[o1] = y;
                    idx[o2] = z;
                    row.push(Rational64::from_integer(at(idx[0], idx[1], idx[2])));
                }
            }
            rows.push(row);
        }
        *slot = exact_rank(rows);
    }
    out
}

pub fn parties() -> [PathId; 3] {
    ['b', 'c', 'd'].map(path)
}
