//! Schmidt rank vectors and GHZ detection for three-photon states.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{PathId, Polarization};
use crate::state::QuantumState;

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Coefficients of a three-party state in the OAM basis each party observes.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteTensor {
    /// Sorted OAM values seen by each party.
    pub basis: [Vec<i32>; 3],
    /// Row-major, indexed `[i][j][k]`.
    pub data: Vec<Complex64>,
}

impl TripartiteTensor {
    pub fn dims(&self) -> [usize; 3] {
        [self.basis[0].len(), self.basis[1].len(), self.basis[2].len()]
    }

    pub fn from_dense(dims: [usize; 3], data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dims.iter().product::<usize>());
        TripartiteTensor {
            basis: dims.map(|d| (0..d as i32).collect()),
            data,
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let [_, d1, d2] = self.dims();
        self.data[(i * d1 + j) * d2 + k]
    }

    /// Matrix with party `party` as rows and the other two parties as columns.
    pub fn flatten(&self, party: usize) -> DMatrix<Complex64> {
        let d = self.dims();
        let (o1, o2) = match party {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        DMatrix::from_fn(d[party], d[o1] * d[o2], |r, c| {
            let mut idx = [0usize; 3];
            idx[party] = r;
            idx[o1] = c / d[o2];
            idx[o2] = c % d[o2];
            self.get(idx[0], idx[1], idx[2])
        })
    }
}

/// Builds the coefficient tensor. Every term must hold exactly one photon in
/// each party path and nothing else, and each party's photons must share one
/// polarization.
pub fn to_tensor(state: &QuantumState, parties: [PathId; 3]) -> Result<TripartiteTensor> {
    let mut basis: [Vec<i32>; 3] = Default::default();
    let mut pols: [Option<Polarization>; 3] = [None; 3];
    let mut entries = Vec::with_capacity(state.len());
    for (t, a) in state.iter() {
        if t.photon_count() != 3 {
            return Err(Error::Tensor(format!("term {t} does not hold three photons")));
        }
        let mut idx = [0i32; 3];
        for (k, p) in parties.iter().enumerate() {
            let mut ms = t.in_path(*p);
            let m = match (ms.next(), ms.next()) {
                (Some(m), None) => m,
                _ => {
                    return Err(Error::Tensor(format!(
                        "term {t} does not hold exactly one photon in path {p}"
                    )))
                }
            };
            match pols[k] {
                None => pols[k] = Some(m.pol),
                Some(pol) if pol != m.pol => {
                    return Err(Error::Tensor(format!(
                        "party {p} carries both polarizations"
                    )))
                }
                _ => {}
            }
            idx[k] = m.oam;
        }
        entries.push((idx, *a));
    }
    for (idx, _) in &entries {
        for k in 0..3 {
            basis[k].push(idx[k]);
        }
    }
    for b in basis.iter_mut() {
        b.sort_unstable();
        b.dedup();
    }
    let dims = [basis[0].len(), basis[1].len(), basis[2].len()];
    let mut data = vec![Complex64::default(); dims.iter().product()];
    for (idx, a) in entries {
        let pos: Vec<usize> = (0..3)
            .map(|k| basis[k].binary_search(&idx[k]).unwrap())
            .collect();
        data[(pos[0] * dims[1] + pos[1]) * dims[2] + pos[2]] += a;
    }
    Ok(TripartiteTensor { basis, data })
}

/// Schmidt ranks of the three single-party bipartitions, in party order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchmidtRankVector(pub [usize; 3]);

impl SchmidtRankVector {
    /// Descending order, the usual way of naming an entanglement class.
    pub fn sorted(&self) -> [usize; 3] {
        let mut v = self.0;
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

impl fmt::Display for SchmidtRankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a},{b},{c})")
    }
}

pub fn matrix_rank(m: &DMatrix<Complex64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * max).count()
}

pub fn schmidt_rank_vector(t: &TripartiteTensor, tol: f64) -> SchmidtRankVector {
    SchmidtRankVector([0, 1, 2].map(|k| matrix_rank(&t.flatten(k), tol)))
}

pub fn srv_of_state(state: &QuantumState, parties: [PathId; 3]) -> Result<SchmidtRankVector> {
    Ok(schmidt_rank_vector(&to_tensor(state, parties)?, RANK_TOL))
}

/// True when no party factors out, i.e. every rank is at least 2.
pub fn is_nontrivial(srv: &SchmidtRankVector) -> bool {
    srv.0.iter().all(|&r| r >= 2)
}

/// All nonzero coefficients share the same modulus within relative `tol`.
pub fn is_max_entangled(state: &QuantumState, parties: [PathId; 3], tol: f64) -> Result<bool> {
    let t = to_tensor(state, parties)?;
    let mods: Vec<f64> = t
        .data
        .iter()
        .map(|c| c.norm())
        .filter(|m| *m > crate::state::EPS_ZERO)
        .collect();
    let Some(max) = mods.iter().cloned().reduce(f64::max) else {
        return Ok(false);
    };
    Ok(mods.iter().all(|m| (max - m) <= tol * max))
}

/// `Some(d)` when the state has `d` equal-modulus terms and each party sees
/// `d` distinct (hence orthogonal) OAM values across them.
pub fn ghz_dimension(state: &QuantumState, parties: [PathId; 3], tol: f64) -> Result<Option<usize>> {
    let t = to_tensor(state, parties)?;
    let d = t.data.iter().filter(|c| c.norm() > crate::state::EPS_ZERO).count();
    if d == 0 || !is_max_entangled(state, parties, tol)? {
        return Ok(None);
    }
    Ok(t.dims().iter().all(|&n| n == d).then_some(d))
}
