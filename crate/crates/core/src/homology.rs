//! Exact rational homology of cellular chain complexes.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{CellComplex, ComplexError};
use crate::fintop::CellSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("boundary of boundary is nonzero in degree {0}")]
    NotAComplex(usize),
    #[error("set is not locally closed")]
    NotLocallyClosed,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Chain complex with integer boundary matrices stored column-wise.
/// `cols[k][j]` lists the nonzero entries `(row, value)` of `∂_k` applied to
/// the `j`-th generator in degree `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    sizes: Vec<usize>,
    cols: Vec<Vec<Vec<(usize, i64)>>>,
}

impl ChainComplex {
    pub fn from_columns(sizes: Vec<usize>, cols: Vec<Vec<Vec<(usize, i64)>>>) -> Self {
        ChainComplex { sizes, cols }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn boundary(&self, k: usize) -> &[Vec<(usize, i64)>] {
        &self.cols[k]
    }

    /// Checks `∂_{k-1} ∘ ∂_k = 0` in every degree, exactly.
    pub fn check(&self) -> Result<(), HomologyError> {
        for k in 2..self.sizes.len() {
            for col in &self.cols[k] {
                let mut acc: BTreeMap<usize, i128> = BTreeMap::new();
                for &(r, v) in col {
                    for &(s, w) in &self.cols[k - 1][r] {
                        *acc.entry(s).or_default() += v as i128 * w as i128;
                    }
                }
                if acc.values().any(|&x| x != 0) {
                    return Err(HomologyError::NotAComplex(k));
                }
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.sizes.iter().enumerate().map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
    }
}

/// Betti numbers, zero outside the stored range.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn get(&self, k: i64) -> usize {
        if k < 0 {
            0
        } else {
            self.0.get(k as usize).copied().unwrap_or(0)
        }
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.0.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    }
}

impl std::fmt::Display for BettiVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Rank of a sparse integer matrix over the rationals.
///
/// Column elimination; the pivot column is the sparsest active column and the
/// pivot row inside it the sparsest row, a cheap Markowitz-style choice.
pub fn rank(n_rows: usize, cols: &[Vec<(usize, i64)>]) -> usize {
    let mut mat: Vec<BTreeMap<usize, BigRational>> =
        cols.iter().map(|c| c.iter().filter(|&&(_, v)| v != 0).map(|&(r, v)| (r, BigRational::from_integer(v.into()))).collect()).collect();
    let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
    for (j, c) in mat.iter().enumerate() {
        for &r in c.keys() {
            row_cols[r].push(j);
        }
    }
    let mut row_count: Vec<usize> = row_cols.iter().map(Vec::len).collect();
    let mut active: Vec<usize> = (0..mat.len()).filter(|&j| !mat[j].is_empty()).collect();
    let mut rank = 0;
    while !active.is_empty() {
        let (ai, &pc) = active.iter().enumerate().min_by_key(|&(_, &j)| (mat[j].len(), j)).unwrap();
        active.swap_remove(ai);
        if mat[pc].is_empty() {
            continue;
        }
        let pr = *mat[pc].keys().min_by_key(|&&r| (row_count[r], r)).unwrap();
        rank += 1;
        let pivot_col = std::mem::take(&mut mat[pc]);
        for &r in pivot_col.keys() {
            row_count[r] -= 1;
        }
        let pv = pivot_col[&pr].clone();
        let targets: Vec<usize> = std::mem::take(&mut row_cols[pr]);
        for j in targets {
            if j == pc {
                continue;
            }
            let Some(a) = mat[j].get(&pr).cloned() else { continue };
            let factor = a / &pv;
            for (r, v) in &pivot_col {
                let delta = &factor * v;
                let entry = mat[j].entry(*r).or_insert_with(|| {
                    row_count[*r] += 1;
                    row_cols[*r].push(j);
                    BigRational::zero()
                });
                *entry -= delta;
                if entry.is_zero() {
                    mat[j].remove(r);
                    row_count[*r] -= 1;
                }
            }
        }
        // rows keep stale column references; they are filtered by lookups above
        for (r, _) in pivot_col {
            if r != pr {
                row_cols[r].retain(|&j| j != pc);
            }
        }
        active.retain(|&j| !mat[j].is_empty());
    }
    rank
}

pub fn betti(cc: &ChainComplex) -> Result<BettiVector, HomologyError> {
    cc.check()?;
    let d = cc.sizes.len();
    let ranks: Vec<usize> = (0..d).map(|k| if k == 0 { 0 } else { rank(cc.sizes[k - 1], &cc.cols[k]) }).collect();
    Ok(BettiVector((0..d).map(|k| cc.sizes[k] - ranks[k] - if k + 1 < d { ranks[k + 1] } else { 0 }).collect()))
}

/// Homology of the pair `(cl s, Mo s)`.
pub fn conley_index_pair(c: &CellComplex, s: &CellSet) -> Result<BettiVector, HomologyError> {
    let p = c.poset();
    if !p.owns(s) {
        return Err(ComplexError::Poset(crate::fintop::PosetError::AmbientMismatch).into());
    }
    if !p.locally_closed(s) {
        return Err(HomologyError::NotLocallyClosed);
    }
    betti(&c.chain_complex(&p.cl(s), &p.mo(s))?)
}

/// The values `r ∈ {0,1}` with `β_{2n+r} = β_{2n+1+r}` for all integers `n`,
/// provided the vector is nonzero.
pub fn homology_condition(b: &BettiVector) -> Vec<u8> {
    if b.is_zero() {
        return Vec::new();
    }
    let top = b.0.len() as i64 + 1;
    [0u8, 1]
        .into_iter()
        .filter(|&r| {
            let mut k = r as i64 - 2;
            while k <= top {
                if b.get(k) != b.get(k + 1) {
                    return false;
                }
                k += 2;
            }
            true
        })
        .collect()
}
