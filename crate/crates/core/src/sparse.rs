//! Sparse matrices over a cyclotomic field, exact throughout.
//!
//! Generator images in the local representations are monomial matrices
//! (one nonzero entry per row and column), and everything derived from
//! them — spectral projectors, commutators, eigenspace systems — stays
//! sparse enough that a column-major list-of-pairs format with exact
//! scalars is comfortable at the dimensions that occur (N^m up to 729 for
//! the builtin surfaces at N = 3, 625 at N = 5).
//!
//! Rank computations use an online row-echelon form: rows are fed one at
//! a time, reduced against the pivots found so far, and kept when a new
//! pivot survives.  No pivoting heuristics are needed because arithmetic
//! is exact.

use std::collections::BTreeMap;

use crate::cyclotomic::{CycField, CycScalar};

/// Column-major sparse matrix; each column is sorted by row index and
/// contains no explicit zeros, so `PartialEq` is structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMatrix {
    dim: usize,
    cols: Vec<Vec<(usize, CycScalar)>>,
}

impl RepMatrix {
    pub fn zero(dim: usize) -> Self {
        RepMatrix {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(field: &CycField, dim: usize) -> Self {
        Self::scalar(field, dim, &field.one())
    }

    pub fn scalar(_field: &CycField, dim: usize, c: &CycScalar) -> Self {
        let cols = (0..dim)
            .map(|j| {
                if c.is_zero() {
                    Vec::new()
                } else {
                    vec![(j, c.clone())]
                }
            })
            .collect();
        RepMatrix { dim, cols }
    }

    pub fn from_triplets<I>(field: &CycField, dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, CycScalar)>,
    {
        let mut acc: Vec<BTreeMap<usize, CycScalar>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet out of range");
            let entry = acc[c].entry(r).or_insert_with(|| field.zero());
            *entry = field.add(entry, &v);
        }
        let cols = acc
            .into_iter()
            .map(|col| col.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        RepMatrix { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn col(&self, j: usize) -> &[(usize, CycScalar)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, field: &CycField, r: usize, c: usize) -> CycScalar {
        self.cols[c]
            .binary_search_by_key(&r, |&(row, _)| row)
            .map(|idx| self.cols[c][idx].1.clone())
            .unwrap_or_else(|_| field.zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CycScalar)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn add(&self, field: &CycField, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| merge_cols(field, a, b, false))
            .collect();
        RepMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn sub(&self, field: &CycField, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| merge_cols(field, a, b, true))
            .collect();
        RepMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn neg(&self, field: &CycField) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|(r, v)| (*r, field.neg(v))).collect())
            .collect();
        RepMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn scale(&self, field: &CycField, c: &CycScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|(r, v)| (*r, field.mul(c, v))).collect())
            .collect();
        RepMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn mul(&self, field: &CycField, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = other
            .cols
            .iter()
            .map(|bcol| {
                let mut acc: BTreeMap<usize, CycScalar> = BTreeMap::new();
                for (k, bv) in bcol {
                    for (r, av) in &self.cols[*k] {
                        let term = field.mul(av, bv);
                        let entry = acc.entry(*r).or_insert_with(|| field.zero());
                        *entry = field.add(entry, &term);
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        RepMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn pow(&self, field: &CycField, e: u64) -> Self {
        let mut acc = Self::identity(field, self.dim);
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }

    pub fn trace(&self, field: &CycField) -> CycScalar {
        let mut t = field.zero();
        for (j, col) in self.cols.iter().enumerate() {
            if let Ok(idx) = col.binary_search_by_key(&j, |&(row, _)| row) {
                t = field.add(&t, &col[idx].1);
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    /// Some(c) when the matrix equals c * Id (including c = 0).
    pub fn as_scalar(&self, field: &CycField) -> Option<CycScalar> {
        if self.is_zero() {
            return Some(field.zero());
        }
        let mut value: Option<CycScalar> = None;
        for (j, col) in self.cols.iter().enumerate() {
            match col.as_slice() {
                [(r, v)] if *r == j => match &value {
                    None => value = Some(v.clone()),
                    Some(c) if c == v => {}
                    _ => return None,
                },
                _ => return None,
            }
        }
        value
    }

    /// Monomial decomposition: returns per-column (row, value) when the
    /// matrix has exactly one nonzero per column and per row.
    pub fn as_monomial(&self) -> Option<(Vec<usize>, Vec<CycScalar>)> {
        let mut perm = Vec::with_capacity(self.dim);
        let mut vals = Vec::with_capacity(self.dim);
        let mut row_seen = vec![false; self.dim];
        for col in &self.cols {
            match col.as_slice() {
                [(r, v)] => {
                    if row_seen[*r] {
                        return None;
                    }
                    row_seen[*r] = true;
                    perm.push(*r);
                    vals.push(v.clone());
                }
                _ => return None,
            }
        }
        Some((perm, vals))
    }

    /// Inverse of a monomial matrix.
    pub fn monomial_inverse(&self, field: &CycField) -> Option<Self> {
        let (perm, vals) = self.as_monomial()?;
        let triplets = (0..self.dim).map(|c| (c, perm[c], field.inv(&vals[c]).ok())).map(
            |(r, c, v)| (r, c, v.expect("monomial entries are units")),
        );
        Some(Self::from_triplets(field, self.dim, triplets))
    }

    /// Image of a (dense) vector.
    pub fn apply(&self, field: &CycField, v: &[CycScalar]) -> Vec<CycScalar> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![field.zero(); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            if v[j].is_zero() {
                continue;
            }
            for (r, a) in col {
                out[*r] = field.add(&out[*r], &field.mul(a, &v[j]));
            }
        }
        out
    }

    /// Debugging export `{"dim": d, "entries": [[row, col, scalar]]}` with
    /// scalars rendered as powers of q = z^scale; deterministic
    /// column-major entry order.
    pub fn to_json_triplets(&self, field: &CycField, scale: u64) -> String {
        let entries: Vec<serde_json::Value> = self
            .entries()
            .map(|(r, c, v)| serde_json::json!([r, c, field.render(v, scale)]))
            .collect();
        serde_json::json!({ "dim": self.dim, "entries": entries }).to_string()
    }

    /// Exact rank by row elimination.
    pub fn rank(&self, field: &CycField) -> usize {
        let mut rows: Vec<BTreeMap<usize, CycScalar>> = vec![BTreeMap::new(); self.dim];
        for (r, c, v) in self.entries() {
            rows[r].insert(c, v.clone());
        }
        let mut ech = Echelon::new(field.clone());
        for row in rows {
            ech.insert(row);
        }
        ech.rank()
    }
}

fn merge_cols(
    field: &CycField,
    a: &[(usize, CycScalar)],
    b: &[(usize, CycScalar)],
    subtract: bool,
) -> Vec<(usize, CycScalar)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let pick_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let pick_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if pick_a {
            out.push(a[i].clone());
            i += 1;
        } else if pick_b {
            let (r, v) = &b[j];
            out.push((*r, if subtract { field.neg(v) } else { v.clone() }));
            j += 1;
        } else {
            let v = if subtract {
                field.sub(&a[i].1, &b[j].1)
            } else {
                field.add(&a[i].1, &b[j].1)
            };
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Online row-echelon form: feed rows, read off the rank.
pub struct Echelon {
    field: CycField,
    /// Sorted by pivot column; each row is normalized to pivot value 1.
    pivots: Vec<(usize, BTreeMap<usize, CycScalar>)>,
}

impl Echelon {
    pub fn new(field: CycField) -> Self {
        Echelon {
            field,
            pivots: Vec::new(),
        }
    }

    /// Reduces the row against the current pivots; returns true when a new
    /// pivot row was added (the row was independent).
    pub fn insert(&mut self, mut row: BTreeMap<usize, CycScalar>) -> bool {
        row.retain(|_, v| !v.is_zero());
        loop {
            let Some((&col, val)) = row.iter().next() else {
                return false;
            };
            let val = val.clone();
            match self.pivots.binary_search_by_key(&col, |(c, _)| *c) {
                Ok(idx) => {
                    // row -= val * pivot_row
                    let pivot_row = self.pivots[idx].1.clone();
                    for (c, pv) in pivot_row {
                        let term = self.field.mul(&val, &pv);
                        let entry = row.entry(c).or_insert_with(|| self.field.zero());
                        *entry = self.field.sub(entry, &term);
                        if entry.is_zero() {
                            row.remove(&c);
                        }
                    }
                }
                Err(idx) => {
                    let inv = self.field.inv(&val).expect("pivot is nonzero");
                    let normalized: BTreeMap<usize, CycScalar> = row
                        .iter()
                        .map(|(c, v)| (*c, self.field.mul(&inv, v)))
                        .collect();
                    self.pivots.insert(idx, (col, normalized));
                    return true;
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Rank of an arbitrary list of sparse rows.
pub fn rank_of_rows(field: &CycField, rows: Vec<BTreeMap<usize, CycScalar>>) -> usize {
    let mut ech = Echelon::new(field.clone());
    for row in rows {
        ech.insert(row);
    }
    ech.rank()
}
