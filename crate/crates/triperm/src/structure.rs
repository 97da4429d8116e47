//! Finite structures with `d` linear orders (`d >= 2`, default 3).
//!
//! A structure on `n` points is stored in a normal form: points are listed in
//! increasing first order, and the entry `k` of point `i` is the point's rank
//! (0-based) in order `k+1`. Rank column 0 is therefore always the identity.
//! Two structures are isomorphic (with labeled orders) exactly when their
//! rank rows are equal, so equality of the normal forms is isomorphism.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a point in the first-order listing of its structure.
pub type PointId = usize;

/// Number of orders used when none is specified.
pub const DEFAULT_DIMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("order {order} ranks are not a permutation of 0..{n}")]
    NonBijectiveOrder { order: usize, n: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    ArityMismatch { row: usize, expected: usize, got: usize },
    #[error("bad order index {index} (structure has {dims} orders, indices are 1-based)")]
    BadOrderIndex { index: usize, dims: usize },
    #[error("a structure needs at least 2 orders, got {got}")]
    TooFewOrders { got: usize },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// A finite set with `dims` linear orders, in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPerm {
    dims: usize,
    /// `points[i][k]` is the rank of point `i` in order `k+1`; `points[i][0] == i`.
    points: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct MPermFile {
    dims: usize,
    points: Vec<Vec<u32>>,
}

impl MultiPerm {
    /// The empty structure with the given number of orders.
    pub fn empty(dims: usize) -> Result<Self, StructureError> {
        if dims < 2 {
            return Err(StructureError::TooFewOrders { got: dims });
        }
        Ok(MultiPerm { dims, points: Vec::new() })
    }

    /// Build a structure from rank rows, validating and normalizing.
    ///
    /// Rows may arrive in any order; they are sorted by their first-order
    /// rank. Every column must be a permutation of `0..n`. An empty row list
    /// yields the empty structure with [`DEFAULT_DIMS`] orders.
    pub fn from_rank_rows(rows: Vec<Vec<u32>>) -> Result<Self, StructureError> {
        if rows.is_empty() {
            return Self::empty(DEFAULT_DIMS);
        }
        let dims = rows[0].len();
        Self::from_rank_rows_with_dims(dims, rows)
    }

    /// As [`from_rank_rows`](Self::from_rank_rows) with an explicit order count
    /// (needed to describe the empty structure in fewer or more than 3 orders).
    pub fn from_rank_rows_with_dims(
        dims: usize,
        mut rows: Vec<Vec<u32>>,
    ) -> Result<Self, StructureError> {
        if dims < 2 {
            return Err(StructureError::TooFewOrders { got: dims });
        }
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(StructureError::ArityMismatch {
                    row: i,
                    expected: dims,
                    got: row.len(),
                });
            }
        }
        for k in 0..dims {
            let mut seen = vec![false; n];
            for row in &rows {
                let r = row[k] as usize;
                if r >= n || seen[r] {
                    return Err(StructureError::NonBijectiveOrder { order: k + 1, n });
                }
                seen[r] = true;
            }
        }
        rows.sort_by_key(|row| row[0]);
        Ok(MultiPerm { dims, points: rows })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rank of point `p` in order `order` (1-based order index).
    pub fn rank(&self, p: PointId, order: usize) -> u32 {
        self.points[p][order - 1]
    }

    /// `a` strictly before `b` in order `order` (1-based).
    pub fn before(&self, a: PointId, b: PointId, order: usize) -> bool {
        self.points[a][order - 1] < self.points[b][order - 1]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.points
    }

    /// The substructure induced on `subset`, with ranks re-normalized per order.
    ///
    /// Points outside `0..n` are ignored; duplicates in `subset` are collapsed.
    pub fn induced_substructure(&self, subset: &[PointId]) -> MultiPerm {
        let mut sel: Vec<PointId> = subset
            .iter()
            .copied()
            .filter(|&p| p < self.len())
            .collect();
        sel.sort_unstable();
        sel.dedup();
        let m = sel.len();
        let mut rows = vec![vec![0u32; self.dims]; m];
        for k in 0..self.dims {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by_key(|&i| self.points[sel[i]][k]);
            for (new_rank, &i) in order.iter().enumerate() {
                rows[i][k] = new_rank as u32;
            }
        }
        rows.sort_by_key(|row| row[0]);
        MultiPerm { dims: self.dims, points: rows }
    }

    /// Structural equality of normal forms: same order count, same rank rows.
    pub fn canonical_equal(&self, other: &MultiPerm) -> bool {
        self == other
    }

    /// Keep only the orders named in `keep` (1-based indices), in that sequence.
    pub fn reduct(&self, keep: &[usize]) -> Result<MultiPerm, StructureError> {
        if keep.len() < 2 {
            return Err(StructureError::TooFewOrders { got: keep.len() });
        }
        for &k in keep {
            if k == 0 || k > self.dims {
                return Err(StructureError::BadOrderIndex { index: k, dims: self.dims });
            }
        }
        let rows: Vec<Vec<u32>> = self
            .points
            .iter()
            .map(|row| keep.iter().map(|&k| row[k - 1]).collect())
            .collect();
        // Column 0 of the result may no longer be the identity; renormalize.
        MultiPerm::from_rank_rows_with_dims(keep.len(), rows)
    }

    /// Append extra rank columns, each a bijection onto `0..n`.
    pub fn expand(&self, extra: &[Vec<u32>]) -> Result<MultiPerm, StructureError> {
        let n = self.len();
        for (j, col) in extra.iter().enumerate() {
            if col.len() != n {
                return Err(StructureError::ArityMismatch {
                    row: j,
                    expected: n,
                    got: col.len(),
                });
            }
            let mut seen = vec![false; n];
            for &r in col {
                if r as usize >= n || seen[r as usize] {
                    return Err(StructureError::NonBijectiveOrder {
                        order: self.dims + j + 1,
                        n,
                    });
                }
                seen[r as usize] = true;
            }
        }
        let rows: Vec<Vec<u32>> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend(extra.iter().map(|col| col[i]));
                r
            })
            .collect();
        Ok(MultiPerm { dims: self.dims + extra.len(), points: rows })
    }

    /// Parse the `.mperm` JSON format. Rejects trailing data and non-bijective
    /// rank columns; reports the byte offset of the first problem.
    pub fn parse_mperm(bytes: &[u8]) -> Result<MultiPerm, StructureError> {
        let file: MPermFile = serde_json::from_slice(bytes).map_err(|e| StructureError::Parse {
            offset: offset_of(bytes, e.line(), e.column()),
            message: e.to_string(),
        })?;
        MultiPerm::from_rank_rows_with_dims(file.dims, file.points)
    }

    /// Serialize to the `.mperm` JSON format (UTF-8, no trailing newline).
    pub fn serialize_mperm(&self) -> Vec<u8> {
        let file = MPermFile { dims: self.dims, points: self.points.clone() };
        serde_json::to_vec(&file).expect("mperm serialization cannot fail")
    }
}

fn offset_of(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut cur_line = 1usize;
    let mut offset = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        if cur_line == line {
            offset = i;
            break;
        }
        if b == b'\n' {
            cur_line += 1;
        }
        offset = i + 1;
    }
    (offset + column.saturating_sub(1)).min(bytes.len())
}
