//! Order-preserving containment of one structure in another.
//!
//! A pattern `P` embeds in a host `S` when some injection of points preserves
//! every order. Since both sides are listed in first-order rank, an embedding
//! is a strictly increasing choice of host indices, which the backtracker
//! exploits: pattern points are matched left to right and every candidate is
//! checked against all previously chosen images in all orders at once.
//!
//! Gadget shapes have their third order opposite to their first, so copies of
//! them live on chains of the "reversal" relation (`a` before `b` in order 1
//! but after it in order 3). For such patterns the search precomputes the
//! longest reversal chain starting at each host point and prunes anchors that
//! cannot carry the remaining pattern, which keeps copy detection cheap on
//! canonical-like hosts.

use crate::exec;
use crate::structure::{MultiPerm, PointId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("pattern has {pattern} orders but host has {host}")]
    DimsMismatch { pattern: usize, host: usize },
}

/// An embedding of a pattern into a host: `map[i]` is the host point the
/// pattern point `i` (in first-order rank) is sent to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Embedding {
    pub map: Vec<PointId>,
}

/// Result of copy enumeration. `complete` is false when `limit` was hit.
#[derive(Debug, Clone)]
pub struct CopyEnumeration {
    pub copies: Vec<Embedding>,
    pub complete: bool,
}

/// Outcome of checking a structure against a list of forbidden patterns.
#[derive(Debug, Clone)]
pub struct AvoidanceVerdict {
    /// Index of the first violating pattern and the witness embedding.
    pub violation: Option<(usize, Embedding)>,
}

impl AvoidanceVerdict {
    pub fn avoided(&self) -> bool {
        self.violation.is_none()
    }
}

struct Search<'a> {
    pattern: &'a MultiPerm,
    host: &'a MultiPerm,
    /// Longest reversal-chain length starting at each host point, when the
    /// pattern is reversal-rigid (order 3 opposite to order 1); empty otherwise.
    chain_len: Vec<u32>,
}

fn pattern_is_reversal_rigid(p: &MultiPerm) -> bool {
    p.dims() >= 3
        && (0..p.len()).all(|i| p.rank(i, 3) == (p.len() as u32 - 1) - p.rank(i, 1))
}

fn reversal_chain_lengths(host: &MultiPerm) -> Vec<u32> {
    let n = host.len();
    let mut len = vec![1u32; n];
    // Points are in order-1 rank; scan right to left so successors are done.
    for i in (0..n).rev() {
        for j in i + 1..n {
            if host.rank(j, 3) < host.rank(i, 3) && len[j] + 1 > len[i] {
                len[i] = len[j] + 1;
            }
        }
    }
    len
}

impl<'a> Search<'a> {
    fn new(pattern: &'a MultiPerm, host: &'a MultiPerm) -> Self {
        let chain_len = if pattern_is_reversal_rigid(pattern) && pattern.len() > 2 {
            reversal_chain_lengths(host)
        } else {
            Vec::new()
        };
        Search { pattern, host, chain_len }
    }

    fn candidate_ok(&self, chosen: &[PointId], cand: PointId) -> bool {
        let k = chosen.len();
        if !self.chain_len.is_empty() {
            let remaining = (self.pattern.len() - k) as u32;
            if self.chain_len[cand] < remaining {
                return false;
            }
        }
        for (j, &img) in chosen.iter().enumerate() {
            for order in 2..=self.pattern.dims() {
                let want = self.pattern.before(j, k, order);
                let have = self.host.before(img, cand, order);
                if want != have {
                    return false;
                }
            }
        }
        true
    }

    /// Depth-first over host indices in increasing order; `on_found` returns
    /// true to stop the whole search.
    fn run(&self, on_found: &mut dyn FnMut(&[PointId]) -> bool) {
        let np = self.pattern.len();
        if np == 0 {
            on_found(&[]);
            return;
        }
        let ns = self.host.len();
        if np > ns {
            return;
        }
        let mut chosen: Vec<PointId> = Vec::with_capacity(np);
        self.dfs(&mut chosen, 0, on_found);
    }

    fn dfs(
        &self,
        chosen: &mut Vec<PointId>,
        lo: PointId,
        on_found: &mut dyn FnMut(&[PointId]) -> bool,
    ) -> bool {
        let k = chosen.len();
        let np = self.pattern.len();
        let ns = self.host.len();
        // Leave room for the pattern points still to be placed.
        let hi = ns - (np - k) + 1;
        for cand in lo..hi {
            if !self.candidate_ok(chosen, cand) {
                continue;
            }
            chosen.push(cand);
            let stop = if chosen.len() == np {
                on_found(chosen)
            } else {
                self.dfs(chosen, cand + 1, on_found)
            };
            chosen.pop();
            if stop {
                return true;
            }
        }
        false
    }
}

fn check_dims(pattern: &MultiPerm, host: &MultiPerm) -> Result<(), MatchError> {
    if pattern.dims() != host.dims() {
        return Err(MatchError::DimsMismatch { pattern: pattern.dims(), host: host.dims() });
    }
    Ok(())
}

/// The lexicographically least embedding of `pattern` into `host`, if any.
pub fn find_embedding(
    pattern: &MultiPerm,
    host: &MultiPerm,
) -> Result<Option<Embedding>, MatchError> {
    check_dims(pattern, host)?;
    // Same size: containment with labeled orders is rank-row equality.
    if pattern.len() == host.len() {
        return Ok(if pattern == host {
            Some(Embedding { map: (0..pattern.len()).collect() })
        } else {
            None
        });
    }
    let search = Search::new(pattern, host);
    let mut found = None;
    search.run(&mut |map| {
        found = Some(Embedding { map: map.to_vec() });
        true
    });
    Ok(found)
}

/// Whether `pattern` embeds in `host`.
pub fn embeds(pattern: &MultiPerm, host: &MultiPerm) -> Result<bool, MatchError> {
    Ok(find_embedding(pattern, host)?.is_some())
}

/// All embeddings of `pattern` into `host` in lexicographic order, up to `limit`.
pub fn enumerate_copies(
    pattern: &MultiPerm,
    host: &MultiPerm,
    limit: Option<usize>,
) -> Result<CopyEnumeration, MatchError> {
    check_dims(pattern, host)?;
    let search = Search::new(pattern, host);
    let mut copies = Vec::new();
    let mut complete = true;
    search.run(&mut |map| {
        if let Some(cap) = limit {
            if copies.len() >= cap {
                complete = false;
                return true;
            }
        }
        copies.push(Embedding { map: map.to_vec() });
        false
    });
    Ok(CopyEnumeration { copies, complete })
}

/// Check `host` against every pattern; patterns are tried in parallel but the
/// reported violation is the first in list order.
pub fn avoids_all(
    host: &MultiPerm,
    patterns: &[MultiPerm],
) -> Result<AvoidanceVerdict, MatchError> {
    for p in patterns {
        check_dims(p, host)?;
    }
    let hit = exec::find_map_first(patterns.len(), |i| {
        find_embedding(&patterns[i], host)
            .expect("dims checked above")
            .map(|e| (i, e))
    });
    Ok(AvoidanceVerdict { violation: hit })
}
