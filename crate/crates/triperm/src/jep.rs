//! Constructive joint embedding, order-merge machinery, brute-force search,
//! and tiling extraction.
//!
//! The first-order joint embedding of members `A` and `B` places `A` before
//! `B` in orders 1 and 3 (so no copy can straddle the factors) and then
//! builds order 2 as a sequence of segments: both factors' path regions at
//! the bottom (the second factor's path region below everything of the
//! first), then one segment per weak coordinate in antilexicographic order,
//! then the factors' leftover regions between segments, never interleaved.
//! Within the segment of a coordinate carrying a connector interval in the
//! first factor and a tile set in the second, the parts are arranged so every
//! first-factor connector captures exactly the tiles of the type the supplied
//! tiling prescribes; at every other coordinate the factors' interval cores
//! are made to overlap without any capture being forced. Cross-factor
//! interval intersections are audited afterwards: they must occur exactly
//! between intervals with equal weak coordinates.
//!
//! The doubled-variant procedure splits both members at the second-order
//! boundary between low- and high-superscript copies and runs the merge on
//! each half independently, orienting each half so the connector-bearing side
//! comes first when exactly one side has connectors.

use crate::classes::{
    check_membership, check_membership_with_budget, check_tagged, ClassDescriptor, ClassError,
};
use crate::gadgets::{Role, Variant};
use crate::semantics::{
    detect_copies, IntervalKind, SemanticsError, TaggedStructure, DEFAULT_COPY_BUDGET,
};
use crate::structure::{MultiPerm, PointId};
use crate::tiling::{check_tiling, StringTilingProblem, TileId, Tiling};
use crate::exec;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JepError {
    #[error("factor {which} is not a class member ({count} violations, first: {first})")]
    NotAMember { which: char, count: usize, first: String },
    #[error("tiling invalid for the required window: {detail}")]
    InvalidTiling { detail: String },
    #[error("alignment inconsistent: {detail}")]
    AlignmentInconsistent { detail: String },
    #[error("order completion failed: {detail}")]
    CompletionFailed { detail: String },
    #[error("factor {which} has no clean split between low and high superscripts")]
    SplitNotFound { which: char },
    #[error("window cell ({x},{y}) has no tiled grid point")]
    UntiledCell { x: u32, y: u32 },
    #[error("factors have {size} points, over the search budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("procedure applies to the other class variant")]
    WrongVariant,
    #[error("{0}")]
    Class(#[from] ClassError),
    #[error("{0}")]
    Semantics(#[from] SemanticsError),
}

/// Which factor a merged point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Factor {
    A,
    B,
}

/// A joint embedding with the factor embeddings made explicit.
#[derive(Debug, Clone)]
pub struct JepOutput {
    pub structure: MultiPerm,
    /// Image of factor A's points, in A's first-order listing.
    pub a_points: Vec<PointId>,
    /// Image of factor B's points.
    pub b_points: Vec<PointId>,
}

// ---------------------------------------------------------------------------
// Merge states over order 2.
// ---------------------------------------------------------------------------

/// A partially merged pair: orders 1 and 3 place all of `a` before all of
/// `b`; order 2 is total inside each factor and constrained across factors by
/// slot bounds. The slot of a `b` point counts the `a` points below it, so
/// constraints are intervals `lo..=hi` per `b` point, kept monotone along
/// `b`'s own order.
#[derive(Debug, Clone)]
pub struct MergeState {
    pub a: TaggedStructure,
    pub b: TaggedStructure,
    /// Indexed by the order-2 rank of the `b` point.
    lo: Vec<usize>,
    hi: Vec<usize>,
}

/// A completed merge with the chosen interleaving.
#[derive(Debug, Clone)]
pub struct MergedOrder {
    pub sequence: Vec<(Factor, PointId)>,
    pub output: JepOutput,
}

impl MergeState {
    pub fn new(a: TaggedStructure, b: TaggedStructure) -> MergeState {
        let nb = b.base.len();
        let na = a.base.len();
        MergeState { a, b, lo: vec![0; nb], hi: vec![na; nb] }
    }

    fn b_rank(&self, b_pt: PointId) -> usize {
        self.b.base.rank(b_pt, 2) as usize
    }

    /// Demand `a_pt` strictly below `b_pt` in the merged order 2.
    pub fn require_below(&mut self, a_pt: PointId, b_pt: PointId) {
        let slot = self.a.base.rank(a_pt, 2) as usize + 1;
        let r = self.b_rank(b_pt);
        if self.lo[r] < slot {
            self.lo[r] = slot;
        }
    }

    /// Demand `b_pt` strictly below `a_pt`.
    pub fn require_above(&mut self, b_pt: PointId, a_pt: PointId) {
        let slot = self.a.base.rank(a_pt, 2) as usize;
        let r = self.b_rank(b_pt);
        if self.hi[r] > slot {
            self.hi[r] = slot;
        }
    }

    /// Monotone closure of the slot bounds; errors with a witness rank when
    /// some point's bounds cross.
    fn closed_bounds(&self) -> Result<(Vec<usize>, Vec<usize>), JepError> {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for r in 1..lo.len() {
            lo[r] = lo[r].max(lo[r - 1]);
        }
        for r in (0..hi.len().saturating_sub(1)).rev() {
            hi[r] = hi[r].min(hi[r + 1]);
        }
        for r in 0..lo.len() {
            if lo[r] > hi[r] {
                return Err(JepError::AlignmentInconsistent {
                    detail: format!(
                        "second-factor point at rank {r} needs slot {}..{}",
                        lo[r], hi[r]
                    ),
                });
            }
        }
        Ok((lo, hi))
    }

    /// Align two closed order-2 intervals, given by their endpoint points:
    /// everything below either interval in its factor goes below the other
    /// interval, and symmetrically above. Errors when the extension crosses
    /// the existing bounds.
    pub fn align_intervals(
        &mut self,
        i_a: (PointId, PointId),
        i_b: (PointId, PointId),
    ) -> Result<(), JepError> {
        let (a_lo, a_hi) = i_a;
        let (b_lo, b_hi) = i_b;
        let rb_lo = self.b_rank(b_lo);
        let rb_hi = self.b_rank(b_hi);
        // B points below the B interval go below the bottom of the A interval.
        if rb_lo > 0 {
            let below = self.b_point_at_rank(rb_lo - 1);
            self.require_above(below, a_lo);
        }
        if rb_hi + 1 < self.b.base.len() {
            let above = self.b_point_at_rank(rb_hi + 1);
            self.require_below(a_hi, above);
        }
        // A points below the A interval go below the bottom of the B interval.
        self.require_below_all_under(a_lo, b_lo);
        self.require_above_all_over(a_hi, b_hi);
        self.closed_bounds().map(|_| ())
    }

    fn b_point_at_rank(&self, rank: usize) -> PointId {
        (0..self.b.base.len())
            .find(|&p| self.b.base.rank(p, 2) as usize == rank)
            .expect("rank in range")
    }

    fn require_below_all_under(&mut self, a_lo: PointId, b_lo: PointId) {
        // Every a strictly below a_lo must be below b_lo; the closure handles
        // the rest, so it is enough to bound b_lo from below by a_lo's
        // predecessor region.
        let r = self.a.base.rank(a_lo, 2) as usize;
        let rb = self.b_rank(b_lo);
        if self.lo[rb] < r {
            self.lo[rb] = r;
        }
    }

    fn require_above_all_over(&mut self, a_hi: PointId, b_hi: PointId) {
        let r = self.a.base.rank(a_hi, 2) as usize;
        let rb = self.b_rank(b_hi);
        if self.hi[rb] > r + 1 {
            self.hi[rb] = r + 1;
        }
    }

    /// Complete order 2 deterministically: each second-factor point takes the
    /// highest slot its constraints allow. Afterwards the cross-factor
    /// interval intersections are audited against the set forced by the
    /// constraints; an unforced intersection fails the completion.
    pub fn complete_order(&self) -> Result<MergedOrder, JepError> {
        let (lo, hi) = self.closed_bounds()?;
        let na = self.a.base.len();
        let nb = self.b.base.len();
        let b_by_rank: Vec<PointId> = {
            let mut v: Vec<PointId> = (0..nb).collect();
            v.sort_by_key(|&p| self.b.base.rank(p, 2));
            v
        };
        let a_by_rank: Vec<PointId> = {
            let mut v: Vec<PointId> = (0..na).collect();
            v.sort_by_key(|&p| self.a.base.rank(p, 2));
            v
        };
        let mut sequence: Vec<(Factor, PointId)> = Vec::with_capacity(na + nb);
        let mut bi = 0usize;
        for slot in 0..=na {
            while bi < nb && hi[bi] == slot {
                sequence.push((Factor::B, b_by_rank[bi]));
                bi += 1;
            }
            if slot < na {
                sequence.push((Factor::A, a_by_rank[slot]));
            }
        }
        debug_assert_eq!(sequence.len(), na + nb);
        let output = assemble(&self.a.base, &self.b.base, &sequence);
        self.audit_against_forced(&lo, &hi, &output)?;
        Ok(MergedOrder { sequence, output })
    }

    fn audit_against_forced(
        &self,
        lo: &[usize],
        hi: &[usize],
        output: &JepOutput,
    ) -> Result<(), JepError> {
        let forced_below = |a_pt: PointId, b_pt: PointId| -> bool {
            lo[self.b_rank(b_pt)] > self.a.base.rank(a_pt, 2) as usize
        };
        let forced_above = |b_pt: PointId, a_pt: PointId| -> bool {
            hi[self.b_rank(b_pt)] <= self.a.base.rank(a_pt, 2) as usize
        };
        let out_rank =
            |f: Factor, p: PointId| -> u32 {
                let id = match f {
                    Factor::A => output.a_points[p],
                    Factor::B => output.b_points[p],
                };
                output.structure.rank(id, 2)
            };
        for ia in &self.a.intervals {
            for ib in &self.b.intervals {
                let actual = out_rank(Factor::A, ia.bottom) < out_rank(Factor::B, ib.top)
                    && out_rank(Factor::B, ib.bottom) < out_rank(Factor::A, ia.top);
                let forced =
                    forced_below(ia.bottom, ib.top) && forced_above(ib.bottom, ia.top);
                if actual && !forced {
                    return Err(JepError::CompletionFailed {
                        detail: format!(
                            "unforced intersection between intervals at {:?} and {:?}",
                            (ia.bottom, ia.top),
                            (ib.bottom, ib.top)
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Build the joint structure from a merge sequence: factor A first in orders
/// 1 and 3, order 2 from the sequence.
fn assemble(a: &MultiPerm, b: &MultiPerm, sequence: &[(Factor, PointId)]) -> JepOutput {
    let na = a.len();
    let nb = b.len();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(na + nb);
    for p in 0..na {
        rows.push(vec![p as u32, 0, a.rank(p, 3)]);
    }
    for p in 0..nb {
        rows.push(vec![(na + p) as u32, 0, na as u32 + b.rank(p, 3)]);
    }
    for (rank2, &(f, p)) in sequence.iter().enumerate() {
        let id = match f {
            Factor::A => p,
            Factor::B => na + p,
        };
        rows[id][1] = rank2 as u32;
    }
    let structure = MultiPerm::from_rank_rows_with_dims(3, rows).expect("merge rows are valid");
    JepOutput {
        structure,
        a_points: (0..na).collect(),
        b_points: (na..na + nb).collect(),
    }
}

// ---------------------------------------------------------------------------
// The tiling-driven first-order joint embedding.
// ---------------------------------------------------------------------------

type Coord = (u32, u32);

fn antilex(c: Coord) -> (u32, u32) {
    (c.1, c.0)
}

struct FactorPlan {
    /// Point segments in the factor's own order-2 order.
    start_low: Vec<PointId>,
    start_high: Vec<PointId>,
    /// Per coordinate: the block's points, bottom to top.
    blocks: BTreeMap<(u32, u32), Vec<PointId>>,
    /// Per coordinate key (antilex): points between this block and the next.
    gaps: BTreeMap<(u32, u32), Vec<PointId>>,
    /// Interval bookkeeping at each coordinate: (max bottom rank, min top
    /// rank, has connector, has tile set).
    interval_info: BTreeMap<(u32, u32), (u32, u32, bool, bool)>,
}

fn factor_plan(
    t: &TaggedStructure,
    pairing: (u8, u8),
    which: char,
) -> Result<FactorPlan, JepError> {
    let wc = t.weak_coordinates(pairing);
    if !wc.unique {
        return Err(JepError::CompletionFailed {
            detail: format!("factor {which} has ambiguous weak coordinates"),
        });
    }
    let ids = t.pairing_intervals(pairing);
    // Point-level coordinates; seam points take their least coordinate.
    let mut point_coord: BTreeMap<PointId, (u32, u32)> = BTreeMap::new();
    for (&p, coords) in t.point_weak_coordinates(&wc, pairing).iter() {
        let least = coords.iter().copied().min_by_key(|&c| antilex(c)).unwrap();
        point_coord.insert(p, antilex(least));
    }
    // Block spans per coordinate (antilex key).
    let mut spans: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
    for (&p, &key) in &point_coord {
        let r = t.base.rank(p, 2);
        let e = spans.entry(key).or_insert((r, r));
        e.0 = e.0.min(r);
        e.1 = e.1.max(r);
    }
    let ordered: Vec<((u32, u32), (u32, u32))> =
        spans.iter().map(|(&k, &v)| (k, v)).collect();
    for w in ordered.windows(2) {
        if w[0].1 .1 >= w[1].1 .0 {
            return Err(JepError::CompletionFailed {
                detail: format!("factor {which} has overlapping coordinate blocks"),
            });
        }
    }
    // Interval info per coordinate.
    let mut interval_info: BTreeMap<(u32, u32), (u32, u32, bool, bool)> = BTreeMap::new();
    for &i in &ids {
        if let Some(c) = wc.coordinate(i) {
            let key = antilex(c);
            let iv = &t.intervals[i];
            let bot = t.base.rank(iv.bottom, 2);
            let top = t.base.rank(iv.top, 2);
            let e = interval_info.entry(key).or_insert((bot, top, false, false));
            e.0 = e.0.max(bot);
            e.1 = e.1.min(top);
            match iv.kind {
                IntervalKind::Connector => e.2 = true,
                IntervalKind::TileSet => e.3 = true,
            }
        }
    }
    for (key, info) in &interval_info {
        if info.0 >= info.1 {
            return Err(JepError::CompletionFailed {
                detail: format!(
                    "factor {which}: intervals at coordinate {:?} have empty common core",
                    (key.1, key.0)
                ),
            });
        }
    }
    // Segment every point.
    let n = t.base.len();
    let by_rank: Vec<PointId> = {
        let mut v: Vec<PointId> = (0..n).collect();
        v.sort_by_key(|&p| t.base.rank(p, 2));
        v
    };
    // First order-2 rank belonging to a grid- or tile-role copy of the pairing.
    let split_rank: u32 = t
        .copies
        .iter()
        .filter(|c| {
            (c.role == Role::G && c.superscript == pairing.0)
                || (c.role == Role::T && c.superscript == pairing.1)
        })
        .flat_map(|c| c.points.iter().map(|&p| t.base.rank(p, 2)))
        .min()
        .unwrap_or(n as u32);
    let mut plan = FactorPlan {
        start_low: Vec::new(),
        start_high: Vec::new(),
        blocks: BTreeMap::new(),
        gaps: BTreeMap::new(),
        interval_info,
    };
    let block_keys: Vec<(u32, u32)> = spans.keys().copied().collect();
    let mut current_block: usize = 0; // index into block_keys of the next block
    let mut last_key: Option<(u32, u32)> = None;
    for &p in &by_rank {
        let r = t.base.rank(p, 2);
        // advance past finished blocks
        while current_block < block_keys.len() && r > spans[&block_keys[current_block]].1 {
            last_key = Some(block_keys[current_block]);
            current_block += 1;
        }
        if current_block < block_keys.len() {
            let key = block_keys[current_block];
            let (lo, hi) = spans[&key];
            if r >= lo && r <= hi {
                plan.blocks.entry(key).or_default().push(p);
                continue;
            }
        }
        match last_key {
            None => {
                if r < split_rank {
                    plan.start_low.push(p);
                } else {
                    plan.start_high.push(p);
                }
            }
            Some(key) => plan.gaps.entry(key).or_default().push(p),
        }
    }
    Ok(plan)
}

/// The per-coordinate segment arrangement.
fn coordinate_segment(
    plan_a: &FactorPlan,
    plan_b: &FactorPlan,
    ta: &TaggedStructure,
    tb: &TaggedStructure,
    key: (u32, u32),
    theta: &Tiling,
) -> Result<Vec<(Factor, PointId)>, JepError> {
    let block_a = plan_a.blocks.get(&key);
    let block_b = plan_b.blocks.get(&key);
    let mut seg = Vec::new();
    match (block_a, block_b) {
        (Some(pts), None) => seg.extend(pts.iter().map(|&p| (Factor::A, p))),
        (None, Some(pts)) => seg.extend(pts.iter().map(|&p| (Factor::B, p))),
        (Some(pa), Some(pb)) => {
            let (.., a_conn, _a_tile) = plan_a.interval_info[&key];
            let (.., _b_conn, b_tile) = plan_b.interval_info[&key];
            let (_maxbot_a, mintop_a, ..) = plan_a.interval_info[&key];
            let (maxbot_b, mintop_b, ..) = plan_b.interval_info[&key];
            let a_low: Vec<PointId> =
                pa.iter().copied().filter(|&p| ta.base.rank(p, 2) < mintop_a).collect();
            let a_high: Vec<PointId> =
                pa.iter().copied().filter(|&p| ta.base.rank(p, 2) >= mintop_a).collect();
            if a_conn && b_tile {
                let (x, y) = (key.1, key.0);
                let tile = theta.at(x as usize, y as usize).ok_or(JepError::InvalidTiling {
                    detail: format!("tiling does not cover ({x},{y})"),
                })?;
                match tile {
                    1 => {
                        let b_low: Vec<PointId> = pb
                            .iter()
                            .copied()
                            .filter(|&p| tb.base.rank(p, 2) <= maxbot_b)
                            .collect();
                        let b_high: Vec<PointId> = pb
                            .iter()
                            .copied()
                            .filter(|&p| tb.base.rank(p, 2) > maxbot_b)
                            .collect();
                        seg.extend(a_low.iter().map(|&p| (Factor::A, p)));
                        seg.extend(b_low.iter().map(|&p| (Factor::B, p)));
                        seg.extend(a_high.iter().map(|&p| (Factor::A, p)));
                        seg.extend(b_high.iter().map(|&p| (Factor::B, p)));
                    }
                    2 => {
                        let b_low: Vec<PointId> = pb
                            .iter()
                            .copied()
                            .filter(|&p| tb.base.rank(p, 2) < mintop_b)
                            .collect();
                        let b_high: Vec<PointId> = pb
                            .iter()
                            .copied()
                            .filter(|&p| tb.base.rank(p, 2) >= mintop_b)
                            .collect();
                        seg.extend(b_low.iter().map(|&p| (Factor::B, p)));
                        seg.extend(a_low.iter().map(|&p| (Factor::A, p)));
                        seg.extend(b_high.iter().map(|&p| (Factor::B, p)));
                        seg.extend(a_high.iter().map(|&p| (Factor::A, p)));
                    }
                    other => {
                        return Err(JepError::InvalidTiling {
                            detail: format!("tile type {other} out of range"),
                        })
                    }
                }
            } else {
                // Plain core overlap, no capture forced.
                let b_low: Vec<PointId> = pb
                    .iter()
                    .copied()
                    .filter(|&p| tb.base.rank(p, 2) < mintop_b)
                    .collect();
                let b_high: Vec<PointId> = pb
                    .iter()
                    .copied()
                    .filter(|&p| tb.base.rank(p, 2) >= mintop_b)
                    .collect();
                seg.extend(a_low.iter().map(|&p| (Factor::A, p)));
                seg.extend(b_low.iter().map(|&p| (Factor::B, p)));
                seg.extend(a_high.iter().map(|&p| (Factor::A, p)));
                seg.extend(b_high.iter().map(|&p| (Factor::B, p)));
            }
        }
        (None, None) => {}
    }
    Ok(seg)
}

/// Plan the full merge sequence for one pairing.
fn plan_merge(
    ta: &TaggedStructure,
    tb: &TaggedStructure,
    pairing: (u8, u8),
    theta: &Tiling,
) -> Result<Vec<(Factor, PointId)>, JepError> {
    let plan_a = factor_plan(ta, pairing, 'A')?;
    let plan_b = factor_plan(tb, pairing, 'B')?;
    let mut seq: Vec<(Factor, PointId)> = Vec::with_capacity(ta.base.len() + tb.base.len());
    seq.extend(plan_b.start_low.iter().map(|&p| (Factor::B, p)));
    seq.extend(plan_a.start_low.iter().map(|&p| (Factor::A, p)));
    seq.extend(plan_a.start_high.iter().map(|&p| (Factor::A, p)));
    seq.extend(plan_b.start_high.iter().map(|&p| (Factor::B, p)));
    let keys: BTreeSet<(u32, u32)> = plan_a
        .blocks
        .keys()
        .chain(plan_b.blocks.keys())
        .copied()
        .collect();
    for &key in &keys {
        seq.extend(coordinate_segment(&plan_a, &plan_b, ta, tb, key, theta)?);
        if let Some(gap) = plan_a.gaps.get(&key) {
            seq.extend(gap.iter().map(|&p| (Factor::A, p)));
        }
        if let Some(gap) = plan_b.gaps.get(&key) {
            seq.extend(gap.iter().map(|&p| (Factor::B, p)));
        }
    }
    if seq.len() != ta.base.len() + tb.base.len() {
        return Err(JepError::CompletionFailed {
            detail: format!(
                "merge plan covered {} of {} points",
                seq.len(),
                ta.base.len() + tb.base.len()
            ),
        });
    }
    Ok(seq)
}

/// Plan constraints loaded into a merge state, so the completion runs through
/// the same slot machinery as standalone alignments.
fn merge_via_state(
    ta: &TaggedStructure,
    tb: &TaggedStructure,
    seq: &[(Factor, PointId)],
) -> Result<MergedOrder, JepError> {
    let mut state = MergeState::new(ta.clone(), tb.clone());
    let mut last_a: Option<PointId> = None;
    let mut pending_b: Vec<PointId> = Vec::new();
    for &(f, p) in seq {
        match f {
            Factor::B => pending_b.push(p),
            Factor::A => {
                for &b in &pending_b {
                    if let Some(a) = last_a {
                        state.require_below(a, b);
                    }
                    state.require_above(b, p);
                }
                pending_b.clear();
                last_a = Some(p);
            }
        }
    }
    for &b in &pending_b {
        if let Some(a) = last_a {
            state.require_below(a, b);
        }
    }
    state.complete_order()
}

fn tag_and_check(
    s: &MultiPerm,
    c: &ClassDescriptor,
    which: char,
) -> Result<TaggedStructure, JepError> {
    let tagged = detect_copies(s, &c.gadgets, DEFAULT_COPY_BUDGET)?;
    let verdict = check_tagged(&tagged, c, None);
    if !verdict.member {
        return Err(JepError::NotAMember {
            which,
            count: verdict.violations.len(),
            first: verdict
                .violations
                .first()
                .map(|v| format!("constraint {}: {}", v.constraint, v.note))
                .unwrap_or_default(),
        });
    }
    Ok(tagged)
}

/// Window needed to validate a tiling against the coordinates present.
fn needed_window(plans: &[&TaggedStructure], pairings: &[(u8, u8)]) -> (usize, usize) {
    let mut w = 0usize;
    let mut h = 0usize;
    for t in plans {
        for &pairing in pairings {
            let wc = t.weak_coordinates(pairing);
            for set in &wc.assignment {
                for &(x, y) in set {
                    w = w.max(x as usize + 1);
                    h = h.max(y as usize + 1);
                }
            }
        }
    }
    (w.max(1), h.max(1))
}

fn validate_theta(
    theta: &Tiling,
    problem: &StringTilingProblem,
    w: usize,
    h: usize,
) -> Result<(), JepError> {
    if !theta.covers(w, h) {
        return Err(JepError::InvalidTiling {
            detail: format!("tiling does not cover the {w}x{h} window"),
        });
    }
    let verdict = check_tiling(problem, theta, w, h).map_err(|e| JepError::InvalidTiling {
        detail: e.to_string(),
    })?;
    if !verdict.valid() {
        return Err(JepError::InvalidTiling {
            detail: format!("{} rule violations on the {w}x{h} window", verdict.violations.len()),
        });
    }
    Ok(())
}

/// Cross-factor intersections must pair intervals of equal weak coordinates.
fn audit_cross_intersections(
    out: &JepOutput,
    ta: &TaggedStructure,
    tb: &TaggedStructure,
    pairing: (u8, u8),
) -> Result<(), JepError> {
    let wa = ta.weak_coordinates(pairing);
    let wb = tb.weak_coordinates(pairing);
    let rank = |id: PointId| out.structure.rank(id, 2);
    for (i, ia) in ta.intervals.iter().enumerate() {
        for (j, ib) in tb.intervals.iter().enumerate() {
            let actual = rank(out.a_points[ia.bottom]) < rank(out.b_points[ib.top])
                && rank(out.b_points[ib.bottom]) < rank(out.a_points[ia.top]);
            let allowed = match (wa.coordinate(i), wb.coordinate(j)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            };
            if actual != allowed {
                return Err(JepError::CompletionFailed {
                    detail: format!(
                        "cross intersection audit failed for intervals {i},{j}: actual={actual} allowed={allowed}"
                    ),
                });
            }
        }
    }
    Ok(())
}

/// First-order joint embedding of two plain-variant members, driven by a
/// valid tiling: the output contains both factors, places the first before
/// the second in orders 1 and 3, and realizes the tiling through captures.
pub fn jep_less1(
    a: &MultiPerm,
    b: &MultiPerm,
    theta: &Tiling,
    c: &ClassDescriptor,
) -> Result<JepOutput, JepError> {
    if c.variant != Variant::P {
        return Err(JepError::WrongVariant);
    }
    let ta = tag_and_check(a, c, 'A')?;
    let tb = tag_and_check(b, c, 'B')?;
    let pairing = (0u8, 1u8);
    let (w, h) = needed_window(&[&ta, &tb], &[pairing]);
    validate_theta(theta, &c.problem, w, h)?;
    let seq = plan_merge(&ta, &tb, pairing, theta)?;
    let merged = merge_via_state(&ta, &tb, &seq)?;
    audit_cross_intersections(&merged.output, &ta, &tb, pairing)?;
    let verdict = check_membership(&merged.output.structure, c)?;
    if !verdict.member {
        return Err(JepError::CompletionFailed {
            detail: format!(
                "joint structure fails membership: constraint {} ({})",
                verdict.violations[0].constraint, verdict.violations[0].note
            ),
        });
    }
    Ok(merged.output)
}

// ---------------------------------------------------------------------------
// Doubled-variant joint embedding.
// ---------------------------------------------------------------------------

struct Half {
    /// Global point ids, in the factor's order.
    points: Vec<PointId>,
    structure: MultiPerm,
}

fn split_factor(
    s: &MultiPerm,
    t: &TaggedStructure,
    which: char,
) -> Result<(Half, Half), JepError> {
    let boundary: u32 = t
        .copies
        .iter()
        .filter(|c| c.superscript >= 2)
        .flat_map(|c| c.points.iter().map(|&p| t.base.rank(p, 2)))
        .min()
        .unwrap_or(s.len() as u32);
    let low: Vec<PointId> = (0..s.len()).filter(|&p| s.rank(p, 2) < boundary).collect();
    let high: Vec<PointId> = (0..s.len()).filter(|&p| s.rank(p, 2) >= boundary).collect();
    let low_ok = t
        .copies
        .iter()
        .filter(|c| c.superscript <= 1)
        .all(|c| c.points.iter().all(|&p| s.rank(p, 2) < boundary));
    if !low_ok {
        return Err(JepError::SplitNotFound { which });
    }
    Ok((
        Half { structure: s.induced_substructure(&low), points: low },
        Half { structure: s.induced_substructure(&high), points: high },
    ))
}

/// Joint embedding of two doubled-variant members: split both at the
/// low/high superscript boundary, merge the low halves under pairing (0, 1)
/// and the high halves under (2, 3), each half oriented so a side carrying
/// connector copies of the pairing goes first, and stack the merges.
pub fn jep_q(
    a: &MultiPerm,
    b: &MultiPerm,
    theta: &Tiling,
    c: &ClassDescriptor,
) -> Result<JepOutput, JepError> {
    if c.variant != Variant::Q {
        return Err(JepError::WrongVariant);
    }
    let ta = tag_and_check(a, c, 'A')?;
    let tb = tag_and_check(b, c, 'B')?;
    let (w, h) = needed_window(&[&ta, &tb], &[(0, 1), (2, 3)]);
    validate_theta(theta, &c.problem, w, h)?;
    let (a_low, a_high) = split_factor(a, &ta, 'A')?;
    let (b_low, b_high) = split_factor(b, &tb, 'B')?;

    let na = a.len();
    let halves: [(&Half, &Half, (u8, u8)); 2] =
        [(&a_low, &b_low, (0, 1)), (&a_high, &b_high, (2, 3))];
    // Per half: merge sequence in joint point ids (factor A keeps its ids,
    // factor B is offset by `na`), plus whether the sides were swapped.
    let mut merged_halves: Vec<(Vec<PointId>, bool)> = Vec::new();
    for (ha, hb, pairing) in halves {
        let tha = detect_copies(&ha.structure, &c.gadgets, DEFAULT_COPY_BUDGET)?;
        let thb = detect_copies(&hb.structure, &c.gadgets, DEFAULT_COPY_BUDGET)?;
        let has_conn = |t: &TaggedStructure| {
            t.copies
                .iter()
                .any(|cp| cp.role == Role::G && cp.superscript == pairing.0)
        };
        let swap = !has_conn(&tha) && has_conn(&thb);
        let (tf, ts) = if swap { (&thb, &tha) } else { (&tha, &thb) };
        let seq = plan_merge(tf, ts, pairing, theta)?;
        let merged = merge_via_state(tf, ts, &seq)?;
        audit_cross_intersections(&merged.output, tf, ts, pairing)?;
        // Resolve merge-local factors back to joint ids.
        let to_joint = |first: bool, p: PointId| -> PointId {
            let a_side = first != swap; // merge factor A is the unswapped side
            if a_side {
                ha.points[p]
            } else {
                na + hb.points[p]
            }
        };
        let global_seq: Vec<PointId> = merged
            .sequence
            .iter()
            .map(|&(f, p)| to_joint(matches!(f, Factor::A), p))
            .collect();
        merged_halves.push((global_seq, swap));
    }

    // Orders 1 and 3: topological order over the four half-blocks. Edges come
    // from each factor's internal order (when its halves are separated) and
    // from the chosen orientation of each merge.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let sep = |s: &MultiPerm, low: &Half, high: &Half| -> Option<bool> {
        // Some(true): low entirely first in order 1; Some(false): high first.
        if low.points.is_empty() || high.points.is_empty() {
            return Some(true);
        }
        let max_low = low.points.iter().map(|&p| s.rank(p, 1)).max().unwrap();
        let min_high = high.points.iter().map(|&p| s.rank(p, 1)).min().unwrap();
        if max_low < min_high {
            return Some(true);
        }
        let max_high = high.points.iter().map(|&p| s.rank(p, 1)).max().unwrap();
        let min_low = low.points.iter().map(|&p| s.rank(p, 1)).min().unwrap();
        if max_high < min_low {
            return Some(false);
        }
        None
    };
    let mut layout_ok = true;
    match sep(a, &a_low, &a_high) {
        Some(true) => edges.push((0, 1)),
        Some(false) => edges.push((1, 0)),
        None => layout_ok = false,
    }
    match sep(b, &b_low, &b_high) {
        Some(true) => edges.push((2, 3)),
        Some(false) => edges.push((3, 2)),
        None => layout_ok = false,
    }
    // Orientation edges: first side of each merge before the second.
    edges.push(if merged_halves[0].1 { (2, 0) } else { (0, 2) });
    edges.push(if merged_halves[1].1 { (3, 1) } else { (1, 3) });
    let block_order = if layout_ok { topo_order(4, &edges) } else { None };
    let block_order = match block_order {
        Some(o) => o,
        // Fall back to factor A wholly before factor B; per-half orientation
        // is then forced, so recompute the merges unswapped.
        None => {
            return jep_q_fallback(a, b, theta, c, &ta, &tb, &a_low, &a_high, &b_low, &b_high)
        }
    };

    let blocks: [&Half; 4] = [&a_low, &a_high, &b_low, &b_high];
    let mut order1: Vec<PointId> = Vec::with_capacity(na + b.len());
    for &bi in &block_order {
        let half = blocks[bi];
        let global: Vec<PointId> = half
            .points
            .iter()
            .map(|&p| if bi >= 2 { na + p } else { p })
            .collect();
        order1.extend(global);
    }
    // Order 3 mirrors order 1 at block level; within each factor order 3 is
    // the factor's own, so sort each block's points by the factor's order 3.
    let mut order3: Vec<PointId> = Vec::new();
    for &bi in &block_order {
        let half = blocks[bi];
        let factor = if bi >= 2 { b } else { a };
        let mut pts = half.points.clone();
        pts.sort_by_key(|&p| factor.rank(p, 3));
        order3.extend(pts.iter().map(|&p| if bi >= 2 { na + p } else { p }));
    }
    let mut order2: Vec<PointId> = Vec::new();
    order2.extend(&merged_halves[0].0);
    order2.extend(&merged_halves[1].0);

    let out = build_from_orders(a, b, &order1, &order2, &order3);
    let verdict = check_membership(&out.structure, c)?;
    if !verdict.member {
        return Err(JepError::CompletionFailed {
            detail: format!(
                "doubled joint structure fails membership: constraint {} ({})",
                verdict.violations[0].constraint, verdict.violations[0].note
            ),
        });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn jep_q_fallback(
    a: &MultiPerm,
    b: &MultiPerm,
    theta: &Tiling,
    c: &ClassDescriptor,
    _ta: &TaggedStructure,
    _tb: &TaggedStructure,
    a_low: &Half,
    a_high: &Half,
    b_low: &Half,
    b_high: &Half,
) -> Result<JepOutput, JepError> {
    let na = a.len();
    let mut order2: Vec<PointId> = Vec::new();
    for (ha, hb, pairing) in [(a_low, b_low, (0u8, 1u8)), (a_high, b_high, (2, 3))] {
        let tha = detect_copies(&ha.structure, &c.gadgets, DEFAULT_COPY_BUDGET)?;
        let thb = detect_copies(&hb.structure, &c.gadgets, DEFAULT_COPY_BUDGET)?;
        let seq = plan_merge(&tha, &thb, pairing, theta)?;
        let merged = merge_via_state(&tha, &thb, &seq)?;
        audit_cross_intersections(&merged.output, &tha, &thb, pairing)?;
        order2.extend(merged.sequence.iter().map(|&(f, p)| match f {
            Factor::A => ha.points[p],
            Factor::B => na + hb.points[p],
        }));
    }
    let order1: Vec<PointId> = (0..na + b.len()).collect();
    let mut order3: Vec<PointId> = (0..na).collect();
    order3.sort_by_key(|&p| a.rank(p, 3));
    let mut b3: Vec<PointId> = (0..b.len()).collect();
    b3.sort_by_key(|&p| b.rank(p, 3));
    order3.extend(b3.into_iter().map(|p| na + p));
    let out = build_from_orders(a, b, &order1, &order2, &order3);
    let verdict = check_membership(&out.structure, c)?;
    if !verdict.member {
        return Err(JepError::CompletionFailed {
            detail: "fallback doubled joint structure fails membership".into(),
        });
    }
    Ok(out)
}

fn build_from_orders(
    a: &MultiPerm,
    b: &MultiPerm,
    order1: &[PointId],
    order2: &[PointId],
    order3: &[PointId],
) -> JepOutput {
    let na = a.len();
    let total = na + b.len();
    let mut rank1 = vec![0u32; total];
    let mut rank2 = vec![0u32; total];
    let mut rank3 = vec![0u32; total];
    for (r, &p) in order1.iter().enumerate() {
        rank1[p] = r as u32;
    }
    for (r, &p) in order2.iter().enumerate() {
        rank2[p] = r as u32;
    }
    for (r, &p) in order3.iter().enumerate() {
        rank3[p] = r as u32;
    }
    let rows: Vec<Vec<u32>> = (0..total).map(|p| vec![rank1[p], rank2[p], rank3[p]]).collect();
    let structure = MultiPerm::from_rank_rows_with_dims(3, rows).expect("orders are permutations");
    // Track the factor images through order 1.
    let mut a_points: Vec<PointId> = vec![0; na];
    let mut b_points: Vec<PointId> = vec![0; b.len()];
    let mut sorted: Vec<PointId> = (0..total).collect();
    sorted.sort_by_key(|&p| rank1[p]);
    let positions: Vec<usize> = {
        let mut v = vec![0usize; total];
        for (pos, &p) in sorted.iter().enumerate() {
            v[p] = pos;
        }
        v
    };
    a_points.copy_from_slice(&positions[..na]);
    b_points.copy_from_slice(&positions[na..]);
    JepOutput { structure, a_points, b_points }
}

fn topo_order(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for _ in 0..n {
        let next = (0..n).find(|&v| !used[v] && indeg[v] == 0)?;
        used[next] = true;
        order.push(next);
        for &(x, y) in edges {
            if x == next {
                indeg[y] -= 1;
            }
        }
    }
    Some(order)
}

// ---------------------------------------------------------------------------
// Brute-force joint embedding search.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BruteMode {
    Disjoint,
    Identify,
}

#[derive(Debug, Clone)]
pub struct BruteWitness {
    pub structure: MultiPerm,
    /// Identified point pairs (A point, B point); empty in disjoint candidates.
    pub matching: Vec<(PointId, PointId)>,
}

/// Default hard cap on `|A| + |B|` for exhaustive search.
pub const DEFAULT_SEARCH_BUDGET: usize = 10;

/// Exhaustive joint-embedding search over all three-order interleavings of
/// the two factors (and, in identify mode, over all compatible point
/// identifications, smallest first — so disjoint candidates are consulted
/// before any identification). The first member found in enumeration order is
/// returned, and the enumeration starts with the factor-blocks candidate.
pub fn brute_force_jep(
    a: &MultiPerm,
    b: &MultiPerm,
    c: &ClassDescriptor,
    mode: BruteMode,
    size_budget: usize,
) -> Result<Option<BruteWitness>, JepError> {
    let size = a.len() + b.len();
    if size > size_budget {
        return Err(JepError::BudgetExceeded { size, budget: size_budget });
    }
    let matchings: Vec<Vec<(PointId, PointId)>> = match mode {
        BruteMode::Disjoint => vec![Vec::new()],
        BruteMode::Identify => enumerate_matchings(a, b),
    };
    for matching in matchings {
        if let Some(witness) = search_matching(a, b, c, &matching)? {
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// All order-compatible partial injections A -> B, ordered by size then
/// lexicographically.
fn enumerate_matchings(a: &MultiPerm, b: &MultiPerm) -> Vec<Vec<(PointId, PointId)>> {
    let mut all: Vec<Vec<(PointId, PointId)>> = Vec::new();
    let mut current: Vec<(PointId, PointId)> = Vec::new();
    fn compatible(a: &MultiPerm, b: &MultiPerm, m: &[(PointId, PointId)], i: PointId, j: PointId) -> bool {
        m.iter().all(|&(i2, j2)| {
            (1..=3).all(|k| a.before(i, i2, k) == b.before(j, j2, k))
        })
    }
    fn rec(
        a: &MultiPerm,
        b: &MultiPerm,
        from: PointId,
        current: &mut Vec<(PointId, PointId)>,
        all: &mut Vec<Vec<(PointId, PointId)>>,
    ) {
        all.push(current.clone());
        for i in from..a.len() {
            for j in 0..b.len() {
                if current.iter().any(|&(_, j2)| j2 == j) {
                    continue;
                }
                if compatible(a, b, current, i, j) {
                    current.push((i, j));
                    rec(a, b, i + 1, current, all);
                    current.pop();
                }
            }
        }
    }
    rec(a, b, 0, &mut current, &mut all);
    all.sort_by_key(|m| (m.len(), m.clone()));
    all
}

/// Search all interleaving triples for one matching; first member wins.
fn search_matching(
    a: &MultiPerm,
    b: &MultiPerm,
    c: &ClassDescriptor,
    matching: &[(PointId, PointId)],
) -> Result<Option<BruteWitness>, JepError> {
    let na = a.len();
    let nb = b.len();
    // Quotient points: all of A, then unmatched B points.
    let b_to_quotient: Vec<usize> = {
        let mut v: Vec<Option<usize>> = vec![None; nb];
        for &(i, j) in matching {
            v[j] = Some(i);
        }
        let mut next = na;
        for slot in v.iter_mut() {
            if slot.is_none() {
                *slot = Some(next);
                next += 1;
            }
        }
        v.into_iter().map(Option::unwrap).collect()
    };
    let total = na + nb - matching.len();
    // Chains per order as poset edges on quotient points.
    let edges_for = |order: usize| -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        let mut a_sorted: Vec<PointId> = (0..na).collect();
        a_sorted.sort_by_key(|&p| a.rank(p, order));
        for w in a_sorted.windows(2) {
            edges.push((w[0], w[1]));
        }
        let mut b_sorted: Vec<PointId> = (0..nb).collect();
        b_sorted.sort_by_key(|&p| b.rank(p, order));
        for w in b_sorted.windows(2) {
            edges.push((b_to_quotient[w[0]], b_to_quotient[w[1]]));
        }
        edges
    };
    let e1 = edges_for(1);
    let e2 = edges_for(2);
    let e3 = edges_for(3);
    let mut ext1: Vec<Vec<u32>> = Vec::new();
    collect_extensions(total, &e1, &mut ext1);
    let found = exec::find_map_first(ext1.len(), |i1| {
        let r1 = &ext1[i1];
        let mut hit: Option<BruteWitness> = None;
        let mut ext2: Vec<Vec<u32>> = Vec::new();
        collect_extensions(total, &e2, &mut ext2);
        'outer: for r2 in &ext2 {
            let mut ext3: Vec<Vec<u32>> = Vec::new();
            collect_extensions(total, &e3, &mut ext3);
            for r3 in &ext3 {
                let rows: Vec<Vec<u32>> =
                    (0..total).map(|p| vec![r1[p], r2[p], r3[p]]).collect();
                let cand = MultiPerm::from_rank_rows_with_dims(3, rows)
                    .expect("extension ranks are valid");
                let verdict = check_membership_with_budget(&cand, c, DEFAULT_COPY_BUDGET)
                    .expect("candidate is 3-ordered");
                if verdict.member {
                    hit = Some(BruteWitness {
                        structure: cand,
                        matching: matching.to_vec(),
                    });
                    break 'outer;
                }
            }
        }
        hit
    });
    Ok(found)
}

fn collect_extensions(n: usize, edges: &[(usize, usize)], out: &mut Vec<Vec<u32>>) {
    let mut indegree = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(x, y) in edges {
        indegree[y] += 1;
        succs[x].push(y);
    }
    let mut rank = vec![0u32; n];
    let mut placed = vec![false; n];
    fn rec(
        n: usize,
        depth: usize,
        indegree: &mut Vec<usize>,
        succs: &Vec<Vec<usize>>,
        placed: &mut Vec<bool>,
        rank: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if depth == n {
            out.push(rank.clone());
            return;
        }
        for v in 0..n {
            if placed[v] || indegree[v] > 0 {
                continue;
            }
            placed[v] = true;
            rank[v] = depth as u32;
            for &w in &succs[v] {
                indegree[w] -= 1;
            }
            rec(n, depth + 1, indegree, succs, placed, rank, out);
            for &w in &succs[v] {
                indegree[w] += 1;
            }
            placed[v] = false;
        }
    }
    rec(n, 0, &mut indegree, &succs, &mut placed, &mut rank, out);
}

// ---------------------------------------------------------------------------
// Tiling extraction.
// ---------------------------------------------------------------------------

/// Read a tiling off a joint structure: cell `(x, y)` takes the type of a
/// tile captured by a connector interval weakly coordinatized `(x, y)`, with
/// type 1 preferred when both types are captured.
pub fn extract_tiling(
    joint: &MultiPerm,
    c: &ClassDescriptor,
    w: usize,
    h: usize,
) -> Result<Tiling, JepError> {
    let tagged = detect_copies(joint, &c.gadgets, DEFAULT_COPY_BUDGET)?;
    let mut grid = vec![vec![0u8; w]; h];
    let mut captured: BTreeMap<(u32, u32), BTreeSet<TileId>> = BTreeMap::new();
    for pairing in c.gadgets.pairings() {
        let wc = tagged.weak_coordinates(pairing);
        for (i, iv) in tagged.intervals.iter().enumerate() {
            if iv.kind != IntervalKind::Connector || iv.superscript != pairing.0 {
                continue;
            }
            let Some(coord) = wc.coordinate(i) else { continue };
            let gc = &tagged.copies[iv.copy];
            for tc in tagged
                .copies
                .iter()
                .filter(|cp| cp.role == Role::T && cp.superscript == pairing.1)
            {
                if tagged.captures_raw_pub(gc, tc.root) {
                    captured.entry(coord).or_default().insert(1);
                }
                if tagged.captures_raw_pub(gc, tc.order2_top) {
                    captured.entry(coord).or_default().insert(2);
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let types = captured.get(&(x as u32, y as u32));
            let tile = match types {
                Some(set) if set.contains(&1) => 1,
                Some(set) if set.contains(&2) => 2,
                _ => {
                    return Err(JepError::UntiledCell { x: x as u32, y: y as u32 });
                }
            };
            grid[y][x] = tile;
        }
    }
    Ok(Tiling::Window { grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{canonical_a, canonical_b};
    use crate::classes::ClassDescriptor;
    use crate::gadgets::build_gadget_family;
    use crate::semantics::tag_from_copies;

    fn p_descriptor() -> ClassDescriptor {
        ClassDescriptor {
            variant: Variant::P,
            gadgets: build_gadget_family(Variant::P, 7, 0).unwrap(),
            problem: StringTilingProblem::isolated_two_example(),
        }
    }

    fn bare_tagged(rows: Vec<Vec<u32>>) -> TaggedStructure {
        tag_from_copies(
            MultiPerm::from_rank_rows_with_dims(3, rows).unwrap(),
            Vec::new(),
        )
    }

    fn chain(n: usize) -> Vec<Vec<u32>> {
        (0..n as u32).map(|i| vec![i, i, i]).collect()
    }

    #[test]
    fn align_without_prior_constraints_succeeds() {
        let a = bare_tagged(chain(4));
        let b = bare_tagged(chain(4));
        let mut m = MergeState::new(a, b);
        m.align_intervals((1, 2), (1, 2)).unwrap();
        let merged = m.complete_order().unwrap();
        assert_eq!(merged.sequence.len(), 8);
    }

    #[test]
    fn conflicting_alignment_is_rejected() {
        let a = bare_tagged(chain(4));
        let b = bare_tagged(chain(4));
        let mut m = MergeState::new(a, b);
        // Force all of B above A, then ask for an alignment that needs a B
        // point below an A point.
        m.require_below(3, 0);
        let r = m.align_intervals((0, 1), (2, 3));
        assert!(matches!(r, Err(JepError::AlignmentInconsistent { .. })));
    }

    #[test]
    fn default_completion_places_unconstrained_b_above_a() {
        let a = bare_tagged(chain(3));
        let b = bare_tagged(chain(2));
        let m = MergeState::new(a, b);
        let merged = m.complete_order().unwrap();
        let kinds: Vec<Factor> = merged.sequence.iter().map(|&(f, _)| f).collect();
        assert_eq!(kinds, vec![Factor::A, Factor::A, Factor::A, Factor::B, Factor::B]);
    }

    #[test]
    fn aligned_blocks_stay_disjoint_and_increasing() {
        // Two interval pairs aligned in increasing order: the slots respect
        // both and the merged order keeps the blocks separated.
        let a = bare_tagged(chain(6));
        let b = bare_tagged(chain(6));
        let mut m = MergeState::new(a, b);
        m.align_intervals((0, 1), (0, 1)).unwrap();
        m.align_intervals((4, 5), (4, 5)).unwrap();
        let merged = m.complete_order().unwrap();
        let pos: BTreeMap<(Factor, PointId), usize> = merged
            .sequence
            .iter()
            .enumerate()
            .map(|(r, &fp)| (fp, r))
            .collect();
        // Lower pair entirely below upper pair, in both factors.
        for &lo in &[(Factor::A, 1), (Factor::B, 1)] {
            for &hi in &[(Factor::A, 4), (Factor::B, 4)] {
                assert!(pos[&lo] < pos[&hi]);
            }
        }
    }

    #[test]
    fn gadget_free_jep_is_vacuous() {
        let c = p_descriptor();
        let a = MultiPerm::from_rank_rows(vec![vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let b = MultiPerm::from_rank_rows(vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        let theta = Tiling::constant(1);
        let out = jep_less1(&a, &b, &theta, &c).unwrap();
        assert_eq!(out.structure.len(), 4);
        // Factors restrict back to themselves.
        assert!(out
            .structure
            .induced_substructure(&out.a_points)
            .canonical_equal(&a));
        assert!(out
            .structure
            .induced_substructure(&out.b_points)
            .canonical_equal(&b));
    }

    #[test]
    fn non_members_are_rejected() {
        let c = p_descriptor();
        let patterns = crate::classes::collect_forbidden(
            &c,
            &[crate::classes::ConstraintId::C2].into_iter().collect(),
            14,
        )
        .unwrap();
        let bad = &patterns[0];
        let good = MultiPerm::from_rank_rows(vec![vec![0, 0, 0]]).unwrap();
        let theta = Tiling::constant(1);
        assert!(matches!(
            jep_less1(bad, &good, &theta, &c),
            Err(JepError::NotAMember { which: 'A', .. })
        ));
        assert!(matches!(
            jep_less1(&good, bad, &theta, &c),
            Err(JepError::NotAMember { which: 'B', .. })
        ));
    }

    #[test]
    fn invalid_tilings_are_rejected() {
        let c = p_descriptor();
        let set = &c.gadgets;
        let a = canonical_a(2, set).unwrap().structure;
        let b = canonical_b(2, set).unwrap().structure;
        // All-2 violates the example problem's rules.
        let theta = Tiling::constant(2);
        assert!(matches!(
            jep_less1(&a, &b, &theta, &c),
            Err(JepError::InvalidTiling { .. })
        ));
    }

    #[test]
    fn canonical_round_trip_all_ones() {
        let c = p_descriptor();
        let set = &c.gadgets;
        let a = canonical_a(2, set).unwrap().structure;
        let b = canonical_b(2, set).unwrap().structure;
        let theta = Tiling::constant(1);
        let out = jep_less1(&a, &b, &theta, &c).unwrap();
        assert!(out
            .structure
            .induced_substructure(&out.a_points)
            .canonical_equal(&a));
        let extracted = extract_tiling(&out.structure, &c, 2, 2).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(extracted.at(x, y), Some(1));
            }
        }
    }

    #[test]
    fn origin_can_be_tiled_with_type_two() {
        let free = ClassDescriptor {
            variant: Variant::P,
            gadgets: build_gadget_family(Variant::P, 7, 0).unwrap(),
            problem: StringTilingProblem::unconstrained(),
        };
        let a = canonical_a(1, &free.gadgets).unwrap().structure;
        let b = canonical_b(1, &free.gadgets).unwrap().structure;
        let theta = Tiling::constant(2);
        let out = jep_less1(&a, &b, &theta, &free).unwrap();
        let extracted = extract_tiling(&out.structure, &free, 1, 1).unwrap();
        assert_eq!(extracted.at(0, 0), Some(2));
    }

    #[test]
    fn brute_force_finds_gadget_free_witnesses() {
        let c = p_descriptor();
        let a = MultiPerm::from_rank_rows(vec![vec![0, 1, 0], vec![1, 0, 1]]).unwrap();
        let b = MultiPerm::from_rank_rows(vec![vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        let w = brute_force_jep(&a, &b, &c, BruteMode::Disjoint, 10)
            .unwrap()
            .expect("witness exists");
        assert_eq!(w.structure.len(), 4);
        assert!(check_membership(&w.structure, &c).unwrap().member);
        // The least witness is the factor-blocks candidate.
        assert!(w
            .structure
            .induced_substructure(&[0, 1])
            .canonical_equal(&a));
        assert!(matches!(
            brute_force_jep(&a, &b, &c, BruteMode::Disjoint, 3),
            Err(JepError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn identify_mode_subsumes_disjoint() {
        let c = p_descriptor();
        let a = MultiPerm::from_rank_rows(vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        let b = a.clone();
        let w = brute_force_jep(&a, &b, &c, BruteMode::Identify, 10)
            .unwrap()
            .expect("witness exists");
        // Smallest matching first: the disjoint candidate wins.
        assert!(w.matching.is_empty());
    }

    #[test]
    fn doubled_variant_jep_tiles_both_grids() {
        let q = ClassDescriptor {
            variant: Variant::Q,
            gadgets: build_gadget_family(Variant::Q, 7, 0).unwrap(),
            problem: StringTilingProblem::isolated_two_example(),
        };
        let a = crate::canonical::canonical_q_a(1, &q.gadgets).unwrap().structure;
        let b = crate::canonical::canonical_q_b(1, &q.gadgets).unwrap().structure;
        let theta = Tiling::constant(1);
        let out = jep_q(&a, &b, &theta, &q).unwrap();
        assert!(out
            .structure
            .induced_substructure(&out.a_points)
            .canonical_equal(&a));
        assert!(out
            .structure
            .induced_substructure(&out.b_points)
            .canonical_equal(&b));
        // Both pairings' origin connectors capture a first tile.
        let tagged = detect_copies(&out.structure, &q.gadgets, DEFAULT_COPY_BUDGET).unwrap();
        for pairing in [(0u8, 1u8), (2, 3)] {
            let mut captured_first_tile = false;
            for iv in tagged.intervals.iter() {
                if iv.kind != IntervalKind::Connector || iv.superscript != pairing.0 {
                    continue;
                }
                let gc = &tagged.copies[iv.copy];
                for tc in tagged
                    .copies
                    .iter()
                    .filter(|cp| cp.role == Role::T && cp.superscript == pairing.1)
                {
                    if tagged.captures_raw_pub(gc, tc.root) {
                        captured_first_tile = true;
                    }
                }
            }
            assert!(captured_first_tile, "pairing {pairing:?}");
        }
    }

    #[test]
    fn untiled_cells_are_reported() {
        let c = p_descriptor();
        let a = canonical_a(1, &c.gadgets).unwrap().structure;
        assert!(matches!(
            extract_tiling(&a, &c, 1, 1),
            Err(JepError::UntiledCell { x: 0, y: 0 })
        ));
    }
}
