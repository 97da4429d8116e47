//! Compiled hereditary classes: a gadget family plus a string tiling problem,
//! with membership decided by evaluating the constraint list over the
//! detected copies, and a materializer for the small forbidden configurations.
//!
//! The class comes in two variants. The plain variant uses superscripts 0
//! (grids) and 1 (tile sets); the doubled variant adds the mirrored pairing
//! (2, 3) with two extra constraints: points may not be shared between
//! differently-superscripted copies at all, and the low-superscript copies
//! must sit entirely below the high-superscript ones in order 2.
//!
//! Membership is semantic: constraints quantify over detected copies and
//! intervals directly. Forbidden-substructure materialization is supported
//! for the configurations small enough to enumerate (constraints 1, 2, 3, 6
//! and the doubled-variant sharing rule) and serves as a cross-validation
//! oracle, not as the primary membership path.

use crate::exec;
use crate::gadgets::{GadgetError, GadgetSet, Role, Variant};
use crate::matcher::{self, Embedding};
use crate::semantics::{
    detect_copies, IntervalId, SemanticsError, TaggedStructure, DEFAULT_COPY_BUDGET,
};
use crate::structure::{MultiPerm, PointId};
use crate::tiling::{StringTilingProblem, TileId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("{0}")]
    Semantics(#[from] SemanticsError),
    #[error("{0}")]
    Gadgets(#[from] GadgetError),
    #[error("constraint {0} is not supported by the materializer")]
    Unsupported(ConstraintId),
    #[error("structure has {dims} orders, classes are over 3")]
    WrongDims { dims: usize },
}

/// Constraint identifiers. `C6Star` and `C13` only apply to the doubled
/// variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintId {
    #[serde(rename = "1")]
    C1,
    #[serde(rename = "2")]
    C2,
    #[serde(rename = "3")]
    C3,
    #[serde(rename = "4")]
    C4,
    #[serde(rename = "5")]
    C5,
    #[serde(rename = "6")]
    C6,
    #[serde(rename = "7")]
    C7,
    #[serde(rename = "8")]
    C8,
    #[serde(rename = "9")]
    C9,
    #[serde(rename = "10")]
    C10,
    #[serde(rename = "11")]
    C11,
    #[serde(rename = "12")]
    C12,
    #[serde(rename = "6*")]
    C6Star,
    #[serde(rename = "13")]
    C13,
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintId::C1 => "1",
            ConstraintId::C2 => "2",
            ConstraintId::C3 => "3",
            ConstraintId::C4 => "4",
            ConstraintId::C5 => "5",
            ConstraintId::C6 => "6",
            ConstraintId::C7 => "7",
            ConstraintId::C8 => "8",
            ConstraintId::C9 => "9",
            ConstraintId::C10 => "10",
            ConstraintId::C11 => "11",
            ConstraintId::C12 => "12",
            ConstraintId::C6Star => "6*",
            ConstraintId::C13 => "13",
        };
        f.write_str(s)
    }
}

pub const ALL_CONSTRAINTS: [ConstraintId; 14] = [
    ConstraintId::C1,
    ConstraintId::C2,
    ConstraintId::C3,
    ConstraintId::C4,
    ConstraintId::C5,
    ConstraintId::C6,
    ConstraintId::C7,
    ConstraintId::C8,
    ConstraintId::C9,
    ConstraintId::C10,
    ConstraintId::C11,
    ConstraintId::C12,
    ConstraintId::C6Star,
    ConstraintId::C13,
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    /// The superscript pairing the violation was found under, when relevant.
    pub pairing: Option<(u8, u8)>,
    /// Witness points, lowest-level available (roots, interval endpoints).
    pub points: Vec<PointId>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub member: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    fn from_violations(mut violations: Vec<Violation>) -> Verdict {
        violations.sort();
        violations.dedup();
        Verdict { member: violations.is_empty(), violations }
    }
}

/// A compiled class: gadget family plus tiling problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDescriptor {
    pub variant: Variant,
    pub gadgets: GadgetSet,
    pub problem: StringTilingProblem,
}

/// The `.class` file content; compiling it builds and verifies the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSpec {
    pub variant: Variant,
    pub gadget_size: usize,
    pub gadget_seed: u64,
    pub problem: StringTilingProblem,
}

impl ClassSpec {
    pub fn compile(&self) -> Result<ClassDescriptor, ClassError> {
        let gadgets =
            crate::gadgets::build_gadget_family(self.variant, self.gadget_size, self.gadget_seed)?;
        Ok(ClassDescriptor { variant: self.variant, gadgets, problem: self.problem.clone() })
    }
}

impl ClassDescriptor {
    pub fn spec(&self) -> ClassSpec {
        ClassSpec {
            variant: self.variant,
            gadget_size: self.gadgets.size,
            gadget_seed: self.gadgets.seed,
            problem: self.problem.clone(),
        }
    }

    /// Constraints in force for this variant.
    pub fn active_constraints(&self) -> Vec<ConstraintId> {
        let mut base = vec![
            ConstraintId::C1,
            ConstraintId::C2,
            ConstraintId::C3,
            ConstraintId::C4,
            ConstraintId::C5,
            ConstraintId::C6,
            ConstraintId::C7,
            ConstraintId::C8,
            ConstraintId::C9,
            ConstraintId::C10,
            ConstraintId::C11,
            ConstraintId::C12,
        ];
        if self.variant == Variant::Q {
            base.push(ConstraintId::C6Star);
            base.push(ConstraintId::C13);
        }
        base
    }
}

/// Full membership check with the default copy budget.
pub fn check_membership(s: &MultiPerm, c: &ClassDescriptor) -> Result<Verdict, ClassError> {
    check_membership_with_budget(s, c, DEFAULT_COPY_BUDGET)
}

pub fn check_membership_with_budget(
    s: &MultiPerm,
    c: &ClassDescriptor,
    budget: usize,
) -> Result<Verdict, ClassError> {
    if s.dims() != 3 {
        return Err(ClassError::WrongDims { dims: s.dims() });
    }
    let tagged = detect_copies(s, &c.gadgets, budget)?;
    Ok(check_tagged(&tagged, c, None))
}

/// Membership restricted to a subset of constraints (cross-validation use).
pub fn check_membership_restricted(
    s: &MultiPerm,
    c: &ClassDescriptor,
    constraints: &BTreeSet<ConstraintId>,
) -> Result<Verdict, ClassError> {
    if s.dims() != 3 {
        return Err(ClassError::WrongDims { dims: s.dims() });
    }
    let tagged = detect_copies(s, &c.gadgets, DEFAULT_COPY_BUDGET)?;
    Ok(check_tagged(&tagged, c, Some(constraints)))
}

/// Evaluate the constraint list over an already-tagged structure.
pub fn check_tagged(
    tagged: &TaggedStructure,
    c: &ClassDescriptor,
    filter: Option<&BTreeSet<ConstraintId>>,
) -> Verdict {
    let active: Vec<ConstraintId> = c
        .active_constraints()
        .into_iter()
        .filter(|id| filter.is_none_or(|f| f.contains(id)))
        .collect();
    let per: Vec<Vec<Violation>> =
        exec::map_collect(&active, |&id| eval_constraint(tagged, c, id));
    Verdict::from_violations(per.into_iter().flatten().collect())
}

fn eval_constraint(t: &TaggedStructure, c: &ClassDescriptor, id: ConstraintId) -> Vec<Violation> {
    let mut out = Vec::new();
    for pairing in c.gadgets.pairings() {
        match id {
            ConstraintId::C1 => c1(t, pairing, &mut out),
            ConstraintId::C2 => c2(t, pairing, &mut out),
            ConstraintId::C3 => c3(t, pairing, &mut out),
            ConstraintId::C4 => c4(t, pairing, &mut out),
            ConstraintId::C5 => c5(t, pairing, &mut out),
            ConstraintId::C6 => c6(t, pairing, &mut out),
            ConstraintId::C7 => c7(t, pairing, &mut out),
            ConstraintId::C8 => c8(t, pairing, &mut out),
            ConstraintId::C9 => c9(t, pairing, &mut out),
            ConstraintId::C10 => c10(t, pairing, &mut out),
            ConstraintId::C11 => c11(t, pairing, &mut out),
            ConstraintId::C12 => c12(t, &c.problem, pairing, &mut out),
            // The doubled-variant constraints are pairing-independent; run once.
            ConstraintId::C6Star | ConstraintId::C13 => {}
        }
    }
    match id {
        ConstraintId::C6Star => c6_star(t, &mut out),
        ConstraintId::C13 => c13(t, &mut out),
        _ => {}
    }
    out
}

fn violation(
    constraint: ConstraintId,
    pairing: Option<(u8, u8)>,
    points: Vec<PointId>,
    note: impl Into<String>,
) -> Violation {
    Violation { constraint, pairing, points, note: note.into() }
}

/// Path points have at most one successor and one predecessor.
fn c1(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    for sup in [pairing.0, pairing.1] {
        let succ = &t.path_successor[sup as usize];
        let mut by_src: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        let mut by_dst: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        for &(p, q) in succ.iter() {
            by_src.entry(p).or_default().push(q);
            by_dst.entry(q).or_default().push(p);
        }
        for (p, qs) in by_src {
            if qs.len() > 1 {
                let mut pts = vec![p];
                pts.extend(&qs);
                out.push(violation(ConstraintId::C1, Some(pairing), pts, "multiple successors"));
            }
        }
        for (q, ps) in by_dst {
            if ps.len() > 1 {
                let mut pts = vec![q];
                pts.extend(&ps);
                out.push(violation(ConstraintId::C1, Some(pairing), pts, "multiple predecessors"));
            }
        }
    }
}

/// Path origins have no predecessor.
fn c2(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    for sup in [pairing.0, pairing.1] {
        for &(p, q) in t.path_successor[sup as usize].iter() {
            if t.origin_points[sup as usize].contains(&q) {
                out.push(violation(
                    ConstraintId::C2,
                    Some(pairing),
                    vec![p, q],
                    "origin has a predecessor",
                ));
            }
        }
    }
}

/// Coordinates are unique: no two X (or Y) copies share a root, and no X or Y
/// copy captures two path points.
fn c3(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    for sup in [pairing.0, pairing.1] {
        for role in [Role::X, Role::Y] {
            let copies: Vec<usize> = (0..t.copies.len())
                .filter(|&i| {
                    t.copies[i].role == role && t.copies[i].superscript == sup
                })
                .collect();
            for (a_pos, &a) in copies.iter().enumerate() {
                for &b in &copies[a_pos + 1..] {
                    if t.copies[a].root == t.copies[b].root {
                        out.push(violation(
                            ConstraintId::C3,
                            Some(pairing),
                            vec![t.copies[a].root],
                            "two coordinate copies share a root",
                        ));
                    }
                }
            }
            for &i in &copies {
                let captured: Vec<PointId> = t.path_points[sup as usize]
                    .iter()
                    .copied()
                    .filter(|&p| t.captures(i, p).unwrap_or(false))
                    .collect();
                if captured.len() > 1 {
                    let mut pts = vec![t.copies[i].root];
                    pts.extend(captured);
                    out.push(violation(
                        ConstraintId::C3,
                        Some(pairing),
                        pts,
                        "coordinate copy captures two path points",
                    ));
                }
            }
        }
    }
}

/// Path copies lie below every grid-role and tile-role copy in order 2.
fn c4(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let path_pts: Vec<PointId> = t
        .copies
        .iter()
        .filter(|c| {
            matches!(c.role, Role::P | Role::O)
                && (c.superscript == pairing.0 || c.superscript == pairing.1)
        })
        .flat_map(|c| c.points.iter().copied())
        .collect();
    let high_pts: Vec<PointId> = t
        .copies
        .iter()
        .filter(|c| {
            (c.role == Role::G && c.superscript == pairing.0)
                || (c.role == Role::T && c.superscript == pairing.1)
        })
        .flat_map(|c| c.points.iter().copied())
        .collect();
    for &u in &path_pts {
        for &v in &high_pts {
            if !t.base.before(u, v, 2) {
                out.push(violation(
                    ConstraintId::C4,
                    Some(pairing),
                    vec![u, v],
                    "path copy point not below a grid or tile copy point",
                ));
            }
        }
    }
}

/// Special intervals increase antilexicographically in order 2.
fn c5(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let ids = t.pairing_intervals(pairing);
    // (a) A successor interval lies strictly above its predecessor.
    for &i in &ids {
        for &j in &ids {
            if i == j {
                continue;
            }
            let hp = t.horizontal_predecessors(j, pairing);
            let vp = t.vertical_predecessors(j, pairing);
            if (hp.contains(&i) || vp.contains(&i))
                && t.interval_relation(i, j) != crate::semantics::IntervalRelation::Below
            {
                out.push(violation(
                    ConstraintId::C5,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "successor interval not above its predecessor",
                ));
            }
        }
    }
    // (b) Anything whose horizontal predecessor lies below a y-axis interval
    // lies below it too.
    for &i in &ids {
        let hps = t.horizontal_predecessors(i, pairing);
        if hps.is_empty() {
            continue;
        }
        for &j in &ids {
            let jt = &t.intervals[j];
            if !t.on_y_axis(jt.owner, jt.superscript) {
                continue;
            }
            let premise = hps
                .iter()
                .any(|&hp| t.interval_relation(hp, j) == crate::semantics::IntervalRelation::Below);
            if premise && t.interval_relation(i, j) != crate::semantics::IntervalRelation::Below {
                out.push(violation(
                    ConstraintId::C5,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "interval not below a y-axis interval its predecessor is below",
                ));
            }
        }
    }
}

/// No point belongs to copies of both pairing superscripts.
fn c6(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    for p in 0..t.base.len() {
        let sups: BTreeSet<u8> =
            t.point_copies[p].iter().map(|&c| t.copies[c].superscript).collect();
        if sups.contains(&pairing.0) && sups.contains(&pairing.1) {
            out.push(violation(
                ConstraintId::C6,
                Some(pairing),
                vec![p],
                "point shared between grid-superscript and tile-superscript copies",
            ));
        }
    }
}

/// All grid-origin and tile-origin intervals intersect; first-order-ordered
/// origin pairs agree with order 3 at copy level.
fn c7(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let grid_origins = t.grid_origins(pairing.0);
    let tile_origins = t.tile_origins(pairing.1);
    let ids = t.pairing_intervals(pairing);
    let origin_ids: Vec<IntervalId> = ids
        .iter()
        .copied()
        .filter(|&i| {
            let it = &t.intervals[i];
            match it.kind {
                crate::semantics::IntervalKind::Connector => grid_origins.contains(&it.owner),
                crate::semantics::IntervalKind::TileSet => tile_origins.contains(&it.owner),
            }
        })
        .collect();
    for (pos, &a) in origin_ids.iter().enumerate() {
        for &b in &origin_ids[pos + 1..] {
            if !t.intervals_intersect(a, b) {
                out.push(violation(
                    ConstraintId::C7,
                    Some(pairing),
                    interval_witness(t, &[a, b]),
                    "origin intervals do not intersect",
                ));
            }
        }
    }
    for &a in &origin_ids {
        for &b in &origin_ids {
            let (ia, ib) = (&t.intervals[a], &t.intervals[b]);
            let grid_then_tile = ia.kind == crate::semantics::IntervalKind::Connector
                && ib.kind == crate::semantics::IntervalKind::TileSet;
            if grid_then_tile
                && copy_before(t, ia.copy, ib.copy, 1)
                && !copy_before(t, ia.copy, ib.copy, 3)
            {
                out.push(violation(
                    ConstraintId::C7,
                    Some(pairing),
                    interval_witness(t, &[a, b]),
                    "origin pair ordered in order 1 but not order 3",
                ));
            }
        }
    }
}

/// Intervals must intersect when their predecessors do.
fn c8(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let ids = t.pairing_intervals(pairing);
    for &i in &ids {
        let it = &t.intervals[i];
        let on_x = t.on_x_axis(it.owner, it.superscript);
        let on_y = t.on_y_axis(it.owner, it.superscript);
        let hp_i = t.horizontal_predecessors(i, pairing);
        let vp_i = t.vertical_predecessors(i, pairing);
        for &j in &ids {
            if i == j {
                continue;
            }
            let hp_j = t.horizontal_predecessors(j, pairing);
            let vp_j = t.vertical_predecessors(j, pairing);
            let h_meet = || {
                hp_i.iter().any(|&a| hp_j.iter().any(|&b| t.intervals_intersect(a, b)))
            };
            let v_meet = || {
                vp_i.iter().any(|&a| vp_j.iter().any(|&b| t.intervals_intersect(a, b)))
            };
            let premise = if !on_x && !on_y {
                !hp_i.is_empty()
                    && !vp_i.is_empty()
                    && !hp_j.is_empty()
                    && !vp_j.is_empty()
                    && h_meet()
                    && v_meet()
            } else if on_x && !hp_i.is_empty() && !hp_j.is_empty() {
                h_meet()
            } else if on_y && !vp_i.is_empty() && !vp_j.is_empty() {
                v_meet()
            } else {
                false
            };
            if !premise {
                continue;
            }
            if !t.intervals_intersect(i, j) {
                out.push(violation(
                    ConstraintId::C8,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "predecessors intersect but intervals do not",
                ));
            }
            let (ci, cj) = (t.intervals[i].copy, t.intervals[j].copy);
            if copy_before(t, ci, cj, 1) && !copy_before(t, ci, cj, 3) {
                out.push(violation(
                    ConstraintId::C8,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "forced pair ordered in order 1 but not order 3",
                ));
            }
        }
    }
}

/// Intersecting intervals have intersecting predecessors.
fn c9(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let ids = t.pairing_intervals(pairing);
    for &i in &ids {
        let it = &t.intervals[i];
        let on_x = t.on_x_axis(it.owner, it.superscript);
        let on_y = t.on_y_axis(it.owner, it.superscript);
        let hp_i = t.horizontal_predecessors(i, pairing);
        let vp_i = t.vertical_predecessors(i, pairing);
        for &j in &ids {
            if !t.intervals_intersect(i, j) {
                continue;
            }
            let hp_j = t.horizontal_predecessors(j, pairing);
            let vp_j = t.vertical_predecessors(j, pairing);
            let mut demand: Vec<(&Vec<IntervalId>, &Vec<IntervalId>, &str)> = Vec::new();
            if !on_x && !on_y {
                if !hp_i.is_empty() && !vp_i.is_empty() && !hp_j.is_empty() && !vp_j.is_empty() {
                    demand.push((&hp_i, &hp_j, "horizontal"));
                    demand.push((&vp_i, &vp_j, "vertical"));
                }
            } else {
                if on_x && !hp_i.is_empty() && !hp_j.is_empty() {
                    demand.push((&hp_i, &hp_j, "horizontal"));
                }
                if on_y && !vp_i.is_empty() && !vp_j.is_empty() {
                    demand.push((&vp_i, &vp_j, "vertical"));
                }
            }
            for (pi, pj, kind) in demand {
                for &a in pi.iter() {
                    for &b in pj.iter() {
                        if !t.intervals_intersect(a, b) {
                            out.push(violation(
                                ConstraintId::C9,
                                Some(pairing),
                                interval_witness(t, &[i, j, a, b]),
                                format!("{kind} predecessors of intersecting intervals disjoint"),
                            ));
                        }
                    }
                }
            }
        }
    }
}

/// Intersection with a common interval forces intersection.
fn c10(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let ids = t.pairing_intervals(pairing);
    for &k in &ids {
        let meet_k: Vec<IntervalId> = ids
            .iter()
            .copied()
            .filter(|&i| i != k && t.intervals_intersect(i, k))
            .collect();
        for (pos, &a) in meet_k.iter().enumerate() {
            for &b in &meet_k[pos + 1..] {
                if !t.intervals_intersect(a, b) {
                    out.push(violation(
                        ConstraintId::C10,
                        Some(pairing),
                        interval_witness(t, &[a, b, k]),
                        "two intervals meet a third but not each other",
                    ));
                }
            }
        }
    }
}

/// Axis status propagates along intersection to coordinatized intervals.
fn c11(t: &TaggedStructure, pairing: (u8, u8), out: &mut Vec<Violation>) {
    let ids = t.pairing_intervals(pairing);
    for &i in &ids {
        let it = &t.intervals[i];
        let x_i = t.on_x_axis(it.owner, it.superscript);
        let y_i = t.on_y_axis(it.owner, it.superscript);
        if !x_i && !y_i {
            continue;
        }
        for &j in &ids {
            if i == j || !t.intervals_intersect(i, j) {
                continue;
            }
            let jt = &t.intervals[j];
            if t.coordinatizations(jt.owner, jt.superscript).is_empty() {
                continue;
            }
            if x_i && !t.on_x_axis(jt.owner, jt.superscript) {
                out.push(violation(
                    ConstraintId::C11,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "coordinatized interval meets an x-axis interval off the x-axis",
                ));
            }
            if y_i && !t.on_y_axis(jt.owner, jt.superscript) {
                out.push(violation(
                    ConstraintId::C11,
                    Some(pairing),
                    interval_witness(t, &[i, j]),
                    "coordinatized interval meets a y-axis interval off the y-axis",
                ));
            }
        }
    }
}

/// The tiling rules are respected by the captured-tile relation along d-fold
/// successor chains.
fn c12(
    t: &TaggedStructure,
    problem: &StringTilingProblem,
    pairing: (u8, u8),
    out: &mut Vec<Violation>,
) {
    let (gs, ts) = pairing;
    // Entries (grid point, tile-set root, tile type).
    let mut entries: Vec<(PointId, PointId, TileId)> = Vec::new();
    for gc in t.copies.iter().filter(|c| c.role == Role::G && c.superscript == gs) {
        for tc in t.copies.iter().filter(|c| c.role == Role::T && c.superscript == ts) {
            if t.captures_raw_pub(gc, tc.root) {
                entries.push((gc.root, tc.root, 1));
            }
            if t.captures_raw_pub(gc, tc.order2_top) {
                entries.push((gc.root, tc.root, 2));
            }
        }
    }
    if entries.is_empty() {
        return;
    }
    let needed_h: BTreeSet<u32> = problem.h_forbidden.iter().map(|&(_, _, d)| d).collect();
    let grid_h = walk_powers(&t.horizontal_successors(gs), &needed_h);
    let tile_h = walk_powers(&t.horizontal_successors(ts), &needed_h);
    for &(a, b, d) in &problem.h_forbidden {
        let (gw, tw) = (&grid_h[&d], &tile_h[&d]);
        for &(g, c, ty) in &entries {
            if ty != a {
                continue;
            }
            for &(g2, c2, ty2) in &entries {
                if ty2 != b {
                    continue;
                }
                if gw.contains(&(g, g2)) && tw.contains(&(c, c2)) {
                    out.push(violation(
                        ConstraintId::C12,
                        Some(pairing),
                        vec![g, g2, c, c2],
                        format!("horizontal rule ({a},{b}) at distance {d} violated"),
                    ));
                }
            }
        }
    }
    if !problem.v_forbidden.is_empty() {
        let gv = t.vertical_successors(gs);
        let tv = t.vertical_successors(ts);
        for &(a, b) in &problem.v_forbidden {
            for &(g, c, ty) in &entries {
                if ty != a {
                    continue;
                }
                for &(g2, c2, ty2) in &entries {
                    if ty2 != b {
                        continue;
                    }
                    if gv.contains(&(g, g2)) && tv.contains(&(c, c2)) {
                        out.push(violation(
                            ConstraintId::C12,
                            Some(pairing),
                            vec![g, g2, c, c2],
                            format!("vertical rule ({a},{b}) violated"),
                        ));
                    }
                }
            }
        }
    }
}

/// Walks of exactly length `d` for each needed `d`.
fn walk_powers(
    step: &BTreeSet<(PointId, PointId)>,
    needed: &BTreeSet<u32>,
) -> BTreeMap<u32, BTreeSet<(PointId, PointId)>> {
    let mut out = BTreeMap::new();
    if needed.is_empty() {
        return out;
    }
    let max = *needed.iter().max().unwrap();
    let mut current = step.clone();
    for d in 1..=max {
        if needed.contains(&d) {
            out.insert(d, current.clone());
        }
        if d < max {
            let mut next = BTreeSet::new();
            for &(a, b) in &current {
                for &(b2, c) in step.iter() {
                    if b == b2 {
                        next.insert((a, c));
                    }
                }
            }
            current = next;
        }
    }
    out
}

/// No point belongs to copies of two distinct superscripts.
fn c6_star(t: &TaggedStructure, out: &mut Vec<Violation>) {
    for p in 0..t.base.len() {
        let sups: BTreeSet<u8> =
            t.point_copies[p].iter().map(|&c| t.copies[c].superscript).collect();
        if sups.len() > 1 {
            out.push(violation(
                ConstraintId::C6Star,
                None,
                vec![p],
                "point shared between differently-superscripted copies",
            ));
        }
    }
}

/// Low-superscript copies sit below high-superscript copies in order 2.
fn c13(t: &TaggedStructure, out: &mut Vec<Violation>) {
    let low: Vec<PointId> = t
        .copies
        .iter()
        .filter(|c| c.superscript <= 1)
        .flat_map(|c| c.points.iter().copied())
        .collect();
    let high: Vec<PointId> = t
        .copies
        .iter()
        .filter(|c| c.superscript >= 2)
        .flat_map(|c| c.points.iter().copied())
        .collect();
    for &u in &low {
        for &v in &high {
            if !t.base.before(u, v, 2) {
                out.push(violation(
                    ConstraintId::C13,
                    None,
                    vec![u, v],
                    "low-superscript copy point not below a high-superscript one",
                ));
            }
        }
    }
}

fn copy_before(t: &TaggedStructure, a: usize, b: usize, order: usize) -> bool {
    let max_a = t.copies[a].points.iter().map(|&p| t.base.rank(p, order)).max().unwrap();
    let min_b = t.copies[b].points.iter().map(|&p| t.base.rank(p, order)).min().unwrap();
    max_a < min_b
}

fn interval_witness(t: &TaggedStructure, ids: &[IntervalId]) -> Vec<PointId> {
    let mut pts: Vec<PointId> = ids
        .iter()
        .flat_map(|&i| [t.intervals[i].bottom, t.intervals[i].top])
        .collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

impl TaggedStructure {
    /// Capture test without the role guard, for internal constraint scans.
    pub(crate) fn captures_raw_pub(&self, c: &crate::semantics::GadgetCopy, x: PointId) -> bool {
        c.role != Role::T
            && self.base.rank(x, 1) > c.max_rank1
            && self.base.rank(x, 3) > c.max_rank3
            && self.base.before(c.zone.0, x, 2)
            && self.base.before(x, c.zone.1, 2)
    }
}

// ---------------------------------------------------------------------------
// Forbidden-configuration materialization.
// ---------------------------------------------------------------------------

/// A unit of a configuration: one or more copies sharing their root.
#[derive(Debug, Clone)]
struct ConfigUnit {
    elements: Vec<(Role, u8)>,
}

/// A forbidden configuration: units in no particular order plus capture
/// demands (capturing unit index, unit whose root is captured; the capturing
/// copy is the unit's single element).
#[derive(Debug, Clone)]
struct CopyConfig {
    constraint: ConstraintId,
    units: Vec<ConfigUnit>,
    captures: Vec<(usize, usize)>,
}

/// Statistics returned by the materializer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    pub emitted: usize,
    pub deduplicated: usize,
}

/// Materialize every realization (up to `size_cap` points) of the violating
/// configurations of the selected constraints, calling `f` on each distinct
/// structure.
///
/// Realizations are closed under the third-order completion rule used by
/// every builder in this crate: reversed inside each copy, agreeing with the
/// first order across copies. Under that rule copies occupy contiguous
/// first-order blocks (clusters sharing a root stay contiguous), so the
/// enumeration runs over block orders and all second-order linear extensions.
pub fn enumerate_forbidden(
    descriptor: &ClassDescriptor,
    constraints: &BTreeSet<ConstraintId>,
    size_cap: usize,
    f: &mut dyn FnMut(&MultiPerm),
) -> Result<EnumerationStats, ClassError> {
    let supported: BTreeSet<ConstraintId> = [
        ConstraintId::C1,
        ConstraintId::C2,
        ConstraintId::C3,
        ConstraintId::C6,
        ConstraintId::C6Star,
    ]
    .into();
    for &c in constraints {
        if !supported.contains(&c) {
            return Err(ClassError::Unsupported(c));
        }
    }
    let mut configs: Vec<CopyConfig> = Vec::new();
    let pairings = descriptor.gadgets.pairings();
    let sups = descriptor.gadgets.superscripts();
    if constraints.contains(&ConstraintId::C1) {
        for &s in &sups {
            for capturer in [Role::P, Role::O] {
                for v in [Role::P, Role::O] {
                    for w in [Role::P, Role::O] {
                        // Two successors.
                        configs.push(CopyConfig {
                            constraint: ConstraintId::C1,
                            units: vec![
                                ConfigUnit { elements: vec![(capturer, s)] },
                                ConfigUnit { elements: vec![(v, s)] },
                                ConfigUnit { elements: vec![(w, s)] },
                            ],
                            captures: vec![(0, 1), (0, 2)],
                        });
                        // Two predecessors.
                        configs.push(CopyConfig {
                            constraint: ConstraintId::C1,
                            units: vec![
                                ConfigUnit { elements: vec![(capturer, s)] },
                                ConfigUnit { elements: vec![(v, s)] },
                                ConfigUnit { elements: vec![(w, s)] },
                            ],
                            captures: vec![(0, 2), (1, 2)],
                        });
                    }
                }
            }
        }
    }
    if constraints.contains(&ConstraintId::C2) {
        for &s in &sups {
            for capturer in [Role::P, Role::O] {
                configs.push(CopyConfig {
                    constraint: ConstraintId::C2,
                    units: vec![
                        ConfigUnit { elements: vec![(capturer, s)] },
                        ConfigUnit { elements: vec![(Role::O, s)] },
                    ],
                    captures: vec![(0, 1)],
                });
            }
        }
    }
    if constraints.contains(&ConstraintId::C3) {
        for &s in &sups {
            for role in [Role::X, Role::Y] {
                // Shared-root duplicate coordinate copies.
                configs.push(CopyConfig {
                    constraint: ConstraintId::C3,
                    units: vec![ConfigUnit { elements: vec![(role, s), (role, s)] }],
                    captures: vec![],
                });
                // One coordinate copy capturing two path roots.
                for v in [Role::P, Role::O] {
                    for w in [Role::P, Role::O] {
                        configs.push(CopyConfig {
                            constraint: ConstraintId::C3,
                            units: vec![
                                ConfigUnit { elements: vec![(role, s)] },
                                ConfigUnit { elements: vec![(v, s)] },
                                ConfigUnit { elements: vec![(w, s)] },
                            ],
                            captures: vec![(0, 1), (0, 2)],
                        });
                    }
                }
            }
        }
    }
    if constraints.contains(&ConstraintId::C6) {
        for &(gs, ts) in &pairings {
            for &(ra, sa) in &role_list(&descriptor.gadgets, gs) {
                for &(rb, sb) in &role_list(&descriptor.gadgets, ts) {
                    configs.push(CopyConfig {
                        constraint: ConstraintId::C6,
                        units: vec![ConfigUnit { elements: vec![(ra, sa), (rb, sb)] }],
                        captures: vec![],
                    });
                }
            }
        }
    }
    if constraints.contains(&ConstraintId::C6Star) {
        for (ai, &a) in sups.iter().enumerate() {
            for &b in &sups[ai + 1..] {
                if pairings.contains(&(a, b)) || pairings.contains(&(b, a)) {
                    continue; // covered by the plain sharing rule
                }
                for &(ra, sa) in &role_list(&descriptor.gadgets, a) {
                    for &(rb, sb) in &role_list(&descriptor.gadgets, b) {
                        configs.push(CopyConfig {
                            constraint: ConstraintId::C6Star,
                            units: vec![ConfigUnit { elements: vec![(ra, sa), (rb, sb)] }],
                            captures: vec![],
                        });
                    }
                }
            }
        }
    }

    let mut stats = EnumerationStats::default();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for config in &configs {
        emit_config(descriptor, config, size_cap, &mut seen, &mut stats, f);
    }
    Ok(stats)
}

fn role_list(gadgets: &GadgetSet, sup: u8) -> Vec<(Role, u8)> {
    gadgets
        .elements()
        .iter()
        .filter(|e| e.superscript == sup)
        .map(|e| (e.role, e.superscript))
        .collect()
}

/// Convenience wrapper collecting all materialized patterns.
pub fn collect_forbidden(
    descriptor: &ClassDescriptor,
    constraints: &BTreeSet<ConstraintId>,
    size_cap: usize,
) -> Result<Vec<MultiPerm>, ClassError> {
    let mut out = Vec::new();
    enumerate_forbidden(descriptor, constraints, size_cap, &mut |m| out.push(m.clone()))?;
    Ok(out)
}

struct ConfigPoints {
    /// Per unit: root point then per-copy body points in copy order.
    unit_points: Vec<UnitPoints>,
    total: usize,
}

struct UnitPoints {
    root: usize,
    /// Body point ids per copy, indexed by pattern position 1..size.
    bodies: Vec<Vec<usize>>,
}

fn emit_config(
    descriptor: &ClassDescriptor,
    config: &CopyConfig,
    size_cap: usize,
    seen: &mut HashSet<Vec<u32>>,
    stats: &mut EnumerationStats,
    f: &mut dyn FnMut(&MultiPerm),
) {
    let gadgets = &descriptor.gadgets;
    let size = gadgets.size;
    let total: usize = config.units.iter().map(|u| 1 + u.elements.len() * (size - 1)).sum();
    if total > size_cap {
        return;
    }
    // Assign point ids unit by unit.
    let mut unit_points = Vec::new();
    let mut next = 0usize;
    for u in &config.units {
        let root = next;
        next += 1;
        let mut bodies = Vec::new();
        for _ in &u.elements {
            let body: Vec<usize> = (0..size - 1).map(|k| next + k).collect();
            next += size - 1;
            bodies.push(body);
        }
        unit_points.push(UnitPoints { root, bodies });
    }
    let points = ConfigPoints { unit_points, total };

    // Order-2 poset: internal chains plus capture straddles.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (ui, u) in config.units.iter().enumerate() {
        for (ci, &(role, sup)) in u.elements.iter().enumerate() {
            let e = gadgets.element(role, sup).expect("config roles exist");
            let pt = |pos: usize| {
                if pos == 0 {
                    points.unit_points[ui].root
                } else {
                    points.unit_points[ui].bodies[ci][pos - 1]
                }
            };
            // chain internal order-2 ranks
            let mut by_rank: Vec<usize> = (0..size).collect();
            by_rank.sort_by_key(|&pos| e.shape.rank(pos, 2));
            for w in by_rank.windows(2) {
                edges.push((pt(w[0]), pt(w[1])));
            }
        }
    }
    for &(capturing, captured) in &config.captures {
        let u = &config.units[capturing];
        let (role, sup) = u.elements[0];
        let e = gadgets.element(role, sup).expect("config roles exist");
        let (lo, hi) = e.order2_least_positions();
        let pt = |pos: usize| {
            if pos == 0 {
                points.unit_points[capturing].root
            } else {
                points.unit_points[capturing].bodies[0][pos - 1]
            }
        };
        let target = points.unit_points[captured].root;
        edges.push((pt(lo), target));
        edges.push((target, pt(hi)));
    }

    // First-order arrangements: orders of the unit blocks extending the
    // capture relation, with body blocks in every per-unit order.
    let unit_count = config.units.len();
    let mut unit_orders: Vec<Vec<usize>> = Vec::new();
    permute_units(unit_count, &config.captures, &mut Vec::new(), &mut unit_orders);
    for unit_order in &unit_orders {
        let mut body_orders: Vec<Vec<Vec<usize>>> = Vec::new();
        body_order_choices(config, &mut Vec::new(), &mut body_orders);
        for body_order in &body_orders {
            // rank1: walk units in order, root then bodies in chosen order.
            let mut rank1 = vec![0u32; points.total];
            let mut rank3 = vec![0u32; points.total];
            let mut pos1 = 0u32;
            let mut seq3: Vec<usize> = Vec::with_capacity(points.total);
            for &ui in unit_order {
                rank1[points.unit_points[ui].root] = pos1;
                pos1 += 1;
                for &bi in &body_order[ui] {
                    for &p in &points.unit_points[ui].bodies[bi] {
                        rank1[p] = pos1;
                        pos1 += 1;
                    }
                }
                // third order inside the unit: bodies reversed in block order,
                // root last
                for &bi in &body_order[ui] {
                    for &p in points.unit_points[ui].bodies[bi].iter().rev() {
                        seq3.push(p);
                    }
                }
                seq3.push(points.unit_points[ui].root);
            }
            for (r, &p) in seq3.iter().enumerate() {
                rank3[p] = r as u32;
            }
            // All order-2 linear extensions.
            linear_extensions(points.total, &edges, &mut |rank2| {
                let rows: Vec<Vec<u32>> = (0..points.total)
                    .map(|p| vec![rank1[p], rank2[p], rank3[p]])
                    .collect();
                let mp = MultiPerm::from_rank_rows_with_dims(3, rows)
                    .expect("configuration ranks are valid");
                let key: Vec<u32> = mp.rows().iter().flat_map(|r| r.iter().copied()).collect();
                stats.emitted += 1;
                if seen.insert(key) {
                    stats.deduplicated += 1;
                    f(&mp);
                }
            });
        }
    }
    let _ = config.constraint;
}

fn permute_units(
    n: usize,
    captures: &[(usize, usize)],
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for u in 0..n {
        if prefix.contains(&u) {
            continue;
        }
        // every capturing unit must precede its captured unit
        if captures.iter().any(|&(a, b)| b == u && !prefix.contains(&a)) {
            continue;
        }
        prefix.push(u);
        permute_units(n, captures, prefix, out);
        prefix.pop();
    }
}

fn body_order_choices(
    config: &CopyConfig,
    prefix: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if prefix.len() == config.units.len() {
        out.push(prefix.clone());
        return;
    }
    let k = config.units[prefix.len()].elements.len();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    permute_units(k, &[], &mut Vec::new(), &mut perms);
    for p in perms {
        prefix.push(p);
        body_order_choices(config, prefix, out);
        prefix.pop();
    }
}

/// Enumerate every linear extension of the poset on `n` points given by
/// `edges`, calling `f` with the rank array of each.
fn linear_extensions(n: usize, edges: &[(usize, usize)], f: &mut dyn FnMut(&[u32])) {
    let mut indegree = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        indegree[b] += 1;
        succs[a].push(b);
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
        f: &mut dyn FnMut(&[u32]),
    ) {
        if depth == n {
            f(rank);
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
            rec(n, depth + 1, indegree, succs, placed, rank, f);
            for &w in &succs[v] {
                indegree[w] += 1;
            }
            placed[v] = false;
        }
    }
    rec(n, 0, &mut indegree, &succs, &mut placed, &mut rank, f);
}

/// Outcome of avoidance-based membership.
#[derive(Debug, Clone)]
pub struct AvoidanceOutcome {
    pub member: bool,
    pub violation: Option<(usize, Embedding)>,
}

/// Membership via pattern avoidance: a wrapper over the matcher, used as a
/// cross-validation oracle against the semantic checker.
pub fn membership_by_avoidance(
    s: &MultiPerm,
    forbidden: &[MultiPerm],
) -> Result<AvoidanceOutcome, matcher::MatchError> {
    let verdict = matcher::avoids_all(s, forbidden)?;
    Ok(AvoidanceOutcome { member: verdict.avoided(), violation: verdict.violation })
}

// ---------------------------------------------------------------------------
// Random copy assemblies, shared by tests and the acceptance suite.
// ---------------------------------------------------------------------------

/// How two copies relate in a random assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyShape {
    Disjoint,
    DisjointWithCapture,
    SharedRoot,
}

/// Assemble two random copies into one structure, using the same third-order
/// completion rule as every builder here. Returns the structure.
pub fn random_copy_assembly(
    gadgets: &GadgetSet,
    rng: &mut impl rand::Rng,
) -> MultiPerm {
    use rand::seq::SliceRandom;
    let elements = gadgets.elements();
    let a = elements.choose(rng).unwrap();
    let b = elements.choose(rng).unwrap();
    let shape = *[
        AssemblyShape::Disjoint,
        AssemblyShape::DisjointWithCapture,
        AssemblyShape::SharedRoot,
    ]
    .choose(rng)
    .unwrap();
    let size = gadgets.size;
    let (total, shared) = match shape {
        AssemblyShape::SharedRoot => (2 * size - 1, true),
        _ => (2 * size, false),
    };
    // Point layout: unit blocks in first order.
    let a_pts: Vec<usize> = (0..size).collect();
    let b_pts: Vec<usize> = if shared {
        let mut v = vec![0usize];
        v.extend(size..2 * size - 1);
        v
    } else {
        (size..2 * size).collect()
    };
    let mut rank1 = vec![0u32; total];
    let mut rank3 = vec![0u32; total];
    if shared {
        // root, body a, body b (order of the two bodies randomized)
        let swap = rng.gen_bool(0.5);
        let (first, second) = if swap { (&b_pts, &a_pts) } else { (&a_pts, &b_pts) };
        let mut pos = 0u32;
        rank1[0] = pos;
        pos += 1;
        for &p in &first[1..] {
            rank1[p] = pos;
            pos += 1;
        }
        for &p in &second[1..] {
            rank1[p] = pos;
            pos += 1;
        }
        let mut seq3: Vec<usize> = Vec::new();
        seq3.extend(first[1..].iter().rev());
        seq3.extend(second[1..].iter().rev());
        seq3.push(0);
        for (r, &p) in seq3.iter().enumerate() {
            rank3[p] = r as u32;
        }
    } else {
        for (r, &p) in a_pts.iter().chain(b_pts.iter()).enumerate() {
            rank1[p] = r as u32;
        }
        let mut seq3: Vec<usize> = Vec::new();
        seq3.extend(a_pts[1..].iter().rev());
        seq3.push(a_pts[0]);
        seq3.extend(b_pts[1..].iter().rev());
        seq3.push(b_pts[0]);
        for (r, &p) in seq3.iter().enumerate() {
            rank3[p] = r as u32;
        }
    }
    // Order-2 poset: both internal chains (glued at the root when shared),
    // plus the capture straddle when requested.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let chain = |e: &crate::gadgets::AntichainElement, pts: &[usize], edges: &mut Vec<(usize, usize)>| {
        let mut by_rank: Vec<usize> = (0..size).collect();
        by_rank.sort_by_key(|&pos| e.shape.rank(pos, 2));
        for w in by_rank.windows(2) {
            edges.push((pts[w[0]], pts[w[1]]));
        }
    };
    chain(a, &a_pts, &mut edges);
    chain(b, &b_pts, &mut edges);
    if shape == AssemblyShape::DisjointWithCapture {
        let (lo, hi) = a.order2_least_positions();
        edges.push((a_pts[lo], b_pts[0]));
        edges.push((b_pts[0], a_pts[hi]));
    }
    // Random linear extension: repeatedly pick a random available point.
    let mut indegree = vec![0usize; total];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); total];
    for &(x, y) in &edges {
        indegree[y] += 1;
        succ[x].push(y);
    }
    let mut rank2 = vec![0u32; total];
    let mut avail: Vec<usize> = (0..total).filter(|&p| indegree[p] == 0).collect();
    for r in 0..total {
        let k = rng.gen_range(0..avail.len());
        let p = avail.swap_remove(k);
        rank2[p] = r as u32;
        for &q in &succ[p] {
            indegree[q] -= 1;
            if indegree[q] == 0 {
                avail.push(q);
            }
        }
    }
    let rows: Vec<Vec<u32>> = (0..total).map(|p| vec![rank1[p], rank2[p], rank3[p]]).collect();
    MultiPerm::from_rank_rows_with_dims(3, rows).expect("assembly ranks are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::build_gadget_family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p_descriptor() -> ClassDescriptor {
        ClassDescriptor {
            variant: Variant::P,
            gadgets: build_gadget_family(Variant::P, 7, 0).unwrap(),
            problem: StringTilingProblem::isolated_two_example(),
        }
    }

    #[test]
    fn copy_free_structures_are_members() {
        let c = p_descriptor();
        let s = MultiPerm::from_rank_rows(vec![vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let v = check_membership(&s, &c).unwrap();
        assert!(v.member);
        let empty = MultiPerm::empty(3).unwrap();
        assert!(check_membership(&empty, &c).unwrap().member);
    }

    #[test]
    fn canonical_models_pass() {
        let c = p_descriptor();
        for n in 1..=2 {
            let a = crate::canonical::canonical_a(n, &c.gadgets).unwrap();
            let v = check_membership(&a.structure, &c).unwrap();
            assert!(v.member, "grid model n={n}: {:?}", v.violations.first());
            let b = crate::canonical::canonical_b(n, &c.gadgets).unwrap();
            let v = check_membership(&b.structure, &c).unwrap();
            assert!(v.member, "tile model n={n}: {:?}", v.violations.first());
        }
    }

    #[test]
    fn capture_of_an_origin_is_a_violation() {
        let c = p_descriptor();
        // Materialize the first capture-of-origin pattern and check it.
        let patterns =
            collect_forbidden(&c, &[ConstraintId::C2].into_iter().collect(), 14).unwrap();
        assert!(!patterns.is_empty());
        for p in patterns.iter().take(50) {
            let v = check_membership(p, &c).unwrap();
            assert!(v.violations.iter().any(|w| w.constraint == ConstraintId::C2));
        }
    }

    #[test]
    fn shared_point_patterns_violate_the_sharing_rule() {
        let c = p_descriptor();
        let patterns =
            collect_forbidden(&c, &[ConstraintId::C6].into_iter().collect(), 13).unwrap();
        assert!(!patterns.is_empty());
        for p in patterns.iter().take(50) {
            let v = check_membership(p, &c).unwrap();
            assert!(v.violations.iter().any(|w| w.constraint == ConstraintId::C6));
        }
    }

    #[test]
    fn size_caps_empty_the_stream() {
        let c = p_descriptor();
        // Two copies sharing one point need at least 2*size - 1 points.
        let patterns =
            collect_forbidden(&c, &[ConstraintId::C6].into_iter().collect(), 2 * 7 - 2).unwrap();
        assert!(patterns.is_empty());
        let patterns =
            collect_forbidden(&c, &[ConstraintId::C1].into_iter().collect(), 15).unwrap();
        assert!(patterns.is_empty(), "three copies cannot fit under 15 points");
    }

    #[test]
    fn unsupported_constraints_error() {
        let c = p_descriptor();
        assert!(matches!(
            collect_forbidden(&c, &[ConstraintId::C7].into_iter().collect(), 20),
            Err(ClassError::Unsupported(ConstraintId::C7))
        ));
    }

    #[test]
    fn avoidance_and_semantic_checks_agree_on_assemblies() {
        let c = p_descriptor();
        let restricted: BTreeSet<ConstraintId> =
            [ConstraintId::C2, ConstraintId::C6].into_iter().collect();
        let patterns = collect_forbidden(&c, &restricted, 15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let s = random_copy_assembly(&c.gadgets, &mut rng);
            let semantic = check_membership_restricted(&s, &c, &restricted).unwrap();
            let avoidance = membership_by_avoidance(&s, &patterns).unwrap();
            assert_eq!(semantic.member, avoidance.member);
        }
    }

    #[test]
    fn membership_by_avoidance_trivia() {
        let s = MultiPerm::from_rank_rows(vec![vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        assert!(membership_by_avoidance(&s, &[]).unwrap().member);
        assert!(!membership_by_avoidance(&s, std::slice::from_ref(&s)).unwrap().member);
    }

    #[test]
    fn verdict_witnesses_survive_induction() {
        let c = p_descriptor();
        let patterns =
            collect_forbidden(&c, &[ConstraintId::C2].into_iter().collect(), 14).unwrap();
        let p = &patterns[0];
        let v = check_membership(p, &c).unwrap();
        let w = v.violations.iter().find(|w| w.constraint == ConstraintId::C2).unwrap();
        // The witness points extend to the violating pair of copies; inducing
        // on all points reproduces the violation.
        let all: Vec<PointId> = (0..p.len()).collect();
        let again = check_membership(&p.induced_substructure(&all), &c).unwrap();
        assert!(again.violations.iter().any(|x| x.constraint == ConstraintId::C2));
        assert!(!w.points.is_empty());
    }
}
