//! Semantic tagging of a structure against a gadget family.
//!
//! Detection finds every copy of every family element inside a host
//! structure. From the copies the derived notions are computed:
//!
//! - unary predicates from roots (path points, origins, grid points, tile
//!   points of both kinds);
//! - capture: a point lying strictly between a copy's two second-order least
//!   points, with the whole copy before it in orders 1 and 3;
//! - coordinatization of grid and tile points by captured path points, and
//!   the path/horizontal/vertical successor relations built from it;
//! - special intervals: connector intervals spanned by grid-role copies and
//!   tile-set intervals spanned by tile-role copies;
//! - weak coordinates: a staged least fixpoint seeding grid- and tile-origin
//!   intervals at (0,0) and closing under predecessors and interval
//!   intersection in antilexicographic stages.

use crate::exec;
use crate::gadgets::{GadgetSet, Role};
use crate::matcher;
use crate::structure::{MultiPerm, PointId};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type CopyId = usize;
pub type IntervalId = usize;
pub type Coord = (u32, u32);

/// Captured x- and y-path-points per coordinatized owner point.
pub type CoordinateTable = BTreeMap<PointId, (BTreeSet<PointId>, BTreeSet<PointId>)>;

/// Default cap on the total number of detected copies.
pub const DEFAULT_COPY_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("copy budget of {budget} exceeded while detecting copies")]
    BudgetExceeded { budget: usize },
    #[error("structure has {dims} orders, tagging needs 3")]
    WrongDims { dims: usize },
    #[error("{0}")]
    Match(#[from] matcher::MatchError),
    #[error("copies of role {role:?} never capture")]
    WrongRole { role: Role },
}

/// One detected copy of a family element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GadgetCopy {
    pub role: Role,
    pub superscript: u8,
    /// Host points in pattern first-order rank; `points[0]` is the root.
    pub points: Vec<PointId>,
    pub root: PointId,
    /// Host points with internal order-2 ranks 0 and 1.
    pub zone: (PointId, PointId),
    /// Host point with the greatest internal order-2 rank.
    pub order2_top: PointId,
    /// Greatest order-1 and order-3 host ranks over the copy's points.
    pub max_rank1: u32,
    pub max_rank3: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalKind {
    Connector,
    TileSet,
}

/// An open second-order interval spanned by a grid-role or tile-role copy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecialInterval {
    pub kind: IntervalKind,
    pub copy: CopyId,
    pub superscript: u8,
    /// The copy's root: the grid point for connectors, the first tile for
    /// tile sets.
    pub owner: PointId,
    pub bottom: PointId,
    pub top: PointId,
}

/// How two special intervals relate in the second order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalRelation {
    Below,
    Above,
    Intersect,
}

/// Weak coordinates: per-interval candidate sets, with a uniqueness flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakCoordinateMap {
    pub assignment: Vec<BTreeSet<Coord>>,
    /// True when every assigned interval has exactly one coordinate.
    pub unique: bool,
}

impl WeakCoordinateMap {
    /// The unique coordinate of an interval, when assigned and unambiguous.
    pub fn coordinate(&self, interval: IntervalId) -> Option<Coord> {
        let set = &self.assignment[interval];
        if set.len() == 1 {
            set.iter().next().copied()
        } else {
            None
        }
    }
}

/// A structure together with every detected copy and all derived semantics.
#[derive(Debug, Clone)]
pub struct TaggedStructure {
    pub base: MultiPerm,
    pub copies: Vec<GadgetCopy>,
    pub intervals: Vec<SpecialInterval>,
    /// Copies containing each point.
    pub point_copies: Vec<Vec<CopyId>>,
    /// Path points per superscript: roots of path or origin copies.
    pub path_points: [BTreeSet<PointId>; 4],
    /// Origin points per superscript.
    pub origin_points: [BTreeSet<PointId>; 4],
    /// Grid points per superscript (roots of grid-role copies).
    pub grid_points: [BTreeSet<PointId>; 4],
    /// First tiles per superscript (roots of tile-role copies).
    pub tile1_points: [BTreeSet<PointId>; 4],
    /// Second tiles per superscript (order-2 greatest points of tile copies).
    pub tile2_points: [BTreeSet<PointId>; 4],
    /// Path successor pairs per superscript.
    pub path_successor: [BTreeSet<(PointId, PointId)>; 4],
    /// Coordinatizations per superscript: owner -> (captured x's, captured y's).
    pub coordinates: [CoordinateTable; 4],
}

impl TaggedStructure {
    /// Capture: `x` strictly between the copy's two second-order least points,
    /// with every copy point before `x` in orders 1 and 3. Tile-role copies
    /// never capture.
    pub fn captures(&self, copy: CopyId, x: PointId) -> Result<bool, SemanticsError> {
        let c = &self.copies[copy];
        if c.role == Role::T {
            return Err(SemanticsError::WrongRole { role: Role::T });
        }
        Ok(self.captures_raw(c, x))
    }

    fn captures_raw(&self, c: &GadgetCopy, x: PointId) -> bool {
        c.role != Role::T
            && self.base.rank(x, 1) > c.max_rank1
            && self.base.rank(x, 3) > c.max_rank3
            && self.base.before(c.zone.0, x, 2)
            && self.base.before(x, c.zone.1, 2)
    }

    /// Every point captured by `copy` (tile-role copies capture nothing).
    pub fn captured_points(&self, copy: CopyId) -> Vec<PointId> {
        let c = &self.copies[copy];
        if c.role == Role::T {
            return Vec::new();
        }
        (0..self.base.len()).filter(|&x| self.captures_raw(c, x)).collect()
    }

    /// `g` is tiled by `t`: some grid-role copy of the pairing rooted at `g`
    /// captures `t`, and `t` is a tile point of the paired superscript.
    pub fn tiled_by(&self, g: PointId, t: PointId, pairing: (u8, u8)) -> bool {
        let (gs, ts) = pairing;
        if !self.grid_points[gs as usize].contains(&g) {
            return false;
        }
        if !self.tile1_points[ts as usize].contains(&t) && !self.tile2_points[ts as usize].contains(&t)
        {
            return false;
        }
        self.copies_rooted_at(g)
            .filter(|&c| self.copies[c].role == Role::G && self.copies[c].superscript == gs)
            .any(|c| self.captures_raw(&self.copies[c], t))
    }

    pub fn copies_rooted_at(&self, p: PointId) -> impl Iterator<Item = CopyId> + '_ {
        self.point_copies[p].iter().copied().filter(move |&c| self.copies[c].root == p)
    }

    /// The coordinatization of a grid or tile point: the unique pair when one
    /// exists, `None` when absent or ambiguous (ambiguity is a class-checker
    /// concern, not an error here).
    pub fn coordinatization(&self, g: PointId, superscript: u8) -> Option<(PointId, PointId)> {
        let (xs, ys) = self.coordinates[superscript as usize].get(&g)?;
        if xs.len() == 1 && ys.len() == 1 {
            Some((*xs.iter().next().unwrap(), *ys.iter().next().unwrap()))
        } else {
            None
        }
    }

    /// All coordinatizing pairs of a point (cross product of captured x and y
    /// path points).
    pub fn coordinatizations(&self, g: PointId, superscript: u8) -> Vec<(PointId, PointId)> {
        match self.coordinates[superscript as usize].get(&g) {
            None => Vec::new(),
            Some((xs, ys)) => xs
                .iter()
                .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
                .collect(),
        }
    }

    /// Horizontal successor pairs among grid points (or among first tiles) of
    /// one superscript: `h` succeeds `g` when their y-coordinates match and
    /// `h`'s x-coordinate is a path successor of `g`'s.
    pub fn horizontal_successors(&self, superscript: u8) -> BTreeSet<(PointId, PointId)> {
        self.grid_like_successors(superscript, true)
    }

    /// Vertical successor pairs, defined symmetrically on y-coordinates.
    pub fn vertical_successors(&self, superscript: u8) -> BTreeSet<(PointId, PointId)> {
        self.grid_like_successors(superscript, false)
    }

    fn grid_like_points(&self, superscript: u8) -> BTreeSet<PointId> {
        let s = superscript as usize;
        self.grid_points[s].union(&self.tile1_points[s]).copied().collect()
    }

    fn grid_like_successors(&self, superscript: u8, horizontal: bool) -> BTreeSet<(PointId, PointId)> {
        let s = superscript as usize;
        let mut out = BTreeSet::new();
        // Successors never mix grid points with tile points.
        for class in [&self.grid_points[s], &self.tile1_points[s]] {
            for &g in class.iter() {
                for &h in class.iter() {
                    for (gx, gy) in self.coordinatizations(g, superscript) {
                        for (hx, hy) in self.coordinatizations(h, superscript) {
                            let ok = if horizontal {
                                gy == hy && self.path_successor[s].contains(&(gx, hx))
                            } else {
                                gx == hx && self.path_successor[s].contains(&(gy, hy))
                            };
                            if ok {
                                out.insert((g, h));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Grid origins of a superscript: grid points coordinatized `(x, x)` with
    /// `x` an origin point.
    pub fn grid_origins(&self, superscript: u8) -> BTreeSet<PointId> {
        self.origins_in(&self.grid_points[superscript as usize], superscript)
    }

    /// Tile origins: first tiles coordinatized `(x, x)` with `x` an origin.
    pub fn tile_origins(&self, superscript: u8) -> BTreeSet<PointId> {
        self.origins_in(&self.tile1_points[superscript as usize], superscript)
    }

    fn origins_in(&self, class: &BTreeSet<PointId>, superscript: u8) -> BTreeSet<PointId> {
        let s = superscript as usize;
        class
            .iter()
            .copied()
            .filter(|&g| {
                self.coordinatizations(g, superscript)
                    .iter()
                    .any(|&(x, y)| x == y && self.origin_points[s].contains(&x))
            })
            .collect()
    }

    /// On the x-axis: some coordinatization has an origin y-coordinate.
    pub fn on_x_axis(&self, g: PointId, superscript: u8) -> bool {
        let s = superscript as usize;
        self.grid_like_points(superscript).contains(&g)
            && self
                .coordinatizations(g, superscript)
                .iter()
                .any(|&(_, y)| self.origin_points[s].contains(&y))
    }

    /// On the y-axis: some coordinatization has an origin x-coordinate.
    pub fn on_y_axis(&self, g: PointId, superscript: u8) -> bool {
        let s = superscript as usize;
        self.grid_like_points(superscript).contains(&g)
            && self
                .coordinatizations(g, superscript)
                .iter()
                .any(|&(x, _)| self.origin_points[s].contains(&x))
    }

    /// Path origins per superscript: origin points whose copy heads an actual
    /// chain (every origin point trivially heads a length-1 chain).
    pub fn path_origins(&self, superscript: u8) -> BTreeSet<PointId> {
        self.origin_points[superscript as usize].clone()
    }

    /// Relation of two special intervals in order 2: exactly one of below,
    /// above, intersect.
    pub fn interval_relation(&self, a: IntervalId, b: IntervalId) -> IntervalRelation {
        let ia = &self.intervals[a];
        let ib = &self.intervals[b];
        let bot = |i: &SpecialInterval| self.base.rank(i.bottom, 2);
        let top = |i: &SpecialInterval| self.base.rank(i.top, 2);
        if top(ia) <= bot(ib) {
            IntervalRelation::Below
        } else if top(ib) <= bot(ia) {
            IntervalRelation::Above
        } else {
            IntervalRelation::Intersect
        }
    }

    pub fn intervals_intersect(&self, a: IntervalId, b: IntervalId) -> bool {
        matches!(self.interval_relation(a, b), IntervalRelation::Intersect)
    }

    /// Intervals of one superscript pairing, in index order.
    pub fn pairing_intervals(&self, pairing: (u8, u8)) -> Vec<IntervalId> {
        (0..self.intervals.len())
            .filter(|&i| {
                let s = self.intervals[i].superscript;
                s == pairing.0 || s == pairing.1
            })
            .collect()
    }

    /// Horizontal predecessor intervals of interval `i` within its pairing:
    /// intervals of the same kind whose owner the owner of `i` horizontally
    /// succeeds.
    pub fn horizontal_predecessors(&self, i: IntervalId, pairing: (u8, u8)) -> Vec<IntervalId> {
        self.interval_predecessors(i, pairing, true)
    }

    pub fn vertical_predecessors(&self, i: IntervalId, pairing: (u8, u8)) -> Vec<IntervalId> {
        self.interval_predecessors(i, pairing, false)
    }

    fn interval_predecessors(
        &self,
        i: IntervalId,
        pairing: (u8, u8),
        horizontal: bool,
    ) -> Vec<IntervalId> {
        let it = &self.intervals[i];
        let sup = it.superscript;
        if sup != pairing.0 && sup != pairing.1 {
            return Vec::new();
        }
        let succ = if horizontal {
            self.horizontal_successors(sup)
        } else {
            self.vertical_successors(sup)
        };
        (0..self.intervals.len())
            .filter(|&j| {
                let jt = &self.intervals[j];
                jt.superscript == sup
                    && jt.kind == it.kind
                    && succ.contains(&(jt.owner, it.owner))
            })
            .collect()
    }

    /// Staged weak-coordinate fixpoint for one superscript pairing.
    ///
    /// Stage (0,0) seeds grid-origin and tile-origin intervals plus their
    /// intersectors; stage `(x, y)` adds intervals with the required
    /// predecessors already assigned, plus their intersectors. Coordinates
    /// are capped by the pairing's interval count, which bounds the fixpoint.
    pub fn weak_coordinates(&self, pairing: (u8, u8)) -> WeakCoordinateMap {
        let ids = self.pairing_intervals(pairing);
        let cap = ids.len() as u32;
        let mut assignment: Vec<BTreeSet<Coord>> = vec![BTreeSet::new(); self.intervals.len()];
        if ids.is_empty() {
            return WeakCoordinateMap { assignment, unique: true };
        }
        let origin_intervals: BTreeSet<IntervalId> = {
            let g0 = self.grid_origins(pairing.0);
            let t0 = self.tile_origins(pairing.1);
            ids.iter()
                .copied()
                .filter(|&i| {
                    let it = &self.intervals[i];
                    match it.kind {
                        IntervalKind::Connector => g0.contains(&it.owner),
                        IntervalKind::TileSet => t0.contains(&it.owner),
                    }
                })
                .collect()
        };
        let hp: Vec<Vec<IntervalId>> =
            ids.iter().map(|&i| self.horizontal_predecessors(i, pairing)).collect();
        let vp: Vec<Vec<IntervalId>> =
            ids.iter().map(|&i| self.vertical_predecessors(i, pairing)).collect();
        let pos: BTreeMap<IntervalId, usize> =
            ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();

        // Antilexicographic stages (y outer, x inner).
        for y in 0..=cap {
            for x in 0..=cap {
                let coord = (x, y);
                let mut base: BTreeSet<IntervalId> = BTreeSet::new();
                if coord == (0, 0) {
                    base = origin_intervals.clone();
                } else {
                    for (k, &i) in ids.iter().enumerate() {
                        let has_h = x > 0
                            && hp[k].iter().any(|&p| assignment[p].contains(&(x - 1, y)));
                        let has_v = y > 0
                            && vp[k].iter().any(|&p| assignment[p].contains(&(x, y - 1)));
                        let qualifies = match (x > 0, y > 0) {
                            (true, true) => has_h && has_v,
                            (true, false) => has_h,
                            (false, true) => has_v,
                            (false, false) => unreachable!(),
                        };
                        if qualifies {
                            base.insert(i);
                        }
                        let _ = pos;
                    }
                }
                if base.is_empty() {
                    continue;
                }
                for &i in &ids {
                    if base.contains(&i)
                        || base.iter().any(|&j| self.intervals_intersect(i, j))
                    {
                        assignment[i].insert(coord);
                    }
                }
            }
        }
        let unique = ids.iter().all(|&i| assignment[i].len() <= 1);
        WeakCoordinateMap { assignment, unique }
    }

    /// Point-level weak coordinates: every coordinate of every interval the
    /// point is an endpoint of.
    pub fn point_weak_coordinates(
        &self,
        map: &WeakCoordinateMap,
        pairing: (u8, u8),
    ) -> BTreeMap<PointId, BTreeSet<Coord>> {
        let mut out: BTreeMap<PointId, BTreeSet<Coord>> = BTreeMap::new();
        for &i in self.pairing_intervals(pairing).iter() {
            let it = &self.intervals[i];
            for p in [it.bottom, it.top] {
                out.entry(p).or_default().extend(assignment_iter(map, i));
            }
        }
        out.retain(|_, v| !v.is_empty());
        out
    }
}

fn assignment_iter(map: &WeakCoordinateMap, i: IntervalId) -> impl Iterator<Item = Coord> + '_ {
    map.assignment[i].iter().copied()
}

/// Detect every copy of every family element in `base` and derive all
/// semantics. Fails when the total number of copies exceeds `budget`.
pub fn detect_copies(
    base: &MultiPerm,
    gadgets: &GadgetSet,
    budget: usize,
) -> Result<TaggedStructure, SemanticsError> {
    if base.dims() != 3 {
        return Err(SemanticsError::WrongDims { dims: base.dims() });
    }
    let per_element: Vec<Result<matcher::CopyEnumeration, matcher::MatchError>> =
        exec::map_collect(gadgets.elements(), |e| {
            matcher::enumerate_copies(&e.shape, base, Some(budget + 1))
        });
    let mut copies: Vec<GadgetCopy> = Vec::new();
    for (e, enumeration) in gadgets.elements().iter().zip(per_element) {
        let enumeration = enumeration?;
        if !enumeration.complete {
            return Err(SemanticsError::BudgetExceeded { budget });
        }
        let (lo_pos, hi_pos) = e.order2_least_positions();
        let top_pos = e.order2_greatest_position();
        for emb in enumeration.copies {
            let points = emb.map;
            let max_rank1 = points.iter().map(|&p| base.rank(p, 1)).max().unwrap();
            let max_rank3 = points.iter().map(|&p| base.rank(p, 3)).max().unwrap();
            copies.push(GadgetCopy {
                role: e.role,
                superscript: e.superscript,
                root: points[0],
                zone: (points[lo_pos], points[hi_pos]),
                order2_top: points[top_pos],
                max_rank1,
                max_rank3,
                points,
            });
        }
        if copies.len() > budget {
            return Err(SemanticsError::BudgetExceeded { budget });
        }
    }
    copies.sort_by(|a, b| (a.superscript, a.role, &a.points).cmp(&(b.superscript, b.role, &b.points)));
    Ok(tag_from_copies(base.clone(), copies))
}

/// Build the tagged view from an explicit copy list (used by detection and by
/// canonical builders for their ledger cross-checks).
pub fn tag_from_copies(base: MultiPerm, copies: Vec<GadgetCopy>) -> TaggedStructure {
    let n = base.len();
    let mut point_copies: Vec<Vec<CopyId>> = vec![Vec::new(); n];
    for (ci, c) in copies.iter().enumerate() {
        for &p in &c.points {
            point_copies[p].push(ci);
        }
    }
    let mut path_points: [BTreeSet<PointId>; 4] = Default::default();
    let mut origin_points: [BTreeSet<PointId>; 4] = Default::default();
    let mut grid_points: [BTreeSet<PointId>; 4] = Default::default();
    let mut tile1_points: [BTreeSet<PointId>; 4] = Default::default();
    let mut tile2_points: [BTreeSet<PointId>; 4] = Default::default();
    let mut intervals: Vec<SpecialInterval> = Vec::new();
    for (ci, c) in copies.iter().enumerate() {
        let s = c.superscript as usize;
        match c.role {
            Role::P => {
                path_points[s].insert(c.root);
            }
            Role::O => {
                path_points[s].insert(c.root);
                origin_points[s].insert(c.root);
            }
            Role::G => {
                grid_points[s].insert(c.root);
                intervals.push(SpecialInterval {
                    kind: IntervalKind::Connector,
                    copy: ci,
                    superscript: c.superscript,
                    owner: c.root,
                    bottom: c.zone.0,
                    top: c.zone.1,
                });
            }
            Role::T => {
                tile1_points[s].insert(c.root);
                tile2_points[s].insert(c.order2_top);
                intervals.push(SpecialInterval {
                    kind: IntervalKind::TileSet,
                    copy: ci,
                    superscript: c.superscript,
                    owner: c.root,
                    bottom: c.root,
                    top: c.order2_top,
                });
            }
            Role::X | Role::Y => {}
        }
    }
    let mut tagged = TaggedStructure {
        base,
        copies,
        intervals,
        point_copies,
        path_points,
        origin_points,
        grid_points,
        tile1_points,
        tile2_points,
        path_successor: Default::default(),
        coordinates: Default::default(),
    };
    // Path successors: path or origin copies capturing path points.
    for s in 0..4u8 {
        let mut succ = BTreeSet::new();
        for c in &tagged.copies {
            if c.superscript != s || !matches!(c.role, Role::P | Role::O) {
                continue;
            }
            for &p in tagged.path_points[s as usize].iter() {
                if tagged.captures_raw(c, p) {
                    succ.insert((c.root, p));
                }
            }
        }
        tagged.path_successor[s as usize] = succ;
    }
    // Coordinatizations: X and Y copies rooted at grid-like points capturing
    // path points of the same superscript.
    for s in 0..4u8 {
        let mut coords: CoordinateTable = BTreeMap::new();
        let carriers: BTreeSet<PointId> = tagged.grid_points[s as usize]
            .union(&tagged.tile1_points[s as usize])
            .copied()
            .collect();
        for c in &tagged.copies {
            if c.superscript != s || !matches!(c.role, Role::X | Role::Y) {
                continue;
            }
            if !carriers.contains(&c.root) {
                continue;
            }
            for &p in tagged.path_points[s as usize].iter() {
                if tagged.captures_raw(c, p) {
                    let entry = coords.entry(c.root).or_default();
                    match c.role {
                        Role::X => entry.0.insert(p),
                        Role::Y => entry.1.insert(p),
                        _ => unreachable!(),
                    };
                }
            }
        }
        coords.retain(|_, (xs, ys)| !xs.is_empty() && !ys.is_empty());
        tagged.coordinates[s as usize] = coords;
    }
    tagged
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Unstaged saturation oracle for weak coordinates: iterate the defining
    //! cases chaotically until nothing changes, with the same coordinate cap.
    use super::*;

    pub fn weak_coordinates_saturation(
        t: &TaggedStructure,
        pairing: (u8, u8),
    ) -> WeakCoordinateMap {
        let ids = t.pairing_intervals(pairing);
        let cap = ids.len() as u32;
        let mut assignment: Vec<BTreeSet<Coord>> = vec![BTreeSet::new(); t.intervals.len()];
        if ids.is_empty() {
            return WeakCoordinateMap { assignment, unique: true };
        }
        let g0 = t.grid_origins(pairing.0);
        let t0 = t.tile_origins(pairing.1);
        let is_origin = |i: IntervalId| {
            let it = &t.intervals[i];
            match it.kind {
                IntervalKind::Connector => g0.contains(&it.owner),
                IntervalKind::TileSet => t0.contains(&it.owner),
            }
        };
        let hp: BTreeMap<IntervalId, Vec<IntervalId>> =
            ids.iter().map(|&i| (i, t.horizontal_predecessors(i, pairing))).collect();
        let vp: BTreeMap<IntervalId, Vec<IntervalId>> =
            ids.iter().map(|&i| (i, t.vertical_predecessors(i, pairing))).collect();
        loop {
            let mut changed = false;
            for &i in &ids {
                for y in 0..=cap {
                    for x in 0..=cap {
                        if assignment[i].contains(&(x, y)) {
                            continue;
                        }
                        let direct = |j: IntervalId, assignment: &Vec<BTreeSet<Coord>>| -> bool {
                            if (x, y) == (0, 0) {
                                return is_origin(j);
                            }
                            let has_h = x > 0
                                && hp[&j].iter().any(|&p| assignment[p].contains(&(x - 1, y)));
                            let has_v = y > 0
                                && vp[&j].iter().any(|&p| assignment[p].contains(&(x, y - 1)));
                            match (x > 0, y > 0) {
                                (true, true) => has_h && has_v,
                                (true, false) => has_h,
                                (false, true) => has_v,
                                (false, false) => unreachable!(),
                            }
                        };
                        let ok = direct(i, &assignment)
                            || ids.iter().any(|&j| {
                                direct(j, &assignment) && t.intervals_intersect(i, j)
                            });
                        if ok {
                            assignment[i].insert((x, y));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let unique = ids.iter().all(|&i| assignment[i].len() <= 1);
        WeakCoordinateMap { assignment, unique }
    }
}
