//! Canonical grid and tile-grid models, built to a fixed deterministic layout
//! with a ledger of every placed copy.
//!
//! A grid build of side `n` consists of a path of `n` daisy-chained copies
//! (one origin copy, then path copies, each capturing the next root) and, for
//! every grid index `(x, y)`, a cluster of three copies sharing a root: an X
//! copy capturing path root `x`, a Y copy capturing path root `y`, and a
//! connector-role copy (grid role for grid builds, tile role for tile
//! builds).
//!
//! First order: clusters in antilexicographic index order (each cluster laid
//! out root, X body, Y body, connector body), then the path copies. Second
//! order, bottom to top: a path band in which copy zones nest as a descending
//! staircase and the X/Y zone endpoints straddle their target roots tightly;
//! a band of the remaining low X/Y body points; then one block per grid index
//! holding the whole connector-role copy with the X/Y upper bodies tucked
//! above the shared root. Third order: reversed inside every placed copy,
//! agreeing with the first order across copies. That completion rule is
//! exactly why no unintended copies arise: any copy must be order-reversed on
//! all its point pairs, which confines it to a single placed copy, and equal
//! element sizes then force it to be that copy.
//!
//! The doubled models are block unions of two builds with the stated
//! inter-block order relations.

use crate::gadgets::{AntichainElement, GadgetSet, Role, Variant};
use crate::semantics::{tag_from_copies, GadgetCopy, TaggedStructure};
use crate::structure::{MultiPerm, PointId};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("grid side must be at least 1")]
    EmptyGrid,
    #[error("gadget set lacks element {role:?} with superscript {superscript}")]
    MissingElement { role: Role, superscript: u8 },
    #[error("model requires the doubled variant")]
    VariantMismatch,
}

/// A copy placed by a builder, with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlacedCopy {
    pub role: Role,
    pub superscript: u8,
    pub grid_index: Option<(u32, u32)>,
    pub path_index: Option<u32>,
    /// Host points in pattern first-order rank; `points[0]` is the root.
    pub points: Vec<PointId>,
}

/// A built structure plus the intended-copy ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalBuild {
    pub structure: MultiPerm,
    pub ledger: Vec<PlacedCopy>,
    pub grid_side: usize,
}

impl CanonicalBuild {
    /// Ledger copies in the normal form used by detection, for exactness checks.
    pub fn ledger_keys(&self) -> Vec<(u8, Role, Vec<PointId>)> {
        let mut keys: Vec<_> = self
            .ledger
            .iter()
            .map(|c| (c.superscript, c.role, c.points.clone()))
            .collect();
        keys.sort();
        keys
    }

    /// Tag the structure by trusting the ledger instead of running detection.
    pub fn tagged_from_ledger(&self, gadgets: &GadgetSet) -> TaggedStructure {
        let mut copies: Vec<GadgetCopy> = self
            .ledger
            .iter()
            .map(|c| {
                let e = gadgets
                    .element(c.role, c.superscript)
                    .expect("ledger role exists in family");
                placed_to_copy(&self.structure, e, c)
            })
            .collect();
        copies.sort_by(|a, b| {
            (a.superscript, a.role, &a.points).cmp(&(b.superscript, b.role, &b.points))
        });
        tag_from_copies(self.structure.clone(), copies)
    }
}

fn placed_to_copy(base: &MultiPerm, e: &AntichainElement, c: &PlacedCopy) -> GadgetCopy {
    let (lo, hi) = e.order2_least_positions();
    let top = e.order2_greatest_position();
    GadgetCopy {
        role: c.role,
        superscript: c.superscript,
        root: c.points[0],
        zone: (c.points[lo], c.points[hi]),
        order2_top: c.points[top],
        max_rank1: c.points.iter().map(|&p| base.rank(p, 1)).max().unwrap(),
        max_rank3: c.points.iter().map(|&p| base.rank(p, 3)).max().unwrap(),
        points: c.points.clone(),
    }
}

/// Grid-superscript model: a path and an n-by-n grid of connector copies.
pub fn canonical_a(n: usize, gadgets: &GadgetSet) -> Result<CanonicalBuild, CanonicalError> {
    build_grid_model(n, gadgets, 0, Role::G)
}

/// Tile-superscript model: as [`canonical_a`] with tile-set copies.
pub fn canonical_b(n: usize, gadgets: &GadgetSet) -> Result<CanonicalBuild, CanonicalError> {
    build_grid_model(n, gadgets, 1, Role::T)
}

/// Doubled model A: grid build (superscript 0) below and before a tile build
/// with superscript 3, all three orders agreeing between the blocks.
pub fn canonical_q_a(n: usize, gadgets: &GadgetSet) -> Result<CanonicalBuild, CanonicalError> {
    if gadgets.variant != Variant::Q {
        return Err(CanonicalError::VariantMismatch);
    }
    let a0 = build_grid_model(n, gadgets, 0, Role::G)?;
    let b3 = build_grid_model(n, gadgets, 3, Role::T)?;
    Ok(block_union(a0, b3, false))
}

/// Doubled model B: grid build with superscript 2 first in orders 1 and 3,
/// with the superscript-1 tile build below it in order 2.
pub fn canonical_q_b(n: usize, gadgets: &GadgetSet) -> Result<CanonicalBuild, CanonicalError> {
    if gadgets.variant != Variant::Q {
        return Err(CanonicalError::VariantMismatch);
    }
    let a2 = build_grid_model(n, gadgets, 2, Role::G)?;
    let b1 = build_grid_model(n, gadgets, 1, Role::T)?;
    Ok(block_union(a2, b1, true))
}

/// Union with `left` first in orders 1 and 3; `right_below_in_2` puts the
/// right block under the left in order 2.
fn block_union(left: CanonicalBuild, right: CanonicalBuild, right_below_in_2: bool) -> CanonicalBuild {
    let nl = left.structure.len();
    let nr = right.structure.len();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(nl + nr);
    for p in 0..nl {
        let shift2 = if right_below_in_2 { nr as u32 } else { 0 };
        rows.push(vec![
            p as u32,
            left.structure.rank(p, 2) + shift2,
            left.structure.rank(p, 3),
        ]);
    }
    for p in 0..nr {
        let shift2 = if right_below_in_2 { 0 } else { nl as u32 };
        rows.push(vec![
            (nl + p) as u32,
            right.structure.rank(p, 2) + shift2,
            right.structure.rank(p, 3) + nl as u32,
        ]);
    }
    let structure = MultiPerm::from_rank_rows_with_dims(3, rows).expect("union rows are valid");
    let mut ledger = left.ledger;
    ledger.extend(right.ledger.into_iter().map(|mut c| {
        for p in c.points.iter_mut() {
            *p += nl;
        }
        c
    }));
    CanonicalBuild { structure, ledger, grid_side: left.grid_side }
}

struct ElementLayout<'a> {
    element: &'a AntichainElement,
    /// `pos_of_rank[r]` is the pattern position with internal order-2 rank `r`.
    pos_of_rank: Vec<usize>,
    root_rank: usize,
}

fn layout(e: &AntichainElement) -> ElementLayout<'_> {
    let s = e.size();
    let mut pos_of_rank = vec![0usize; s];
    for pos in 0..s {
        pos_of_rank[e.shape.rank(pos, 2) as usize] = pos;
    }
    ElementLayout { element: e, pos_of_rank, root_rank: e.shape.rank(0, 2) as usize }
}

fn build_grid_model(
    n: usize,
    gadgets: &GadgetSet,
    superscript: u8,
    conn_role: Role,
) -> Result<CanonicalBuild, CanonicalError> {
    if n == 0 {
        return Err(CanonicalError::EmptyGrid);
    }
    let want = |role: Role| {
        gadgets
            .element(role, superscript)
            .ok_or(CanonicalError::MissingElement { role, superscript })
    };
    let x_el = layout(want(Role::X)?);
    let y_el = layout(want(Role::Y)?);
    let p_el = layout(want(Role::P)?);
    let o_el = layout(want(Role::O)?);
    let c_el = layout(want(conn_role)?);
    let s = x_el.element.size();

    let cluster_span = 3 * s - 2;
    let grid_count = n * n;
    let path_base = grid_count * cluster_span;
    let total = path_base + n * s;

    // Point helpers; clusters are in antilexicographic index order.
    let cluster_base = |x: usize, y: usize| (y * n + x) * cluster_span;
    let root_pt = |x: usize, y: usize| cluster_base(x, y);
    // Body position j in 1..s of each copy within a cluster.
    let x_pt = |x: usize, y: usize, j: usize| cluster_base(x, y) + j;
    let y_pt = |x: usize, y: usize, j: usize| cluster_base(x, y) + (s - 1) + j;
    let c_pt = |x: usize, y: usize, j: usize| cluster_base(x, y) + 2 * (s - 1) + j;
    let path_pt = |k: usize, j: usize| path_base + k * s + j;
    let path_layout = |k: usize| if k == 0 { &o_el } else { &p_el };
    // Point of a cluster copy at a given internal order-2 rank.
    let copy_point_at_rank =
        |lay: &ElementLayout, pt: &dyn Fn(usize) -> PointId, rank: usize| -> PointId {
            let pos = lay.pos_of_rank[rank];
            pt(pos)
        };

    // Order 2, from the bottom up.
    let mut order2: Vec<PointId> = Vec::with_capacity(total);
    // Straddle endpoints around path root `j`: X copies of column `j`, then Y
    // copies of row `j`, both in antilexicographic cluster order.
    let straddlers = |j: usize| -> Vec<(PointId, PointId)> {
        let mut out = Vec::new();
        for y in 0..n {
            let pt = |pos: usize| if pos == 0 { root_pt(j, y) } else { x_pt(j, y, pos) };
            out.push((
                copy_point_at_rank(&x_el, &pt, 0),
                copy_point_at_rank(&x_el, &pt, 1),
            ));
        }
        for x in 0..n {
            let pt = |pos: usize| if pos == 0 { root_pt(x, j) } else { y_pt(x, j, pos) };
            out.push((
                copy_point_at_rank(&y_el, &pt, 0),
                copy_point_at_rank(&y_el, &pt, 1),
            ));
        }
        out
    };
    let push_root_region = |order2: &mut Vec<PointId>, k: usize| {
        let lay = path_layout(k);
        let st = straddlers(k);
        for &(lo, _) in &st {
            order2.push(lo);
        }
        order2.push(path_pt(k, 0));
        for r in lay.root_rank + 1..s {
            order2.push(path_pt(k, lay.pos_of_rank[r]));
        }
        for &(_, hi) in st.iter().rev() {
            order2.push(hi);
        }
    };
    for k in (0..n).rev() {
        let lay = path_layout(k);
        order2.push(path_pt(k, lay.pos_of_rank[0]));
        if k + 1 < n {
            push_root_region(&mut order2, k + 1);
        }
        order2.push(path_pt(k, lay.pos_of_rank[1]));
        for r in 2..lay.root_rank {
            order2.push(path_pt(k, lay.pos_of_rank[r]));
        }
    }
    push_root_region(&mut order2, 0);
    // Low X/Y body band: internal ranks 2 .. root rank, cluster by cluster.
    for y in 0..n {
        for x in 0..n {
            for r in 2..x_el.root_rank {
                let pt = |pos: usize| if pos == 0 { root_pt(x, y) } else { x_pt(x, y, pos) };
                order2.push(copy_point_at_rank(&x_el, &pt, r));
            }
            for r in 2..y_el.root_rank {
                let pt = |pos: usize| if pos == 0 { root_pt(x, y) } else { y_pt(x, y, pos) };
                order2.push(copy_point_at_rank(&y_el, &pt, r));
            }
        }
    }
    // Connector blocks in antilexicographic order.
    for y in 0..n {
        for x in 0..n {
            let cpt = |pos: usize| if pos == 0 { root_pt(x, y) } else { c_pt(x, y, pos) };
            for r in 0..c_el.root_rank {
                order2.push(copy_point_at_rank(&c_el, &cpt, r));
            }
            order2.push(root_pt(x, y));
            for r in x_el.root_rank + 1..s {
                let pt = |pos: usize| if pos == 0 { root_pt(x, y) } else { x_pt(x, y, pos) };
                order2.push(copy_point_at_rank(&x_el, &pt, r));
            }
            for r in y_el.root_rank + 1..s {
                let pt = |pos: usize| if pos == 0 { root_pt(x, y) } else { y_pt(x, y, pos) };
                order2.push(copy_point_at_rank(&y_el, &pt, r));
            }
            for r in c_el.root_rank + 1..s {
                order2.push(copy_point_at_rank(&c_el, &cpt, r));
            }
        }
    }
    assert_eq!(order2.len(), total);

    // Order 3: reversed inside each placed copy, first-order blocks otherwise.
    let mut order3: Vec<PointId> = Vec::with_capacity(total);
    for y in 0..n {
        for x in 0..n {
            for j in (1..s).rev() {
                order3.push(x_pt(x, y, j));
            }
            for j in (1..s).rev() {
                order3.push(y_pt(x, y, j));
            }
            for j in (1..s).rev() {
                order3.push(c_pt(x, y, j));
            }
            order3.push(root_pt(x, y));
        }
    }
    for k in 0..n {
        for j in (1..s).rev() {
            order3.push(path_pt(k, j));
        }
        order3.push(path_pt(k, 0));
    }
    assert_eq!(order3.len(), total);

    let mut rows: Vec<Vec<u32>> = (0..total).map(|p| vec![p as u32, 0, 0]).collect();
    for (rank, &p) in order2.iter().enumerate() {
        rows[p][1] = rank as u32;
    }
    for (rank, &p) in order3.iter().enumerate() {
        rows[p][2] = rank as u32;
    }
    let structure = MultiPerm::from_rank_rows_with_dims(3, rows).expect("builder rows are valid");

    let mut ledger: Vec<PlacedCopy> = Vec::new();
    for k in 0..n {
        ledger.push(PlacedCopy {
            role: if k == 0 { Role::O } else { Role::P },
            superscript,
            grid_index: None,
            path_index: Some(k as u32),
            points: (0..s).map(|j| path_pt(k, j)).collect(),
        });
    }
    for y in 0..n {
        for x in 0..n {
            let mut xc = vec![root_pt(x, y)];
            xc.extend((1..s).map(|j| x_pt(x, y, j)));
            let mut yc = vec![root_pt(x, y)];
            yc.extend((1..s).map(|j| y_pt(x, y, j)));
            let mut cc = vec![root_pt(x, y)];
            cc.extend((1..s).map(|j| c_pt(x, y, j)));
            ledger.push(PlacedCopy {
                role: Role::X,
                superscript,
                grid_index: Some((x as u32, y as u32)),
                path_index: None,
                points: xc,
            });
            ledger.push(PlacedCopy {
                role: Role::Y,
                superscript,
                grid_index: Some((x as u32, y as u32)),
                path_index: None,
                points: yc,
            });
            ledger.push(PlacedCopy {
                role: conn_role,
                superscript,
                grid_index: Some((x as u32, y as u32)),
                path_index: None,
                points: cc,
            });
        }
    }
    Ok(CanonicalBuild { structure, ledger, grid_side: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::build_gadget_family;
    use crate::semantics::detect_copies;

    fn p_set() -> GadgetSet {
        build_gadget_family(Variant::P, 7, 0).unwrap()
    }

    #[test]
    fn sizes_match_the_layout() {
        let set = p_set();
        for n in 1..=3 {
            let b = canonical_a(n, &set).unwrap();
            assert_eq!(b.structure.len(), n * n * (3 * 7 - 2) + n * 7);
            assert_eq!(b.ledger.len(), n + 3 * n * n);
        }
    }

    #[test]
    fn detection_matches_ledger_exactly() {
        let set = p_set();
        for n in 1..=2 {
            for build in [canonical_a(n, &set).unwrap(), canonical_b(n, &set).unwrap()] {
                let tagged = detect_copies(&build.structure, &set, 100_000).unwrap();
                let mut detected: Vec<(u8, Role, Vec<usize>)> = tagged
                    .copies
                    .iter()
                    .map(|c| (c.superscript, c.role, c.points.clone()))
                    .collect();
                detected.sort();
                assert_eq!(detected, build.ledger_keys());
            }
        }
    }

    #[test]
    fn path_is_a_daisy_chain_and_grid_is_coordinatized() {
        let set = p_set();
        let n = 2;
        let build = canonical_a(n, &set).unwrap();
        let tagged = detect_copies(&build.structure, &set, 100_000).unwrap();
        let path_roots: Vec<usize> = build
            .ledger
            .iter()
            .filter(|c| c.path_index.is_some())
            .map(|c| c.points[0])
            .collect();
        // Successor chain p0 -> p1 -> ...
        for w in path_roots.windows(2) {
            assert!(tagged.path_successor[0].contains(&(w[0], w[1])));
        }
        assert_eq!(tagged.path_successor[0].len(), n - 1);
        // Origin has no predecessor.
        assert!(!tagged
            .path_successor[0]
            .iter()
            .any(|&(_, q)| q == path_roots[0]));
        // Each grid point is coordinatized by its indices' path roots.
        for c in build.ledger.iter().filter(|c| c.role == Role::G) {
            let (x, y) = c.grid_index.unwrap();
            let g = c.points[0];
            let coord = tagged.coordinatization(g, 0).unwrap();
            assert_eq!(coord, (path_roots[x as usize], path_roots[y as usize]));
        }
        // Grid origin is exactly the (0,0) point, on both axes.
        let g00 = build
            .ledger
            .iter()
            .find(|c| c.role == Role::G && c.grid_index == Some((0, 0)))
            .unwrap()
            .points[0];
        assert_eq!(tagged.grid_origins(0), std::iter::once(g00).collect());
        assert!(tagged.on_x_axis(g00, 0) && tagged.on_y_axis(g00, 0));
        let g10 = build
            .ledger
            .iter()
            .find(|c| c.role == Role::G && c.grid_index == Some((1, 0)))
            .unwrap()
            .points[0];
        assert!(tagged.on_x_axis(g10, 0) && !tagged.on_y_axis(g10, 0));
        // Horizontal and vertical successors follow the grid.
        let g01 = build
            .ledger
            .iter()
            .find(|c| c.role == Role::G && c.grid_index == Some((0, 1)))
            .unwrap()
            .points[0];
        assert!(tagged.horizontal_successors(0).contains(&(g00, g10)));
        assert!(tagged.vertical_successors(0).contains(&(g00, g01)));
    }

    #[test]
    fn connector_intervals_are_disjoint_and_antilex_increasing() {
        let set = p_set();
        let build = canonical_a(3, &set).unwrap();
        let tagged = build.tagged_from_ledger(&set);
        let mut by_index: Vec<((u32, u32), usize)> = Vec::new();
        for (i, iv) in tagged.intervals.iter().enumerate() {
            let owner = iv.owner;
            let c = build
                .ledger
                .iter()
                .find(|c| c.role == Role::G && c.points[0] == owner)
                .unwrap();
            let (x, y) = c.grid_index.unwrap();
            by_index.push(((y, x), i));
        }
        by_index.sort();
        for w in by_index.windows(2) {
            let lo = w[0].1;
            let hi = w[1].1;
            assert_eq!(
                tagged.interval_relation(lo, hi),
                crate::semantics::IntervalRelation::Below
            );
        }
    }

    #[test]
    fn weak_coordinates_agree_with_grid_indices() {
        let set = p_set();
        for (build, pairing) in [
            (canonical_a(2, &set).unwrap(), (0u8, 1u8)),
            (canonical_b(2, &set).unwrap(), (0u8, 1u8)),
        ] {
            let tagged = build.tagged_from_ledger(&set);
            let wc = tagged.weak_coordinates(pairing);
            assert!(wc.unique);
            for (i, iv) in tagged.intervals.iter().enumerate() {
                let c = build
                    .ledger
                    .iter()
                    .find(|c| (c.role == Role::G || c.role == Role::T) && c.points[0] == iv.owner)
                    .unwrap();
                assert_eq!(wc.coordinate(i), Some(c.grid_index.unwrap()));
            }
            let oracle = crate::semantics::oracle::weak_coordinates_saturation(&tagged, pairing);
            assert_eq!(wc.assignment, oracle.assignment);
        }
    }

    #[test]
    fn doubled_models_split_into_blocks() {
        let set = build_gadget_family(Variant::Q, 7, 0).unwrap();
        let qa = canonical_q_a(1, &set).unwrap();
        let tagged = detect_copies(&qa.structure, &set, 100_000).unwrap();
        let mut detected: Vec<(u8, Role, Vec<usize>)> = tagged
            .copies
            .iter()
            .map(|c| (c.superscript, c.role, c.points.clone()))
            .collect();
        detected.sort();
        assert_eq!(detected, qa.ledger_keys());
        // Every copy sits wholly inside one block.
        let half = qa.structure.len() / 2;
        for c in &tagged.copies {
            let in_first = c.points.iter().all(|&p| p < half);
            let in_second = c.points.iter().all(|&p| p >= half);
            assert!(in_first || in_second);
        }
        let qb = canonical_q_b(1, &set).unwrap();
        // Superscript-1 block is second in order 1 but below in order 2.
        let tagged_b = detect_copies(&qb.structure, &set, 100_000).unwrap();
        for c1 in tagged_b.copies.iter().filter(|c| c.superscript == 1) {
            for c2 in tagged_b.copies.iter().filter(|c| c.superscript == 2) {
                for &p1 in &c1.points {
                    for &p2 in &c2.points {
                        assert!(qb.structure.before(p1, p2, 2));
                        assert!(qb.structure.before(p2, p1, 1));
                    }
                }
            }
        }
        assert!(matches!(
            canonical_q_a(1, &p_set()),
            Err(CanonicalError::VariantMismatch)
        ));
    }

    #[test]
    fn order3_follows_the_copy_reversal_rule() {
        let set = p_set();
        let build = canonical_a(2, &set).unwrap();
        let s = &build.structure;
        // For every point pair: reversed iff they share a ledger copy.
        let mut share = vec![vec![false; s.len()]; s.len()];
        for c in &build.ledger {
            for &a in &c.points {
                for &b in &c.points {
                    share[a][b] = true;
                }
            }
        }
        for a in 0..s.len() {
            for b in 0..s.len() {
                if a == b {
                    continue;
                }
                let same1and3 = s.before(a, b, 1) == s.before(a, b, 3);
                assert_eq!(same1and3, !share[a][b], "points {a},{b}");
            }
        }
    }
}
