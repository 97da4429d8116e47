//! Families of rigid shapes used to encode unary predicates.
//!
//! Every element is a structure on `size` points whose third order is the
//! reverse of its first, with five distinguished points (first-order least and
//! greatest, second-order greatest, and the two second-order least) pairwise
//! distinct, and the first-order greatest point lying second-order below the
//! first-order least. All elements of a family share the same size, so
//! pairwise non-containment reduces to pairwise inequality of shapes; the
//! family constructor still verifies non-containment with the matcher.
//!
//! Roles tag what an element encodes: `X`/`Y` coordinate edges, `P` path
//! points, `O` path origins, `G` grid points (whose copies span connector
//! intervals), and `T` tile sets (whose copies span tile-set intervals).
//! Superscripts 0/1 carry the grid/tile split; the doubled variant adds
//! mirrored superscripts 2/3.

use crate::matcher;
use crate::structure::MultiPerm;
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    X,
    Y,
    P,
    O,
    G,
    T,
}

impl Role {
    pub fn letter(self) -> char {
        match self {
            Role::X => 'X',
            Role::Y => 'Y',
            Role::P => 'P',
            Role::O => 'O',
            Role::G => 'G',
            Role::T => 'T',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    P,
    Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("family needs {needed} qualifying shapes of size {size}, only {available} exist")]
    FamilyTooSmall { size: usize, needed: usize, available: usize },
    #[error("family verification failed: {0}")]
    Verification(String),
}

/// One tagged element of a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainElement {
    pub role: Role,
    pub superscript: u8,
    pub shape: MultiPerm,
}

impl AntichainElement {
    pub fn size(&self) -> usize {
        self.shape.len()
    }

    /// First-order position (always 0) is the root; its rank in order 2.
    pub fn root_order2_rank(&self) -> u32 {
        self.shape.rank(0, 2)
    }

    /// First-order positions of the points with order-2 ranks 0 and 1.
    pub fn order2_least_positions(&self) -> (usize, usize) {
        let lo = (0..self.size()).find(|&i| self.shape.rank(i, 2) == 0).unwrap();
        let hi = (0..self.size()).find(|&i| self.shape.rank(i, 2) == 1).unwrap();
        (lo, hi)
    }

    /// First-order position of the order-2 greatest point.
    pub fn order2_greatest_position(&self) -> usize {
        let top = self.size() as u32 - 1;
        (0..self.size()).find(|&i| self.shape.rank(i, 2) == top).unwrap()
    }
}

/// A role-and-superscript indexed family of elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetSet {
    pub variant: Variant,
    pub size: usize,
    pub seed: u64,
    elements: Vec<AntichainElement>,
}

/// Roles in family order for one superscript pairing `(grid_sup, tile_sup)`.
fn pairing_roles(grid_sup: u8, tile_sup: u8) -> Vec<(Role, u8)> {
    vec![
        (Role::X, grid_sup),
        (Role::Y, grid_sup),
        (Role::P, grid_sup),
        (Role::O, grid_sup),
        (Role::G, grid_sup),
        (Role::X, tile_sup),
        (Role::Y, tile_sup),
        (Role::P, tile_sup),
        (Role::O, tile_sup),
        (Role::T, tile_sup),
    ]
}

impl GadgetSet {
    pub fn elements(&self) -> &[AntichainElement] {
        &self.elements
    }

    pub fn element(&self, role: Role, superscript: u8) -> Option<&AntichainElement> {
        self.elements
            .iter()
            .find(|e| e.role == role && e.superscript == superscript)
    }

    /// Superscript pairings in force: `(grid superscript, tile superscript)`.
    pub fn pairings(&self) -> Vec<(u8, u8)> {
        match self.variant {
            Variant::P => vec![(0, 1)],
            Variant::Q => vec![(0, 1), (2, 3)],
        }
    }

    pub fn superscripts(&self) -> Vec<u8> {
        match self.variant {
            Variant::P => vec![0, 1],
            Variant::Q => vec![0, 1, 2, 3],
        }
    }
}

/// Second-order rank sequences that qualify as element shapes of this size.
///
/// A sequence `sigma` qualifies when `sigma[0]` (root rank) and
/// `sigma[last]` avoid ranks `{0, 1, size-1}` and the first-order greatest
/// point sits second-order below the root.
fn qualifying_shapes(size: usize) -> impl Iterator<Item = Vec<u32>> {
    let last = size.saturating_sub(1) as u32;
    (0..size as u32)
        .permutations(size)
        .filter(move |sigma| {
            if size < 5 {
                return false;
            }
            let first = sigma[0];
            let end = sigma[size - 1];
            first > 1 && first < last && end > 1 && end < last && end < first
        })
}

fn shape_to_structure(sigma: &[u32]) -> MultiPerm {
    let s = sigma.len();
    let rows: Vec<Vec<u32>> = sigma
        .iter()
        .enumerate()
        .map(|(i, &r2)| vec![i as u32, r2, (s - 1 - i) as u32])
        .collect();
    MultiPerm::from_rank_rows_with_dims(3, rows).expect("qualifying shape is valid")
}

/// Build a family of the given variant and element size.
///
/// Qualifying shapes are enumerated in lexicographic order; `seed` many are
/// skipped before roles are assigned, so the result is deterministic in
/// `(variant, size, seed)`. The construction is verified before returning:
/// all structural invariants plus pairwise non-containment via the matcher.
pub fn build_gadget_family(
    variant: Variant,
    size: usize,
    seed: u64,
) -> Result<GadgetSet, GadgetError> {
    let roles: Vec<(Role, u8)> = match variant {
        Variant::P => pairing_roles(0, 1),
        Variant::Q => {
            let mut r = pairing_roles(0, 1);
            r.extend(pairing_roles(2, 3));
            r
        }
    };
    let needed = roles.len();
    let shapes: Vec<Vec<u32>> = qualifying_shapes(size)
        .skip(seed as usize)
        .take(needed)
        .collect();
    if shapes.len() < needed {
        let available = qualifying_shapes(size).count();
        return Err(GadgetError::FamilyTooSmall { size, needed, available });
    }
    let elements: Vec<AntichainElement> = roles
        .into_iter()
        .zip(shapes)
        .map(|((role, superscript), sigma)| AntichainElement {
            role,
            superscript,
            shape: shape_to_structure(&sigma),
        })
        .collect();
    let set = GadgetSet { variant, size, seed, elements };
    verify_family(&set)?;
    Ok(set)
}

/// Check every family invariant; used by the constructor and by tests.
pub fn verify_family(set: &GadgetSet) -> Result<(), GadgetError> {
    let fail = |msg: String| Err(GadgetError::Verification(msg));
    for e in &set.elements {
        let s = e.size();
        if s < 5 {
            return fail(format!("{}{} has fewer than 5 points", e.role.letter(), e.superscript));
        }
        for i in 0..s {
            if e.shape.rank(i, 3) != (s as u32 - 1) - e.shape.rank(i, 1) {
                return fail("order 3 is not the reverse of order 1".into());
            }
        }
        // Distinguished points: order-1 least (position 0), order-1 greatest,
        // order-2 greatest, and the two order-2 least must be 5 distinct points.
        let (lo2a, lo2b) = e.order2_least_positions();
        let top2 = e.order2_greatest_position();
        let mut d = vec![0, s - 1, top2, lo2a, lo2b];
        d.sort_unstable();
        d.dedup();
        if d.len() != 5 {
            return fail(format!(
                "{}{}: distinguished points are not distinct",
                e.role.letter(),
                e.superscript
            ));
        }
        if e.shape.rank(s - 1, 2) >= e.shape.rank(0, 2) {
            return fail("order-1 greatest point is not order-2 below the root".into());
        }
    }
    for a in &set.elements {
        for b in &set.elements {
            if (a.role, a.superscript) == (b.role, b.superscript) {
                continue;
            }
            if matcher::embeds(&a.shape, &b.shape).expect("same dims") {
                return fail(format!(
                    "{}{} embeds into {}{}",
                    a.role.letter(),
                    a.superscript,
                    b.role.letter(),
                    b.superscript
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_family_has_ten_pairwise_incomparable_elements() {
        let set = build_gadget_family(Variant::P, 7, 0).unwrap();
        assert_eq!(set.elements().len(), 10);
        // 90 ordered pairs all fail to embed (checked again here, on top of
        // the constructor's own verification).
        let mut pairs = 0;
        for a in set.elements() {
            for b in set.elements() {
                if (a.role, a.superscript) != (b.role, b.superscript) {
                    assert!(!matcher::embeds(&a.shape, &b.shape).unwrap());
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs, 90);
    }

    #[test]
    fn q_family_doubles_the_alphabet() {
        let set = build_gadget_family(Variant::Q, 7, 0).unwrap();
        assert_eq!(set.elements().len(), 20);
        for sup in [0, 2] {
            assert!(set.element(Role::G, sup).is_some());
            assert!(set.element(Role::T, sup).is_none());
        }
        for sup in [1, 3] {
            assert!(set.element(Role::T, sup).is_some());
            assert!(set.element(Role::G, sup).is_none());
        }
        // Mirrored superscripts carry distinct shapes.
        let x0 = set.element(Role::X, 0).unwrap();
        let x2 = set.element(Role::X, 2).unwrap();
        assert_ne!(x0.shape, x2.shape);
    }

    #[test]
    fn size_four_is_too_small() {
        assert!(matches!(
            build_gadget_family(Variant::P, 4, 0),
            Err(GadgetError::FamilyTooSmall { .. })
        ));
    }

    #[test]
    fn seed_shifts_the_selection_deterministically() {
        let a = build_gadget_family(Variant::P, 7, 0).unwrap();
        let b = build_gadget_family(Variant::P, 7, 0).unwrap();
        assert_eq!(a, b);
        let c = build_gadget_family(Variant::P, 7, 3).unwrap();
        assert_ne!(a.elements()[0].shape, c.elements()[0].shape);
    }
}
