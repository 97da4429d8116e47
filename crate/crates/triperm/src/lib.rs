//! Finite structures carrying several linear orders (3 by default), and the
//! machinery built on top of them:
//!
//! - [`structure`]: the base type [`MultiPerm`], induced substructures,
//!   reducts/expansions, and the `.mperm` serialization format.
//! - [`matcher`]: order-preserving pattern containment — decision,
//!   enumeration of copies, and avoidance against pattern lists.
//! - [`gadgets`]: families of rigid antichain elements used to encode
//!   unary predicates and edges inside plain order structures.
//! - [`semantics`]: detection of gadget copies inside a structure and the
//!   derived notions: capture, coordinates, successor relations, special
//!   intervals, and weak coordinates.
//! - [`tiling`]: string tiling problems and Wang tile problems, bounded
//!   solvers, and a block codec translating Wang problems into string ones.
//! - [`classes`]: compiling a tiling problem into a constrained hereditary
//!   class, semantic membership checking, and materialization of small
//!   forbidden configurations.
//! - [`canonical`]: canonical grid and tile-grid models with an exact
//!   placement ledger.
//! - [`jep`]: constructive joint embedding driven by a tiling, order-merge
//!   states, brute-force joint-embedding search, and tiling extraction.
//! - [`render`]: deterministic SVG projections onto the first two orders.
//!
//! The crate is data-parallel over copy detection, constraint evaluation and
//! search frontiers when the `parallel` feature is enabled (the default);
//! disabling it yields a dependency-free sequential build with identical
//! results.

// Rank arrays are indexed by point id throughout; index loops are the
// clearer idiom for that.
#![allow(clippy::needless_range_loop)]

pub mod exec;
pub mod structure;
pub mod matcher;
pub mod semantics;
pub mod gadgets;

pub mod tiling;
pub mod canonical;
pub mod classes;
pub mod jep;
pub mod render;





pub use canonical::{canonical_a, canonical_b, canonical_q_a, canonical_q_b, CanonicalBuild};
pub use classes::{check_membership, ClassDescriptor, ClassSpec, Verdict};
pub use gadgets::{build_gadget_family, GadgetSet, Role, Variant};
pub use matcher::{embeds, enumerate_copies, find_embedding, Embedding};
pub use semantics::{detect_copies, TaggedStructure};
pub use structure::{MultiPerm, PointId, StructureError};
pub use tiling::{StringTilingProblem, Tiling, WangProblem};




