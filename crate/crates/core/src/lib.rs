//! Finite-scale equivariant coarse geometry.
//!
//! Spaces are finite Γ-sets with a saturated coarse structure and a bornology. On top of
//! them sit equivariant coarse homology over ℤ, change-of-group functors, controlled
//! module categories and Rips complexes.

pub mod constructions;
pub mod controlled;
pub mod error;
pub mod flasque;
pub mod group;
pub mod group_change;
pub mod homology;
pub mod linalg;
pub mod maps;
pub mod rips;
pub mod space;
pub mod subsets;

pub use error::{CoarseError, Result};
pub use group::{FiniteGroup, GroupHom};
pub use maps::{analyze_map, MapReport, SearchConfig, SpaceMap, Verdict};
pub use space::{Action, Bornology, CheckResult, Entourage, PointSet, Space, ValidationReport};
