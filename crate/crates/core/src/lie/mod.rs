//! Lie algebras from structure constants, named matrix groups, and
//! coadjoint stabilizers.

pub mod algebra;
pub mod catalog;
pub mod group;
pub mod stabilizer;

pub use algebra::{Covector, LieAlgebra, Realization};
pub use group::{ad_exp, coad_exp, GroupElement, GroupKind};
pub use stabilizer::{reductive_complement, stabilizer_algebra};
