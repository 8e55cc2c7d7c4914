//! Searching for binary q-analogs of Steiner triple systems with prescribed
//! automorphism groups via Kramer-Mesner matrices and exact cover.

pub mod catalog;
pub mod design_theory;
pub mod error;
pub mod exact_cover;
pub mod gf2;
pub mod grassmannian;
pub mod group_action;
pub mod kramer_mesner;
pub mod pipeline;

pub use error::{Error, Result};
pub use gf2::{Gf2Matrix, Gf2Vector};
pub use grassmannian::{GrassmannianIndex, Subspace};
pub use group_action::{MatrixGroup, OrbitPartition, OrbitSignature};
