//! Constant terms of Hilbert Eisenstein series at every cusp class of a
//! totally real field, with exact and certified numerical back ends.

pub mod arith;
pub mod class_group;
pub mod cli;
pub mod cusp_geometry;
pub mod cyclo;
pub mod error;
pub mod eisenstein;
pub mod field_core;
pub mod hecke_l;
pub mod ideal_arith;
pub mod oracle_hilbert;
pub mod oracle_q;
pub mod precision;
pub mod ray_class;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use field_core::{Elt, Field, FieldSpec, SignVector};
pub use ideal_arith::Ideal;
