//! PGL(2) over F and E: Cartan and Iwasawa heights, the truncation function, shift
//! constants, tree enumeration and spherical Hecke functions.

mod element;
mod hecke;
mod tree;

use thiserror::Error;

pub use element::{
    cartan_height, iwasawa_heights, shift_constant, truncation_u, GroupElement, ShiftConstant,
};
pub use hecke::HeckeFunction;
pub use tree::{
    intersection_number, sphere_measure, tree_ball, tree_sphere, FieldKind, TreeCaps, TreeVertex,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("singular matrix")]
    Singular,
    #[error("element is not defined over the base field")]
    NotBaseField,
    #[error("radius {radius} exceeds the configured cap {cap}")]
    RadiusCap { radius: u32, cap: u32 },
}
