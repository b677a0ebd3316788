//! Construction and numerical certification of Einstein hypersurfaces in the
//! rank-two symmetric spaces SU(3)/SO(3) and SL(3)/SO(3), and of the
//! codimension-one solvmanifolds coming from Iwasawa decompositions.

pub mod ambient;
pub mod dual;
pub mod error;
pub mod expr;
pub mod lie;
pub mod linalg;
pub mod roots;
pub mod solv;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
