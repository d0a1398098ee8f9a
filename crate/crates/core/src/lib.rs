//! Kolyvagin derivative classes, Kurihara numbers and Mazur-Tate elements
//! for elliptic curves over Q, computed from modular symbols mod p.

pub mod arith;
pub mod eigen;
pub mod error;
pub mod ext;
pub mod formdata;
pub mod fp;
pub mod kurihara;
pub mod linalg;
pub mod manin;
pub mod mazur_tate;
pub mod pipeline;

pub use error::{Error, Result};
pub use fp::{DlogTable, PrimeField};
pub use linalg::SparseMat;
pub use manin::{ManinSpace, P1Index, Sign};
