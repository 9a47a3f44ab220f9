#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bmo;
pub mod error;
pub mod field;
pub mod harness;
pub mod intrinsic;
pub mod lp;
pub mod morrey;
pub mod orlicz;
pub mod young;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/young.md")]
    pub struct Young;
    #[doc = include_str!("../../../book/src/orlicz.md")]
    pub struct Orlicz;
    #[doc = include_str!("../../../book/src/morrey.md")]
    pub struct Morrey;
    #[doc = include_str!("../../../book/src/square_functions.md")]
    pub struct SquareFunctions;
    #[doc = include_str!("../../../book/src/bmo.md")]
    pub struct Bmo;
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/harness.md")]
    pub struct Harness;
}
