//! Comparison, paradoxical decompositions and invariant measures for ample
//! groupoids given by prefix-exchange bisections over one-sided subshifts.
//!
//! ```
//! use ample_comparison::catalog;
//! use ample_comparison::comparison::Explorer;
//! use ample_comparison::symbolic::Clopen;
//!
//! let g = catalog::o2_action();
//! let x = Clopen::whole(g.shift());
//! assert!(Explorer::new(&g, 8).paradoxical(&x).is_verified());
//! ```

pub mod bisections;
pub mod catalog;
pub mod comparison;
pub mod labels;
pub mod lp;
pub mod measures;
pub mod records;
pub mod semigroups;
pub mod symbolic;
pub mod sysfile;

/// The guide's chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/clopens.md")]
    pub mod clopens {}
    #[doc = include_str!("../../../book/src/bisections.md")]
    pub mod bisections {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    pub mod comparison {}
    #[doc = include_str!("../../../book/src/measures.md")]
    pub mod measures {}
    #[doc = include_str!("../../../book/src/semigroups.md")]
    pub mod semigroups {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    pub mod certificates {}
    #[doc = include_str!("../../../book/src/system-files.md")]
    pub mod system_files {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
