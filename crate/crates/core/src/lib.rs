//! View complexes of one-round snapshot protocols, the standard chromatic
//! subdivision, and explicit (equivariant) collapsing sequences between them.

pub mod complex;
mod enumerate;
pub mod error;
pub mod io;
pub mod morse;
pub mod oracle;
pub mod procset;
pub mod symmetry;
pub mod view;

pub use complex::{
    build_chromatic, build_view_complex, count_formulas, BuildOptions, Complex, ComplexKind, FVector,
    PseudomanifoldReport, Simplex,
};
pub use enumerate::all_views;
pub use error::{Error, Result};
pub use procset::{ProcSet, MAX_N};
pub use view::{validate_view, Column, LocalView, SimplexKey, View, ViewError};
