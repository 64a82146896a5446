//! Conical topological defects of the square lattice and the chiral
//! four-orbital Hamiltonian that lives on them.
//!
//! The crate builds defect patterns ([`pattern`]), the bulk Bloch models and
//! their winding invariants ([`bulk`]), the real-space defect Hamiltonian
//! ([`assembly`]) and the resolvent-based spectroscopy used to detect
//! zero modes bound to the defect core ([`spectral`]). [`experiments`]
//! strings these together into reproducible campaigns with CSV/JSON output.

pub mod assembly;
pub mod band;
pub mod bulk;
pub mod clifford;
pub mod error;
pub mod experiments;
pub mod pattern;
pub mod sparse;
pub mod spectral;

pub use assembly::{assemble_defect, asymptotic_residual};
pub use bulk::{gap_scan, winding3d, BlochModel, Variant, WindingResult};
pub use clifford::{make_clifford, CliffordSet};
pub use error::{Error, Result};
pub use pattern::{build_pattern, frame, map_point, Frame, Pattern, PatternParams};
pub use sparse::SparseHermitian;
pub use spectral::{ldos, radial_profile, LdosGrid, LdosMethod, LdosRequest};
