//! Autler-Townes multiplet spontaneous emission spectra of driven multi-level
//! atoms.
//!
//! Three independent routes to the same spectrum:
//!
//! * [`closed_form`]: ratios of characteristic polynomials for the doublet,
//!   triplet, quartuplet and quintuplet linkages;
//! * [`dressed`]: pole/residue decomposition over the dressed eigenvalues;
//! * [`oracle`]: the amplitude equations of any [`model::LinkageGraph`],
//!   solved in the Laplace domain or integrated in time.
//!
//! [`analysis`] pulls dark lines, peaks and widths out of sampled spectra.

pub mod analysis;
pub mod cli;
pub mod closed_form;
pub mod dressed;
pub mod error;
pub mod linkage_dsl;
pub mod model;
pub mod oracle;
pub mod poly;

pub use error::{Error, Result};
