//! Reduced-basis approximation of parametric symmetric generalized
//! eigenproblems from finite element discretizations, with a-priori
//! certification of the reduced eigenvalues and eigenvectors.

pub mod linalg;
pub mod fem;
pub mod eigsolve;
pub mod rom;
pub mod analysis;
