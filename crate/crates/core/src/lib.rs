//! Jacobi fields, integrability and spectra of equiangular geodesic nets on
//! spheres, plus checks of the radial spine ODE.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arcfn;
pub mod cli;
pub mod geomcore;
pub mod jacobi;
pub mod linalg;
pub mod net;
pub mod spectral;
pub mod spineode;
