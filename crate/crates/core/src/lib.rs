//! Computational harmonic analysis on the complex sphere
//! `Ω_d = { z ∈ C^d : <z,z> = 1 }`.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fn`]: Jacobi, Gegenbauer and disk polynomials.
//! * [`dims`]: dimension combinatorics of the spaces `H_{m,n}` and their gradings.
//! * [`poly`] and [`basis`]: exact rational orthogonal bases of `H_{m,n}`,
//!   zonal kernels and the identities relating them.
//! * [`sphere`]: surface measure, seeded uniform sampling and Monte Carlo `L^p` norms.
//! * [`multipliers`]: multiplier families, coefficient-space operators and the
//!   level sequences used by the width upper bounds.
//! * [`levy`]: Levy means of multiplier norms on coefficient spheres and
//!   Nikolskii-type inequality checks.
//! * [`widths`]: exact Hilbert-space width tables, rate fitting and the
//!   structural factors of the width estimates.

pub mod basis;
pub mod dims;
pub mod error;
pub mod levy;
pub mod multipliers;
pub mod poly;
pub mod special_fn;
pub mod sphere;
pub mod widths;

pub use dims::{BiDegree, Grading, LayerSummary};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sphere::{McEstimate, SpherePoint};
