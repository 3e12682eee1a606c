//! Numerical laboratory for Navier-Stokes type equations generated by the de
//! Rham complex on `R^n`, realised on a periodic box with spectral
//! derivatives.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] and [`exterior`]: q-forms on a uniform grid, `∧`, `⋆`, `d`,
//!   `d*`, `Δ`.
//! * [`spaces`]: discrete weighted Hölder norm estimators.
//! * [`potentials`]: heat semigroup, Duhamel integral, Newton kernel,
//!   Leray-Helmholtz projection and the inverse of `d` on co-closed forms.
//! * [`nonlinearity`]: bilinear nonlinearities, their symmetric
//!   linearisation and the built-in families.
//! * [`solver`]: the mild fixed-point solver with pressure recovery and
//!   energy diagnostics.
//! * [`radial`]: radial reduction, self-similar profiles and the blow-up
//!   study.
//! * [`io`]: run configuration, binary field files, CSV output.
//! * [`verify`]: the identity suite behind `derham-ns verify`.

pub mod error;
pub mod exterior;
pub mod grid;
pub mod io;
pub mod nonlinearity;
pub mod potentials;
pub mod radial;
pub mod random;
pub mod solver;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use exterior::{GridForm, MultiIndexTable, SpectralForm};
pub use grid::Grid;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/nonlinearity.md")]
    mod nonlinearity {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
