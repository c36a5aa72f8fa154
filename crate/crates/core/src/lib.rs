//! Exact computation with asymptotic couples of H-type.
//!
//! Start from a finite [`couple::Presentation`], grow it with the
//! constructors in [`extend`] or lazily with a [`closure::ClosureEngine`],
//! or work in one of the infinite models of [`tmodel`]. Everything that
//! implements [`model::Couple`] can be fed to the classifier in
//! [`analysis`] and the formula evaluator in [`lang`].
//!
//! ```
//! use hcouple::closure::ClosureEngine;
//! use hcouple::couple::Presentation;
//!
//! # fn main() -> Result<(), hcouple::closure::ClosureError> {
//! let mut engine = ClosureEngine::new(Presentation::p1())?;
//! let one = engine.stage().unit().clone();
//! let alpha = engine.integrate(&one)?;
//! assert_eq!(engine.stage().render(&alpha), "-b2");
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod cli;
pub mod closure;
pub mod couple;
pub mod extend;
pub mod format;
pub mod foundation;
pub mod fuzz;
pub mod handle;
pub mod lang;
pub mod model;
pub mod scalar;
pub mod tmodel;
