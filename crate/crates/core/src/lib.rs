//! Exact Fourier exterior calculus on flat complex tori, with the string-algebroid,
//! gauge-theoretic and moduli constructions built on top of it.

pub mod cohomology;
pub mod courant;
pub mod dilaton;
pub mod error;
pub mod forms;
pub mod gauge;
pub mod moduli;
pub mod picard;
pub mod sample;

pub use cohomology::{reduce_class, CohomClass, Flavor};
pub use dilaton::{Configuration, TangentW};
pub use error::{Error, Result};
pub use forms::{Coeff, Form, Frame, GridForm, GridMat, TrigForm, TrigMat, Volume, Wedge, C64};
pub use moduli::{FlatBackground, IntersectionRing};
pub use gauge::{HermitianReduction, LieAlgebra, PairingSpec};
