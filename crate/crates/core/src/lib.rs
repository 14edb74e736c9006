pub mod blockzxz;
pub mod cli;
pub mod circuit;
pub mod error;
pub mod gates;
pub mod io;
pub mod multiplexor;
pub mod numerics;
pub mod random;
pub mod siable;
pub mod spdmm;
pub mod su4;
pub mod tables;

pub use circuit::{Circuit, DiagonalPhases, Gate};
pub use error::{Result, SynthError};
pub use numerics::ComplexMatrix;
