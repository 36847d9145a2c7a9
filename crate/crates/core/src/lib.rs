pub mod error;
pub mod harness;
pub mod integrator;
pub mod nonlinearity;
pub mod observables;
pub mod qwiener;
pub mod spectral;
