pub mod config;
pub mod error;
pub mod exprdsl;
pub mod gallery;
pub mod ineq;
pub mod jets;
pub mod report;
pub mod riemann;
pub mod runner;
pub mod sampling;
pub mod structures;
pub mod subman;
pub mod warped;

pub use error::GeomError;
