pub mod abel;
pub mod braid;
pub mod config;
pub mod curve;
pub mod dubrovin;
pub mod error;
pub mod model;
pub mod ode;
pub mod pfaffian;
pub mod poly;
pub mod quadrature;
pub mod richardson;
pub mod run;
pub mod theta;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
