pub mod catalog;
pub mod cyclic;
pub mod elliptic;
pub mod env;
pub mod error;
pub mod jacobi;
pub mod master;
pub mod quad;
pub mod transforms;

pub use elliptic::ModulusContext;
pub use error::{Error, Result};
pub use num_complex::Complex64;
