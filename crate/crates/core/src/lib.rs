pub mod error;
pub mod families;
pub mod geometric;
pub mod linalg;
pub mod measures;
pub mod roof;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
