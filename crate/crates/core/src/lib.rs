pub mod dist;
pub mod error;
pub mod mcstudy;
pub mod estimate;
pub mod numeric;
pub mod process;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};
pub use rng::RngStream;
