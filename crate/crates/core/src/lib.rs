pub mod automata;
pub mod charpoly;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod levelrep;
pub mod schreier;
pub mod spectra;
pub mod substitution;

pub use error::{Error, Result};
