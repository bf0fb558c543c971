pub mod cli;
pub mod devices;
pub mod error;
pub mod linalg;
pub mod observables;
pub mod protocol;
pub mod register;
