pub mod checks;
pub mod cli;
pub mod clifford;
pub mod conformal;
pub mod error;
pub mod fd;
pub mod grid;
pub mod identity;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod sharp;
