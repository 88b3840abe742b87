pub mod calibrate;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod measurement;
pub mod netlist;
pub mod opo;
pub mod report;
