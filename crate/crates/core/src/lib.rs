pub mod ansatz;
pub mod cli;
pub mod conslaw;
pub mod determining;
pub mod expr;
pub mod jet;
pub mod report;
pub mod session;
pub mod symbol;
pub mod variational;
