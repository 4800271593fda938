pub mod bench;
pub mod error;
pub mod formulations;
pub mod gcn;
pub mod instance;
pub mod lp;
pub mod milp;
pub mod strategies;
