//! Simple and progressive mining over the distribution DAG.

mod dag;
mod retain;
pub mod sybil;
mod transfer;

pub use dag::{DagError, MiningDag};
pub use retain::{branch_power, propagate_upstream, retain_progressive, retain_simple};
pub use transfer::{apply_transfer, MiningMode, TransferError, TransferRecord};
