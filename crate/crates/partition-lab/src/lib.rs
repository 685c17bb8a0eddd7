//! Tools for integer partitions with a bounded number of parts: exact
//! big-integer counting, log-scale asymptotics, exact-distribution samplers,
//! limit-law references, and a statistical verification harness tying the
//! samplers to the limits.

pub mod analysis;
pub mod cli;
pub mod counting;
pub mod limits;
pub mod persist;
pub mod samplers;
pub mod verify;

pub use cli::run;
