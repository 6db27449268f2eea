//! Library side of the command-line front end, shared with the
//! integration tests.

pub mod analyze;
pub mod plan;
pub mod simcmd;
pub mod validate;
