//! Files, reports, the verification corpus and the command line around
//! `tbf-core`.

pub mod acceptance;
pub mod caps;
pub mod checks;
pub mod corpus;
pub mod input;
pub mod job;
pub mod report;
