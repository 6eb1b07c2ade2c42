//! Library surface of the `gauss-ldp` command-line tool.
//!
//! The binary is a thin shell over these modules; exposing them as a lib
//! lets the integration tests and the fuzz targets drive the input parsers
//! and report writers directly.

pub mod parse;
pub mod report;
pub mod verify;
