//! The `vmac` command-line front end as a library, so the binary and the
//! tests share one entry point.

mod app;
pub mod table;

pub use app::run;
