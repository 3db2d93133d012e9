//! File formats, report bundles and the command-line front end for
//! `polarity-core`.

pub mod app;
pub mod bundle;
pub mod formats;
