//! File formats and report serialization for the `qcoh` command-line tool.
//!
//! Channels, superchannels and states interchange as JSON objects holding
//! a `kind`, a `dims` array and a dense complex `matrix` (each entry a
//! `[re, im]` pair). Choi matrices are the canonical channel form; a
//! `kraus` array may replace `matrix` when loading with `--kraus`.

pub mod format;
pub mod json;
pub mod views;
