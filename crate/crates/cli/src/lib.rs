//! File-format and pipeline layer for the `areatopics` command-line tool.
//!
//! The algorithms live in `areatopics-core`; this crate adds everything that
//! touches the outside world: TSV/binary formats, command orchestration with
//! phase timings, and the exit-code contract (0 success, 2 input error,
//! 3 unknown area, 4 empty candidate set).

pub mod formats;
pub mod pipeline;
