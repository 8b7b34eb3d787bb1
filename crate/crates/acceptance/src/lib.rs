//! Acceptance suite for `lsa-sim`.
//!
//! The checks live in `tests/acceptance.rs` and run as a standalone test binary
//! (`cargo test --test acceptance`). This package sits after the simulator in
//! the workspace, so a failing criterion never stops the simulator's own tests
//! from running.
