//! Long-running acceptance checks for `isolp`, kept out of the core crate so
//! that `cargo test -p isolp` stays fast. See `tests/acceptance.rs`.
