//! Holds the `acceptance` test target only. Run it with
//! `cargo test -p multiplet-acceptance --test acceptance`.
