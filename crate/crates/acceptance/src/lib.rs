//! Holds the `acceptance` test target, which checks the laboratory's
//! quantitative claims end to end. Run it with
//! `cargo test -p scanorder-validation --test acceptance`.
