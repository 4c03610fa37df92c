//! Shared fixtures for the benchmarks.

use ncup_core::harness::sampling::{sample_element, ElementClass};
use ncup_core::{AlgebraElement, Side, TwoBoxPair};

pub fn pair(spec: &str) -> TwoBoxPair {
    TwoBoxPair::from_spec(spec).expect("fixture model")
}

pub fn generic(pair: &TwoBoxPair, side: Side, seed: u64) -> AlgebraElement {
    sample_element(pair, side, ElementClass::Generic, seed, 0)
}
