#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use waveops::hilbert::MeasureRef;
use waveops::measure::{make_cantor, make_random, make_riesz, make_uniform, riesz_demo};

/// Small measures of every generator kind.
pub fn small_measure() -> impl Strategy<Value = MeasureRef<f64>> {
    prop_oneof![
        (2usize..24).prop_map(|m| Arc::new(make_uniform(m).unwrap())),
        (1u32..6).prop_map(|l| Arc::new(make_cantor(l).unwrap())),
        (2usize..40, any::<u64>()).prop_map(|(m, s)| Arc::new(make_random(m, s).unwrap())),
    ]
}

/// As [`small_measure`], occasionally the 192-atom Riesz demo.
pub fn any_measure() -> impl Strategy<Value = MeasureRef<f64>> {
    prop_oneof![
        9 => small_measure(),
        1 => Just(()).prop_map(|_| Arc::new(make_riesz(&riesz_demo()).unwrap())),
    ]
}
