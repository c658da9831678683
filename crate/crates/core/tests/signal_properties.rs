mod common;

use common::invariants::{self as inv, assert_holds};

#[test]
fn par_survives_power_scaling() {
    assert_holds(inv::par_survives_power_scaling);
}

#[test]
fn delay_estimate_recovers_applied_shift() {
    assert_holds(inv::delay_estimate_recovers_shift);
}

#[test]
fn averaging_reduces_noise_by_count() {
    assert_holds(inv::averaging_reduces_noise);
}

#[test]
fn fractional_delay_is_linear() {
    assert_holds(inv::fractional_delay_is_linear);
}
