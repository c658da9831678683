mod common;

use common::invariants::{self as inv, assert_holds};

#[test]
fn test_signal_par_within_tolerance() {
    assert_holds(inv::test_signal_par);
}

#[test]
fn dual_inputs_reproduce_desired_output() {
    assert_holds(inv::dual_inputs_reproduce_output);
}

#[test]
fn control_voltage_stays_in_range() {
    assert_holds(inv::control_voltage_in_range);
}

#[test]
fn bandwidth_scaling_keeps_envelope_pdf() {
    assert_holds(inv::bandwidth_scaling_keeps_pdf);
}
