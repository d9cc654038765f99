//! Verification gate: one test per criterion, each printing its
//! pass/fail line. Run with `--nocapture` to see the lines of passing
//! criteria too, or use the `check` CLI verb.

use rhydro::acceptance::{self, CriterionResult};

fn gate(result: CriterionResult) {
    println!("{}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn criterion_01_equilibrium_fixed_point() {
    gate(acceptance::criterion_1_equilibrium_fixed_point());
}

#[test]
fn criterion_02_elliptic_solver() {
    gate(acceptance::criterion_2_elliptic_solver());
}

#[test]
fn criterion_03_geometry_conservation() {
    gate(acceptance::criterion_3_geometry_conservation());
}

#[test]
fn criterion_04_apriori_boundedness() {
    gate(acceptance::criterion_4_apriori_boundedness());
}

#[test]
fn criterion_05_energy_decay() {
    gate(acceptance::criterion_5_energy_decay());
}

#[test]
fn criterion_06_picard_contraction() {
    gate(acceptance::criterion_6_picard_contraction());
}

#[test]
fn criterion_07_source_smallness() {
    gate(acceptance::criterion_7_source_smallness());
}

#[test]
fn criterion_08_acoustic_oracle() {
    gate(acceptance::criterion_8_acoustic_oracle());
}

#[test]
fn criterion_09_initial_data() {
    gate(acceptance::criterion_9_initial_data());
}

#[test]
fn criterion_10_self_convergence() {
    gate(acceptance::criterion_10_self_convergence());
}
