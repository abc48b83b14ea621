//! Shared fixtures for the benchmarks.

use qlight::model::{branch_rates, dressed_basis};
use qlight::{BranchRates, DressedBasis, Scenario, SystemParams};

/// V0/Delta = 1, gamma_perp = gamma_par/2, R = gamma_u = 0.005 gamma_par.
pub fn reference_params() -> SystemParams {
    SystemParams {
        omega0: 11.0,
        omega1: 9.0,
        v0: 1.0,
        gamma_r: 1.0,
        gamma_nr: 0.0,
        gamma_perp: 0.5,
        gamma_u: 0.005,
        pump_r: 0.005,
        omega_l_rabi: 0.01,
        scenario: Scenario::NonResonant,
    }
}

pub fn reference_model() -> (SystemParams, DressedBasis, BranchRates) {
    let p = reference_params();
    let b = dressed_basis(&p).expect("reference parameters are valid");
    let r = branch_rates(&p, &b);
    (p, b, r)
}

pub fn uniform_grid(step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * step).collect()
}
