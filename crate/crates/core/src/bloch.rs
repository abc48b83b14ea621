//! Optical Bloch equations for a coherent drive on a single dressed
//! transition `|G⟩ ↔ |b⟩`, treated as an isolated two-level system.
//!
//! In the frame rotating at the drive frequency, with `c` the coherence,
//! `Ω` the branch Rabi frequency and `δ = ω_L − ωᵇ`:
//!
//! ```text
//! ṗ = −Γ∥ p + 2Ω Im c
//! ċ = −(Γ⊥ − iδ) c + iΩ (1 − 2p)
//! ```
//!
//! The stationary excited population is
//! `p = 2Ω²s / (Γ∥ + 4Ω²s)` with `s = Γ⊥/(Γ⊥² + δ²)`, which at resonance
//! and weak drive reduces to `2Ω²/(Γ⊥Γ∥)`.

use crate::correlations::{validate_tau_grid, CorrelationSeries};
use crate::error::{Error, Result};
use crate::ode;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState {
    pub p_ee: f64,
    pub coh_re: f64,
    pub coh_im: f64,
    /// Drive detuning `ω_L − ωᵇ`; constant along a trajectory.
    pub detuning: f64,
}

impl BlochState {
    pub fn ground(detuning: f64) -> Self {
        BlochState {
            detuning,
            ..Default::default()
        }
    }

    /// `|c|² ≤ p(1 − p)` up to `tol`, plus `p ∈ [0, 1]`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let coh2 = self.coh_re * self.coh_re + self.coh_im * self.coh_im;
        self.p_ee >= -tol && self.p_ee <= 1.0 + tol && coh2 <= self.p_ee * (1.0 - self.p_ee) + tol
    }

    fn to_array(self) -> [f64; 3] {
        [self.p_ee, self.coh_re, self.coh_im]
    }

    fn from_array(a: [f64; 3], detuning: f64) -> Self {
        BlochState {
            p_ee: a[0],
            coh_re: a[1],
            coh_im: a[2],
            detuning,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochDerivative {
    pub p_ee: f64,
    pub coh_re: f64,
    pub coh_im: f64,
}

fn rhs(y: &[f64; 3], drive: f64, gpar: f64, gperp: f64, detuning: f64) -> [f64; 3] {
    let [p, x, q] = *y;
    [
        -gpar * p + 2.0 * drive * q,
        -gperp * x - detuning * q,
        -gperp * q + detuning * x + drive * (1.0 - 2.0 * p),
    ]
}

pub fn bloch_derivative(state: &BlochState, drive: f64, gpar: f64, gperp: f64) -> BlochDerivative {
    let [p_ee, coh_re, coh_im] = rhs(&state.to_array(), drive, gpar, gperp, state.detuning);
    BlochDerivative {
        p_ee,
        coh_re,
        coh_im,
    }
}

fn check_rates(drive: f64, gpar: f64, gperp: f64) -> Result<()> {
    for (name, v) in [("gpar", gpar), ("gperp", gperp)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(
                name,
                format!("must be finite and > 0, got {v}"),
            ));
        }
    }
    if !drive.is_finite() {
        return Err(Error::invalid("omega_l_rabi", "must be finite"));
    }
    Ok(())
}

/// Exact stationary point of the Bloch equations.
pub fn bloch_steady_state(drive: f64, gpar: f64, gperp: f64, detuning: f64) -> Result<BlochState> {
    check_rates(drive, gpar, gperp)?;
    let denom = gperp * gperp + detuning * detuning;
    let s = gperp / denom;
    let w2 = drive * drive;
    let p = 2.0 * w2 * s / (gpar + 4.0 * w2 * s);
    let inversion = drive * (1.0 - 2.0 * p) / denom;
    Ok(BlochState {
        p_ee: p,
        coh_re: -inversion * detuning,
        coh_im: inversion * gperp,
        detuning,
    })
}

/// Lowest-order stationary population at resonance, `2Ω²/(Γ⊥Γ∥)`.
pub fn weak_drive_population(drive: f64, gpar: f64, gperp: f64) -> f64 {
    2.0 * drive * drive / (gperp * gpar)
}

/// Bloch vector on `grid`, started from `initial` at t = 0.
pub fn evolve_bloch(
    initial: &BlochState,
    drive: f64,
    gpar: f64,
    gperp: f64,
    grid: &[f64],
) -> Result<Vec<BlochState>> {
    check_rates(drive, gpar, gperp)?;
    validate_tau_grid(grid)?;
    let detuning = initial.detuning;
    let fastest = [gpar, gperp, drive.abs(), detuning.abs()]
        .into_iter()
        .fold(0.0, f64::max);
    let f = |y: &[f64; 3]| rhs(y, drive, gpar, gperp, detuning);
    let out = ode::sample_on_grid(&f, initial.to_array(), grid, 0.1 / fastest)?;
    Ok(out
        .into_iter()
        .map(|a| BlochState::from_array(a, detuning))
        .collect())
}

/// Normalized g² at resonance by quantum regression: after a photon the
/// emitter is projected to the ground state, and
/// `ĝ2(τ) = p(τ | ground) / p(∞)`.
pub fn regression_g2_resonant_numeric(
    drive: f64,
    gpar: f64,
    gperp: f64,
    tau_grid: &[f64],
) -> Result<CorrelationSeries<f64>> {
    let steady = bloch_steady_state(drive, gpar, gperp, 0.0)?;
    if steady.p_ee <= 0.0 {
        return Err(Error::DegenerateSteadyState(
            "drive is off, nothing is emitted".into(),
        ));
    }
    let states = evolve_bloch(&BlochState::ground(0.0), drive, gpar, gperp, tau_grid)?;
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        values: states.iter().map(|s| s.p_ee / steady.p_ee).collect(),
        branch: None,
        normalized: true,
    })
}
