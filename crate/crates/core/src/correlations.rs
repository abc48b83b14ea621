//! Closed-form correlation functions and emission spectra of the two dressed
//! transitions, and a discrete-Fourier route from g¹ back to the spectrum.
//!
//! In the stationary limit
//!
//! ```text
//! g¹ᵇ(τ) = ρbb(∞) exp(−(Γ⊥ᵇ + iωᵇ) τ),          g¹ᵇ(−τ) = g¹ᵇ(τ)*
//! Sᵇ(ω)  = 2 Γ⊥ᵇ ρbb(∞) / ((ω − ωᵇ)² + (Γ⊥ᵇ)²)
//! ```
//!
//! Normalized second-order coherences (divided by `[g¹ᵇ(0)]²`):
//!
//! ```text
//! incoherent pump:  1 − ε − e^{−(R+γ)τ} + ε e^{−Γ∥ᵇτ},   ε = (R+γ)/Γ∥ᵇ
//! resonant drive:   1 − Γ⊥ᵇ/(Γ⊥ᵇ−Γ∥ᵇ) e^{−Γ∥ᵇτ} + Γ∥ᵇ/(Γ⊥ᵇ−Γ∥ᵇ) e^{−Γ⊥ᵇτ}
//! ```
//!
//! Both are evaluated through `expm1` so that they vanish exactly at τ = 0.
//! Far-field geometric prefactors are dropped; spectra are defined up to a
//! common positive constant.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::bloch::weak_drive_population;
use crate::error::{Error, Result};
use crate::model::{Branch, BranchRates, DressedBasis};
use crate::rate::{steady_state_analytic, Populations};

/// Relative closeness of Γ⊥ᵇ and Γ∥ᵇ below which the resonant g² switches
/// to its degenerate limit.
pub const DEGENERATE_RATE_TOLERANCE: f64 = 1e-9;

/// Minimum samples per `1/Γ⊥` accepted by [`spectrum_fft_check`].
pub const FFT_MIN_POINTS_PER_DECAY: f64 = 64.0;
/// Minimum span in units of `1/Γ⊥` accepted by [`spectrum_fft_check`].
pub const FFT_MIN_DECAYS: f64 = 20.0;

/// A correlation function sampled on a nonnegative delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries<T = f64> {
    pub tau: Vec<f64>,
    pub values: Vec<T>,
    pub branch: Option<Branch>,
    /// True when divided by `[g¹(0)]²`.
    pub normalized: bool,
}

impl<T> CorrelationSeries<T> {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumTag {
    Branch(Branch),
    /// Both lines weighted by their squared transition dipoles.
    Detected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub tag: SpectrumTag,
}

impl SpectrumSeries {
    /// Location and height of the largest sample.
    pub fn peak(&self) -> (f64, f64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        (self.omega[i], v)
    }

    /// Full width at half maximum of the largest peak, from linearly
    /// interpolated half-maximum crossings on either side.
    pub fn fwhm(&self) -> Option<f64> {
        let (_, top) = self.peak();
        let i_max = self.values.iter().position(|&v| v == top)?;
        let half = 0.5 * top;
        let cross = |i: usize, j: usize| {
            let (x0, y0, x1, y1) = (self.omega[i], self.values[i], self.omega[j], self.values[j]);
            x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        };
        let left = (1..=i_max)
            .rev()
            .find(|&i| self.values[i - 1] < half)
            .map(|i| cross(i - 1, i))?;
        let right = (i_max..self.values.len() - 1)
            .find(|&i| self.values[i + 1] < half)
            .map(|i| cross(i, i + 1))?;
        Some(right - left)
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }
}

pub(crate) fn validate_tau_grid(grid: &[f64]) -> Result<()> {
    validate_grid("tau_grid", grid)?;
    if grid[0] < 0.0 {
        return Err(Error::invalid("tau_grid", "delays must be nonnegative"));
    }
    Ok(())
}

fn validate_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(name, "grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "grid must be strictly increasing"));
    }
    Ok(())
}

/// `g¹ᵇ(τ)` for any real τ; negative delays by conjugation.
pub fn g1_at(
    branch: Branch,
    rates: &BranchRates,
    steady: &Populations,
    basis: &DressedBasis,
    tau: f64,
) -> Complex64 {
    let rho = steady.dressed(branch);
    let gperp = rates.get(branch).gperp;
    let omega = basis.frequency(branch);
    let t = tau.abs();
    let value = rho * (-gperp * t).exp() * Complex64::from_polar(1.0, -omega * t);
    if tau < 0.0 {
        value.conj()
    } else {
        value
    }
}

pub fn g1_analytic(
    branch: Branch,
    rates: &BranchRates,
    steady: &Populations,
    basis: &DressedBasis,
    tau_grid: &[f64],
) -> Result<CorrelationSeries<Complex64>> {
    validate_tau_grid(tau_grid)?;
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        values: tau_grid
            .iter()
            .map(|&t| g1_at(branch, rates, steady, basis, t))
            .collect(),
        branch: Some(branch),
        normalized: false,
    })
}

fn lorentzian(omega: f64, centre: f64, width: f64, weight: f64) -> f64 {
    let d = omega - centre;
    2.0 * width * weight / (d * d + width * width)
}

/// Bare line shape `Sᵇ(ω)` without the dipole weight.
pub fn spectrum_analytic(
    branch: Branch,
    rates: &BranchRates,
    steady: &Populations,
    basis: &DressedBasis,
    omega_grid: &[f64],
) -> Result<SpectrumSeries> {
    validate_grid("omega_grid", omega_grid)?;
    let (centre, width, rho) = (
        basis.frequency(branch),
        rates.get(branch).gperp,
        steady.dressed(branch),
    );
    Ok(SpectrumSeries {
        omega: omega_grid.to_vec(),
        values: omega_grid
            .iter()
            .map(|&w| lorentzian(w, centre, width, rho))
            .collect(),
        tag: SpectrumTag::Branch(branch),
    })
}

/// Dipole-weighted line of one branch, `|D01ᵇ|²/|D01|² · Sᵇ(ω)`.
pub fn detected_line(
    branch: Branch,
    rates: &BranchRates,
    steady: &Populations,
    basis: &DressedBasis,
    omega_grid: &[f64],
) -> Result<SpectrumSeries> {
    let mut s = spectrum_analytic(branch, rates, steady, basis, omega_grid)?;
    let w = rates.get(branch).dipole_w;
    s.values.iter_mut().for_each(|v| *v *= w);
    Ok(s)
}

/// The doublet as seen in the far field: `Σᵦ |D01ᵇ|²/|D01|² · Sᵇ(ω)`.
///
/// With this weighting the peak ratio of the two lines is `cot⁴θ` and their
/// width ratio `Γ⊥⁺/Γ⊥⁻ = tan²θ`.
pub fn detected_spectrum(
    rates: &BranchRates,
    steady: &Populations,
    basis: &DressedBasis,
    omega_grid: &[f64],
) -> Result<SpectrumSeries> {
    let minus = detected_line(Branch::Minus, rates, steady, basis, omega_grid)?;
    let plus = detected_line(Branch::Plus, rates, steady, basis, omega_grid)?;
    Ok(SpectrumSeries {
        omega: omega_grid.to_vec(),
        values: minus
            .values
            .iter()
            .zip(&plus.values)
            .map(|(a, b)| a + b)
            .collect(),
        tag: SpectrumTag::Detected,
    })
}

/// Analytic peak height of the detected line of `branch`,
/// `|D01ᵇ|²/|D01|² · 2ρbb(∞)/Γ⊥ᵇ`.
pub fn detected_peak(branch: Branch, rates: &BranchRates, steady: &Populations) -> f64 {
    let r = rates.get(branch);
    r.dipole_w * 2.0 * steady.dressed(branch) / r.gperp
}

fn uniform_step(tau: &[f64]) -> Result<f64> {
    if tau.len() < 2 {
        return Err(Error::Resolution("need at least two delay samples".into()));
    }
    if tau[0] != 0.0 {
        return Err(Error::Resolution("delay grid must start at 0".into()));
    }
    let dt = tau[1] - tau[0];
    let uniform = tau
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(w[1].abs() * 1e-6));
    if !(dt > 0.0) || !uniform {
        return Err(Error::Resolution("delay grid must be uniform".into()));
    }
    Ok(dt)
}

/// Discrete Fourier transform of the hermitian extension of a uniformly
/// sampled g¹, without resolution checks.
///
/// The samples at `τ = n·dt`, `n = 0..N`, are mirrored to negative delays by
/// conjugation, giving `M = 2N − 1` points. The result approximates
/// `∫ e^{iωτ} g¹(τ) dτ` at `ω_k = 2πk/(M·dt)`, with `k` running over
/// `(−M/2, M/2]`, sorted ascending.
pub fn fourier_spectrum(g1: &CorrelationSeries<Complex64>) -> Result<SpectrumSeries> {
    let dt = uniform_step(&g1.tau)?;
    let n = g1.values.len();
    let m = 2 * n - 1;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = g1.values[0];
    for k in 1..n {
        buf[k] = g1.values[k];
        buf[m - k] = g1.values[k].conj();
    }
    // inverse FFT: Σ x_n e^{+2πi kn/M}
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    let dw = 2.0 * PI / (m as f64 * dt);
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let kk = if k > m / 2 {
                k as f64 - m as f64
            } else {
                k as f64
            };
            (kk * dw, v.re * dt)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tag = g1.branch.map_or(SpectrumTag::Detected, SpectrumTag::Branch);
    Ok(SpectrumSeries {
        omega: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
        tag,
    })
}

/// Spectrum from g¹ by discrete Fourier transform, as an independent route
/// to [`spectrum_analytic`].
///
/// The dephasing rate is estimated from the decay of `|g¹|` over the first
/// step; the grid must hold at least 64 samples per `1/Γ⊥` and span at
/// least `20/Γ⊥`. An all-zero input yields an all-zero spectrum.
pub fn spectrum_fft_check(g1: &CorrelationSeries<Complex64>) -> Result<SpectrumSeries> {
    let dt = uniform_step(&g1.tau)?;
    let a0 = g1.values[0].norm();
    if g1.values.iter().all(|v| v.norm() == 0.0) {
        return fourier_spectrum(g1);
    }
    let a1 = g1.values[1].norm();
    let gamma = (a0 / a1).ln() / dt;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Resolution(
            "g1 does not decay over the first step, cannot infer its linewidth".into(),
        ));
    }
    let per_decay = 1.0 / (gamma * dt);
    if per_decay < FFT_MIN_POINTS_PER_DECAY {
        return Err(Error::Resolution(format!(
            "{per_decay:.1} samples per 1/Γ⊥, need {FFT_MIN_POINTS_PER_DECAY}"
        )));
    }
    let span = g1.tau[g1.tau.len() - 1] * gamma;
    if span < FFT_MIN_DECAYS {
        return Err(Error::Resolution(format!(
            "grid spans {span:.2}/Γ⊥, need {FFT_MIN_DECAYS}"
        )));
    }
    fourier_spectrum(g1)
}

/// Normalized leading-order g² under incoherent pumping, with
/// `slow = R + γ` and `gpar = Γ∥ᵇ`.
pub fn g2_nonresonant_normalized(slow: f64, gpar: f64, tau: f64) -> f64 {
    let eps = slow / gpar;
    -(-slow * tau).exp_m1() + eps * (-gpar * tau).exp_m1()
}

/// Normalized g² under weak resonant drive.
pub fn g2_resonant_normalized(gpar: f64, gperp: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    if (gperp - gpar).abs() < DEGENERATE_RATE_TOLERANCE * gpar {
        let x = gpar * tau;
        return -(-x).exp_m1() - x * (-x).exp();
    }
    let rise_par = -(-gpar * tau).exp_m1();
    let rise_perp = -(-gperp * tau).exp_m1();
    (gperp * rise_par - gpar * rise_perp) / (gperp - gpar)
}

/// The incoherent-pump closed form assumes `R + γ ≪ Γ∥ᵇ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeWarning {
    pub branch: Branch,
    /// `(R + γ)/Γ∥ᵇ`
    pub ratio: f64,
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "branch {}: (R+gamma)/gpar = {} is not small, the closed-form g2 is outside its regime",
            self.branch, self.ratio
        )
    }
}

pub fn nonresonant_regime_warning(
    branch: Branch,
    rates: &BranchRates,
    pump_r: f64,
) -> Option<RegimeWarning> {
    let ratio = (pump_r + rates.feed_total()) / rates.get(branch).gpar;
    (ratio >= 1.0).then_some(RegimeWarning { branch, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divided by `[g¹(0)]²`.
    #[default]
    Normalized,
    /// Multiplied back by `[g¹(0)]² = ρbb(∞)²`.
    Raw,
}

/// g² of `branch` under incoherent pumping.
///
/// Outside `R + γ < Γ∥ᵇ` the values are still returned and a warning is
/// logged; see [`nonresonant_regime_warning`].
pub fn g2_nonresonant_analytic(
    branch: Branch,
    rates: &BranchRates,
    pump_r: f64,
    tau_grid: &[f64],
    norm: Normalization,
) -> Result<CorrelationSeries<f64>> {
    validate_tau_grid(tau_grid)?;
    if let Some(w) = nonresonant_regime_warning(branch, rates, pump_r) {
        log::warn!("{w}");
    }
    let slow = pump_r + rates.feed_total();
    let gpar = rates.get(branch).gpar;
    let scale = match norm {
        Normalization::Normalized => 1.0,
        Normalization::Raw => steady_state_analytic(rates, pump_r)?
            .dressed(branch)
            .powi(2),
    };
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        values: tau_grid
            .iter()
            .map(|&t| scale * g2_nonresonant_normalized(slow, gpar, t))
            .collect(),
        branch: Some(branch),
        normalized: norm == Normalization::Normalized,
    })
}

/// g² of `branch` under weak resonant drive with branch Rabi frequency
/// `drive`. The drive only sets the raw prefactor `(2Ω²/(Γ⊥Γ∥))²`.
pub fn g2_resonant_analytic(
    branch: Branch,
    rates: &BranchRates,
    drive: f64,
    tau_grid: &[f64],
    norm: Normalization,
) -> Result<CorrelationSeries<f64>> {
    validate_tau_grid(tau_grid)?;
    let r = rates.get(branch);
    if !(r.gpar > 0.0 && r.gperp > 0.0) {
        return Err(Error::invalid(
            format!("rates_{}", branch.name()),
            "longitudinal and transverse rates must be > 0",
        ));
    }
    let scale = match norm {
        Normalization::Normalized => 1.0,
        Normalization::Raw => weak_drive_population(drive, r.gpar, r.gperp).powi(2),
    };
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        values: tau_grid
            .iter()
            .map(|&t| scale * g2_resonant_normalized(r.gpar, r.gperp, t))
            .collect(),
        branch: Some(branch),
        normalized: norm == Normalization::Normalized,
    })
}
