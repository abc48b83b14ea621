//! Population balance of the four-level emission cycle
//! `|G⟩ → |U⟩ → |±⟩ → |G⟩` under incoherent pumping.
//!
//! ```text
//! ρ̇GG = −R ρGG + Γ∥⁻ ρ−− + Γ∥⁺ ρ++
//! ρ̇UU =  R ρGG − (γ⁻ + γ⁺) ρUU
//! ρ̇−− =  γ⁻ ρUU − Γ∥⁻ ρ−−
//! ρ̇++ =  γ⁺ ρUU − Γ∥⁺ ρ++
//! ```
//!
//! The direct decay `|U⟩ → |G⟩` is neglected, so total probability is
//! conserved exactly by the right-hand side.

use crate::correlations::{validate_tau_grid, CorrelationSeries};
use crate::error::{Error, Result};
use crate::model::{Branch, BranchRates};
use crate::ode;

/// Diagonal of the density matrix in the `{G, U, −, +}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Populations {
    pub p_gg: f64,
    pub p_uu: f64,
    /// ρ−−
    pub p_mm: f64,
    /// ρ++
    pub p_pp: f64,
}

impl Populations {
    pub const GROUND: Populations = Populations {
        p_gg: 1.0,
        p_uu: 0.0,
        p_mm: 0.0,
        p_pp: 0.0,
    };

    pub fn new(p_gg: f64, p_uu: f64, p_mm: f64, p_pp: f64) -> Self {
        Populations {
            p_gg,
            p_uu,
            p_mm,
            p_pp,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.p_gg, self.p_uu, self.p_mm, self.p_pp]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Populations::new(a[0], a[1], a[2], a[3])
    }

    pub fn sum(&self) -> f64 {
        self.p_gg + self.p_uu + self.p_mm + self.p_pp
    }

    /// Population of the dressed state feeding `branch`.
    pub fn dressed(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Minus => self.p_mm,
            Branch::Plus => self.p_pp,
        }
    }

    fn check_normalized(&self) -> Result<()> {
        let a = self.to_array();
        if a.iter()
            .any(|p| !p.is_finite() || *p < -1e-12 || *p > 1.0 + 1e-12)
        {
            return Err(Error::invalid(
                "populations",
                format!("each entry must lie in [0, 1], got {a:?}"),
            ));
        }
        if (self.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "populations",
                format!("must sum to 1, got {}", self.sum()),
            ));
        }
        Ok(())
    }
}

/// Populations sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Populations>,
}

impl PopulationTrajectory {
    pub fn last(&self) -> Populations {
        *self
            .states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn rhs(y: &[f64; 4], rates: &BranchRates, pump_r: f64) -> [f64; 4] {
    let [gg, uu, mm, pp] = *y;
    let (m, p) = (&rates.minus, &rates.plus);
    let pump = pump_r * gg;
    let feed_m = m.gfeed * uu;
    let feed_p = p.gfeed * uu;
    let decay_m = m.gpar * mm;
    let decay_p = p.gpar * pp;
    [
        -pump + decay_m + decay_p,
        pump - feed_m - feed_p,
        feed_m - decay_m,
        feed_p - decay_p,
    ]
}

/// Right-hand side of the balance equations.
pub fn populations_derivative(pop: &Populations, rates: &BranchRates, pump_r: f64) -> Populations {
    Populations::from_array(rhs(&pop.to_array(), rates, pump_r))
}

fn step_bound(rates: &BranchRates, pump_r: f64, dt_max: f64) -> f64 {
    let fastest = rates.max_rate().max(pump_r);
    if fastest > 0.0 {
        dt_max.min(0.1 / fastest)
    } else {
        dt_max
    }
}

fn check_rates(rates: &BranchRates, pump_r: f64) -> Result<()> {
    if !(pump_r >= 0.0) || !pump_r.is_finite() {
        return Err(Error::invalid(
            "pump_r",
            format!("must be finite and >= 0, got {pump_r}"),
        ));
    }
    for b in Branch::ALL {
        let r = rates.get(b);
        for (name, v) in [("gpar", r.gpar), ("gfeed", r.gfeed)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(
                    format!("{name}_{}", b.name()),
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
    }
    Ok(())
}

/// Integrates the balance equations with fixed-step RK4, recording every
/// step. The step is bounded by `dt_max` and by `0.1 / fastest rate`.
pub fn evolve_populations(
    initial: &Populations,
    rates: &BranchRates,
    pump_r: f64,
    t_end: f64,
    dt_max: f64,
) -> Result<PopulationTrajectory> {
    initial.check_normalized()?;
    check_rates(rates, pump_r)?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(
            "t_end",
            format!("must be finite and > 0, got {t_end}"),
        ));
    }
    if !(dt_max > 0.0) {
        return Err(Error::invalid(
            "dt_max",
            format!("must be > 0, got {dt_max}"),
        ));
    }
    let h_bound = step_bound(rates, pump_r, dt_max);
    let steps = (t_end / h_bound).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let f = |y: &[f64; 4]| rhs(y, rates, pump_r);

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = initial.to_array();
    times.push(0.0);
    states.push(*initial);
    for k in 1..=steps {
        y = ode::rk4_step(&f, &y, h);
        let t = k as f64 * h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { time: t });
        }
        times.push(t);
        states.push(Populations::from_array(y));
    }
    Ok(PopulationTrajectory { times, states })
}

/// Populations at the points of `grid`, starting from `initial` at t = 0.
pub fn populations_on_grid(
    initial: &Populations,
    rates: &BranchRates,
    pump_r: f64,
    grid: &[f64],
    dt_max: f64,
) -> Result<Vec<Populations>> {
    initial.check_normalized()?;
    check_rates(rates, pump_r)?;
    validate_tau_grid(grid)?;
    let f = |y: &[f64; 4]| rhs(y, rates, pump_r);
    let out = ode::sample_on_grid(
        &f,
        initial.to_array(),
        grid,
        step_bound(rates, pump_r, dt_max),
    )?;
    Ok(out.into_iter().map(Populations::from_array).collect())
}

/// Closed-form stationary populations.
///
/// With `Q = (γ⁻ + γ⁺ + R) Γ∥⁻Γ∥⁺ + R (γ⁻Γ∥⁺ + γ⁺Γ∥⁻)`:
/// `ρ−− = Rγ⁻Γ∥⁺/Q`, `ρ++ = Rγ⁺Γ∥⁻/Q`, and from stationarity of the
/// remaining equations `ρUU = RΓ∥⁻Γ∥⁺/Q`, `ρGG = (γ⁻ + γ⁺)Γ∥⁻Γ∥⁺/Q`.
pub fn steady_state_analytic(rates: &BranchRates, pump_r: f64) -> Result<Populations> {
    check_rates(rates, pump_r)?;
    let (m, p) = (&rates.minus, &rates.plus);
    for (name, v) in [
        ("gpar_minus", m.gpar),
        ("gpar_plus", p.gpar),
        ("gfeed_minus", m.gfeed),
        ("gfeed_plus", p.gfeed),
    ] {
        if v <= 0.0 {
            return Err(Error::DegenerateSteadyState(format!(
                "{name} is zero, the cycle has no unique stationary state"
            )));
        }
    }
    let gamma = rates.feed_total();
    let gpp = m.gpar * p.gpar;
    let q = (gamma + pump_r) * gpp + pump_r * (m.gfeed * p.gpar + p.gfeed * m.gpar);
    let raw = Populations {
        p_gg: gamma * gpp / q,
        p_uu: pump_r * gpp / q,
        p_mm: pump_r * m.gfeed * p.gpar / q,
        p_pp: pump_r * p.gfeed * m.gpar / q,
    };
    let s = raw.sum();
    Ok(Populations::from_array(raw.to_array().map(|x| x / s)))
}

/// Normalized second-order coherence of `branch` from the regression
/// identity `ĝ2(τ) = ρbb(τ | ρGG(0) = 1) / ρbb(∞)`.
///
/// For purely diagonal dynamics the regression theorem reduces to this
/// conditional population: right after a photon the system is in `|G⟩`.
pub fn regression_g2_nonresonant_numeric(
    rates: &BranchRates,
    pump_r: f64,
    branch: Branch,
    tau_grid: &[f64],
) -> Result<CorrelationSeries<f64>> {
    let steady = steady_state_analytic(rates, pump_r)?;
    let stationary = steady.dressed(branch);
    if stationary <= 0.0 {
        return Err(Error::DegenerateSteadyState(format!(
            "branch {branch} is not populated (pump off?)"
        )));
    }
    let pops = populations_on_grid(&Populations::GROUND, rates, pump_r, tau_grid, f64::INFINITY)?;
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        values: pops
            .iter()
            .map(|p| p.dressed(branch) / stationary)
            .collect(),
        branch: Some(branch),
        normalized: true,
    })
}
