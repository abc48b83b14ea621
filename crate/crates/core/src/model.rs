//! Physical inputs, the dressed doublet and the per-branch relaxation rates.
//!
//! The one-plasmon state `|g⟩|1⟩` and the emitter excitation `|e⟩|0⟩` are
//! mixed by the coupling `V0` into
//!
//! ```text
//! |−⟩ = cos θ |g⟩|1⟩ − sin θ |e⟩|0⟩
//! |+⟩ = sin θ |g⟩|1⟩ + cos θ |e⟩|0⟩,      tan 2θ = V0 / Δ
//! ```
//!
//! Emission from either dressed state is carried by its plasmon admixture, so
//! every radiative, non-radiative and dephasing rate of the bare nanoparticle
//! is scaled by `cos²θ` (branch −) or `sin²θ` (branch +). The feeding rates
//! out of `|U⟩` go the other way round because they act on the emitter part.

use std::fmt;

use crate::error::{Error, Result};

/// Smallest admissible dressed-state plasmon weight.
pub const MIN_MIXING_WEIGHT: f64 = 1e-6;

/// One of the two dressed transitions `|±⟩ → |G⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Minus => "-",
            Branch::Plus => "+",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        }
    }

    pub fn other(self) -> Branch {
        match self {
            Branch::Minus => Branch::Plus,
            Branch::Plus => Branch::Minus,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Excitation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scenario {
    /// Incoherent pumping of `|G⟩ → |U⟩`, feeding the doublet through `|U⟩`.
    #[default]
    NonResonant,
    /// Weak coherent drive tuned to one dressed transition.
    Resonant,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::NonResonant => "nonresonant",
            Scenario::Resonant => "resonant",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nonresonant" | "non-resonant" | "non_resonant" => Ok(Scenario::NonResonant),
            "resonant" => Ok(Scenario::Resonant),
            other => Err(Error::invalid(
                "scenario",
                format!("expected `nonresonant` or `resonant`, got `{other}`"),
            )),
        }
    }
}

/// Raw physical inputs. All quantities are angular frequencies (ℏ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Emitter transition frequency `ω0` of `|g⟩ → |e⟩`.
    pub omega0: f64,
    /// Dipole plasmon frequency `ω1`.
    pub omega1: f64,
    /// Coupling matrix element `V0`, real and positive.
    pub v0: f64,
    /// Radiative rate of the isolated nanoparticle.
    pub gamma_r: f64,
    /// Non-radiative rate of the isolated nanoparticle.
    pub gamma_nr: f64,
    /// Phase relaxation rate of the one-plasmon state.
    pub gamma_perp: f64,
    /// Non-radiative decay `|u⟩ → |e⟩` of the emitter.
    pub gamma_u: f64,
    /// Incoherent pump rate `R`.
    pub pump_r: f64,
    /// Rabi frequency of the drive on the bare plasmon dipole. The branch
    /// value is this times the branch dipole amplitude, see
    /// [`SystemParams::branch_drive`].
    pub omega_l_rabi: f64,
    pub scenario: Scenario,
}

impl SystemParams {
    /// Total longitudinal rate `Γ∥ = Γr + Γnr`.
    pub fn gamma_par(&self) -> f64 {
        self.gamma_r + self.gamma_nr
    }

    /// Quantum yield `η = Γr / Γ∥`.
    pub fn quantum_yield(&self) -> f64 {
        self.gamma_r / self.gamma_par()
    }

    /// Checks finiteness, signs and the transverse-rate bound `Γ⊥ ≥ Γ∥/2`.
    ///
    /// The mixing-angle guard needs the dressed basis and is applied by
    /// [`dressed_basis`].
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("v0", self.v0),
            ("gamma_r", self.gamma_r),
            ("gamma_nr", self.gamma_nr),
            ("gamma_perp", self.gamma_perp),
            ("gamma_u", self.gamma_u),
            ("pump_r", self.pump_r),
            ("omega_l_rabi", self.omega_l_rabi),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {value}")));
            }
        }
        for (name, value) in [
            ("gamma_r", self.gamma_r),
            ("gamma_nr", self.gamma_nr),
            ("gamma_perp", self.gamma_perp),
            ("gamma_u", self.gamma_u),
            ("pump_r", self.pump_r),
            ("omega_l_rabi", self.omega_l_rabi),
        ] {
            if value < 0.0 {
                return Err(Error::invalid(name, format!("must be >= 0, got {value}")));
            }
        }
        if self.v0 <= 0.0 {
            return Err(Error::invalid(
                "v0",
                format!("must be > 0, got {}", self.v0),
            ));
        }
        if self.gamma_par() <= 0.0 {
            return Err(Error::invalid(
                "gamma_r",
                "gamma_r + gamma_nr must be > 0 for the dressed states to decay",
            ));
        }
        // Relative slack so that Γ⊥ = Γ∥/2 given in decimal still passes.
        let bound = 0.5 * self.gamma_par();
        if self.gamma_perp < bound * (1.0 - 1e-12) {
            return Err(Error::invalid(
                "gamma_perp",
                format!(
                    "must be >= (gamma_r + gamma_nr)/2 = {bound}, got {}",
                    self.gamma_perp
                ),
            ));
        }
        Ok(())
    }

    /// Rabi frequency of the drive on the `|G⟩ → |b⟩` transition,
    /// `Ω_L · D01ᵇ / D01` with `D01⁻/D01 = cos θ` and `D01⁺/D01 = sin θ`.
    pub fn branch_drive(&self, basis: &DressedBasis, branch: Branch) -> f64 {
        self.omega_l_rabi * basis.weight(branch).sqrt()
    }
}

/// Mixing angle from `tan 2θ = V0/Δ`, continuous through `Δ = 0`.
///
/// Returns θ in `(0, π/2)`; branch − is plasmon-like for `Δ > 0`.
pub fn mixing_angle(v0: f64, delta: f64) -> Result<f64> {
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(Error::invalid(
            "v0",
            format!("must be finite and > 0, got {v0}"),
        ));
    }
    if !delta.is_finite() {
        return Err(Error::invalid(
            "delta",
            format!("must be finite, got {delta}"),
        ));
    }
    Ok(0.5 * v0.atan2(delta))
}

/// Half the dressed-doublet splitting, `Ω = √(Δ² + V0²)`.
pub fn rabi_splitting(v0: f64, delta: f64) -> f64 {
    delta.hypot(v0)
}

/// Dressed doublet derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    /// `Δ = (ω0 − ω1)/2`.
    pub delta: f64,
    pub theta: f64,
    /// `Ω`; the doublet is split by `2Ω`.
    pub omega_rabi: f64,
    /// Line centre `(ω0 + ω1)/2`.
    pub omega_mid: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    /// Plasmon weight `cos²θ` of `|−⟩`.
    pub w_minus: f64,
    /// Plasmon weight `sin²θ` of `|+⟩`.
    pub w_plus: f64,
}

impl DressedBasis {
    pub fn weight(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Minus => self.w_minus,
            Branch::Plus => self.w_plus,
        }
    }

    pub fn frequency(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Minus => self.omega_minus,
            Branch::Plus => self.omega_plus,
        }
    }
}

pub fn dressed_basis(params: &SystemParams) -> Result<DressedBasis> {
    params.validate()?;
    let delta = 0.5 * (params.omega0 - params.omega1);
    let theta = mixing_angle(params.v0, delta)?;
    let omega_rabi = rabi_splitting(params.v0, delta);
    let omega_mid = 0.5 * (params.omega0 + params.omega1);

    // The smaller weight V0²/(2Ω(Ω + |Δ|)) is free of cancellation; the
    // other is its complement, so w_minus + w_plus == 1 exactly.
    let small = params.v0 * params.v0 / (2.0 * omega_rabi * (omega_rabi + delta.abs()));
    let (w_minus, w_plus) = if delta >= 0.0 {
        (1.0 - small, small)
    } else {
        (small, 1.0 - small)
    };
    let min_weight = w_minus.min(w_plus);
    if min_weight < MIN_MIXING_WEIGHT {
        return Err(Error::DegenerateMixing {
            min_weight,
            threshold: MIN_MIXING_WEIGHT,
        });
    }

    Ok(DressedBasis {
        delta,
        theta,
        omega_rabi,
        omega_mid,
        omega_minus: omega_mid - omega_rabi,
        omega_plus: omega_mid + omega_rabi,
        w_minus,
        w_plus,
    })
}

/// Relaxation rates of one dressed transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRate {
    /// Longitudinal rate `Γ∥ᵇ`, equal to `grad + gnr`.
    pub gpar: f64,
    /// Transverse rate `Γ⊥ᵇ`.
    pub gperp: f64,
    /// Radiative rate `Γrᵇ`.
    pub grad: f64,
    /// Non-radiative rate `Γnrᵇ`.
    pub gnr: f64,
    /// Feeding rate `γᵇ` of `|U⟩ → |b⟩`.
    pub gfeed: f64,
    /// `|D01ᵇ|² / |D01|²`.
    pub dipole_w: f64,
}

impl BranchRate {
    /// Fraction of decays that emit a photon.
    pub fn quantum_yield(&self) -> f64 {
        self.grad / self.gpar
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRates {
    pub minus: BranchRate,
    pub plus: BranchRate,
}

impl BranchRates {
    pub fn get(&self, branch: Branch) -> &BranchRate {
        match branch {
            Branch::Minus => &self.minus,
            Branch::Plus => &self.plus,
        }
    }

    /// `γ⁻ + γ⁺`.
    pub fn feed_total(&self) -> f64 {
        self.minus.gfeed + self.plus.gfeed
    }

    pub fn gpar_total(&self) -> f64 {
        self.minus.gpar + self.plus.gpar
    }

    pub fn max_rate(&self) -> f64 {
        [
            self.minus.gpar,
            self.plus.gpar,
            self.minus.gperp,
            self.plus.gperp,
            self.feed_total(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn branch_rates(params: &SystemParams, basis: &DressedBasis) -> BranchRates {
    let branch = |w: f64, w_feed: f64| {
        let grad = params.gamma_r * w;
        let gnr = params.gamma_nr * w;
        BranchRate {
            gpar: grad + gnr,
            gperp: params.gamma_perp * w,
            grad,
            gnr,
            gfeed: params.gamma_u * w_feed,
            dipole_w: w,
        }
    };
    BranchRates {
        minus: branch(basis.w_minus, basis.w_plus),
        plus: branch(basis.w_plus, basis.w_minus),
    }
}
