use std::path::{Path, PathBuf};

use qlight::bloch::{bloch_steady_state, weak_drive_population};
use qlight::correlations::{
    detected_line, g2_nonresonant_analytic, g2_resonant_analytic, nonresonant_regime_warning,
};
use qlight::model::{branch_rates, dressed_basis};
use qlight::rate::{populations_on_grid, steady_state_analytic};
use qlight::stochastic::{emission_rate, fano_factor, g2_histogram, simulate_ensemble};
use qlight::{
    Branch, BranchRates, DressedBasis, Error, Normalization, Populations, Scenario, SystemParams,
};

use crate::config::RunConfig;
use crate::output::{provenance, write_atomic, Table};
use crate::CliError;

/// Weak-drive results are flagged above this saturation parameter.
pub const WEAK_DRIVE_LIMIT: f64 = 0.0025;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Text printed to stdout.
    pub report: Option<String>,
}

fn model(params: &SystemParams) -> Result<(DressedBasis, BranchRates), Error> {
    let basis = dressed_basis(params)?;
    let rates = branch_rates(params, &basis);
    Ok((basis, rates))
}

fn write(table: &Table, out: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(name);
    table.write_atomic(&path)?;
    files.push(path);
    Ok(())
}

/// One spectrum for `V0 = ratio·|Δ|`. The abscissa is `(ω − ω_m)/Γ⊥`;
/// the branch columns carry their dipole weights so that they add up to
/// `S_detected`.
pub fn spectrum_table(cfg: &RunConfig, ratio: f64) -> Result<Table, CliError> {
    let mut params = cfg.params;
    let delta = 0.5 * (params.omega0 - params.omega1);
    if delta == 0.0 {
        return Err(CliError::Config(crate::ConfigError::Invalid {
            key: "coupling_ratios".into(),
            reason: "the V0/Delta sweep needs omega0 != omega1".into(),
        }));
    }
    params.v0 = ratio * delta.abs();
    let (basis, rates) = model(&params)?;
    let steady = steady_state_analytic(&rates, params.pump_r)?;
    let axis = cfg.omega_axis();
    let omega: Vec<f64> = axis
        .iter()
        .map(|x| basis.omega_mid + x * params.gamma_perp)
        .collect();
    let minus = detected_line(Branch::Minus, &rates, &steady, &basis, &omega)?;
    let plus = detected_line(Branch::Plus, &rates, &steady, &basis, &omega)?;

    let mut t = Table::new(&["omega", "S_minus", "S_plus", "S_detected"]);
    provenance("spectrum", cfg)
        .into_iter()
        .for_each(|c| t.comment(c));
    t.comment(format!("V0/Delta = {ratio}, v0 = {}", params.v0));
    t.comment("omega column is (omega - omega_m)/gamma_perp");
    t.comment(format!(
        "theta = {}, peak ratio S_plus/S_minus = cot^4(theta) = {}, width ratio = tan^2(theta) = {}",
        basis.theta,
        basis.theta.tan().powi(-4),
        basis.theta.tan().powi(2)
    ));
    for k in 0..axis.len() {
        let (a, b) = (minus.values[k], plus.values[k]);
        t.push_numbers(&[axis[k], a, b, a + b]);
    }
    Ok(t)
}

pub fn spectrum_file_name(ratio: f64) -> String {
    format!("spectrum_v0_over_delta_{ratio}.csv")
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    if cfg.params.scenario != Scenario::NonResonant {
        return Err(CliError::Model(Error::Configuration(
            "the emission spectrum is computed for the incoherently pumped scenario".into(),
        )));
    }
    let mut files = Vec::new();
    for &r in &cfg.coupling_ratios {
        write(
            &spectrum_table(cfg, r)?,
            out,
            &spectrum_file_name(r),
            &mut files,
        )?;
    }
    Ok(Outcome {
        files,
        report: None,
    })
}

/// Branch Rabi frequency and saturation parameter `Ω_b²/(Γ⊥ᵇΓ∥ᵇ)`.
fn drive_of(
    params: &SystemParams,
    basis: &DressedBasis,
    rates: &BranchRates,
    b: Branch,
) -> (f64, f64) {
    let drive = params.branch_drive(basis, b);
    let r = rates.get(b);
    (drive, drive * drive / (r.gperp * r.gpar))
}

/// Normalized g² of both branches under both excitation schemes, with the
/// delay in units of `1/Γ∥`.
pub fn g2_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = &cfg.params;
    let (basis, rates) = model(params)?;
    let grid = cfg.tau_grid();
    let mut t = Table::new(&["tau", "NR_minus", "NR_plus", "R_minus", "R_plus"]);
    provenance("g2", cfg).into_iter().for_each(|c| t.comment(c));
    t.comment("tau column is in units of 1/(gamma_r + gamma_nr); values normalized by g1(0)^2");
    for b in Branch::ALL {
        if let Some(w) = nonresonant_regime_warning(b, &rates, params.pump_r) {
            t.comment(format!("warning: NR {w}"));
        }
        let (_, sat) = drive_of(params, &basis, &rates, b);
        if sat > WEAK_DRIVE_LIMIT {
            t.comment(format!(
                "warning: R branch {}: saturation Omega_b^2/(gperp*gpar) = {sat} exceeds {WEAK_DRIVE_LIMIT}, weak-drive g2 is approximate",
                b.symbol()
            ));
        }
    }
    let nr: Vec<_> = Branch::ALL
        .iter()
        .map(|&b| {
            g2_nonresonant_analytic(b, &rates, params.pump_r, &grid, Normalization::Normalized)
        })
        .collect::<Result<_, _>>()?;
    let res: Vec<_> = Branch::ALL
        .iter()
        .map(|&b| {
            let (drive, _) = drive_of(params, &basis, &rates, b);
            g2_resonant_analytic(b, &rates, drive, &grid, Normalization::Normalized)
        })
        .collect::<Result<_, _>>()?;
    let gpar = params.gamma_par();
    for k in 0..grid.len() {
        t.push_numbers(&[
            grid[k] * gpar,
            nr[0].values[k],
            nr[1].values[k],
            res[0].values[k],
            res[1].values[k],
        ]);
    }
    Ok(t)
}

pub fn cmd_g2(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut files = Vec::new();
    write(&g2_table(cfg)?, out, "g2.csv", &mut files)?;
    Ok(Outcome {
        files,
        report: None,
    })
}

/// Photon streams, coincidence histogram and summary statistics.
pub fn cmd_trajectory(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let params = &cfg.params;
    let (_, rates) = model(params)?;
    let filter = cfg.trajectory.branch_filter;
    let runs = simulate_ensemble(params, &rates, &cfg.trajectory)?;
    let streams: Vec<_> = runs.into_iter().map(|r| r.stream).collect();
    let mut files = Vec::new();

    if cfg.write_streams {
        let dir = out.join("streams");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?;
        for (i, s) in streams.iter().enumerate() {
            let mut buf = Vec::new();
            s.write_to(&mut buf).expect("in-memory write");
            let path = dir.join(format!("stream_{i:04}.txt"));
            write_atomic(&path, &buf)?;
            files.push(path);
        }
    }

    let gpar = params.gamma_par();
    let steady = steady_state_analytic(&rates, params.pump_r)?;
    let seed_line = format!(
        "master_seed = {}, n_trajectories = {}, duration = {}, branch = {}",
        cfg.trajectory.master_seed,
        cfg.trajectory.n_trajectories,
        cfg.trajectory.duration,
        filter.name()
    );

    let mut hist = Table::new(&[
        "tau_lo",
        "tau_hi",
        "tau",
        "g2",
        "std_error",
        "pairs",
        "g2_closed_form",
    ]);
    provenance("trajectory", cfg)
        .into_iter()
        .for_each(|c| hist.comment(c));
    hist.comment(seed_line.clone());
    hist.comment("tau columns are in units of 1/(gamma_r + gamma_nr)");
    match g2_histogram(&streams, filter, &cfg.bin_edges()) {
        Ok(est) => {
            let closed = filter.branch().map(|b| {
                let slow = params.pump_r + rates.feed_total();
                let g = rates.get(b).gpar;
                // bin average of the closed form, by Simpson's rule
                move |lo: f64, hi: f64| {
                    let f = |t: f64| qlight::correlations::g2_nonresonant_normalized(slow, g, t);
                    let n = 64;
                    let h = (hi - lo) / n as f64;
                    let mut s = f(lo) + f(hi);
                    for k in 1..n {
                        s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
                    }
                    s * h / 3.0 / (hi - lo)
                }
            });
            if closed.is_none() {
                hist.comment("g2_closed_form is only defined for a single branch");
            }
            for k in 0..est.pairs.len() {
                let (lo, hi) = (est.edges[k], est.edges[k + 1]);
                let cf = closed.as_ref().map_or(f64::NAN, |c| c(lo, hi));
                hist.push_numbers(&[
                    lo * gpar,
                    hi * gpar,
                    est.series.tau[k] * gpar,
                    est.series.values[k],
                    est.std_error[k],
                    est.pairs[k] as f64,
                    cf,
                ]);
            }
        }
        Err(Error::InsufficientData(why)) => hist.comment(format!("no histogram: {why}")),
        Err(e) => return Err(e.into()),
    }
    write(&hist, out, "g2_histogram.csv", &mut files)?;

    let mut summary = Table::new(&["quantity", "value", "std_error", "expected"]);
    provenance("trajectory", cfg)
        .into_iter()
        .for_each(|c| summary.comment(c));
    summary.comment(seed_line);
    summary.comment(format!(
        "rates are per internal time unit; *_physical rows are in {}",
        cfg.unit_name
    ));
    let rate = emission_rate(&streams, filter)?;
    let expected: f64 = Branch::ALL
        .iter()
        .filter(|b| filter.accepts(**b))
        .map(|&b| steady.dressed(b) * rates.get(b).grad)
        .sum();
    let row = |q: &str, v: f64, se: f64, ex: f64| {
        vec![
            q.to_string(),
            format!("{v}"),
            format!("{se}"),
            format!("{ex}"),
        ]
    };
    summary.push_row(row(
        "photons",
        rate.count as f64,
        (rate.count as f64).sqrt(),
        expected * rate.duration,
    ));
    summary.push_row(row("rate", rate.rate, rate.std_error, expected));
    summary.push_row(row(
        "rate_physical",
        rate.rate * cfg.unit_scale,
        rate.std_error * cfg.unit_scale,
        expected * cfg.unit_scale,
    ));
    match fano_factor(&streams, cfg.window / gpar) {
        Ok(f) => summary.push_row(row("fano", f.value, f.std_error, f64::NAN)),
        Err(Error::InsufficientData(why)) => {
            summary.comment(format!("no Fano factor: {why}"));
            summary.push_row(row("fano", f64::NAN, f64::NAN, f64::NAN));
        }
        Err(e) => return Err(e.into()),
    }
    write(&summary, out, "summary.csv", &mut files)?;
    Ok(Outcome {
        files,
        report: None,
    })
}

/// One line of the rates report.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLine {
    pub quantity: String,
    pub internal: f64,
    /// `internal · unit_scale` for frequencies and rates.
    pub physical: Option<f64>,
}

pub fn rates_report(cfg: &RunConfig) -> Result<Vec<RateLine>, CliError> {
    let params = &cfg.params;
    let (basis, rates) = model(params)?;
    let mut lines = Vec::new();
    let mut push = |q: String, v: f64, freq: bool| {
        lines.push(RateLine {
            quantity: q,
            internal: v,
            physical: freq.then_some(v * cfg.unit_scale),
        })
    };
    push("theta".into(), basis.theta, false);
    push("delta".into(), basis.delta, true);
    push("omega_rabi".into(), basis.omega_rabi, true);
    push("omega_m".into(), basis.omega_mid, true);
    push("omega_minus".into(), basis.omega_minus, true);
    push("omega_plus".into(), basis.omega_plus, true);
    push("eta".into(), params.quantum_yield(), false);
    for b in Branch::ALL {
        let r = rates.get(b);
        let n = b.name();
        push(format!("dipole_weight_{n}"), r.dipole_w, false);
        push(format!("gamma_par_{n}"), r.gpar, true);
        push(format!("gamma_perp_{n}"), r.gperp, true);
        push(format!("gamma_r_{n}"), r.grad, true);
        push(format!("gamma_nr_{n}"), r.gnr, true);
        push(format!("gamma_feed_{n}"), r.gfeed, true);
    }
    match params.scenario {
        Scenario::NonResonant => {
            let s = steady_state_analytic(&rates, params.pump_r)?;
            push("rho_GG".into(), s.p_gg, false);
            push("rho_UU".into(), s.p_uu, false);
            push("rho_minus".into(), s.p_mm, false);
            push("rho_plus".into(), s.p_pp, false);
            let mut total = 0.0;
            for b in Branch::ALL {
                let p = s.dressed(b) * rates.get(b).grad;
                total += p;
                push(format!("p_{}", b.name()), p, true);
            }
            push("p_total".into(), total, true);
        }
        Scenario::Resonant => {
            for b in Branch::ALL {
                let n = b.name();
                let r = rates.get(b);
                let (drive, sat) = drive_of(params, &basis, &rates, b);
                let weak = weak_drive_population(drive, r.gpar, r.gperp);
                let exact = bloch_steady_state(drive, r.gpar, r.gperp, 0.0)?.p_ee;
                push(format!("drive_{n}"), drive, true);
                push(format!("saturation_{n}"), sat, false);
                push(format!("rho_{n}_weak"), weak, false);
                push(format!("rho_{n}_exact"), exact, false);
                push(format!("p_{n}_weak"), weak * r.grad, true);
                push(format!("p_{n}_exact"), exact * r.grad, true);
            }
        }
    }
    Ok(lines)
}

pub fn cmd_rates(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let lines = rates_report(cfg)?;
    let mut t = Table::new(&["quantity", "internal", "physical"]);
    provenance("rates", cfg)
        .into_iter()
        .for_each(|c| t.comment(c));
    t.comment(format!("physical column in {}", cfg.unit_name));
    let mut report = format!(
        "{:<22} {:>24} {:>24}\n",
        "quantity",
        "internal",
        format!("[{}]", cfg.unit_name)
    );
    for l in &lines {
        let phys = l.physical.map_or(String::new(), |v| format!("{v}"));
        report.push_str(&format!(
            "{:<22} {:>24} {:>24}\n",
            l.quantity,
            format!("{}", l.internal),
            phys
        ));
        t.push_row(vec![l.quantity.clone(), format!("{}", l.internal), phys]);
    }
    let mut files = Vec::new();
    write(&t, out, "rates.csv", &mut files)?;
    Ok(Outcome {
        files,
        report: Some(report),
    })
}

/// Integration horizon for the long-time check: many times the slowest
/// nonzero relaxation time.
fn relaxation_horizon(rates: &BranchRates, pump_r: f64) -> f64 {
    let slowest = [
        pump_r,
        rates.feed_total(),
        rates.minus.gpar,
        rates.plus.gpar,
    ]
    .into_iter()
    .filter(|r| *r > 0.0)
    .fold(f64::INFINITY, f64::min);
    60.0 / slowest
}

pub fn steady_state_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = &cfg.params;
    let (basis, rates) = model(params)?;
    match params.scenario {
        Scenario::NonResonant => {
            let s = steady_state_analytic(&rates, params.pump_r)?;
            let t_end = relaxation_horizon(&rates, params.pump_r);
            let long = populations_on_grid(
                &Populations::GROUND,
                &rates,
                params.pump_r,
                &[t_end],
                f64::INFINITY,
            )?[0];
            let mut t = Table::new(&["state", "analytic", "integrated"]);
            provenance("steady-state", cfg)
                .into_iter()
                .for_each(|c| t.comment(c));
            t.comment(format!(
                "integrated column: balance equations from G to t = {t_end}"
            ));
            for (name, (a, b)) in ["G", "U", "-", "+"]
                .iter()
                .zip(s.to_array().into_iter().zip(long.to_array()))
            {
                t.push_row(vec![name.to_string(), format!("{a}"), format!("{b}")]);
            }
            Ok(t)
        }
        Scenario::Resonant => {
            let mut t = Table::new(&["branch", "drive", "p_ee", "coh_re", "coh_im", "p_ee_weak"]);
            provenance("steady-state", cfg)
                .into_iter()
                .for_each(|c| t.comment(c));
            t.comment("each branch driven on its own resonance");
            for b in Branch::ALL {
                let r = rates.get(b);
                let (drive, _) = drive_of(params, &basis, &rates, b);
                let s = bloch_steady_state(drive, r.gpar, r.gperp, 0.0)?;
                t.push_row(
                    [
                        b.symbol().to_string(),
                        format!("{drive}"),
                        format!("{}", s.p_ee),
                        format!("{}", s.coh_re),
                        format!("{}", s.coh_im),
                        format!("{}", weak_drive_population(drive, r.gpar, r.gperp)),
                    ]
                    .to_vec(),
                );
            }
            Ok(t)
        }
    }
}

pub fn cmd_steady_state(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let t = steady_state_table(cfg)?;
    let report = t.to_csv();
    let mut files = Vec::new();
    write(&t, out, "steady_state.csv", &mut files)?;
    Ok(Outcome {
        files,
        report: Some(report),
    })
}
