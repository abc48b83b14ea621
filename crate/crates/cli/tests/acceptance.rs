//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion (with the sub-checks underneath); the
//! process exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qlight::bloch::{bloch_steady_state, regression_g2_resonant_numeric, weak_drive_population};
use qlight::correlations::{
    detected_peak, g1_analytic, g2_nonresonant_analytic, g2_nonresonant_normalized,
    g2_resonant_analytic, g2_resonant_normalized, spectrum_analytic, spectrum_fft_check,
};
use qlight::model::{branch_rates, dressed_basis};
use qlight::rate::{populations_on_grid, regression_g2_nonresonant_numeric, steady_state_analytic};
use qlight::stochastic::{simulate_trajectory, FanoAccumulator, G2Histogram};
use qlight::{
    Branch, BranchFilter, BranchRates, Normalization, Populations, Scenario, SystemParams,
    TrajectoryConfig,
};
use qlight_cli::commands::spectrum_file_name;
use qlight_cli::{parse_config, parse_config_str, run_command, Command, RunConfig, Table};

// Tolerances, all fixed here.
const C1_SE_MULTIPLE: f64 = 3.0;
const C1_MIN_PHOTONS: u64 = 1_000_000;
const C1_FIRST_BIN: f64 = 0.1;
const C1_TIME_LIMIT: Duration = Duration::from_secs(120);

const C2_IDENTITY_TOL: f64 = 1e-12;
const C2_TAU: f64 = 100.0;
const C2_TARGET: f64 = 0.62041;
// 1 - e^-1 - eps (1 - e^-100 gpar_minus) evaluated independently
const C2_ORACLE_VALUE: f64 = 0.620_404_830_076_019_5;
const C2_CLOSED_FORM_TOL: f64 = 1e-6;
const C2_ORACLE_TOL: f64 = 1.4e-4;
// rounding allowance for "monotone" on plateaus
const C2_MONOTONE_SLACK: f64 = 1e-12;

const C3_ANALYTIC_REL: f64 = 1e-6;
const C3_MEASURED_REL: f64 = 0.01;
const C3_FFT_REL: f64 = 0.01;

const C4_SETS: usize = 200;
const C4_TOL: f64 = 1e-8;
const C4_SUM_TOL: f64 = 1e-12;
const C4_MAX_FEED: f64 = 0.1;

const C5_MAX_SATURATION: f64 = 0.0025;
const C5_POP_REL: f64 = 0.01;
const C5_SUP_TOL: f64 = 5e-3;

const C6_POP: f64 = 0.1;
const C6_EXACT_TOL: f64 = 1e-12;
const C6_THZ: f64 = 100.0;
const C6_FACTOR: f64 = 2.0;

const C7_G2_ABS: f64 = 0.02;
const C7_RATE_REL: f64 = 0.02;
const C7_FANO_SIGMA: f64 = 5.0;
const C7_BIN_WIDTH: f64 = 25.0;
const C7_BINS: usize = 20;
const C7_FANO_WINDOW: f64 = 100.0;
const C7_TIME_LIMIT: Duration = Duration::from_secs(600);

struct Report {
    results: Vec<(String, bool)>,
}

struct Criterion {
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.checks.push((what, ok));
    }
}

impl Report {
    fn record(&mut self, id: u32, title: &str, c: Criterion) {
        let ok = !c.checks.is_empty() && c.checks.iter().all(|(_, ok)| *ok);
        println!(
            "{} criterion {id}: {title}",
            if ok { "PASS" } else { "FAIL" }
        );
        for (what, ok) in &c.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAIL" });
        }
        self.results.push((format!("{id}: {title}"), ok));
    }
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("presets")
        .join(name)
}

fn model(p: &SystemParams) -> (qlight::DressedBasis, BranchRates) {
    let b = dressed_basis(p).expect("valid parameters");
    let r = branch_rates(p, &b);
    (b, r)
}

fn read_table(path: &Path) -> Table {
    Table::parse(&std::fs::read_to_string(path).expect("output file")).expect("csv")
}

fn bin_average(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 200;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (hi - lo)
}

/// Ensemble statistics accumulated trajectory by trajectory.
struct Ensemble {
    hist: G2Histogram,
    fano: FanoAccumulator,
    photons: u64,
    duration: f64,
}

fn run_ensemble(
    p: &SystemParams,
    rates: &BranchRates,
    cfg: &TrajectoryConfig,
    edges: Vec<f64>,
    window: f64,
) -> Ensemble {
    let empty = || Ensemble {
        hist: G2Histogram::new(edges.clone(), cfg.branch_filter).unwrap(),
        fano: FanoAccumulator::new(window).unwrap(),
        photons: 0,
        duration: 0.0,
    };
    (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .fold(empty, |mut acc, i| {
            let tr = simulate_trajectory(rates, p.pump_r, cfg, i).unwrap();
            acc.hist.accumulate(&tr.stream);
            acc.fano.accumulate(&tr.stream);
            acc.photons += tr.stream.count(cfg.branch_filter) as u64;
            acc.duration += tr.stream.duration;
            acc
        })
        .reduce(empty, |mut a, b| {
            a.hist.merge(&b.hist).unwrap();
            a.fano.merge(&b.fano).unwrap();
            a.photons += b.photons;
            a.duration += b.duration;
            a
        })
}

fn criterion_1(report: &mut Report, fig3: &RunConfig) {
    let mut c = Criterion::new();
    let p = fig3.params;
    let (basis, rates) = model(&p);
    let zero = [0.0];
    for b in Branch::ALL {
        let nr =
            g2_nonresonant_analytic(b, &rates, p.pump_r, &zero, Normalization::Normalized).unwrap();
        let raw = g2_nonresonant_analytic(b, &rates, p.pump_r, &zero, Normalization::Raw).unwrap();
        c.check(
            nr.values[0] == 0.0 && raw.values[0] == 0.0,
            format!(
                "incoherent pump, branch {}: g2(0) = {} (raw {})",
                b.name(),
                nr.values[0],
                raw.values[0]
            ),
        );
        let drive = p.branch_drive(&basis, b);
        let r = g2_resonant_analytic(b, &rates, drive, &zero, Normalization::Normalized).unwrap();
        let raw = g2_resonant_analytic(b, &rates, drive, &zero, Normalization::Raw).unwrap();
        c.check(
            r.values[0] == 0.0 && raw.values[0] == 0.0,
            format!(
                "resonant drive, branch {}: g2(0) = {} (raw {})",
                b.name(),
                r.values[0],
                raw.values[0]
            ),
        );
    }

    let start = Instant::now();
    let photon_rate = steady_state_analytic(&rates, p.pump_r).unwrap().p_mm * rates.minus.grad;
    // 20% above the expected requirement so the photon floor holds after
    // fluctuations
    let total = 1.2 * C1_MIN_PHOTONS as f64 / photon_rate;
    let n = 16;
    let cfg = TrajectoryConfig {
        duration: total / n as f64,
        n_trajectories: n,
        master_seed: 1,
        branch_filter: BranchFilter::Minus,
    };
    let ens = run_ensemble(
        &p,
        &rates,
        &cfg,
        vec![0.0, C1_FIRST_BIN / p.gamma_par()],
        1.0,
    );
    let est = ens.hist.finish().unwrap();
    let elapsed = start.elapsed();
    c.check(
        ens.photons >= C1_MIN_PHOTONS,
        format!("{} branch − photons (need {C1_MIN_PHOTONS})", ens.photons),
    );
    c.check(
        est.series.values[0].abs() <= C1_SE_MULTIPLE * est.std_error[0],
        format!(
            "first bin [0, {C1_FIRST_BIN}/gamma_par]: g2 = {} ± {} ({} pairs), need within {C1_SE_MULTIPLE} SE of 0",
            est.series.values[0], est.std_error[0], est.pairs[0]
        ),
    );
    c.check(
        elapsed < C1_TIME_LIMIT,
        format!(
            "stochastic estimate took {:.1} s (limit {} s)",
            elapsed.as_secs_f64(),
            C1_TIME_LIMIT.as_secs()
        ),
    );
    report.record(1, "antibunching at zero delay", c);
}

fn criterion_2(report: &mut Report, fig3: &RunConfig, out: &Path) {
    let mut c = Criterion::new();
    let p = fig3.params;
    let (_, rates) = model(&p);
    let delta = 0.5 * (p.omega0 - p.omega1);
    c.check(
        p.v0 / delta == 1.0
            && ((p.pump_r + p.gamma_u) / p.gamma_par() - 0.01).abs() < 1e-15
            && p.gamma_perp / p.gamma_par() == 0.5,
        format!(
            "preset: V0/Delta = {}, (R+gamma)/gamma_par = {}, gamma_perp/gamma_par = {}",
            p.v0 / delta,
            (p.pump_r + p.gamma_u) / p.gamma_par(),
            p.gamma_perp / p.gamma_par()
        ),
    );

    run_command(Command::G2, fig3, out).unwrap();
    let t = read_table(&out.join("g2.csv"));
    let tau = t.column_f64("tau").unwrap();
    let cols = ["NR_minus", "NR_plus", "R_minus", "R_plus"];
    for name in cols {
        let v = t.column_f64(name).unwrap();
        let from_zero = v[0] == 0.0;
        let worst_drop = v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        c.check(
            from_zero && worst_drop <= C2_MONOTONE_SLACK,
            format!(
                "{name}: starts at {}, largest decrease {worst_drop:e}",
                v[0]
            ),
        );
    }

    let r_minus = t.column_f64("R_minus").unwrap();
    let gpar = rates.minus.gpar;
    let worst = tau
        .iter()
        .zip(&r_minus)
        .map(|(x, v)| {
            let t_int = x / p.gamma_par();
            (v - (-(-gpar * t_int / 2.0).exp_m1()).powi(2)).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        worst <= C2_IDENTITY_TOL,
        format!("R_minus vs (1 - exp(-gpar_minus tau/2))^2: max deviation {worst:e} (tol {C2_IDENTITY_TOL:e})"),
    );

    let k = tau
        .iter()
        .position(|&x| x == C2_TAU)
        .expect("grid contains tau = 100");
    let nr = t.column_f64("NR_minus").unwrap()[k];
    c.check(
        (nr - C2_TARGET).abs() <= C2_CLOSED_FORM_TOL,
        format!("NR_minus(100) = {nr} vs {C2_TARGET} (tol {C2_CLOSED_FORM_TOL:e})"),
    );

    c.check(
        (nr - C2_ORACLE_VALUE).abs() <= C2_CLOSED_FORM_TOL,
        format!("NR_minus(100) vs independently evaluated closed form {C2_ORACLE_VALUE} (tol {C2_CLOSED_FORM_TOL:e})"),
    );

    let grid = [0.0, C2_TAU / p.gamma_par()];
    let oracle = regression_g2_nonresonant_numeric(&rates, p.pump_r, Branch::Minus, &grid)
        .unwrap()
        .values[1];
    c.check(
        (nr - oracle).abs() <= C2_ORACLE_TOL,
        format!(
            "NR_minus(100) vs integrated regression {oracle}: |diff| = {:e} (tol {C2_ORACLE_TOL:e})",
            (nr - oracle).abs()
        ),
    );
    report.record(2, "normalized g2 curves, V0/Delta = 1", c);
}

fn criterion_3(report: &mut Report, out: &Path) {
    let mut c = Criterion::new();
    let mut cfg = parse_config(&preset("fig2.conf")).unwrap();
    // fine abscissa for the measured widths
    cfg.omega_steps = 40_001;
    run_command(Command::Spectrum, &cfg, out).unwrap();
    let delta = 0.5 * (cfg.params.omega0 - cfg.params.omega1);
    c.check(
        delta / cfg.params.gamma_perp == 1.0,
        format!(
            "preset Delta/gamma_perp = {}",
            delta / cfg.params.gamma_perp
        ),
    );

    for &ratio in &cfg.coupling_ratios {
        let mut p = cfg.params;
        p.v0 = ratio * delta;
        let (basis, rates) = model(&p);
        let steady = steady_state_analytic(&rates, p.pump_r).unwrap();
        let theta = 0.5 * (p.v0 / delta).atan();
        let tan2 = theta.tan().powi(2);
        let cot4 = tan2.powi(-2);
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();

        let sep = basis.omega_plus - basis.omega_minus;
        let width = rates.plus.gperp / rates.minus.gperp;
        let peak = detected_peak(Branch::Plus, &rates, &steady)
            / detected_peak(Branch::Minus, &rates, &steady);
        c.check(
            rel(sep, 2.0 * basis.omega_rabi) <= C3_ANALYTIC_REL
                && rel(width, tan2) <= C3_ANALYTIC_REL
                && rel(peak, cot4) <= C3_ANALYTIC_REL,
            format!(
                "V0/Delta = {ratio} analytic: separation/2Omega - 1 = {:e}, width ratio - tan^2 = {:e}, peak ratio - cot^4 = {:e} (relative)",
                sep / (2.0 * basis.omega_rabi) - 1.0,
                width / tan2 - 1.0,
                peak / cot4 - 1.0
            ),
        );

        let t = read_table(&out.join(spectrum_file_name(ratio)));
        let x = t.column_f64("omega").unwrap();
        let series = |name: &str| qlight::SpectrumSeries {
            omega: x.clone(),
            values: t.column_f64(name).unwrap(),
            tag: qlight::SpectrumTag::Detected,
        };
        let (sm, sp) = (series("S_minus"), series("S_plus"));
        let (xm, hm) = sm.peak();
        let (xp, hp) = sp.peak();
        let m_sep = (xp - xm) * p.gamma_perp;
        let m_width = sp.fwhm().unwrap() / sm.fwhm().unwrap();
        let m_peak = hp / hm;
        c.check(
            rel(m_sep, 2.0 * basis.omega_rabi) <= C3_MEASURED_REL
                && rel(m_width, tan2) <= C3_MEASURED_REL
                && rel(m_peak, cot4) <= C3_MEASURED_REL,
            format!(
                "V0/Delta = {ratio} sampled: separation {m_sep} vs {}, width ratio {m_width} vs {tan2}, peak ratio {m_peak} vs {cot4}",
                2.0 * basis.omega_rabi
            ),
        );

        for b in Branch::ALL {
            let g = rates.get(b).gperp;
            let dt = 1.0 / (128.0 * g);
            let n = (40.0 / (g * dt)) as usize + 1;
            let grid: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
            let g1 = g1_analytic(b, &rates, &steady, &basis, &grid).unwrap();
            let fft = spectrum_fft_check(&g1).unwrap();
            let (w_peak, s_peak) = fft.peak();
            let lor = spectrum_analytic(b, &rates, &steady, &basis, &[w_peak])
                .unwrap()
                .values[0];
            c.check(
                rel(s_peak, lor) <= C3_FFT_REL,
                format!(
                    "V0/Delta = {ratio} branch {}: FFT peak {s_peak} vs Lorentzian {lor} at omega = {w_peak}",
                    b.name()
                ),
            );
        }
    }
    report.record(
        3,
        "spectral doublet: separation, widths, peak ratio, FFT route",
        c,
    );
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let log_uniform =
        |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..hi.ln())).exp();
    let gamma_r = rng.gen_range(0.2..1.0);
    let gamma_nr = rng.gen_range(0.0..0.8);
    let gpar = gamma_r + gamma_nr;
    let delta: f64 = rng.gen_range(-3.0..3.0);
    SystemParams {
        omega0: 10.0 + delta,
        omega1: 10.0 - delta,
        v0: log_uniform(rng, 0.05, 3.0),
        gamma_r,
        gamma_nr,
        gamma_perp: gpar * rng.gen_range(0.5..3.0),
        gamma_u: log_uniform(rng, 1e-3, C4_MAX_FEED) * gpar,
        pump_r: log_uniform(rng, 1e-3, C4_MAX_FEED) * gpar,
        omega_l_rabi: 0.0,
        scenario: Scenario::NonResonant,
    }
}

fn criterion_4(report: &mut Report) {
    let mut c = Criterion::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sets: Vec<SystemParams> = (0..C4_SETS).map(|_| random_params(&mut rng)).collect();
    let results: Vec<(f64, f64)> = sets
        .par_iter()
        .map(|p| {
            let (_, rates) = model(p);
            let s = steady_state_analytic(&rates, p.pump_r).unwrap();
            let slowest = [
                p.pump_r,
                rates.feed_total(),
                rates.minus.gpar,
                rates.plus.gpar,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            let t_end = 100.0 / slowest;
            let long = populations_on_grid(
                &Populations::GROUND,
                &rates,
                p.pump_r,
                &[t_end],
                f64::INFINITY,
            )
            .unwrap()[0];
            let dev = s
                .to_array()
                .iter()
                .zip(long.to_array())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (dev, (s.sum() - 1.0).abs())
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_sum = results.iter().map(|r| r.1).fold(0.0, f64::max);
    c.check(
        worst <= C4_TOL,
        format!("{C4_SETS} random sets: max |closed form - long-time integration| = {worst:e} (tol {C4_TOL:e})"),
    );
    c.check(
        worst_sum <= C4_SUM_TOL,
        format!("max |sum of populations - 1| = {worst_sum:e} (tol {C4_SUM_TOL:e})"),
    );
    report.record(4, "stationary populations", c);
}

fn criterion_5(report: &mut Report) {
    let mut c = Criterion::new();
    let mut worst_pop: f64 = 0.0;
    let mut worst_sup: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for _ in 0..40 {
        let gpar = rng.gen_range(0.1..2.0);
        let gperp = gpar * rng.gen_range(0.5..3.0);
        for sat in [1e-5, 1e-4, 1e-3, C5_MAX_SATURATION] {
            let drive = (sat * gperp * gpar).sqrt();
            let exact = bloch_steady_state(drive, gpar, gperp, 0.0).unwrap().p_ee;
            let weak = weak_drive_population(drive, gpar, gperp);
            worst_pop = worst_pop.max((exact / weak - 1.0).abs());

            let slow = gpar.min(gperp);
            let grid: Vec<f64> = (0..=600).map(|k| k as f64 * 0.05 / slow).collect();
            let g = regression_g2_resonant_numeric(drive, gpar, gperp, &grid).unwrap();
            let sup = grid
                .iter()
                .zip(&g.values)
                .map(|(t, v)| (v - g2_resonant_normalized(gpar, gperp, *t)).abs())
                .fold(0.0, f64::max);
            worst_sup = worst_sup.max(sup);
            cases += 1;
        }
    }
    c.check(
        worst_pop <= C5_POP_REL,
        format!("{cases} cases with saturation <= {C5_MAX_SATURATION}: max relative gap to 2 Omega^2/(gperp gpar) = {worst_pop:e}"),
    );
    c.check(
        worst_sup <= C5_SUP_TOL,
        format!(
            "integrated regression vs closed form: sup-norm {worst_sup:e} (tol {C5_SUP_TOL:e})"
        ),
    );
    report.record(5, "resonant weak drive", c);
}

fn criterion_6(report: &mut Report, out: &Path) {
    let mut c = Criterion::new();
    // gamma_r_minus = gamma_r/2 = 1 and Omega_minus^2/(gperp_minus gpar_minus) = omega_l_rabi^2
    let text = format!(
        "omega0 = 10\nomega1 = 10\nv0 = 1\ngamma_r = 2\ngamma_nr = 0\ngamma_perp = 1\n\
         gamma_u = 0.005\npump_r = 0.005\nomega_l_rabi = {}\nscenario = resonant\nunit_scale = 1000\nunit_name = THz\n",
        0.05f64.sqrt()
    );
    let cfg = parse_config_str(&text).unwrap();
    run_command(Command::Rates, &cfg, out).unwrap();
    let t = read_table(&out.join("rates.csv"));
    let get = |q: &str, col: usize| -> f64 {
        t.rows.iter().find(|r| r[0] == q).unwrap()[col]
            .parse()
            .unwrap()
    };
    let grad = get("gamma_r_minus", 1);
    let sat = get("saturation_minus", 1);
    let p = get("p_minus_weak", 1);
    c.check(
        (sat - 0.05).abs() <= C6_EXACT_TOL && (p - C6_POP * grad).abs() <= C6_EXACT_TOL,
        format!(
            "saturation {sat}: weak-drive p = {p} = {} x gamma_r_minus",
            p / grad
        ),
    );
    let phys_gr = get("gamma_r_minus", 2);
    let phys = get("p_minus_weak", 2);
    c.check(
        phys_gr == 1000.0 && (phys - C6_THZ).abs() <= C6_EXACT_TOL * C6_THZ,
        format!("gamma_r_minus = {phys_gr} THz gives p = {phys} THz"),
    );

    // total photon rate against eta*min(R, gamma) over three decades of R/gamma
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi: f64 = 0.0;
    let n = 30;
    for k in 0..n {
        let x = -1.5 + 3.0 * k as f64 / (n - 1) as f64;
        let text = format!(
            "omega0 = 11\nomega1 = 9\nv0 = 1\ngamma_r = 0.5\ngamma_nr = 0.5\ngamma_perp = 1\n\
             gamma_u = {}\npump_r = {}\nomega_l_rabi = 0\n",
            0.01 * 10f64.powf(-x / 2.0),
            0.01 * 10f64.powf(x / 2.0)
        );
        let cfg = parse_config_str(&text).unwrap();
        run_command(Command::Rates, &cfg, out).unwrap();
        let t = read_table(&out.join("rates.csv"));
        let p_total: f64 = t.rows.iter().find(|r| r[0] == "p_total").unwrap()[1]
            .parse()
            .unwrap();
        let scale = cfg.params.quantum_yield() * cfg.params.pump_r.min(cfg.params.gamma_u);
        let ratio = p_total / scale;
        worst_lo = worst_lo.min(ratio);
        worst_hi = worst_hi.max(ratio);
    }
    c.check(
        worst_lo >= 1.0 / C6_FACTOR && worst_hi <= C6_FACTOR,
        format!("R/gamma over 10^-1.5..10^1.5: p/(eta min(R, gamma)) in [{worst_lo}, {worst_hi}]"),
    );
    report.record(6, "photon-rate arithmetic", c);
}

fn criterion_7(report: &mut Report, fig3: &RunConfig, suite_start: Instant) {
    let mut c = Criterion::new();
    let p = fig3.params;
    let (_, rates) = model(&p);
    let steady = steady_state_analytic(&rates, p.pump_r).unwrap();
    let gpar = p.gamma_par();
    let cfg = TrajectoryConfig {
        duration: 2.5e9,
        n_trajectories: 80,
        master_seed: 7,
        branch_filter: BranchFilter::Minus,
    };
    let edges: Vec<f64> = (0..=C7_BINS)
        .map(|k| k as f64 * C7_BIN_WIDTH / gpar)
        .collect();
    let ens = run_ensemble(&p, &rates, &cfg, edges, C7_FANO_WINDOW / gpar);
    let est = ens.hist.finish().unwrap();

    let slow = p.pump_r + rates.feed_total();
    let mut worst: f64 = 0.0;
    let mut worst_at = 0.0;
    for k in 0..C7_BINS {
        let (lo, hi) = (est.edges[k], est.edges[k + 1]);
        let model = bin_average(
            |t| g2_nonresonant_normalized(slow, rates.minus.gpar, t),
            lo,
            hi,
        );
        let d = (est.series.values[k] - model).abs();
        if d > worst {
            worst = d;
            worst_at = est.series.tau[k] * gpar;
        }
    }
    let se_max = est.std_error.iter().cloned().fold(0.0, f64::max);
    c.check(
        worst <= C7_G2_ABS,
        format!(
            "branch −, {} photons, {} bins of {C7_BIN_WIDTH}/gamma_par: max |histogram - closed form| = {worst} at tau = {worst_at} (tol {C7_G2_ABS}, largest SE {se_max})",
            ens.photons, C7_BINS
        ),
    );

    let rate = ens.photons as f64 / ens.duration;
    let expected = steady.p_mm * rates.minus.grad;
    c.check(
        (rate / expected - 1.0).abs() <= C7_RATE_REL,
        format!(
            "emission rate {rate} vs rho_minus gamma_r_minus = {expected} (tol {})",
            C7_RATE_REL
        ),
    );

    let f = ens.fano.finish().unwrap();
    c.check(
        1.0 - f.value >= C7_FANO_SIGMA * f.std_error,
        format!(
            "Fano factor over windows of {C7_FANO_WINDOW}/gamma_par: {} ± {} ({:.1} sigma below 1)",
            f.value,
            f.std_error,
            (1.0 - f.value) / f.std_error
        ),
    );

    let elapsed = suite_start.elapsed();
    c.check(
        elapsed < C7_TIME_LIMIT,
        format!(
            "acceptance run so far {:.1} s (limit {} s)",
            elapsed.as_secs_f64(),
            C7_TIME_LIMIT.as_secs()
        ),
    );
    report.record(7, "jump-simulation oracle", c);
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let suite_start = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let fig3 = parse_config(&preset("fig3.conf")).expect("preset");
    let mut report = Report {
        results: Vec::new(),
    };

    criterion_1(&mut report, &fig3);
    criterion_2(&mut report, &fig3, dir.path());
    criterion_3(&mut report, dir.path());
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report, dir.path());
    criterion_7(&mut report, &fig3, suite_start);

    let failed: Vec<_> = report
        .results
        .iter()
        .filter(|r| !r.1)
        .map(|r| r.0.clone())
        .collect();
    println!(
        "acceptance: {} passed, {} failed ({:.1} s)",
        report.results.len() - failed.len(),
        failed.len(),
        suite_start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        for f in &failed {
            println!("  failed criterion {f}");
        }
        std::process::exit(1);
    }
}
