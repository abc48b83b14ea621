//! Continuous-time jump simulation of the incoherently pumped emission cycle
//! and estimators for the resulting photon streams.
//!
//! The chain has four states `{G, U, −, +}` with transitions `G → U` at `R`,
//! `U → ±` at `γ±` and `± → G` at `Γ∥±`. A decay `b → G` is recorded as a
//! photon with probability `Γrᵇ/Γ∥ᵇ` (Bernoulli thinning of the decay).
//! Every trajectory starts in `G` at t = 0.
//!
//! # Seeding
//!
//! Trajectory `i` of an ensemble uses a [`ChaCha8Rng`] seeded through
//! `SeedableRng::seed_from_u64(trajectory_seed(master_seed, i))`, where
//! [`trajectory_seed`] is the SplitMix64 finalizer applied to
//! `master_seed + (i + 1)·0x9E3779B97F4A7C15`. Streams are therefore
//! reproducible bit for bit and independent of how trajectories are
//! scheduled across threads.
//!
//! # Stream files
//!
//! ```text
//! # duration=<value>
//! <timestamp>\t<branch>
//! ```
//!
//! with `branch` one of `-` or `+`. Further `#` lines and blank lines are
//! ignored on input.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::correlations::CorrelationSeries;
use crate::error::{Error, Result};
use crate::model::{Branch, BranchRates, Scenario, SystemParams};

/// Which photons an operation looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchFilter {
    Minus,
    Plus,
    #[default]
    Both,
}

impl BranchFilter {
    pub fn accepts(self, branch: Branch) -> bool {
        match self {
            BranchFilter::Both => true,
            BranchFilter::Minus => branch == Branch::Minus,
            BranchFilter::Plus => branch == Branch::Plus,
        }
    }

    pub fn branch(self) -> Option<Branch> {
        match self {
            BranchFilter::Minus => Some(Branch::Minus),
            BranchFilter::Plus => Some(Branch::Plus),
            BranchFilter::Both => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BranchFilter::Minus => "minus",
            BranchFilter::Plus => "plus",
            BranchFilter::Both => "both",
        }
    }
}

impl From<Branch> for BranchFilter {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Minus => BranchFilter::Minus,
            Branch::Plus => BranchFilter::Plus,
        }
    }
}

impl std::str::FromStr for BranchFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "minus" | "-" => Ok(BranchFilter::Minus),
            "plus" | "+" => Ok(BranchFilter::Plus),
            "both" => Ok(BranchFilter::Both),
            other => Err(Error::invalid(
                "branch",
                format!("expected `minus`, `plus` or `both`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub duration: f64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Photons of other branches are not recorded.
    pub branch_filter: BranchFilter,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::invalid(
                "duration",
                format!("must be finite and > 0, got {}", self.duration),
            ));
        }
        if self.n_trajectories == 0 {
            return Err(Error::invalid("n_trajectories", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    pub time: f64,
    pub branch: Branch,
}

/// Time-ordered photons of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    pub duration: f64,
    pub photons: Vec<Photon>,
}

impl PhotonStream {
    pub fn new(duration: f64) -> Self {
        PhotonStream {
            duration,
            photons: Vec::new(),
        }
    }

    pub fn times(&self, filter: BranchFilter) -> impl Iterator<Item = f64> + '_ {
        self.photons
            .iter()
            .filter(move |p| filter.accepts(p.branch))
            .map(|p| p.time)
    }

    pub fn count(&self, filter: BranchFilter) -> usize {
        self.photons
            .iter()
            .filter(|p| filter.accepts(p.branch))
            .count()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# duration={}", self.duration)?;
        for p in &self.photons {
            writeln!(w, "{}\t{}", p.time, p.branch.symbol())?;
        }
        w.flush()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<PhotonStream> {
        let mut duration = None;
        let mut photons = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line_no = i + 1;
            let bad = |reason: String| Error::StreamFormat {
                line: line_no,
                reason,
            };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("duration=") {
                    let d: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad duration `{v}`")))?;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(bad(format!("duration must be > 0, got {d}")));
                    }
                    duration = Some(d);
                }
                continue;
            }
            let d = duration.ok_or_else(|| bad("missing `# duration=` header".into()))?;
            let mut fields = line.split('\t');
            let (Some(t), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected `timestamp<TAB>branch`".into()));
            };
            let time: f64 = t
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad timestamp `{t}`")))?;
            let branch = match b.trim() {
                "-" | "minus" => Branch::Minus,
                "+" | "plus" => Branch::Plus,
                other => return Err(bad(format!("bad branch `{other}`"))),
            };
            if !(0.0..=d).contains(&time) {
                return Err(bad(format!("timestamp {time} outside [0, {d}]")));
            }
            if photons.last().is_some_and(|p: &Photon| p.time >= time) {
                return Err(bad("timestamps must be strictly increasing".into()));
            }
            photons.push(Photon { time, branch });
        }
        let duration = duration.ok_or(Error::StreamFormat {
            line: 0,
            reason: "missing `# duration=` header".into(),
        })?;
        Ok(PhotonStream { duration, photons })
    }
}

/// Per-trajectory RNG seed, see the module docs.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Index of each state in occupancy arrays.
pub const STATE_NAMES: [&str; 4] = ["G", "U", "-", "+"];

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub stream: PhotonStream,
    /// Time spent in G, U, −, + (sums to the duration).
    pub occupancy: [f64; 4],
}

fn check_chain(rates: &BranchRates, pump_r: f64) -> Result<()> {
    let all = [
        ("pump_r", pump_r),
        ("gfeed_minus", rates.minus.gfeed),
        ("gfeed_plus", rates.plus.gfeed),
        ("gpar_minus", rates.minus.gpar),
        ("gpar_plus", rates.plus.gpar),
        ("grad_minus", rates.minus.grad),
        ("grad_plus", rates.plus.grad),
    ];
    for (name, v) in all {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(
                name,
                format!("must be finite and >= 0, got {v}"),
            ));
        }
    }
    if pump_r > 0.0 {
        if rates.feed_total() <= 0.0 {
            return Err(Error::Configuration(
                "state U is reachable but has zero exit rate (gamma_u = 0)".into(),
            ));
        }
        for b in Branch::ALL {
            let r = rates.get(b);
            if r.gfeed > 0.0 && r.gpar <= 0.0 {
                return Err(Error::Configuration(format!(
                    "state {} is reachable but has zero exit rate",
                    b.symbol()
                )));
            }
        }
    }
    Ok(())
}

/// Simulates trajectory `index` of an ensemble.
pub fn simulate_trajectory(
    rates: &BranchRates,
    pump_r: f64,
    config: &TrajectoryConfig,
    index: u64,
) -> Result<Trajectory> {
    config.validate()?;
    check_chain(rates, pump_r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trajectory_seed(config.master_seed, index));

    let gamma = rates.feed_total();
    let p_minus = if gamma > 0.0 {
        rates.minus.gfeed / gamma
    } else {
        0.0
    };
    let exit = [pump_r, gamma, rates.minus.gpar, rates.plus.gpar];
    let yields = [rates.minus.quantum_yield(), rates.plus.quantum_yield()];
    let record = [
        config.branch_filter.accepts(Branch::Minus),
        config.branch_filter.accepts(Branch::Plus),
    ];

    let duration = config.duration;
    let mut occupancy = [0.0; 4];
    let mut photons = Vec::new();
    let mut state = 0usize;
    let mut t = 0.0;
    loop {
        let rate = exit[state];
        if rate <= 0.0 {
            // only G can be absorbing, see check_chain
            occupancy[state] += duration - t;
            break;
        }
        let dt = rng.sample::<f64, _>(Exp1) / rate;
        if t + dt >= duration {
            occupancy[state] += duration - t;
            break;
        }
        occupancy[state] += dt;
        t += dt;
        state = match state {
            0 => 1,
            1 => {
                if p_minus >= 1.0 || (p_minus > 0.0 && rng.gen::<f64>() < p_minus) {
                    2
                } else {
                    3
                }
            }
            s => {
                let b = s - 2;
                let eta = yields[b];
                let emitted = eta >= 1.0 || (eta > 0.0 && rng.gen::<f64>() < eta);
                if emitted && record[b] {
                    let branch = if b == 0 { Branch::Minus } else { Branch::Plus };
                    photons.push(Photon { time: t, branch });
                }
                0
            }
        };
    }
    Ok(Trajectory {
        stream: PhotonStream { duration, photons },
        occupancy,
    })
}

/// All trajectories of an ensemble, in index order.
pub fn simulate_ensemble(
    params: &SystemParams,
    rates: &BranchRates,
    config: &TrajectoryConfig,
) -> Result<Vec<Trajectory>> {
    if params.scenario != Scenario::NonResonant {
        return Err(Error::Configuration(
            "the jump simulation covers the incoherently pumped scenario only".into(),
        ));
    }
    config.validate()?;
    (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| simulate_trajectory(rates, params.pump_r, config, i))
        .collect()
}

pub fn simulate_stream(
    params: &SystemParams,
    rates: &BranchRates,
    config: &TrajectoryConfig,
) -> Result<Vec<PhotonStream>> {
    Ok(simulate_ensemble(params, rates, config)?
        .into_iter()
        .map(|t| t.stream)
        .collect())
}

/// Coincidence histogram over all ordered photon pairs, accumulated
/// stream by stream.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Histogram {
    edges: Vec<f64>,
    filter: BranchFilter,
    uniform: Option<(f64, f64)>,
    pairs: Vec<u64>,
    photons: u64,
    duration: f64,
    /// `∫_bin max(0, T − τ) dτ` summed over streams.
    exposure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Estimate {
    pub edges: Vec<f64>,
    /// Bin centres, normalized coincidence density and branch tag.
    pub series: CorrelationSeries<f64>,
    /// Poisson counting error of each bin, from `max(pairs, 1)`.
    pub std_error: Vec<f64>,
    pub pairs: Vec<u64>,
    pub photons: u64,
    /// Mean photon rate used in the normalization.
    pub rate: f64,
}

impl G2Histogram {
    pub fn new(edges: Vec<f64>, filter: BranchFilter) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::invalid("tau_bins", "need at least two bin edges"));
        }
        if edges[0] < 0.0 || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("tau_bins", "edges must be finite and >= 0"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "tau_bins",
                "edges must be strictly increasing",
            ));
        }
        let w = edges[1] - edges[0];
        let uniform = edges
            .iter()
            .enumerate()
            .all(|(k, e)| (e - (edges[0] + k as f64 * w)).abs() <= 1e-9 * w)
            .then_some((edges[0], w));
        let bins = edges.len() - 1;
        Ok(G2Histogram {
            edges,
            filter,
            uniform,
            pairs: vec![0; bins],
            photons: 0,
            duration: 0.0,
            exposure: vec![0.0; bins],
        })
    }

    /// `n` uniform bins of width `width` starting at zero delay.
    pub fn uniform(width: f64, n: usize, filter: BranchFilter) -> Result<Self> {
        G2Histogram::new((0..=n).map(|k| k as f64 * width).collect(), filter)
    }

    fn bin(&self, tau: f64) -> Option<usize> {
        let bins = self.pairs.len();
        match self.uniform {
            Some((start, w)) => {
                if tau < start {
                    return None;
                }
                let k = ((tau - start) / w) as usize;
                // guard rounding at the upper edges
                if k < bins && tau < self.edges[k + 1] {
                    Some(k)
                } else if k + 1 < bins && tau >= self.edges[k + 1] {
                    Some(k + 1)
                } else if k > 0 && k <= bins && tau < self.edges[k] {
                    Some(k - 1)
                } else {
                    None
                }
            }
            None => {
                let k = self.edges.partition_point(|&e| e <= tau);
                (k >= 1 && k <= bins).then(|| k - 1)
            }
        }
    }

    pub fn accumulate(&mut self, stream: &PhotonStream) {
        let times: Vec<f64> = stream.times(self.filter).collect();
        let max_lag = self.edges[self.edges.len() - 1];
        for (i, &t0) in times.iter().enumerate() {
            for &t1 in &times[i + 1..] {
                let tau = t1 - t0;
                if tau >= max_lag {
                    break;
                }
                if let Some(k) = self.bin(tau) {
                    self.pairs[k] += 1;
                }
            }
        }
        let big_t = stream.duration;
        for (k, e) in self.exposure.iter_mut().enumerate() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            *e += if b <= big_t {
                (b - a) * (big_t - 0.5 * (a + b))
            } else if a < big_t {
                0.5 * (big_t - a) * (big_t - a)
            } else {
                0.0
            };
        }
        self.photons += times.len() as u64;
        self.duration += big_t;
    }

    pub fn merge(&mut self, other: &G2Histogram) -> Result<()> {
        if self.edges != other.edges || self.filter != other.filter {
            return Err(Error::invalid(
                "tau_bins",
                "cannot merge histograms with different bins",
            ));
        }
        self.pairs
            .iter_mut()
            .zip(&other.pairs)
            .for_each(|(a, b)| *a += b);
        self.exposure
            .iter_mut()
            .zip(&other.exposure)
            .for_each(|(a, b)| *a += b);
        self.photons += other.photons;
        self.duration += other.duration;
        Ok(())
    }

    /// Normalizes pair counts by `rate² · ∫_bin (T − τ) dτ`, the count an
    /// uncorrelated stream of the same rate would produce.
    pub fn finish(&self) -> Result<G2Estimate> {
        if self.photons == 0 {
            return Err(Error::InsufficientData(
                "no photons of the selected branch".into(),
            ));
        }
        if self.photons < 10_000 {
            log::warn!("g2 histogram from only {} photons", self.photons);
        }
        let rate = self.photons as f64 / self.duration;
        let norm: Vec<f64> = self.exposure.iter().map(|e| rate * rate * e).collect();
        let values = self
            .pairs
            .iter()
            .zip(&norm)
            .map(|(&n, &d)| if d > 0.0 { n as f64 / d } else { f64::NAN })
            .collect();
        let std_error = self
            .pairs
            .iter()
            .zip(&norm)
            .map(|(&n, &d)| (n.max(1) as f64).sqrt() / d)
            .collect();
        let centres = self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(G2Estimate {
            edges: self.edges.clone(),
            series: CorrelationSeries {
                tau: centres,
                values,
                branch: self.filter.branch(),
                normalized: true,
            },
            std_error,
            pairs: self.pairs.clone(),
            photons: self.photons,
            rate,
        })
    }
}

/// Normalized g² estimate from a set of streams.
pub fn g2_histogram(
    streams: &[PhotonStream],
    filter: BranchFilter,
    tau_bins: &[f64],
) -> Result<G2Estimate> {
    let mut h = G2Histogram::new(tau_bins.to_vec(), filter)?;
    streams.iter().for_each(|s| h.accumulate(s));
    h.finish()
}

/// Photon-count moments over disjoint windows, accumulated stream by stream.
#[derive(Debug, Clone, PartialEq)]
pub struct FanoAccumulator {
    window: f64,
    windows: u64,
    /// Σn, Σn², Σn³, Σn⁴ over windows.
    sums: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoEstimate {
    /// Variance over mean of the window counts.
    pub value: f64,
    /// Delta-method standard error from the sample moments.
    pub std_error: f64,
    pub windows: u64,
    pub mean_count: f64,
}

pub const MIN_FANO_WINDOWS: u64 = 100;

impl FanoAccumulator {
    pub fn new(window: f64) -> Result<Self> {
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::invalid(
                "window",
                format!("must be finite and > 0, got {window}"),
            ));
        }
        Ok(FanoAccumulator {
            window,
            windows: 0,
            sums: [0.0; 4],
        })
    }

    /// Counts every photon in the stream regardless of branch.
    pub fn accumulate(&mut self, stream: &PhotonStream) {
        let n_windows = (stream.duration / self.window).floor() as u64;
        let mut add = |n: u64| {
            let n = n as f64;
            self.sums[0] += n;
            self.sums[1] += n * n;
            self.sums[2] += n * n * n;
            self.sums[3] += n * n * n * n;
        };
        let mut current: Option<(u64, u64)> = None;
        for p in &stream.photons {
            let idx = (p.time / self.window) as u64;
            if idx >= n_windows {
                break;
            }
            match current {
                Some((w, n)) if w == idx => current = Some((w, n + 1)),
                Some((_, n)) => {
                    add(n);
                    current = Some((idx, 1));
                }
                None => current = Some((idx, 1)),
            }
        }
        if let Some((_, n)) = current {
            add(n);
        }
        self.windows += n_windows;
    }

    pub fn merge(&mut self, other: &FanoAccumulator) -> Result<()> {
        if self.window != other.window {
            return Err(Error::invalid(
                "window",
                "cannot merge different window lengths",
            ));
        }
        self.windows += other.windows;
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<FanoEstimate> {
        if self.windows < MIN_FANO_WINDOWS {
            return Err(Error::InsufficientData(format!(
                "{} counting windows, need at least {MIN_FANO_WINDOWS}",
                self.windows
            )));
        }
        let n = self.windows as f64;
        let [a1, a2, a3, a4] = self.sums.map(|s| s / n);
        if a1 <= 0.0 {
            return Err(Error::InsufficientData("no photons in any window".into()));
        }
        let m = a1;
        let mu2 = a2 - m * m;
        let mu3 = a3 - 3.0 * m * a2 + 2.0 * m.powi(3);
        let mu4 = a4 - 4.0 * m * a3 + 6.0 * m * m * a2 - 3.0 * m.powi(4);
        let var = mu2 * n / (n - 1.0);
        let value = var / m;

        let var_mean = mu2 / n;
        let var_var = (mu4 - mu2 * mu2) / n;
        let cov = mu3 / n;
        let var_f =
            var_var / (m * m) + var * var * var_mean / m.powi(4) - 2.0 * var * cov / m.powi(3);
        Ok(FanoEstimate {
            value,
            std_error: var_f.max(0.0).sqrt(),
            windows: self.windows,
            mean_count: m,
        })
    }
}

pub fn fano_factor(streams: &[PhotonStream], window: f64) -> Result<FanoEstimate> {
    let mut acc = FanoAccumulator::new(window)?;
    streams.iter().for_each(|s| acc.accumulate(s));
    acc.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    /// `√count / duration`.
    pub std_error: f64,
    pub count: u64,
    pub duration: f64,
}

/// Photons per unit time. A stream with no photons but positive duration
/// gives a zero rate.
pub fn emission_rate(streams: &[PhotonStream], filter: BranchFilter) -> Result<RateEstimate> {
    let duration: f64 = streams.iter().map(|s| s.duration).sum();
    if streams.is_empty() || !(duration > 0.0) {
        return Err(Error::InsufficientData("no observation time".into()));
    }
    let count: u64 = streams.iter().map(|s| s.count(filter) as u64).sum();
    Ok(RateEstimate {
        rate: count as f64 / duration,
        std_error: (count as f64).sqrt() / duration,
        count,
        duration,
    })
}
