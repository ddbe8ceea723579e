//! Stochastic oracle: round-by-round trajectory sampling of the
//! distillation protocol and direct sampling of scheme outcome
//! distributions.
//!
//! The trajectory sampler shares no code with the yield recursion. It
//! unravels the stellar state into its vacuum / photon-at-one-telescope
//! components (the weak Kraus operators are diagonal, so the protocol
//! dynamics do not depend on the coherences), simulates per-telescope
//! clicks, and counts which pair the protocol collapses onto. Counts are
//! accumulated as integers and merged associatively, so results are bitwise
//! identical for any thread count.

use rayon::prelude::*;

use crate::distill::{TauSchedule, Variant};
use crate::error::{Error, Result};
use crate::pairs::{pair_count, pair_label, pair_list};
use crate::povm::{MeasurementSettings, OutcomeDistribution, Scheme};
use crate::rng::Stream;
use crate::state::CoherenceSet;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorResult {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl EstimatorResult {
    /// Estimator of `p·scale` from `k` successes in `n` Bernoulli trials.
    fn from_counts(k: u64, n: u64, scale: f64, seed: u64) -> Self {
        let p = if n > 0 { k as f64 / n as f64 } else { 0.0 };
        let se = if n > 0 { (p * (1.0 - p) / n as f64).sqrt() } else { f64::NAN };
        Self { mean: p * scale, std_error: se * scale, n, seed }
    }

    /// |estimate − reference| in units of the standard error.
    pub fn sigma_distance(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error.max(1e-300)
    }
}

/// How a single protocol run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    /// The state collapsed onto the pair `(i, j)` at `round` (1-based).
    Collapsed { pair: (usize, usize), round: usize },
    /// Too many telescopes clicked (or the final hard round revealed the
    /// photon outside the assigned pair).
    Failure { round: usize },
    /// All rounds elapsed with more than two telescopes still active.
    Survived,
}

/// Full record of one sampled trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// Per-round click vectors (true = the collapse outcome fired).
    pub outcomes: Vec<Vec<bool>>,
    pub terminal: Terminal,
    /// Which component of the state this trajectory sampled: `None` for
    /// vacuum, `Some(i)` for the photon at telescope `i`.
    pub photon_site: Option<usize>,
}

fn draw_component(m: usize, epsilon: f64, stream: &mut Stream) -> Option<usize> {
    let u = stream.next_f64();
    if u < 1.0 - epsilon {
        None
    } else {
        // photon site uniform over telescopes
        Some((((u - (1.0 - epsilon)) / epsilon * m as f64) as usize).min(m - 1))
    }
}

fn run_trajectory(
    m: usize,
    schedule: &TauSchedule,
    photon_site: Option<usize>,
    stream: &mut Stream,
    record: bool,
) -> TrajectoryRecord {
    let mut active: u64 = (1 << m) - 1;
    let mut outcomes = Vec::new();
    let mut terminal = Terminal::Survived;
    let mut done = false;
    for (r, &tau) in schedule.taus().iter().enumerate() {
        let mut clicks = vec![false; m];
        for tel in 0..m {
            if active & (1 << tel) == 0 {
                continue;
            }
            // An occupied mode never fires the collapse outcome; an active
            // vacuum mode fires with probability tau.
            if photon_site != Some(tel) && stream.next_f64() < tau {
                clicks[tel] = true;
                active &= !(1 << tel);
            }
        }
        if record {
            outcomes.push(clicks);
        }
        let count = active.count_ones();
        if count == 2 {
            let i = active.trailing_zeros() as usize;
            let j = (63 - active.leading_zeros()) as usize;
            terminal = Terminal::Collapsed { pair: (i, j), round: r + 1 };
            done = true;
            break;
        }
        if count < 2 {
            terminal = Terminal::Failure { round: r + 1 };
            done = true;
            break;
        }
    }
    if !done && schedule.variant() == Variant::HardFinal {
        let round = schedule.rounds();
        // The fallback round fires only on a clean record: any prior click
        // without a collapse leaves a partially revealed state we abort on.
        if active.count_ones() as usize == m {
            let pick = stream.next_index(pair_count(m));
            let (i, j) = pair_list(m)[pick];
            let photon_outside =
                photon_site.map(|p| p != i && p != j).unwrap_or(false);
            terminal = if photon_outside {
                Terminal::Failure { round }
            } else {
                Terminal::Collapsed { pair: (i, j), round }
            };
        } else {
            terminal = Terminal::Failure { round };
        }
    }
    TrajectoryRecord { outcomes, terminal, photon_site }
}

/// Sample one full trajectory with its per-round click record.
pub fn sample_trajectory(
    m: usize,
    epsilon: f64,
    schedule: &TauSchedule,
    seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonRange(epsilon));
    }
    let mut stream = Stream::from_parts(seed, index);
    let photon_site = draw_component(m, epsilon, &mut stream);
    Ok(run_trajectory(m, schedule, photon_site, &mut stream, true))
}

/// Empirical distillation estimates.
#[derive(Clone, Debug)]
pub struct DistillationEstimate {
    /// Collapse frequency per pair, conditioned on the photon component.
    pub per_pair_photon: Vec<(String, EstimatorResult)>,
    /// Collapse frequency per pair, conditioned on the vacuum component.
    pub per_pair_vacuum: Vec<(String, EstimatorResult)>,
    /// Probability that the vacuum component collapses onto any pair
    /// (`C(m,2) · β_D`).
    pub vacuum_coincidence: EstimatorResult,
    /// Estimate of `γ_D`: photon-component collapses onto a pair containing
    /// the photon, divided by `m − 1`.
    pub gamma_hat: EstimatorResult,
    /// Estimate of `β_D`: vacuum-component collapses divided by `C(m,2)`.
    pub beta_hat: EstimatorResult,
    pub n_photon: u64,
    pub n_vacuum: u64,
}

#[derive(Clone)]
struct Counts {
    n_photon: u64,
    n_vacuum: u64,
    photon_pair: Vec<u64>,
    vacuum_pair: Vec<u64>,
    photon_own_pair: u64,
}

impl Counts {
    fn zero(pairs: usize) -> Self {
        Self {
            n_photon: 0,
            n_vacuum: 0,
            photon_pair: vec![0; pairs],
            vacuum_pair: vec![0; pairs],
            photon_own_pair: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.n_photon += other.n_photon;
        self.n_vacuum += other.n_vacuum;
        self.photon_own_pair += other.photon_own_pair;
        for (a, b) in self.photon_pair.iter_mut().zip(&other.photon_pair) {
            *a += b;
        }
        for (a, b) in self.vacuum_pair.iter_mut().zip(&other.vacuum_pair) {
            *a += b;
        }
        self
    }
}

/// Simulate the full protocol `n` times and estimate the yields.
///
/// The coherences `g` do not influence the collapse dynamics (the weak
/// Kraus operators are diagonal); the argument is validated for interface
/// completeness. Bitwise reproducible for a fixed seed under any thread
/// count.
pub fn simulate_distillation(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    schedule: &TauSchedule,
    n: u64,
    seed: u64,
) -> Result<DistillationEstimate> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonRange(epsilon));
    }
    if g.m() != m {
        return Err(Error::PairArity { m, expected: pair_count(m), got: pair_count(g.m()) });
    }
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let n_pairs = pair_count(m);
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || Counts::zero(n_pairs),
            |mut acc, idx| {
                let mut stream = Stream::from_parts(seed, idx);
                let photon_site = draw_component(m, epsilon, &mut stream);
                let record = run_trajectory(m, schedule, photon_site, &mut stream, false);
                match photon_site {
                    Some(site) => {
                        acc.n_photon += 1;
                        if let Terminal::Collapsed { pair: (i, j), .. } = record.terminal {
                            acc.photon_pair[crate::pairs::pair_index(m, i, j)] += 1;
                            if site == i || site == j {
                                acc.photon_own_pair += 1;
                            }
                        }
                    }
                    None => {
                        acc.n_vacuum += 1;
                        if let Terminal::Collapsed { pair: (i, j), .. } = record.terminal {
                            acc.vacuum_pair[crate::pairs::pair_index(m, i, j)] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| Counts::zero(n_pairs), Counts::merge);

    let vacuum_total: u64 = counts.vacuum_pair.iter().sum();
    let labels: Vec<String> =
        pair_list(m).into_iter().map(|(i, j)| pair_label(i, j)).collect();
    let per_pair_photon = labels
        .iter()
        .zip(&counts.photon_pair)
        .map(|(l, &k)| (l.clone(), EstimatorResult::from_counts(k, counts.n_photon, 1.0, seed)))
        .collect();
    let per_pair_vacuum = labels
        .iter()
        .zip(&counts.vacuum_pair)
        .map(|(l, &k)| (l.clone(), EstimatorResult::from_counts(k, counts.n_vacuum, 1.0, seed)))
        .collect();
    Ok(DistillationEstimate {
        per_pair_photon,
        per_pair_vacuum,
        vacuum_coincidence: EstimatorResult::from_counts(
            vacuum_total,
            counts.n_vacuum,
            1.0,
            seed,
        ),
        gamma_hat: EstimatorResult::from_counts(
            counts.photon_own_pair,
            counts.n_photon,
            1.0 / (m as f64 - 1.0),
            seed,
        ),
        beta_hat: EstimatorResult::from_counts(
            vacuum_total,
            counts.n_vacuum,
            1.0 / n_pairs as f64,
            seed,
        ),
        n_photon: counts.n_photon,
        n_vacuum: counts.n_vacuum,
    })
}

/// Sample a scheme's outcome distribution `n` times by inverse-CDF draws
/// and report per-label empirical frequencies.
pub fn simulate_scheme(
    settings: &MeasurementSettings,
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    yields: Option<&crate::distill::DistillationYield>,
    n: u64,
    seed: u64,
) -> Result<Vec<(String, EstimatorResult)>> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let dist = scheme_distribution(settings, m, epsilon, g, yields)?;
    let labels: Vec<&String> = dist.entries().iter().map(|(l, _)| l).collect();
    let mut cdf = Vec::with_capacity(labels.len());
    let mut acc = 0.0;
    for (_, p) in dist.entries() {
        acc += p;
        cdf.push(acc);
    }
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; labels.len()],
            |mut acc, idx| {
                let mut stream = Stream::from_parts(seed, idx);
                let u = stream.next_f64();
                let slot = cdf.partition_point(|&c| c <= u).min(labels.len() - 1);
                acc[slot] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; labels.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    Ok(labels
        .into_iter()
        .zip(counts)
        .map(|(l, k)| (l.clone(), EstimatorResult::from_counts(k, n, 1.0, seed)))
        .collect())
}

/// The analytic outcome distribution a scheme induces, POVM-based or
/// direct.
pub fn scheme_distribution(
    settings: &MeasurementSettings,
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    yields: Option<&crate::distill::DistillationYield>,
) -> Result<OutcomeDistribution> {
    match settings.scheme {
        Scheme::WState => crate::fisher::wstate_distribution(m, epsilon, g, &settings.phases),
        Scheme::MultipartiteFrame => {
            crate::fisher::multipartite_frame_distribution(m, epsilon, g, &settings.phases)
        }
        _ => {
            let povm = crate::povm::build_povm(settings, m, yields)?;
            let state = crate::state::build_stellar_state(m, epsilon, g)?;
            crate::povm::born_distribution(&povm, &state)
        }
    }
}
