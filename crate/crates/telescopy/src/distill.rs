//! Distillation schedules, yields, and schedule optimization.
//!
//! A schedule is a list of weak-measurement strengths `τ_r`. The survival
//! product `x_r = Π_{j≤r}(1 - τ_j)` drives everything else:
//!
//! - `γ_{D,r} = x_r [(1 - x_r)^{M-2} - (1 - x_{r-1})^{M-2}]` is the weight
//!   with which the single-photon component collapses onto a designated pair
//!   at round `r`;
//! - `β_{D,r} = γ_{D,r} x_r` is the corresponding vacuum weight;
//! - `γ_D` and `β_D` are their sums over rounds.
//!
//! The `HardFinal` variant replaces the last round by a uniform random pair
//! assignment after `D - 1` weak rounds, adding `x_{D-1}^{M-1} / C(M,2)` to
//! `γ_D` (and `x_{D-1}^M / C(M,2)` to `β_D`); at `M = 3` this reduces to the
//! `ω_{D-1} + x_{D-1}^2 / 3` bookkeeping with optimum `γ_D = (D+1)/(2(D+2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairs::pair_count;
use crate::rng::Stream;

/// Default factor by which the vacuum term must dominate for the local-scheme
/// leading-order Fisher expressions to apply: `β_D (1-ε) ≥ factor · ε γ_D / M`.
pub const REGIME_FACTOR: f64 = 10.0;

const TAU_MIN: f64 = 1e-6;
const TAU_MAX: f64 = 1.0 - 1e-6;

/// Protocol variant for the final round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Every round is a weak measurement of strength `τ_r`.
    PureWeak,
    /// `D - 1` weak rounds followed by a uniform random-pair assignment.
    HardFinal,
}

/// A measurement-strength schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSchedule {
    taus: Vec<f64>,
    variant: Variant,
}

impl TauSchedule {
    /// `taus` are the weak-round strengths; for `HardFinal` they cover the
    /// `D - 1` weak rounds and may be empty (a single hard round).
    pub fn new(taus: Vec<f64>, variant: Variant) -> Result<Self> {
        if variant == Variant::PureWeak && taus.is_empty() {
            return Err(Error::EmptySchedule);
        }
        for &tau in &taus {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::TauRange { tau, range: "(0, 1)" });
            }
        }
        Ok(Self { taus, variant })
    }

    pub fn pure_weak(taus: Vec<f64>) -> Result<Self> {
        Self::new(taus, Variant::PureWeak)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Weak-round strengths.
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Total round count `D` (the hard final round counts as one).
    pub fn rounds(&self) -> usize {
        match self.variant {
            Variant::PureWeak => self.taus.len(),
            Variant::HardFinal => self.taus.len() + 1,
        }
    }

    /// Survival products `x_r` after each weak round.
    pub fn survival_products(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.taus.len());
        let mut acc = 1.0;
        for &tau in &self.taus {
            acc *= 1.0 - tau;
            x.push(acc);
        }
        x
    }
}

/// Yield quantities derived from a schedule for `m` telescopes.
#[derive(Clone, Debug)]
pub struct DistillationYield {
    /// Survival products `x_r`, weak rounds only.
    pub x: Vec<f64>,
    /// Per-round pair-collapse weights `γ_{D,r}` (plus the hard-final
    /// fallback as a last entry for `HardFinal`).
    pub gamma_terms: Vec<f64>,
    /// Per-round vacuum weights `β_{D,r}`.
    pub beta_terms: Vec<f64>,
    /// Running weak-round sums `ω_d` (three-telescope bookkeeping).
    pub omega: Vec<f64>,
    pub gamma_d: f64,
    pub beta_d: f64,
}

/// Compute survival products and yields for `m` telescopes.
///
/// For `m = 2` the photon is already localized at the only pair, so
/// `γ = β = 1` with no rounds required.
pub fn yields(m: usize, schedule: &TauSchedule) -> Result<DistillationYield> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    if m == 2 {
        // The photon is already localized at the only pair; the vacuum
        // component just survives whatever weak rounds are still applied.
        let x = schedule.survival_products();
        let survival = *x.last().unwrap_or(&1.0);
        return Ok(DistillationYield {
            x,
            gamma_terms: vec![1.0],
            beta_terms: vec![survival],
            omega: vec![0.0],
            gamma_d: 1.0,
            beta_d: survival,
        });
    }
    if schedule.variant() == Variant::PureWeak && schedule.taus().is_empty() {
        return Err(Error::EmptySchedule);
    }
    let x = schedule.survival_products();
    let exponent = (m - 2) as i32;
    let mut gamma_terms = Vec::with_capacity(x.len() + 1);
    let mut beta_terms = Vec::with_capacity(x.len() + 1);
    let mut omega = Vec::with_capacity(x.len());
    let mut prev = 1.0f64; // x_0
    let mut omega_acc = 0.0;
    for &xr in &x {
        let term = xr * ((1.0 - xr).powi(exponent) - (1.0 - prev).powi(exponent));
        gamma_terms.push(term);
        beta_terms.push(term * xr);
        omega_acc += xr * prev * (1.0 - xr / prev);
        omega.push(omega_acc);
        prev = xr;
    }
    if schedule.variant() == Variant::HardFinal {
        let survivors = *x.last().unwrap_or(&1.0);
        let pairs = pair_count(m) as f64;
        gamma_terms.push(survivors.powi((m - 1) as i32) / pairs);
        beta_terms.push(survivors.powi(m as i32) / pairs);
    }
    let gamma_d = gamma_terms.iter().sum();
    let beta_d = beta_terms.iter().sum();
    Ok(DistillationYield { x, gamma_terms, beta_terms, omega, gamma_d, beta_d })
}

/// The schedule `τ_r = 1/(2 + D - r)`, which for three telescopes gives
/// `γ_D = D / (2(1 + D))` exactly.
pub fn ansatz_schedule(d: usize) -> Result<TauSchedule> {
    if d == 0 {
        return Err(Error::EmptySchedule);
    }
    let taus = (1..=d).map(|r| 1.0 / (2 + d - r) as f64).collect();
    TauSchedule::pure_weak(taus)
}

/// Closed-form optimal yield for three telescopes after `d` rounds.
///
/// `PureWeak` gives `D / (2(1 + D))`; `HardFinal` gives `(D+1) / (2(D+2))`.
/// Both approach 1/2 as `D → ∞`. Requires `d ≥ 1`.
pub fn closed_form_m3(d: usize, variant: Variant) -> f64 {
    assert!(d >= 1, "closed form needs at least one round");
    let d = d as f64;
    match variant {
        Variant::PureWeak => d / (2.0 * (1.0 + d)),
        Variant::HardFinal => (d + 1.0) / (2.0 * (d + 2.0)),
    }
}

/// Outcome of a schedule optimization.
#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub schedule: TauSchedule,
    pub objective: f64,
    pub evaluations: u64,
    /// Stream indices of the multistart points, in merge order.
    pub start_seeds: Vec<u64>,
    pub converged: bool,
}

struct CoordinateAscent<'a> {
    objective: &'a dyn Fn(&[f64]) -> f64,
    budget: u64,
    evaluations: u64,
}

impl<'a> CoordinateAscent<'a> {
    fn eval(&mut self, taus: &[f64]) -> f64 {
        self.evaluations += 1;
        (self.objective)(taus)
    }

    /// Golden-section maximization of one coordinate on (TAU_MIN, TAU_MAX).
    fn line_search(&mut self, taus: &mut [f64], idx: usize) -> f64 {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (TAU_MIN, TAU_MAX);
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        taus[idx] = x1;
        let mut f1 = self.eval(taus);
        taus[idx] = x2;
        let mut f2 = self.eval(taus);
        while b - a > 1e-14 && self.evaluations < self.budget {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                taus[idx] = x1;
                f1 = self.eval(taus);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                taus[idx] = x2;
                f2 = self.eval(taus);
            }
        }
        let (best_x, best_f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        taus[idx] = best_x;
        best_f
    }

    /// Full sweeps over all coordinates until the objective stalls.
    fn run(&mut self, taus: &mut Vec<f64>) -> (f64, bool) {
        if taus.is_empty() {
            return (self.eval(taus), true);
        }
        let mut best = self.eval(taus);
        loop {
            let before = best;
            for idx in 0..taus.len() {
                best = self.line_search(taus, idx);
            }
            if self.evaluations >= self.budget {
                return (best, false);
            }
            if best - before < 1e-12 {
                return (best, true);
            }
        }
    }
}

const MULTISTART: usize = 8;

fn multistart_maximize(
    dim: usize,
    objective: &dyn Fn(&[f64]) -> f64,
    initial: Vec<f64>,
    budget: u64,
    seed: u64,
) -> (Vec<f64>, f64, u64, Vec<u64>, bool) {
    let mut ascent = CoordinateAscent { objective, budget, evaluations: 0 };
    let mut results: Vec<(f64, u64, Vec<f64>, bool)> = Vec::new();
    let mut start_seeds = Vec::new();
    for start in 0..MULTISTART as u64 {
        start_seeds.push(start);
        let mut taus = if start == 0 {
            initial.clone()
        } else {
            let mut stream = Stream::from_parts(seed, start);
            (0..dim).map(|_| stream.next_range(0.05, 0.95)).collect()
        };
        let (obj, converged) = ascent.run(&mut taus);
        results.push((obj, start, taus, converged));
        if ascent.evaluations >= ascent.budget {
            break;
        }
    }
    // Deterministic merge: objective first, start index breaks ties.
    results.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let best = results.swap_remove(0);
    (best.2, best.0, ascent.evaluations, start_seeds, best.3)
}

/// Maximize `γ_D` over the schedule for `m` telescopes and `d` rounds.
///
/// Deterministic given the seed. The optimal value never exceeds
/// `1/(m-1)` and approaches it as `d` grows.
pub fn optimize_gamma(
    m: usize,
    d: usize,
    variant: Variant,
    budget: u64,
    seed: u64,
) -> Result<OptimizationReport> {
    if m < 3 {
        return Err(Error::TooFewTelescopes(m));
    }
    if d == 0 {
        return Err(Error::EmptySchedule);
    }
    let dim = match variant {
        Variant::PureWeak => d,
        Variant::HardFinal => d - 1,
    };
    let objective = move |taus: &[f64]| -> f64 {
        let schedule = TauSchedule { taus: taus.to_vec(), variant };
        yields(m, &schedule).map(|y| y.gamma_d).unwrap_or(f64::NEG_INFINITY)
    };
    let initial: Vec<f64> = (1..=dim).map(|r| 1.0 / (2 + dim - r) as f64).collect();
    let (taus, objective_value, evaluations, start_seeds, converged) =
        multistart_maximize(dim, &objective, initial, budget, seed);
    let schedule = TauSchedule::new(taus, variant)?;
    debug_assert!((yields(m, &schedule)?.gamma_d - objective_value).abs() < 1e-12);
    Ok(OptimizationReport { schedule, objective: objective_value, evaluations, start_seeds, converged })
}

/// Maximize the local-scheme figure of merit `γ_D² / β_D` subject to the
/// vacuum-dominance constraint `β_D (1-ε) ≥ factor · ε γ_D / m`.
pub fn optimize_local_objective(
    m: usize,
    d: usize,
    epsilon: f64,
    budget: u64,
    seed: u64,
) -> Result<OptimizationReport> {
    optimize_local_objective_with_factor(m, d, epsilon, REGIME_FACTOR, budget, seed)
}

/// Same as [`optimize_local_objective`] with an explicit dominance factor.
pub fn optimize_local_objective_with_factor(
    m: usize,
    d: usize,
    epsilon: f64,
    factor: f64,
    budget: u64,
    seed: u64,
) -> Result<OptimizationReport> {
    if m < 3 {
        return Err(Error::TooFewTelescopes(m));
    }
    if d == 0 {
        return Err(Error::EmptySchedule);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonRange(epsilon));
    }
    let objective = move |taus: &[f64]| -> f64 {
        let schedule = match TauSchedule::pure_weak(taus.to_vec()) {
            Ok(s) => s,
            Err(_) => return f64::NEG_INFINITY,
        };
        let y = match yields(m, &schedule) {
            Ok(y) => y,
            Err(_) => return f64::NEG_INFINITY,
        };
        if y.beta_d <= 0.0 || y.gamma_d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let slack = y.beta_d * (1.0 - epsilon) - factor * epsilon * y.gamma_d / m as f64;
        if slack < 0.0 {
            // Steer infeasible iterates back toward the constraint boundary.
            return -1.0 - 1e3 * (-slack) / (y.beta_d * (1.0 - epsilon)).max(1e-300);
        }
        y.gamma_d * y.gamma_d / y.beta_d
    };
    let initial = vec![0.5; d];
    let (taus, objective_value, evaluations, start_seeds, converged) =
        multistart_maximize(d, &objective, initial, budget, seed);
    if objective_value <= 0.0 {
        return Err(Error::InfeasibleRegime(epsilon));
    }
    let schedule = TauSchedule::pure_weak(taus)?;
    Ok(OptimizationReport { schedule, objective: objective_value, evaluations, start_seeds, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ansatz_values() {
        assert_eq!(ansatz_schedule(1).unwrap().taus(), &[0.5]);
        let s3 = ansatz_schedule(3).unwrap();
        assert_relative_eq!(s3.taus()[0], 0.25);
        assert_relative_eq!(s3.taus()[1], 1.0 / 3.0);
        assert_relative_eq!(s3.taus()[2], 0.5);
        assert!(ansatz_schedule(0).is_err());
    }

    #[test]
    fn m3_ansatz_yield_matches_induction() {
        // tau = (1/3, 1/2): x = (2/3, 1/3), gamma terms (2/9, 1/9).
        let schedule = TauSchedule::pure_weak(vec![1.0 / 3.0, 0.5]).unwrap();
        let y = yields(3, &schedule).unwrap();
        assert_relative_eq!(y.x[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(y.x[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(y.gamma_terms[0], 2.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(y.gamma_terms[1], 1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(y.gamma_d, 1.0 / 3.0, epsilon = 1e-15);
        for d in 1..=6 {
            let y = yields(3, &ansatz_schedule(d).unwrap()).unwrap();
            assert_relative_eq!(y.gamma_d, closed_form_m3(d, Variant::PureWeak), epsilon = 1e-14);
        }
    }

    #[test]
    fn hard_final_two_rounds() {
        // D = 2, tau_1 = 1/4: gamma = (3/4)(1/4) + (1/3)(3/4)^2 = 3/8.
        let schedule = TauSchedule::new(vec![0.25], Variant::HardFinal).unwrap();
        let y = yields(3, &schedule).unwrap();
        assert_relative_eq!(y.gamma_d, 0.375, epsilon = 1e-15);
        assert_relative_eq!(y.gamma_d, closed_form_m3(2, Variant::HardFinal), epsilon = 1e-15);
    }

    #[test]
    fn single_round_eight_telescopes() {
        let tau = 1.0 - 1.0 / 7.0;
        let schedule = TauSchedule::pure_weak(vec![tau]).unwrap();
        let y = yields(8, &schedule).unwrap();
        let expect = (1.0f64 / 7.0) * (6.0f64 / 7.0).powi(6);
        assert_relative_eq!(y.gamma_d, expect, epsilon = 1e-12);
        assert_relative_eq!(y.gamma_d, 46656.0 / 823543.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_limits() {
        assert_relative_eq!(closed_form_m3(1, Variant::PureWeak), 0.25);
        assert_relative_eq!(closed_form_m3(1, Variant::HardFinal), 1.0 / 3.0);
        assert!((closed_form_m3(1_000_000, Variant::PureWeak) - 0.5).abs() < 1e-6);
        assert!((closed_form_m3(1_000_000, Variant::HardFinal) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn degenerate_two_telescopes() {
        let schedule = TauSchedule::pure_weak(vec![0.3]).unwrap();
        let y = yields(2, &schedule).unwrap();
        assert_eq!(y.gamma_d, 1.0);
        assert_relative_eq!(y.beta_d, 0.7, epsilon = 1e-15);
        assert!(yields(1, &schedule).is_err());
    }

    #[test]
    fn yield_invariants_random_schedules() {
        let mut stream = Stream::new(42);
        for _ in 0..2000 {
            let m = 3 + stream.next_index(6);
            let d = 1 + stream.next_index(10);
            let taus: Vec<f64> = (0..d).map(|_| stream.next_range(0.01, 0.99)).collect();
            let schedule = TauSchedule::pure_weak(taus).unwrap();
            let y = yields(m, &schedule).unwrap();
            // monotone survival
            let mut prev = 1.0;
            for &x in &y.x {
                assert!(x < prev && x > 0.0);
                prev = x;
            }
            for (g, b) in y.gamma_terms.iter().zip(&y.beta_terms) {
                assert!(*g >= 0.0 && *b <= *g + 1e-15);
            }
            // Cauchy-Schwarz
            assert!(y.beta_d >= y.gamma_d * y.gamma_d - 1e-12);
            // sum rule
            let lhs: f64 = y.gamma_terms.iter().zip(&y.x).map(|(g, x)| g / x).sum();
            let rhs = (1.0 - y.x.last().unwrap()).powi((m - 2) as i32);
            assert!((lhs - rhs).abs() < 1e-12, "m={m} d={d}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn appending_rounds_never_hurts() {
        let mut stream = Stream::new(9);
        for _ in 0..500 {
            let m = 3 + stream.next_index(6);
            let d = 1 + stream.next_index(8);
            let mut taus: Vec<f64> = (0..d).map(|_| stream.next_range(0.01, 0.99)).collect();
            let before = yields(m, &TauSchedule::pure_weak(taus.clone()).unwrap()).unwrap().gamma_d;
            taus.push(stream.next_range(0.01, 0.99));
            let after = yields(m, &TauSchedule::pure_weak(taus).unwrap()).unwrap().gamma_d;
            assert!(after >= before - 1e-15);
        }
    }

    #[test]
    fn optimize_single_round_m3() {
        let report = optimize_gamma(3, 1, Variant::PureWeak, 100_000, 0).unwrap();
        assert!((report.schedule.taus()[0] - 0.5).abs() < 1e-6);
        assert_relative_eq!(report.objective, 0.25, epsilon = 1e-10);
        assert!(report.converged);
    }

    #[test]
    fn optimize_hard_final_recovers_analytic_taus() {
        let report = optimize_gamma(3, 5, Variant::HardFinal, 2_000_000, 0).unwrap();
        let taus = report.schedule.taus();
        assert_eq!(taus.len(), 4);
        assert!((taus[3] - 0.25).abs() < 1e-5, "tau_{{D-1}} = {}", taus[3]);
        assert!((taus[2] - 0.2).abs() < 1e-5, "tau_{{D-2}} = {}", taus[2]);
        assert!((report.objective - closed_form_m3(5, Variant::HardFinal)).abs() < 1e-8);
        assert!((report.objective - 6.0 / 14.0).abs() < 1e-8);
    }

    #[test]
    fn optimize_is_seed_invariant_at_small_d() {
        for d in 1..=5 {
            let a = optimize_gamma(3, d, Variant::PureWeak, 2_000_000, 0).unwrap();
            let b = optimize_gamma(3, d, Variant::PureWeak, 2_000_000, 12345).unwrap();
            assert!((a.objective - b.objective).abs() < 1e-10);
        }
    }

    #[test]
    fn optimize_respects_upper_bound() {
        for (m, d) in [(4, 6), (5, 8), (8, 10)] {
            let report = optimize_gamma(m, d, Variant::PureWeak, 500_000, 1).unwrap();
            assert!(report.objective <= 1.0 / (m as f64 - 1.0) + 1e-6);
        }
    }

    #[test]
    fn optimized_profile_shapes() {
        // m = 3: nondecreasing in r.
        let report = optimize_gamma(3, 8, Variant::PureWeak, 2_000_000, 0).unwrap();
        let taus = report.schedule.taus();
        for w in taus.windows(2) {
            assert!(w[1] >= w[0] - 1e-6, "m=3 profile not nondecreasing: {taus:?}");
        }
        // m >= 4 at larger d: high at r=1, dips, then rises toward the end.
        let report = optimize_gamma(5, 50, Variant::PureWeak, 4_000_000, 0).unwrap();
        let taus = report.schedule.taus();
        let first = taus[0];
        let min = taus.iter().cloned().fold(f64::INFINITY, f64::min);
        let last = *taus.last().unwrap();
        assert!(first > min + 1e-3, "no initial dip: first={first} min={min}");
        assert!(last > min + 1e-3, "no final rise: last={last} min={min}");
    }

    #[test]
    fn local_objective_single_round() {
        let eps = 1e-3;
        let report = optimize_local_objective(3, 1, eps, 500_000, 0).unwrap();
        let tau = report.schedule.taus()[0];
        // gamma^2/beta = tau for m = 3; constraint caps tau at 1 - 10 eps / (3 (1-eps)).
        assert_relative_eq!(report.objective, tau, epsilon = 1e-10);
        let cap = 1.0 - REGIME_FACTOR * eps / (3.0 * (1.0 - eps));
        assert!((tau - cap).abs() < 1e-6, "tau = {tau}, cap = {cap}");
        assert!(report.objective <= 1.0);
    }

    #[test]
    fn local_objective_budget_flag() {
        let report = optimize_gamma(3, 5, Variant::HardFinal, 1, 0).unwrap();
        assert!(!report.converged);
    }
}
