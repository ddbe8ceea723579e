//! Fisher-information matrices for every measurement scheme, analytic and
//! numeric, plus scheme-to-scheme ratios.
//!
//! All matrices are block-diagonal over telescope pairs with one 2x2 block
//! per pair acting on the parameters `(a_XY, b_XY)` of
//! `g_XY = a_XY + i b_XY`. Every closed-form block is a rank-1 multiple of
//! the rotation outer product `R(δ) = (cos δ, sin δ)^T (cos δ, sin δ)`.
//!
//! A note on the local-classical closed form: the Born distribution of the
//! coin-flipped pair measurement assigns each of the four sign outcomes the
//! probability `[1 + (2ε/M) c (−1)^{α_X+α_Y}] / (2M(M−1))`, which sums to
//! one over all pairs and outcomes. Its Fisher block is
//! `8ε²/(M³(M−1)(1−u²)) R(δ)` with `u = (2ε/M) c`. Quoted forms with a
//! doubled prefactor arise from summing four outcome labels with the merged
//! two-outcome parity-class probabilities; the form here is the one the
//! finite-difference and Monte Carlo pipelines reproduce.

use nalgebra::{DMatrix, Matrix2};

use crate::distill::{DistillationYield, REGIME_FACTOR};
use crate::error::{Error, Result};
use crate::pairs::{pair_count, pair_label, pair_list};
use crate::povm::{
    born_distribution, build_povm, MeasurementSettings, OutcomeDistribution, PhaseSpec, Scheme,
};
use crate::state::{build_stellar_state, CoherenceSet};

/// Visibility magnitude beyond which closed-form denominators are flagged
/// rather than trusted.
pub const SINGULAR_VISIBILITY: f64 = 1.0 - 1e-6;
const DENOM_FLOOR: f64 = 1e-12;

/// Accounting unit of a Fisher matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    PerTerrestrialPhoton,
    PerPairMeasurement,
}

/// Block-diagonal Fisher matrix over pair parameters.
#[derive(Clone, Debug)]
pub struct FisherMatrix {
    pub m: usize,
    /// One 2x2 block per pair, lexicographic order.
    pub blocks: Vec<Matrix2<f64>>,
    pub normalization: Normalization,
    /// Set when some pair sits within `1e-6` of unit visibility and the
    /// closed-form denominator was floored.
    pub singular_visibility: bool,
    /// For the local quantum scheme: whether the vacuum term dominates
    /// (`β_D (1-ε) ≥ 10 ε γ_D / M`) so the leading-order form applies.
    pub regime_ok: Option<bool>,
    /// Largest cross-pair entry seen while assembling (analytic forms are
    /// exactly block-diagonal; numeric assembly measures it).
    pub cross_block_max: f64,
}

impl FisherMatrix {
    fn analytic(
        m: usize,
        blocks: Vec<Matrix2<f64>>,
        normalization: Normalization,
        singular: bool,
    ) -> Self {
        Self {
            m,
            blocks,
            normalization,
            singular_visibility: singular,
            regime_ok: None,
            cross_block_max: 0.0,
        }
    }

    pub fn block(&self, q: usize) -> &Matrix2<f64> {
        &self.blocks[q]
    }

    /// Dense `2C x 2C` block-diagonal matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = 2 * self.blocks.len();
        let mut out = DMatrix::zeros(n, n);
        for (q, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    out[(2 * q + r, 2 * q + c)] = b[(r, c)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            *b *= factor;
        }
        out
    }
}

/// `(cos δ, sin δ)` outer product: the universal block shape.
pub fn rotation_block(delta: f64) -> Matrix2<f64> {
    let (s, c) = delta.sin_cos();
    Matrix2::new(c * c, s * c, s * c, s * s)
}

/// `Re(g e^{-iδ}) = Re g cos δ + Im g sin δ`.
fn visibility(g: num_complex::Complex64, delta: f64) -> f64 {
    g.re * delta.cos() + g.im * delta.sin()
}

fn guarded(denom: f64, singular: &mut bool, near_unit: bool) -> f64 {
    if near_unit {
        *singular = true;
    }
    denom.max(DENOM_FLOOR)
}

fn pair_blocks<F>(m: usize, g: &CoherenceSet, phases: &PhaseSpec, mut f: F) -> (Vec<Matrix2<f64>>, bool)
where
    F: FnMut(f64, f64, &mut bool) -> f64,
{
    let mut singular = false;
    let blocks = pair_list(m)
        .into_iter()
        .map(|(i, j)| {
            let delta = phases.pair_delta(m, i, j);
            let c = visibility(g.get(i, j), delta);
            let scale = f(c, delta, &mut singular);
            rotation_block(delta) * scale
        })
        .collect();
    (blocks, singular)
}

/// Dual-rail interference on a coin-flipped pair, per terrestrial photon:
/// block `ε / (M C(M,2) (1−c²)) R(δ)`.
pub fn fisher_gjc_classical(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let norm = m as f64 * pair_count(m) as f64;
    let (blocks, singular) = pair_blocks(m, g, phases, |c, _, flag| {
        let denom = guarded(1.0 - c * c, flag, c.abs() > SINGULAR_VISIBILITY);
        epsilon / (norm * denom)
    });
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerTerrestrialPhoton, singular))
}

/// Weak-measurement pre-processing followed by dual-rail interference:
/// block `γ_D ε / (M (1−c²)) R(δ)`.
pub fn fisher_gjc_quantum(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
    gamma_d: f64,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    if !(0.0..=1.0).contains(&gamma_d) {
        return Err(Error::InvalidParameter(format!("gamma_d = {gamma_d} outside [0, 1]")));
    }
    let (blocks, singular) = pair_blocks(m, g, phases, |c, _, flag| {
        let denom = guarded(1.0 - c * c, flag, c.abs() > SINGULAR_VISIBILITY);
        gamma_d * epsilon / (m as f64 * denom)
    });
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerTerrestrialPhoton, singular))
}

/// Dual-rail photons on a full pairing of all telescopes (even `m`); equals
/// the weak-measurement interference scheme at its saturating yield
/// `γ_D = 1/(m−1)`.
pub fn fisher_all_pairs_bipartite(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    if m % 2 != 0 {
        return Err(Error::OddTelescopeCount(m));
    }
    fisher_gjc_quantum(m, epsilon, g, phases, 1.0 / (m as f64 - 1.0))
}

/// Coin-flipped pair with local coherent projections, exact form:
/// block `8ε² / (M³(M−1)(1−u²)) R(δ)` with `u = (2ε/M) c`.
pub fn fisher_local_classical(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let mf = m as f64;
    let lead = 8.0 * epsilon * epsilon / (mf.powi(3) * (mf - 1.0));
    let (blocks, singular) = pair_blocks(m, g, phases, |c, _, flag| {
        let u = 2.0 * epsilon / mf * c;
        let denom = guarded(1.0 - u * u, flag, u.abs() > SINGULAR_VISIBILITY);
        lead / denom
    });
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerPairMeasurement, singular))
}

/// Leading-order form of [`fisher_local_classical`] (drops the `1/(1−u²)`
/// visibility correction).
pub fn fisher_local_classical_leading(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let mf = m as f64;
    let lead = 8.0 * epsilon * epsilon / (mf.powi(3) * (mf - 1.0));
    let (blocks, singular) = pair_blocks(m, g, phases, |_, _, _| lead);
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerPairMeasurement, singular))
}

fn local_quantum_regime(m: usize, epsilon: f64, y: &DistillationYield) -> bool {
    y.beta_d * (1.0 - epsilon) >= REGIME_FACTOR * epsilon * y.gamma_d / m as f64
}

/// Weak-measurement pre-processing with local coherent projections, exact
/// form. With `A = β_D(1−ε)/4`, `B = εγ_D/(2M)` the block is
/// `4B²(A+B) / ((A+B)² − B²c²) R(δ)`; `regime_ok` reports whether the
/// vacuum term dominates so the leading-order simplification applies.
pub fn fisher_local_quantum(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
    y: &DistillationYield,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let a = y.beta_d * (1.0 - epsilon) / 4.0;
    let b = epsilon * y.gamma_d / (2.0 * m as f64);
    let (blocks, singular) = pair_blocks(m, g, phases, |c, _, flag| {
        if a + b <= 0.0 {
            return 0.0;
        }
        // Guard the dimensionless visibility factor, not the raw denominator:
        // (A+B)² − B²c² is of order B², legitimately tiny for small yields.
        let v = b * c / (a + b);
        let denom = guarded(1.0 - v * v, flag, v.abs() > SINGULAR_VISIBILITY);
        4.0 * b * b / ((a + b) * denom)
    });
    let mut out =
        FisherMatrix::analytic(m, blocks, Normalization::PerPairMeasurement, singular);
    out.regime_ok = Some(local_quantum_regime(m, epsilon, y));
    Ok(out)
}

/// Leading-order form of [`fisher_local_quantum`]:
/// block `4ε²γ_D² / (M²β_D(1−ε)) R(δ)`, valid when `regime_ok` holds.
pub fn fisher_local_quantum_leading(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
    y: &DistillationYield,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let mf = m as f64;
    let scale = if y.beta_d > 0.0 {
        4.0 * epsilon * epsilon * y.gamma_d * y.gamma_d
            / (mf * mf * y.beta_d * (1.0 - epsilon))
    } else {
        0.0
    };
    let (blocks, singular) = pair_blocks(m, g, phases, |_, _, _| scale);
    let mut out =
        FisherMatrix::analytic(m, blocks, Normalization::PerPairMeasurement, singular);
    out.regime_ok = Some(local_quantum_regime(m, epsilon, y));
    Ok(out)
}

/// Single-excitation shared entangled state across all telescopes:
/// block `2ε / (M²(1−c²)) R(δ)`.
pub fn fisher_wstate(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let mf = m as f64;
    let (blocks, singular) = pair_blocks(m, g, phases, |c, _, flag| {
        let denom = guarded(1.0 - c * c, flag, c.abs() > SINGULAR_VISIBILITY);
        2.0 * epsilon / (mf * mf * denom)
    });
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerTerrestrialPhoton, singular))
}

/// Phase-locked local frames at every telescope, leading order:
/// block `4ε²/M² R(δ)` (exact at `g = 0`).
pub fn fisher_multipartite_frame_leading(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases)?;
    let mf = m as f64;
    let (blocks, singular) = pair_blocks(m, g, phases, |_, _, _| {
        4.0 * epsilon * epsilon / (mf * mf)
    });
    Ok(FisherMatrix::analytic(m, blocks, Normalization::PerPairMeasurement, singular))
}

/// Outcome distribution of the shared single-excitation-state scheme.
///
/// Photon-bearing outcomes carry the prefactor `ε`: interference outcomes
/// `XY±` with `ε(1 ± c)/M²`, single-telescope outcomes with `ε/M²`, and a
/// `vac` outcome absorbing `1 − ε`. The photon-sector weights sum to one
/// before the prefactor.
pub fn wstate_distribution(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<OutcomeDistribution> {
    validate_common(m, epsilon, g, phases)?;
    let m2 = (m * m) as f64;
    let mut entries = Vec::new();
    for (i, j) in pair_list(m) {
        let delta = phases.pair_delta(m, i, j);
        let c = visibility(g.get(i, j), delta);
        let pair = pair_label(i, j);
        entries.push((format!("{pair}+"), epsilon * (1.0 + c) / m2));
        entries.push((format!("{pair}-"), epsilon * (1.0 - c) / m2));
    }
    for i in 0..m {
        entries.push((crate::pairs::telescope_label(i), epsilon / m2));
    }
    entries.push(("vac".into(), 1.0 - epsilon));
    OutcomeDistribution::new(entries)
}

/// Outcome distribution over all `2^M` local sign vectors for the
/// phase-locked-frame scheme:
/// `P(α) = 2^{−M} + 2^{−(M−1)} Σ_{i<j} (−1)^{α_i+α_j} (ε/M) c_ij`.
pub fn multipartite_frame_distribution(
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    phases: &PhaseSpec,
) -> Result<OutcomeDistribution> {
    validate_common(m, epsilon, g, phases)?;
    if m > 16 {
        return Err(Error::InvalidParameter(format!(
            "2^{m} outcome vectors exceed the enumeration limit"
        )));
    }
    let pairs = pair_list(m);
    let couplings: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| {
            let di = phases.telescope_delta(i)?;
            let dj = phases.telescope_delta(j)?;
            Ok(visibility(g.get(i, j), di - dj) * epsilon / m as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let base = 0.5f64.powi(m as i32);
    let coupling_scale = 0.5f64.powi(m as i32 - 1);
    let mut entries = Vec::with_capacity(1 << m);
    for alpha in 0u32..(1 << m) {
        let mut p = base;
        for (q, &(i, j)) in pairs.iter().enumerate() {
            let sign = if ((alpha >> i) ^ (alpha >> j)) & 1 == 0 { 1.0 } else { -1.0 };
            p += coupling_scale * sign * couplings[q];
        }
        let label: String =
            (0..m).map(|i| if (alpha >> i) & 1 == 0 { '+' } else { '-' }).collect();
        entries.push((label, p));
    }
    OutcomeDistribution::new(entries)
}

/// Fisher matrix from central finite differences of the scheme's outcome
/// distribution.
///
/// The step for parameter `c_i` is `step · max(1, |c_i|)`; outcomes with
/// probability below `1e-14` are excluded. Returns the full
/// `2C(M,2)`-parameter matrix reduced to its pair blocks, recording the
/// largest cross-pair entry in `cross_block_max`.
pub fn fisher_numeric(
    settings: &MeasurementSettings,
    m: usize,
    epsilon: f64,
    g: &CoherenceSet,
    yields: Option<&DistillationYield>,
    step: f64,
) -> Result<FisherMatrix> {
    validate_common(m, epsilon, g, phases_of(settings))?;
    if step <= 0.0 {
        return Err(Error::InvalidParameter(format!("finite-difference step {step} must be positive")));
    }
    let povm = match settings.scheme {
        Scheme::WState | Scheme::MultipartiteFrame => None,
        _ => Some(build_povm(settings, m, yields)?),
    };
    let evaluate = |params: &[f64]| -> Result<Vec<f64>> {
        let coherence = CoherenceSet::from_parameter_vector(m, params)?;
        let dist = match &povm {
            Some(povm) => {
                let state = build_stellar_state(m, epsilon, &coherence)?;
                born_distribution(povm, &state)?
            }
            None => match settings.scheme {
                Scheme::WState => wstate_distribution(m, epsilon, &coherence, &settings.phases)?,
                _ => multipartite_frame_distribution(m, epsilon, &coherence, &settings.phases)?,
            },
        };
        Ok(dist.probabilities())
    };

    let params = g.parameter_vector();
    let n = params.len();
    let p0 = evaluate(&params)?;
    let mut derivs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let h = step * params[k].abs().max(1.0);
        let mut plus = params.clone();
        plus[k] += h;
        let mut minus = params.clone();
        minus[k] -= h;
        let (pp, pm) = (evaluate(&plus)?, evaluate(&minus)?);
        derivs.push(pp.iter().zip(&pm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }

    let mut full = DMatrix::<f64>::zeros(n, n);
    for (x, &p) in p0.iter().enumerate() {
        if p < 1e-14 {
            continue;
        }
        for k in 0..n {
            for l in k..n {
                let v = derivs[k][x] * derivs[l][x] / p;
                full[(k, l)] += v;
                if l != k {
                    full[(l, k)] += v;
                }
            }
        }
    }

    let c_pairs = pair_count(m);
    let mut blocks = Vec::with_capacity(c_pairs);
    let mut cross_max = 0.0f64;
    for q in 0..c_pairs {
        blocks.push(Matrix2::new(
            full[(2 * q, 2 * q)],
            full[(2 * q, 2 * q + 1)],
            full[(2 * q + 1, 2 * q)],
            full[(2 * q + 1, 2 * q + 1)],
        ));
    }
    for k in 0..n {
        for l in 0..n {
            if k / 2 != l / 2 {
                cross_max = cross_max.max(full[(k, l)].abs());
            }
        }
    }
    let normalization = match settings.scheme {
        Scheme::GjcClassical | Scheme::GjcQuantum | Scheme::AllPairsBipartite | Scheme::WState => {
            Normalization::PerTerrestrialPhoton
        }
        _ => Normalization::PerPairMeasurement,
    };
    Ok(FisherMatrix {
        m,
        blocks,
        normalization,
        singular_visibility: false,
        regime_ok: yields.map(|y| local_quantum_regime(m, epsilon, y)),
        cross_block_max: cross_max,
    })
}

fn phases_of(settings: &MeasurementSettings) -> &PhaseSpec {
    &settings.phases
}

/// Scalar ratio between two blockwise-proportional Fisher matrices.
#[derive(Clone, Copy, Debug)]
pub struct SchemeRatio {
    pub ratio: f64,
    /// `‖F₁ − ratio·F₂‖_F / ‖F₁‖_F`.
    pub residual: f64,
}

/// Verify proportionality and report the scalar ratio `F₁ = ratio · F₂`.
///
/// Proportionality (residual below `1e-8`) makes the ratio independent of
/// any matrix-norm choice; non-proportional inputs are an error rather
/// than a norm-dependent number.
pub fn scheme_ratio(f1: &FisherMatrix, f2: &FisherMatrix) -> Result<SchemeRatio> {
    if f1.blocks.len() != f2.blocks.len() {
        return Err(Error::DimensionMismatch { op: f1.blocks.len(), state: f2.blocks.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in f1.blocks.iter().zip(&f2.blocks) {
        num += a.component_mul(b).sum();
        den += b.norm_squared();
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter("denominator Fisher matrix is zero".into()));
    }
    let ratio = num / den;
    let mut diff2 = 0.0;
    let mut ref2 = 0.0;
    for (a, b) in f1.blocks.iter().zip(&f2.blocks) {
        diff2 += (a - b * ratio).norm_squared();
        ref2 += a.norm_squared();
    }
    let residual = diff2.sqrt() / ref2.sqrt().max(1e-300);
    if residual > 1e-8 {
        return Err(Error::NotProportional(residual));
    }
    Ok(SchemeRatio { ratio, residual })
}

fn validate_common(m: usize, epsilon: f64, g: &CoherenceSet, phases: &PhaseSpec) -> Result<()> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonRange(epsilon));
    }
    if g.m() != m {
        return Err(Error::PairArity { m, expected: pair_count(m), got: pair_count(g.m()) });
    }
    phases.validate(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::{yields, TauSchedule};
    use crate::rng::Stream;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    const STEP: f64 = 1e-6;

    fn uniform(m: usize, re: f64, im: f64) -> CoherenceSet {
        CoherenceSet::uniform(m, Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn gjc_classical_reference_points() {
        let m = 3;
        let eps = 0.01;
        let f = fisher_gjc_classical(m, eps, &uniform(m, 0.0, 0.0), &PhaseSpec::Shared(0.0))
            .unwrap();
        for b in &f.blocks {
            assert_relative_eq!(b[(0, 0)], eps / 9.0, epsilon = 1e-15);
            assert_eq!(b[(0, 1)], 0.0);
            assert_eq!(b[(1, 1)], 0.0);
        }
        let f = fisher_gjc_classical(
            4,
            eps,
            &uniform(4, 0.0, 0.0),
            &PhaseSpec::Shared(std::f64::consts::FRAC_PI_2),
        )
        .unwrap();
        for b in &f.blocks {
            assert!(b[(0, 0)].abs() < 1e-30);
            assert_relative_eq!(b[(1, 1)], eps / 24.0, epsilon = 1e-12);
        }
        // unit visibility raises the singular flag instead of diverging
        let f = fisher_gjc_classical(3, eps, &uniform(3, 1.0, 0.0), &PhaseSpec::Shared(0.0))
            .unwrap();
        assert!(f.singular_visibility);
        assert!(f.blocks[0][(0, 0)].is_finite());
    }

    #[test]
    fn gjc_quantum_is_pair_count_times_gamma_ratio() {
        let mut stream = Stream::new(3);
        for m in 3..=8 {
            let g = uniform(m, stream.next_range(-0.5, 0.5), stream.next_range(-0.5, 0.5));
            let phases = PhaseSpec::Shared(stream.next_range(-1.0, 1.0));
            let eps = 0.01;
            let gamma = stream.next_range(0.05, 1.0 / (m as f64 - 1.0));
            let fq = fisher_gjc_quantum(m, eps, &g, &phases, gamma).unwrap();
            let fc = fisher_gjc_classical(m, eps, &g, &phases).unwrap();
            let r = scheme_ratio(&fq, &fc).unwrap();
            assert_relative_eq!(r.ratio, pair_count(m) as f64 * gamma, epsilon = 1e-10);
            // at the saturating yield the ratio is m/2
            let fq = fisher_gjc_quantum(m, eps, &g, &phases, 1.0 / (m as f64 - 1.0)).unwrap();
            let r = scheme_ratio(&fq, &fc).unwrap();
            assert_relative_eq!(r.ratio, m as f64 / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gjc_quantum_zero_gamma_is_zero() {
        let f = fisher_gjc_quantum(4, 0.01, &uniform(4, 0.2, 0.1), &PhaseSpec::Shared(0.4), 0.0)
            .unwrap();
        assert_eq!(f.frobenius_norm(), 0.0);
    }

    #[test]
    fn local_classical_closed_form_and_scaling() {
        let eps = 0.01;
        let f3 =
            fisher_local_classical(3, eps, &uniform(3, 0.0, 0.0), &PhaseSpec::Shared(0.0))
                .unwrap();
        assert_relative_eq!(f3.blocks[0][(0, 0)], 8.0 * eps * eps / 54.0, epsilon = 1e-15);
        let f4 =
            fisher_local_classical(4, eps, &uniform(4, 0.0, 0.0), &PhaseSpec::Shared(0.0))
                .unwrap();
        let expect = (27.0 * 2.0) / (64.0 * 3.0);
        assert_relative_eq!(
            f4.blocks[0][(0, 0)] / f3.blocks[0][(0, 0)],
            expect,
            epsilon = 1e-12
        );
    }

    #[test]
    fn wstate_reference_points() {
        let m = 4;
        let eps = 0.01;
        let f = fisher_wstate(m, eps, &uniform(m, 0.0, 0.0), &PhaseSpec::Shared(0.0)).unwrap();
        assert_relative_eq!(f.blocks[0][(0, 0)], 2.0 * eps / 16.0, epsilon = 1e-15);
        // ratio to the weak-measurement interference scheme at saturating yield
        let mut stream = Stream::new(8);
        for m in 3..=8 {
            let g = uniform(m, stream.next_range(-0.4, 0.4), stream.next_range(-0.4, 0.4));
            let phases = PhaseSpec::Shared(stream.next_range(-1.5, 1.5));
            let fw = fisher_wstate(m, eps, &g, &phases).unwrap();
            let fq =
                fisher_gjc_quantum(m, eps, &g, &phases, 1.0 / (m as f64 - 1.0)).unwrap();
            let r = scheme_ratio(&fw, &fq).unwrap();
            assert_relative_eq!(r.ratio, 2.0 * (m as f64 - 1.0) / m as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn wstate_distribution_normalizes() {
        let mut stream = Stream::new(21);
        for _ in 0..100 {
            let m = 3 + stream.next_index(6);
            let g = uniform(m, stream.next_range(-0.7, 0.7), stream.next_range(-0.6, 0.6));
            let phases = PhaseSpec::PerPair(
                (0..pair_count(m)).map(|_| stream.next_range(-3.0, 3.0)).collect(),
            );
            let d = wstate_distribution(m, 0.02, &g, &phases).unwrap();
            let total: f64 = d.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // unit-visibility pair doubles the + outcome weight
        let m = 4;
        let g = uniform(m, 1.0, 0.0);
        let d = wstate_distribution(m, 0.01, &g, &PhaseSpec::Shared(0.0)).unwrap();
        assert_relative_eq!(d.get("AB+").unwrap(), 2.0 * 0.01 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn multipartite_distribution_normalizes_and_matches_block() {
        let mut stream = Stream::new(13);
        for m in 2..=10 {
            let g = uniform(m, stream.next_range(-0.5, 0.5), stream.next_range(-0.5, 0.5));
            let phases =
                PhaseSpec::PerTelescope((0..m).map(|_| stream.next_range(-2.0, 2.0)).collect());
            let d = multipartite_frame_distribution(m, 0.01, &g, &phases).unwrap();
            assert_eq!(d.entries().len(), 1 << m);
            let total: f64 = d.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // Fisher block at g = 0 equals the leading form exactly.
        let m = 5;
        let eps = 0.01;
        let phases = PhaseSpec::PerTelescope(vec![0.3, -0.2, 0.9, 0.0, 1.4]);
        let settings = MeasurementSettings::new(Scheme::MultipartiteFrame, phases.clone());
        let g0 = uniform(m, 0.0, 0.0);
        let numeric = fisher_numeric(&settings, m, eps, &g0, None, STEP).unwrap();
        let analytic = fisher_multipartite_frame_leading(m, eps, &g0, &phases).unwrap();
        for (q, (nb, ab)) in numeric.blocks.iter().zip(&analytic.blocks).enumerate() {
            // Central differences lose ~eps_mach/h to cancellation, so the
            // bound is 1e-6 rather than exactness even though the outcome
            // probabilities are linear in the coherence parameters.
            assert!(
                (nb - ab).norm() < 1e-6 * ab.norm().max(1e-12),
                "block {q}: numeric {nb:?} vs analytic {ab:?}"
            );
        }
    }

    #[test]
    fn numeric_matches_analytic_for_povm_schemes() {
        let mut stream = Stream::new(77);
        for trial in 0..40 {
            let m = 3 + stream.next_index(4); // 3..=6
            let eps = stream.next_range(0.001, 0.01);
            let g = CoherenceSet::new(
                m,
                (0..pair_count(m))
                    .map(|_| {
                        Complex64::new(
                            stream.next_range(-0.6, 0.6),
                            stream.next_range(-0.6, 0.6),
                        )
                    })
                    .collect(),
            )
            .unwrap();
            let d = 1 + stream.next_index(4);
            let taus: Vec<f64> = (0..d).map(|_| stream.next_range(0.1, 0.9)).collect();
            let y = yields(m, &TauSchedule::pure_weak(taus).unwrap()).unwrap();
            let shared = PhaseSpec::Shared(stream.next_range(-1.5, 1.5));
            let per_tel =
                PhaseSpec::PerTelescope((0..m).map(|_| stream.next_range(-1.5, 1.5)).collect());
            let cases: Vec<(Scheme, PhaseSpec, FisherMatrix)> = vec![
                (
                    Scheme::GjcClassical,
                    shared.clone(),
                    fisher_gjc_classical(m, eps, &g, &shared).unwrap(),
                ),
                (
                    Scheme::GjcQuantum,
                    shared.clone(),
                    fisher_gjc_quantum(m, eps, &g, &shared, y.gamma_d).unwrap(),
                ),
                (
                    Scheme::LocalClassical,
                    per_tel.clone(),
                    fisher_local_classical(m, eps, &g, &per_tel).unwrap(),
                ),
                (
                    Scheme::LocalQuantum,
                    per_tel.clone(),
                    fisher_local_quantum(m, eps, &g, &per_tel, &y).unwrap(),
                ),
            ];
            for (scheme, phases, analytic) in cases {
                let settings = MeasurementSettings::new(scheme, phases);
                let numeric =
                    fisher_numeric(&settings, m, eps, &g, Some(&y), STEP).unwrap();
                for (q, (nb, ab)) in numeric.blocks.iter().zip(&analytic.blocks).enumerate() {
                    let denom = ab.norm().max(1e-300);
                    assert!(
                        (nb - ab).norm() / denom < 1e-6,
                        "trial {trial} scheme {} m {m} block {q}: numeric {nb} analytic {ab}",
                        scheme.name(),
                    );
                }
                assert!(numeric.cross_block_max < 1e-10, "{}", scheme.name());
            }
        }
    }

    #[test]
    fn local_quantum_direct_single_round_limit() {
        // tau close to 1 inside the regime: leading block approaches
        // 4 eps^2 / M^2 R.
        let m = 4;
        let eps = 1e-4;
        let tau = 1.0 - 1.01 * 10.0 * eps * (m as f64).recip() / (1.0 - eps);
        let y = yields(m, &TauSchedule::pure_weak(vec![tau]).unwrap()).unwrap();
        let phases = PhaseSpec::Shared(0.0);
        let g = uniform(m, 0.3, 0.0);
        let f = fisher_local_quantum_leading(m, eps, &g, &phases, &y).unwrap();
        assert_eq!(f.regime_ok, Some(true));
        let target = 4.0 * eps * eps / (m as f64 * m as f64) / (1.0 - eps);
        assert_relative_eq!(
            f.blocks[0][(0, 0)],
            target * tau.powi(m as i32 - 2),
            max_relative = 1e-12
        );
        // gamma = beta = 0 collapses to the zero matrix
        let zeroed = crate::distill::DistillationYield {
            x: vec![0.0],
            gamma_terms: vec![0.0],
            beta_terms: vec![0.0],
            omega: vec![0.0],
            gamma_d: 0.0,
            beta_d: 0.0,
        };
        let f0 = fisher_local_quantum(m, eps, &g, &phases, &zeroed).unwrap();
        assert_eq!(f0.frobenius_norm(), 0.0);
    }

    #[test]
    fn blocks_are_psd_and_rank_one() {
        let mut stream = Stream::new(99);
        for _ in 0..200 {
            let m = 3 + stream.next_index(5);
            let eps = stream.next_range(0.001, 0.05);
            let g = uniform(m, stream.next_range(-0.6, 0.6), stream.next_range(-0.6, 0.6));
            let phases = PhaseSpec::Shared(stream.next_range(-3.0, 3.0));
            let y = yields(
                m,
                &TauSchedule::pure_weak(vec![stream.next_range(0.2, 0.8)]).unwrap(),
            )
            .unwrap();
            for f in [
                fisher_gjc_classical(m, eps, &g, &phases).unwrap(),
                fisher_gjc_quantum(m, eps, &g, &phases, y.gamma_d).unwrap(),
                fisher_local_classical(m, eps, &g, &phases).unwrap(),
                fisher_local_quantum(m, eps, &g, &phases, &y).unwrap(),
                fisher_wstate(m, eps, &g, &phases).unwrap(),
            ] {
                for b in &f.blocks {
                    let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
                    assert!(det.abs() < 1e-10 * b.norm_squared().max(1e-300));
                    assert!(b[(0, 0)] >= 0.0 && b[(1, 1)] >= 0.0);
                    assert!(b.trace() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn ratio_rejects_non_proportional_inputs() {
        let g = uniform(3, 0.3, 0.0);
        let f1 = fisher_gjc_classical(3, 0.01, &g, &PhaseSpec::Shared(0.0)).unwrap();
        let f2 = fisher_gjc_classical(3, 0.01, &g, &PhaseSpec::Shared(0.7)).unwrap();
        assert!(matches!(scheme_ratio(&f1, &f2), Err(Error::NotProportional(_))));
        let same = scheme_ratio(&f1, &f1).unwrap();
        assert_eq!(same.ratio, 1.0);
        // rescaling both inputs leaves the ratio unchanged
        let r1 = scheme_ratio(&f1.scale(3.0), &f1.scale(1.5)).unwrap();
        assert_relative_eq!(r1.ratio, 2.0, epsilon = 1e-12);
    }
}
