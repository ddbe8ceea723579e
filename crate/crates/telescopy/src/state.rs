//! Truncated stellar states and weak-measurement updates.
//!
//! The array of `m` telescopes holds at most one stellar photon per temporal
//! mode, so the state lives on the `m + 1`-dimensional basis
//! `{|0...0>, |e_1>, ..., |e_m>}`, where `|e_i>` places the photon at
//! telescope `i`. A [`StellarState`] keeps the vacuum weight `1 - ε` as a
//! separate scalar next to the `m × m` single-photon block, which makes the
//! truncation explicit; [`StellarState::embed`] produces the full dense
//! operator when a POVM has to be contracted against it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pairs::{pair_count, pair_index, pair_label, pair_list};
use crate::quad;

/// Hermiticity tolerance used by state invariants.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalue floor accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

/// A telescope array: a count plus optional per-pair wavenumbers.
#[derive(Clone, Debug)]
pub struct TelescopeArray {
    m: usize,
    baselines: Option<Vec<f64>>,
}

impl TelescopeArray {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewTelescopes(m));
        }
        Ok(Self { m, baselines: None })
    }

    /// Array with one scalar wavenumber per unordered pair, lexicographic
    /// order.
    pub fn with_baselines(m: usize, baselines: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewTelescopes(m));
        }
        let expected = pair_count(m);
        if baselines.len() != expected {
            return Err(Error::PairArity { m, expected, got: baselines.len() });
        }
        Ok(Self { m, baselines: Some(baselines) })
    }

    /// Array whose pair wavenumbers derive from scaled telescope positions,
    /// `k_XY = u_Y - u_X`. Positions guarantee a physical (positive
    /// semidefinite) coherence matrix for any nonnegative intensity.
    pub fn from_positions(positions: &[f64]) -> Result<Self> {
        let m = positions.len();
        if m < 2 {
            return Err(Error::TooFewTelescopes(m));
        }
        let baselines = pair_list(m)
            .into_iter()
            .map(|(i, j)| positions[j] - positions[i])
            .collect();
        Ok(Self { m, baselines: Some(baselines) })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn baselines(&self) -> Option<&[f64]> {
        self.baselines.as_deref()
    }
}

/// One complex coherence value `g_XY = a_XY + i b_XY` per unordered pair.
///
/// Only the `i < j` representative is stored; Hermiticity of the state is
/// implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceSet {
    m: usize,
    entries: Vec<Complex64>,
}

impl CoherenceSet {
    pub fn new(m: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewTelescopes(m));
        }
        let expected = pair_count(m);
        if entries.len() != expected {
            return Err(Error::PairArity { m, expected, got: entries.len() });
        }
        for (idx, g) in entries.iter().enumerate() {
            if g.norm() > 1.0 + 1e-9 {
                let (i, j) = pair_list(m)[idx];
                return Err(Error::CoherenceBound(g.norm(), pair_label(i, j)));
            }
        }
        Ok(Self { m, entries })
    }

    /// All pairs share the same coherence value.
    pub fn uniform(m: usize, g: Complex64) -> Result<Self> {
        Self::new(m, vec![g; pair_count(m)])
    }

    /// Fully incoherent source: `g = 0` everywhere.
    pub fn zero(m: usize) -> Self {
        Self { m, entries: vec![Complex64::new(0.0, 0.0); pair_count(m)] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Coherence between telescopes `i` and `j`; conjugated when `i > j`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let g = self.entries[pair_index(self.m, i, j)];
        if i < j {
            g
        } else {
            g.conj()
        }
    }

    /// Canonical (`i < j`) entries in lexicographic pair order.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The flat real parameter vector `(a_AB, b_AB, a_AC, ...)`.
    pub fn parameter_vector(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|g| [g.re, g.im]).collect()
    }

    /// Rebuild from the flat real parameter vector.
    pub fn from_parameter_vector(m: usize, params: &[f64]) -> Result<Self> {
        if params.len() != 2 * pair_count(m) {
            return Err(Error::PairArity { m, expected: 2 * pair_count(m), got: params.len() });
        }
        let entries = params.chunks(2).map(|ab| Complex64::new(ab[0], ab[1])).collect();
        Self::new(m, entries)
    }
}

/// Normalized 1-D source intensity profile `I(x)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModel {
    /// Point source at `x0`.
    Point { x0: f64 },
    /// Uniform brightness on an interval of the given width.
    Uniform { center: f64, width: f64 },
    /// Gaussian profile.
    Gaussian { mean: f64, sigma: f64 },
    /// Discrete samples: `g(k) = Σ w e^{ikx}` with weights summing to 1.
    Tabulated { xs: Vec<f64>, weights: Vec<f64> },
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::Point { .. } => Ok(()),
            SourceModel::Uniform { width, .. } => {
                if *width <= 0.0 {
                    Err(Error::InvalidParameter(format!("uniform width must be positive, got {width}")))
                } else {
                    Ok(())
                }
            }
            SourceModel::Gaussian { sigma, .. } => {
                if *sigma <= 0.0 {
                    Err(Error::InvalidParameter(format!("gaussian sigma must be positive, got {sigma}")))
                } else {
                    Ok(())
                }
            }
            SourceModel::Tabulated { xs, weights } => {
                if xs.len() != weights.len() || xs.is_empty() {
                    return Err(Error::InvalidParameter(
                        "tabulated source needs equal, nonzero sample/weight counts".into(),
                    ));
                }
                for &w in weights {
                    if w < 0.0 {
                        return Err(Error::NegativeIntensity(w));
                    }
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-10 {
                    return Err(Error::UnnormalizedSource(total));
                }
                Ok(())
            }
        }
    }

    /// Fourier transform `g(k) = ∫ I(x) e^{ikx} dx` of the profile.
    pub fn fourier(&self, k: f64) -> Result<Complex64> {
        self.validate()?;
        let tol = 1e-9;
        Ok(match self {
            SourceModel::Point { x0 } => (Complex64::i() * k * x0).exp(),
            SourceModel::Uniform { center, width } => {
                let (a, b) = (center - 0.5 * width, center + 0.5 * width);
                quad::integrate(|x| (Complex64::i() * k * x).exp() / width, a, b, tol)
            }
            SourceModel::Gaussian { mean, sigma } => {
                let (a, b) = (mean - 10.0 * sigma, mean + 10.0 * sigma);
                let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                quad::integrate(
                    |x| {
                        let z = (x - mean) / sigma;
                        (Complex64::i() * k * x).exp() * (norm * (-0.5 * z * z).exp())
                    },
                    a,
                    b,
                    tol,
                )
            }
            SourceModel::Tabulated { xs, weights } => xs
                .iter()
                .zip(weights)
                .map(|(&x, &w)| (Complex64::i() * k * x).exp() * w)
                .sum(),
        })
    }
}

/// Dense operator on the truncated basis `{|0...0>, |e_1>, ..., |e_M>}`.
#[derive(Clone, Debug)]
pub struct Operator {
    pub label: String,
    pub mat: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(label: impl Into<String>, mat: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { label: label.into(), mat }
    }

    pub fn zeros(label: impl Into<String>, dim: usize) -> Self {
        Self::new(label, DMatrix::zeros(dim, dim))
    }

    pub fn identity(label: impl Into<String>, dim: usize) -> Self {
        Self::new(label, DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let adj = self.mat.adjoint();
        (&self.mat - adj).norm() <= tol * self.dim() as f64
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// `tr(self · rho)` for a density operator of the same dimension.
    pub fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<Complex64> {
        if rho.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { op: self.dim(), state: rho.nrows() });
        }
        Ok((&self.mat * rho).trace())
    }
}

/// Received stellar state: vacuum weight `1 - ε` plus `ε` times the
/// single-photon block `ρ^(1)` with `1/M` on the diagonal and `g_XY / M`
/// off-diagonal.
#[derive(Clone, Debug)]
pub struct StellarState {
    epsilon: f64,
    m: usize,
    block: DMatrix<Complex64>,
}

impl StellarState {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vacuum_weight(&self) -> f64 {
        1.0 - self.epsilon
    }

    /// The `M × M` single-photon block `ρ^(1)`.
    pub fn single_photon_block(&self) -> &DMatrix<Complex64> {
        &self.block
    }

    /// Lossless embedding into the `(M+1)`-dimensional truncated operator,
    /// vacuum basis vector first.
    pub fn embed(&self) -> Operator {
        let dim = self.m + 1;
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(0, 0)] = Complex64::new(self.vacuum_weight(), 0.0);
        for i in 0..self.m {
            for j in 0..self.m {
                mat[(i + 1, j + 1)] = self.block[(i, j)] * self.epsilon;
            }
        }
        Operator::new("stellar", mat)
    }

    /// Verify Hermiticity, unit diagonal over `M`, trace, and positivity.
    pub fn check_invariants(&self) -> Result<()> {
        if !Operator::new("block", self.block.clone()).is_hermitian(HERMITICITY_TOL) {
            return Err(Error::InvalidParameter("single-photon block is not Hermitian".into()));
        }
        let inv_m = 1.0 / self.m as f64;
        for i in 0..self.m {
            if (self.block[(i, i)].re - inv_m).abs() > HERMITICITY_TOL
                || self.block[(i, i)].im.abs() > HERMITICITY_TOL
            {
                return Err(Error::InvalidParameter("block diagonal must equal 1/M".into()));
            }
        }
        let trace = self.embed().trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("state trace is {trace}")));
        }
        let min = Operator::new("block", self.block.clone()).min_eigenvalue();
        if min < PSD_TOL {
            return Err(Error::InvalidParameter(format!(
                "single-photon block has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// Build the stellar state for `m` telescopes at mean photon number
/// `epsilon` from a coherence set. Terms of order `ε²` are dropped by
/// construction.
pub fn build_stellar_state(m: usize, epsilon: f64, g: &CoherenceSet) -> Result<StellarState> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonRange(epsilon));
    }
    if epsilon > 0.1 {
        log::warn!("epsilon = {epsilon} is outside the weak-source regime; O(eps^2) terms are dropped");
    }
    if g.m() != m {
        return Err(Error::PairArity { m, expected: pair_count(m), got: pair_count(g.m()) });
    }
    let inv_m = Complex64::new(1.0 / m as f64, 0.0);
    let mut block = DMatrix::zeros(m, m);
    for i in 0..m {
        block[(i, i)] = inv_m;
        for j in (i + 1)..m {
            let gij = g.get(i, j);
            block[(i, j)] = gij * inv_m;
            block[(j, i)] = gij.conj() * inv_m;
        }
    }
    Ok(StellarState { epsilon, m, block })
}

/// Coherence values from a source model and baselines:
/// `g_XY = ∫ I(x) e^{i k_XY x} dx`.
pub fn coherence_from_source(src: &SourceModel, arr: &TelescopeArray) -> Result<CoherenceSet> {
    let baselines = arr.baselines().ok_or(Error::MissingBaselines)?;
    let mut entries = Vec::with_capacity(baselines.len());
    for &k in baselines {
        let mut g = src.fourier(k)?;
        let norm = g.norm();
        if norm > 1.0 + 1e-9 {
            return Err(Error::CoherenceBound(norm, format!("k = {k}")));
        }
        // Quadrature can overshoot the unit circle by roundoff.
        if norm > 1.0 {
            g /= norm;
        }
        entries.push(g);
    }
    CoherenceSet::new(arr.m(), entries)
}

/// Diagonal Kraus weights of one weak round with the given per-telescope
/// outcome bits, in the truncated basis (vacuum first).
fn kraus_diagonal(m: usize, tau: f64, outcomes: &[bool]) -> Vec<f64> {
    let survive = (1.0 - tau).sqrt();
    let click = tau.sqrt();
    let vac_amp: f64 = outcomes.iter().map(|&o| if o { click } else { survive }).product();
    let mut diag = Vec::with_capacity(m + 1);
    diag.push(vac_amp);
    for i in 0..m {
        let own = if outcomes[i] { 0.0 } else { 1.0 };
        let site = if outcomes[i] { click } else { survive };
        // Replace telescope i's vacuum factor with the photon factor.
        diag.push(if site == 0.0 { 0.0 } else { own * vac_amp / site });
    }
    diag
}

/// Apply one round of the weak measurement with strength `tau` and the given
/// per-telescope outcome bits (`true` selects the collapsing Kraus branch).
///
/// Returns the outcome probability and the renormalized post-measurement
/// operator on the truncated basis.
pub fn apply_weak_round(
    state: &StellarState,
    tau: f64,
    outcomes: &[bool],
) -> Result<(f64, Operator)> {
    apply_weak_round_op(&state.embed(), tau, outcomes)
}

/// Same update applied to an already-embedded truncated operator, used when
/// chaining rounds.
pub fn apply_weak_round_op(rho: &Operator, tau: f64, outcomes: &[bool]) -> Result<(f64, Operator)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::TauRange { tau, range: "(0, 1)" });
    }
    let m = rho.dim() - 1;
    if outcomes.len() != m {
        return Err(Error::DimensionMismatch { op: outcomes.len(), state: m });
    }
    let diag = kraus_diagonal(m, tau, outcomes);
    let mut post = rho.mat.clone();
    for i in 0..=m {
        for j in 0..=m {
            post[(i, j)] *= Complex64::new(diag[i] * diag[j], 0.0);
        }
    }
    let prob = post.trace().re;
    if prob < 1e-300 {
        return Err(Error::ImpossibleOutcome);
    }
    post /= Complex64::new(prob, 0.0);
    let tag: String = outcomes.iter().map(|&o| if o { '1' } else { '0' }).collect();
    Ok((prob, Operator::new(format!("post[{tag}]"), post)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn incoherent_state_is_diagonal() {
        let state = build_stellar_state(3, 0.01, &CoherenceSet::zero(3)).unwrap();
        assert_relative_eq!(state.vacuum_weight(), 0.99);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert_relative_eq!(state.single_photon_block()[(i, j)].re, expect);
                assert_relative_eq!(state.single_photon_block()[(i, j)].im, 0.0);
            }
        }
        state.check_invariants().unwrap();
    }

    #[test]
    fn coherence_entry_placement() {
        // g_AB must sit at block (A, B) with the 1/3 prefactor, conjugate below.
        let g_ab = c(0.3, 0.4);
        let mut entries = vec![c(0.0, 0.0); 3];
        entries[0] = g_ab;
        let g = CoherenceSet::new(3, entries).unwrap();
        let state = build_stellar_state(3, 0.02, &g).unwrap();
        let b = state.single_photon_block();
        assert_relative_eq!(b[(0, 1)].re, g_ab.re / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b[(0, 1)].im, g_ab.im / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b[(1, 0)].im, -g_ab.im / 3.0, epsilon = 1e-15);
        state.check_invariants().unwrap();
    }

    #[test]
    fn point_source_gives_rank_one_block() {
        let arr = TelescopeArray::from_positions(&[0.0, 1.3, 2.1, 5.0]).unwrap();
        let g = coherence_from_source(&SourceModel::Point { x0: 0.7 }, &arr).unwrap();
        for entry in g.entries() {
            assert_relative_eq!(entry.norm(), 1.0, epsilon = 1e-12);
        }
        let state = build_stellar_state(4, 0.01, &g).unwrap();
        let eig = state.single_photon_block().clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-10);
        for v in &vals[1..] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_source_gives_real_coherence() {
        let arr = TelescopeArray::from_positions(&[0.0, 0.8, 2.5]).unwrap();
        let g = coherence_from_source(
            &SourceModel::Uniform { center: 0.0, width: 2.0 },
            &arr,
        )
        .unwrap();
        for entry in g.entries() {
            assert!(entry.im.abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_source_matches_sinc() {
        let arr = TelescopeArray::with_baselines(2, vec![1.0]).unwrap();
        let g = coherence_from_source(
            &SourceModel::Uniform { center: 0.0, width: 2.0 },
            &arr,
        )
        .unwrap();
        let kw = 1.0_f64; // k w / 2 with k = 1, w = 2
        let exact = kw.sin() / kw;
        assert!((g.entries()[0].re - exact).abs() < 1e-8);
        assert!(g.entries()[0].im.abs() < 1e-12);
    }

    #[test]
    fn two_clicks_annihilate_single_photon_sector() {
        // Pure single-photon input: zero vacuum weight.
        let mut mat = DMatrix::zeros(4, 4);
        mat[(1, 1)] = c(1.0, 0.0);
        let rho = Operator::new("photon-at-A", mat);
        let err = apply_weak_round_op(&rho, 0.3, &[true, true, false]).unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome));
    }

    #[test]
    fn single_click_collapses_to_pair() {
        let m = 3;
        let eps = 0.01;
        let tau = 0.3;
        let g = CoherenceSet::uniform(m, c(0.5, 0.2)).unwrap();
        let state = build_stellar_state(m, eps, &g).unwrap();
        let (p, post) = apply_weak_round(&state, tau, &[false, false, true]).unwrap();
        let beta1 = (1.0 - tau) * (1.0 - tau) * tau;
        let gamma1 = (1.0 - tau) * tau;
        assert_relative_eq!(p, (1.0 - eps) * beta1 + 2.0 * gamma1 * eps / 3.0, epsilon = 1e-14);
        // Post state: rho_AB ⊗ |0><0|_C with beta_1, gamma_1 coefficients.
        assert_relative_eq!(post.mat[(0, 0)].re, beta1 * (1.0 - eps) / p, epsilon = 1e-13);
        assert_relative_eq!(post.mat[(1, 1)].re, gamma1 * eps / 3.0 / p, epsilon = 1e-13);
        assert_relative_eq!(post.mat[(1, 2)].re, gamma1 * eps / 3.0 * 0.5 / p, epsilon = 1e-13);
        assert_relative_eq!(post.mat[(3, 3)].norm(), 0.0, epsilon = 1e-15);
        assert!(post.is_hermitian(1e-12));
        assert!(post.min_eigenvalue() > PSD_TOL);
    }

    #[test]
    fn all_survive_leaves_block_unchanged() {
        let m = 3;
        let eps = 0.02;
        let tau = 0.25;
        let g = CoherenceSet::uniform(m, c(0.4, -0.1)).unwrap();
        let state = build_stellar_state(m, eps, &g).unwrap();
        let (p, post) = apply_weak_round(&state, tau, &[false, false, false]).unwrap();
        let expect_p = (1.0 - eps) * (1.0 - tau).powi(3) + eps * (1.0 - tau).powi(2);
        assert_relative_eq!(p, expect_p, epsilon = 1e-14);
        assert_relative_eq!(
            post.mat[(0, 0)].re,
            (1.0 - tau).powi(3) * (1.0 - eps) / p,
            epsilon = 1e-13
        );
        // Renormalized single-photon block must equal the input block entrywise.
        let photon_weight: f64 = (1..=m).map(|i| post.mat[(i, i)].re).sum();
        for i in 0..m {
            for j in 0..m {
                let renorm = post.mat[(i + 1, j + 1)] / Complex64::new(photon_weight, 0.0);
                assert!((renorm - state.single_photon_block()[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_completeness_over_outcomes() {
        for m in 2..=5 {
            let g = CoherenceSet::uniform(m, c(0.3, 0.25)).unwrap();
            let state = build_stellar_state(m, 0.05, &g).unwrap();
            let tau = 0.37;
            let mut total = 0.0;
            for bits in 0..(1u32 << m) {
                let outcomes: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
                match apply_weak_round(&state, tau, &outcomes) {
                    Ok((p, _)) => total += p,
                    Err(Error::ImpossibleOutcome) => {}
                    Err(e) => panic!("{e}"),
                }
            }
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn source_physicality_gives_psd_block() {
        let arr = TelescopeArray::from_positions(&[0.0, 1.0, 2.7, 4.2, 9.9]).unwrap();
        for src in [
            SourceModel::Uniform { center: 0.3, width: 1.7 },
            SourceModel::Gaussian { mean: -0.2, sigma: 0.9 },
            SourceModel::Tabulated {
                xs: vec![-1.0, 0.0, 0.5, 2.0],
                weights: vec![0.1, 0.4, 0.3, 0.2],
            },
        ] {
            let g = coherence_from_source(&src, &arr).unwrap();
            let state = build_stellar_state(5, 0.01, &g).unwrap();
            let min = Operator::new("b", state.single_photon_block().clone()).min_eigenvalue();
            assert!(min > PSD_TOL, "min eigenvalue {min} for {src:?}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = CoherenceSet::zero(3);
        assert!(matches!(build_stellar_state(3, 0.0, &g), Err(Error::EpsilonRange(_))));
        assert!(matches!(build_stellar_state(3, 1.0, &g), Err(Error::EpsilonRange(_))));
        assert!(CoherenceSet::uniform(3, c(1.2, 0.0)).is_err());
        assert!(CoherenceSet::new(3, vec![c(0.0, 0.0); 2]).is_err());
        let state = build_stellar_state(3, 0.01, &g).unwrap();
        assert!(apply_weak_round(&state, 1.5, &[false, false, false]).is_err());
        let unnorm = SourceModel::Tabulated { xs: vec![0.0, 1.0], weights: vec![0.5, 0.6] };
        let arr = TelescopeArray::from_positions(&[0.0, 1.0]).unwrap();
        assert!(coherence_from_source(&unnorm, &arr).is_err());
        let nobase = TelescopeArray::new(3).unwrap();
        assert!(matches!(
            coherence_from_source(&SourceModel::Point { x0: 0.0 }, &nobase),
            Err(Error::MissingBaselines)
        ));
    }
}
