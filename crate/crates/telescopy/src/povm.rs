//! Measurement families on the truncated space and Born-rule evaluation.
//!
//! Every builder returns a complete POVM: the listed informative elements
//! plus a computed complement labeled `fail`, verified to sum to the
//! identity and to be elementwise positive semidefinite. Outcome labels use
//! the canonical pair names from [`crate::pairs`], e.g. `AB+`, `AB:01`,
//! `AB:+-`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distill::DistillationYield;
use crate::error::{Error, Result};
use crate::pairs::{pair_count, pair_index, pair_label, pair_list};
use crate::state::{Operator, StellarState};

pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = -1e-10;
const HERM_TOL: f64 = 1e-12;

/// Measurement scheme selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Dual-rail photon sent to a coin-flipped pair; five outcomes per pair.
    GjcClassical,
    /// Weak-measurement pre-processing, then the dual-rail interference on
    /// the surviving pair.
    GjcQuantum,
    /// Coin-flipped pair, each member projecting onto its local coherent
    /// basis with a pairwise shared frame.
    LocalClassical,
    /// Weak-measurement pre-processing, then local coherent projections on
    /// the surviving pair.
    LocalQuantum,
    /// Dual-rail photons distributed to a full pairing of all telescopes
    /// (even counts only).
    AllPairsBipartite,
    /// Single-excitation entangled state shared by all telescopes;
    /// distribution built directly, no POVM builder.
    WState,
    /// Phase-locked local frames at every telescope; distribution built
    /// directly, no POVM builder.
    MultipartiteFrame,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::GjcClassical => "gjc_classical",
            Scheme::GjcQuantum => "gjc_quantum",
            Scheme::LocalClassical => "local_classical",
            Scheme::LocalQuantum => "local_quantum",
            Scheme::AllPairsBipartite => "all_pairs_bipartite",
            Scheme::WState => "w_state",
            Scheme::MultipartiteFrame => "multipartite_frame",
        }
    }

    /// Whether the scheme consumes distillation yields (γ_D, β_D).
    pub fn needs_yield(&self) -> bool {
        matches!(self, Scheme::GjcQuantum | Scheme::LocalQuantum)
    }
}

/// Measurement phase settings.
///
/// `Shared` applies one phase everywhere: pair-interference schemes read it
/// as the pair phase δ, per-telescope schemes as a common local phase (so
/// all pair differences vanish).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpec {
    Shared(f64),
    PerPair(Vec<f64>),
    PerTelescope(Vec<f64>),
}

impl PhaseSpec {
    pub fn validate(&self, m: usize) -> Result<()> {
        let check = |v: &[f64], expected: usize, what: &str| -> Result<()> {
            if v.len() != expected {
                return Err(Error::PhaseArity(format!(
                    "expected {expected} {what} phases for m = {m}, got {}",
                    v.len()
                )));
            }
            if v.iter().any(|p| !p.is_finite()) {
                return Err(Error::PhaseArity("phases must be finite".into()));
            }
            Ok(())
        };
        match self {
            PhaseSpec::Shared(d) if !d.is_finite() => {
                Err(Error::PhaseArity("phases must be finite".into()))
            }
            PhaseSpec::Shared(_) => Ok(()),
            PhaseSpec::PerPair(v) => check(v, pair_count(m), "per-pair"),
            PhaseSpec::PerTelescope(v) => check(v, m, "per-telescope"),
        }
    }

    /// Interference phase for the unordered pair `{i, j}` with `i < j`:
    /// `δ_i − δ_j` for per-telescope specifications.
    pub fn pair_delta(&self, m: usize, i: usize, j: usize) -> f64 {
        match self {
            PhaseSpec::Shared(d) => *d,
            PhaseSpec::PerPair(v) => v[pair_index(m, i, j)],
            PhaseSpec::PerTelescope(v) => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                v[a] - v[b]
            }
        }
    }

    /// Local phase at telescope `i`; defined only for shared or
    /// per-telescope specifications.
    pub fn telescope_delta(&self, i: usize) -> Result<f64> {
        match self {
            PhaseSpec::Shared(d) => Ok(*d),
            PhaseSpec::PerTelescope(v) => Ok(v[i]),
            PhaseSpec::PerPair(_) => Err(Error::PhaseArity(
                "per-pair phases cannot address a single telescope".into(),
            )),
        }
    }
}

/// Scheme plus its phase settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub scheme: Scheme,
    pub phases: PhaseSpec,
}

impl MeasurementSettings {
    pub fn new(scheme: Scheme, phases: PhaseSpec) -> Self {
        Self { scheme, phases }
    }

    pub fn shared(scheme: Scheme, delta: f64) -> Self {
        Self { scheme, phases: PhaseSpec::Shared(delta) }
    }
}

/// One labeled POVM element.
#[derive(Clone, Debug)]
pub struct PovmElement {
    pub label: String,
    pub operator: Operator,
}

/// A complete labeled POVM, including the computed `fail` complement.
#[derive(Clone, Debug)]
pub struct PovmSet {
    elements: Vec<PovmElement>,
    dim: usize,
}

impl PovmSet {
    /// Assemble from informative elements; the complement to the identity
    /// is computed, labeled `fail`, and appended. Fails if any element (or
    /// the complement) is not Hermitian PSD or if the set cannot tile the
    /// identity.
    pub fn assemble(informative: Vec<PovmElement>, dim: usize) -> Result<Self> {
        let mut sum: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
        for el in &informative {
            if el.operator.dim() != dim {
                return Err(Error::DimensionMismatch { op: el.operator.dim(), state: dim });
            }
            check_element(&el.operator)?;
            sum += &el.operator.mat;
        }
        let complement = DMatrix::identity(dim, dim) - sum;
        let fail = Operator::new("fail", complement);
        check_element(&fail)?;
        let mut elements = informative;
        elements.push(PovmElement { label: "fail".into(), operator: fail });
        Ok(Self { elements, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    /// Residual `max |Σ E − I|` over matrix entries.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum: DMatrix<Complex64> = DMatrix::zeros(self.dim, self.dim);
        for el in &self.elements {
            sum += &el.operator.mat;
        }
        let diff = sum - DMatrix::<Complex64>::identity(self.dim, self.dim);
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Re-verify completeness and per-element positivity.
    pub fn verify(&self) -> Result<()> {
        for el in &self.elements {
            check_element(&el.operator)?;
        }
        let residual = self.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidParameter(format!(
                "POVM completeness residual {residual:.3e}"
            )));
        }
        Ok(())
    }
}

fn check_element(op: &Operator) -> Result<()> {
    if !op.is_hermitian(HERM_TOL) {
        return Err(Error::InvalidParameter(format!("element {} is not Hermitian", op.label)));
    }
    let min = op.min_eigenvalue();
    if min < PSD_TOL {
        return Err(Error::InvalidParameter(format!(
            "element {} has negative eigenvalue {min:.3e}",
            op.label
        )));
    }
    Ok(())
}

/// Labeled probabilities of one measurement.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    entries: Vec<(String, f64)>,
}

impl OutcomeDistribution {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (label, p) in &entries {
            if *p < -1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "outcome {label} has negative probability {p:.3e}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "outcome probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, p)| *p).collect()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, p)| *p)
    }
}

/// Weak-measurement Kraus pair in the single-mode photon-number basis
/// (vacuum first): `M₀ = diag(√(1−τ), 1)`, `M₁ = diag(√τ, 0)`.
pub fn weak_kraus(tau: f64) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauRange { tau, range: "[0, 1]" });
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let m0 = Matrix2::new(c((1.0 - tau).sqrt()), c(0.0), c(0.0), c(1.0));
    let m1 = Matrix2::new(c(tau.sqrt()), c(0.0), c(0.0), c(0.0));
    Ok((m0, m1))
}

/// Verify that the weak Kraus pair is realized by a controlled rotation on
/// an ancilla qubit followed by an ancilla readout.
///
/// Builds `|0⟩⟨0|_s ⊗ U_a + |1⟩⟨1|_s ⊗ I_a` with
/// `U_a = [[√(1−τ), −√τ], [√τ, √(1−τ)]]`, applies it to `|ψ⟩_s ⊗ |0⟩_a`,
/// reads out the ancilla, and returns the larger entrywise deviation of the
/// two induced system operations from `M₀`/`M₁`.
pub fn ancilla_circuit_check(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::TauRange { tau, range: "(0, 1)" });
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let (s, w) = (tau.sqrt(), (1.0 - tau).sqrt());
    // Basis |system, ancilla>: 00, 01, 10, 11.
    #[rustfmt::skip]
    let circuit = Matrix4::new(
        c(w), c(-s), c(0.0), c(0.0),
        c(s), c(w),  c(0.0), c(0.0),
        c(0.0), c(0.0), c(1.0), c(0.0),
        c(0.0), c(0.0), c(0.0), c(1.0),
    );
    // Column of the ancilla prepared in |0>: system basis e maps the input
    // |e, 0> to the column 2e of the circuit.
    let (m0, m1) = weak_kraus(tau)?;
    let mut residual = 0.0f64;
    for sys_in in 0..2 {
        let col = circuit.column(2 * sys_in);
        for anc_out in 0..2 {
            for sys_out in 0..2 {
                let amp = col[2 * sys_out + anc_out];
                let expect = if anc_out == 0 { m0 } else { m1 };
                residual = residual.max((amp - expect[(sys_out, sys_in)]).norm());
            }
        }
    }
    Ok(residual)
}

/// Interference projector `|δ±⟩⟨δ±|` on the pair `{i, j}` embedded in the
/// truncated space, with `|δ±⟩ = (|e_j⟩ ± e^{iδ}|e_i⟩)/√2` for `i < j`.
fn delta_projector(dim: usize, i: usize, j: usize, delta: f64, plus: bool) -> DMatrix<Complex64> {
    let mut ket = DMatrix::<Complex64>::zeros(dim, 1);
    let sign = if plus { 1.0 } else { -1.0 };
    ket[(j + 1, 0)] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ket[(i + 1, 0)] = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2 * sign, delta);
    &ket * ket.adjoint()
}

/// Local coherent projector chain for one pair: the rank-1 part of
/// `P_{α_i} ⊗ P_{α_j} ⊗ I` on the truncated space. `sig_i`, `sig_j` are the
/// outcome signs `(−1)^α`.
fn local_pair_projector(
    dim: usize,
    i: usize,
    j: usize,
    delta_i: f64,
    delta_j: f64,
    sig_i: f64,
    sig_j: f64,
) -> DMatrix<Complex64> {
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    let quarter = Complex64::new(0.25, 0.0);
    for d in 0..dim {
        mat[(d, d)] = quarter;
    }
    mat[(0, i + 1)] = Complex64::from_polar(0.25 * sig_i, -delta_i);
    mat[(i + 1, 0)] = mat[(0, i + 1)].conj();
    mat[(0, j + 1)] = Complex64::from_polar(0.25 * sig_j, -delta_j);
    mat[(j + 1, 0)] = mat[(0, j + 1)].conj();
    mat[(i + 1, j + 1)] = Complex64::from_polar(0.25 * sig_i * sig_j, delta_i - delta_j);
    mat[(j + 1, i + 1)] = mat[(i + 1, j + 1)].conj();
    mat
}

fn alpha_label(pair: &str, sig_i: f64, sig_j: f64) -> String {
    let s = |x: f64| if x > 0.0 { '+' } else { '-' };
    format!("{pair}:{}{}", s(sig_i), s(sig_j))
}

/// Build the POVM for a scheme on `m` telescopes.
///
/// `yields` is required for the weak-measurement schemes (it supplies γ_D
/// and β_D) and ignored otherwise. `WState` and `MultipartiteFrame` have no
/// truncated-space POVM here; their distributions are built directly in the
/// Fisher module.
pub fn build_povm(
    settings: &MeasurementSettings,
    m: usize,
    yields: Option<&DistillationYield>,
) -> Result<PovmSet> {
    if m < 2 {
        return Err(Error::TooFewTelescopes(m));
    }
    settings.phases.validate(m)?;
    let dim = m + 1;
    let pairs = pair_list(m);
    let c_pairs = pair_count(m) as f64;
    let mut elements = Vec::new();
    let real = |x: f64| Complex64::new(x, 0.0);

    match settings.scheme {
        Scheme::GjcClassical => {
            for &(i, j) in &pairs {
                let delta = settings.phases.pair_delta(m, i, j);
                let pair = pair_label(i, j);
                // No terrestrial-photon click at either telescope: vacuum
                // or a photon elsewhere.
                let mut vac = DMatrix::<Complex64>::zeros(dim, dim);
                vac[(0, 0)] = real(1.0 / c_pairs);
                for z in 0..m {
                    if z != i && z != j {
                        vac[(z + 1, z + 1)] = real(1.0 / c_pairs);
                    }
                }
                elements.push(PovmElement {
                    label: format!("{pair}:00"),
                    operator: Operator::new(format!("{pair}:00"), vac),
                });
                for (slot, tel) in [(format!("{pair}:01"), j), (format!("{pair}:10"), i)] {
                    let mut single = DMatrix::<Complex64>::zeros(dim, dim);
                    single[(tel + 1, tel + 1)] = real(1.0 / (2.0 * c_pairs));
                    elements.push(PovmElement {
                        label: slot.clone(),
                        operator: Operator::new(slot, single),
                    });
                }
                for plus in [true, false] {
                    let label = format!("{pair}{}", if plus { '+' } else { '-' });
                    let mat = delta_projector(dim, i, j, delta, plus) / real(2.0 * c_pairs);
                    elements.push(PovmElement {
                        label: label.clone(),
                        operator: Operator::new(label, mat),
                    });
                }
            }
        }
        Scheme::GjcQuantum => {
            let y = yields.ok_or(Error::MissingYield("gjc_quantum"))?;
            for &(i, j) in &pairs {
                let delta = settings.phases.pair_delta(m, i, j);
                let pair = pair_label(i, j);
                for plus in [true, false] {
                    let label = format!("{pair}{}", if plus { '+' } else { '-' });
                    let mat = delta_projector(dim, i, j, delta, plus) * real(y.gamma_d / 2.0);
                    elements.push(PovmElement {
                        label: label.clone(),
                        operator: Operator::new(label, mat),
                    });
                }
            }
        }
        Scheme::AllPairsBipartite => {
            if m % 2 != 0 {
                return Err(Error::OddTelescopeCount(m));
            }
            let weight = 1.0 / (2.0 * (m as f64 - 1.0));
            for &(i, j) in &pairs {
                let delta = settings.phases.pair_delta(m, i, j);
                let pair = pair_label(i, j);
                for plus in [true, false] {
                    let label = format!("{pair}{}", if plus { '+' } else { '-' });
                    let mat = delta_projector(dim, i, j, delta, plus) * real(weight);
                    elements.push(PovmElement {
                        label: label.clone(),
                        operator: Operator::new(label, mat),
                    });
                }
            }
        }
        Scheme::LocalClassical => {
            for &(i, j) in &pairs {
                let di = settings.phases.telescope_delta(i)?;
                let dj = settings.phases.telescope_delta(j)?;
                let pair = pair_label(i, j);
                for sig_i in [1.0, -1.0] {
                    for sig_j in [1.0, -1.0] {
                        let label = alpha_label(&pair, sig_i, sig_j);
                        let mat = local_pair_projector(dim, i, j, di, dj, sig_i, sig_j)
                            / real(c_pairs);
                        elements.push(PovmElement {
                            label: label.clone(),
                            operator: Operator::new(label, mat),
                        });
                    }
                }
            }
        }
        Scheme::LocalQuantum => {
            let y = yields.ok_or(Error::MissingYield("local_quantum"))?;
            for &(i, j) in &pairs {
                let di = settings.phases.telescope_delta(i)?;
                let dj = settings.phases.telescope_delta(j)?;
                let delta = di - dj;
                let pair = pair_label(i, j);
                for sig_i in [1.0, -1.0] {
                    for sig_j in [1.0, -1.0] {
                        let label = alpha_label(&pair, sig_i, sig_j);
                        // Projecting the post-distillation pair state: the
                        // surviving vacuum weight splits evenly over the
                        // four sign outcomes, the photon part through the
                        // pair superposition selected by the sign parity.
                        let mut mat =
                            delta_projector(dim, i, j, delta, sig_i * sig_j > 0.0)
                                * real(y.gamma_d / 2.0);
                        mat[(0, 0)] += real(y.beta_d / 4.0);
                        elements.push(PovmElement {
                            label: label.clone(),
                            operator: Operator::new(label, mat),
                        });
                    }
                }
            }
        }
        Scheme::WState => return Err(Error::NoPovmBuilder("w_state")),
        Scheme::MultipartiteFrame => return Err(Error::NoPovmBuilder("multipartite_frame")),
    }

    PovmSet::assemble(elements, dim)
}

/// Born-rule probabilities of every POVM outcome against a stellar state.
pub fn born_distribution(povm: &PovmSet, state: &StellarState) -> Result<OutcomeDistribution> {
    let rho = state.embed();
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { op: povm.dim(), state: rho.dim() });
    }
    let entries = povm
        .elements()
        .iter()
        .map(|el| {
            let p = el.operator.expectation(&rho.mat)?.re;
            Ok((el.label.clone(), p.max(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::new(entries)
}
