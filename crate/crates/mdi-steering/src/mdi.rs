//! The measurement-device-independent layer: correlation tables produced by
//! feeding trusted quantum inputs into an untrusted joint measurement, linear
//! witness payoffs on those tables, the certified lower-bound program for the
//! steering measure, and detector loss/bias models.
//!
//! The only trusted objects are the input states {τ_y}; everything Alice and
//! the measurement apparatus do enters solely through the observed table
//! p(a,b|x,τ_y). The lower-bound program searches over witness coefficients
//! β̃ whose local bound is normalized to 1 by linear matrix inequalities, so
//! any payoff above 1 certifies steering no matter how the devices behave.

use crate::complex::{tensor_product, ComplexMatrix};
use crate::eig;
use crate::error::{Error, Result};
use crate::quantum::{pauli_input_states, HermitianOperator, Povm, State};
use crate::sdp::{self, LinearEqualities, SdpBlock, SdpProblem, SdpStatus};
use crate::steering::enumerate_strategies;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Entries this far below zero are treated as rounding dust and clamped.
pub const PROBABILITY_CLAMP: f64 = 1e-12;
/// Slack on the per-(x,y) normalization Σ_{a,b} p ≤ 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Absolute eigenvalue threshold for the tomographic-completeness rank check.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Relative eigenvalue threshold when building the span basis of the inputs.
const SPAN_BASIS_REL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// The trusted input states {τ_y} fed into Bob's side of the untrusted
/// measurement, with a record of whether they are tomographically complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InputsJson", into = "InputsJson")]
pub struct QuantumInputs {
    states: Vec<State>,
    complete: bool,
}

#[derive(Serialize, Deserialize)]
struct InputsJson {
    states: Vec<State>,
    complete: bool,
}

impl From<QuantumInputs> for InputsJson {
    fn from(q: QuantumInputs) -> Self {
        InputsJson { states: q.states, complete: q.complete }
    }
}

impl TryFrom<InputsJson> for QuantumInputs {
    type Error = Error;
    fn try_from(j: InputsJson) -> Result<Self> {
        let built = QuantumInputs::new(j.states)?;
        if built.complete != j.complete {
            return Err(Error::InvalidParameter(format!(
                "stored completeness flag {} contradicts the span rank check",
                j.complete
            )));
        }
        Ok(built)
    }
}

impl QuantumInputs {
    /// Validates the list and computes the completeness flag from the rank of
    /// the span of the states in Hermitian-operator space.
    pub fn new(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter("need at least one input state".into()));
        }
        let dim = states[0].dim();
        for (y, s) in states.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "input state {y} has dim {} ≠ {dim}",
                    s.dim()
                )));
            }
        }
        let complete = span_rank(&states)? == dim * dim;
        Ok(Self { states, complete })
    }

    /// The six Pauli eigenstates — the standard qubit tomography set.
    pub fn pauli() -> Self {
        Self::new(pauli_input_states()).expect("pauli inputs are valid")
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn n_inputs(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// The same input set with state `y` removed (flag recomputed).
    pub fn without(&self, y: usize) -> Result<Self> {
        if y >= self.states.len() {
            return Err(Error::InvalidParameter(format!("no input state {y}")));
        }
        let mut states = self.states.clone();
        states.remove(y);
        Self::new(states)
    }
}

/// Frobenius Gram matrix G_{yz} = Tr(τ_y τ_z) of the input states, as a real
/// symmetric matrix; its rank equals the dimension of their span.
fn input_gram(states: &[State]) -> ComplexMatrix {
    let n = states.len();
    let mut g = ComplexMatrix::zeros(n, n);
    for y in 0..n {
        for z in 0..n {
            let v = states[y].matrix().inner(states[z].matrix());
            g[(y, z)] = num_complex::Complex64::new(v, 0.0);
        }
    }
    g
}

fn span_rank(states: &[State]) -> Result<usize> {
    let vals = eig::hermitian_eigenvalues(&input_gram(states))?;
    Ok(vals.iter().filter(|v| **v > COMPLETENESS_TOL).count())
}

/// True exactly when the states span the full d²-dimensional Hermitian space,
/// so that an arbitrary effect can be reconstructed from their statistics.
pub fn completeness_check(inputs: &QuantumInputs) -> bool {
    span_rank(inputs.states()).map(|r| r == inputs.dim() * inputs.dim()).unwrap_or(false)
}

/// The observed table p(a,b|x,τ_y), indexed (a, b, x, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationJson", into = "CorrelationJson")]
pub struct CorrelationTensor {
    dims: (usize, usize, usize, usize),
    lossless: bool,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson {
    dims: (usize, usize, usize, usize),
    lossless: bool,
    values: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<CorrelationTensor> for CorrelationJson {
    fn from(t: CorrelationTensor) -> Self {
        let (na, nb, nx, ny) = t.dims;
        let values = (0..na)
            .map(|a| {
                (0..nb)
                    .map(|b| {
                        (0..nx)
                            .map(|x| (0..ny).map(|y| t.value(a, b, x, y)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CorrelationJson { dims: t.dims, lossless: t.lossless, values }
    }
}

impl TryFrom<CorrelationJson> for CorrelationTensor {
    type Error = Error;
    fn try_from(j: CorrelationJson) -> Result<Self> {
        CorrelationTensor::new(j.values, j.lossless)
    }
}

impl CorrelationTensor {
    /// Builds a table from nested values `[a][b][x][y]`, clamping entries in
    /// [−1e-12, 0) to zero and rejecting anything more negative. When
    /// `lossless` is claimed, every (x,y) marginal must sum to 1 within 1e-9.
    pub fn new(values: Vec<Vec<Vec<Vec<f64>>>>, lossless: bool) -> Result<Self> {
        let na = values.len();
        let nb = values.first().map_or(0, |v| v.len());
        let nx = values.first().and_then(|v| v.first()).map_or(0, |v| v.len());
        let ny = values
            .first()
            .and_then(|v| v.first())
            .and_then(|v| v.first())
            .map_or(0, |v| v.len());
        if na == 0 || nb == 0 || nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("empty correlation tensor".into()));
        }
        let mut flat = Vec::with_capacity(na * nb * nx * ny);
        for (a, va) in values.iter().enumerate() {
            if va.len() != nb {
                return Err(Error::DimensionMismatch(format!("ragged tensor at a={a}")));
            }
            for (b, vb) in va.iter().enumerate() {
                if vb.len() != nx {
                    return Err(Error::DimensionMismatch(format!("ragged tensor at ({a},{b})")));
                }
                for (x, vx) in vb.iter().enumerate() {
                    if vx.len() != ny {
                        return Err(Error::DimensionMismatch(format!(
                            "ragged tensor at ({a},{b},{x})"
                        )));
                    }
                    flat.extend_from_slice(vx);
                }
            }
        }
        Self::from_flat((na, nb, nx, ny), flat, lossless)
    }

    fn from_flat(dims: (usize, usize, usize, usize), mut flat: Vec<f64>, lossless: bool) -> Result<Self> {
        let (na, nb, nx, ny) = dims;
        debug_assert_eq!(flat.len(), na * nb * nx * ny);
        for p in flat.iter_mut() {
            if !p.is_finite() || *p < -PROBABILITY_CLAMP {
                return Err(Error::InvalidParameter(format!("correlation entry {p} is not a probability")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let t = Self { dims, lossless, values: flat };
        for x in 0..nx {
            for y in 0..ny {
                let mut sum = 0.0;
                for a in 0..na {
                    for b in 0..nb {
                        sum += t.value(a, b, x, y);
                    }
                }
                if sum > 1.0 + NORMALIZATION_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "probabilities at (x={x},y={y}) sum to {sum}"
                    )));
                }
                if lossless && sum < 1.0 - NORMALIZATION_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "lossless table sums to {sum} at (x={x},y={y})"
                    )));
                }
            }
        }
        Ok(t)
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        let (_, nb, nx, ny) = self.dims;
        ((a * nb + b) * nx + x) * ny + y
    }

    /// p(a,b|x,τ_y).
    pub fn value(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.values[self.idx(a, b, x, y)]
    }

    /// (|A|, |B|, |X|, |Y|).
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        self.dims
    }

    pub fn lossless(&self) -> bool {
        self.lossless
    }

    /// The table with input column `y` deleted.
    pub fn without_input(&self, y: usize) -> Result<Self> {
        let (na, nb, nx, ny) = self.dims;
        if y >= ny {
            return Err(Error::InvalidParameter(format!("no input column {y}")));
        }
        let mut flat = Vec::with_capacity(na * nb * nx * (ny - 1));
        for a in 0..na {
            for b in 0..nb {
                for x in 0..nx {
                    for yy in 0..ny {
                        if yy != y {
                            flat.push(self.value(a, b, x, yy));
                        }
                    }
                }
            }
        }
        Self::from_flat((na, nb, nx, ny - 1), flat, self.lossless)
    }
}

/// Real witness coefficients β̃^{x,y}_{a,b}, indexed like the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientsJson", into = "CoefficientsJson")]
pub struct WitnessCoefficients {
    dims: (usize, usize, usize, usize),
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientsJson {
    dims: (usize, usize, usize, usize),
    values: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<WitnessCoefficients> for CoefficientsJson {
    fn from(t: WitnessCoefficients) -> Self {
        let (na, nb, nx, ny) = t.dims;
        let values = (0..na)
            .map(|a| {
                (0..nb)
                    .map(|b| {
                        (0..nx)
                            .map(|x| (0..ny).map(|y| t.value(a, b, x, y)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CoefficientsJson { dims: t.dims, values }
    }
}

impl TryFrom<CoefficientsJson> for WitnessCoefficients {
    type Error = Error;
    fn try_from(j: CoefficientsJson) -> Result<Self> {
        let flat: Vec<f64> = j.values.iter().flatten().flatten().flatten().copied().collect();
        let (na, nb, nx, ny) = j.dims;
        if flat.len() != na * nb * nx * ny {
            return Err(Error::DimensionMismatch("coefficient tensor shape".into()));
        }
        WitnessCoefficients::from_flat(j.dims, flat)
    }
}

impl WitnessCoefficients {
    fn from_flat(dims: (usize, usize, usize, usize), values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite witness coefficient".into()));
        }
        Ok(Self { dims, values })
    }

    /// All-zero coefficients of the given shape.
    pub fn zeros(dims: (usize, usize, usize, usize)) -> Self {
        Self { dims, values: vec![0.0; dims.0 * dims.1 * dims.2 * dims.3] }
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        self.dims
    }

    /// β̃^{x,y}_{a,b}.
    pub fn value(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let (_, nb, nx, ny) = self.dims;
        self.values[((a * nb + b) * nx + x) * ny + y]
    }

    fn set(&mut self, a: usize, b: usize, x: usize, y: usize, v: f64) {
        let (_, nb, nx, ny) = self.dims;
        self.values[((a * nb + b) * nx + x) * ny + y] = v;
    }
}

/// Detector imperfections: an overall loss rate η and per-outcome relative
/// detection rates ξ_b normalized to Σ_b ξ_b = 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseJson", into = "NoiseJson")]
pub struct NoiseSpec {
    pub eta: f64,
    pub xi: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct NoiseJson {
    eta: f64,
    xi: [f64; 4],
}

impl From<NoiseSpec> for NoiseJson {
    fn from(n: NoiseSpec) -> Self {
        NoiseJson { eta: n.eta, xi: n.xi }
    }
}

impl TryFrom<NoiseJson> for NoiseSpec {
    type Error = Error;
    fn try_from(j: NoiseJson) -> Result<Self> {
        NoiseSpec::new(j.eta, j.xi)
    }
}

impl NoiseSpec {
    pub fn new(eta: f64, xi: [f64; 4]) -> Result<Self> {
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("loss rate {eta} outside [0,1]")));
        }
        validate_xi(&xi)?;
        Ok(Self { eta, xi })
    }

    /// A perfect detector: η = 1, uniform ξ.
    pub fn ideal() -> Self {
        Self { eta: 1.0, xi: [1.0; 4] }
    }
}

fn validate_xi(xi: &[f64; 4]) -> Result<()> {
    let mut sum = 0.0;
    for v in xi {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::InvalidParameter(format!("detection rate {v} is negative")));
        }
        sum += v;
    }
    if (sum - 4.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("detection rates sum to {sum}, expected 4")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Correlations and payoffs
// ---------------------------------------------------------------------------

/// p(a,b|x,τ_y) = Tr[E_b (σ_{a|x} ⊗ τ_y)] for every table entry. Bob's POVM
/// acts on the joint space of his share and the quantum input.
pub fn correlations(
    asm: &crate::steering::Assemblage,
    inputs: &QuantumInputs,
    bob: &Povm,
) -> Result<CorrelationTensor> {
    let d_b = asm.dim();
    let d_in = inputs.dim();
    if bob.dim() != d_b * d_in {
        return Err(Error::DimensionMismatch(format!(
            "joint measurement dim {} ≠ {}·{}",
            bob.dim(),
            d_b,
            d_in
        )));
    }
    let (na, nb, nx, ny) = (asm.n_outcomes(), bob.n_outcomes(), asm.n_settings(), inputs.n_inputs());
    let mut flat = Vec::with_capacity(na * nb * nx * ny);
    for a in 0..na {
        for b in 0..nb {
            for x in 0..nx {
                for y in 0..ny {
                    let joint = tensor_product(asm.member(a, x).matrix(), inputs.states()[y].matrix());
                    flat.push(bob.effects()[b].matrix().inner(&joint));
                }
            }
        }
    }
    CorrelationTensor::from_flat((na, nb, nx, ny), flat, true)
}

/// W_b(𝐏, β̃) = Σ_{a,x,y} β̃^{x,y}_{a,b} · p(a,b|x,τ_y) at a fixed outcome b.
pub fn payoff(p: &CorrelationTensor, beta: &WitnessCoefficients, b: usize) -> Result<f64> {
    if p.dims() != beta.dims() {
        return Err(Error::DimensionMismatch(format!(
            "table dims {:?} ≠ coefficient dims {:?}",
            p.dims(),
            beta.dims()
        )));
    }
    let (na, nb, nx, ny) = p.dims();
    if b >= nb {
        return Err(Error::InvalidParameter(format!("outcome {b} out of range {nb}")));
    }
    let mut acc = 0.0;
    for a in 0..na {
        for x in 0..nx {
            for y in 0..ny {
                acc += beta.value(a, b, x, y) * p.value(a, b, x, y);
            }
        }
    }
    Ok(acc)
}

/// The supremum of the payoff over local-hidden-state tables, evaluated for
/// the maximally entangled effect: max_λ λmax(Σ_{x,y} β̃^{x,y}_{D(x,λ),b} τ_yᵀ)/d.
pub fn lhs_payoff_bound(beta: &WitnessCoefficients, inputs: &QuantumInputs, b: usize) -> Result<f64> {
    let (na, nb, nx, ny) = beta.dims();
    if b >= nb {
        return Err(Error::InvalidParameter(format!("outcome {b} out of range {nb}")));
    }
    if ny != inputs.n_inputs() {
        return Err(Error::DimensionMismatch(format!(
            "coefficients expect {ny} inputs, given {}",
            inputs.n_inputs()
        )));
    }
    let d = inputs.dim();
    let transposed: Vec<ComplexMatrix> =
        inputs.states().iter().map(|s| s.matrix().transpose()).collect();
    let strategies = enumerate_strategies(nx, na)?;
    let mut bound = f64::NEG_INFINITY;
    for strat in &strategies {
        let mut m = ComplexMatrix::zeros(d, d);
        for (x, &a) in strat.assignment.iter().enumerate() {
            for (y, tau_t) in transposed.iter().enumerate() {
                let w = beta.value(a, b, x, y);
                if w != 0.0 {
                    m = m.add(&tau_t.scale(w));
                }
            }
        }
        let op = HermitianOperator::symmetrized(m)?;
        bound = bound.max(op.max_eigenvalue());
    }
    Ok(bound / d as f64)
}

// ---------------------------------------------------------------------------
// The lower-bound program
// ---------------------------------------------------------------------------

/// A real basis for the span of the input states: coefficient vectors u_k over
/// the inputs (orthonormal eigenvectors of the Gram matrix) together with the
/// operators U_k = Σ_y u_k[y]·τ_y they generate.
fn input_span_basis(inputs: &QuantumInputs) -> Result<(Vec<Vec<f64>>, Vec<ComplexMatrix>)> {
    let states = inputs.states();
    let ny = states.len();
    let (vals, vecs) = eig::hermitian_eigen(&input_gram(states))?;
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut coeffs = Vec::new();
    let mut ops = Vec::new();
    for k in (0..ny).rev() {
        if vals[k] <= SPAN_BASIS_REL_TOL * top {
            break;
        }
        let u: Vec<f64> = (0..ny).map(|y| vecs[(y, k)].re).collect();
        let mut m = ComplexMatrix::zeros(inputs.dim(), inputs.dim());
        for (y, s) in states.iter().enumerate() {
            if u[y] != 0.0 {
                m = m.add(&s.matrix().scale(u[y]));
            }
        }
        coeffs.push(u);
        ops.push(m);
    }
    Ok((coeffs, ops))
}

/// Solves the witness optimization at one outcome: maximize the payoff W_b
/// over coefficients whose local bound is capped at 1 by the constraints
///   d𝟙 − Σ_{x,y} β̃^{x,y}_{D(x,λ),b} τ_y ⪰ 0  for every strategy λ,
///   Σ_y β̃^{x,y}_{a,b} τ_y ⪰ 0               for every (a,x).
/// Coefficients are parametrized over the span basis of the inputs: linearly
/// dependent input sets (like the six Pauli states) leave β̃ directions that
/// cancel inside every constraint, and on noisy tables those directions would
/// make the objective unbounded. Restricting to the span is equivalent to
/// projecting the table onto its physically determined part.
fn witness_program(
    p: &CorrelationTensor,
    inputs: &QuantumInputs,
    b: usize,
) -> Result<(f64, WitnessCoefficients)> {
    let (na, nb, nx, ny) = p.dims();
    if b >= nb {
        return Err(Error::InvalidParameter(format!("outcome {b} out of range {nb}")));
    }
    if ny != inputs.n_inputs() {
        return Err(Error::DimensionMismatch(format!(
            "table expects {ny} inputs, given {}",
            inputs.n_inputs()
        )));
    }
    let d = inputs.dim();
    let (span_coeffs, span_ops) = input_span_basis(inputs)?;
    let r = span_coeffs.len();
    let strategies = enumerate_strategies(nx, na)?;
    let n_vars = na * nx * r;
    let var = |a: usize, x: usize, k: usize| (a * nx + x) * r + k;

    // Maximize Σ z·q by minimizing its negation.
    let mut c = vec![0.0; n_vars];
    for a in 0..na {
        for x in 0..nx {
            for (k, u) in span_coeffs.iter().enumerate() {
                let q: f64 = (0..ny).map(|y| u[y] * p.value(a, b, x, y)).sum();
                c[var(a, x, k)] = -q;
            }
        }
    }

    let zero = HermitianOperator::zeros(d);
    let span_herm: Vec<HermitianOperator> = span_ops
        .iter()
        .map(|m| HermitianOperator::symmetrized(m.clone()))
        .collect::<Result<_>>()?;
    let mut blocks = Vec::with_capacity(strategies.len() + na * nx);
    for strat in &strategies {
        let mut mats = Vec::with_capacity(n_vars + 1);
        mats.push(HermitianOperator::new(ComplexMatrix::identity(d).scale(d as f64))?);
        for a in 0..na {
            for x in 0..nx {
                for uk in span_herm.iter() {
                    if strat.assignment[x] == a {
                        mats.push(HermitianOperator::new(uk.matrix().scale(-1.0))?);
                    } else {
                        mats.push(zero.clone());
                    }
                }
            }
        }
        blocks.push(SdpBlock { matrices: mats });
    }
    for a in 0..na {
        for x in 0..nx {
            let mut mats = Vec::with_capacity(n_vars + 1);
            mats.push(zero.clone());
            for a2 in 0..na {
                for x2 in 0..nx {
                    for uk in span_herm.iter() {
                        if (a2, x2) == (a, x) {
                            mats.push(uk.clone());
                        } else {
                            mats.push(zero.clone());
                        }
                    }
                }
            }
            blocks.push(SdpBlock { matrices: mats });
        }
    }

    let problem = SdpProblem::new(c, blocks, LinearEqualities::none())?;
    let sol = sdp::solve(&problem, 1e-9);
    if sol.status != SdpStatus::Optimal {
        // The strategy constraints cap every feasible payoff, so a failure
        // here is a solver breakdown, not an unbounded program.
        return Err(Error::SolverFailure(format!(
            "witness optimization: {:?}: {}",
            sol.status, sol.diagnostics
        )));
    }
    let w = -sol.primal_value;
    let mut beta = WitnessCoefficients::zeros((na, nb, nx, ny));
    for a in 0..na {
        for x in 0..nx {
            for y in 0..ny {
                let v: f64 = span_coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, u)| sol.x[var(a, x, k)] * u[y])
                    .sum();
                beta.set(a, b, x, y, v);
            }
        }
    }
    Ok((w, beta))
}

/// The largest payoff any normalized witness reaches on this table at outcome
/// b — the quantity that is exactly homogeneous under scaling of the table.
pub fn max_witness_payoff(p: &CorrelationTensor, inputs: &QuantumInputs, b: usize) -> Result<f64> {
    sdp::audit::with_label("mdi-witness", || witness_program(p, inputs, b)).map(|(w, _)| w)
}

/// Certified lower bound on the steering measure from a single outcome:
/// max{W_b − 1, 0}, together with the optimal coefficients. Sound for any
/// input set; incomplete inputs can only lower the value.
pub fn mdi_sm_lb(
    p: &CorrelationTensor,
    inputs: &QuantumInputs,
    b: usize,
) -> Result<(f64, WitnessCoefficients)> {
    let (w, beta) = sdp::audit::with_label("mdi-witness", || witness_program(p, inputs, b))?;
    Ok(((w - 1.0).max(0.0), beta))
}

/// The four-outcome averaged estimator max{(1/4)Σ_b W_b − 1, 0}. Averaging
/// the unclamped payoffs is what keeps the estimator faithful: a biased
/// detector can push one outcome's payoff above 1, but never the mean.
pub fn mdi_sm_avg(p: &CorrelationTensor, inputs: &QuantumInputs) -> Result<f64> {
    let (_, nb, _, _) = p.dims();
    if nb != 4 {
        return Err(Error::InvalidParameter(format!(
            "averaged estimator needs all 4 outcomes, table has {nb}"
        )));
    }
    // The per-outcome solves are independent; carry the audit label onto the
    // worker threads so the records stay attributable.
    let label = sdp::audit::current_label();
    let payoffs: Result<Vec<f64>> = (0..4usize)
        .into_par_iter()
        .map(|b| {
            let run = || witness_program(p, inputs, b).map(|(w, _)| w);
            if label.is_empty() {
                sdp::audit::with_label("mdi-witness", run)
            } else {
                sdp::audit::with_label(&label, || sdp::audit::with_label("mdi-witness", run))
            }
        })
        .collect();
    let payoffs = payoffs?;
    let mean = payoffs.iter().sum::<f64>() / 4.0;
    Ok((mean - 1.0).max(0.0))
}

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

/// Uniform detection loss: every entry scaled by η; the lossless flag is
/// cleared for η < 1.
pub fn apply_loss(p: &CorrelationTensor, eta: f64) -> Result<CorrelationTensor> {
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("loss rate {eta} outside [0,1]")));
    }
    let flat = p.values.iter().map(|v| v * eta).collect();
    CorrelationTensor::from_flat(p.dims, flat, p.lossless && eta == 1.0)
}

/// Outcome-dependent detection bias: entry (a,b,x,y) scaled by ξ_b. The
/// lossless flag survives only when the rescaled marginals still sum to 1.
pub fn apply_bias(p: &CorrelationTensor, xi: &[f64; 4]) -> Result<CorrelationTensor> {
    validate_xi(xi)?;
    let (na, nb, nx, ny) = p.dims();
    if nb != 4 {
        return Err(Error::InvalidParameter(format!(
            "bias model needs 4 outcomes, table has {nb}"
        )));
    }
    let mut flat = Vec::with_capacity(p.values.len());
    for a in 0..na {
        for b in 0..nb {
            for x in 0..nx {
                for y in 0..ny {
                    flat.push(xi[b] * p.value(a, b, x, y));
                }
            }
        }
    }
    let mut lossless = p.lossless;
    if lossless {
        'outer: for x in 0..nx {
            for y in 0..ny {
                let mut sum = 0.0;
                for a in 0..na {
                    for b in 0..nb {
                        sum += flat[((a * nb + b) * nx + x) * ny + y];
                    }
                }
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    lossless = false;
                    break 'outer;
                }
            }
        }
    }
    CorrelationTensor::from_flat(p.dims, flat, lossless)
}
