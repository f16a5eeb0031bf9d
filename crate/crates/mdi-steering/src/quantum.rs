//! Quantum domain objects: Hermitian operators, states, POVMs, measurement
//! assemblies, and the fixed constructions of the steering scenario (Bell
//! basis, Werner family, Pauli MUB settings, Pauli eigenstate inputs).
//!
//! Conventions, fixed once for the whole workspace:
//! - computational basis |0⟩ ≙ H, |1⟩ ≙ V;
//! - Bell ordering (Φ+, Φ−, Ψ+, Ψ−) with |Φ±⟩ = (|00⟩ ± |11⟩)/√2 and
//!   |Ψ±⟩ = (|01⟩ ± |10⟩)/√2;
//! - Pauli setting order X, Y, Z, outcome order (+, −).

use crate::complex::ComplexMatrix;
use crate::eig;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Entrywise Hermiticity tolerance for operator construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// PSD slack for states and POVM effects.
pub const PSD_TOL: f64 = 1e-10;
/// Trace/completeness tolerance for states and POVMs.
pub const TRACE_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity to 1e-12 entrywise.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("Hermitian operator must be square".into()));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev: dev, tol: HERMITICITY_TOL });
        }
        // Store the exactly-Hermitian average so downstream algebra never
        // re-encounters the (sub-tolerance) asymmetry.
        Ok(Self { matrix: matrix.hermitize() })
    }

    /// Accepts any square matrix and symmetrizes it; for internal sums whose
    /// drift is far below the tolerance but should not accumulate.
    pub fn symmetrized(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("Hermitian operator must be square".into()));
        }
        Ok(Self { matrix: matrix.hermitize() })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hilbert-Schmidt pairing Tr(self · other), real for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> f64 {
        self.matrix.inner(&other.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        eig::max_eigenvalue_of(&self.matrix).expect("Hermitian by construction")
    }
}

/// JSON form of an operator: `{dim, re[][], im[][]}` at full double precision.
#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<HermitianOperator> for OperatorJson {
    fn from(op: HermitianOperator) -> Self {
        let d = op.dim();
        let mut re = vec![vec![0.0; d]; d];
        let mut im = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                re[i][j] = op.matrix[(i, j)].re;
                im[i][j] = op.matrix[(i, j)].im;
            }
        }
        OperatorJson { dim: d, re, im }
    }
}

impl TryFrom<OperatorJson> for HermitianOperator {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self> {
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(Error::DimensionMismatch("operator JSON row count differs from dim".into()));
        }
        let m = ComplexMatrix::from_re_im(&j.re, &j.im)?;
        if m.cols() != j.dim {
            return Err(Error::DimensionMismatch("operator JSON column count differs from dim".into()));
        }
        HermitianOperator::new(m)
    }
}

/// A density operator: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct State {
    op: HermitianOperator,
}

impl State {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1 within {TRACE_TOL:.1e}")));
        }
        let lo = op.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {lo:.3e} below -{PSD_TOL:.1e}")));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

impl TryFrom<HermitianOperator> for State {
    type Error = Error;
    fn try_from(op: HermitianOperator) -> Result<Self> {
        State::new(op)
    }
}

impl From<State> for HermitianOperator {
    fn from(s: State) -> Self {
        s.op
    }
}

/// A positive-operator-valued measure: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HermitianOperator>", into = "Vec<HermitianOperator>")]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let dim = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::InvalidPovm(format!("effect {i} has dim {} ≠ {dim}", e.dim())));
            }
            let lo = e.min_eigenvalue();
            if lo < -PSD_TOL {
                return Err(Error::InvalidPovm(format!("effect {i} has eigenvalue {lo:.3e}")));
            }
            sum = sum.add(e.matrix());
        }
        let dev = sum.sub(&ComplexMatrix::identity(dim)).max_abs();
        if dev > TRACE_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum deviates from identity by {dev:.3e} (tol {TRACE_TOL:.1e})"
            )));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }
}

impl TryFrom<Vec<HermitianOperator>> for Povm {
    type Error = Error;
    fn try_from(effects: Vec<HermitianOperator>) -> Result<Self> {
        Povm::new(effects)
    }
}

impl From<Povm> for Vec<HermitianOperator> {
    fn from(p: Povm) -> Self {
        p.effects
    }
}

/// An ordered family of POVMs (one per measurement setting), uniform in
/// dimension and outcome count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Povm>", into = "Vec<Povm>")]
pub struct MeasurementAssembly {
    settings: Vec<Povm>,
}

impl MeasurementAssembly {
    pub fn new(settings: Vec<Povm>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidPovm("assembly needs at least one setting".into()));
        }
        let dim = settings[0].dim();
        let n_out = settings[0].n_outcomes();
        for (x, p) in settings.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(format!("setting {x} has dim {} ≠ {dim}", p.dim())));
            }
            if p.n_outcomes() != n_out {
                return Err(Error::InvalidPovm(format!(
                    "setting {x} has {} outcomes, expected {n_out}",
                    p.n_outcomes()
                )));
            }
        }
        Ok(Self { settings })
    }

    pub fn settings(&self) -> &[Povm] {
        &self.settings
    }

    pub fn n_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.settings[0].n_outcomes()
    }

    pub fn dim(&self) -> usize {
        self.settings[0].dim()
    }

    /// Effect E_{a|x}.
    pub fn effect(&self, a: usize, x: usize) -> &HermitianOperator {
        &self.settings[x].effects()[a]
    }
}

impl TryFrom<Vec<Povm>> for MeasurementAssembly {
    type Error = Error;
    fn try_from(settings: Vec<Povm>) -> Result<Self> {
        MeasurementAssembly::new(settings)
    }
}

impl From<MeasurementAssembly> for Vec<Povm> {
    fn from(m: MeasurementAssembly) -> Self {
        m.settings
    }
}

/// Which tensor factor to trace (or transpose) over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace over one factor of H_A ⊗ H_B.
pub fn partial_trace(m: &ComplexMatrix, subsystem: Subsystem, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if m.rows() != da * db || m.cols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected {0}x{0} with {0} = {da}*{db}",
            m.rows(),
            m.cols()
        )));
    }
    match subsystem {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(db, db);
            for ib in 0..db {
                for jb in 0..db {
                    let mut acc = c(0.0, 0.0);
                    for ia in 0..da {
                        acc += m[(ia * db + ib, ia * db + jb)];
                    }
                    out[(ib, jb)] = acc;
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(da, da);
            for ia in 0..da {
                for ja in 0..da {
                    let mut acc = c(0.0, 0.0);
                    for ib in 0..db {
                        acc += m[(ia * db + ib, ja * db + ib)];
                    }
                    out[(ia, ja)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Partial transpose on the B factor of H_A ⊗ H_B.
pub fn partial_transpose_b(m: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if m.rows() != da * db || m.cols() != da * db {
        return Err(Error::DimensionMismatch("partial transpose dims do not match matrix".into()));
    }
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for ia in 0..da {
        for ja in 0..da {
            for ib in 0..db {
                for jb in 0..db {
                    out[(ia * db + ib, ja * db + jb)] = m[(ia * db + jb, ja * db + ib)];
                }
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a Hermitian operator (Jacobi, ~1e-15 accurate,
/// documented bound 1e-10 relative to the spectral norm).
pub fn min_eigenvalue(op: &HermitianOperator) -> f64 {
    eig::min_eigenvalue_of(op.matrix()).expect("operator is Hermitian by construction")
}

/// Pauli X.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
}

/// Pauli Y.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap()
}

/// Pauli Z.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap()
}

/// The four Bell vectors in the fixed order (Φ+, Φ−, Ψ+, Ψ−).
pub fn bell_vectors() -> [[Complex64; 4]; 4] {
    let s = 1.0 / 2.0_f64.sqrt();
    [
        [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)],
        [c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)],
    ]
}

/// The Bell-state measurement: four rank-1 projectors onto (Φ+, Φ−, Ψ+, Ψ−).
pub fn bell_povm() -> Povm {
    let effects = bell_vectors()
        .iter()
        .map(|v| HermitianOperator::new(ComplexMatrix::projector(v)).unwrap())
        .collect();
    Povm::new(effects).expect("Bell projectors form a POVM")
}

/// Werner state v·|ψ−⟩⟨ψ−| + (1−v)/4·𝟙 on two qubits.
pub fn werner_state(v: f64) -> Result<State> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("visibility {v} outside [0,1]")));
    }
    let s = 1.0 / 2.0_f64.sqrt();
    let psi_minus = [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)];
    let proj = ComplexMatrix::projector(&psi_minus);
    let mix = proj.scale(v).add(&ComplexMatrix::identity(4).scale((1.0 - v) / 4.0));
    State::new(HermitianOperator::new(mix)?)
}

/// The three-setting Pauli MUB assembly: ± eigenprojector pairs of X, Y, Z.
pub fn pauli_mub_assembly() -> MeasurementAssembly {
    let half = |p: &ComplexMatrix, sign: f64| {
        HermitianOperator::new(ComplexMatrix::identity(2).add(&p.scale(sign)).scale(0.5)).unwrap()
    };
    let settings = [pauli_x(), pauli_y(), pauli_z()]
        .iter()
        .map(|p| Povm::new(vec![half(p, 1.0), half(p, -1.0)]).unwrap())
        .collect();
    MeasurementAssembly::new(settings).expect("Pauli settings are well-formed")
}

/// The six Pauli eigenstates in the order X+, X−, Y+, Y−, Z+, Z−.
pub fn pauli_input_states() -> Vec<State> {
    let vecs: [[Complex64; 2]; 6] = [
        [c(1.0, 0.0), c(1.0, 0.0)],
        [c(1.0, 0.0), c(-1.0, 0.0)],
        [c(1.0, 0.0), c(0.0, 1.0)],
        [c(1.0, 0.0), c(0.0, -1.0)],
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
    ];
    vecs.iter()
        .map(|v| State::new(HermitianOperator::new(ComplexMatrix::projector(v)).unwrap()).unwrap())
        .collect()
}

/// An orthogonal (not orthonormal) basis of dim×dim Hermitian matrices:
/// diagonal units E_ii, then for each i<j the symmetric pair E_ij + E_ji and
/// the antisymmetric pair i(E_ij − E_ji). Every Hermitian matrix has a unique
/// real expansion over it, which is how SDP matrix variables become scalars.
pub fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in i..dim {
            if i == j {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(i, i)] = c(1.0, 0.0);
                out.push(m);
            } else {
                let mut sym = ComplexMatrix::zeros(dim, dim);
                sym[(i, j)] = c(1.0, 0.0);
                sym[(j, i)] = c(1.0, 0.0);
                out.push(sym);
                let mut asym = ComplexMatrix::zeros(dim, dim);
                asym[(i, j)] = c(0.0, 1.0);
                asym[(j, i)] = c(0.0, -1.0);
                out.push(asym);
            }
        }
    }
    out
}
