//! Assemblages, local-hidden-state models, steering witnesses, and the
//! steering-robustness program.
//!
//! An assemblage {σ_{a|x}} collects the subnormalized states Bob holds after
//! Alice announces outcome `a` for setting `x`. It admits a local-hidden-state
//! (LHS) model when σ_{a|x} = Σ_λ D(a|x,λ)·σ_λ for deterministic response
//! functions D and positive σ_λ; steering robustness measures the distance to
//! that set as the least "noise weight" t such that (σ + t·arbitrary)/(1+t)
//! becomes LHS — computed here in the unnormalized ω_λ form as a single SDP.

use crate::complex::{tensor_product, ComplexMatrix};
use crate::error::{Error, Result};
use crate::quantum::{partial_trace, HermitianOperator, MeasurementAssembly, State, Subsystem};
use crate::sdp::{self, LinearEqualities, SdpBlock, SdpProblem, SdpStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// PSD slack for assemblage members.
pub const ASSEMBLAGE_TOL: f64 = 1e-9;
/// Equality tolerance on a returned LHS model, matching the solver gap target.
pub const LHS_CERT_TOL: f64 = 1e-7;
/// Guard on the number of deterministic strategies.
pub const STRATEGY_GUARD: f64 = 1e6;

/// The subnormalized states σ_{a|x} on Bob's side, indexed `[a][x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssemblageJson", into = "AssemblageJson")]
pub struct Assemblage {
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
    members: Vec<Vec<HermitianOperator>>,
}

#[derive(Serialize, Deserialize)]
struct AssemblageJson {
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
    /// Keys "a,x".
    members: BTreeMap<String, HermitianOperator>,
}

fn member_key(a: usize, x: usize) -> String {
    format!("{a},{x}")
}

impl From<Assemblage> for AssemblageJson {
    fn from(asm: Assemblage) -> Self {
        let mut members = BTreeMap::new();
        for (a, row) in asm.members.iter().enumerate() {
            for (x, op) in row.iter().enumerate() {
                members.insert(member_key(a, x), op.clone());
            }
        }
        AssemblageJson {
            n_settings: asm.n_settings,
            n_outcomes: asm.n_outcomes,
            dim: asm.dim,
            members,
        }
    }
}

impl TryFrom<AssemblageJson> for Assemblage {
    type Error = Error;
    fn try_from(j: AssemblageJson) -> Result<Self> {
        let mut members = Vec::with_capacity(j.n_outcomes);
        for a in 0..j.n_outcomes {
            let mut row = Vec::with_capacity(j.n_settings);
            for x in 0..j.n_settings {
                let op = j
                    .members
                    .get(&member_key(a, x))
                    .ok_or_else(|| {
                        Error::InvalidAssemblage(format!("missing member ({a},{x})"))
                    })?
                    .clone();
                row.push(op);
            }
            members.push(row);
        }
        Assemblage::new(members)
    }
}

impl Assemblage {
    /// Validates positivity, no-signalling, and marginal normalization.
    pub fn new(members: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let n_outcomes = members.len();
        if n_outcomes == 0 || members[0].is_empty() {
            return Err(Error::InvalidAssemblage("empty member table".into()));
        }
        let n_settings = members[0].len();
        let dim = members[0][0].dim();
        for (a, row) in members.iter().enumerate() {
            if row.len() != n_settings {
                return Err(Error::InvalidAssemblage(format!(
                    "outcome {a} has {} settings, expected {n_settings}",
                    row.len()
                )));
            }
            for (x, op) in row.iter().enumerate() {
                if op.dim() != dim {
                    return Err(Error::InvalidAssemblage(format!(
                        "member ({a},{x}) has dim {} ≠ {dim}",
                        op.dim()
                    )));
                }
                let lo = op.min_eigenvalue();
                if lo < -ASSEMBLAGE_TOL {
                    return Err(Error::InvalidAssemblage(format!(
                        "member ({a},{x}) has eigenvalue {lo:.3e}"
                    )));
                }
            }
        }
        // No-signalling: the marginal Σ_a σ_{a|x} must not depend on x.
        let marginal_of = |x: usize| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            for row in &members {
                m = m.add(row[x].matrix());
            }
            m
        };
        let reference = marginal_of(0);
        for x in 1..n_settings {
            let dev = marginal_of(x).sub(&reference).max_abs();
            if dev > ASSEMBLAGE_TOL {
                return Err(Error::InvalidAssemblage(format!(
                    "signalling between settings 0 and {x}: marginal deviation {dev:.3e}"
                )));
            }
        }
        let tr = reference.trace().re;
        if (tr - 1.0).abs() > ASSEMBLAGE_TOL {
            return Err(Error::InvalidAssemblage(format!("marginal trace {tr} is not 1")));
        }
        Ok(Self { n_settings, n_outcomes, dim, members })
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// σ_{a|x}.
    pub fn member(&self, a: usize, x: usize) -> &HermitianOperator {
        &self.members[a][x]
    }

    /// p(a|x) = Tr σ_{a|x}.
    pub fn probability(&self, a: usize, x: usize) -> f64 {
        self.members[a][x].trace()
    }

    /// Bob's reduced state Σ_a σ_{a|x} (independent of x by no-signalling).
    pub fn reduced_state(&self) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for row in &self.members {
            m = m.add(row[0].matrix());
        }
        HermitianOperator::symmetrized(m).expect("square")
    }

    /// Convex mixture p·self + (1−p)·other, member by member.
    pub fn mix(&self, other: &Assemblage, p: f64) -> Result<Assemblage> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixing weight {p} outside [0,1]")));
        }
        if self.n_settings != other.n_settings
            || self.n_outcomes != other.n_outcomes
            || self.dim != other.dim
        {
            return Err(Error::DimensionMismatch("assemblage shapes differ".into()));
        }
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(ra, rb)| {
                ra.iter()
                    .zip(rb)
                    .map(|(ma, mb)| {
                        HermitianOperator::symmetrized(
                            ma.matrix().scale(p).add(&mb.matrix().scale(1.0 - p)),
                        )
                        .expect("square")
                    })
                    .collect()
            })
            .collect();
        Assemblage::new(members)
    }
}

/// One deterministic classical response: a fixed outcome per setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub assignment: Vec<usize>,
}

impl DeterministicStrategy {
    /// D(a|x,λ): 1 when this strategy answers `a` at setting `x`.
    pub fn responds(&self, a: usize, x: usize) -> bool {
        self.assignment[x] == a
    }
}

/// All |A|^|X| deterministic strategies in lexicographic order of their
/// assignment vectors (last setting varies fastest).
pub fn enumerate_strategies(n_settings: usize, n_outcomes: usize) -> Result<Vec<DeterministicStrategy>> {
    if n_settings == 0 || n_outcomes == 0 {
        return Err(Error::InvalidParameter("need at least one setting and outcome".into()));
    }
    let count = (n_outcomes as f64).powi(n_settings as i32);
    if count > STRATEGY_GUARD {
        return Err(Error::StrategyGuard { count, guard: STRATEGY_GUARD });
    }
    let total = count as usize;
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; n_settings];
    loop {
        out.push(DeterministicStrategy { assignment: current.clone() });
        // Odometer increment on the last position.
        let mut pos = n_settings;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < n_outcomes {
                break;
            }
            current[pos] = 0;
        }
    }
}

/// A steering witness: PSD operators F_{a|x} with the local bound
/// α = max_λ λmax(Σ_x F_{D(x,λ)|x}), so every LHS assemblage satisfies
/// Σ_{a,x} Tr(F_{a|x} σ_{a|x}) ≤ α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WitnessJson", into = "WitnessJson")]
pub struct SteeringWitness {
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
    operators: Vec<Vec<HermitianOperator>>,
    local_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
    operators: BTreeMap<String, HermitianOperator>,
    local_bound: f64,
}

impl From<SteeringWitness> for WitnessJson {
    fn from(w: SteeringWitness) -> Self {
        let mut operators = BTreeMap::new();
        for (a, row) in w.operators.iter().enumerate() {
            for (x, op) in row.iter().enumerate() {
                operators.insert(member_key(a, x), op.clone());
            }
        }
        WitnessJson {
            n_settings: w.n_settings,
            n_outcomes: w.n_outcomes,
            dim: w.dim,
            operators,
            local_bound: w.local_bound,
        }
    }
}

impl TryFrom<WitnessJson> for SteeringWitness {
    type Error = Error;
    fn try_from(j: WitnessJson) -> Result<Self> {
        let mut operators = Vec::with_capacity(j.n_outcomes);
        for a in 0..j.n_outcomes {
            let mut row = Vec::with_capacity(j.n_settings);
            for x in 0..j.n_settings {
                row.push(
                    j.operators
                        .get(&member_key(a, x))
                        .ok_or_else(|| Error::InvalidParameter(format!("missing witness operator ({a},{x})")))?
                        .clone(),
                );
            }
            operators.push(row);
        }
        let w = SteeringWitness::new(operators)?;
        // A stated bound must be recomputable, not taken on faith.
        if (w.local_bound - j.local_bound).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "stated local bound {} differs from recomputed {} by more than 1e-9",
                j.local_bound, w.local_bound
            )));
        }
        Ok(w)
    }
}

impl SteeringWitness {
    /// Builds a witness from PSD operators `[a][x]`, computing the local bound.
    pub fn new(operators: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let n_outcomes = operators.len();
        if n_outcomes == 0 || operators[0].is_empty() {
            return Err(Error::InvalidParameter("empty witness table".into()));
        }
        let n_settings = operators[0].len();
        let dim = operators[0][0].dim();
        for (a, row) in operators.iter().enumerate() {
            if row.len() != n_settings {
                return Err(Error::DimensionMismatch(format!("witness outcome {a} row length")));
            }
            for (x, op) in row.iter().enumerate() {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch(format!("witness operator ({a},{x}) dim")));
                }
                let lo = op.min_eigenvalue();
                if lo < -ASSEMBLAGE_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "witness operator ({a},{x}) has eigenvalue {lo:.3e}"
                    )));
                }
            }
        }
        let local_bound = local_bound_of(&operators, n_settings, n_outcomes, dim)?;
        Ok(Self { n_settings, n_outcomes, dim, operators, local_bound })
    }

    pub fn operator(&self, a: usize, x: usize) -> &HermitianOperator {
        &self.operators[a][x]
    }

    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn local_bound_of(
    operators: &[Vec<HermitianOperator>],
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
) -> Result<f64> {
    let strategies = enumerate_strategies(n_settings, n_outcomes)?;
    let mut alpha = f64::NEG_INFINITY;
    for lam in &strategies {
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (x, &a) in lam.assignment.iter().enumerate() {
            acc = acc.add(operators[a][x].matrix());
        }
        let op = HermitianOperator::symmetrized(acc)?;
        alpha = alpha.max(op.max_eigenvalue());
    }
    Ok(alpha)
}

/// σ_{a|x} = Tr_A[(E_{a|x} ⊗ 𝟙)·ρ].
pub fn assemblage_from_state(rho: &State, m: &MeasurementAssembly) -> Result<Assemblage> {
    let da = m.dim();
    if rho.dim() % da != 0 {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} is not a multiple of measurement dim {da}",
            rho.dim()
        )));
    }
    let db = rho.dim() / da;
    let id_b = ComplexMatrix::identity(db);
    let mut members = Vec::with_capacity(m.n_outcomes());
    for a in 0..m.n_outcomes() {
        let mut row = Vec::with_capacity(m.n_settings());
        for x in 0..m.n_settings() {
            let big = tensor_product(m.effect(a, x).matrix(), &id_b).mul(rho.matrix());
            let sigma = partial_trace(&big, Subsystem::A, (da, db))?;
            row.push(HermitianOperator::symmetrized(sigma)?);
        }
        members.push(row);
    }
    Assemblage::new(members)
}

/// Builds the steering-robustness SDP:
///   minimize Σ_λ Tr ω_λ  subject to  Σ_λ D(a|x,λ)·ω_λ − σ_{a|x} ⪰ 0,  ω_λ ⪰ 0,
/// with each ω_λ expanded over the Hermitian basis of the d-dimensional space.
/// The robustness is the optimal value minus one.
fn steering_robustness_problem(asm: &Assemblage) -> Result<(SdpProblem, Vec<DeterministicStrategy>)> {
    let strategies = enumerate_strategies(asm.n_settings(), asm.n_outcomes())?;
    let d = asm.dim();
    let basis = crate::quantum::hermitian_basis(d);
    let n_vars = strategies.len() * basis.len();
    let var = |lam: usize, j: usize| lam * basis.len() + j;

    let mut c = vec![0.0; n_vars];
    for (lam, _) in strategies.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            c[var(lam, j)] = bj.trace().re;
        }
    }

    let zero = HermitianOperator::zeros(d);
    let mut blocks = Vec::new();
    // Constraint blocks Σ_λ D·ω_λ − σ_{a|x} ⪰ 0.
    for a in 0..asm.n_outcomes() {
        for x in 0..asm.n_settings() {
            let mut mats = Vec::with_capacity(n_vars + 1);
            mats.push(HermitianOperator::new(asm.member(a, x).matrix().scale(-1.0))?);
            for (lam, strat) in strategies.iter().enumerate() {
                for bj in &basis {
                    if strat.responds(a, x) {
                        mats.push(HermitianOperator::new(bj.clone())?);
                    } else {
                        mats.push(zero.clone());
                    }
                }
                let _ = lam;
            }
            blocks.push(SdpBlock { matrices: mats });
        }
    }
    // Positivity blocks ω_λ ⪰ 0.
    for (lam, _) in strategies.iter().enumerate() {
        let mut mats = Vec::with_capacity(n_vars + 1);
        mats.push(zero.clone());
        for lam2 in 0..strategies.len() {
            for bj in &basis {
                if lam2 == lam {
                    mats.push(HermitianOperator::new(bj.clone())?);
                } else {
                    mats.push(zero.clone());
                }
            }
        }
        blocks.push(SdpBlock { matrices: mats });
    }
    let p = SdpProblem::new(c, blocks, LinearEqualities::none())?;
    Ok((p, strategies))
}

/// Steering robustness of an assemblage (0 exactly on the LHS set), with a
/// certified duality gap well inside 1e-7.
pub fn steering_robustness(asm: &Assemblage) -> Result<f64> {
    let (p, _) = steering_robustness_problem(asm)?;
    let sol = sdp::audit::with_label("steering-robustness", || sdp::solve(&p, 1e-9));
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "steering robustness solve: {:?}: {}",
            sol.status, sol.diagnostics
        )));
    }
    Ok((sol.primal_value - 1.0).max(0.0))
}

/// Verdict of the LHS membership test, with a certificate either way: the
/// local model itself, or a steering witness the assemblage violates.
#[derive(Debug, Clone)]
pub enum LhsMembership {
    Member { local_states: Vec<HermitianOperator> },
    NonMember { witness: SteeringWitness },
}

/// Decides LHS membership by solving the robustness program once: value 0
/// (within 1e-7) yields the model {σ_λ} from the primal solution; a positive
/// value turns the constraint-block duals into a violated steering witness.
pub fn lhs_membership(asm: &Assemblage) -> Result<LhsMembership> {
    let (p, strategies) = steering_robustness_problem(asm)?;
    let sol = sdp::audit::with_label("lhs-membership", || sdp::solve(&p, 1e-9));
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "LHS membership solve: {:?}: {}",
            sol.status, sol.diagnostics
        )));
    }
    let sr = sol.primal_value - 1.0;
    let d = asm.dim();
    let basis = crate::quantum::hermitian_basis(d);
    if sr <= LHS_CERT_TOL {
        // ω_λ reconstructed from the primal variables; at robustness 0 the
        // slack traces vanish, so Σ_λ D·σ_λ matches σ_{a|x} within 1e-7.
        let mut local_states = Vec::with_capacity(strategies.len());
        for lam in 0..strategies.len() {
            let mut acc = ComplexMatrix::zeros(d, d);
            for (j, bj) in basis.iter().enumerate() {
                acc = acc.add(&bj.scale(sol.x[lam * basis.len() + j]));
            }
            local_states.push(HermitianOperator::symmetrized(acc)?);
        }
        Ok(LhsMembership::Member { local_states })
    } else {
        // The duals of the (a,x) constraint blocks are PSD operators with
        // Σ_x Z_{D(x,λ)|x} ⪯ 𝟙 (dual feasibility), hence local bound ≤ 1,
        // while the witness value on this assemblage is 1 + robustness.
        let mut operators = Vec::with_capacity(asm.n_outcomes());
        for a in 0..asm.n_outcomes() {
            let mut row = Vec::with_capacity(asm.n_settings());
            for x in 0..asm.n_settings() {
                let z = &sol.block_duals[a * asm.n_settings() + x];
                // Clip the solver's −1e-12-scale eigenvalue dust so the
                // witness constructor's PSD validation sees a clean operator.
                row.push(psd_clip(z)?);
            }
            operators.push(row);
        }
        let witness = SteeringWitness::new(operators)?;
        Ok(LhsMembership::NonMember { witness })
    }
}

/// Projects onto the PSD cone by zeroing (tiny) negative eigenvalues.
fn psd_clip(op: &HermitianOperator) -> Result<HermitianOperator> {
    let (vals, vecs) = crate::eig::hermitian_eigen(op.matrix())?;
    if vals[0] >= 0.0 {
        return Ok(op.clone());
    }
    let d = op.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (j, v) in vals.iter().enumerate() {
        if *v <= 0.0 {
            continue;
        }
        for r in 0..d {
            for s in 0..d {
                out[(r, s)] += vecs[(r, j)] * vecs[(s, j)].conj() * *v;
            }
        }
    }
    HermitianOperator::symmetrized(out)
}

/// Tr Σ_{a,x} F_{a|x} σ_{a|x}.
pub fn witness_value(w: &SteeringWitness, asm: &Assemblage) -> Result<f64> {
    if w.n_settings() != asm.n_settings()
        || w.n_outcomes() != asm.n_outcomes()
        || w.dim() != asm.dim()
    {
        return Err(Error::DimensionMismatch("witness and assemblage shapes differ".into()));
    }
    let mut acc = 0.0;
    for a in 0..asm.n_outcomes() {
        for x in 0..asm.n_settings() {
            acc += w.operator(a, x).inner(asm.member(a, x));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_mub_assembly, werner_state};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn mub_assemblage(v: f64) -> Assemblage {
        assemblage_from_state(&werner_state(v).unwrap(), &pauli_mub_assembly()).unwrap()
    }

    const SR_SINGLET_3MUB: f64 = 0.2679491924311228; // 2 − √3

    #[test]
    fn product_state_assemblage_factorizes() {
        // ρ = ρ_A ⊗ ρ_B ⇒ σ_{a|x} = Tr(ρ_A E_{a|x})·ρ_B.
        let rho_a = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(0.7, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.3, 0.0),
            ],
        )
        .unwrap();
        let rho_b = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, -0.25),
                Complex64::new(0.0, 0.25),
                Complex64::new(0.4, 0.0),
            ],
        )
        .unwrap();
        let rho = State::new(
            HermitianOperator::new(tensor_product(&rho_a, &rho_b)).unwrap(),
        )
        .unwrap();
        let m = pauli_mub_assembly();
        let asm = assemblage_from_state(&rho, &m).unwrap();
        for a in 0..2 {
            for x in 0..3 {
                let weight = m.effect(a, x).matrix().mul(&rho_a).trace().re;
                let want = rho_b.scale(weight);
                assert!(asm.member(a, x).matrix().sub(&want).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singlet_z_outcome_is_anticorrelated() {
        let asm = mub_assemblage(1.0);
        // Setting Z (index 2), outcome + → (1/2)|1⟩⟨1|.
        let s = asm.member(0, 2);
        assert_abs_diff_eq!(s.matrix()[(0, 0)].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.matrix()[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn werner_assemblage_is_affine_in_visibility() {
        let v = 0.7;
        let asm_v = mub_assemblage(v);
        let asm_1 = mub_assemblage(1.0);
        for a in 0..2 {
            for x in 0..3 {
                // σ^v = v·σ^singlet + (1−v)·𝟙/4: the white-noise part of the
                // state contributes Tr(E_{a|x})·𝟙/4 = 𝟙/4 to each member.
                let want = asm_1
                    .member(a, x)
                    .matrix()
                    .scale(v)
                    .add(&ComplexMatrix::identity(2).scale((1.0 - v) / 4.0));
                assert!(asm_v.member(a, x).matrix().sub(&want).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn strategy_enumeration_counts_and_order() {
        assert_eq!(enumerate_strategies(3, 2).unwrap().len(), 8);
        assert_eq!(enumerate_strategies(1, 2).unwrap().len(), 2);
        let s = enumerate_strategies(2, 3).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[0].assignment, vec![0, 0]);
        assert_eq!(s[1].assignment, vec![0, 1]);
        assert_eq!(s[2].assignment, vec![0, 2]);
        assert_eq!(s[3].assignment, vec![1, 0]);
        assert!(matches!(
            enumerate_strategies(30, 4),
            Err(Error::StrategyGuard { .. })
        ));
    }

    #[test]
    fn robustness_of_singlet_with_three_mubs() {
        let sr = steering_robustness(&mub_assemblage(1.0)).unwrap();
        assert_abs_diff_eq!(sr, SR_SINGLET_3MUB, epsilon = 1e-7);
    }

    #[test]
    fn robustness_follows_werner_visibility_line() {
        // SR(werner(v), 3 MUBs) = max{(3−√3)(1+v)/2 − 1, 0}; the threshold
        // sits exactly at v = 1/√3.
        for v in [0.5, 0.6, 0.8, 1.0] {
            let sr = steering_robustness(&mub_assemblage(v)).unwrap();
            let want = ((3.0 - 3.0_f64.sqrt()) * (1.0 + v) / 2.0 - 1.0).max(0.0);
            assert_abs_diff_eq!(sr, want, epsilon = 1e-7);
        }
    }

    #[test]
    fn membership_split_at_threshold() {
        match lhs_membership(&mub_assemblage(0.0)).unwrap() {
            LhsMembership::Member { .. } => {}
            LhsMembership::NonMember { .. } => panic!("maximally mixed must be LHS"),
        }
        // v = 0.5 < 1/√3: member, and the returned model must reproduce the
        // assemblage within the certificate tolerance.
        let asm = mub_assemblage(0.5);
        match lhs_membership(&asm).unwrap() {
            LhsMembership::Member { local_states } => {
                let strategies = enumerate_strategies(3, 2).unwrap();
                for a in 0..2 {
                    for x in 0..3 {
                        let mut acc = ComplexMatrix::zeros(2, 2);
                        for (lam, strat) in strategies.iter().enumerate() {
                            if strat.responds(a, x) {
                                acc = acc.add(local_states[lam].matrix());
                            }
                        }
                        let dev = acc.sub(asm.member(a, x).matrix()).max_abs();
                        assert!(dev <= LHS_CERT_TOL, "model deviates by {dev:.3e} at ({a},{x})");
                    }
                }
                for s in &local_states {
                    assert!(s.min_eigenvalue() >= -1e-8);
                }
            }
            LhsMembership::NonMember { .. } => panic!("v=0.5 is below the 1/√3 threshold"),
        }
    }

    #[test]
    fn nonmember_witness_violates_its_bound() {
        let asm = mub_assemblage(1.0);
        match lhs_membership(&asm).unwrap() {
            LhsMembership::Member { .. } => panic!("singlet with 3 MUBs is steerable"),
            LhsMembership::NonMember { witness } => {
                let value = witness_value(&witness, &asm).unwrap();
                assert!(
                    value > witness.local_bound() + 1e-4,
                    "violation too small: {value} vs bound {}",
                    witness.local_bound()
                );
                // Soundness: the same witness cannot beat its bound on an
                // LHS member.
                let lhs = mub_assemblage(0.5);
                let on_member = witness_value(&witness, &lhs).unwrap();
                assert!(on_member <= witness.local_bound() + 1e-8);
            }
        }
    }

    #[test]
    fn witness_value_normalizations() {
        let id = HermitianOperator::identity(2);
        let sixth = HermitianOperator::new(id.matrix().scale(1.0 / 6.0)).unwrap();
        let uniform = SteeringWitness::new(vec![vec![sixth.clone(); 3]; 2]).unwrap();
        let asm = mub_assemblage(0.3);
        // Σ Tr(σ)/(|A||X|) = 1/|A|.
        assert_abs_diff_eq!(witness_value(&uniform, &asm).unwrap(), 0.5, epsilon = 1e-12);
        let zero = SteeringWitness::new(vec![vec![HermitianOperator::zeros(2); 3]; 2]).unwrap();
        assert_abs_diff_eq!(witness_value(&zero, &asm).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.local_bound(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn robustness_is_convex_under_mixing() {
        let a1 = mub_assemblage(1.0);
        let a2 = mub_assemblage(0.4);
        let sr1 = steering_robustness(&a1).unwrap();
        let sr2 = steering_robustness(&a2).unwrap();
        for p in [0.25, 0.5, 0.75] {
            let mixed = a1.mix(&a2, p).unwrap();
            let sr = steering_robustness(&mixed).unwrap();
            assert!(sr <= p * sr1 + (1.0 - p) * sr2 + 1e-6);
        }
    }

    #[test]
    fn assemblage_serde_round_trip() {
        let asm = mub_assemblage(0.8);
        let text = serde_json::to_string(&asm).unwrap();
        let back: Assemblage = serde_json::from_str(&text).unwrap();
        assert_eq!(asm, back);
    }

    #[test]
    fn witness_serde_rejects_tampered_bound() {
        let asm = mub_assemblage(1.0);
        let witness = match lhs_membership(&asm).unwrap() {
            LhsMembership::NonMember { witness } => witness,
            _ => unreachable!(),
        };
        let text = serde_json::to_string(&witness).unwrap();
        let back: SteeringWitness = serde_json::from_str(&text).unwrap();
        assert_abs_diff_eq!(back.local_bound(), witness.local_bound(), epsilon = 1e-12);
        // Tampering with the stored bound must be caught on load.
        let tampered = text.replace(
            &format!("\"local_bound\":{}", witness.local_bound()),
            "\"local_bound\":0.5",
        );
        assert_ne!(tampered, text, "replacement must hit");
        assert!(serde_json::from_str::<SteeringWitness>(&tampered).is_err());
    }

    #[test]
    fn signalling_assemblage_rejected() {
        let half = HermitianOperator::new(ComplexMatrix::identity(2).scale(0.5)).unwrap();
        let zero = HermitianOperator::zeros(2);
        // Setting 0 marginal = 𝟙, setting 1 marginal = 𝟙/2: signalling.
        let members = vec![vec![half.clone(), half.clone()], vec![half.clone(), zero]];
        assert!(matches!(Assemblage::new(members), Err(Error::InvalidAssemblage(_))));
    }
}
