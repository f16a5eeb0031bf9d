//! Reference robustness quantities that upper-bound the steering robustness:
//! the generalized entanglement robustness of the shared state (exact for two
//! qubits via the positive-partial-transpose criterion) and the generalized
//! incompatibility robustness of Alice's measurement assembly, plus an
//! end-to-end report tying them to the measurement-device-independent bound.

use crate::error::{Error, Result};
use crate::mdi::{self, QuantumInputs};
use crate::quantum::{bell_povm, hermitian_basis, HermitianOperator, MeasurementAssembly, State};
use crate::quantum::partial_transpose_b;
use crate::sdp::{self, LinearEqualities, SdpBlock, SdpProblem, SdpStatus};
use crate::steering::{assemblage_from_state, enumerate_strategies, steering_robustness};
use serde::{Deserialize, Serialize};

/// Generalized entanglement robustness of a two-qubit state: the least t such
/// that ρ mixed with weight t/(1+t) of some other state becomes separable.
/// Solved as min Tr(S) − 1 over S ⪰ ρ with S^{T_B} ⪰ 0, which is exact in
/// 2⊗2 where separability coincides with a positive partial transpose. Larger
/// dimensions are refused rather than silently relaxed.
pub fn entanglement_robustness(rho: &State) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "entanglement robustness is exact only for two qubits; state has dim {}",
            rho.dim()
        )));
    }
    let basis = hermitian_basis(4);
    let n_vars = basis.len();
    let c: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();

    // Block 1: S − ρ ⪰ 0.
    let mut above_rho = Vec::with_capacity(n_vars + 1);
    above_rho.push(HermitianOperator::new(rho.matrix().scale(-1.0))?);
    for b in &basis {
        above_rho.push(HermitianOperator::new(b.clone())?);
    }
    // Block 2: S^{T_B} ⪰ 0 — the partial transpose acts linearly on the basis.
    let mut ppt = Vec::with_capacity(n_vars + 1);
    ppt.push(HermitianOperator::zeros(4));
    for b in &basis {
        ppt.push(HermitianOperator::symmetrized(partial_transpose_b(b, (2, 2))?)?);
    }

    let problem = SdpProblem::new(
        c,
        vec![SdpBlock { matrices: above_rho }, SdpBlock { matrices: ppt }],
        LinearEqualities::none(),
    )?;
    let sol = sdp::audit::with_label("entanglement-robustness", || sdp::solve(&problem, 1e-9));
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "entanglement robustness solve: {:?}: {}",
            sol.status, sol.diagnostics
        )));
    }
    Ok((sol.primal_value - 1.0).max(0.0))
}

/// Generalized incompatibility robustness of a measurement assembly: the
/// least t such that mixing each effect with weight t/(1+t) of arbitrary
/// effects yields a jointly measurable assembly. Solved as
///   min (1/d)·Tr Σ_λ G_λ − 1
///   s.t. Σ_λ D(a|x,λ)·G_λ − E_{a|x} ⪰ 0, G_λ ⪰ 0, Σ_λ G_λ ∝ 𝟙,
/// where the G_λ form the (rescaled) parent measurement.
pub fn incompatibility_robustness(m: &MeasurementAssembly) -> Result<f64> {
    let d = m.dim();
    let strategies = enumerate_strategies(m.n_settings(), m.n_outcomes())?;
    let basis = hermitian_basis(d);
    let per = basis.len();
    let n_vars = strategies.len() * per;
    let var = |lam: usize, j: usize| lam * per + j;
    let diagonal: Vec<usize> =
        (0..per).filter(|j| basis[*j].trace().re > 0.5).collect();

    let mut c = vec![0.0; n_vars];
    for lam in 0..strategies.len() {
        for &j in &diagonal {
            c[var(lam, j)] = 1.0 / d as f64;
        }
    }

    let zero = HermitianOperator::zeros(d);
    let mut blocks = Vec::new();
    for a in 0..m.n_outcomes() {
        for x in 0..m.n_settings() {
            let mut mats = Vec::with_capacity(n_vars + 1);
            mats.push(HermitianOperator::new(m.effect(a, x).matrix().scale(-1.0))?);
            for strat in &strategies {
                for b in &basis {
                    if strat.assignment[x] == a {
                        mats.push(HermitianOperator::new(b.clone())?);
                    } else {
                        mats.push(zero.clone());
                    }
                }
            }
            blocks.push(SdpBlock { matrices: mats });
        }
    }
    for lam in 0..strategies.len() {
        let mut mats = Vec::with_capacity(n_vars + 1);
        mats.push(zero.clone());
        for lam2 in 0..strategies.len() {
            for b in &basis {
                if lam2 == lam {
                    mats.push(HermitianOperator::new(b.clone())?);
                } else {
                    mats.push(zero.clone());
                }
            }
        }
        blocks.push(SdpBlock { matrices: mats });
    }

    // Σ_λ G_λ = ((1/d)·Tr Σ_λ G_λ)·𝟙, coordinate by coordinate in the basis:
    // off-diagonal coordinates of the sum vanish, diagonal ones all equal the
    // average diagonal coordinate.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..per {
        let mut row = vec![0.0; n_vars];
        for lam in 0..strategies.len() {
            row[var(lam, j)] += 1.0;
            if diagonal.contains(&j) {
                for &j2 in &diagonal {
                    row[var(lam, j2)] -= 1.0 / d as f64;
                }
            }
        }
        rows.push(row);
        rhs.push(0.0);
    }

    let problem = SdpProblem::new(c, blocks, LinearEqualities { a: rows, b: rhs })?;
    let sol = sdp::audit::with_label("incompatibility-robustness", || sdp::solve(&problem, 1e-9));
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "incompatibility robustness solve: {:?}: {}",
            sol.status, sol.diagnostics
        )));
    }
    Ok((sol.primal_value - 1.0).max(0.0))
}

/// The four quantities of the certification hierarchy for one experiment,
/// computed end-to-end from the state and assembly: the averaged
/// device-independent lower bound, the steering robustness it bounds, and the
/// entanglement/incompatibility robustnesses that bound the steering
/// robustness in turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub s_lb: f64,
    pub sr: f64,
    pub er: f64,
    pub ir: f64,
}

pub fn hierarchy_report(
    rho: &State,
    m: &MeasurementAssembly,
    inputs: &QuantumInputs,
) -> Result<HierarchyReport> {
    let asm = assemblage_from_state(rho, m)?;
    let sr = steering_robustness(&asm)?;
    let p = mdi::correlations(&asm, inputs, &bell_povm())?;
    let s_lb = mdi::mdi_sm_avg(&p, inputs)?;
    let er = entanglement_robustness(rho)?;
    let ir = incompatibility_robustness(m)?;
    Ok(HierarchyReport { s_lb, sr, er, ir })
}
