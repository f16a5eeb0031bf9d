//! Semidefinite programming with certified solutions.
//!
//! Problems are stated over free real variables x as
//!   minimize c·x   subject to   F_0 + Σ_i x_i F_i ⪰ 0  (per block),  A·x = b,
//! with Hermitian F matrices. The pipeline: equality constraints are
//! eliminated by nullspace parametrization, complex Hermitian blocks are
//! embedded as real symmetric blocks of doubled dimension (eigenvalues keep
//! their values, multiplicities double), and the resulting inequality-only
//! real cone program goes to the interior-point core in [`ipm`]. Every
//! solution reported `optimal` has already passed [`verify_certificate`] — a
//! failed verification downgrades the status to `error`, never a silent wrong
//! answer. Infeasible problems return a certificate checkable by
//! [`verify_infeasibility_certificate`].

pub mod linalg;
mod ipm;

use crate::complex::ComplexMatrix;
use crate::error::{Error, Result};
use crate::quantum::HermitianOperator;
use serde::{Deserialize, Serialize};

/// Desk-scale guard: combined dimension of all blocks.
pub const MAX_TOTAL_BLOCK_DIM: usize = 256;
/// Default duality-gap tolerance for [`solve_default`].
pub const DEFAULT_TOL: f64 = 1e-8;

/// One linear-matrix-inequality block: matrices `[F_0, F_1, …, F_n]` encoding
/// F_0 + Σ x_i F_i ⪰ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpBlock {
    pub matrices: Vec<HermitianOperator>,
}

impl SdpBlock {
    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }
}

/// Linear equality constraints A·x = b; empty means unconstrained.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearEqualities {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl LinearEqualities {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }
}

/// A validated semidefinite program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct SdpProblem {
    n_vars: usize,
    c: Vec<f64>,
    blocks: Vec<SdpBlock>,
    equalities: LinearEqualities,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    n_vars: usize,
    c: Vec<f64>,
    blocks: Vec<SdpBlock>,
    equalities: LinearEqualities,
}

impl From<SdpProblem> for ProblemJson {
    fn from(p: SdpProblem) -> Self {
        ProblemJson { n_vars: p.n_vars, c: p.c, blocks: p.blocks, equalities: p.equalities }
    }
}

impl TryFrom<ProblemJson> for SdpProblem {
    type Error = Error;
    fn try_from(j: ProblemJson) -> Result<Self> {
        let p = SdpProblem::new(j.c, j.blocks, j.equalities)?;
        if p.n_vars != j.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "declared n_vars {} does not match objective length {}",
                j.n_vars, p.n_vars
            )));
        }
        Ok(p)
    }
}

impl SdpProblem {
    pub fn new(c: Vec<f64>, blocks: Vec<SdpBlock>, equalities: LinearEqualities) -> Result<Self> {
        let n_vars = c.len();
        if n_vars == 0 {
            return Err(Error::InvalidParameter("SDP needs at least one variable".into()));
        }
        if !c.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("objective has non-finite entries".into()));
        }
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("SDP needs at least one block".into()));
        }
        let mut total_dim = 0usize;
        for (k, blk) in blocks.iter().enumerate() {
            if blk.matrices.len() != n_vars + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "block {k} has {} matrices, expected n_vars+1 = {}",
                    blk.matrices.len(),
                    n_vars + 1
                )));
            }
            let d = blk.matrices[0].dim();
            for (i, m) in blk.matrices.iter().enumerate() {
                if m.dim() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "block {k}, matrix {i}: dim {} ≠ {d}",
                        m.dim()
                    )));
                }
                if !m.matrix().max_abs().is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "block {k}, matrix {i} has non-finite entries"
                    )));
                }
            }
            total_dim += d;
        }
        if total_dim > MAX_TOTAL_BLOCK_DIM {
            return Err(Error::InvalidParameter(format!(
                "total block dimension {total_dim} exceeds the {MAX_TOTAL_BLOCK_DIM} guard"
            )));
        }
        if equalities.a.len() != equalities.b.len() {
            return Err(Error::DimensionMismatch("equality rows and rhs length differ".into()));
        }
        for (r, row) in equalities.a.iter().enumerate() {
            if row.len() != n_vars {
                return Err(Error::DimensionMismatch(format!(
                    "equality row {r} has {} entries, expected {n_vars}",
                    row.len()
                )));
            }
            if !row.iter().all(|v| v.is_finite()) || !equalities.b[r].is_finite() {
                return Err(Error::InvalidParameter(format!("equality row {r} has non-finite entries")));
            }
        }
        Ok(Self { n_vars, c, blocks, equalities })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn blocks(&self) -> &[SdpBlock] {
        &self.blocks
    }

    pub fn equalities(&self) -> &LinearEqualities {
        &self.equalities
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Error,
}

/// Solver output. For `optimal`, `block_duals` are the dual matrices Z_k
/// (already verified); for `infeasible` they are an improving-ray certificate
/// normalized to unit total trace (or, for inconsistent equalities, the
/// Farkas vector sits in `eq_dual` and `block_duals` is empty).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub block_duals: Vec<HermitianOperator>,
    #[serde(default)]
    pub eq_dual: Vec<f64>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub diagnostics: String,
}

impl SdpSolution {
    fn error(msg: impl Into<String>) -> Self {
        SdpSolution {
            status: SdpStatus::Error,
            x: Vec::new(),
            primal_value: 0.0,
            dual_value: 0.0,
            gap: 0.0,
            block_duals: Vec::new(),
            eq_dual: Vec::new(),
            iterations: 0,
            diagnostics: msg.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Equality elimination
// ---------------------------------------------------------------------------

/// Result of eliminating A·x = b: either a parametrization x = x_p + N·z with
/// orthonormal nullspace columns in N, or a Farkas vector proving A·x = b has
/// no solution.
enum Elimination {
    Param { x_p: Vec<f64>, nullspace: Vec<Vec<f64>> },
    Inconsistent { farkas: Vec<f64> },
}

fn eliminate_equalities(n: usize, eq: &LinearEqualities) -> Elimination {
    let m = eq.rows();
    if m == 0 {
        let mut basis = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            basis.push(e);
        }
        return Elimination::Param { x_p: vec![0.0; n], nullspace: basis };
    }
    // Eigendecomposition of AᵀA separates row space (λ > τ) from nullspace.
    let mut ata = vec![0.0; n * n];
    for row in &eq.a {
        for i in 0..n {
            for j in 0..n {
                ata[i * n + j] += row[i] * row[j];
            }
        }
    }
    let (vals, vecs) = linalg::sym_eigen(n, &ata);
    let tol = 1e-12 * vals[n - 1].max(1.0);
    let mut atb = vec![0.0; n];
    for (r, row) in eq.a.iter().enumerate() {
        for i in 0..n {
            atb[i] += row[i] * eq.b[r];
        }
    }
    let mut x_p = vec![0.0; n];
    let mut nullspace = Vec::new();
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| vecs[i * n + j]).collect();
        if vals[j] > tol {
            let coef = linalg::frob_inner(&col, &atb) / vals[j];
            for i in 0..n {
                x_p[i] += coef * col[i];
            }
        } else {
            nullspace.push(col);
        }
    }
    // Residual b − A·x_p is orthogonal to range(A); if nonzero it is a Farkas
    // certificate: yᵀA = 0 while yᵀb = ‖y‖² > 0.
    let mut resid = eq.b.clone();
    for (r, row) in eq.a.iter().enumerate() {
        resid[r] -= linalg::frob_inner(row, &x_p);
    }
    let rnorm = linalg::frob_norm(&resid);
    let bscale = 1.0 + eq.b.iter().fold(0.0_f64, |mx, v| mx.max(v.abs()));
    if rnorm > 1e-9 * bscale {
        for v in resid.iter_mut() {
            *v /= rnorm;
        }
        return Elimination::Inconsistent { farkas: resid };
    }
    Elimination::Param { x_p, nullspace }
}

/// Least-squares y minimizing ‖Aᵀ·y − g‖ (normal equations through the
/// eigendecomposition of A·Aᵀ).
fn equality_multipliers(eq: &LinearEqualities, g: &[f64]) -> Vec<f64> {
    let m = eq.rows();
    if m == 0 {
        return Vec::new();
    }
    let mut aat = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            aat[i * m + j] = linalg::frob_inner(&eq.a[i], &eq.a[j]);
        }
    }
    let mut ag = vec![0.0; m];
    for (i, row) in eq.a.iter().enumerate() {
        ag[i] = linalg::frob_inner(row, g);
    }
    let (vals, vecs) = linalg::sym_eigen(m, &aat);
    let tol = 1e-12 * vals[m - 1].max(1.0);
    let mut y = vec![0.0; m];
    for j in 0..m {
        if vals[j] <= tol {
            continue;
        }
        let col: Vec<f64> = (0..m).map(|i| vecs[i * m + j]).collect();
        let coef = linalg::frob_inner(&col, &ag) / vals[j];
        for i in 0..m {
            y[i] += coef * col[i];
        }
    }
    y
}

// ---------------------------------------------------------------------------
// Complex → real embedding
// ---------------------------------------------------------------------------

/// Real symmetric image [[Re, −Im], [Im, Re]] of a Hermitian matrix. Each
/// eigenvalue of the original appears twice, with its value unchanged.
fn embed_matrix(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.rows();
    let n = 2 * d;
    let mut out = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let v = m[(i, j)];
            out[i * n + j] = v.re;
            out[i * n + (d + j)] = -v.im;
            out[(d + i) * n + j] = v.im;
            out[(d + i) * n + (d + j)] = v.re;
        }
    }
    out
}

fn real_matrix(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = m[(i, j)].re;
        }
    }
    out
}

/// Inverse of the embedding on dual matrices: Ẑ = (Z₁₁+Z₂₂) + i(Z₂₁−Z₁₂)
/// satisfies ⟨F, Ẑ⟩_ℂ = ⟨embed(F), Z⟩_ℝ and inherits positive semidefiniteness.
fn recover_dual(dim: usize, embedded: bool, z: &[f64]) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim, dim);
    if embedded {
        let n = 2 * dim;
        for i in 0..dim {
            for j in 0..dim {
                let re = z[i * n + j] + z[(dim + i) * n + (dim + j)];
                let im = z[(dim + i) * n + j] - z[i * n + (dim + j)];
                m[(i, j)] = num_complex::Complex64::new(re, im);
            }
        }
    } else {
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = num_complex::Complex64::new(z[i * dim + j], 0.0);
            }
        }
    }
    HermitianOperator::symmetrized(m).expect("square by construction")
}

struct ReducedCone {
    cone: ipm::ConeProblem,
    /// Original dimension and whether each block was embedded.
    block_meta: Vec<(usize, bool)>,
}

/// Build the inequality-only real cone problem for variables z, where
/// x = x_p + N·z.
fn build_cone(p: &SdpProblem, x_p: &[f64], nullspace: &[Vec<f64>]) -> ReducedCone {
    let nr = nullspace.len();
    let c_red: Vec<f64> = nullspace.iter().map(|col| linalg::frob_inner(col, &p.c)).collect();
    let mut blocks = Vec::with_capacity(p.blocks.len());
    let mut block_meta = Vec::with_capacity(p.blocks.len());
    for blk in &p.blocks {
        let d = blk.dim();
        // F0' = F_0 + Σ_i (x_p)_i F_i;  F'_j = Σ_i N_ij F_i.
        let mut f0c = blk.matrices[0].matrix().clone();
        for (i, xpi) in x_p.iter().enumerate() {
            if *xpi != 0.0 {
                f0c = f0c.add(&blk.matrices[i + 1].matrix().scale(*xpi));
            }
        }
        let mut fic = Vec::with_capacity(nr);
        for col in nullspace {
            let mut acc = ComplexMatrix::zeros(d, d);
            for (i, w) in col.iter().enumerate() {
                if *w != 0.0 {
                    acc = acc.add(&blk.matrices[i + 1].matrix().scale(*w));
                }
            }
            fic.push(acc);
        }
        let needs_embedding = f0c.max_abs_im() > 0.0 || fic.iter().any(|m| m.max_abs_im() > 0.0);
        let (dim, f0, fi) = if needs_embedding {
            (2 * d, embed_matrix(&f0c), fic.iter().map(embed_matrix).collect())
        } else {
            (d, real_matrix(&f0c), fic.iter().map(real_matrix).collect())
        };
        blocks.push(ipm::ConeBlock { dim, f0, fi });
        block_meta.push((d, needs_embedding));
    }
    ReducedCone { cone: ipm::ConeProblem { n: nr, c: c_red, blocks }, block_meta }
}

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

/// Solve with the default gap tolerance of 1e-8.
pub fn solve_default(p: &SdpProblem) -> SdpSolution {
    solve(p, DEFAULT_TOL)
}

/// Solve to an absolute duality-gap tolerance. Never panics: iteration-limit
/// and conditioning problems come back as status `error` with diagnostics.
pub fn solve(p: &SdpProblem, tol: f64) -> SdpSolution {
    let sol = solve_inner(p, tol);
    audit::record(audit::AuditRecord {
        label: audit::current_label(),
        status: sol.status,
        verified: match sol.status {
            SdpStatus::Optimal => Some(verify_certificate(p, &sol)),
            SdpStatus::Infeasible => Some(verify_infeasibility_certificate(p, &sol)),
            SdpStatus::Error => None,
        },
        gap: sol.gap,
        n_vars: p.n_vars,
    });
    sol
}

fn solve_inner(p: &SdpProblem, tol: f64) -> SdpSolution {
    if !(tol.is_finite() && tol > 0.0) {
        return SdpSolution::error(format!("invalid tolerance {tol}"));
    }
    let (x_p, nullspace) = match eliminate_equalities(p.n_vars, &p.equalities) {
        Elimination::Param { x_p, nullspace } => (x_p, nullspace),
        Elimination::Inconsistent { farkas } => {
            let mut sol = SdpSolution::error("equality constraints are inconsistent");
            sol.status = SdpStatus::Infeasible;
            sol.eq_dual = farkas;
            return sol;
        }
    };
    let reduced = build_cone(p, &x_p, &nullspace);

    if reduced.cone.n == 0 {
        // Equalities pin x completely; just check the point.
        return fully_determined(p, &x_p);
    }

    let settings = ipm::ConeSettings::for_tolerance(tol);
    let out = ipm::solve_cone(&reduced.cone, &settings, None);
    if out.converged {
        return finish_optimal(p, &x_p, &nullspace, &reduced, &out);
    }
    // No convergence: decide feasible-but-stuck vs infeasible via a phase-1
    // program min t s.t. F(z) + t𝟙 ⪰ 0, 1 + t ≥ 0, started strictly feasible.
    match phase_one(&reduced) {
        Phase1::StrictlyFeasible(margin) => SdpSolution::error(format!(
            "did not converge ({}); problem is strictly feasible (margin {margin:.3e})",
            out.note
        )),
        Phase1::Marginal(t) => SdpSolution::error(format!(
            "did not converge ({}); feasibility is marginal (phase-1 value {t:.3e})",
            out.note
        )),
        Phase1::Infeasible { duals } => {
            let block_duals: Vec<HermitianOperator> = reduced
                .block_meta
                .iter()
                .zip(&duals)
                .map(|(&(d, emb), z)| recover_dual(d, emb, z))
                .collect();
            // Normalize to unit total trace, then recover equality multipliers
            // so that Σ⟨F_i, Z⟩ = (Aᵀy)_i and ⟨F_0, Z⟩ + b·y < 0.
            let total: f64 = block_duals.iter().map(|z| z.trace()).sum();
            let block_duals: Vec<HermitianOperator> = if total > 1e-300 {
                block_duals
                    .iter()
                    .map(|z| {
                        HermitianOperator::symmetrized(z.matrix().scale(1.0 / total))
                            .expect("square")
                    })
                    .collect()
            } else {
                block_duals
            };
            let g: Vec<f64> = (0..p.n_vars)
                .map(|i| {
                    p.blocks
                        .iter()
                        .zip(&block_duals)
                        .map(|(blk, z)| blk.matrices[i + 1].inner(z))
                        .sum()
                })
                .collect();
            let y = equality_multipliers(&p.equalities, &g);
            let mut sol = SdpSolution::error("primal infeasible (phase-1 certificate)");
            sol.status = SdpStatus::Infeasible;
            sol.block_duals = block_duals;
            sol.eq_dual = y;
            sol.iterations = out.iterations;
            sol
        }
        Phase1::Failed(msg) => SdpSolution::error(format!(
            "did not converge ({}); phase-1 also failed ({msg})",
            out.note
        )),
    }
}

fn fully_determined(p: &SdpProblem, x_p: &[f64]) -> SdpSolution {
    let mut worst = f64::INFINITY;
    for blk in &p.blocks {
        let mut f = blk.matrices[0].matrix().clone();
        for (i, v) in x_p.iter().enumerate() {
            f = f.add(&blk.matrices[i + 1].matrix().scale(*v));
        }
        let op = HermitianOperator::symmetrized(f).expect("square");
        worst = worst.min(op.min_eigenvalue() / (1.0 + blk.matrices[0].matrix().frobenius_norm()));
    }
    if worst < -1e-9 {
        // A certificate here would need a dual ray consistent with the
        // equalities; this corner is not produced by any caller in the crate,
        // so report it as an error rather than risk an unverifiable claim.
        return SdpSolution::error(format!(
            "equalities determine a unique point that violates the LMIs (relative margin {worst:.3e})"
        ));
    }
    let value = linalg::frob_inner(p.objective(), x_p);
    SdpSolution {
        status: SdpStatus::Optimal,
        x: x_p.to_vec(),
        primal_value: value,
        dual_value: value,
        gap: 0.0,
        block_duals: p.blocks.iter().map(|b| HermitianOperator::zeros(b.dim())).collect(),
        eq_dual: vec![0.0; p.equalities.rows()],
        iterations: 0,
        diagnostics: "point fully determined by equalities".into(),
    }
}

fn finish_optimal(
    p: &SdpProblem,
    x_p: &[f64],
    nullspace: &[Vec<f64>],
    reduced: &ReducedCone,
    out: &ipm::ConeOutcome,
) -> SdpSolution {
    let mut x = x_p.to_vec();
    for (col, zj) in nullspace.iter().zip(&out.x) {
        for (xi, w) in x.iter_mut().zip(col) {
            *xi += zj * w;
        }
    }
    let block_duals: Vec<HermitianOperator> = reduced
        .block_meta
        .iter()
        .zip(&out.z)
        .map(|(&(d, emb), z)| recover_dual(d, emb, z))
        .collect();
    let primal = linalg::frob_inner(p.objective(), &x);
    let offset = linalg::frob_inner(p.objective(), x_p);
    let dual = out.dual + offset;
    let g: Vec<f64> = (0..p.n_vars)
        .map(|i| {
            p.blocks
                .iter()
                .zip(&block_duals)
                .map(|(blk, z)| blk.matrices[i + 1].inner(z))
                .sum()
        })
        .collect();
    let cg: Vec<f64> = p.objective().iter().zip(&g).map(|(c, gi)| c - gi).collect();
    let eq_dual = equality_multipliers(p.equalities(), &cg);
    let mut sol = SdpSolution {
        status: SdpStatus::Optimal,
        x,
        primal_value: primal,
        dual_value: dual,
        gap: (primal - dual).abs(),
        block_duals,
        eq_dual,
        iterations: out.iterations,
        diagnostics: String::new(),
    };
    if !verify_certificate(p, &sol) {
        sol.status = SdpStatus::Error;
        sol.diagnostics = format!(
            "converged numerically but the certificate failed independent verification \
             (gap {:.3e}, pres {:.3e}, dres {:.3e})",
            sol.gap, out.pres, out.dres
        );
    }
    sol
}

enum Phase1 {
    StrictlyFeasible(f64),
    Marginal(f64),
    Infeasible { duals: Vec<Vec<f64>> },
    Failed(String),
}

fn phase_one(reduced: &ReducedCone) -> Phase1 {
    let nr = reduced.cone.n;
    let mut blocks = Vec::with_capacity(reduced.cone.blocks.len() + 1);
    let mut min_eig = f64::INFINITY;
    for b in &reduced.cone.blocks {
        let mut fi = b.fi.clone();
        fi.push(linalg::identity(b.dim));
        min_eig = min_eig.min(linalg::sym_eigenvalues(b.dim, &b.f0)[0]);
        blocks.push(ipm::ConeBlock { dim: b.dim, f0: b.f0.clone(), fi });
    }
    // Box 1 + t ≥ 0 keeps the program bounded below.
    let mut box_fi = vec![vec![0.0]; nr];
    box_fi.push(vec![1.0]);
    blocks.push(ipm::ConeBlock { dim: 1, f0: vec![1.0], fi: box_fi });

    let mut c = vec![0.0; nr + 1];
    c[nr] = 1.0;
    let aux = ipm::ConeProblem { n: nr + 1, c, blocks };

    // Strictly feasible start: z = 0, t just past the most negative eigenvalue.
    let t0 = (-min_eig).max(0.0) + 1.0;
    let mut x0 = vec![0.0; nr + 1];
    x0[nr] = t0;
    let mut s0 = Vec::with_capacity(aux.blocks.len());
    for b in &aux.blocks {
        let mut f = b.f0.clone();
        for (i, m) in b.fi.iter().enumerate() {
            for (dst, src) in f.iter_mut().zip(m) {
                *dst += x0[i] * src;
            }
        }
        s0.push(f);
    }
    let z0: Vec<Vec<f64>> = aux.blocks.iter().map(|b| linalg::identity(b.dim)).collect();

    let out = ipm::solve_cone(&aux, &ipm::ConeSettings::for_tolerance(1e-9), Some((x0, s0, z0)));
    if !out.converged {
        return Phase1::Failed(out.note);
    }
    let t_star = out.primal;
    if t_star >= 1e-7 {
        let mut duals = out.z;
        duals.pop(); // drop the box block
        Phase1::Infeasible { duals }
    } else if t_star <= -1e-7 {
        Phase1::StrictlyFeasible(-t_star)
    } else {
        Phase1::Marginal(t_star)
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

fn f_of_x_complex(blk: &SdpBlock, x: &[f64]) -> HermitianOperator {
    let mut f = blk.matrices[0].matrix().clone();
    for (i, v) in x.iter().enumerate() {
        if *v != 0.0 {
            f = f.add(&blk.matrices[i + 1].matrix().scale(*v));
        }
    }
    HermitianOperator::symmetrized(f).expect("square")
}

/// Independent re-check of an `optimal` solution: primal block feasibility,
/// equality residuals, dual positivity, dual stationarity (projected onto the
/// nullspace of A), complementarity, and value consistency. Pure
/// recomputation; no solver state is reused.
pub fn verify_certificate(p: &SdpProblem, s: &SdpSolution) -> bool {
    if s.status != SdpStatus::Optimal {
        return false;
    }
    if s.x.len() != p.n_vars || !s.x.iter().all(|v| v.is_finite()) {
        return false;
    }
    if s.block_duals.len() != p.blocks.len() {
        return false;
    }
    // Primal feasibility per block.
    for (blk, _) in p.blocks.iter().zip(&s.block_duals) {
        let f = f_of_x_complex(blk, &s.x);
        let scale = 1.0 + blk.matrices[0].matrix().frobenius_norm();
        if f.min_eigenvalue() < -1e-7 * scale {
            return false;
        }
    }
    // Equality residuals.
    let bscale = 1.0 + p.equalities.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (row, bi) in p.equalities.a.iter().zip(&p.equalities.b) {
        if (linalg::frob_inner(row, &s.x) - bi).abs() > 1e-8 * bscale {
            return false;
        }
    }
    // Dual positivity.
    for (blk, z) in p.blocks.iter().zip(&s.block_duals) {
        if z.dim() != blk.dim() {
            return false;
        }
        let scale = 1.0 + z.matrix().frobenius_norm();
        if z.min_eigenvalue() < -1e-7 * scale {
            return false;
        }
    }
    // Stationarity: c − g must lie in range(Aᵀ); with no equalities it must
    // vanish outright.
    let g: Vec<f64> = (0..p.n_vars)
        .map(|i| p.blocks.iter().zip(&s.block_duals).map(|(blk, z)| blk.matrices[i + 1].inner(z)).sum())
        .collect();
    let v: Vec<f64> = p.c.iter().zip(&g).map(|(c, gi)| c - gi).collect();
    let cscale = 1.0 + p.c.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    match eliminate_equalities(p.n_vars, &p.equalities) {
        Elimination::Param { nullspace, .. } => {
            for col in &nullspace {
                if linalg::frob_inner(col, &v).abs() > 1e-6 * cscale {
                    return false;
                }
            }
        }
        Elimination::Inconsistent { .. } => return false,
    }
    // Complementarity ⇒ duality gap: Σ⟨F(x), Z⟩ small.
    let mut comp = 0.0;
    for (blk, z) in p.blocks.iter().zip(&s.block_duals) {
        comp += f_of_x_complex(blk, &s.x).inner(z);
    }
    let pval = linalg::frob_inner(&p.c, &s.x);
    let vscale = 1.0 + pval.abs();
    if comp.abs() > 1e-6 * vscale {
        return false;
    }
    // Reported values must match the recomputation.
    if (s.primal_value - pval).abs() > 1e-9 * vscale {
        return false;
    }
    if s.gap > 1e-6 * vscale {
        return false;
    }
    true
}

/// Check an `infeasible` solution's certificate: either a Farkas vector for
/// inconsistent equalities (yᵀA = 0, y·b > 0), or an improving ray
/// (Z_k ⪰ 0, Σ_k⟨F_i, Z_k⟩ = (Aᵀy)_i, Σ_k⟨F_0, Z_k⟩ + b·y < 0), which rules
/// out every x with A·x = b and F(x) ⪰ 0.
pub fn verify_infeasibility_certificate(p: &SdpProblem, s: &SdpSolution) -> bool {
    if s.status != SdpStatus::Infeasible {
        return false;
    }
    if s.block_duals.is_empty() {
        // Farkas certificate on the equalities alone.
        let y = &s.eq_dual;
        if y.len() != p.equalities.rows() || y.is_empty() {
            return false;
        }
        let ynorm = linalg::frob_norm(y);
        if !(ynorm.is_finite() && ynorm > 1e-12) {
            return false;
        }
        for i in 0..p.n_vars {
            let mut acc = 0.0;
            for (r, row) in p.equalities.a.iter().enumerate() {
                acc += y[r] * row[i];
            }
            if acc.abs() > 1e-7 * ynorm {
                return false;
            }
        }
        let yb = linalg::frob_inner(y, &p.equalities.b);
        let bscale = 1.0 + p.equalities.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        return yb > 1e-8 * bscale * ynorm;
    }
    if s.block_duals.len() != p.blocks.len() {
        return false;
    }
    let mut total = 0.0;
    for (blk, z) in p.blocks.iter().zip(&s.block_duals) {
        if z.dim() != blk.dim() {
            return false;
        }
        let scale = 1.0 + z.matrix().frobenius_norm();
        if z.min_eigenvalue() < -1e-7 * scale {
            return false;
        }
        total += z.trace();
    }
    if (total - 1.0).abs() > 1e-6 {
        return false;
    }
    let g: Vec<f64> = (0..p.n_vars)
        .map(|i| p.blocks.iter().zip(&s.block_duals).map(|(blk, z)| blk.matrices[i + 1].inner(z)).sum())
        .collect();
    let y = &s.eq_dual;
    if y.len() != p.equalities.rows() {
        return false;
    }
    for (i, gi) in g.iter().enumerate() {
        let mut aty = 0.0;
        for (r, row) in p.equalities.a.iter().enumerate() {
            aty += y[r] * row[i];
        }
        if (gi - aty).abs() > 1e-6 {
            return false;
        }
    }
    let f0z: f64 = p.blocks.iter().zip(&s.block_duals).map(|(blk, z)| blk.matrices[0].inner(z)).sum();
    let by = linalg::frob_inner(y, &p.equalities.b);
    f0z + by < -1e-8
}

// ---------------------------------------------------------------------------
// Audit registry
// ---------------------------------------------------------------------------

/// Process-wide record of every solve: label scope, status, and whether the
/// certificate passed independent verification. Lets a test suite assert
/// after the fact that no unverified solve slipped into a result.
pub mod audit {
    use super::SdpStatus;
    use std::cell::RefCell;
    use std::sync::Mutex;

    #[derive(Debug, Clone)]
    pub struct AuditRecord {
        pub label: String,
        pub status: SdpStatus,
        /// `Some(ok)` for optimal/infeasible outcomes, `None` for errors.
        pub verified: Option<bool>,
        pub gap: f64,
        pub n_vars: usize,
    }

    static REGISTRY: Mutex<Vec<AuditRecord>> = Mutex::new(Vec::new());

    thread_local! {
        static LABELS: RefCell<Vec<String>> = const { RefCell::new(Vec::new()) };
    }

    struct LabelGuard;

    impl Drop for LabelGuard {
        fn drop(&mut self) {
            LABELS.with(|l| {
                l.borrow_mut().pop();
            });
        }
    }

    /// Run `f` with `label` pushed onto this thread's label stack; solves
    /// inside record the joined stack.
    pub fn with_label<T>(label: &str, f: impl FnOnce() -> T) -> T {
        LABELS.with(|l| l.borrow_mut().push(label.to_string()));
        let _guard = LabelGuard;
        f()
    }

    pub fn current_label() -> String {
        LABELS.with(|l| l.borrow().join("/"))
    }

    pub(super) fn record(rec: AuditRecord) {
        REGISTRY.lock().expect("audit registry poisoned").push(rec);
    }

    pub fn records() -> Vec<AuditRecord> {
        REGISTRY.lock().expect("audit registry poisoned").clone()
    }

    pub fn clear() {
        REGISTRY.lock().expect("audit registry poisoned").clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexMatrix;
    use crate::eig;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn op(entries: Vec<Complex64>, d: usize) -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_vec(d, d, entries).unwrap()).unwrap()
    }

    fn real_op(entries: &[f64], d: usize) -> HermitianOperator {
        op(entries.iter().map(|v| Complex64::new(*v, 0.0)).collect(), d)
    }

    fn lambda_max_problem(h: &ComplexMatrix) -> SdpProblem {
        let d = h.rows();
        let f0 = HermitianOperator::new(h.scale(-1.0)).unwrap();
        let f1 = HermitianOperator::identity(d);
        SdpProblem::new(
            vec![1.0],
            vec![SdpBlock { matrices: vec![f0, f1] }],
            LinearEqualities::none(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_lower_bound() {
        // minimize x s.t. x − 1 ⪰ 0 (1×1 block) → x = 1.
        let p = SdpProblem::new(
            vec![1.0],
            vec![SdpBlock { matrices: vec![real_op(&[-1.0], 1), real_op(&[1.0], 1)] }],
            LinearEqualities::none(),
        )
        .unwrap();
        let s = solve_default(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-7);
        assert!(verify_certificate(&p, &s));
    }

    #[test]
    fn max_eigenvalue_diagonal() {
        // minimize t s.t. t𝟙 − diag(1,2) ⪰ 0 → t = 2.
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(2.0, 0.0);
        let p = lambda_max_problem(&h);
        let s = solve(&p, 1e-9);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_value, 2.0, epsilon = 1e-8);
        assert!(s.gap <= 1e-9);
    }

    #[test]
    fn complex_block_embedding() {
        // λmax of Pauli Y is 1; exercises the complex → real path.
        let y = crate::quantum::pauli_y();
        let p = lambda_max_problem(&y);
        let s = solve(&p, 1e-9);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_value, 1.0, epsilon = 1e-8);
        // The dual is a complex density matrix on the original space.
        let z = &s.block_duals[0];
        assert_abs_diff_eq!(z.trace(), 1.0, epsilon = 1e-6);
        assert!(z.min_eigenvalue() >= -1e-7);
    }

    #[test]
    fn embedding_doubles_multiplicities() {
        let y = crate::quantum::pauli_y();
        let e = embed_matrix(&y);
        let vals = linalg::sym_eigenvalues(4, &e);
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_max_agrees_with_eigensolver() {
        // 100 random Hermitian 4×4: SDP value vs Jacobi eigensolver to 1e-8.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut m = ComplexMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let h = m.hermitize();
            let p = lambda_max_problem(&h);
            let s = solve(&p, 1e-9);
            assert_eq!(s.status, SdpStatus::Optimal);
            let direct = eig::max_eigenvalue_of(&h).unwrap();
            assert_abs_diff_eq!(s.primal_value, direct, epsilon = 1e-8);
            assert!(s.dual_value <= s.primal_value + 1e-9, "weak duality");
        }
    }

    #[test]
    fn deterministic_bit_for_bit() {
        let mut h = ComplexMatrix::zeros(3, 3);
        h[(0, 0)] = Complex64::new(0.3, 0.0);
        h[(0, 2)] = Complex64::new(0.1, -0.4);
        h[(2, 0)] = Complex64::new(0.1, 0.4);
        h[(1, 1)] = Complex64::new(-0.2, 0.0);
        h[(2, 2)] = Complex64::new(0.9, 0.0);
        let p = lambda_max_problem(&h);
        let s1 = solve(&p, 1e-9);
        let s2 = solve(&p, 1e-9);
        assert_eq!(s1.x[0].to_bits(), s2.x[0].to_bits());
        assert_eq!(s1.primal_value.to_bits(), s2.primal_value.to_bits());
    }

    #[test]
    fn equality_constrained_split() {
        // minimize x+y s.t. x+y = 3, x − 1 ⪰ 0, y − 1 ⪰ 0 → value 3.
        let blocks = vec![
            SdpBlock {
                matrices: vec![real_op(&[-1.0], 1), real_op(&[1.0], 1), real_op(&[0.0], 1)],
            },
            SdpBlock {
                matrices: vec![real_op(&[-1.0], 1), real_op(&[0.0], 1), real_op(&[1.0], 1)],
            },
        ];
        let eq = LinearEqualities { a: vec![vec![1.0, 1.0]], b: vec![3.0] };
        let p = SdpProblem::new(vec![1.0, 1.0], blocks, eq).unwrap();
        let s = solve(&p, 1e-9);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_value, 3.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.x[0] + s.x[1], 3.0, epsilon = 1e-9);
        assert!(verify_certificate(&p, &s));
    }

    #[test]
    fn inconsistent_equalities_yield_farkas() {
        let blocks = vec![SdpBlock { matrices: vec![real_op(&[0.0], 1), real_op(&[1.0], 1)] }];
        let eq = LinearEqualities { a: vec![vec![1.0], vec![1.0]], b: vec![1.0, 2.0] };
        let p = SdpProblem::new(vec![1.0], blocks, eq).unwrap();
        let s = solve_default(&p);
        assert_eq!(s.status, SdpStatus::Infeasible);
        assert!(verify_infeasibility_certificate(&p, &s));
    }

    #[test]
    fn infeasible_lmi_yields_improving_ray() {
        // x − 1 ⪰ 0 together with −x − 1 ⪰ 0 is empty.
        let blocks = vec![
            SdpBlock { matrices: vec![real_op(&[-1.0], 1), real_op(&[1.0], 1)] },
            SdpBlock { matrices: vec![real_op(&[-1.0], 1), real_op(&[-1.0], 1)] },
        ];
        let p = SdpProblem::new(vec![1.0], blocks, LinearEqualities::none()).unwrap();
        let s = solve_default(&p);
        assert_eq!(s.status, SdpStatus::Infeasible, "{}", s.diagnostics);
        assert!(verify_infeasibility_certificate(&p, &s));
        // The certificate must also *fail* optimality verification.
        assert!(!verify_certificate(&p, &s));
    }

    #[test]
    fn perturbed_solution_fails_verification() {
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(2.0, 0.0);
        let p = lambda_max_problem(&h);
        let mut s = solve(&p, 1e-9);
        assert!(verify_certificate(&p, &s));
        // Stepping onto the wrong side of the active constraint must be caught.
        s.x[0] -= 1e-3;
        s.primal_value = s.x[0];
        assert!(!verify_certificate(&p, &s));
    }

    #[test]
    fn suboptimal_point_with_mismatched_dual_fails_gap_check() {
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(2.0, 0.0);
        let p = lambda_max_problem(&h);
        let mut s = solve(&p, 1e-9);
        // t = 3 is feasible but suboptimal; the optimal dual no longer matches.
        s.x[0] = 3.0;
        s.primal_value = 3.0;
        assert!(!verify_certificate(&p, &s));
        // Zeroed dual breaks stationarity instead.
        let mut s2 = solve(&p, 1e-9);
        s2.block_duals = vec![HermitianOperator::zeros(2)];
        assert!(!verify_certificate(&p, &s2));
    }

    #[test]
    fn problem_serde_round_trip() {
        let y = crate::quantum::pauli_y();
        let p = lambda_max_problem(&y);
        let text = serde_json::to_string(&p).unwrap();
        let back: SdpProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        let s = solve(&p, 1e-9);
        let stext = serde_json::to_string(&s).unwrap();
        let sback: SdpSolution = serde_json::from_str(&stext).unwrap();
        assert_eq!(sback.status, SdpStatus::Optimal);
        assert_eq!(sback.x[0].to_bits(), s.x[0].to_bits());
        assert!(verify_certificate(&p, &sback));
    }

    #[test]
    fn oversized_problem_rejected() {
        let d = 300;
        let big = HermitianOperator::zeros(d);
        let res = SdpProblem::new(
            vec![1.0],
            vec![SdpBlock { matrices: vec![big.clone(), big] }],
            LinearEqualities::none(),
        );
        assert!(res.is_err());
    }

    #[test]
    fn audit_registry_labels_solves() {
        audit::with_label("unit-test-scope", || {
            let mut h = ComplexMatrix::zeros(2, 2);
            h[(0, 0)] = Complex64::new(4.0, 0.0);
            let p = lambda_max_problem(&h);
            let _ = solve(&p, 1e-9);
        });
        let recs = audit::records();
        let rec = recs
            .iter()
            .rev()
            .find(|r| r.label == "unit-test-scope")
            .expect("labelled record present");
        assert_eq!(rec.status, SdpStatus::Optimal);
        assert_eq!(rec.verified, Some(true));
    }
}
