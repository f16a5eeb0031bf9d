//! Primal-dual interior-point core for real symmetric cone programs.
//!
//! Solves   minimize  c·x   subject to   F_k(x) = F0_k + Σ_i x_i Fi_k ⪰ 0
//! for every block k, with Nesterov–Todd scaling and a Mehrotra
//! predictor-corrector step. Equality constraints and complex blocks are
//! handled by the caller (nullspace elimination and real embedding); this
//! module sees only real symmetric data.
//!
//! Derivation notes, in the scaled space per block (R from the NT scaling
//! point, Λ = R⁻¹SR⁻ᵀ = RᵀZR diagonal):
//!   Q_i = R⁻¹ Fi R⁻ᵀ,     P = R⁻¹ (F(x) − S) R⁻ᵀ,
//!   M[i][j] = Σ_k ⟨Q_i, Q_j⟩   (Schur complement of the Newton system),
//!   M·dx = −r_d + Σ_k ⟨Q_i, T̃ − P⟩,
//!   D̃Z = −P − Σ_j dx_j Q_j + T̃,   D̃S = T̃ − D̃Z,
//!   dS = R·D̃S·Rᵀ,   dZ = R⁻ᵀ·D̃Z·R⁻¹,
//! where T̃ solves the symmetrized complementarity linearization: T̃_ij =
//! 2·T_ij/(λ_i+λ_j), with T = −Λ² for the predictor and
//! T = σμ𝟙 − Λ² − sym(D̃S_aff·D̃Z_aff) for the corrector. The primal Newton
//! equation Σ_i dx_i Fi − dS = S − F(x) then holds exactly by construction.

use super::linalg as la;

/// One real symmetric LMI block F0 + Σ x_i Fi ⪰ 0 (row-major dense).
pub struct ConeBlock {
    pub dim: usize,
    pub f0: Vec<f64>,
    pub fi: Vec<Vec<f64>>,
}

/// Cone program in solver-ready form.
pub struct ConeProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub blocks: Vec<ConeBlock>,
}

/// Raw iterate returned by the core loop.
pub struct ConeOutcome {
    pub converged: bool,
    pub x: Vec<f64>,
    /// Dual matrix per block.
    pub z: Vec<Vec<f64>>,
    pub primal: f64,
    pub dual: f64,
    pub pres: f64,
    pub dres: f64,
    pub iterations: usize,
    pub note: String,
}

pub struct ConeSettings {
    /// Absolute duality-gap target |c·x − dual| ≤ gap_tol.
    pub gap_tol: f64,
    /// Relative feasibility target for primal and dual residuals.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl ConeSettings {
    /// Gap target `tol` with residuals at min(tol, 1e-9). Pushing residuals a
    /// further decade below the gap looks stricter but parks the stopping
    /// point at the edge of double precision, where the scaling factorizations
    /// break down one step before the test can pass.
    pub fn for_tolerance(tol: f64) -> Self {
        ConeSettings { gap_tol: tol, feas_tol: tol.min(1e-9), max_iter: 200 }
    }
}

/// Warm-start iterate (x, S blocks, Z blocks); S and Z must be strictly PD.
pub type ConeInit = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn f_of_x(b: &ConeBlock, x: &[f64]) -> Vec<f64> {
    let mut m = b.f0.clone();
    for (i, fi) in b.fi.iter().enumerate() {
        let xi = x[i];
        if xi != 0.0 {
            for (dst, src) in m.iter_mut().zip(fi) {
                *dst += xi * src;
            }
        }
    }
    m
}

/// Largest α ≤ cap with Λ + α·D̃ ≻ 0, i.e. α < −1/λmin(Λ^{-1/2} D̃ Λ^{-1/2}).
fn step_bound(dim: usize, lambda: &[f64], dtilde: &[f64], cap: f64) -> f64 {
    let mut scaled = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            scaled[i * dim + j] = dtilde[i * dim + j] / (lambda[i] * lambda[j]).sqrt();
        }
    }
    let lo = la::sym_eigenvalues(dim, &scaled)[0];
    if lo >= -1e-14 {
        cap
    } else {
        cap.min(-1.0 / lo)
    }
}

/// Cholesky with a diagonal ridge retry; the ridge grows ×100 per attempt.
fn chol_with_jitter(n: usize, a: &[f64]) -> Result<Vec<f64>, String> {
    match la::chol(n, a) {
        Ok(l) => return Ok(l),
        Err(_) => {}
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let mut ridge = 1e-14 * (trace.abs() / n as f64).max(1.0);
    for _ in 0..3 {
        let mut aj = a.to_vec();
        for i in 0..n {
            aj[i * n + i] += ridge;
        }
        if let Ok(l) = la::chol(n, &aj) {
            return Ok(l);
        }
        ridge *= 100.0;
    }
    Err("matrix not positive definite (ridge retries exhausted)".into())
}

struct Scaling {
    r: Vec<f64>,
    rinv: Vec<f64>,
    lambda: Vec<f64>,
}

/// NT scaling point of a (S, Z) pair: R with R⁻¹SR⁻ᵀ = RᵀZR = Λ.
fn nt_scaling(dim: usize, s: &[f64], z: &[f64]) -> Result<Scaling, String> {
    let l1 = chol_with_jitter(dim, s).map_err(|e| format!("primal slack: {e}"))?;
    let l2 = chol_with_jitter(dim, z).map_err(|e| format!("dual variable: {e}"))?;
    // L2ᵀ·L1 = U·Σ·Vᵀ  →  R = L1·V·Σ^{-1/2},  R⁻¹ = Σ^{1/2}·Vᵀ·L1⁻¹,  Λ = Σ.
    let l2t_l1 = la::mul_tn(dim, dim, dim, &l2, &l1);
    let (_, sigma, v) = la::jacobi_svd(dim, dim, &l2t_l1);
    if sigma[dim - 1] <= 0.0 {
        return Err("scaling point is singular".into());
    }
    let mut r = la::mul_nn(dim, dim, dim, &l1, &v);
    for i in 0..dim {
        for j in 0..dim {
            r[i * dim + j] /= sigma[j].sqrt();
        }
    }
    let l1inv = la::lower_inverse(dim, &l1);
    let mut rinv = la::mul_tn(dim, dim, dim, &v, &l1inv);
    for i in 0..dim {
        for j in 0..dim {
            rinv[i * dim + j] *= sigma[i].sqrt();
        }
    }
    Ok(Scaling { r, rinv, lambda: sigma })
}

/// A·B·Aᵀ for square row-major A, B.
fn congruence(dim: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = la::mul_nn(dim, dim, dim, a, b);
    la::mul_nt(dim, dim, dim, &ab, a)
}

pub fn solve_cone(p: &ConeProblem, settings: &ConeSettings, init: Option<ConeInit>) -> ConeOutcome {
    let n = p.n;
    let m_total: usize = p.blocks.iter().map(|b| b.dim).sum();
    let c_scale = 1.0 + p.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let (mut x, mut s_blocks, mut z_blocks) = init.unwrap_or_else(|| {
        let x0 = vec![0.0; n];
        let mut s0 = Vec::with_capacity(p.blocks.len());
        let mut z0 = Vec::with_capacity(p.blocks.len());
        for b in &p.blocks {
            let scale = 1.0 + la::frob_norm(&b.f0);
            let mut m = la::identity(b.dim);
            for v in m.iter_mut() {
                *v *= scale;
            }
            s0.push(m);
            z0.push(la::identity(b.dim));
        }
        (x0, s0, z0)
    });

    let mut best: Option<(f64, ConeOutcome)> = None;
    let mut stalls = 0usize;
    let mut note = String::new();

    for iter in 0..settings.max_iter {
        // Residuals and objective values at the current iterate.
        let fx: Vec<Vec<f64>> = p.blocks.iter().map(|b| f_of_x(b, &x)).collect();
        let mut pres = 0.0_f64;
        for (k, b) in p.blocks.iter().enumerate() {
            let mut diff = fx[k].clone();
            for (d, s) in diff.iter_mut().zip(&s_blocks[k]) {
                *d -= s;
            }
            pres = pres.max(la::frob_norm(&diff) / (1.0 + la::frob_norm(&b.f0)));
        }
        let mut r_d = vec![0.0; n];
        for (i, rdi) in r_d.iter_mut().enumerate() {
            let mut g = 0.0;
            for (k, b) in p.blocks.iter().enumerate() {
                g += la::frob_inner(&b.fi[i], &z_blocks[k]);
            }
            *rdi = p.c[i] - g;
        }
        let dres = r_d.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / c_scale;
        let primal: f64 = la::frob_inner(&p.c, &x);
        let dual: f64 = -p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| la::frob_inner(&b.f0, &z_blocks[k]))
            .sum::<f64>();
        let gap_abs = (primal - dual).abs();

        let make_outcome = |converged: bool, note: String| ConeOutcome {
            converged,
            x: x.clone(),
            z: z_blocks.clone(),
            primal,
            dual,
            pres,
            dres,
            iterations: iter,
            note,
        };

        if pres <= settings.feas_tol && dres <= settings.feas_tol && gap_abs <= settings.gap_tol {
            return make_outcome(true, String::new());
        }
        let merit = pres.max(dres).max(gap_abs);
        if best.as_ref().map_or(true, |(m, _)| merit < *m) {
            best = Some((merit, make_outcome(false, String::new())));
        }
        if !primal.is_finite() || !dual.is_finite() || primal.abs() > 1e12 {
            note = format!("diverged at iteration {iter}: primal {primal:.3e}, dual {dual:.3e}");
            break;
        }

        // Nesterov–Todd scaling per block.
        let mut scalings = Vec::with_capacity(p.blocks.len());
        let mut scaling_failed = false;
        for (k, b) in p.blocks.iter().enumerate() {
            match nt_scaling(b.dim, &s_blocks[k], &z_blocks[k]) {
                Ok(sc) => scalings.push(sc),
                Err(e) => {
                    note = format!("scaling failed at iteration {iter}, block {k}: {e}");
                    scaling_failed = true;
                    break;
                }
            }
        }
        if scaling_failed {
            break;
        }
        let mu: f64 = scalings
            .iter()
            .map(|sc| sc.lambda.iter().map(|l| l * l).sum::<f64>())
            .sum::<f64>()
            / m_total as f64;

        // Scaled constraint matrices and primal residual.
        let q: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|i| {
                p.blocks
                    .iter()
                    .enumerate()
                    .map(|(k, b)| congruence(b.dim, &scalings[k].rinv, &b.fi[i]))
                    .collect()
            })
            .collect();
        let rp_scaled: Vec<Vec<f64>> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let mut diff = fx[k].clone();
                for (d, s) in diff.iter_mut().zip(&s_blocks[k]) {
                    *d -= s;
                }
                congruence(b.dim, &scalings[k].rinv, &diff)
            })
            .collect();

        // Schur complement M[i][j] = Σ_k ⟨Q_i, Q_j⟩, factored once per iteration.
        let mut m_sys = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..p.blocks.len() {
                    acc += la::frob_inner(&q[i][k], &q[j][k]);
                }
                m_sys[i * n + j] = acc;
                m_sys[j * n + i] = acc;
            }
        }
        let m_chol = match chol_with_jitter(n, &m_sys) {
            Ok(l) => l,
            Err(e) => {
                note = format!("Newton system singular at iteration {iter}: {e}");
                break;
            }
        };

        // Direction for a given complementarity target T̃ (per block).
        let solve_direction = |ttilde: &[Vec<f64>]| -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
            let mut rhs = vec![0.0; n];
            for (i, r) in rhs.iter_mut().enumerate() {
                let mut acc = -r_d[i];
                for k in 0..p.blocks.len() {
                    let mut tmp = ttilde[k].clone();
                    for (t, pm) in tmp.iter_mut().zip(&rp_scaled[k]) {
                        *t -= pm;
                    }
                    acc += la::frob_inner(&q[i][k], &tmp);
                }
                *r = acc;
            }
            la::chol_solve(n, &m_chol, &mut rhs);
            let dx = rhs;
            let mut dz_t = Vec::with_capacity(p.blocks.len());
            let mut ds_t = Vec::with_capacity(p.blocks.len());
            for k in 0..p.blocks.len() {
                let dim = p.blocks[k].dim;
                let mut dzt = ttilde[k].clone();
                for (d, pm) in dzt.iter_mut().zip(&rp_scaled[k]) {
                    *d -= pm;
                }
                for (j, dxj) in dx.iter().enumerate() {
                    if *dxj != 0.0 {
                        for (d, qv) in dzt.iter_mut().zip(&q[j][k]) {
                            *d -= dxj * qv;
                        }
                    }
                }
                la::symmetrize(dim, &mut dzt);
                let mut dst = ttilde[k].clone();
                for (d, z) in dst.iter_mut().zip(&dzt) {
                    *d -= z;
                }
                dz_t.push(dzt);
                ds_t.push(dst);
            }
            (dx, ds_t, dz_t)
        };

        // Predictor: T = −Λ², so T̃ = −Λ.
        let ttilde_aff: Vec<Vec<f64>> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let mut t = vec![0.0; b.dim * b.dim];
                for i in 0..b.dim {
                    t[i * b.dim + i] = -scalings[k].lambda[i];
                }
                t
            })
            .collect();
        let (_dx_aff, ds_aff, dz_aff) = solve_direction(&ttilde_aff);

        let mut alpha_aff = 1.0_f64;
        for (k, b) in p.blocks.iter().enumerate() {
            alpha_aff = step_bound(b.dim, &scalings[k].lambda, &ds_aff[k], alpha_aff);
            alpha_aff = step_bound(b.dim, &scalings[k].lambda, &dz_aff[k], alpha_aff);
        }
        // μ after the full predictor step, from scaled inner products.
        let mut mu_aff_sum = 0.0;
        for (k, _) in p.blocks.iter().enumerate() {
            let lam = &scalings[k].lambda;
            let dim = p.blocks[k].dim;
            let mut lam_mat = vec![0.0; dim * dim];
            for i in 0..dim {
                lam_mat[i * dim + i] = lam[i];
            }
            let ll = la::frob_inner(&lam_mat, &lam_mat);
            let ls = la::frob_inner(&lam_mat, &ds_aff[k]);
            let lz = la::frob_inner(&lam_mat, &dz_aff[k]);
            let sz = la::frob_inner(&ds_aff[k], &dz_aff[k]);
            mu_aff_sum += ll + alpha_aff * (ls + lz) + alpha_aff * alpha_aff * sz;
        }
        let mu_aff = (mu_aff_sum / m_total as f64).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: T = σμ𝟙 − Λ² − sym(D̃S_aff·D̃Z_aff).
        let ttilde: Vec<Vec<f64>> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let dim = b.dim;
                let lam = &scalings[k].lambda;
                let mut cross = la::mul_nn(dim, dim, dim, &ds_aff[k], &dz_aff[k]);
                la::symmetrize(dim, &mut cross);
                let mut t = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        let mut tij = -cross[i * dim + j];
                        if i == j {
                            tij += sigma * mu - lam[i] * lam[i];
                        }
                        t[i * dim + j] = 2.0 * tij / (lam[i] + lam[j]);
                    }
                }
                t
            })
            .collect();
        let (dx, ds_t, dz_t) = solve_direction(&ttilde);

        let mut alpha = 1.0_f64;
        for (k, b) in p.blocks.iter().enumerate() {
            alpha = step_bound(b.dim, &scalings[k].lambda, &ds_t[k], alpha);
            alpha = step_bound(b.dim, &scalings[k].lambda, &dz_t[k], alpha);
        }
        alpha = (0.99 * alpha).min(1.0);
        if alpha < 1e-10 {
            stalls += 1;
            if stalls >= 2 {
                note = format!("step length collapsed at iteration {iter}");
                break;
            }
        } else {
            stalls = 0;
        }

        for (xi, dxi) in x.iter_mut().zip(&dx) {
            *xi += alpha * dxi;
        }
        for (k, b) in p.blocks.iter().enumerate() {
            let dim = b.dim;
            let ds = congruence(dim, &scalings[k].r, &ds_t[k]);
            // dZ = R⁻ᵀ·D̃Z·R⁻¹ — congruence with R⁻ᵀ, i.e. rows/cols swapped.
            let rinv_t: Vec<f64> = {
                let mut t = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        t[i * dim + j] = scalings[k].rinv[j * dim + i];
                    }
                }
                t
            };
            let dz = congruence(dim, &rinv_t, &dz_t[k]);
            for (sv, d) in s_blocks[k].iter_mut().zip(&ds) {
                *sv += alpha * d;
            }
            for (zv, d) in z_blocks[k].iter_mut().zip(&dz) {
                *zv += alpha * d;
            }
            la::symmetrize(dim, &mut s_blocks[k]);
            la::symmetrize(dim, &mut z_blocks[k]);
        }
    }

    // Convergence not reached: report the best iterate with diagnostics.
    let (_, mut out) = best.unwrap_or_else(|| {
        (
            f64::INFINITY,
            ConeOutcome {
                converged: false,
                x,
                z: z_blocks,
                primal: f64::NAN,
                dual: f64::NAN,
                pres: f64::INFINITY,
                dres: f64::INFINITY,
                iterations: settings.max_iter,
                note: String::new(),
            },
        )
    });
    if note.is_empty() {
        note = "iteration limit reached".into();
    }
    out.note = format!(
        "{note}; best iterate: pres {:.3e}, dres {:.3e}, gap {:.3e}",
        out.pres,
        out.dres,
        (out.primal - out.dual).abs()
    );
    out.converged = false;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_block(f0: f64, fi: Vec<f64>) -> ConeBlock {
        ConeBlock { dim: 1, f0: vec![f0], fi: fi.into_iter().map(|v| vec![v]).collect() }
    }

    #[test]
    fn one_dimensional_bound() {
        // minimize x  s.t.  x − 1 ≥ 0.
        let p = ConeProblem { n: 1, c: vec![1.0], blocks: vec![scalar_block(-1.0, vec![1.0])] };
        let out = solve_cone(&p, &ConeSettings::for_tolerance(1e-9), None);
        assert!(out.converged, "{}", out.note);
        assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(out.primal, 1.0, epsilon = 1e-8);
        assert!(out.dual <= out.primal + 1e-9);
    }

    #[test]
    fn max_eigenvalue_reformulation() {
        // minimize t  s.t.  t·𝟙 − diag(1,2) ⪰ 0  →  t = 2.
        let p = ConeProblem {
            n: 1,
            c: vec![1.0],
            blocks: vec![ConeBlock {
                dim: 2,
                f0: vec![-1.0, 0.0, 0.0, -2.0],
                fi: vec![vec![1.0, 0.0, 0.0, 1.0]],
            }],
        };
        let out = solve_cone(&p, &ConeSettings::for_tolerance(1e-9), None);
        assert!(out.converged, "{}", out.note);
        assert_abs_diff_eq!(out.primal, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn two_blocks_active_inactive() {
        // minimize x + y  s.t.  x − 1 ≥ 0,  y − 2 ≥ 0,  5 − x ≥ 0.
        let p = ConeProblem {
            n: 2,
            c: vec![1.0, 1.0],
            blocks: vec![
                scalar_block(-1.0, vec![1.0, 0.0]),
                scalar_block(-2.0, vec![0.0, 1.0]),
                scalar_block(5.0, vec![-1.0, 0.0]),
            ],
        };
        let out = solve_cone(&p, &ConeSettings::for_tolerance(1e-9), None);
        assert!(out.converged, "{}", out.note);
        assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(out.x[1], 2.0, epsilon = 1e-7);
    }

    #[test]
    fn dual_certifies_value() {
        // minimize t  s.t.  t𝟙 − A ⪰ 0 with A = [[1, 0.5], [0.5, 0]]:
        // t* = λmax(A) = (1+√2)/2.
        let p = ConeProblem {
            n: 1,
            c: vec![1.0],
            blocks: vec![ConeBlock {
                dim: 2,
                f0: vec![-1.0, -0.5, -0.5, 0.0],
                fi: vec![vec![1.0, 0.0, 0.0, 1.0]],
            }],
        };
        let out = solve_cone(&p, &ConeSettings::for_tolerance(1e-10), None);
        assert!(out.converged, "{}", out.note);
        let want = 0.5 * (1.0 + 2.0_f64.sqrt());
        assert_abs_diff_eq!(out.primal, want, epsilon = 1e-9);
        assert_abs_diff_eq!(out.dual, want, epsilon = 1e-9);
        // Dual matrix is PSD with unit trace (λmax dual is a density matrix).
        let z = &out.z[0];
        assert_abs_diff_eq!(z[0] + z[3], 1.0, epsilon = 1e-7);
        assert!(z[0] * z[3] - z[1] * z[2] >= -1e-9);
    }

    #[test]
    fn infeasible_problem_does_not_converge() {
        // x − 1 ≥ 0 and −x − 1 ≥ 0 cannot both hold.
        let p = ConeProblem {
            n: 1,
            c: vec![1.0],
            blocks: vec![scalar_block(-1.0, vec![1.0]), scalar_block(-1.0, vec![-1.0])],
        };
        let out = solve_cone(&p, &ConeSettings::for_tolerance(1e-9), None);
        assert!(!out.converged);
    }
}
