//! End-to-end simulated experiments: Werner-state visibility sweeps through
//! the full pipeline (state → assemblage → correlations → noise → finite
//! sampling → certified bounds), with Monte Carlo error bars and figure-data
//! emission.
//!
//! Randomness comes exclusively from ChaCha12 (a named, portable, seedable
//! generator), so every sampled table and every CSV byte reproduces across
//! platforms for a fixed seed.

use crate::error::{Error, Result};
use crate::mdi::{
    self, apply_bias, apply_loss, correlations, CorrelationTensor, NoiseSpec, QuantumInputs,
};
use crate::quantum::{bell_povm, pauli_mub_assembly, werner_state};
use crate::robustness::{entanglement_robustness, incompatibility_robustness};
use crate::steering::{assemblage_from_state, steering_robustness};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Output file names for a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOutputs {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_plot")]
    pub plot: String,
}

fn default_csv() -> String {
    "sweep.csv".into()
}

fn default_plot() -> String {
    "plot_sweep.py".into()
}

impl Default for SweepOutputs {
    fn default() -> Self {
        Self { csv: default_csv(), plot: default_plot() }
    }
}

fn default_resamples() -> usize {
    100
}

/// Configuration of a visibility sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SweepConfigJson", into = "SweepConfigJson")]
pub struct SweepConfig {
    pub v_grid: Vec<f64>,
    /// Shots per (setting, input) pair; 0 computes from exact probabilities.
    pub shots: u64,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Bootstrap resamples behind the std column (ignored when shots = 0).
    pub n_resamples: usize,
    pub outputs: SweepOutputs,
}

#[derive(Serialize, Deserialize)]
struct SweepConfigJson {
    v_grid: Vec<f64>,
    shots: u64,
    noise: NoiseSpec,
    seed: u64,
    #[serde(default = "default_resamples")]
    n_resamples: usize,
    #[serde(default)]
    outputs: SweepOutputs,
}

impl From<SweepConfig> for SweepConfigJson {
    fn from(c: SweepConfig) -> Self {
        SweepConfigJson {
            v_grid: c.v_grid,
            shots: c.shots,
            noise: c.noise,
            seed: c.seed,
            n_resamples: c.n_resamples,
            outputs: c.outputs,
        }
    }
}

impl TryFrom<SweepConfigJson> for SweepConfig {
    type Error = Error;
    fn try_from(j: SweepConfigJson) -> Result<Self> {
        SweepConfig::new(j.v_grid, j.shots, j.noise, j.seed, j.n_resamples, j.outputs)
    }
}

impl SweepConfig {
    pub fn new(
        v_grid: Vec<f64>,
        shots: u64,
        noise: NoiseSpec,
        seed: u64,
        n_resamples: usize,
        outputs: SweepOutputs,
    ) -> Result<Self> {
        if v_grid.is_empty() {
            return Err(Error::InvalidParameter("empty visibility grid".into()));
        }
        for pair in v_grid.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::InvalidParameter("visibility grid must be sorted ascending".into()));
            }
        }
        for v in &v_grid {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidParameter(format!("visibility {v} outside [0,1]")));
            }
        }
        if shots > 0 && n_resamples < 2 {
            return Err(Error::InvalidParameter("need at least 2 bootstrap resamples".into()));
        }
        Ok(Self { v_grid, shots, noise, seed, n_resamples, outputs })
    }
}

/// One grid point of a sweep: the averaged and per-outcome certified values,
/// the three reference robustnesses of the underlying state and assembly, and
/// the bootstrap standard deviation of the averaged value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub v: f64,
    pub s_avg: f64,
    pub s_b: [f64; 4],
    pub sr: f64,
    pub er: f64,
    pub ir: f64,
    pub std_s: f64,
    pub shots: u64,
    pub status: String,
}

// ---------------------------------------------------------------------------
// Finite-shot sampling
// ---------------------------------------------------------------------------

/// One multinomial draw by binomial splitting: each cell is drawn from the
/// binomial conditional on the counts not yet assigned.
fn multinomial(rng: &mut ChaCha12Rng, shots: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left: f64 = probs.iter().sum();
    for (i, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let cond = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, cond)
            .map_err(|e| Error::InvalidParameter(format!("binomial parameters: {e}")))?
            .sample(rng);
        counts[i] = draw;
        remaining -= draw;
        mass_left = (mass_left - p).max(0.0);
    }
    Ok(counts)
}

/// Samples empirical frequencies for each (x,y) pair; tolerates lossy tables
/// by routing the missing probability mass to an unrecorded no-click cell.
fn sample_table(p: &CorrelationTensor, shots: u64, seed: u64) -> Result<CorrelationTensor> {
    if shots == 0 {
        return Err(Error::InvalidParameter(
            "shots must be positive; use the exact table for shots = 0".into(),
        ));
    }
    let (na, nb, nx, ny) = p.dims();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut flat = vec![0.0; na * nb * nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let mut cells: Vec<f64> = Vec::with_capacity(na * nb + 1);
            for a in 0..na {
                for b in 0..nb {
                    cells.push(p.value(a, b, x, y));
                }
            }
            let click_mass: f64 = cells.iter().sum();
            // The final cell absorbs undetected rounds of a lossy table.
            cells.push((1.0 - click_mass).max(0.0));
            let counts = multinomial(&mut rng, shots, &cells)?;
            for a in 0..na {
                for b in 0..nb {
                    flat[((a * nb + b) * nx + x) * ny + y] =
                        counts[a * nb + b] as f64 / shots as f64;
                }
            }
        }
    }
    let nested = unflatten(flat, (na, nb, nx, ny));
    CorrelationTensor::new(nested, p.lossless())
}

fn unflatten(flat: Vec<f64>, dims: (usize, usize, usize, usize)) -> Vec<Vec<Vec<Vec<f64>>>> {
    let (na, nb, nx, ny) = dims;
    (0..na)
        .map(|a| {
            (0..nb)
                .map(|b| {
                    (0..nx)
                        .map(|x| {
                            (0..ny)
                                .map(|y| flat[((a * nb + b) * nx + x) * ny + y])
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Draws one empirical table of `shots` rounds per (x,y) pair from an exact
/// lossless table. Deterministic for a fixed seed.
pub fn sample_correlations(p: &CorrelationTensor, shots: u64, seed: u64) -> Result<CorrelationTensor> {
    if !p.lossless() {
        return Err(Error::InvalidParameter(
            "sampling requires a lossless table; apply loss models after sampling or use the internal sweep pipeline".into(),
        ));
    }
    sample_table(p, shots, seed)
}

/// Standard deviation (n−1 denominator) of the averaged estimator across
/// independently resampled tables. Zero by convention for the exact path.
pub fn bootstrap_std(
    p: &CorrelationTensor,
    shots: u64,
    n_resamples: usize,
    seed: u64,
    inputs: &QuantumInputs,
) -> Result<f64> {
    if shots == 0 {
        return Ok(0.0);
    }
    if n_resamples < 2 {
        return Err(Error::InvalidParameter("need at least 2 bootstrap resamples".into()));
    }
    let mut master = ChaCha12Rng::seed_from_u64(seed);
    let sub_seeds: Vec<u64> = (0..n_resamples).map(|_| master.gen()).collect();
    let label = crate::sdp::audit::current_label();
    let values: Result<Vec<f64>> = sub_seeds
        .into_par_iter()
        .map(|s| {
            let run = || {
                let resampled = sample_table(p, shots, s)?;
                mdi::mdi_sm_avg(&resampled, inputs)
            };
            if label.is_empty() {
                run()
            } else {
                crate::sdp::audit::with_label(&label, run)
            }
        })
        .collect();
    let values = values?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

// ---------------------------------------------------------------------------
// The sweep
// ---------------------------------------------------------------------------

fn compute_point(
    v: f64,
    cfg: &SweepConfig,
    inputs: &QuantumInputs,
    ir: f64,
    sample_seed: u64,
    bootstrap_seed: u64,
) -> Result<SweepRecord> {
    let rho = werner_state(v)?;
    let mub = pauli_mub_assembly();
    let asm = assemblage_from_state(&rho, &mub)?;
    let exact = correlations(&asm, inputs, &bell_povm())?;
    let noisy = apply_loss(&apply_bias(&exact, &cfg.noise.xi)?, cfg.noise.eta)?;
    let table =
        if cfg.shots > 0 { sample_table(&noisy, cfg.shots, sample_seed)? } else { noisy.clone() };

    // One witness solve per outcome feeds both the per-outcome values and the
    // averaged estimator. Worker threads start with an empty audit-label
    // stack, so the caller's scope is re-applied inside.
    let label = crate::sdp::audit::current_label();
    let payoffs: Result<Vec<f64>> = (0..4usize)
        .into_par_iter()
        .map(|b| {
            let run = || mdi::max_witness_payoff(&table, inputs, b);
            if label.is_empty() {
                run()
            } else {
                crate::sdp::audit::with_label(&label, run)
            }
        })
        .collect();
    let payoffs = payoffs?;
    let s_b: [f64; 4] = std::array::from_fn(|b| (payoffs[b] - 1.0).max(0.0));
    let s_avg = (payoffs.iter().sum::<f64>() / 4.0 - 1.0).max(0.0);

    let sr = steering_robustness(&asm)?;
    let er = entanglement_robustness(&rho)?;
    let std_s = if cfg.shots > 0 {
        bootstrap_std(&noisy, cfg.shots, cfg.n_resamples, bootstrap_seed, inputs)?
    } else {
        0.0
    };
    Ok(SweepRecord {
        v,
        s_avg,
        s_b,
        sr,
        er,
        ir,
        std_s,
        shots: cfg.shots,
        status: "ok".into(),
    })
}

fn failed_record(v: f64, shots: u64, err: &Error) -> SweepRecord {
    let status = format!("error: {err}").replace(',', ";").replace('\n', " ");
    SweepRecord {
        v,
        s_avg: f64::NAN,
        s_b: [f64::NAN; 4],
        sr: f64::NAN,
        er: f64::NAN,
        ir: f64::NAN,
        std_s: f64::NAN,
        shots,
        status,
    }
}

/// Runs the full visibility sweep: each grid point builds the Werner state,
/// the three-MUB assembly, Pauli inputs and the Bell-state measurement, pushes
/// them through noise and optional finite sampling, and records every bound.
/// Failures at one grid point are recorded in its status field and do not
/// abort the rest. Writes the CSV and the plot script, returns the records in
/// grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let inputs = QuantumInputs::pauli();
    // The incompatibility robustness depends only on the fixed assembly.
    let ir = incompatibility_robustness(&pauli_mub_assembly())?;
    // Seeds are drawn in grid order up front so parallel scheduling cannot
    // perturb the outcome.
    let mut master = ChaCha12Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<(u64, u64)> = cfg.v_grid.iter().map(|_| (master.gen(), master.gen())).collect();

    let label = crate::sdp::audit::current_label();
    let records: Vec<SweepRecord> = cfg
        .v_grid
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(v, (s1, s2))| {
            let run = || match compute_point(*v, cfg, &inputs, ir, *s1, *s2) {
                Ok(r) => r,
                Err(e) => failed_record(*v, cfg.shots, &e),
            };
            if label.is_empty() {
                run()
            } else {
                crate::sdp::audit::with_label(&label, run)
            }
        })
        .collect();

    std::fs::write(&cfg.outputs.csv, render_csv(&records))?;
    let csv_name = Path::new(&cfg.outputs.csv)
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| cfg.outputs.csv.clone());
    std::fs::write(&cfg.outputs.plot, plot_script(&csv_name))?;
    Ok(records)
}

/// Fixed schema, floats at 12 significant digits — regression-diffable.
pub fn render_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("v,S_avg,S_b1,S_b2,S_b3,S_b4,SR,ER,IR,std_S,shots,status\n");
    for r in records {
        writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{},{}",
            r.v,
            r.s_avg,
            r.s_b[0],
            r.s_b[1],
            r.s_b[2],
            r.s_b[3],
            r.sr,
            r.er,
            r.ir,
            r.std_s,
            r.shots,
            r.status
        )
        .expect("string write");
    }
    out
}

/// A matplotlib script that renders the sweep CSV as two panels: the
/// certified values against visibility, and the comparison against the
/// steering/entanglement/incompatibility robustnesses.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
"""Render the visibility sweep: certified steering values and reference bounds."""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
with open(path, newline="") as fh:
    rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
if not rows:
    sys.exit("no successful rows in " + path)

v = [float(r["v"]) for r in rows]
s_avg = [float(r["S_avg"]) for r in rows]
std_s = [float(r["std_S"]) for r in rows]
s_b = [[float(r["S_b%d" % b]) for r in rows] for b in (1, 2, 3, 4)]
sr = [float(r["SR"]) for r in rows]
er = [float(r["ER"]) for r in rows]
ir = [float(r["IR"]) for r in rows]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11.0, 4.2))

ax1.plot(v, sr, "k-", lw=1.2, label="steering robustness (exact)")
markers = ("o", "x", "*", "^")
for b, marker in enumerate(markers):
    ax1.plot(v, s_b[b], marker, ms=5, alpha=0.7, label="outcome %d estimate" % (b + 1))
ax1.errorbar(v, s_avg, yerr=std_s, fmt="D", ms=5, color="tab:red", label="averaged estimate")
ax1.set_xlabel("visibility v")
ax1.set_ylabel("certified steering value")
ax1.legend(fontsize=8)
ax1.set_title("certified values vs. visibility")

ax2.plot(v, sr, "k-", lw=1.2, label="steering robustness")
ax2.plot(v, er, "^-", ms=5, color="tab:green", label="entanglement robustness")
ax2.plot(v, ir, "s-", ms=5, color="tab:blue", label="incompatibility robustness")
ax2.errorbar(v, s_avg, yerr=std_s, fmt="D", ms=5, color="tab:red", label="averaged estimate")
ax2.set_xlabel("visibility v")
ax2.set_ylabel("value")
ax2.legend(fontsize=8)
ax2.set_title("hierarchy of bounds")

fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=160)
print("wrote " + out)
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exact_table(v: f64) -> (CorrelationTensor, QuantumInputs) {
        let inputs = QuantumInputs::pauli();
        let asm =
            assemblage_from_state(&werner_state(v).unwrap(), &pauli_mub_assembly()).unwrap();
        let p = correlations(&asm, &inputs, &bell_povm()).unwrap();
        (p, inputs)
    }

    fn tv_distance(a: &CorrelationTensor, b: &CorrelationTensor) -> f64 {
        let (na, nb, nx, ny) = a.dims();
        let mut acc = 0.0;
        for i in 0..na {
            for j in 0..nb {
                for x in 0..nx {
                    for y in 0..ny {
                        acc += (a.value(i, j, x, y) - b.value(i, j, x, y)).abs();
                    }
                }
            }
        }
        acc / 2.0
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let (p, _) = exact_table(0.7);
        let s1 = sample_correlations(&p, 500, 9).unwrap();
        let s2 = sample_correlations(&p, 500, 9).unwrap();
        assert_eq!(s1, s2);
        let s3 = sample_correlations(&p, 500, 10).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn empirical_frequencies_follow_binomial_error() {
        // Uniform table: every cell has p = 1/8, so 5 binomial standard
        // errors bound every empirical deviation.
        let (p, _) = exact_table(0.0);
        let shots = 80_000;
        let sampled = sample_correlations(&p, shots, 3).unwrap();
        let sigma = (0.125 * 0.875 / shots as f64).sqrt();
        for a in 0..2 {
            for b in 0..4 {
                for x in 0..3 {
                    for y in 0..6 {
                        let dev = (sampled.value(a, b, x, y) - 0.125).abs();
                        assert!(dev < 5.0 * sigma, "entry ({a},{b},{x},{y}) off by {dev:.2e}");
                    }
                }
            }
        }
        // Frequencies from a complete count are exactly normalized.
        assert!(sampled.lossless());
    }

    #[test]
    fn sampling_noise_shrinks_with_shots() {
        let (p, _) = exact_table(0.8);
        for seed in [1u64, 2, 3] {
            let coarse = sample_correlations(&p, 1_000, seed).unwrap();
            let fine = sample_correlations(&p, 100_000, seed + 100).unwrap();
            assert!(tv_distance(&fine, &p) < tv_distance(&coarse, &p));
        }
    }

    #[test]
    fn sampling_input_validation() {
        let (p, _) = exact_table(0.5);
        assert!(sample_correlations(&p, 0, 1).is_err());
        let lossy = apply_loss(&p, 0.9).unwrap();
        assert!(sample_correlations(&lossy, 100, 1).is_err());
    }

    #[test]
    fn bootstrap_conventions_and_scaling() {
        let (p, inputs) = exact_table(0.8);
        assert_eq!(bootstrap_std(&p, 0, 100, 1, &inputs).unwrap(), 0.0);
        assert!(bootstrap_std(&p, 100, 1, 1, &inputs).is_err());
        // Quadrupling the shots should halve the spread, within generous
        // sampling slack.
        let coarse = bootstrap_std(&p, 1_000, 20, 5, &inputs).unwrap();
        let fine = bootstrap_std(&p, 4_000, 20, 6, &inputs).unwrap();
        let ratio = coarse / fine;
        assert!(
            (1.4..=2.9).contains(&ratio),
            "std ratio {ratio} outside the CLT window (coarse {coarse:.3e}, fine {fine:.3e})"
        );
    }

    #[test]
    fn bootstrap_magnitude_matches_experiment_scale() {
        let (p, inputs) = exact_table(0.8);
        let std = bootstrap_std(&p, 10_000, 100, 11, &inputs).unwrap();
        assert!(
            (1e-4..=3e-2).contains(&std),
            "std {std:.3e} outside the expected order of magnitude"
        );
    }

    fn temp_outputs(tag: &str) -> SweepOutputs {
        let dir = std::env::temp_dir().join(format!("mdi-sweep-{}-{tag}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        SweepOutputs {
            csv: dir.join("sweep.csv").to_string_lossy().into_owned(),
            plot: dir.join("plot_sweep.py").to_string_lossy().into_owned(),
        }
    }

    #[test]
    fn sweep_endpoints_and_reproducibility() {
        let cfg = SweepConfig::new(
            vec![0.0, 1.0],
            0,
            NoiseSpec::ideal(),
            17,
            100,
            temp_outputs("endpoints"),
        )
        .unwrap();
        let records = run_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        let r0 = &records[0];
        assert_eq!(r0.status, "ok");
        assert_abs_diff_eq!(r0.s_avg, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r0.sr, 0.0, epsilon = 1e-7);
        let r1 = &records[1];
        let expected = 2.0 - 3.0_f64.sqrt();
        assert_abs_diff_eq!(r1.s_avg, expected, epsilon = 1e-6);
        assert_abs_diff_eq!(r1.er, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r1.ir, expected, epsilon = 1e-6);
        // The exact pipeline reproduces the robustness it lower-bounds.
        for r in &records {
            assert!((r.s_avg - r.sr).abs() <= 1e-6);
        }
        let first = std::fs::read(&cfg.outputs.csv).unwrap();
        assert!(std::fs::read_to_string(&cfg.outputs.plot).unwrap().contains("sweep.csv"));
        run_sweep(&cfg).unwrap();
        let second = std::fs::read(&cfg.outputs.csv).unwrap();
        assert_eq!(first, second, "CSV must reproduce bit-for-bit");
        let header = String::from_utf8(first).unwrap();
        assert!(header.starts_with("v,S_avg,S_b1,S_b2,S_b3,S_b4,SR,ER,IR,std_S,shots,status\n"));
    }

    #[test]
    fn sweep_matches_the_visibility_line() {
        let grid: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
        let cfg = SweepConfig::new(grid, 0, NoiseSpec::ideal(), 1, 100, temp_outputs("line"))
            .unwrap();
        let records = run_sweep(&cfg).unwrap();
        let threshold = 1.0 / 3.0_f64.sqrt();
        for r in &records {
            assert_eq!(r.status, "ok");
            if r.v <= threshold {
                assert!(r.s_avg <= 1e-9, "false positive at v = {}: {}", r.v, r.s_avg);
            }
        }
        // Least-squares line through the upper branch: the values are exactly
        // affine in v there.
        let upper: Vec<&SweepRecord> = records.iter().filter(|r| r.v >= 0.6).collect();
        let n = upper.len() as f64;
        let mean_v = upper.iter().map(|r| r.v).sum::<f64>() / n;
        let mean_s = upper.iter().map(|r| r.s_avg).sum::<f64>() / n;
        let slope = upper.iter().map(|r| (r.v - mean_v) * (r.s_avg - mean_s)).sum::<f64>()
            / upper.iter().map(|r| (r.v - mean_v) * (r.v - mean_v)).sum::<f64>();
        let intercept = mean_s - slope * mean_v;
        for r in &upper {
            let residual = (slope * r.v + intercept - r.s_avg).abs();
            assert!(residual < 1e-6, "nonlinearity {residual:.2e} at v = {}", r.v);
        }
        assert_abs_diff_eq!(slope, (3.0 - 3.0_f64.sqrt()) / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(intercept, (1.0 - 3.0_f64.sqrt()) / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn biased_sweep_never_exceeds_unbiased() {
        let grid = vec![0.7, 0.85, 1.0];
        let unbiased = run_sweep(
            &SweepConfig::new(
                grid.clone(),
                0,
                NoiseSpec::ideal(),
                2,
                100,
                temp_outputs("unbiased"),
            )
            .unwrap(),
        )
        .unwrap();
        let biased = run_sweep(
            &SweepConfig::new(
                grid,
                0,
                NoiseSpec::new(1.0, [1.2, 0.93, 0.93, 0.94]).unwrap(),
                2,
                100,
                temp_outputs("biased"),
            )
            .unwrap(),
        )
        .unwrap();
        for (u, b) in unbiased.iter().zip(&biased) {
            assert!(
                b.s_avg <= u.s_avg + 1e-7,
                "bias raised the estimate at v = {}: {} > {}",
                u.v,
                b.s_avg,
                u.s_avg
            );
        }
    }

    #[test]
    fn finite_shot_false_positives_vanish_with_statistics() {
        // v = 0.5 lies strictly below the steering threshold, so the exact
        // table admits a local model and any positive value is pure sampling
        // noise: the optimized witness can ride empirical fluctuations that
        // push the table slightly outside the local set. That artifact lives
        // at the 1/√shots scale, so it must shrink with statistics and be
        // near zero at 10⁵ shots.
        let (p, inputs) = exact_table(0.5);
        let mean_residual = |shots: u64, base: u64| -> f64 {
            (0..3u64)
                .map(|k| {
                    let sampled = sample_correlations(&p, shots, base + k).unwrap();
                    mdi::mdi_sm_avg(&sampled, &inputs).unwrap()
                })
                .sum::<f64>()
                / 3.0
        };
        let coarse = mean_residual(1_000, 40);
        let fine = mean_residual(100_000, 70);
        assert!(fine < 0.02, "false-positive residual {fine:.3e} too large at 1e5 shots");
        assert!(
            fine < coarse / 3.0,
            "residual did not shrink with shots: {coarse:.3e} -> {fine:.3e}"
        );
    }

    #[test]
    fn finite_shot_sweep_record_is_complete() {
        let cfg = SweepConfig::new(
            vec![0.8],
            2_000,
            NoiseSpec::ideal(),
            23,
            5,
            temp_outputs("finite"),
        )
        .unwrap();
        let records = run_sweep(&cfg).unwrap();
        let r = &records[0];
        assert_eq!(r.status, "ok");
        assert_eq!(r.shots, 2_000);
        assert!(r.std_s > 0.0, "bootstrap std should be positive for sampled data");
        // The estimate sits near the exact value at this sample size.
        assert!((r.s_avg - r.sr).abs() < 0.1, "estimate {} far from exact {}", r.s_avg, r.sr);
    }

    #[test]
    fn config_validation_and_round_trip() {
        assert!(SweepConfig::new(vec![], 0, NoiseSpec::ideal(), 0, 100, SweepOutputs::default())
            .is_err());
        assert!(SweepConfig::new(
            vec![0.5, 0.2],
            0,
            NoiseSpec::ideal(),
            0,
            100,
            SweepOutputs::default()
        )
        .is_err());
        assert!(SweepConfig::new(
            vec![0.5, 1.2],
            0,
            NoiseSpec::ideal(),
            0,
            100,
            SweepOutputs::default()
        )
        .is_err());
        assert!(SweepConfig::new(vec![0.5], 100, NoiseSpec::ideal(), 0, 1, SweepOutputs::default())
            .is_err());
        let cfg = SweepConfig::new(
            vec![0.0, 0.5, 1.0],
            200,
            NoiseSpec::new(0.9, [1.2, 0.93, 0.93, 0.94]).unwrap(),
            42,
            50,
            SweepOutputs::default(),
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        // Defaults fill in when the config omits plumbing fields.
        let minimal: SweepConfig = serde_json::from_str(
            r#"{"v_grid":[0.1,0.9],"shots":0,"noise":{"eta":1.0,"xi":[1,1,1,1]},"seed":7}"#,
        )
        .unwrap();
        assert_eq!(minimal.n_resamples, 100);
        assert_eq!(minimal.outputs, SweepOutputs::default());
    }
}
