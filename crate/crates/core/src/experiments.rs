//! Seeded Monte Carlo campaigns and exact or sampled checks of the shift-average and variance identities.
//!
//! Campaign trials are independent: trial `t` draws its construction from the
//! ChaCha8 streams described in [`crate::pointset`], so a campaign gives the
//! same records whatever the thread count or execution order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{theorem_bound, BoundBreakdown, BoundSpec, TheoremCase};
use crate::charsum::count_hits_reduced;
use crate::discrepancy::star_disc_grid;
use crate::fourier::{cont_coeff_sq_1d, disc_coeff, for_each_index, AnchoredBox};
use crate::modmath::PrimeContext;
use crate::pointset::{generate_korobov, sample_trial_construction, wrap_add, GridPointSet, ShiftMode};
use crate::{checked_pow, Error, Limits, Result};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl MeanEstimate {
    fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len() as u64,
        }
    }
}

/// Number of points of `lattice + shift (mod N)` inside the grid box `m`.
fn shifted_grid_count(lattice: &GridPointSet, shift: &[u32], m: &[u32]) -> u64 {
    let n = lattice.n_prime() as u32;
    lattice
        .points()
        .filter(|x| {
            x.iter().zip(shift).zip(m).all(|((&xj, &dj), &mj)| {
                let y = xj + dj;
                let y = if y >= n { y - n } else { y };
                y < mj
            })
        })
        .count() as u64
}

/// Number of points of `{lattice + delta}` inside `[0, b)`, using the same
/// floating-point wrap as [`crate::pointset::shift_continuous`].
fn shifted_real_count(lattice: &GridPointSet, delta: &[f64], b: &[f64]) -> u64 {
    let n = lattice.n_prime() as f64;
    lattice
        .points()
        .filter(|x| {
            x.iter()
                .zip(delta)
                .zip(b)
                .all(|((&xj, &dj), &bj)| wrap_add(f64::from(xj) / n, dj) < bj)
        })
        .count() as u64
}

fn check_box_dim(b: &AnchoredBox, ctx: &PrimeContext) -> Result<()> {
    if b.dim() != ctx.dim() {
        return Err(Error::invalid(format!(
            "box has dimension {} but the context has dimension {}",
            b.dim(),
            ctx.dim()
        )));
    }
    Ok(())
}

fn shifts_total(ctx: &PrimeContext, limits: &Limits, what: &'static str) -> Result<u64> {
    checked_pow(ctx.n_prime(), ctx.dim())
        .filter(|&t| t <= limits.frequencies)
        .ok_or_else(|| Error::capacity(what, format!("{}^{}", ctx.n_prime(), ctx.dim()), limits.frequencies))
}

/// Exact average of `disc(P_N(z) ⊕ δ, J(b))` over every `δ ∈ Γ^s`.
pub fn verify_mean_zero_discrete(
    z: u64,
    b: &AnchoredBox,
    ctx: &PrimeContext,
    limits: &Limits,
) -> Result<Ratio<i128>> {
    check_box_dim(b, ctx)?;
    let m = b.numerators_for(ctx.n_prime())?;
    let shifts = shifts_total(ctx, limits, "exhaustive shift average")?;
    let lattice = generate_korobov(z, ctx)?;
    let n = ctx.n_prime();
    let mut hits: i128 = 0;
    for_each_index(n, ctx.dim(), |d| {
        let d: Vec<u32> = d.iter().map(|&v| v as u32).collect();
        hits += i128::from(shifted_grid_count(&lattice, &d, m));
    });
    let shifts = i128::from(shifts);
    let vol_numer: i128 = m.iter().map(|&v| i128::from(v)).product();
    // mean of count/N over the shifts, minus Π m_j / N^s
    Ok(Ratio::new(hits, shifts * n as i128) - Ratio::new(vol_numer, shifts))
}

/// Monte Carlo mean of `disc(P_N(z) ⊕ Δ, J(b))` over uniform `Δ ∈ [0, 1)^s`.
pub fn verify_mean_zero_continuous(
    z: u64,
    b: &AnchoredBox,
    ctx: &PrimeContext,
    num_samples: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    check_box_dim(b, ctx)?;
    if num_samples < 2 {
        return Err(Error::invalid("at least two samples are needed for a standard error"));
    }
    let lattice = generate_korobov(z, ctx)?;
    let n = ctx.n_prime() as f64;
    let vol = b.volume();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = vec![0.0; ctx.dim()];
    let values: Vec<f64> = (0..num_samples)
        .map(|_| {
            delta.iter_mut().for_each(|d| *d = rng.gen::<f64>());
            shifted_real_count(&lattice, &delta, b.corner()) as f64 / n - vol
        })
        .collect();
    Ok(MeanEstimate::from_samples(&values))
}

/// Cap on `E[disc²]` for one randomly shifted lattice with `z` uniform on
/// `{1, ..., M}`.
///
/// Random generators: `s/M + s/(3N²)` (continuous) or `s/M` (grid). For fixed
/// generators the per-lattice average is the summed cap divided by `M`:
/// `s(1 + 1/(3N))/M` (continuous) or `s/M` (grid).
pub fn per_lattice_variance_cap(case: TheoremCase, ctx: &PrimeContext) -> f64 {
    let s = ctx.dim() as f64;
    let m = ctx.num_lattices() as f64;
    let n = ctx.n_prime() as f64;
    match case {
        TheoremCase::RandomContinuous => s / m + s / (3.0 * n * n),
        TheoremCase::FixedContinuous => s * (1.0 + 1.0 / (3.0 * n)) / m,
        TheoremCase::RandomDiscrete | TheoremCase::FixedDiscrete => s / m,
    }
}

/// Monte Carlo estimate of `E_{z, shift}[disc²(P_N(z) ⊕ shift, J(b))]`.
///
/// `z` is uniform on `{1, ..., M}` in every case (for fixed generators this
/// is the average over the `M` lattices of the union); the shift follows the
/// case's shift mode. Each sample draws `z` first, then the shift.
pub fn estimate_variance(
    case: TheoremCase,
    b: &AnchoredBox,
    ctx: &PrimeContext,
    num_samples: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    check_box_dim(b, ctx)?;
    if num_samples < 2 {
        return Err(Error::invalid("at least two samples are needed for a standard error"));
    }
    let lattices: Vec<GridPointSet> = (1..=ctx.num_lattices())
        .map(|z| generate_korobov(z, ctx))
        .collect::<Result<_>>()?;
    let n = ctx.n_prime();
    let dim = ctx.dim();
    let vol = b.volume();
    let grid = b.grid_numerators().filter(|&(_, bn)| bn == n).map(|(m, _)| m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(num_samples as usize);
    let mut delta = vec![0.0; dim];
    let mut d = vec![0u32; dim];
    for _ in 0..num_samples {
        let z = rng.gen_range(1..=ctx.num_lattices());
        let lattice = &lattices[(z - 1) as usize];
        let count = match case.shift_mode() {
            ShiftMode::Continuous => {
                delta.iter_mut().for_each(|x| *x = rng.gen::<f64>());
                shifted_real_count(lattice, &delta, b.corner())
            }
            ShiftMode::Discrete => {
                d.iter_mut().for_each(|x| *x = rng.gen_range(0..n) as u32);
                match grid {
                    Some(m) => shifted_grid_count(lattice, &d, m),
                    None => {
                        let shifted: Vec<f64> = d.iter().map(|&v| f64::from(v) / n as f64).collect();
                        shifted_real_count(lattice, &shifted, b.corner())
                    }
                }
            }
        };
        let disc = count as f64 / n as f64 - vol;
        values.push(disc * disc);
    }
    Ok(MeanEstimate::from_samples(&values))
}

/// `Σ_{r=1}^{M} E_shift[disc²(P_N(r) ⊕ shift, J(b))]` by two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedVarianceReport {
    pub case: TheoremCase,
    /// Exhaustive average over every grid shift (grid shifts only), in exact
    /// integer arithmetic rounded once.
    pub exhaustive: Option<f64>,
    /// `Σ_k |C_k(b)|² Σ_r |S_N(r, k)|²`. For continuous shifts this is the
    /// sum over `k ∈ {-K..K}^s`, a lower bound.
    pub spectral: f64,
    /// Upper end of the spectral bracket: equal to `spectral` for grid shifts,
    /// `spectral + M (λ(1-λ) - truncated Parseval mass)` for continuous ones.
    pub spectral_upper: f64,
    /// Truncation level used for continuous shifts.
    pub truncation: Option<u64>,
    /// `s(1 + 1/(3N))` or `s`.
    pub cap: f64,
}

impl FixedVarianceReport {
    pub fn within_cap(&self) -> bool {
        self.exhaustive.is_none_or(|v| v < self.cap) && self.spectral_upper < self.cap
    }
}

/// Root counts `Σ_r 1{k · a(r) ≡ 0}` for every `k ∈ D_N^s`, row-major.
fn hit_table(ctx: &PrimeContext) -> Vec<u64> {
    let mut table = Vec::new();
    for_each_index(ctx.n_prime(), ctx.dim(), |k| {
        table.push(if k.iter().all(|&v| v == 0) {
            ctx.num_lattices()
        } else {
            count_hits_reduced(k, ctx)
        });
    });
    table
}

pub fn sum_variance_fixed(
    case: TheoremCase,
    b: &AnchoredBox,
    ctx: &PrimeContext,
    limits: &Limits,
) -> Result<FixedVarianceReport> {
    check_box_dim(b, ctx)?;
    let n = ctx.n_prime();
    let dim = ctx.dim();
    let m = b.numerators_for(n)?;
    shifts_total(ctx, limits, "fixed-generator variance sum")?;
    let hits = hit_table(ctx);
    let cap = crate::bounds::variance_cap(case, ctx);

    match case.shift_mode() {
        ShiftMode::Discrete => {
            // disc = (count N^{s-1} - Π m_j) / N^s, summed exactly
            let ns = i128::from(checked_pow(n, dim).expect("checked above"));
            let ns1 = ns / n as i128;
            let vol_numer: i128 = m.iter().map(|&v| i128::from(v)).product();
            let mut sq_sum: i128 = 0;
            for z in 1..=ctx.num_lattices() {
                let lattice = generate_korobov(z, ctx)?;
                for_each_index(n, dim, |d| {
                    let d: Vec<u32> = d.iter().map(|&v| v as u32).collect();
                    let c = i128::from(shifted_grid_count(&lattice, &d, m));
                    let e = c * ns1 - vol_numer;
                    sq_sum += e * e;
                });
            }
            let exhaustive = Ratio::new(sq_sum, ns * ns * ns);
            let exhaustive = *exhaustive.numer() as f64 / *exhaustive.denom() as f64;

            let mut spectral = 0.0;
            let mut idx = 0usize;
            for_each_index(n, dim, |k| {
                if idx > 0 && hits[idx] > 0 {
                    spectral += disc_coeff(k, b, n).expect("valid grid box").norm_sqr() * hits[idx] as f64;
                }
                idx += 1;
            });
            Ok(FixedVarianceReport {
                case,
                exhaustive: Some(exhaustive),
                spectral,
                spectral_upper: spectral,
                truncation: None,
                cap,
            })
        }
        ShiftMode::Continuous => {
            let k_max = 1000 * n;
            let corner = b.corner();
            // per coordinate and residue class r: Σ_{|k| ≤ K, k ≡ r} |c_k(b_j)|²
            let classes: Vec<Vec<f64>> = corner
                .iter()
                .map(|&bj| {
                    let mut acc = vec![0.0; n as usize];
                    for k in -(k_max as i64)..=(k_max as i64) {
                        acc[k.rem_euclid(n as i64) as usize] += cont_coeff_sq_1d(k, bj);
                    }
                    acc
                })
                .collect();
            let mut total = 0.0;
            let mut idx = 0usize;
            for_each_index(n, dim, |r| {
                if hits[idx] > 0 {
                    let mass: f64 = r.iter().zip(&classes).map(|(&rj, c)| c[rj as usize]).product();
                    total += mass * hits[idx] as f64;
                }
                idx += 1;
            });
            let vol_sq: f64 = corner.iter().map(|&bj| bj * bj).product();
            let spectral = (total - ctx.num_lattices() as f64 * vol_sq).max(0.0);
            let truncated = crate::fourier::parseval_continuous_truncated(b, k_max);
            let vol = b.volume();
            let missing = (vol * (1.0 - vol) - truncated).max(0.0);
            Ok(FixedVarianceReport {
                case,
                exhaustive: None,
                spectral,
                spectral_upper: spectral + ctx.num_lattices() as f64 * missing,
                truncation: Some(k_max),
                cap,
            })
        }
    }
}

/// A seeded Monte Carlo campaign against one of the theorem bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub spec: BoundSpec,
    pub num_trials: u64,
    pub master_seed: u64,
    /// Also write the maximizing grid corner of every trial.
    #[serde(default)]
    pub record_boxes: bool,
    /// Output directory for `trials.csv` and `summary.json`.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(Error::invalid("a campaign needs at least one trial"));
        }
        BoundSpec::new(self.spec.case, self.spec.failure_prob, self.spec.ctx)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub generators: Vec<u64>,
    pub grid_max: f64,
    /// `grid_max + s/N`.
    pub upper_bound: f64,
    pub bound_value: f64,
    /// `upper_bound > bound_value`.
    pub violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_box: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub bound: BoundBreakdown,
    pub num_trials: u64,
    pub num_violations: u64,
    /// Nearest-rank quantiles of `upper_bound`.
    pub upper_bound_quantiles: Vec<Quantile>,
    pub grid_max_mean: f64,
    pub grid_max_stddev: f64,
}

pub const SUMMARY_QUANTILES: [f64; 5] = [0.5, 0.9, 0.95, 0.99, 1.0];

/// Build the trial's construction and compare its grid upper bound with the
/// theorem bound.
pub fn run_trial(config: &CampaignConfig, trial_index: u64) -> Result<TrialRecord> {
    let bound = theorem_bound(&config.spec)?.final_bound;
    run_trial_against(config, trial_index, bound, &Limits::default())
}

fn run_trial_against(config: &CampaignConfig, trial_index: u64, bound: f64, limits: &Limits) -> Result<TrialRecord> {
    let spec = &config.spec;
    let construction = sample_trial_construction(
        &spec.ctx,
        spec.case.generator_mode(),
        spec.case.shift_mode(),
        config.master_seed,
        trial_index,
    )?;
    let report = star_disc_grid(&construction.points, &spec.ctx, limits)?;
    Ok(TrialRecord {
        trial_index,
        generators: construction.generators,
        grid_max: report.grid_max,
        upper_bound: report.upper_bound,
        bound_value: bound,
        violated: report.upper_bound > bound,
        argmax_box: config
            .record_boxes
            .then(|| report.argmax_box.grid_numerators().map(|(m, _)| m.to_vec()).unwrap_or_default()),
    })
}

/// Run every trial (in parallel on the current rayon pool), summarize, and
/// persist when `output_path` is set.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary> {
    let (summary, _) = run_campaign_with_records(config)?;
    Ok(summary)
}

pub fn run_campaign_with_records(config: &CampaignConfig) -> Result<(CampaignSummary, Vec<TrialRecord>)> {
    config.validate()?;
    let bound = theorem_bound(&config.spec)?;
    let limits = Limits::default();
    let records: Vec<TrialRecord> = (0..config.num_trials)
        .into_par_iter()
        .map(|t| run_trial_against(config, t, bound.final_bound, &limits))
        .collect::<Result<_>>()?;
    let summary = summarize(config, bound, &records);
    if let Some(dir) = &config.output_path {
        write_outputs(dir, &summary, &records)?;
    }
    Ok((summary, records))
}

/// Aggregate statistics; independent of record order.
pub fn summarize(config: &CampaignConfig, bound: BoundBreakdown, records: &[TrialRecord]) -> CampaignSummary {
    let mut upper: Vec<f64> = records.iter().map(|r| r.upper_bound).collect();
    upper.sort_by(f64::total_cmp);
    let mut grid: Vec<f64> = records.iter().map(|r| r.grid_max).collect();
    grid.sort_by(f64::total_cmp);

    let n = records.len();
    let quantiles = if n == 0 {
        Vec::new()
    } else {
        SUMMARY_QUANTILES
            .iter()
            .map(|&q| {
                let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
                Quantile {
                    q,
                    value: upper[rank - 1],
                }
            })
            .collect()
    };
    let mean = if n == 0 { 0.0 } else { grid.iter().sum::<f64>() / n as f64 };
    let stddev = if n > 1 {
        (grid.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    CampaignSummary {
        config: config.clone(),
        bound,
        num_trials: n as u64,
        num_violations: records.iter().filter(|r| r.violated).count() as u64,
        upper_bound_quantiles: quantiles,
        grid_max_mean: mean,
        grid_max_stddev: stddev,
    }
}

pub const TRIALS_HEADER: &str = "trial,generators,grid_max,upper_bound,bound,violated";

/// CSV with one row per trial; generators are `;`-separated.
pub fn write_trials_csv<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{TRIALS_HEADER}")?;
    for r in records {
        let gens: Vec<String> = r.generators.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.trial_index,
            gens.join(";"),
            r.grid_max,
            r.upper_bound,
            r.bound_value,
            r.violated
        )?;
    }
    Ok(())
}

fn write_outputs(dir: &Path, summary: &CampaignSummary, records: &[TrialRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_trials_csv(&mut csv, records)?;
    fs::write(dir.join("trials.csv"), csv)?;
    let mut json = serde_json::to_vec_pretty(summary)?;
    json.push(b'\n');
    fs::write(dir.join("summary.json"), json)?;
    if summary.config.record_boxes {
        let mut boxes = String::from("trial,argmax_numerators\n");
        for r in records {
            let m: Vec<String> = r.argmax_box.iter().flatten().map(u32::to_string).collect();
            boxes.push_str(&format!("{},{}\n", r.trial_index, m.join(";")));
        }
        fs::write(dir.join("boxes.csv"), boxes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::local_disc;
    use crate::pointset::{shift_discrete, DiscreteShift, PointSet};

    fn ctx(n: u64, s: usize) -> PrimeContext {
        PrimeContext::with_default_lattices(n, s).unwrap()
    }

    fn grid_boxes(n: u64, s: usize) -> Vec<AnchoredBox> {
        let mut out = Vec::new();
        for_each_index(n + 1, s, |m| {
            out.push(AnchoredBox::grid(m.iter().map(|&v| v as u32).collect(), n).unwrap())
        });
        out
    }

    #[test]
    fn mean_zero_discrete_examples() {
        let limits = Limits::default();
        let b = AnchoredBox::grid(vec![3], 5).unwrap();
        assert_eq!(verify_mean_zero_discrete(2, &b, &ctx(5, 1), &limits).unwrap(), Ratio::from_integer(0));
        let b = AnchoredBox::grid(vec![2, 5], 7).unwrap();
        assert_eq!(verify_mean_zero_discrete(3, &b, &ctx(7, 2), &limits).unwrap(), Ratio::from_integer(0));
        let b = AnchoredBox::grid(vec![7, 7], 7).unwrap();
        for z in 1..7 {
            assert_eq!(verify_mean_zero_discrete(z, &b, &ctx(7, 2), &limits).unwrap(), Ratio::from_integer(0));
        }
        assert!(verify_mean_zero_discrete(1, &AnchoredBox::new(vec![0.5]).unwrap(), &ctx(5, 1), &limits).is_err());
    }

    #[test]
    fn mean_zero_discrete_matches_float_average() {
        // cross-check the integer route against local_disc on shifted sets
        let c = ctx(5, 2);
        let b = AnchoredBox::grid(vec![2, 4], 5).unwrap();
        let lattice = generate_korobov(3, &c).unwrap();
        let mut sum = 0.0;
        for_each_index(5, 2, |d| {
            let d = DiscreteShift::new(5, d.iter().map(|&v| v as u32).collect()).unwrap();
            let p = PointSet::Grid(shift_discrete(&lattice, &d).unwrap());
            sum += local_disc(&p, &b).unwrap();
        });
        assert!((sum / 25.0).abs() < 1e-15);
    }

    #[test]
    fn mean_zero_continuous_examples() {
        let c = ctx(7, 2);
        let b = AnchoredBox::new(vec![0.3, 0.8]).unwrap();
        let est = verify_mean_zero_continuous(3, &b, &c, 10_000, 1).unwrap();
        assert!(est.mean.abs() <= 4.0 * est.stderr);

        let est = verify_mean_zero_continuous(3, &AnchoredBox::unit(2), &c, 1000, 1).unwrap();
        assert_eq!((est.mean, est.stderr), (0.0, 0.0));
        let empty = AnchoredBox::new(vec![0.0, 0.4]).unwrap();
        let est = verify_mean_zero_continuous(3, &empty, &c, 1000, 1).unwrap();
        assert_eq!((est.mean, est.stderr), (0.0, 0.0));
        assert!(verify_mean_zero_continuous(3, &b, &c, 1, 1).is_err());
    }

    #[test]
    fn variance_estimates_respect_caps() {
        let c = ctx(5, 2);
        for case in TheoremCase::ALL {
            for (i, b) in grid_boxes(5, 2).iter().enumerate() {
                let est = estimate_variance(case, b, &c, 2000, i as u64).unwrap();
                assert!(est.mean <= per_lattice_variance_cap(case, &c) + 3.0 * est.stderr);
            }
            let est = estimate_variance(case, &AnchoredBox::unit(2), &c, 100, 0).unwrap();
            assert_eq!(est.mean, 0.0);
        }
    }

    #[test]
    fn fixed_variance_routes_agree() {
        let c = ctx(5, 2);
        let b = AnchoredBox::grid(vec![3, 4], 5).unwrap();
        let r = sum_variance_fixed(TheoremCase::FixedDiscrete, &b, &c, &Limits::default()).unwrap();
        let ex = r.exhaustive.unwrap();
        assert!((ex - r.spectral).abs() < 1e-10, "{ex} vs {}", r.spectral);
        assert!(ex < 2.0 && r.within_cap());

        let unit = AnchoredBox::grid(vec![5, 5], 5).unwrap();
        let r = sum_variance_fixed(TheoremCase::FixedDiscrete, &unit, &c, &Limits::default()).unwrap();
        assert_eq!(r.exhaustive, Some(0.0));
        assert_eq!(r.spectral, 0.0);

        for b in grid_boxes(5, 2) {
            let r = sum_variance_fixed(TheoremCase::FixedDiscrete, &b, &c, &Limits::default()).unwrap();
            assert!(r.exhaustive.unwrap() < 2.0);
            assert!((r.exhaustive.unwrap() - r.spectral).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_continuous_bracket_contains_monte_carlo() {
        let c = ctx(5, 2);
        let b = AnchoredBox::grid(vec![2, 3], 5).unwrap();
        let r = sum_variance_fixed(TheoremCase::FixedContinuous, &b, &c, &Limits::default()).unwrap();
        assert!(r.spectral <= r.spectral_upper);
        assert!(r.spectral_upper - r.spectral < 1e-3);
        assert!(r.within_cap());
        // E_z over uniform z times M is the fixed sum
        let est = estimate_variance(TheoremCase::FixedContinuous, &b, &c, 40_000, 9).unwrap();
        let m = c.num_lattices() as f64;
        assert!(est.mean * m >= r.spectral - 4.0 * m * est.stderr);
        assert!(est.mean * m <= r.spectral_upper + 4.0 * m * est.stderr);
    }

    #[test]
    fn trial_shape_and_determinism() {
        let spec = BoundSpec::new(TheoremCase::FixedDiscrete, 0.5, ctx(5, 2)).unwrap();
        let config = CampaignConfig {
            spec,
            num_trials: 3,
            master_seed: 17,
            record_boxes: true,
            output_path: None,
        };
        let a = run_trial(&config, 2).unwrap();
        let b = run_trial(&config, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generators, vec![1, 2, 3, 4]);
        assert!((0.0..=1.0).contains(&a.grid_max));
        assert_eq!(a.violated, a.upper_bound > a.bound_value);
        assert!(a.argmax_box.is_some());
    }

    #[test]
    fn single_trial_campaign_summary() {
        let spec = BoundSpec::new(TheoremCase::RandomDiscrete, 0.5, ctx(7, 2)).unwrap();
        let config = CampaignConfig {
            spec,
            num_trials: 1,
            master_seed: 3,
            record_boxes: false,
            output_path: None,
        };
        let (summary, records) = run_campaign_with_records(&config).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(summary.num_trials, 1);
        assert_eq!(summary.grid_max_mean, records[0].grid_max);
        assert_eq!(summary.grid_max_stddev, 0.0);
        assert!(summary.upper_bound_quantiles.iter().all(|q| q.value == records[0].upper_bound));
        assert_eq!(summary.num_violations, u64::from(records[0].violated));
    }

    #[test]
    fn summary_is_order_independent() {
        let spec = BoundSpec::new(TheoremCase::RandomContinuous, 0.5, ctx(7, 2)).unwrap();
        let config = CampaignConfig {
            spec,
            num_trials: 25,
            master_seed: 5,
            record_boxes: false,
            output_path: None,
        };
        let (summary, mut records) = run_campaign_with_records(&config).unwrap();
        records.reverse();
        records.swap(3, 17);
        let again = summarize(&config, summary.bound, &records);
        assert_eq!(again, summary);
    }

    #[test]
    fn campaign_validation() {
        let spec = BoundSpec::new(TheoremCase::FixedDiscrete, 0.5, ctx(5, 2)).unwrap();
        let mut config = CampaignConfig {
            spec,
            num_trials: 0,
            master_seed: 0,
            record_boxes: false,
            output_path: None,
        };
        assert!(run_campaign(&config).is_err());
        config.num_trials = 1;
        config.spec.failure_prob = 1.5;
        assert!(run_campaign(&config).is_err());
    }

    #[test]
    fn campaign_files_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let spec = BoundSpec::new(TheoremCase::FixedDiscrete, 0.5, ctx(7, 2)).unwrap();
        let mut config = CampaignConfig {
            spec,
            num_trials: 10,
            master_seed: 42,
            record_boxes: true,
            output_path: Some(dir.path().join("a")),
        };
        run_campaign(&config).unwrap();
        config.output_path = Some(dir.path().join("b"));
        run_campaign(&config).unwrap();
        let csv_a = fs::read(dir.path().join("a/trials.csv")).unwrap();
        let csv_b = fs::read(dir.path().join("b/trials.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with(TRIALS_HEADER));
        assert_eq!(text.lines().count(), 11);
        assert!(dir.path().join("a/boxes.csv").exists());
        let summary: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("a/summary.json")).unwrap()).unwrap();
        assert_eq!(summary["config"]["master_seed"], 42);
        assert_eq!(summary["num_trials"], 10);
    }
}
