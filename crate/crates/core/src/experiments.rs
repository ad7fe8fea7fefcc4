//! Turns raw traces into fitted exponents and goodness-of-fit reports, and
//! writes them out as a JSON + CSV bundle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{invert_step, sample_step};
use crate::combinatorics::{stable_half_cdf, to_f64, StepLaw};
use crate::error::{Error, Result};
use crate::peeling::{grow_uipt, sample_marked_size_capped, FreeSizeSampler, GrowthOptions, PeelTrace};
use crate::percolation::Sweep;
use crate::rng::RandomSource;
use crate::stats;

pub const SCHEMA_VERSION: u32 = 1;

/// Rescaled marked sizes above this are recorded as infinite. The limit
/// law puts mass below 0.007 out there, and the run length of a marked
/// sample grows with its size, so uncensored runs would be dominated by a
/// handful of enormous samples.
pub const MARKED_CENSOR_LEVEL: f64 = 1e4;

/// Per-layer quantity of a growth trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Step at which layer `r` closes.
    LayerTime,
    /// Frontier length when layer `r` closes.
    Boundary,
    /// Vertices of the hull of radius `r`.
    Hull,
    /// Vertices within distance `r` (full mode only).
    Ball,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::LayerTime => "layer_time",
            Quantity::Boundary => "boundary",
            Quantity::Hull => "hull",
            Quantity::Ball => "ball",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub quantity: String,
    /// Mean of the per-replica log-log slopes.
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the mean slope.
    pub stderr: f64,
    /// Standard deviation of the per-replica slopes.
    pub spread: f64,
    pub range: (f64, f64),
    pub checkpoints: usize,
    pub replicas: usize,
}

impl FitResult {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        (lo..=hi).contains(&self.slope)
    }
}

/// Log-log fit of several replicas of one curve: a least-squares fit per
/// replica, then averaged. Points with a non-positive coordinate are
/// dropped.
pub fn fit_log_log(name: &str, replicas: &[Vec<(f64, f64)>]) -> Result<FitResult> {
    if replicas.is_empty() {
        return Err(Error::InsufficientData(format!("{name}: no replicas")));
    }
    let mut fits = Vec::with_capacity(replicas.len());
    let (mut lo, mut hi, mut checkpoints) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (i, points) in replicas.iter().enumerate() {
        let (x, y): (Vec<f64>, Vec<f64>) =
            points.iter().filter(|&&(a, b)| a > 0.0 && b > 0.0).map(|&(a, b)| (a.ln(), b.ln())).unzip();
        let distinct = {
            let mut xs = x.clone();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            xs.len()
        };
        if distinct < 4 {
            return Err(Error::InsufficientData(format!(
                "{name}: replica {i} has {distinct} distinct checkpoints, need 4"
            )));
        }
        checkpoints = checkpoints.max(distinct);
        for &(a, b) in points {
            if a > 0.0 && b > 0.0 {
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
        fits.push(stats::least_squares(&x, &y)?);
    }
    let slopes: Vec<f64> = fits.iter().map(|f| f.slope).collect();
    let spread = stats::sample_sd(&slopes).unwrap_or(0.0);
    Ok(FitResult {
        quantity: name.to_string(),
        slope: stats::mean(&slopes),
        intercept: stats::mean(&fits.iter().map(|f| f.intercept).collect::<Vec<_>>()),
        stderr: spread / (slopes.len() as f64).sqrt(),
        spread,
        range: (lo, hi),
        checkpoints,
        replicas: replicas.len(),
    })
}

/// Slope of `log quantity` against `log r` for layers `r_lo..=r_hi`.
pub fn fit_exponent(traces: &[PeelTrace], quantity: Quantity, r_lo: u32, r_hi: u32) -> Result<FitResult> {
    if r_lo == 0 || r_hi < r_lo {
        return Err(Error::invalid("r_range", format!("[{r_lo}, {r_hi}] is not a range of positive radii")));
    }
    let mut curves = Vec::with_capacity(traces.len());
    for trace in traces {
        let mut points = Vec::new();
        for layer in trace.layers.iter().filter(|l| (r_lo..=r_hi).contains(&l.r)) {
            let value = match quantity {
                Quantity::LayerTime => Some(layer.t),
                Quantity::Boundary => Some(layer.m + 2),
                Quantity::Hull => Some(layer.hull),
                Quantity::Ball => layer.ball,
            };
            let Some(v) = value else {
                return Err(Error::InsufficientData(format!("{} not recorded in this trace", quantity.name())));
            };
            points.push((layer.r as f64, v as f64));
        }
        curves.push(points);
    }
    fit_log_log(quantity.name(), &curves)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthBatch {
    pub traces: Vec<PeelTrace>,
    /// Replicas that ran out of step budget (their hulls are the largest
    /// ones; full mode needs the cap to stay within memory).
    pub aborted: Vec<u64>,
}

/// Runs `replicas` independent growths, replica `i` on `source.fork(i)`.
/// Budget aborts are collected; any other error is returned.
pub fn grow_replicas(
    r_max: u32,
    replicas: usize,
    options: &GrowthOptions,
    source: RandomSource,
) -> Result<GrowthBatch> {
    let runs: Vec<Result<Option<PeelTrace>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| match grow_uipt(r_max, &mut source.fork(i).rng(), options) {
            Ok(g) => Ok(Some(g.trace)),
            Err(Error::StepBudgetExceeded { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut batch = GrowthBatch::default();
    for (i, run) in runs.into_iter().enumerate() {
        match run? {
            Some(t) => batch.traces.push(t),
            None => batch.aborted.push(i as u64),
        }
    }
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofTest {
    ChiSquare,
    Ks,
    TwoSampleKs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub name: String,
    pub test: GofTest,
    pub statistic: f64,
    /// Chi-square: p-value floor. KS: largest accepted distance.
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub passed: bool,
    pub samples: u64,
    /// Samples only known to lie beyond a cap.
    pub censored: u64,
}

/// Chi-square of step frequencies at `m` against the exact step law, for a
/// caller-supplied inverse `(m, u) -> step`.
pub fn step_law_gof_with<R: Rng + ?Sized>(
    m: u64,
    draws: u64,
    significance: f64,
    rng: &mut R,
    invert: impl Fn(u64, f64) -> i64,
) -> Result<GofReport> {
    if draws < 10_000 {
        return Err(Error::invalid("draws", "need at least 10^4 draws"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "the step at 0 is deterministic"));
    }
    let law = StepLaw::new(m);
    // Slot 0 is +1, slot k is -k.
    let mut probs = vec![to_f64(&law.p_up)];
    probs.extend(law.p_down.iter().map(to_f64));
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..draws {
        let x = invert(m, rng.random());
        let slot = if x > 0 { 0 } else { (x.unsigned_abs() as usize).min(probs.len() - 1) };
        counts[slot] += 1;
    }
    let (c, p) = stats::merge_buckets(&counts, &probs, 5.0);
    let out = stats::chi_square(&c, &p, significance)?;
    Ok(GofReport {
        name: format!("step_law_m{m}"),
        test: GofTest::ChiSquare,
        statistic: out.statistic,
        threshold: significance,
        p_value: Some(out.p_value),
        passed: out.passes(),
        samples: draws,
        censored: 0,
    })
}

/// Step sampler with every interior down-step pushed one further: a
/// negative control that the step-law test must reject.
pub fn corrupted_step(m: u64, u: f64) -> i64 {
    let x = invert_step(m, u);
    if x < 0 && x.unsigned_abs() < m {
        x - 1
    } else {
        x
    }
}

/// CDF of a law with tail `1 - exp(-1/(3t))` (decay `t^-1` instead of
/// `t^-1/2`); a negative control for the stable-limit test.
pub fn wrong_tail_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / (3.0 * t)).exp()
    }
}

pub fn step_law_gof<R: Rng + ?Sized>(m: u64, draws: u64, significance: f64, rng: &mut R) -> Result<GofReport> {
    step_law_gof_with(m, draws, significance, rng, invert_step)
}

/// Draws `replicas` marked sizes at `m`, rescaled by `m^2`, sorted.
/// Samples beyond [`MARKED_CENSOR_LEVEL`] come back as infinity.
pub fn rescaled_marked_sizes(m: u64, replicas: usize, source: RandomSource) -> Result<Vec<f64>> {
    let scale = (m as f64).powi(2);
    let cap = (MARKED_CENSOR_LEVEL * scale) as u64;
    let mut xs: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map_init(FreeSizeSampler::new, |sizes, i| {
            let mut rng = source.fork(i).rng();
            let n = sample_marked_size_capped(m, &mut rng, sizes, cap)?;
            Ok(n.map_or(f64::INFINITY, |n| n as f64 / scale))
        })
        .collect::<Result<_>>()?;
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// KS distance of a sample against a continuous CDF.
pub fn ks_report(name: &str, samples: &[f64], cdf: impl Fn(f64) -> f64, max_distance: f64) -> GofReport {
    let d = stats::ks_one_sample(samples, cdf);
    GofReport {
        name: name.to_string(),
        test: GofTest::Ks,
        statistic: d,
        threshold: max_distance,
        p_value: None,
        passed: d <= max_distance,
        samples: samples.len() as u64,
        censored: samples.iter().filter(|x| x.is_infinite()).count() as u64,
    }
}

/// Rescaled marked sizes at `m` against the limiting tail.
pub fn stable_limit_gof(m: u64, replicas: usize, max_distance: f64, source: RandomSource) -> Result<GofReport> {
    if m == 0 {
        return Err(Error::invalid("m", "must be positive"));
    }
    if replicas < 1000 {
        return Err(Error::invalid("replicas", "need at least 10^3 replicas"));
    }
    let xs = rescaled_marked_sizes(m, replicas, source)?;
    let cdf = |t: f64| if t <= 0.0 { 0.0 } else { stable_half_cdf(t).expect("positive t") };
    Ok(ks_report(&format!("stable_limit_m{m}"), &xs, cdf, max_distance))
}

/// Increments of the boundary chain started at 1, not absorbed.
pub fn chain_increments<R: Rng + ?Sized>(horizon: u64, rng: &mut R) -> Vec<i64> {
    let mut m = 1u64;
    (0..horizon)
        .map(|_| {
            let x = sample_step(m, rng).delta;
            m = (m as i64 + x) as u64;
            x
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailProbe {
    pub gamma: u32,
    pub checkpoints: Vec<u64>,
    /// `Σ_{t ≤ T} |X_t|^γ` at each checkpoint.
    pub values: Vec<f64>,
    pub slope: f64,
}

/// Power sums of the chain increments at log-spaced times from 100 on.
pub fn heavy_tail_probe(steps: &[i64], gamma: u32) -> Result<HeavyTailProbe> {
    if steps.len() < 10_000 {
        return Err(Error::InsufficientData(format!("trace of {} steps, need 10^4", steps.len())));
    }
    if gamma == 0 {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let checkpoints = crate::chain::log_checkpoints(100, steps.len() as u64, 4);
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut acc = 0.0;
    let mut t = 0usize;
    for &c in &checkpoints {
        while t < c as usize {
            acc += (steps[t].unsigned_abs() as f64).powi(gamma as i32);
            t += 1;
        }
        values.push(acc);
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        checkpoints.iter().zip(&values).map(|(&c, &v)| ((c as f64).ln(), v.ln())).unzip();
    let slope = stats::least_squares(&x, &y)?.slope;
    Ok(HeavyTailProbe { gamma, checkpoints, values, slope })
}

/// Everything a run produced, plus what is needed to reproduce it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: BTreeMap<String, String>,
    pub fits: Vec<FitResult>,
    pub gof: Vec<GofReport>,
    pub heavy_tails: Vec<HeavyTailProbe>,
    pub sweeps: Vec<Sweep>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            config,
            notes: vec!["slopes are plain power-law fits; polylog corrections are not separated".into()],
            ..Report::default()
        }
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `report.json`, `fits.csv` and `gof.csv` into `dir`, creating it
/// if needed. Returns the written paths.
pub fn emit_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    let mut fits = String::from("quantity,slope,intercept,stderr,spread,range_lo,range_hi,checkpoints,replicas\n");
    for f in &report.fits {
        let _ = writeln!(
            fits,
            "{},{},{},{},{},{},{},{},{}",
            f.quantity, f.slope, f.intercept, f.stderr, f.spread, f.range.0, f.range.1, f.checkpoints, f.replicas
        );
    }
    let mut gof = String::from("name,test,statistic,threshold,p_value,passed,samples\n");
    for g in &report.gof {
        let test = serde_json::to_value(g.test).expect("enum serializes");
        let p = g.p_value.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            gof,
            "{},{},{},{},{},{},{}",
            g.name,
            test.as_str().unwrap_or_default(),
            g.statistic,
            g.threshold,
            p,
            g.passed,
            g.samples
        );
    }
    Ok(vec![
        write_file(dir.join("report.json"), &json)?,
        write_file(dir.join("fits.csv"), &fits)?,
        write_file(dir.join("gof.csv"), &gof)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peeling::GrowthMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_gof_and_negative_control() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in [1u64, 5, 50] {
            let r = step_law_gof(m, 200_000, 0.001, &mut rng).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let bad = step_law_gof_with(50, 200_000, 0.001, &mut rng, corrupted_step).unwrap();
        assert!(!bad.passed, "{bad:?}");
        assert!(step_law_gof(5, 10, 0.001, &mut rng).is_err());
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let curves: Vec<Vec<(f64, f64)>> =
            (1..4).map(|c| (1..20).map(|r| (r as f64, c as f64 * (r as f64).powi(3))).collect()).collect();
        let f = fit_log_log("cube", &curves).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.spread < 1e-12);
        assert_eq!(f.range, (1.0, 19.0));
        let short = vec![vec![(1.0, 1.0), (2.0, 2.0), (2.0, 3.0), (3.0, 1.0)]];
        assert!(matches!(fit_log_log("short", &short), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn layer_fits_run_on_small_growths() {
        let source = RandomSource::new(2, 0);
        let traces = grow_replicas(12, 20, &GrowthOptions::new(GrowthMode::Full), source).unwrap().traces;
        for q in [Quantity::LayerTime, Quantity::Boundary, Quantity::Hull, Quantity::Ball] {
            let f = fit_exponent(&traces, q, 3, 12).unwrap();
            assert!(f.slope.is_finite() && f.slope > 0.5, "{f:?}");
            assert_eq!(f.replicas, 20);
        }
        let skel = grow_replicas(6, 3, &GrowthOptions::new(GrowthMode::Skeleton), source).unwrap().traces;
        assert!(fit_exponent(&skel, Quantity::Ball, 1, 6).is_err());
        assert!(fit_exponent(&skel, Quantity::Hull, 5, 6).is_err());
        assert!(fit_exponent(&skel, Quantity::Hull, 0, 6).is_err());
        let tight = GrowthOptions { step_budget: 200, ..GrowthOptions::new(GrowthMode::Full) };
        let batch = grow_replicas(12, 10, &tight, source).unwrap();
        assert_eq!(batch.aborted.len(), 10);
    }

    #[test]
    fn stable_limit_negative_control() {
        let xs = rescaled_marked_sizes(40, 2000, RandomSource::new(3, 0)).unwrap();
        let good = ks_report("good", &xs, |t| stable_half_cdf(t).unwrap(), 0.1);
        let wrong = ks_report("wrong", &xs, wrong_tail_cdf, 0.1);
        assert!(good.passed, "{good:?}");
        assert!(!wrong.passed, "{wrong:?}");
    }

    #[test]
    fn heavy_tail_sums_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs = chain_increments(20_000, &mut rng);
        for g in [2, 3] {
            let p = heavy_tail_probe(&xs, g).unwrap();
            assert!(p.values.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*p.checkpoints.last().unwrap(), 20_000);
        }
        assert!(heavy_tail_probe(&xs[..100], 2).is_err());
    }

    #[test]
    fn empty_report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report::new(BTreeMap::new());
        let paths = emit_report(&report, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let text = fs::read_to_string(&paths[0]).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(text.contains("\"schema_version\": 1"));
        assert_eq!(fs::read_to_string(&paths[1]).unwrap().lines().count(), 1);
    }

    #[test]
    fn unwritable_dir_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        let err = emit_report(&Report::default(), &file.join("sub")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
