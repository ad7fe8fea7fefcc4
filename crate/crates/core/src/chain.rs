//! The boundary-size Markov chain `M_{n+1} = M_n + X_n`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::stats;

/// Which side of the peel edge a down-step swallows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSample {
    /// `+1`, or `-k` with `1 ≤ k ≤ m`.
    pub delta: i64,
    /// Only meaningful when `delta < 0`.
    pub side: Side,
}

/// Inverts the step law at `m` for a uniform `u ∈ [0, 1)`, walking down the
/// ratio recurrence of the down-step masses. Any rounding residue past the
/// last term lands on `-m`.
pub fn invert_step(m: u64, u: f64) -> i64 {
    if m == 0 {
        return 1;
    }
    let mf = m as f64;
    let p_up = (2.0 * mf + 3.0) / (3.0 * mf + 3.0);
    if u < p_up {
        return 1;
    }
    let mut rest = u - p_up;
    let mut p = mf / (2.0 * (2.0 * mf + 1.0));
    let mut k = 1u64;
    while rest >= p && k < m {
        rest -= p;
        let kf = k as f64;
        p *= (2.0 * kf - 1.0) * (mf - kf) / ((kf + 2.0) * (2.0 * mf - 2.0 * kf + 1.0));
        k += 1;
    }
    -(k as i64)
}

/// One chain step at boundary parameter `m`. At `m = 0` the step is `+1`.
pub fn sample_step<R: Rng + ?Sized>(m: u64, rng: &mut R) -> StepSample {
    let delta = invert_step(m, rng.random::<f64>());
    let side = if delta < 0 && rng.random::<bool>() { Side::Left } else { Side::Right };
    StepSample { delta, side }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Checkpoints {
    /// Every step.
    Dense,
    /// Steps 1, 2, 4, 8, ...
    PowersOfTwo,
    /// Explicit increasing step indices.
    At(Vec<u64>),
}

impl Checkpoints {
    fn next_after(&self, step: u64) -> Option<u64> {
        match self {
            Checkpoints::Dense => Some(step + 1),
            Checkpoints::PowersOfTwo => Some(if step == 0 { 1 } else { (step + 1).next_power_of_two() }),
            Checkpoints::At(list) => list.iter().copied().find(|&s| s > step),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub checkpoints: Checkpoints,
    /// Stop when `M` reaches 0. When false, `M = 0` steps up with
    /// probability 1, as the 2-gon boundary of a peeling does.
    pub absorb_at_zero: bool,
    /// Stop once `M` reaches this level; used to censor transient runs.
    pub escape_level: Option<u64>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { checkpoints: Checkpoints::PowersOfTwo, absorb_at_zero: true, escape_level: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainEnd {
    Horizon,
    Absorbed,
    Escaped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub target: u64,
    /// Step at which the target was first reached, if ever.
    pub first_hit: Option<u64>,
    /// Number of steps (time 0 included) spent exactly at the target.
    pub visits: u64,
}

impl TargetRecord {
    pub fn hit(&self) -> bool {
        self.first_hit.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrajectory {
    pub m0: u64,
    /// `(step, M)` at time 0 and at every reached checkpoint.
    pub samples: Vec<(u64, u64)>,
    pub steps: u64,
    pub final_m: u64,
    pub end: ChainEnd,
    pub max_m: u64,
    pub min_m: u64,
    pub targets: Vec<TargetRecord>,
}

/// Runs the chain from `m0` for at most `horizon` steps.
///
/// A target below the start counts as hit once the chain is at or below
/// it, a target above once the chain is at or above it. The chain only
/// moves up by one, so the upward case is an exact visit; downward, a
/// jump across the target followed by a later return is still counted,
/// which keeps the flag meaningful when the run is absorbed at 0.
pub fn run_chain<R: Rng + ?Sized>(
    m0: u64,
    horizon: u64,
    targets: &[u64],
    options: &ChainOptions,
    rng: &mut R,
) -> Result<ChainTrajectory> {
    if m0 == 0 {
        return Err(Error::invalid("m0", "the chain must start at a positive state"));
    }
    let mut m = m0;
    let mut records: Vec<TargetRecord> = targets
        .iter()
        .map(|&t| TargetRecord { target: t, first_hit: (t == m0).then_some(0), visits: u64::from(t == m0) })
        .collect();
    let mut samples = vec![(0, m0)];
    let mut next_cp = options.checkpoints.next_after(0);
    let (mut max_m, mut min_m) = (m0, m0);
    let mut end = ChainEnd::Horizon;
    let mut step = 0u64;
    while step < horizon {
        if m == 0 && options.absorb_at_zero {
            end = ChainEnd::Absorbed;
            break;
        }
        if options.escape_level.is_some_and(|level| m >= level) {
            end = ChainEnd::Escaped;
            break;
        }
        let delta = invert_step(m, rng.random::<f64>());
        m = (m as i64 + delta) as u64;
        step += 1;
        max_m = max_m.max(m);
        min_m = min_m.min(m);
        for rec in records.iter_mut() {
            if m == rec.target {
                rec.visits += 1;
            }
            if rec.first_hit.is_none() {
                let reached = if rec.target < m0 { m <= rec.target } else { m >= rec.target };
                if reached {
                    rec.first_hit = Some(step);
                }
            }
        }
        if next_cp == Some(step) {
            samples.push((step, m));
            next_cp = options.checkpoints.next_after(step);
        }
    }
    if step == horizon && m == 0 && options.absorb_at_zero {
        end = ChainEnd::Absorbed;
    }
    Ok(ChainTrajectory { m0, samples, steps: step, final_m: m, end, max_m, min_m, targets: records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProbe {
    pub horizon: u64,
    pub replicas: usize,
    /// Mean of the per-replica slopes (equal to the slope of the
    /// replica-averaged log curve).
    pub slope: f64,
    /// Standard deviation of the per-replica slopes; `None` for one replica.
    pub spread: Option<f64>,
    pub replica_slopes: Vec<f64>,
    pub checkpoints: Vec<u64>,
}

/// Fits `log M_n` against `log n` over log-spaced checkpoints from 64 to
/// `horizon`, one fit per replica. The chain starts at 1 and is not
/// absorbed (the 2-gon state steps up), matching the boundary of a
/// peeling.
pub fn growth_exponent_probe(horizon: u64, replicas: usize, source: RandomSource) -> Result<GrowthProbe> {
    if horizon < 1000 {
        return Err(Error::invalid("horizon", "must be at least 1000"));
    }
    if replicas == 0 {
        return Err(Error::invalid("replicas", "must be positive"));
    }
    let checkpoints = log_checkpoints(64, horizon, 4);
    let options = ChainOptions {
        checkpoints: Checkpoints::At(checkpoints.clone()),
        absorb_at_zero: false,
        escape_level: None,
    };
    let fits: Vec<Result<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = source.fork(i).rng();
            let traj = run_chain(1, horizon, &[], &options, &mut rng)?;
            let (x, y): (Vec<f64>, Vec<f64>) = traj
                .samples
                .iter()
                .filter(|&&(s, m)| s > 0 && m > 0)
                .map(|&(s, m)| ((s as f64).ln(), (m as f64).ln()))
                .unzip();
            if x.len() < 4 {
                return Err(Error::InsufficientData(format!(
                    "replica {i}: only {} usable checkpoints",
                    x.len()
                )));
            }
            Ok(stats::least_squares(&x, &y)?.slope)
        })
        .collect();
    let replica_slopes = fits.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(GrowthProbe {
        horizon,
        replicas,
        slope: stats::mean(&replica_slopes),
        spread: stats::sample_sd(&replica_slopes),
        replica_slopes,
        checkpoints,
    })
}

/// Roughly `per_octave` log-spaced integers per doubling in `[lo, hi]`,
/// always including both ends.
pub fn log_checkpoints(lo: u64, hi: u64, per_octave: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let factor = 2f64.powf(1.0 / per_octave as f64);
    let mut x = lo as f64;
    while (x.round() as u64) < hi {
        let v = x.round() as u64;
        if out.last() != Some(&v) {
            out.push(v);
        }
        x *= factor;
    }
    out.push(hi);
    out
}
