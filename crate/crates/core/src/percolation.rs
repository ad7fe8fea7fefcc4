//! Site percolation on the UIPT by colored peeling.
//!
//! The peel edge always joins the black arc of the frontier to the white
//! arc (black origin, white destination). A down-step on the right then
//! eats whites, one on the left eats blacks. The cluster of the root dies
//! when no black vertex is left on the frontier.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{sample_step, Side};
use crate::error::{Error, Result};
use crate::mesh::{Color, HalfEdgeId, Mesh};
use crate::peeling::{fill_free, StepBudget, DEFAULT_STEP_BUDGET};
use crate::rng::RandomSource;
use crate::stats;

/// Resolves a subtraction that overshot: the excess comes out of the other
/// color.
pub fn clamp(black: i64, white: i64) -> (u64, u64) {
    if black < 0 {
        (0, (black + white) as u64)
    } else if white < 0 {
        ((black + white) as u64, 0)
    } else {
        (black as u64, white as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Died { step: u64 },
    Survived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PercOutcome {
    pub verdict: Verdict,
    pub max_black: u64,
    pub steps: u64,
    /// `(black, white)` after each step, if recorded.
    pub trace: Option<Vec<(u64, u64)>>,
}

impl PercOutcome {
    pub fn died(&self) -> bool {
        matches!(self.verdict, Verdict::Died { .. })
    }

    pub fn death_step(&self) -> Option<u64> {
        match self.verdict {
            Verdict::Died { step } => Some(step),
            Verdict::Survived => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialColors {
    /// Black root, the other two root vertices colored like new vertices.
    #[default]
    Random,
    AllBlack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercOptions {
    pub initial: InitialColors,
    pub record_trace: bool,
    /// Full engine: also color vertices inside filled holes.
    pub color_holes: bool,
    /// Full engine: check after every step that each color is one arc.
    pub check_arcs: bool,
    pub step_budget: u64,
}

impl Default for PercOptions {
    fn default() -> Self {
        PercOptions {
            initial: InitialColors::Random,
            record_trace: false,
            color_holes: false,
            check_arcs: false,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid("p", format!("{p} is not a probability")))
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        Err(Error::invalid("horizon", "must be positive"))
    } else {
        Ok(())
    }
}

fn initial_counts<R: Rng + ?Sized>(p: f64, initial: InitialColors, rng: &mut R) -> (u64, u64) {
    match initial {
        InitialColors::AllBlack => (3, 0),
        InitialColors::Random => {
            let extra = (0..2).filter(|_| rng.random_bool(p)).count() as u64;
            (1 + extra, 2 - extra)
        }
    }
}

/// The chain on black/white frontier counts only.
pub fn run_reduced<R: Rng + ?Sized>(p: f64, horizon: u64, rng: &mut R, options: &PercOptions) -> Result<PercOutcome> {
    check_probability(p)?;
    check_horizon(horizon)?;
    let (mut b, mut w) = initial_counts(p, options.initial, rng);
    let mut max_black = b;
    let mut trace = options.record_trace.then(Vec::new);
    for t in 1..=horizon {
        let step = sample_step(b + w - 2, rng);
        if step.delta > 0 {
            if rng.random_bool(p) {
                b += 1;
            } else {
                w += 1;
            }
        } else {
            let k = step.delta.unsigned_abs() as i64;
            (b, w) = match step.side {
                Side::Left => clamp(b as i64 - k, w as i64),
                Side::Right => clamp(b as i64, w as i64 - k),
            };
        }
        max_black = max_black.max(b);
        if let Some(tr) = trace.as_mut() {
            tr.push((b, w));
        }
        if b == 0 {
            return Ok(PercOutcome { verdict: Verdict::Died { step: t }, max_black, steps: t, trace });
        }
    }
    Ok(PercOutcome { verdict: Verdict::Survived, max_black, steps: horizon, trace })
}

fn black_to_white(mesh: &Mesh, h: HalfEdgeId) -> bool {
    mesh.color(mesh.origin(h)) == Some(Color::Black) && mesh.color(mesh.dest(h)) == Some(Color::White)
}

/// Whether the frontier colors form at most one black and one white arc.
fn single_arcs(mesh: &Mesh) -> bool {
    let colors: Vec<Option<Color>> = mesh.frontier_vertices().into_iter().map(|v| mesh.color(v)).collect();
    let changes = (0..colors.len()).filter(|&i| colors[i] != colors[(i + 1) % colors.len()]).count();
    changes <= 2
}

/// The same process on an actual triangulation.
pub fn run_full<R: Rng + ?Sized>(
    p: f64,
    horizon: u64,
    rng: &mut R,
    options: &PercOptions,
) -> Result<(PercOutcome, Mesh)> {
    check_probability(p)?;
    check_horizon(horizon)?;
    let mut budget = StepBudget::new(options.step_budget);
    let mut mesh = Mesh::root_triangle();
    mesh.set_color(0, Some(Color::Black));
    for v in 1..3 {
        let black = match options.initial {
            InitialColors::AllBlack => true,
            InitialColors::Random => rng.random_bool(p),
        };
        mesh.set_color(v, Some(if black { Color::Black } else { Color::White }));
    }
    let start = mesh.frontier_edge().expect("root frontier");
    let mut cursor = mesh.cycle(start).find(|&h| black_to_white(&mesh, h)).unwrap_or(start);
    let count = |mesh: &Mesh, c: Color| mesh.frontier_vertices().iter().filter(|&&v| mesh.color(v) == Some(c)).count();
    let (mut b, mut w) = (count(&mesh, Color::Black) as u64, count(&mesh, Color::White) as u64);
    let mut max_black = b;
    let mut trace = options.record_trace.then(Vec::new);
    for t in 1..=horizon {
        budget.spend(1)?;
        let step = sample_step(b + w - 2, rng);
        if step.delta > 0 {
            let a = mesh.attach_vertex(cursor, true);
            if rng.random_bool(p) {
                mesh.set_color(a.vertex, Some(Color::Black));
                cursor = a.front_edge;
                b += 1;
            } else {
                mesh.set_color(a.vertex, Some(Color::White));
                cursor = a.back_edge;
                w += 1;
            }
        } else {
            let k = step.delta.unsigned_abs();
            let closed = mesh.close_at_distance(cursor, k as usize, step.side);
            let w_vertex = mesh.dest(closed.back_edge);
            for v in mesh.cycle(closed.detached.edge).map(|e| mesh.origin(e)).collect::<Vec<_>>() {
                if v != w_vertex {
                    match mesh.color(v) {
                        Some(Color::Black) => b -= 1,
                        Some(Color::White) => w -= 1,
                        None => unreachable!("frontier vertices are colored"),
                    }
                }
            }
            let before = mesh.vertex_count();
            fill_free(&mut mesh, closed.detached.edge, k - 1, rng, &mut budget)?;
            if options.color_holes {
                for v in before..mesh.vertex_count() {
                    let c = if rng.random_bool(p) { Color::Black } else { Color::White };
                    mesh.set_color(v as u32, Some(c));
                }
            }
            cursor = match step.side {
                Side::Right => closed.back_edge,
                Side::Left => closed.front_edge,
            };
        }
        debug_assert_eq!(mesh.frontier_len() as u64, b + w);
        if options.check_arcs {
            assert!(single_arcs(&mesh), "frontier colors split into several arcs at step {t}");
            assert!(w == 0 || b == 0 || black_to_white(&mesh, cursor), "peel edge not bichromatic at step {t}");
        }
        max_black = max_black.max(b);
        if let Some(tr) = trace.as_mut() {
            tr.push((b, w));
        }
        if b == 0 {
            let outcome = PercOutcome { verdict: Verdict::Died { step: t }, max_black, steps: t, trace };
            return Ok((outcome, mesh));
        }
    }
    Ok((PercOutcome { verdict: Verdict::Survived, max_black, steps: horizon, trace }, mesh))
}

/// One run of either engine, discarding the mesh.
pub fn run<R: Rng + ?Sized>(
    engine: Engine,
    p: f64,
    horizon: u64,
    rng: &mut R,
    options: &PercOptions,
) -> Result<PercOutcome> {
    match engine {
        Engine::Reduced => run_reduced(p, horizon, rng, options),
        Engine::Full => run_full(p, horizon, rng, options).map(|(o, _)| o),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub p: f64,
    pub horizon: u64,
    pub replicas: usize,
    pub survived: u64,
    pub fraction: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub outcomes: Vec<PercOutcome>,
}

/// Runs `replicas` independent runs, replica `i` on `source.fork(i)`.
pub fn estimate_survival(
    p: f64,
    horizon: u64,
    replicas: usize,
    engine: Engine,
    options: &PercOptions,
    source: RandomSource,
) -> Result<SurvivalEstimate> {
    check_probability(p)?;
    check_horizon(horizon)?;
    if replicas == 0 {
        return Err(Error::invalid("replicas", "must be at least 1"));
    }
    let outcomes: Vec<PercOutcome> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| run(engine, p, horizon, &mut source.fork(i).rng(), options))
        .collect::<Result<_>>()?;
    let survived = outcomes.iter().filter(|o| !o.died()).count() as u64;
    let (ci_low, ci_high) = stats::wilson_interval(survived, replicas as u64, 1.96);
    Ok(SurvivalEstimate {
        p,
        horizon,
        replicas,
        survived,
        fraction: survived as f64 / replicas as f64,
        ci_low,
        ci_high,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub horizon: u64,
    pub replicas: usize,
    pub rows: Vec<SweepRow>,
    /// No drop larger than the confidence intervals allow.
    pub monotone_within_ci: bool,
    /// Interpolated `p` where survival first reaches the crossing level.
    pub crossing: Option<f64>,
    pub crossing_level: f64,
}

impl Sweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,survival,ci_low,ci_high\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.p, r.fraction, r.ci_low, r.ci_high));
        }
        out
    }

    /// Summarizes estimates sharing a horizon and replica count, in
    /// ascending `p`.
    pub fn from_estimates(estimates: &[SurvivalEstimate], crossing_level: f64) -> Result<Sweep> {
        let first = estimates.first().ok_or_else(|| Error::invalid("p_list", "empty"))?;
        let mut rows: Vec<SweepRow> = estimates
            .iter()
            .map(|e| SweepRow { p: e.p, fraction: e.fraction, ci_low: e.ci_low, ci_high: e.ci_high })
            .collect();
        rows.sort_by(|a, b| a.p.total_cmp(&b.p));
        let monotone_within_ci =
            rows.windows(2).all(|w| w[1].fraction >= w[0].fraction || w[1].ci_high >= w[0].ci_low);
        let crossing = rows.iter().position(|r| r.fraction >= crossing_level).map(|j| {
            if j == 0 {
                rows[0].p
            } else {
                let (a, b) = (&rows[j - 1], &rows[j]);
                a.p + (crossing_level - a.fraction) / (b.fraction - a.fraction) * (b.p - a.p)
            }
        });
        Ok(Sweep {
            horizon: first.horizon,
            replicas: first.replicas,
            rows,
            monotone_within_ci,
            crossing,
            crossing_level,
        })
    }
}

/// Survival estimates for each `p` in ascending order, the `j`-th on
/// `source.fork(j)`.
pub fn survival_curve(
    ps: &[f64],
    horizon: u64,
    replicas: usize,
    engine: Engine,
    options: &PercOptions,
    source: RandomSource,
) -> Result<Vec<SurvivalEstimate>> {
    if ps.is_empty() {
        return Err(Error::invalid("p_list", "empty"));
    }
    let mut ps = ps.to_vec();
    ps.sort_by(f64::total_cmp);
    ps.iter()
        .enumerate()
        .map(|(j, &p)| estimate_survival(p, horizon, replicas, engine, options, source.fork(j as u64)))
        .collect()
}

/// Survival fractions over a list of `p`, with a monotonicity check and
/// the interpolated crossing of `crossing_level`.
pub fn sweep(
    ps: &[f64],
    horizon: u64,
    replicas: usize,
    engine: Engine,
    options: &PercOptions,
    source: RandomSource,
    crossing_level: f64,
) -> Result<Sweep> {
    Sweep::from_estimates(&survival_curve(ps, horizon, replicas, engine, options, source)?, crossing_level)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub p: f64,
    pub horizon: u64,
    pub max_black: Vec<u64>,
    /// `max_black / ln(horizon)` per replica.
    pub ratios: Vec<f64>,
    pub median_ratio: f64,
}

/// Maximum black frontier count over a subcritical run, against
/// `ln(horizon)`.
pub fn subcritical_logbound_probe(
    p: f64,
    horizon: u64,
    replicas: usize,
    source: RandomSource,
) -> Result<LogBound> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::invalid("p", "the log-bound probe needs 0 <= p < 1/2"));
    }
    let est = estimate_survival(p, horizon, replicas, Engine::Reduced, &PercOptions::default(), source)?;
    let max_black: Vec<u64> = est.outcomes.iter().map(|o| o.max_black).collect();
    let scale = (horizon as f64).ln().max(1.0);
    let ratios: Vec<f64> = max_black.iter().map(|&b| b as f64 / scale).collect();
    let median_ratio = stats::median(&ratios);
    Ok(LogBound { p, horizon, max_black, ratios, median_ratio })
}
