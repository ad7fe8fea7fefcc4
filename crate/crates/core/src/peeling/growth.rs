use rand::Rng;
use serde::{Deserialize, Serialize};

use super::free::fill_free;
use super::{FreeSizeSampler, StepBudget, DEFAULT_STEP_BUDGET};
use crate::chain::{sample_step, Side};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, VertexId, NIL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthMode {
    Full,
    Skeleton,
}

/// Which frontier edge is peeled. Both keep the peeling layered; they
/// differ in which end of the current layer's arc is eaten first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PeelRule {
    /// Edge from the last next-layer vertex into the current layer.
    #[default]
    Trailing,
    /// Edge from the current layer out to the first next-layer vertex.
    Leading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Start {
    /// A single triangle with a root vertex.
    #[default]
    RootTriangle,
    /// A bare `(m+2)`-gon; distances are measured from its boundary.
    Polygon(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthOptions {
    pub mode: GrowthMode,
    pub rule: PeelRule,
    pub start: Start,
    pub step_budget: u64,
    pub record_steps: bool,
    /// Full mode: keep the frontier vertex list at each layer completion.
    pub record_layer_frontiers: bool,
}

impl GrowthOptions {
    pub fn new(mode: GrowthMode) -> Self {
        GrowthOptions {
            mode,
            rule: PeelRule::default(),
            start: Start::default(),
            step_budget: DEFAULT_STEP_BUDGET,
            record_steps: false,
            record_layer_frontiers: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    /// Boundary parameter after the step.
    pub m: u64,
    pub x: i64,
    pub y: u64,
    /// Layer being peeled during the step.
    pub layer: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub r: u32,
    /// Step at which the layer closed.
    pub t: u64,
    pub m: u64,
    pub hull: u64,
    /// Full mode: vertices within distance `r`.
    pub ball: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeelTrace {
    pub steps: Vec<StepRecord>,
    pub layers: Vec<LayerRecord>,
    pub total_steps: u64,
    /// `Σ |X_t|^2` and `Σ |X_t|^3` over all steps.
    pub v2: f64,
    pub v3: f64,
}

#[derive(Debug, Clone)]
pub struct Growth {
    pub trace: PeelTrace,
    pub mesh: Option<Mesh>,
    /// Frontier vertices at each layer completion, if requested.
    pub layer_frontiers: Vec<Vec<VertexId>>,
}

/// Counts of frontier vertices in the layer being peeled and in the next
/// one. The two form complementary arcs; the peel edge sits where they
/// meet, with the current layer on its destination side for the trailing
/// rule and on its origin side for the leading rule.
#[derive(Debug, Clone, Copy)]
struct LayerTracker {
    current: u64,
    next: u64,
    r: u32,
    current_at_dest: bool,
}

impl LayerTracker {
    fn on_new(&mut self) {
        self.next += 1;
    }

    /// Returns true when the current layer has just been used up.
    fn on_split(&mut self, k: u64, side: Side) -> bool {
        let current_first = (side == Side::Right) == self.current_at_dest;
        if current_first {
            let a = k.min(self.current);
            self.current -= a;
            self.next -= k - a;
        } else {
            let b = k.min(self.next);
            self.next -= b;
            self.current -= k - b;
        }
        self.current == 0
    }

    fn advance(&mut self) {
        self.current = self.next;
        self.next = 0;
        self.r += 1;
    }
}

/// Peels the UIPT layer by layer until the hull of radius `r_max` is
/// complete.
pub fn grow_uipt<R: Rng + ?Sized>(r_max: u32, rng: &mut R, options: &GrowthOptions) -> Result<Growth> {
    if r_max == 0 {
        return Err(Error::invalid("r_max", "must be at least 1"));
    }
    let mut budget = StepBudget::new(options.step_budget);
    let mut sizes = FreeSizeSampler::new();
    let full = options.mode == GrowthMode::Full;
    let trailing = options.rule == PeelRule::Trailing;

    let (mut m, mut tracker, initial, mut mesh, mut cursor) = match options.start {
        Start::RootTriangle => {
            let tracker = LayerTracker { current: 1, next: 2, r: 0, current_at_dest: trailing };
            let (mesh, cursor) = if full {
                let mesh = Mesh::root_triangle();
                let f = mesh.frontier_edge().expect("root frontier");
                // f runs root → v1; the trailing rule wants v2 → root.
                let cursor = if trailing { mesh.prev(f) } else { f };
                (Some(mesh), cursor)
            } else {
                (None, NIL)
            };
            (1u64, tracker, 3u64, mesh, cursor)
        }
        Start::Polygon(m0) => {
            let tracker = LayerTracker { current: m0 + 2, next: 0, r: 0, current_at_dest: trailing };
            let (mesh, cursor) = if full {
                let (mut mesh, open, _) = Mesh::polygon(m0 as usize);
                mesh.promote_to_frontier(open);
                (Some(mesh), open)
            } else {
                (None, NIL)
            };
            (m0, tracker, m0 + 2, mesh, cursor)
        }
    };

    let mut trace = PeelTrace::default();
    let mut hull = initial;
    let mut layer_frontiers = Vec::new();
    let mut t = 0u64;
    while tracker.r < r_max {
        budget.spend(1)?;
        t += 1;
        let step = sample_step(m, rng);
        let layer = tracker.r;
        let mut done = false;
        let y = if step.delta > 0 {
            if let Some(mesh) = mesh.as_mut() {
                let a = mesh.attach_vertex(cursor, true);
                cursor = if trailing { a.front_edge } else { a.back_edge };
            }
            tracker.on_new();
            m += 1;
            1
        } else {
            let k = step.delta.unsigned_abs();
            let y = match mesh.as_mut() {
                Some(mesh) => {
                    let closed = mesh.close_at_distance(cursor, k as usize, step.side);
                    cursor = match step.side {
                        Side::Right => closed.back_edge,
                        Side::Left => closed.front_edge,
                    };
                    fill_free(mesh, closed.detached.edge, k - 1, rng, &mut budget)?
                }
                None => sizes.sample(k - 1, rng),
            };
            done = tracker.on_split(k, step.side);
            m -= k;
            y
        };
        hull += y;
        let xf = step.delta.unsigned_abs() as f64;
        trace.v2 += xf * xf;
        trace.v3 += xf * xf * xf;
        if let Some(mesh) = mesh.as_ref() {
            debug_assert_eq!(mesh.frontier_len() as u64, m + 2);
            debug_assert_eq!(mesh.vertex_count() as u64, hull);
        }
        if options.record_steps {
            trace.steps.push(StepRecord { t, m, x: step.delta, y, layer });
        }
        if done {
            tracker.advance();
            trace.layers.push(LayerRecord { r: tracker.r, t, m, hull, ball: None });
            if options.record_layer_frontiers {
                if let Some(mesh) = mesh.as_ref() {
                    layer_frontiers.push(mesh.frontier_vertices());
                }
            }
        }
    }
    trace.total_steps = t;
    if let Some(mesh) = mesh.as_ref() {
        let sources: Vec<VertexId> = match options.start {
            Start::RootTriangle => vec![0],
            Start::Polygon(m0) => (0..m0 as VertexId + 2).collect(),
        };
        let dist = mesh.multi_source_distances(&sources);
        let mut per_distance = vec![0u64; r_max as usize + 1];
        for &d in &dist {
            if d <= r_max {
                per_distance[d as usize] += 1;
            }
        }
        let mut ball = Vec::with_capacity(per_distance.len());
        let mut acc = 0u64;
        for c in per_distance {
            acc += c;
            ball.push(acc);
        }
        for rec in trace.layers.iter_mut() {
            rec.ball = Some(ball[rec.r as usize]);
        }
    }
    Ok(Growth { trace, mesh, layer_frontiers })
}
