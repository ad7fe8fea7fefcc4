//! Index-based half-edge mesh for type II triangulations under
//! construction.
//!
//! Every half-edge is either a side of a triangle (`Inner`), a side of an
//! unexplored face (`Open`: the frontier or a detached hole), a side of the
//! exterior of a standalone polygon (`Outside`), or removed (`Dead`). Each
//! face lies to the left of its half-edges, so following `next` along the
//! frontier walks it in the forward direction (see the README diagram):
//! for a peel edge `b → c`, the vertices after `c` are on the right, the
//! vertices before `b` on the left.

mod bfs;
mod export;
mod validate;

pub use bfs::Adjacency;
pub use validate::Violation;

use serde::{Deserialize, Serialize};

use crate::chain::Side;
use crate::error::{Error, Result};

pub type VertexId = u32;
pub type HalfEdgeId = u32;

/// Missing index / unknown label.
pub const NIL: u32 = u32::MAX;

const FRONTIER_FACE: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Inner,
    Open,
    Outside,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Black,
    White,
}

/// An open face cut off from the frontier, waiting to be filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hole {
    /// Any half-edge of the hole's boundary cycle.
    pub edge: HalfEdgeId,
    /// Number of boundary edges (and vertices).
    pub len: usize,
}

/// Result of gluing a triangle onto an open edge `b → c` with a fresh
/// vertex `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attached {
    pub vertex: VertexId,
    /// `b → y`.
    pub back_edge: HalfEdgeId,
    /// `y → c`.
    pub front_edge: HalfEdgeId,
}

/// Result of closing a triangle `b, c, w` onto an existing vertex `w` of the
/// same open face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Closed {
    /// `b → w`.
    pub back_edge: HalfEdgeId,
    /// `w → c`.
    pub front_edge: HalfEdgeId,
    /// The part that got its own face id.
    pub detached: Hole,
}

/// A triangulated polygon built outside any host mesh, ready to be copied
/// into a hole. Boundary position `j` is the edge `p_j → p_{j+1}` seen from
/// inside; `boundary[j]` is the outside half-edge `p_{j+1} → p_j`.
#[derive(Debug, Clone)]
pub struct Filler {
    pub mesh: Mesh,
    pub boundary: Vec<HalfEdgeId>,
}

impl Filler {
    /// The empty 2-gon: its two sides get identified.
    pub fn glued_two_gon() -> Self {
        let (mut mesh, open, boundary) = Mesh::polygon(0);
        mesh.glue_two_gon(open).expect("fresh 2-gon");
        Filler { mesh, boundary }
    }

    pub fn internal_vertices(&self) -> usize {
        self.mesh.vertex_count() - self.boundary.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    origin: Vec<VertexId>,
    twin: Vec<HalfEdgeId>,
    next: Vec<HalfEdgeId>,
    prev: Vec<HalfEdgeId>,
    kind: Vec<EdgeKind>,
    face: Vec<u32>,
    label: Vec<u32>,
    color: Vec<Option<Color>>,
    edges: usize,
    triangles: usize,
    open_faces: usize,
    outside_faces: usize,
    next_face: u32,
    frontier: Option<HalfEdgeId>,
    frontier_len: usize,
}

impl Mesh {
    /// One triangle `v0 v1 v2` with root `v0` (label 0) and its two
    /// neighbours (label 1). The frontier runs `v0 → v1 → v2 → v0`.
    pub fn root_triangle() -> Self {
        let mut mesh = Mesh { next_face: 1, ..Mesh::default() };
        for l in [0, 1, 1] {
            mesh.add_vertex(l);
        }
        let inner: Vec<HalfEdgeId> = (0..3).map(|i| mesh.add_half_edge((i + 1) % 3, EdgeKind::Inner, NIL)).collect();
        let open: Vec<HalfEdgeId> = (0..3).map(|i| mesh.add_half_edge(i, EdgeKind::Open, FRONTIER_FACE)).collect();
        for i in 0..3 {
            // inner[i]: v_{i+1} → v_i, open[i]: v_i → v_{i+1}
            mesh.link(inner[i], inner[(i + 2) % 3]);
            mesh.link(open[i], open[(i + 1) % 3]);
            mesh.pair(inner[i], open[i]);
        }
        mesh.edges = 3;
        mesh.triangles = 1;
        mesh.open_faces = 1;
        mesh.frontier = Some(open[0]);
        mesh.frontier_len = 3;
        mesh.check_euler();
        mesh
    }

    /// A bare `(m+2)`-gon `p_0 .. p_{m+1}`: open inside, `Outside` outside.
    /// Returns the mesh, the open half-edge `p_0 → p_1`, and the outside
    /// half-edges indexed by boundary position.
    pub fn polygon(m: usize) -> (Self, HalfEdgeId, Vec<HalfEdgeId>) {
        let n = m + 2;
        let mut mesh = Mesh { next_face: 1, ..Mesh::default() };
        for _ in 0..n {
            mesh.add_vertex(NIL);
        }
        let face = mesh.new_face();
        let open: Vec<HalfEdgeId> = (0..n).map(|i| mesh.add_half_edge(i as u32, EdgeKind::Open, face)).collect();
        let outside: Vec<HalfEdgeId> =
            (0..n).map(|i| mesh.add_half_edge(((i + 1) % n) as u32, EdgeKind::Outside, NIL)).collect();
        for i in 0..n {
            mesh.link(open[i], open[(i + 1) % n]);
            mesh.link(outside[(i + 1) % n], outside[i]);
            mesh.pair(open[i], outside[i]);
        }
        mesh.edges = n;
        mesh.open_faces = 1;
        mesh.outside_faces = 1;
        mesh.check_euler();
        (mesh, open[0], outside)
    }

    /// Turns the polygon's open face into the frontier of a growth: all
    /// boundary vertices get label 0.
    pub(crate) fn promote_to_frontier(&mut self, open: HalfEdgeId) {
        let mut len = 0;
        let mut h = open;
        loop {
            self.face[h as usize] = FRONTIER_FACE;
            self.label[self.origin[h as usize] as usize] = 0;
            len += 1;
            h = self.next[h as usize];
            if h == open {
                break;
            }
        }
        self.frontier = Some(open);
        self.frontier_len = len;
    }

    pub fn vertex_count(&self) -> usize {
        self.label.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles
    }

    /// Faces including open and outside faces.
    pub fn face_count(&self) -> usize {
        self.triangles + self.open_faces + self.outside_faces
    }

    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier_len
    }

    /// Some half-edge on the frontier, if the mesh has one.
    pub fn frontier_edge(&self) -> Option<HalfEdgeId> {
        self.frontier
    }

    pub fn origin(&self, h: HalfEdgeId) -> VertexId {
        self.origin[h as usize]
    }

    pub fn dest(&self, h: HalfEdgeId) -> VertexId {
        self.origin[self.twin[h as usize] as usize]
    }

    pub fn twin(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.twin[h as usize]
    }

    pub fn next(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.next[h as usize]
    }

    pub fn prev(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.prev[h as usize]
    }

    pub fn kind(&self, h: HalfEdgeId) -> EdgeKind {
        self.kind[h as usize]
    }

    pub fn is_frontier(&self, h: HalfEdgeId) -> bool {
        self.kind[h as usize] == EdgeKind::Open && self.face[h as usize] == FRONTIER_FACE
    }

    /// Distance label assigned at creation, if known.
    pub fn label(&self, v: VertexId) -> Option<u32> {
        let l = self.label[v as usize];
        (l != NIL).then_some(l)
    }

    pub fn color(&self, v: VertexId) -> Option<Color> {
        self.color[v as usize]
    }

    pub fn set_color(&mut self, v: VertexId, c: Option<Color>) {
        self.color[v as usize] = c;
    }

    /// Frontier vertices in forward order starting at the origin of the
    /// stored frontier edge.
    pub fn frontier_vertices(&self) -> Vec<VertexId> {
        match self.frontier {
            Some(h) => self.cycle(h).map(|e| self.origin(e)).collect(),
            None => Vec::new(),
        }
    }

    /// Half-edges of the face cycle through `h`, starting at `h`.
    pub fn cycle(&self, h: HalfEdgeId) -> impl Iterator<Item = HalfEdgeId> + '_ {
        let mut cur = Some(h);
        std::iter::from_fn(move || {
            let out = cur?;
            let nx = self.next(out);
            cur = (nx != h).then_some(nx);
            Some(out)
        })
    }

    /// Glues a triangle with a new vertex onto the open edge `edge`; the
    /// frontier grows by one if `edge` is on it. The new vertex is labeled
    /// one more than the smaller endpoint label.
    pub fn peel_attach_new(&mut self, edge: HalfEdgeId) -> Result<Attached> {
        self.require_frontier(edge)?;
        Ok(self.attach_vertex(edge, true))
    }

    /// Glues a triangle joining the frontier edge `edge` (`b → c`) to the
    /// frontier vertex `k` steps away: `k` steps after `c` on the right, `k`
    /// steps before `b` on the left. The `k + 1` edges in between are cut
    /// off as a hole and the frontier shrinks by `k`.
    pub fn peel_attach_back(&mut self, edge: HalfEdgeId, k: usize, side: Side) -> Result<Closed> {
        self.require_frontier(edge)?;
        let m = self.frontier_len - 2;
        if k == 0 || k > m {
            return Err(Error::DistanceOutOfRange { k, m });
        }
        Ok(self.close_at_distance(edge, k, side))
    }

    /// Closes onto the vertex `k` steps away on `side` of an open edge whose
    /// face has more than `k + 1` edges. The cut-off part (on `side`) gets
    /// a fresh face id.
    pub(crate) fn close_at_distance(&mut self, h: HalfEdgeId, k: usize, side: Side) -> Closed {
        let g = match side {
            Side::Right => (0..=k).fold(h, |e, _| self.next(e)),
            Side::Left => (0..k).fold(h, |e, _| self.prev(e)),
        };
        self.close_triangle(h, g, side)
    }

    fn require_frontier(&self, edge: HalfEdgeId) -> Result<()> {
        if (edge as usize) < self.origin.len() && self.is_frontier(edge) {
            Ok(())
        } else {
            Err(Error::NotOnBoundary(edge))
        }
    }

    /// Low-level attach on any open edge. Unlabeled vertices are used
    /// inside filled holes.
    pub(crate) fn attach_vertex(&mut self, h: HalfEdgeId, labeled: bool) -> Attached {
        debug_assert_eq!(self.kind(h), EdgeKind::Open);
        let (b, c) = (self.origin(h), self.dest(h));
        let face = self.face[h as usize];
        let (hp, hn) = (self.prev(h), self.next(h));
        let label = match (labeled, self.label(b), self.label(c)) {
            (true, Some(x), Some(y)) => x.min(y) + 1,
            _ => NIL,
        };
        let y = self.add_vertex(label);
        let i1 = self.add_half_edge(c, EdgeKind::Inner, NIL);
        let i2 = self.add_half_edge(y, EdgeKind::Inner, NIL);
        let e1 = self.add_half_edge(b, EdgeKind::Open, face);
        let e2 = self.add_half_edge(y, EdgeKind::Open, face);
        self.kind[h as usize] = EdgeKind::Inner;
        self.face[h as usize] = NIL;
        self.link(h, i1);
        self.link(i1, i2);
        self.link(i2, h);
        self.pair(i1, e2);
        self.pair(i2, e1);
        self.link(hp, e1);
        self.link(e1, e2);
        self.link(e2, hn);
        self.edges += 2;
        self.triangles += 1;
        if face == FRONTIER_FACE {
            self.frontier_len += 1;
            self.frontier = Some(e1);
        }
        self.check_euler();
        Attached { vertex: y, back_edge: e1, front_edge: e2 }
    }

    /// Low-level split: triangle `b, c, w` on open edge `h = b → c` with
    /// `w = origin(g)` on the same open face. The part on `detach` side
    /// (containing `w → c` for `Right`, `b → w` for `Left`) gets a fresh
    /// face id; the other keeps the old one.
    pub(crate) fn close_triangle(&mut self, h: HalfEdgeId, g: HalfEdgeId, detach: Side) -> Closed {
        debug_assert_eq!(self.kind(h), EdgeKind::Open);
        debug_assert_eq!(self.face[h as usize], self.face[g as usize]);
        let (b, c, w) = (self.origin(h), self.dest(h), self.origin(g));
        debug_assert!(w != b && w != c, "closing onto an endpoint would create a loop");
        let face = self.face[h as usize];
        let (hp, hn, gp) = (self.prev(h), self.next(h), self.prev(g));
        let i1 = self.add_half_edge(c, EdgeKind::Inner, NIL);
        let i2 = self.add_half_edge(w, EdgeKind::Inner, NIL);
        let e1 = self.add_half_edge(b, EdgeKind::Open, face);
        let e2 = self.add_half_edge(w, EdgeKind::Open, face);
        self.kind[h as usize] = EdgeKind::Inner;
        self.face[h as usize] = NIL;
        self.link(h, i1);
        self.link(i1, i2);
        self.link(i2, h);
        self.pair(i1, e2);
        self.pair(i2, e1);
        self.link(hp, e1);
        self.link(e1, g);
        self.link(gp, e2);
        self.link(e2, hn);
        self.edges += 2;
        self.triangles += 1;
        self.open_faces += 1;
        let start = match detach {
            Side::Right => e2,
            Side::Left => e1,
        };
        let id = self.new_face();
        let mut len = 0;
        let mut e = start;
        loop {
            self.face[e as usize] = id;
            len += 1;
            e = self.next(e);
            if e == start {
                break;
            }
        }
        if face == FRONTIER_FACE {
            self.frontier_len -= len - 1;
            self.frontier = Some(if detach == Side::Right { e1 } else { e2 });
        }
        self.check_euler();
        Closed { back_edge: e1, front_edge: e2, detached: Hole { edge: start, len } }
    }

    /// Identifies the two sides of an open 2-gon.
    pub fn glue_two_gon(&mut self, h: HalfEdgeId) -> Result<()> {
        if self.kind(h) != EdgeKind::Open {
            return Err(Error::NotOnBoundary(h));
        }
        let hn = self.next(h);
        if self.next(hn) != h || hn == h {
            let len = self.cycle(h).count();
            return Err(Error::BoundaryMismatch { hole: len, filler: 2 });
        }
        if self.face[h as usize] == FRONTIER_FACE {
            self.frontier = None;
            self.frontier_len = 0;
        }
        let (t1, t2) = (self.twin(h), self.twin(hn));
        self.pair(t1, t2);
        for e in [h, hn] {
            self.kind[e as usize] = EdgeKind::Dead;
            self.face[e as usize] = NIL;
            self.twin[e as usize] = NIL;
            self.next[e as usize] = NIL;
            self.prev[e as usize] = NIL;
        }
        self.edges -= 1;
        self.open_faces -= 1;
        self.check_euler();
        Ok(())
    }

    /// Fills `hole` with a copy of `filler`, aligning filler boundary
    /// position 0 with `hole.edge`.
    pub fn glue_hole(&mut self, hole: Hole, filler: &Filler) -> Result<()> {
        let hole_edges: Vec<HalfEdgeId> = self.cycle(hole.edge).collect();
        if self.kind(hole.edge) != EdgeKind::Open || self.is_frontier(hole.edge) {
            return Err(Error::NotOnBoundary(hole.edge));
        }
        if hole_edges.len() != filler.boundary.len() || hole.len != hole_edges.len() {
            return Err(Error::BoundaryMismatch { hole: hole_edges.len(), filler: filler.boundary.len() });
        }
        let fm = &filler.mesh;
        let n = hole_edges.len();
        let mut vmap = vec![NIL; fm.vertex_count()];
        let mut hmap = vec![NIL; fm.half_edge_count()];
        let mut position = vec![NIL; fm.half_edge_count()];
        for (j, &out) in filler.boundary.iter().enumerate() {
            vmap[fm.dest(out) as usize] = self.origin(hole_edges[j]);
            position[out as usize] = j as u32;
        }
        for (j, &out) in filler.boundary.iter().enumerate() {
            let inside = fm.twin(out);
            if fm.kind(inside) == EdgeKind::Inner {
                hmap[inside as usize] = hole_edges[j];
            }
        }
        for slot in vmap.iter_mut() {
            if *slot == NIL {
                *slot = self.add_vertex(NIL);
            }
        }
        let mut new_half_edges = 0usize;
        for f in 0..fm.half_edge_count() as u32 {
            if fm.kind(f) == EdgeKind::Inner && hmap[f as usize] == NIL {
                hmap[f as usize] = self.add_half_edge(vmap[fm.origin(f) as usize], EdgeKind::Inner, NIL);
                new_half_edges += 1;
            }
        }
        for f in 0..fm.half_edge_count() as u32 {
            if fm.kind(f) != EdgeKind::Inner {
                continue;
            }
            let h = hmap[f as usize];
            self.kind[h as usize] = EdgeKind::Inner;
            self.face[h as usize] = NIL;
            self.next[h as usize] = hmap[fm.next(f) as usize];
            self.prev[h as usize] = hmap[fm.prev(f) as usize];
            let ft = fm.twin(f);
            if fm.kind(ft) == EdgeKind::Inner {
                self.twin[h as usize] = hmap[ft as usize];
            }
        }
        // Boundary sides glued to each other inside the filler.
        let mut glued = 0usize;
        for (j, &out) in filler.boundary.iter().enumerate() {
            let other = fm.twin(out);
            if fm.kind(other) == EdgeKind::Outside && j < position[other as usize] as usize {
                let l = position[other as usize] as usize;
                let (hj, hl) = (hole_edges[j], hole_edges[l]);
                let (tj, tl) = (self.twin(hj), self.twin(hl));
                self.pair(tj, tl);
                for e in [hj, hl] {
                    self.kind[e as usize] = EdgeKind::Dead;
                    self.face[e as usize] = NIL;
                    self.twin[e as usize] = NIL;
                    self.next[e as usize] = NIL;
                    self.prev[e as usize] = NIL;
                }
                glued += 1;
            }
        }
        debug_assert!(n >= 2);
        self.edges = self.edges + new_half_edges / 2 - glued;
        self.triangles += fm.triangle_count();
        self.open_faces -= 1;
        self.check_euler();
        Ok(())
    }

    fn add_vertex(&mut self, label: u32) -> VertexId {
        self.label.push(label);
        self.color.push(None);
        (self.label.len() - 1) as VertexId
    }

    fn add_half_edge(&mut self, origin: VertexId, kind: EdgeKind, face: u32) -> HalfEdgeId {
        self.origin.push(origin);
        self.twin.push(NIL);
        self.next.push(NIL);
        self.prev.push(NIL);
        self.kind.push(kind);
        self.face.push(face);
        (self.origin.len() - 1) as HalfEdgeId
    }

    fn new_face(&mut self) -> u32 {
        let id = self.next_face;
        self.next_face += 1;
        id
    }

    fn link(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.next[a as usize] = b;
        self.prev[b as usize] = a;
    }

    fn pair(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.twin[a as usize] = b;
        self.twin[b as usize] = a;
    }

    /// Euler relation for the sphere (open and outside faces counted).
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges as i64 + self.face_count() as i64
    }

    #[inline]
    fn check_euler(&self) {
        debug_assert_eq!(self.euler_characteristic(), 2, "Euler relation broken");
    }

    #[cfg(test)]
    pub(crate) fn corrupt_twin(&mut self, h: HalfEdgeId, t: HalfEdgeId) {
        self.twin[h as usize] = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_triangle_counts() {
        let m = Mesh::root_triangle();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (3, 3, 2));
        assert_eq!(m.frontier_len(), 3);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.label(0), Some(0));
        assert_eq!(m.frontier_vertices(), vec![0, 1, 2]);
        m.validate().unwrap();
    }

    #[test]
    fn attach_new_counts_and_labels() {
        let mut m = Mesh::root_triangle();
        let h = m.frontier_edge().unwrap();
        assert_eq!((m.origin(h), m.dest(h)), (0, 1));
        let a = m.peel_attach_new(h).unwrap();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (4, 5, 3));
        assert_eq!(m.frontier_len(), 4);
        assert_eq!(m.label(a.vertex), Some(1));
        let b = m.peel_attach_new(a.front_edge).unwrap();
        assert_ne!(a.vertex, b.vertex);
        assert_eq!(m.label(b.vertex), Some(2));
        m.validate().unwrap();
        assert!(m.peel_attach_new(h).is_err());
    }

    #[test]
    fn attach_back_shapes() {
        let mut m = Mesh::root_triangle();
        let mut h = m.frontier_edge().unwrap();
        for _ in 0..2 {
            h = m.peel_attach_new(h).unwrap().front_edge;
        }
        assert_eq!(m.frontier_len(), 5);
        let closed = m.peel_attach_back(h, 1, Side::Right).unwrap();
        assert_eq!(closed.detached.len, 2);
        assert_eq!(m.frontier_len(), 4);
        m.validate().unwrap();
        let err = m.peel_attach_back(closed.back_edge, 3, Side::Left).unwrap_err();
        assert_eq!(err, Error::DistanceOutOfRange { k: 3, m: 2 });
        let all = m.peel_attach_back(closed.back_edge, 2, Side::Left).unwrap();
        assert_eq!(all.detached.len, 3);
        assert_eq!(m.frontier_len(), 2);
        m.validate().unwrap();
    }

    #[test]
    fn both_sides_cut_the_right_vertices() {
        for side in [Side::Left, Side::Right] {
            let mut m = Mesh::root_triangle();
            let mut h = m.frontier_edge().unwrap();
            for _ in 0..4 {
                h = m.peel_attach_new(h).unwrap().front_edge;
            }
            let before: Vec<VertexId> = m.frontier_vertices();
            let (b, c) = (m.origin(h), m.dest(h));
            let closed = m.peel_attach_back(h, 2, side).unwrap();
            let hole: Vec<VertexId> = m.cycle(closed.detached.edge).map(|e| m.origin(e)).collect();
            let w = m.dest(closed.back_edge);
            assert_eq!(m.origin(closed.front_edge), w);
            let pos = |v: VertexId| before.iter().position(|&x| x == v).unwrap() as i64;
            let n = before.len() as i64;
            match side {
                Side::Right => {
                    assert_eq!((pos(w) - pos(c)).rem_euclid(n), 2);
                    assert!(hole.contains(&c) && !hole.contains(&b));
                }
                Side::Left => {
                    assert_eq!((pos(b) - pos(w)).rem_euclid(n), 2);
                    assert!(hole.contains(&b) && !hole.contains(&c));
                }
            }
            assert_eq!(hole.len(), 3);
            m.validate().unwrap();
        }
    }

    #[test]
    fn glue_empty_two_gon() {
        let mut m = Mesh::root_triangle();
        let mut h = m.frontier_edge().unwrap();
        h = m.peel_attach_new(h).unwrap().front_edge;
        h = m.peel_attach_new(h).unwrap().front_edge;
        let closed = m.peel_attach_back(h, 1, Side::Right).unwrap();
        let e = m.edge_count();
        m.glue_hole(closed.detached, &Filler::glued_two_gon()).unwrap();
        assert_eq!(m.edge_count(), e - 1);
        m.validate().unwrap();
    }

    #[test]
    fn glue_two_gon_with_one_vertex() {
        let (mut fm, open, boundary) = Mesh::polygon(0);
        let a = fm.attach_vertex(open, false);
        fm.glue_two_gon(a.back_edge).unwrap_err();
        // The open face left over is the triangle p1 → p0 → y; closing it
        // onto y leaves two 2-gons.
        let rest = fm.next(a.front_edge);
        let closed = fm.close_triangle(rest, a.front_edge, Side::Right);
        fm.glue_two_gon(closed.detached.edge).unwrap();
        fm.glue_two_gon(closed.back_edge).unwrap();
        let filler = Filler { mesh: fm, boundary };
        assert_eq!(filler.mesh.triangle_count(), 2);
        let mut m = Mesh::root_triangle();
        let mut h = m.frontier_edge().unwrap();
        h = m.peel_attach_new(h).unwrap().front_edge;
        let closed = m.peel_attach_back(h, 1, Side::Left).unwrap();
        let (v, t) = (m.vertex_count(), m.triangle_count());
        m.glue_hole(closed.detached, &filler).unwrap();
        assert_eq!(m.vertex_count(), v + 1);
        assert_eq!(m.triangle_count(), t + 2);
        m.validate().unwrap();
    }

    #[test]
    fn glue_mismatch_rejected() {
        let mut m = Mesh::root_triangle();
        let mut h = m.frontier_edge().unwrap();
        for _ in 0..3 {
            h = m.peel_attach_new(h).unwrap().front_edge;
        }
        let closed = m.peel_attach_back(h, 2, Side::Right).unwrap();
        let err = m.glue_hole(closed.detached, &Filler::glued_two_gon()).unwrap_err();
        assert_eq!(err, Error::BoundaryMismatch { hole: 3, filler: 2 });
    }

    #[test]
    fn polygon_is_a_sphere() {
        for m in 0..5 {
            let (mesh, open, boundary) = Mesh::polygon(m);
            assert_eq!(mesh.euler_characteristic(), 2);
            assert_eq!(mesh.cycle(open).count(), m + 2);
            assert_eq!(boundary.len(), m + 2);
            mesh.validate().unwrap();
        }
    }
}
