use std::collections::HashSet;

use super::{EdgeKind, HalfEdgeId, Mesh, FRONTIER_FACE, NIL};

/// First structural check that failed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{check}: {detail}")]
pub struct Violation {
    pub check: &'static str,
    pub detail: String,
}

fn fail(check: &'static str, detail: impl Into<String>) -> Result<(), Violation> {
    Err(Violation { check, detail: detail.into() })
}

impl Mesh {
    /// Full structural check: twin/next/prev consistency, triangle faces,
    /// no loops, counters, Euler relation and frontier bookkeeping.
    pub fn validate(&self) -> Result<(), Violation> {
        let n = self.half_edge_count();
        let nv = self.vertex_count() as u32;
        let live = |h: HalfEdgeId| (h as usize) < n && self.kind[h as usize] != EdgeKind::Dead;
        let mut live_count = 0usize;
        for h in 0..n as u32 {
            if !live(h) {
                continue;
            }
            live_count += 1;
            let (t, nx, pv) = (self.twin(h), self.next(h), self.prev(h));
            if !live(t) || t == h || self.twin(t) != h {
                return fail("twin", format!("half-edge {h} has twin {t}"));
            }
            if !live(nx) || !live(pv) || self.prev(nx) != h || self.next(pv) != h {
                return fail("next/prev", format!("half-edge {h}"));
            }
            if self.origin(h) >= nv {
                return fail("origin", format!("half-edge {h} starts at unknown vertex"));
            }
            if self.origin(nx) != self.origin(t) {
                return fail("next/prev", format!("half-edge {h} does not end where its successor starts"));
            }
            if self.origin(h) == self.origin(t) {
                return fail("loop", format!("half-edge {h} is a loop at vertex {}", self.origin(h)));
            }
            if self.kind(nx) != self.kind(h) {
                return fail("face kind", format!("face through {h} mixes kinds"));
            }
            if self.kind(h) == EdgeKind::Open && self.face[nx as usize] != self.face[h as usize] {
                return fail("face id", format!("open face through {h} mixes ids"));
            }
            if self.kind(h) == EdgeKind::Inner && self.next(self.next(nx)) != h {
                return fail("triangle", format!("inner face through {h} is not a triangle"));
            }
        }
        if live_count != 2 * self.edges {
            return fail("counters", format!("{live_count} live half-edges for {} edges", self.edges));
        }
        let mut seen = vec![false; n];
        let (mut tri, mut open, mut outside) = (0usize, 0usize, 0usize);
        let mut frontier_faces = 0usize;
        let mut used = vec![false; self.vertex_count()];
        for h in 0..n as u32 {
            if !live(h) || seen[h as usize] {
                continue;
            }
            let mut len = 0;
            for e in self.cycle(h) {
                seen[e as usize] = true;
                used[self.origin(e) as usize] = true;
                len += 1;
            }
            match self.kind(h) {
                EdgeKind::Inner => tri += 1,
                EdgeKind::Open => {
                    open += 1;
                    if self.face[h as usize] == FRONTIER_FACE {
                        frontier_faces += 1;
                        if len != self.frontier_len {
                            return fail("frontier", format!("length {len}, counter {}", self.frontier_len));
                        }
                    }
                }
                EdgeKind::Outside => outside += 1,
                EdgeKind::Dead => unreachable!(),
            }
        }
        if (tri, open, outside) != (self.triangles, self.open_faces, self.outside_faces) {
            return fail(
                "counters",
                format!(
                    "faces counted ({tri}, {open}, {outside}), stored ({}, {}, {})",
                    self.triangles, self.open_faces, self.outside_faces
                ),
            );
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return fail("vertices", format!("vertex {v} has no incident edge"));
        }
        match self.frontier {
            Some(f) if !self.is_frontier(f) => return fail("frontier", format!("stored edge {f} is not on it")),
            Some(_) if frontier_faces != 1 => return fail("frontier", format!("{frontier_faces} frontier faces")),
            None if frontier_faces != 0 => return fail("frontier", "frontier face without a stored edge"),
            _ => {}
        }
        if let Some(f) = self.frontier {
            let verts: Vec<u32> = self.frontier_vertices();
            let distinct: HashSet<u32> = verts.iter().copied().collect();
            if distinct.len() != verts.len() {
                return fail("frontier", "frontier is not a simple cycle");
            }
            debug_assert_ne!(f, NIL);
        }
        if self.euler_characteristic() != 2 {
            return fail("euler", format!("V - E + F = {}", self.euler_characteristic()));
        }
        Ok(())
    }
}
