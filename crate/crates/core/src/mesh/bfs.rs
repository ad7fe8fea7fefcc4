use std::collections::VecDeque;

use super::{EdgeKind, Mesh, VertexId, NIL};

/// Compressed adjacency lists of the vertex graph (multi-edges repeated).
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Adjacency {
    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Graph distances from the nearest source; `NIL` where unreachable.
    pub fn distances(&self, sources: &[VertexId]) -> Vec<u32> {
        let mut dist = vec![NIL; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == NIL {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for &w in self.neighbours(v) {
                if dist[w as usize] == NIL {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

impl Mesh {
    pub fn adjacency(&self) -> Adjacency {
        let nv = self.vertex_count();
        let mut degree = vec![0usize; nv + 1];
        for h in 0..self.half_edge_count() {
            if self.kind[h] != EdgeKind::Dead {
                degree[self.origin[h] as usize + 1] += 1;
            }
        }
        for i in 0..nv {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[nv]];
        for h in 0..self.half_edge_count() as u32 {
            if self.kind(h) != EdgeKind::Dead {
                let u = self.origin(h) as usize;
                targets[fill[u]] = self.dest(h);
                fill[u] += 1;
            }
        }
        Adjacency { offsets, targets }
    }

    pub fn bfs_distances(&self, source: VertexId) -> Vec<u32> {
        self.adjacency().distances(&[source])
    }

    pub fn multi_source_distances(&self, sources: &[VertexId]) -> Vec<u32> {
        self.adjacency().distances(sources)
    }
}
