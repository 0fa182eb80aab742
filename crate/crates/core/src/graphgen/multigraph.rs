use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::degrees::DegreeSequence;
use crate::{Error, Result, SimRng, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub multiplicity: u32,
}

/// A distinct neighbour of a vertex and the number of parallel edges to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbour {
    pub vertex: VertexId,
    pub multiplicity: u32,
}

/// Undirected multigraph, frozen after construction.
///
/// Edges are stored once with `u <= v`. The incidence index lists every
/// distinct non-self neighbour of each vertex in ascending id order;
/// self-loops are counted separately since they never carry a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    neighbours: Vec<Neighbour>,
    self_loops: Vec<u32>,
    degrees: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(VertexId, VertexId, u32)>,
}

impl Multigraph {
    /// Builds the graph and its incidence index from an edge list.
    ///
    /// Repeated `(u, v)` pairs are merged by adding multiplicities.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut merged: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
        for e in edges {
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            if v >= n {
                return Err(Error::domain(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.u, e.v
                )));
            }
            if e.multiplicity == 0 {
                return Err(Error::domain(format!(
                    "edge ({}, {}) has multiplicity 0",
                    e.u, e.v
                )));
            }
            *merged.entry((u, v)).or_default() += e.multiplicity;
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), multiplicity)| Edge { u, v, multiplicity })
            .collect();

        let mut self_loops = vec![0u32; n];
        let mut degrees = vec![0usize; n];
        let mut counts = vec![0usize; n];
        for e in &edges {
            if e.u == e.v {
                self_loops[e.u] += e.multiplicity;
                degrees[e.u] += 2 * e.multiplicity as usize;
            } else {
                degrees[e.u] += e.multiplicity as usize;
                degrees[e.v] += e.multiplicity as usize;
                counts[e.u] += 1;
                counts[e.v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbours = vec![
            Neighbour {
                vertex: 0,
                multiplicity: 0
            };
            offsets[n]
        ];
        // Edges are sorted by (u, v), so each vertex's slots fill in
        // ascending neighbour order for both endpoints.
        for e in edges.iter().filter(|e| e.u != e.v) {
            neighbours[fill[e.u]] = Neighbour {
                vertex: e.v,
                multiplicity: e.multiplicity,
            };
            fill[e.u] += 1;
            neighbours[fill[e.v]] = Neighbour {
                vertex: e.u,
                multiplicity: e.multiplicity,
            };
            fill[e.v] += 1;
        }
        for v in 0..n {
            neighbours[offsets[v]..offsets[v + 1]].sort_unstable_by_key(|nb| nb.vertex);
        }

        Ok(Multigraph {
            n,
            edges,
            offsets,
            neighbours,
            self_loops,
            degrees,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Degree with each self-loop counted twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::new(self.degrees.clone())
    }

    pub fn neighbours(&self, v: VertexId) -> &[Neighbour] {
        &self.neighbours[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn self_loops(&self, v: VertexId) -> u32 {
        self.self_loops[v]
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parsed: GraphFile =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if let Some(&(u, v, _)) = parsed.edges.iter().find(|(u, v, _)| u > v) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("edge [{u}, {v}, ..] violates u <= v"),
            });
        }
        Multigraph::from_edges(
            parsed.n,
            parsed.edges.into_iter().map(|(u, v, multiplicity)| Edge {
                u,
                v,
                multiplicity,
            }),
        )
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let body = GraphFile {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| (e.u, e.v, e.multiplicity))
                .collect(),
        };
        serde_json::to_writer(&mut w, &body).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n")
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Uniform stub matching: every vertex gets `k_i` stubs, the stub list is
/// shuffled and consecutive stubs are joined. Self-loops and multi-edges
/// are kept.
pub fn build_configuration_model(seq: &DegreeSequence, rng: &mut SimRng) -> Result<Multigraph> {
    let total = seq.sum();
    if total % 2 == 1 {
        return Err(Error::OddDegreeSum(total));
    }
    let mut stubs: Vec<VertexId> = Vec::with_capacity(total as usize);
    for (v, &k) in seq.as_slice().iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v, k));
    }
    stubs.shuffle(rng);
    Multigraph::from_edges(
        seq.len(),
        stubs.chunks_exact(2).map(|pair| Edge {
            u: pair[0],
            v: pair[1],
            multiplicity: 1,
        }),
    )
}
