//! Exact fixed-radius neighbor search over 2D points or 4D joint
//! correspondence coordinates, via uniform grid hashing with cell size `r`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::DataPoint;

/// Undirected neighborhood graph: an edge joins every pair of points within
/// Euclidean distance `r` (boundary inclusive).
#[derive(Debug, Clone)]
pub struct NeighborhoodGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl NeighborhoodGraph {
    fn from_edges(node_count: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; node_count];
        for &(p, q) in &edges {
            degree[p] += 1;
            degree[q] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut adjacency = vec![0usize; edges.len() * 2];
        for &(p, q) in &edges {
            adjacency[cursor[p]] = q;
            cursor[p] += 1;
            adjacency[cursor[q]] = p;
            cursor[q] += 1;
        }
        for i in 0..node_count {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        NeighborhoodGraph {
            node_count,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All edges as `(p, q)` pairs with `p < q`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `p`.
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.adjacency[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn contains_edge(&self, p: usize, q: usize) -> bool {
        if p >= self.node_count || q >= self.node_count {
            return false;
        }
        self.neighbors(p).binary_search(&q).is_ok()
    }
}

fn cell_key(coords: &[f64], radius: f64) -> [i64; 4] {
    let mut key = [0i64; 4];
    for (k, c) in key.iter_mut().zip(coords) {
        *k = (c / radius).floor() as i64;
    }
    key
}

/// Builds the neighborhood graph over `points` with radius `radius`.
///
/// Semantics are exact: an edge `(p, q)` is present iff
/// `‖coords_p − coords_q‖₂ ≤ radius`, identical to the quadratic pairwise
/// scan. The grid only prunes candidates.
pub fn build_neighborhood(points: &[DataPoint], radius: f64) -> Result<NeighborhoodGraph> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let n = points.len();
    if n < 2 {
        return Ok(NeighborhoodGraph::from_edges(n, Vec::new()));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidInput(
            "all points must share one dimension".into(),
        ));
    }

    let mut grid: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (i, point) in points.iter().enumerate() {
        grid.entry(cell_key(point.coords(), radius))
            .or_default()
            .push(i);
    }

    // 3^dim candidate cells around each point.
    let mut offsets: Vec<[i64; 4]> = vec![[0; 4]];
    for axis in 0..dim {
        let mut extended = Vec::with_capacity(offsets.len() * 3);
        for off in &offsets {
            for delta in -1..=1 {
                let mut o = *off;
                o[axis] = delta;
                extended.push(o);
            }
        }
        offsets = extended;
    }

    let r2 = radius * radius;
    let mut edges = Vec::new();
    let mut candidates = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let base = cell_key(point.coords(), radius);
        candidates.clear();
        for off in &offsets {
            let mut key = base;
            for (k, o) in key.iter_mut().zip(off) {
                *k += o;
            }
            if let Some(bucket) = grid.get(&key) {
                for &j in bucket {
                    if j < i {
                        candidates.push(j);
                    }
                }
            }
        }
        candidates.sort_unstable();
        let ci = point.coords();
        for &j in &candidates {
            let cj = points[j].coords();
            let d2: f64 = ci.iter().zip(cj).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                edges.push((j, i));
            }
        }
    }
    edges.sort_unstable();
    Ok(NeighborhoodGraph::from_edges(n, edges))
}
