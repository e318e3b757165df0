//! Binary-energy minimization: an s/t flow network assembled through the
//! `add_term1`/`add_term2` reparameterization of unary and (submodular)
//! pairwise terms, solved to global optimality with a deterministic
//! augmenting-path max-flow.
//!
//! Label convention: the sink side of the cut is label 1 (inlier), the
//! source side label 0 (outlier). Nodes reachable from the source in the
//! final residual graph take the source-side label, which pins the labeling
//! at zero-capacity ties.

use crate::error::{Error, Result};
use crate::geometry::Labeling;

/// Residuals at or below this are treated as saturated by the solver.
const FLOW_EPS: f64 = 1e-12;

/// Submodularity slack allowed in `add_term2`.
const SUBMODULAR_SLACK: f64 = 1e-12;

/// Exhaustive-oracle node limit.
const ORACLE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy)]
struct PairEdge {
    p: usize,
    q: usize,
    /// Capacity charged when `p` is labeled 0 and `q` labeled 1.
    cap_pq: f64,
    /// Capacity charged when `p` is labeled 1 and `q` labeled 0.
    cap_qp: f64,
}

/// An s/t network encoding a binary labeling energy.
#[derive(Debug, Clone)]
pub struct EnergyGraph {
    /// cap(source → p); charged when p takes label 1.
    source_cap: Vec<f64>,
    /// cap(p → sink); charged when p takes label 0.
    sink_cap: Vec<f64>,
    edges: Vec<PairEdge>,
    constant: f64,
}

/// Outcome of a cut: the globally optimal labeling and its energy
/// (min-cut value plus the accumulated constant).
#[derive(Debug, Clone)]
pub struct CutResult {
    pub labeling: Labeling,
    pub energy: f64,
}

impl EnergyGraph {
    pub fn new(node_count: usize) -> Self {
        EnergyGraph {
            source_cap: vec![0.0; node_count],
            sink_cap: vec![0.0; node_count],
            edges: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.source_cap.len()
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant
    }

    /// Adds a unary term: any labeling's energy grows by `c0` if the node
    /// takes label 0 and by `c1` if it takes label 1. `min(c0, c1)` goes to
    /// the constant, the difference to the matching terminal capacity, so
    /// capacities never go negative.
    pub fn add_term1(&mut self, p: usize, c0: f64, c1: f64) {
        assert!(p < self.node_count(), "node {p} out of range");
        assert!(
            c0.is_finite() && c1.is_finite(),
            "unary costs must be finite"
        );
        if c0 <= c1 {
            self.constant += c0;
            self.source_cap[p] += c1 - c0;
        } else {
            self.constant += c1;
            self.sink_cap[p] += c0 - c1;
        }
    }

    /// Adds a pairwise term `c_{L_p L_q}` via the standard decomposition
    /// into two unary pieces plus one edge of capacity
    /// `c01 + c10 − c00 − c11`, which submodularity keeps non-negative.
    pub fn add_term2(
        &mut self,
        p: usize,
        q: usize,
        c00: f64,
        c01: f64,
        c10: f64,
        c11: f64,
    ) -> Result<()> {
        if p == q || p >= self.node_count() || q >= self.node_count() {
            return Err(Error::ContractViolation(format!(
                "pairwise term needs two distinct in-range nodes, got ({p}, {q})"
            )));
        }
        if ![c00, c01, c10, c11].iter().all(|c| c.is_finite()) {
            return Err(Error::ContractViolation(
                "pairwise costs must be finite".into(),
            ));
        }
        if c00 + c11 > c01 + c10 + SUBMODULAR_SLACK {
            return Err(Error::ContractViolation(format!(
                "non-submodular pairwise term: {c00} + {c11} > {c01} + {c10}"
            )));
        }
        self.add_term1(p, c00, c11);
        let b = c01 - c00;
        let c = c10 - c11;
        if b < 0.0 {
            self.add_term1(p, b, 0.0);
            self.add_term1(q, -b, 0.0);
            self.edges.push(PairEdge {
                p,
                q,
                cap_pq: 0.0,
                cap_qp: (b + c).max(0.0),
            });
        } else if c < 0.0 {
            self.add_term1(p, -c, 0.0);
            self.add_term1(q, c, 0.0);
            self.edges.push(PairEdge {
                p,
                q,
                cap_pq: (b + c).max(0.0),
                cap_qp: 0.0,
            });
        } else {
            self.edges.push(PairEdge {
                p,
                q,
                cap_pq: b,
                cap_qp: c,
            });
        }
        Ok(())
    }

    /// Energy of an explicit labeling under the encoded terms; the
    /// exhaustive oracle and the consistency checks both go through here.
    pub fn labeling_energy(&self, labels: &[bool]) -> f64 {
        assert_eq!(labels.len(), self.node_count());
        let mut energy = self.constant;
        for (i, &label) in labels.iter().enumerate() {
            energy += if label {
                self.source_cap[i]
            } else {
                self.sink_cap[i]
            };
        }
        for e in &self.edges {
            match (labels[e.p], labels[e.q]) {
                (false, true) => energy += e.cap_pq,
                (true, false) => energy += e.cap_qp,
                _ => {}
            }
        }
        energy
    }

    /// Globally optimal labeling of the encoded energy.
    ///
    /// Deterministic given the sequence of `add_term` calls: arcs are laid
    /// out in insertion order and the search orders are fixed.
    pub fn min_cut(&self) -> CutResult {
        let n = self.node_count();
        if n == 0 {
            return CutResult {
                labeling: Labeling::new(Vec::new()),
                energy: self.constant,
            };
        }
        let source = n;
        let sink = n + 1;
        let mut net = FlowNetwork::new(n + 2);
        for p in 0..n {
            if self.source_cap[p] > 0.0 {
                net.add_arc(source, p, self.source_cap[p], 0.0);
            }
            if self.sink_cap[p] > 0.0 {
                net.add_arc(p, sink, self.sink_cap[p], 0.0);
            }
        }
        for e in &self.edges {
            if e.cap_pq > 0.0 || e.cap_qp > 0.0 {
                net.add_arc(e.p, e.q, e.cap_pq, e.cap_qp);
            }
        }
        let flow = net.max_flow(source, sink);
        let reachable = net.residual_reachable(source);
        let labels: Vec<bool> = (0..n).map(|p| !reachable[p]).collect();
        CutResult {
            labeling: Labeling::new(labels),
            energy: flow + self.constant,
        }
    }

    /// Exhaustive minimum over all `2^n` labelings; ties resolve to the
    /// lexicographically smallest label vector. Refuses more than 20
    /// nodes.
    pub fn brute_force_min_energy(&self) -> Result<CutResult> {
        let n = self.node_count();
        if n > ORACLE_LIMIT {
            return Err(Error::OracleScaleExceeded {
                nodes: n,
                limit: ORACLE_LIMIT,
            });
        }
        let mut best_labels = vec![false; n];
        let mut best_energy = self.labeling_energy(&best_labels);
        let mut labels = vec![false; n];
        for mask in 1u64..(1u64 << n) {
            for (i, l) in labels.iter_mut().enumerate() {
                *l = mask & (1 << i) != 0;
            }
            let e = self.labeling_energy(&labels);
            if e < best_energy || (e == best_energy && labels < best_labels) {
                best_energy = e;
                best_labels.clone_from(&labels);
            }
        }
        Ok(CutResult {
            labeling: Labeling::new(best_labels),
            energy: best_energy,
        })
    }
}

/// Dinic's algorithm over paired arcs; float capacities with an absolute
/// saturation threshold.
struct FlowNetwork {
    to: Vec<u32>,
    residual: Vec<f64>,
    adjacency: Vec<Vec<u32>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            to: Vec::new(),
            residual: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
            level: vec![-1; nodes],
            cursor: vec![0; nodes],
        }
    }

    fn add_arc(&mut self, u: usize, v: usize, cap_uv: f64, cap_vu: f64) {
        let id = self.to.len() as u32;
        self.to.push(v as u32);
        self.residual.push(cap_uv);
        self.to.push(u as u32);
        self.residual.push(cap_vu);
        self.adjacency[u].push(id);
        self.adjacency[v].push(id + 1);
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.fill(-1);
        self.level[source] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &arc in &self.adjacency[u] {
                let v = self.to[arc as usize] as usize;
                if self.level[v] < 0 && self.residual[arc as usize] > FLOW_EPS {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, limit: f64) -> f64 {
        if u == sink {
            return limit;
        }
        while self.cursor[u] < self.adjacency[u].len() {
            let arc = self.adjacency[u][self.cursor[u]] as usize;
            let v = self.to[arc] as usize;
            if self.level[v] == self.level[u] + 1 && self.residual[arc] > FLOW_EPS {
                let pushed = self.dfs(v, sink, limit.min(self.residual[arc]));
                if pushed > 0.0 {
                    self.residual[arc] -= pushed;
                    self.residual[arc ^ 1] += pushed;
                    return pushed;
                }
            }
            self.cursor[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(source, sink) {
            self.cursor.fill(0);
            loop {
                let pushed = self.dfs(source, sink, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &arc in &self.adjacency[u] {
                let v = self.to[arc as usize] as usize;
                if !seen[v] && self.residual[arc as usize] > FLOW_EPS {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_submodular_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> EnergyGraph {
        let n = rng.random_range(0..=max_nodes);
        let mut g = EnergyGraph::new(n);
        if n == 0 {
            return g;
        }
        for p in 0..n {
            // Mixed-sign unary costs exercise the constant extraction.
            g.add_term1(p, rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
        }
        if n >= 2 {
            for _ in 0..rng.random_range(0..=20) {
                let p = rng.random_range(0..n);
                let mut q = rng.random_range(0..n);
                if p == q {
                    q = (q + 1) % n;
                }
                let c01: f64 = rng.random_range(-0.5..1.5);
                let c10: f64 = rng.random_range(-0.5..1.5);
                // Split the submodularity budget c01 + c10 − c00 − c11 ≥ 0.
                let budget = c01 + c10;
                let c00 = rng.random_range(-1.0..=budget.max(-1.0));
                let c11 = rng.random_range((budget - 1.0).min(budget - c00)..=(budget - c00));
                g.add_term2(p, q, c00, c01, c10, c11).unwrap();
            }
        }
        g
    }

    #[test]
    fn zero_unary_term_changes_nothing() {
        let mut g = EnergyGraph::new(1);
        g.add_term1(0, 0.0, 0.0);
        assert_eq!(g.labeling_energy(&[false]), 0.0);
        assert_eq!(g.labeling_energy(&[true]), 0.0);
    }

    #[test]
    fn forced_label_on_single_node() {
        let mut g = EnergyGraph::new(1);
        g.add_term1(0, 1.0, 0.0);
        let cut = g.min_cut();
        assert!(cut.labeling.is_inlier(0));
        assert_eq!(cut.energy, 0.0);
    }

    #[test]
    fn cheaper_terminal_wins() {
        let mut g = EnergyGraph::new(1);
        g.add_term1(0, 0.2, 0.9);
        let cut = g.min_cut();
        assert!(!cut.labeling.is_inlier(0));
        assert!((cut.energy - 0.2).abs() < 1e-12);
    }

    #[test]
    fn add_term1_is_additive() {
        let mut twice = EnergyGraph::new(1);
        twice.add_term1(0, 0.3, 0.7);
        twice.add_term1(0, 0.3, 0.7);
        let mut once = EnergyGraph::new(1);
        once.add_term1(0, 0.6, 1.4);
        for labels in [[false], [true]] {
            assert!((twice.labeling_energy(&labels) - once.labeling_energy(&labels)).abs() < 1e-12);
        }
        let a = twice.brute_force_min_energy().unwrap();
        let b = once.brute_force_min_energy().unwrap();
        assert!((a.energy - b.energy).abs() < 1e-12);
    }

    #[test]
    fn zero_pairwise_term_is_noop() {
        let mut g = EnergyGraph::new(2);
        g.add_term2(0, 1, 0.0, 0.0, 0.0, 0.0).unwrap();
        for labels in [[false, false], [false, true], [true, false], [true, true]] {
            assert_eq!(g.labeling_energy(&labels), 0.0);
        }
    }

    #[test]
    fn agreement_term_prefers_equal_labels() {
        let mut g = EnergyGraph::new(2);
        g.add_term2(0, 1, 0.0, 1.0, 1.0, 0.0).unwrap();
        let cut = g.min_cut();
        assert!(cut.energy.abs() < 1e-12);
        assert_eq!(cut.labeling.is_inlier(0), cut.labeling.is_inlier(1));
        assert_eq!(g.labeling_energy(&[false, true]), 1.0);
    }

    #[test]
    fn pairwise_energy_matches_brute_force() {
        // Kernel-style costs (kp = 0.8, kq = 0.6, λ = 1).
        let mut g = EnergyGraph::new(2);
        g.add_term2(0, 1, 0.7, 1.0, 1.0, 0.3).unwrap();
        let cut = g.min_cut();
        let oracle = g.brute_force_min_energy().unwrap();
        assert!((cut.energy - oracle.energy).abs() < 1e-12);
        assert!((cut.energy - 0.3).abs() < 1e-12);
        assert_eq!(cut.labeling.labels(), &[true, true]);
    }

    #[test]
    fn submodularity_violation_is_rejected() {
        let mut g = EnergyGraph::new(2);
        let err = g.add_term2(0, 1, 1.0, 0.2, 0.2, 1.0);
        assert!(matches!(err, Err(Error::ContractViolation(_))));
        let err = g.add_term2(0, 0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(err, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn empty_graph_energy_is_the_constant() {
        let mut g = EnergyGraph::new(0);
        g.constant = 1.25;
        let cut = g.min_cut();
        assert_eq!(cut.energy, 1.25);
        assert_eq!(cut.labeling.len(), 0);
        let oracle = g.brute_force_min_energy().unwrap();
        assert_eq!(oracle.energy, 1.25);
    }

    #[test]
    fn independent_nodes_sum_their_minima() {
        let mut g = EnergyGraph::new(2);
        g.add_term1(0, 0.4, 0.9);
        g.add_term1(1, 0.8, 0.1);
        let oracle = g.brute_force_min_energy().unwrap();
        assert!((oracle.energy - 0.5).abs() < 1e-12);
        assert_eq!(oracle.labeling.labels(), &[false, true]);
        let cut = g.min_cut();
        assert!((cut.energy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_refuses_large_graphs() {
        let g = EnergyGraph::new(21);
        assert!(matches!(
            g.brute_force_min_energy(),
            Err(Error::OracleScaleExceeded { .. })
        ));
    }

    #[test]
    fn min_cut_matches_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..400 {
            let g = random_submodular_graph(&mut rng, 12);
            let cut = g.min_cut();
            let oracle = g.brute_force_min_energy().unwrap();
            assert!(
                (cut.energy - oracle.energy).abs() < 1e-9,
                "cut {} vs oracle {}",
                cut.energy,
                oracle.energy
            );
            // The reported energy re-evaluates on the returned labeling.
            let replay = g.labeling_energy(cut.labeling.labels());
            assert!((cut.energy - replay).abs() < 1e-9);
        }
    }

    #[test]
    fn term_order_does_not_change_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.random_range(2..8);
            let mut unary: Vec<(usize, f64, f64)> = (0..n)
                .map(|p| (p, rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)))
                .collect();
            let mut pairwise: Vec<(usize, usize, f64, f64, f64, f64)> = Vec::new();
            for _ in 0..rng.random_range(1..10) {
                let p = rng.random_range(0..n);
                let q = (p + 1 + rng.random_range(0..n - 1)) % n;
                let c01: f64 = rng.random_range(0.0..1.0);
                let c10: f64 = rng.random_range(0.0..1.0);
                let c00 = rng.random_range(0.0..=(c01 + c10));
                let c11 = rng.random_range(0.0..=(c01 + c10 - c00));
                pairwise.push((p, q, c00, c01, c10, c11));
            }
            let mut forward = EnergyGraph::new(n);
            for &(p, c0, c1) in &unary {
                forward.add_term1(p, c0, c1);
            }
            for &(p, q, c00, c01, c10, c11) in &pairwise {
                forward.add_term2(p, q, c00, c01, c10, c11).unwrap();
            }

            unary.reverse();
            let mut backward = EnergyGraph::new(n);
            for &(p, q, c00, c01, c10, c11) in pairwise.iter().rev() {
                backward.add_term2(p, q, c00, c01, c10, c11).unwrap();
            }
            for &(p, c0, c1) in &unary {
                backward.add_term1(p, c0, c1);
            }

            let a = forward.min_cut();
            let b = backward.min_cut();
            assert!((a.energy - b.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn min_cut_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_submodular_graph(&mut rng, 12);
        let a = g.min_cut();
        let b = g.min_cut();
        assert_eq!(a.labeling.labels(), b.labeling.labels());
        assert_eq!(a.energy, b.energy);
    }
}
