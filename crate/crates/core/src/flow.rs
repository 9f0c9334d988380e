//! Min-cost flow on uncapacitated arcs, by successive shortest paths with
//! node potentials. Costs must be nonnegative, which holds for metric
//! transport instances; the LP formulation of the same problem is exposed
//! through [`FlowProblem::as_lp`] as an independent cross-check path.

use thiserror::Error;

use crate::lp::{LpProblem, Relation, Sense};

/// Supplies must balance to zero within this tolerance.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
}

/// Balanced transshipment problem: positive supplies ship to negative ones
/// over the given arcs, all with unlimited capacity.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub supplies: Vec<f64>,
    pub arcs: Vec<FlowArc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub cost: f64,
    /// Flow on each arc, in input order.
    pub flows: Vec<f64>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error("supplies must balance to zero, got {imbalance}")]
    Unbalanced { imbalance: f64 },
    #[error("arc {index} is invalid: {reason}")]
    InvalidArc { index: usize, reason: String },
    #[error("no route from remaining supply to remaining demand")]
    Infeasible,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl FlowProblem {
    pub fn new(supplies: Vec<f64>, arcs: Vec<FlowArc>) -> Self {
        Self { supplies, arcs }
    }

    fn validate(&self) -> Result<(), FlowError> {
        let n = self.supplies.len();
        let imbalance: f64 = self.supplies.iter().sum();
        if !imbalance.is_finite() || imbalance.abs() > BALANCE_TOL {
            return Err(FlowError::Unbalanced { imbalance });
        }
        for (index, a) in self.arcs.iter().enumerate() {
            if a.from >= n || a.to >= n || a.from == a.to {
                return Err(FlowError::InvalidArc { index, reason: "endpoint out of range or self-loop".into() });
            }
            if !a.cost.is_finite() || a.cost < 0.0 {
                return Err(FlowError::InvalidArc { index, reason: format!("cost {} must be finite and >= 0", a.cost) });
            }
        }
        Ok(())
    }

    /// The equivalent LP: minimize arc costs subject to net outflow at
    /// every node equaling its supply.
    pub fn as_lp(&self) -> LpProblem {
        let n = self.supplies.len();
        let m = self.arcs.len();
        let mut p = LpProblem::new(Sense::Minimize, self.arcs.iter().map(|a| a.cost).collect());
        for j in 0..m {
            p.nonneg(j);
        }
        for node in 0..n {
            let mut coeffs = vec![0.0; m];
            for (j, a) in self.arcs.iter().enumerate() {
                if a.from == node {
                    coeffs[j] += 1.0;
                }
                if a.to == node {
                    coeffs[j] -= 1.0;
                }
            }
            p.constraint(coeffs, Relation::Eq, self.supplies[node]);
        }
        p
    }
}

/// Solves the flow problem. Flow conservation in the returned solution
/// holds at every node within `BALANCE_TOL`, and the cost agrees with the
/// LP route on the same instance within 1e-7.
pub fn solve_flow(problem: &FlowProblem) -> Result<FlowSolution, FlowError> {
    problem.validate()?;
    let n = problem.supplies.len();
    let m = problem.arcs.len();

    let scale = problem.supplies.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
    let mass_eps = 1e-12 * (1.0 + scale);

    // Residual arcs: 2k for the forward direction of input arc k, 2k+1 for
    // its reverse. Forward capacity is unlimited; reverse capacity is the
    // flow already routed.
    let mut flow = vec![0.0f64; m];
    let mut excess = problem.supplies.clone();
    let mut potential = vec![0.0f64; n];

    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, a) in problem.arcs.iter().enumerate() {
        out_arcs[a.from].push(2 * k);
        out_arcs[a.to].push(2 * k + 1);
    }
    let arc_head = |r: usize| -> usize {
        let a = &problem.arcs[r / 2];
        if r % 2 == 0 { a.to } else { a.from }
    };
    let arc_cost = |r: usize| -> f64 {
        let a = &problem.arcs[r / 2];
        if r % 2 == 0 { a.cost } else { -a.cost }
    };

    let max_rounds = 10 * (n + m) + 100;
    for _round in 0..max_rounds {
        let sources: Vec<usize> = (0..n).filter(|&i| excess[i] > mass_eps).collect();
        if sources.is_empty() {
            let cost = flow.iter().zip(&problem.arcs).map(|(f, a)| f * a.cost).sum();
            return Ok(FlowSolution { cost, flows: flow });
        }

        // Dense multi-source Dijkstra on reduced costs.
        let mut dist = vec![f64::INFINITY; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        for &s in &sources {
            dist[s] = 0.0;
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &r in &out_arcs[u] {
                let residual = if r % 2 == 0 { f64::INFINITY } else { flow[r / 2] };
                if residual <= mass_eps {
                    continue;
                }
                let v = arc_head(r);
                let reduced = arc_cost(r) + potential[u] - potential[v];
                let cand = dist[u] + reduced.max(0.0);
                if cand < dist[v] {
                    dist[v] = cand;
                    parent[v] = Some(r);
                }
            }
        }

        // Nearest reachable deficit node, ties to the lowest index.
        let mut sink = None;
        for v in 0..n {
            if excess[v] < -mass_eps && dist[v].is_finite() {
                if sink.map_or(true, |(_, d)| dist[v] < d) {
                    sink = Some((v, dist[v]));
                }
            }
        }
        let Some((t, dist_t)) = sink else {
            return Err(FlowError::Infeasible);
        };

        // Walk back to the source of the path and find the bottleneck.
        let mut delta = -excess[t];
        let mut v = t;
        while let Some(r) = parent[v] {
            if r % 2 == 1 {
                delta = delta.min(flow[r / 2]);
            }
            v = if r % 2 == 0 { problem.arcs[r / 2].from } else { problem.arcs[r / 2].to };
        }
        let source = v;
        delta = delta.min(excess[source]);
        if delta <= mass_eps {
            return Err(FlowError::NumericalFailure("vanishing augmentation".into()));
        }

        let mut v = t;
        while let Some(r) = parent[v] {
            if r % 2 == 0 {
                flow[r / 2] += delta;
            } else {
                flow[r / 2] -= delta;
                if flow[r / 2] < 0.0 {
                    flow[r / 2] = 0.0;
                }
            }
            v = if r % 2 == 0 { problem.arcs[r / 2].from } else { problem.arcs[r / 2].to };
        }
        excess[source] -= delta;
        excess[t] += delta;

        for v in 0..n {
            potential[v] += dist[v].min(dist_t);
        }
    }
    Err(FlowError::NumericalFailure(format!("no convergence after {max_rounds} augmentation rounds")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use crate::metric::{FiniteMetricSpace, RandomMode};
    use crate::rng::SplitMix64;

    #[test]
    fn single_route() {
        let p = FlowProblem::new(vec![1.0, -1.0], vec![FlowArc { from: 0, to: 1, cost: 5.0 }]);
        let s = solve_flow(&p).unwrap();
        assert!((s.cost - 5.0).abs() < 1e-12);
        assert!((s.flows[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nothing_to_move() {
        let p = FlowProblem::new(vec![0.0, 0.0], vec![FlowArc { from: 0, to: 1, cost: 1.0 }]);
        let s = solve_flow(&p).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.flows, vec![0.0]);
    }

    #[test]
    fn line_space_two_sources() {
        // Supplies [1, 1, -2] on the line 0-1-2; the only assignment
        // patterns route both units into node 2: cost 2 + 1 = 3.
        let space = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let mut arcs = Vec::new();
        for (i, j) in space.ordered_pairs() {
            arcs.push(FlowArc { from: i, to: j, cost: space.dist(i, j) });
        }
        let p = FlowProblem::new(vec![1.0, 1.0, -2.0], arcs);
        let s = solve_flow(&p).unwrap();
        assert!((s.cost - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unbalanced_rejected() {
        let p = FlowProblem::new(vec![1.0, 0.0], vec![FlowArc { from: 0, to: 1, cost: 1.0 }]);
        assert!(matches!(solve_flow(&p), Err(FlowError::Unbalanced { .. })));
    }

    #[test]
    fn infeasible_when_demand_unreachable() {
        let p = FlowProblem::new(
            vec![1.0, -1.0, 0.0],
            vec![FlowArc { from: 0, to: 2, cost: 1.0 }],
        );
        assert_eq!(solve_flow(&p), Err(FlowError::Infeasible));
    }

    fn conservation_residual(p: &FlowProblem, flows: &[f64]) -> f64 {
        let mut net = p.supplies.clone();
        for (f, a) in flows.iter().zip(&p.arcs) {
            net[a.from] -= f;
            net[a.to] += f;
        }
        net.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn random_balanced_instance(seed: u64) -> FlowProblem {
        let mut rng = SplitMix64::new(seed);
        let n = 2 + rng.next_below(6) as usize;
        let mut supplies: Vec<f64> = (0..n - 1).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let total: f64 = supplies.iter().sum();
        supplies.push(-total);
        let metric_costs = rng.next_u64() & 1 == 0;
        let space = if metric_costs {
            Some(FiniteMetricSpace::random(rng.next_u64(), n, RandomMode::ShortestPathClosure).unwrap())
        } else {
            None
        };
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let cost = match &space {
                        Some(s) => s.dist(i, j),
                        None => rng.uniform(0.0, 3.0),
                    };
                    arcs.push(FlowArc { from: i, to: j, cost });
                }
            }
        }
        FlowProblem::new(supplies, arcs)
    }

    #[test]
    fn agrees_with_lp_on_random_balanced_instances() {
        for seed in 0..100u64 {
            let p = random_balanced_instance(seed);
            let fs = solve_flow(&p).unwrap();
            assert!(conservation_residual(&p, &fs.flows) <= BALANCE_TOL, "seed {seed}");
            let ls = solve_lp(&p.as_lp()).unwrap();
            assert!(
                (fs.cost - ls.objective).abs() <= 1e-7,
                "seed {seed}: flow {} vs lp {}",
                fs.cost,
                ls.objective
            );
        }
    }
}
