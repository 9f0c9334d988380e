//! Finite metric spaces with validated distance matrices.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::rng::SplitMix64;

/// Absolute tolerance for the diagonal and symmetry axioms.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack allowed on the triangle inequality, absorbing floating-point
/// construction error from Euclidean builders.
pub const TRIANGLE_SLACK: f64 = 1e-9;

/// A single violated metric axiom, with the indices that witness it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxiomViolation {
    Diagonal { i: usize, value: f64 },
    Symmetry { i: usize, j: usize, d_ij: f64, d_ji: f64 },
    Positivity { i: usize, j: usize, value: f64 },
    /// d(from, to) exceeds d(from, via) + d(via, to).
    Triangle { from: usize, via: usize, to: usize, direct: f64, detour: f64 },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Diagonal { i, value } => {
                write!(f, "diagonal: d({i},{i}) = {value} != 0")
            }
            AxiomViolation::Symmetry { i, j, d_ij, d_ji } => {
                write!(f, "symmetry: d({i},{j}) = {d_ij} != d({j},{i}) = {d_ji}")
            }
            AxiomViolation::Positivity { i, j, value } => {
                write!(f, "positivity: d({i},{j}) = {value} <= 0")
            }
            AxiomViolation::Triangle { from, via, to, direct, detour } => {
                write!(f, "triangle: d({from},{to}) = {direct} > d({from},{via}) + d({via},{to}) = {detour}")
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricError {
    #[error("distance matrix must be square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("a metric space needs at least one point")]
    Empty,
    #[error("distance entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("{}", format_violations(.0))]
    AxiomViolations(Vec<AxiomViolation>),
    #[error("points {i} and {j} coincide")]
    DuplicatePoint { i: usize, j: usize },
    #[error("point {i} has dimension {got}, expected {expected}")]
    DimensionMismatch { i: usize, got: usize, expected: usize },
    #[error("label count {got} does not match point count {expected}")]
    LabelMismatch { got: usize, expected: usize },
}

fn format_violations(violations: &[AxiomViolation]) -> String {
    let shown: Vec<String> = violations.iter().take(8).map(|v| v.to_string()).collect();
    let mut msg = format!("metric axioms violated ({} total): {}", violations.len(), shown.join("; "));
    if violations.len() > 8 {
        msg.push_str("; ...");
    }
    msg
}

/// How [`FiniteMetricSpace::random`] builds its instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomMode {
    /// Points drawn uniformly in the unit square, Euclidean distances.
    EuclideanSquare,
    /// Symmetric positive matrix replaced by its all-pairs shortest-path closure.
    ShortestPathClosure,
}

impl FromStr for RandomMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" | "euclidean-square" => Ok(RandomMode::EuclideanSquare),
            "closure" | "shortest-path-closure" => Ok(RandomMode::ShortestPathClosure),
            other => Err(format!("unknown mode '{other}', expected 'euclidean' or 'closure'")),
        }
    }
}

#[derive(Debug)]
struct Inner {
    n: usize,
    /// Row-major n*n distances.
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// A finite metric space: `n` points and a validated distance matrix.
///
/// Values are immutable after construction and cheap to clone (shared
/// backing storage), so they can be freely sent across threads.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    inner: Arc<Inner>,
}

impl PartialEq for FiniteMetricSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.dist == other.inner.dist)
    }
}

impl FiniteMetricSpace {
    /// Validates `entries` against all four metric axioms and wraps it.
    ///
    /// On failure the error lists every violated axiom with indices.
    pub fn from_matrix(entries: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = entries.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in entries.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        for (i, r) in entries.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MetricError::NonFinite { i, j });
                }
            }
        }

        let mut violations = Vec::new();
        for i in 0..n {
            if entries[i][i].abs() > SYMMETRY_TOL {
                violations.push(AxiomViolation::Diagonal { i, value: entries[i][i] });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (entries[i][j] - entries[j][i]).abs() > SYMMETRY_TOL {
                    violations.push(AxiomViolation::Symmetry {
                        i,
                        j,
                        d_ij: entries[i][j],
                        d_ji: entries[j][i],
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && entries[i][j] <= 0.0 {
                    violations.push(AxiomViolation::Positivity { i, j, value: entries[i][j] });
                }
            }
        }
        for from in 0..n {
            for to in 0..n {
                if to == from {
                    continue;
                }
                for via in 0..n {
                    if via == from || via == to {
                        continue;
                    }
                    let direct = entries[from][to];
                    let detour = entries[from][via] + entries[via][to];
                    if direct > detour + TRIANGLE_SLACK {
                        violations.push(AxiomViolation::Triangle { from, via, to, direct, detour });
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(MetricError::AxiomViolations(violations));
        }

        let mut dist = Vec::with_capacity(n * n);
        for r in entries {
            dist.extend_from_slice(r);
        }
        Ok(Self { inner: Arc::new(Inner { n, dist, labels: None }) })
    }

    /// Builds the Euclidean metric on a list of coordinate tuples.
    ///
    /// Rejects duplicate points: the norm formulas require d(x, y) > 0 for
    /// distinct points, so merging would silently change semantics.
    pub fn from_points(coords: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = coords.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let dim = coords[0].len();
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(MetricError::DimensionMismatch { i, got: c.len(), expected: dim });
            }
            for &v in c {
                if !v.is_finite() {
                    return Err(MetricError::NonFinite { i, j: 0 });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if coords[i] == coords[j] {
                    return Err(MetricError::DuplicatePoint { i, j });
                }
            }
        }
        let mut entries = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&coords[i], &coords[j]);
                entries[i][j] = d;
                entries[j][i] = d;
            }
        }
        Self::from_matrix(&entries)
    }

    /// Deterministic random instance for a fixed `(seed, n, mode)`.
    pub fn random(seed: u64, n: usize, mode: RandomMode) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if n == 1 {
            return Self::from_matrix(&[vec![0.0]]);
        }
        let mut rng = SplitMix64::new(seed);
        match mode {
            RandomMode::EuclideanSquare => loop {
                let coords: Vec<Vec<f64>> =
                    (0..n).map(|_| vec![rng.next_f64(), rng.next_f64()]).collect();
                match Self::from_points(&coords) {
                    Ok(space) => return Ok(space),
                    // Coinciding draws are essentially impossible but would
                    // violate positivity; redraw deterministically.
                    Err(MetricError::DuplicatePoint { .. }) => continue,
                    Err(e) => return Err(e),
                }
            },
            RandomMode::ShortestPathClosure => {
                let mut entries = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = rng.uniform(0.1, 2.0);
                        entries[i][j] = d;
                        entries[j][i] = d;
                    }
                }
                let closed = shortest_path_closure(&entries);
                Self::from_matrix(&closed)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.inner.dist[i * self.inner.n + j]
    }

    /// The full distance matrix, row-major.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n)
            .map(|i| self.inner.dist[i * self.inner.n..(i + 1) * self.inner.n].to_vec())
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        self.inner.dist.iter().cloned().fold(0.0, f64::max)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.inner.labels.as_deref()
    }

    pub fn with_labels(&self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.inner.n {
            return Err(MetricError::LabelMismatch { got: labels.len(), expected: self.inner.n });
        }
        Ok(Self {
            inner: Arc::new(Inner {
                n: self.inner.n,
                dist: self.inner.dist.clone(),
                labels: Some(labels),
            }),
        })
    }

    /// Whether `other` denotes the same space, by shared storage or by
    /// identical distance matrices.
    pub fn same_space(&self, other: &Self) -> bool {
        self == other
    }

    /// Ordered pairs (i, j) with i != j.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.inner.n;
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// All-pairs shortest-path closure of a symmetric nonnegative matrix
/// (Floyd-Warshall). Relaxations below 1e-12 are ignored so that closing
/// an already-closed matrix changes no entry even though re-summed path
/// lengths can differ by a few ulps.
pub fn shortest_path_closure(entries: &[Vec<f64>]) -> Vec<Vec<f64>> {
    const CLOSURE_EPS: f64 = 1e-12;
    let n = entries.len();
    let mut d: Vec<Vec<f64>> = entries.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] - CLOSURE_EPS {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_space() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.dist(0, 1), 1.0);
        assert_eq!(s.diameter(), 1.0);
    }

    #[test]
    fn one_point_space() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0]]).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.diameter(), 0.0);
    }

    #[test]
    fn triangle_violation_reported_with_indices() {
        let entries = vec![vec![0.0, 3.0, 1.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let err = FiniteMetricSpace::from_matrix(&entries).unwrap_err();
        match err {
            MetricError::AxiomViolations(vs) => {
                assert!(vs.iter().any(|v| matches!(
                    v,
                    AxiomViolation::Triangle { from: 0, via: 2, to: 1, .. }
                )));
            }
            other => panic!("expected axiom violations, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_listed() {
        // Asymmetric, negative off-diagonal, and nonzero diagonal at once.
        let entries = vec![vec![1.0, 2.0], vec![-1.0, 0.0]];
        let err = FiniteMetricSpace::from_matrix(&entries).unwrap_err();
        match err {
            MetricError::AxiomViolations(vs) => {
                assert!(vs.iter().any(|v| matches!(v, AxiomViolation::Diagonal { i: 0, .. })));
                assert!(vs.iter().any(|v| matches!(v, AxiomViolation::Symmetry { i: 0, j: 1, .. })));
                assert!(vs.iter().any(|v| matches!(v, AxiomViolation::Positivity { i: 1, j: 0, .. })));
            }
            other => panic!("expected axiom violations, got {other:?}"),
        }
    }

    #[test]
    fn from_points_three_four_five() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert!((s.dist(0, 1) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn from_points_rejects_duplicates() {
        let err = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, MetricError::DuplicatePoint { i: 0, j: 1 });
    }

    #[test]
    fn line_space_distance() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
    }

    #[test]
    fn random_one_point_either_mode() {
        for mode in [RandomMode::EuclideanSquare, RandomMode::ShortestPathClosure] {
            let s = FiniteMetricSpace::random(1, 1, mode).unwrap();
            assert_eq!(s.n(), 1);
        }
    }

    #[test]
    fn random_spaces_validate_over_many_seeds() {
        // from_matrix is the oracle: every generated instance must pass it.
        for seed in 0..100u64 {
            for mode in [RandomMode::EuclideanSquare, RandomMode::ShortestPathClosure] {
                let s = FiniteMetricSpace::random(seed, 5, mode).unwrap();
                FiniteMetricSpace::from_matrix(&s.matrix()).unwrap();
            }
        }
    }

    #[test]
    fn random_is_deterministic() {
        let a = FiniteMetricSpace::random(7, 5, RandomMode::EuclideanSquare).unwrap();
        let b = FiniteMetricSpace::random(7, 5, RandomMode::EuclideanSquare).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn closure_is_idempotent() {
        for seed in 0..20u64 {
            let s = FiniteMetricSpace::random(seed, 6, RandomMode::ShortestPathClosure).unwrap();
            let m = s.matrix();
            assert_eq!(shortest_path_closure(&m), m);
        }
    }

    #[test]
    fn same_space_by_content() {
        let a = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = FiniteMetricSpace::from_matrix(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert!(a.same_space(&b));
        assert!(!a.same_space(&c));
    }

    #[test]
    fn labels_roundtrip() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = s.with_labels(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(s.labels().unwrap(), ["a", "b"]);
        assert!(s.with_labels(vec!["x".into()]).is_err());
    }
}
