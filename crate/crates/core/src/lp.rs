//! Dense two-phase simplex with primal and dual certificates.
//!
//! The solver accepts general-form problems (min/max, <=/=/>= rows,
//! per-variable bounds with infinities) and reduces them internally to
//! equality standard form with artificial variables. Pricing is Dantzig
//! (most negative reduced cost, ties to the lowest column index) with a
//! Bland's-rule fallback once a pivot-count threshold is crossed, so runs
//! are deterministic and cycling is resolved. Every optimal solve is
//! re-verified against the residual bounds below before it is returned.

use thiserror::Error;

/// Entries smaller than this are treated as zero when pivoting.
pub const PIVOT_TOL: f64 = 1e-9;
/// Feasibility and duality-gap tolerance for returned certificates.
pub const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable (lower, upper); infinities allowed.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Tableau dimensions and pivot count of a solve, for debug output.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct LpStats {
    pub rows: usize,
    pub cols: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point in the original variable space; empty unless optimal.
    pub primal: Vec<f64>,
    /// One dual value per original constraint; empty unless optimal.
    pub duals: Vec<f64>,
    /// Objective value in the original sense; NaN unless optimal.
    pub objective: f64,
    pub stats: LpStats,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl LpProblem {
    /// A problem with the given objective; all variables start free.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { sense, objective, constraints: Vec::new(), bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn nonneg(&mut self, var: usize) -> &mut Self {
        self.bound(var, 0.0, f64::INFINITY)
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| c.is_nan()) {
            return Err(LpError::InvalidProblem("objective contains NaN".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::InvalidProblem(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if c.coeffs.iter().any(|v| v.is_nan()) || c.rhs.is_nan() || c.rhs.is_infinite() {
                return Err(LpError::InvalidProblem(format!("constraint {i} has a NaN or infinite entry")));
            }
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(LpError::InvalidProblem(format!("bounds of variable {j} contain NaN")));
            }
            if l > u {
                return Err(LpError::InvalidProblem(format!("variable {j} has lower bound {l} > upper bound {u}")));
            }
        }
        Ok(())
    }
}

// How each original variable maps into the nonnegative internal columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lower: f64 },
    Mirror { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    // rows 0..m are constraints, row m the phase-2 cost row, row m+1 the
    // phase-1 cost row; last column is the rhs.
    t: Vec<Vec<f64>>,
    m: usize,
    ncols: usize, // structural + slack columns (artificials sit after these)
    width: usize, // ncols + m + 1
    basis: Vec<usize>,
    pivots: usize,
}

enum PhaseEnd {
    Converged,
    Unbounded,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c];
        let inv = 1.0 / piv;
        for v in self.t[r].iter_mut() {
            *v *= inv;
        }
        self.t[r][c] = 1.0;
        for i in 0..self.m + 2 {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f == 0.0 {
                continue;
            }
            // Split borrows: copy out the pivot row lazily per element.
            let (pr, row) = if i < r {
                let (a, b) = self.t.split_at_mut(r);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = self.t.split_at_mut(i);
                (&a[r], &mut b[0])
            };
            for (x, p) in row.iter_mut().zip(pr.iter()) {
                *x -= f * *p;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Entering column: most negative reduced cost (Dantzig) or the lowest
    /// eligible index (Bland). Artificial columns never enter.
    fn price(&self, cost_row: usize, bland: bool) -> Option<usize> {
        let row = &self.t[cost_row];
        if bland {
            (0..self.ncols).find(|&j| row[j] < -PIVOT_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                let r = row[j];
                if r < -PIVOT_TOL && best.map_or(true, |(_, br)| r < br) {
                    best = Some((j, r));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by minimum ratio; ties broken by the smallest basis
    /// variable index, which keeps Dantzig deterministic and makes the
    /// Bland fallback anti-cycling.
    fn ratio_test(&self, c: usize) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, basis var, row)
        for i in 0..self.m {
            let a = self.t[i][c];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = (self.t[i][rhs] / a).max(0.0);
            let replace = match best {
                None => true,
                Some((br, bv, _)) => {
                    let tie = (ratio - br).abs() <= 1e-9 * (1.0 + br.abs());
                    (!tie && ratio < br) || (tie && self.basis[i] < bv)
                }
            };
            if replace {
                best = Some((ratio, self.basis[i], i));
            }
        }
        best.map(|(_, _, i)| i)
    }

    fn run_phase(&mut self, cost_row: usize, pivot_cap: usize) -> Result<PhaseEnd, LpError> {
        let bland_after = 1000 + 20 * self.m;
        let mut steps = 0usize;
        loop {
            let bland = steps >= bland_after;
            let Some(c) = self.price(cost_row, bland) else {
                return Ok(PhaseEnd::Converged);
            };
            let Some(r) = self.ratio_test(c) else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.pivot(r, c);
            steps += 1;
            if self.pivots > pivot_cap {
                return Err(LpError::NumericalFailure(format!(
                    "pivot cap exceeded after {} pivots",
                    self.pivots
                )));
            }
        }
    }
}

/// Solves the problem with primal and dual certificates.
///
/// Deterministic for a fixed problem. On `Optimal` the returned solution
/// has been checked against the residual bounds (primal feasibility within
/// `FEAS_TOL * (1 + |rhs|_inf)`, dual feasibility within `FEAS_TOL`, and
/// duality gap within `FEAS_TOL * (1 + |objective|)`); a violation is
/// reported as `NumericalFailure` rather than returned silently.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.validate()?;

    let n = problem.num_vars();
    let sigma = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // Map variables onto nonnegative internal columns.
    let mut var_map = Vec::with_capacity(n);
    let mut cost: Vec<f64> = Vec::new();
    let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // (internal col, ub on that col)
    for j in 0..n {
        let (l, u) = problem.bounds[j];
        let cj = sigma * problem.objective[j];
        if l.is_finite() {
            let col = cost.len();
            cost.push(cj);
            var_map.push(VarMap::Shift { col, lower: l });
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
        } else if u.is_finite() {
            let col = cost.len();
            cost.push(-cj);
            var_map.push(VarMap::Mirror { col, upper: u });
        } else {
            let pos = cost.len();
            cost.push(cj);
            cost.push(-cj);
            var_map.push(VarMap::Split { pos, neg: pos + 1 });
        }
    }
    let n_struct = cost.len();

    // Transformed constraint rows: original rows first, then bound rows.
    let n_orig = problem.constraints.len();
    let m = n_orig + bound_rows.len();
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; n_struct]; m];
    let mut rhs: Vec<f64> = vec![0.0; m];
    let mut relations: Vec<Relation> = Vec::with_capacity(m);
    for (i, con) in problem.constraints.iter().enumerate() {
        let mut b = con.rhs;
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match var_map[j] {
                VarMap::Shift { col, lower } => {
                    rows[i][col] += a;
                    b -= a * lower;
                }
                VarMap::Mirror { col, upper } => {
                    rows[i][col] -= a;
                    b -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    rows[i][pos] += a;
                    rows[i][neg] -= a;
                }
            }
        }
        rhs[i] = b;
        relations.push(con.relation);
    }
    for (k, &(col, ub)) in bound_rows.iter().enumerate() {
        let i = n_orig + k;
        rows[i][col] = 1.0;
        rhs[i] = ub;
        relations.push(Relation::Le);
    }

    // Slack/surplus columns, then flip rows to make the rhs nonnegative.
    let mut slack_of_row: Vec<Option<usize>> = vec![None; m];
    let mut ncols = n_struct;
    for i in 0..m {
        match relations[i] {
            Relation::Le | Relation::Ge => {
                slack_of_row[i] = Some(ncols);
                ncols += 1;
            }
            Relation::Eq => {}
        }
    }
    let mut flipped = vec![false; m];
    let width = ncols + m + 1;
    let mut t = vec![vec![0.0; width]; m + 2];
    for i in 0..m {
        let flip = rhs[i] < 0.0;
        flipped[i] = flip;
        let s = if flip { -1.0 } else { 1.0 };
        for (j, &v) in rows[i].iter().enumerate() {
            t[i][j] = s * v;
        }
        if let Some(sc) = slack_of_row[i] {
            let dir = match relations[i] {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => unreachable!(),
            };
            t[i][sc] = s * dir;
        }
        t[i][ncols + i] = 1.0; // artificial
        t[i][width - 1] = s * rhs[i];
    }
    // Phase-2 cost row: reduced costs of the all-artificial basis are the
    // raw costs (artificials cost 0 in phase 2).
    for j in 0..n_struct {
        t[m][j] = cost[j];
    }
    // Phase-1 cost row: minimize the artificial sum, priced out against the
    // initial basis: reduced cost of column j is -sum_i t[i][j].
    for j in 0..width {
        let mut s = 0.0;
        for row in t.iter().take(m) {
            s += row[j];
        }
        t[m + 1][j] = -s;
    }
    for i in 0..m {
        t[m + 1][ncols + i] = 0.0;
    }

    let mut tab = Tableau { t, m, ncols, width, basis: (ncols..ncols + m).collect(), pivots: 0 };
    let pivot_cap = 10_000 + 50 * (m + 1) + 2 * ncols;
    let stats_dims = (m, width - 1);

    // Phase 1: drive the artificial sum to zero.
    match tab.run_phase(m + 1, pivot_cap)? {
        PhaseEnd::Converged => {}
        PhaseEnd::Unbounded => {
            return Err(LpError::NumericalFailure("phase 1 reported unbounded".into()));
        }
    }
    let b_scale = 1.0 + rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let w = -tab.t[m + 1][tab.rhs_col()];
    if w > FEAS_TOL * b_scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: f64::NAN,
            stats: LpStats { rows: stats_dims.0, cols: stats_dims.1, pivots: tab.pivots },
        });
    }
    // Pivot basic artificials out where possible; a row with no eligible
    // column is redundant and its artificial stays basic at level zero.
    for r in 0..m {
        if tab.basis[r] < ncols {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..ncols {
            let a = tab.t[r][j].abs();
            if a > PIVOT_TOL && best.map_or(true, |(_, ba)| a > ba) {
                best = Some((j, a));
            }
        }
        if let Some((j, _)) = best {
            tab.pivot(r, j);
        }
    }

    // Phase 2 on the real objective.
    let status = match tab.run_phase(m, pivot_cap)? {
        PhaseEnd::Converged => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
    };
    let stats = LpStats { rows: stats_dims.0, cols: stats_dims.1, pivots: tab.pivots };
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: f64::NAN,
            stats,
        });
    }

    // Extract the internal point and map it back.
    let rhs_col = tab.rhs_col();
    let mut xhat = vec![0.0; ncols + m];
    for r in 0..m {
        let v = tab.t[r][rhs_col];
        xhat[tab.basis[r]] = if v < 0.0 && v > -FEAS_TOL * b_scale { 0.0 } else { v };
    }
    let mut primal = vec![0.0; n];
    for (j, map) in var_map.iter().enumerate() {
        primal[j] = match *map {
            VarMap::Shift { col, lower } => lower + xhat[col],
            VarMap::Mirror { col, upper } => upper - xhat[col],
            VarMap::Split { pos, neg } => xhat[pos] - xhat[neg],
        };
    }
    let objective: f64 = problem.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();

    // Duals from the phase-2 reduced costs of the artificial columns,
    // unflipped and restated for the original sense.
    let mut duals = vec![0.0; n_orig];
    for (i, d) in duals.iter_mut().enumerate() {
        let y_int = -tab.t[m][ncols + i];
        let mut y = if flipped[i] { -y_int } else { y_int };
        y *= sigma;
        *d = y;
    }

    let solution = LpSolution { status, primal, duals, objective, stats };
    check_optimal(problem, &solution)?;
    log::debug!(
        "simplex: {} rows x {} cols, {} pivots, objective {}",
        stats.rows,
        stats.cols,
        stats.pivots,
        solution.objective
    );
    Ok(solution)
}

/// Residual verification of an optimal solution against the original
/// problem: primal feasibility, dual sign conditions, reduced-cost
/// conditions at the bounds, and the duality gap.
fn check_optimal(problem: &LpProblem, sol: &LpSolution) -> Result<(), LpError> {
    let sigma = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let b_scale = 1.0 + problem.constraints.iter().fold(0.0f64, |a, c| a.max(c.rhs.abs()));
    let p_tol = FEAS_TOL * b_scale;

    let mut primal_resid = 0.0f64;
    for (c, &y) in problem.constraints.iter().zip(&sol.duals) {
        let act: f64 = c.coeffs.iter().zip(&sol.primal).map(|(a, x)| a * x).sum();
        let viol = match c.relation {
            Relation::Le => act - c.rhs,
            Relation::Ge => c.rhs - act,
            Relation::Eq => (act - c.rhs).abs(),
        };
        primal_resid = primal_resid.max(viol);
        // Dual sign conditions: for a minimization, <= rows need y <= 0 and
        // >= rows need y >= 0; maximization flips them.
        let sign_viol = match c.relation {
            Relation::Le => sigma * y,
            Relation::Ge => -sigma * y,
            Relation::Eq => 0.0,
        };
        if sign_viol > FEAS_TOL {
            return Err(LpError::NumericalFailure(format!(
                "dual sign violation {sign_viol:.3e} on a {:?} row",
                c.relation
            )));
        }
    }
    for (j, (&x, &(l, u))) in sol.primal.iter().zip(&problem.bounds).enumerate() {
        let viol = (l - x).max(x - u);
        if viol > FEAS_TOL * (1.0 + l.abs().min(u.abs())) {
            return Err(LpError::NumericalFailure(format!("variable {j} violates its bounds by {viol:.3e}")));
        }
    }
    if primal_resid > p_tol {
        return Err(LpError::NumericalFailure(format!("primal residual {primal_resid:.3e} exceeds {p_tol:.3e}")));
    }

    // Reduced costs and the dual objective, bound terms included.
    let mut dual_obj: f64 =
        problem.constraints.iter().zip(&sol.duals).map(|(c, y)| c.rhs * y).sum();
    for j in 0..problem.num_vars() {
        let mut r = problem.objective[j];
        for (c, &y) in problem.constraints.iter().zip(&sol.duals) {
            r -= c.coeffs[j] * y;
        }
        let (l, u) = problem.bounds[j];
        let x = sol.primal[j];
        let at_lower = l.is_finite() && x <= l + 1e-7 * (1.0 + l.abs());
        let at_upper = u.is_finite() && x >= u - 1e-7 * (1.0 + u.abs());
        let r_eff = if r.abs() <= FEAS_TOL { 0.0 } else { r };
        let dual_viol = if at_lower && at_upper {
            0.0
        } else if at_lower {
            (-sigma * r).max(0.0)
        } else if at_upper {
            (sigma * r).max(0.0)
        } else {
            r.abs()
        };
        if dual_viol > FEAS_TOL {
            return Err(LpError::NumericalFailure(format!(
                "reduced-cost violation {dual_viol:.3e} on variable {j}"
            )));
        }
        if r_eff != 0.0 {
            // The active bound pays the reduced cost in the dual objective.
            let bound = match (problem.sense, r_eff > 0.0) {
                (Sense::Minimize, true) | (Sense::Maximize, false) => l,
                (Sense::Minimize, false) | (Sense::Maximize, true) => u,
            };
            if !bound.is_finite() {
                return Err(LpError::NumericalFailure(format!(
                    "reduced cost {r_eff:.3e} on variable {j} with no finite bound to charge"
                )));
            }
            dual_obj += r_eff * bound;
        }
    }
    let gap = (sol.objective - dual_obj).abs();
    if gap > FEAS_TOL * (1.0 + sol.objective.abs()) {
        return Err(LpError::NumericalFailure(format!(
            "duality gap {gap:.3e} between primal {} and dual {}",
            sol.objective, dual_obj
        )));
    }
    Ok(())
}
