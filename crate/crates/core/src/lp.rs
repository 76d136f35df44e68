//! Dense linear programming.
//!
//! Problems are stated as
//!
//! ```text
//! minimise    c'x
//! subject to  A_eq x = b_eq
//!             A_ineq x <= b_ineq
//!             lower <= x <= upper
//! ```
//!
//! and solved with a bounded-variable primal simplex on a dense tableau.
//! Bounds are handled implicitly (bound flips), so box-constrained variables
//! do not add rows. Pricing is Dantzig's rule; after `3 * (m + n)` iterations
//! without objective progress the solver switches to Bland's rule for the
//! rest of the phase. The tableau is periodically rebuilt from an LU
//! factorisation of the basis, and once more at termination so that the
//! reported primal values and row duals are computed from the original data.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rhs: f64,
}

/// A dense LP. Variables default to `[0, +inf)`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq: Vec<Row>,
    ineq: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            eq: Vec::new(),
            ineq: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_eq(&self) -> usize {
        self.eq.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Sets `lower <= x_j <= upper`. Either side may be infinite.
    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.num_vars() {
            return Err(Error::Parameter(format!(
                "variable index {var} out of range ({} variables)",
                self.num_vars()
            )));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::Parameter(format!(
                "invalid bounds [{lower}, {upper}] for variable {var}"
            )));
        }
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::Parameter(format!(
                "empty bound interval [{lower}, {upper}] for variable {var}"
            )));
        }
        self.bounds[var] = (lower, upper);
        Ok(())
    }

    pub fn set_free(&mut self, var: usize) -> Result<()> {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn dense_row(&self, coeffs: Vec<f64>) -> Result<Vec<f64>> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Parameter(format!(
                "constraint has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        Ok(coeffs)
    }

    fn sparse_row(&self, entries: &[(usize, f64)]) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, v) in entries {
            if j >= row.len() {
                return Err(Error::Parameter(format!(
                    "constraint references variable {j}, problem has {} variables",
                    row.len()
                )));
            }
            row[j] += v;
        }
        Ok(row)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        let coeffs = self.dense_row(coeffs)?;
        self.eq.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        let coeffs = self.dense_row(coeffs)?;
        self.ineq.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        let coeffs = self.dense_row(coeffs)?.into_iter().map(|v| -v).collect();
        self.ineq.push(Row { coeffs, rhs: -rhs });
        Ok(())
    }

    pub fn add_eq_sparse(&mut self, entries: &[(usize, f64)], rhs: f64) -> Result<()> {
        let coeffs = self.sparse_row(entries)?;
        self.eq.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn add_le_sparse(&mut self, entries: &[(usize, f64)], rhs: f64) -> Result<()> {
        let coeffs = self.sparse_row(entries)?;
        self.ineq.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn add_ge_sparse(&mut self, entries: &[(usize, f64)], rhs: f64) -> Result<()> {
        let neg: Vec<(usize, f64)> = entries.iter().map(|&(j, v)| (j, -v)).collect();
        self.add_le_sparse(&neg, -rhs)
    }

    /// Checks that every coefficient is finite.
    pub fn validate(&self) -> Result<()> {
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("objective has non-finite entries".into()));
        }
        for (kind, rows) in [("equality", &self.eq), ("inequality", &self.ineq)] {
            for (i, row) in rows.iter().enumerate() {
                if !row.rhs.is_finite() || row.coeffs.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "{kind} constraint {i} has non-finite entries"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of constraints and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &Row| row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self.eq.iter().map(|r| (dot(r) - r.rhs).abs());
        let ineq = self.ineq.iter().map(|r| (dot(r) - r.rhs).max(0.0));
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        eq.chain(ineq).chain(bounds).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Sensitivity of the optimal objective to each equality right-hand side.
    pub duals_eq: Vec<f64>,
    /// Sensitivity to each `<=` right-hand side (non-positive at optimum).
    pub duals_ineq: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol_feas: f64,
    /// Maximum simplex iterations (pivots plus bound flips) over both phases.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            max_iter: 200_000,
        }
    }
}

/// How a standard-form column maps back to an original variable.
#[derive(Debug, Clone, Copy)]
enum ColumnOrigin {
    /// `x_var = offset + col`
    Shifted { var: usize, offset: f64 },
    /// `x_var = offset - col`
    Mirrored { var: usize, offset: f64 },
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Default)]
struct SparseColumn {
    rows: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseColumn {
    fn dot(&self, dense: &[f64]) -> f64 {
        self.rows.iter().zip(&self.vals).map(|(&i, v)| dense[i] * v).sum()
    }
}

/// Revised simplex state with an explicit dense basis inverse.
struct Simplex {
    m: usize,
    n: usize,
    cols: Vec<SparseColumn>,
    rhs: Vec<f64>,
    /// `B^-1`, row-major `m x m`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    dj: Vec<f64>,
    /// Devex reference weights.
    weights: Vec<f64>,
    iterations: usize,
    pivots_since_refactor: usize,
    alpha: Vec<f64>,
    pivot_row: Vec<f64>,
}

impl Simplex {
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::AtUpper => self.upper[j],
            _ => 0.0,
        }
    }

    fn objective(&self) -> f64 {
        let basic: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &v)| self.cost[j] * v)
            .sum();
        let upper: f64 = (0..self.n)
            .filter(|&j| self.state[j] == ColState::AtUpper)
            .map(|j| self.cost[j] * self.upper[j])
            .sum();
        basic + upper
    }

    /// `pi' = c_B' B^-1`
    fn multipliers(&self) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for (p, v) in pi.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *p += cb * v;
                }
            }
        }
        pi
    }

    /// Recomputes `B^-1`, basic values and reduced costs from the original
    /// columns.
    fn refactor(&mut self) -> Result<()> {
        self.pivots_since_refactor = 0;
        let m = self.m;
        if m > 0 {
            let mut b = DMatrix::<f64>::zeros(m, m);
            for (k, &j) in self.basis.iter().enumerate() {
                for (&i, &v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                    b[(i, k)] = v;
                }
            }
            let inv = b
                .try_inverse()
                .ok_or_else(|| Error::Estimation("simplex basis became singular".into()))?;
            for i in 0..m {
                for k in 0..m {
                    self.binv[i * m + k] = inv[(i, k)];
                }
            }
            let mut r = self.rhs.clone();
            for j in 0..self.n {
                if self.state[j] == ColState::AtUpper {
                    for (&i, &v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                        r[i] -= v * self.upper[j];
                    }
                }
            }
            for i in 0..m {
                self.xb[i] = self.binv[i * m..(i + 1) * m]
                    .iter()
                    .zip(&r)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
        let pi = self.multipliers();
        for j in 0..self.n {
            self.dj[j] = if self.state[j] == ColState::Basic {
                0.0
            } else {
                self.cost[j] - self.cols[j].dot(&pi)
            };
        }
        Ok(())
    }

    /// `alpha = B^-1 a_j`
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        self.alpha.fill(0.0);
        for (&k, &v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
            for i in 0..m {
                self.alpha[i] += self.binv[i * m + k] * v;
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let m = self.m;
        let alpha_r = self.alpha[r];
        let leaving = self.basis[r];
        let rho: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();

        // Row r of B^-1 A over nonbasic columns, scaled by the pivot.
        for j in 0..self.n {
            self.pivot_row[j] = if self.state[j] != ColState::Basic && j != e {
                self.cols[j].dot(&rho) / alpha_r
            } else {
                0.0
            };
        }
        let de = self.dj[e];
        let we = self.weights[e];
        for j in 0..self.n {
            let pr = self.pivot_row[j];
            if pr != 0.0 {
                self.dj[j] -= de * pr;
                self.weights[j] = self.weights[j].max(pr * pr * we);
            }
        }
        self.dj[e] = 0.0;
        self.dj[leaving] = -de / alpha_r;
        self.weights[leaving] = (we / (alpha_r * alpha_r)).max(1.0);

        for v in self.binv[r * m..(r + 1) * m].iter_mut() {
            *v /= alpha_r;
        }
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        let above = head.chunks_exact_mut(m).enumerate();
        let below = tail.chunks_exact_mut(m).enumerate().map(|(i, c)| (i + r + 1, c));
        for (i, row) in above.chain(below) {
            let f = self.alpha[i];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = e;
        self.state[e] = ColState::Basic;
        self.pivots_since_refactor += 1;
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        // (column, pricing score)
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.upper[j] <= 0.0 {
                continue;
            }
            let eligible = match self.state[j] {
                ColState::Basic => false,
                ColState::AtLower => self.dj[j] < -OPT_TOL,
                ColState::AtUpper => self.dj[j] > OPT_TOL,
            };
            if !eligible {
                continue;
            }
            if bland {
                best = Some((j, 0.0));
                break;
            }
            let score = self.dj[j] * self.dj[j] / self.weights[j];
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| {
            let dir = if self.state[j] == ColState::AtLower { 1.0 } else { -1.0 };
            (j, dir)
        })
    }

    fn run_phase(&mut self, max_iter: usize, refactor_every: usize) -> Result<PhaseEnd> {
        let stall_limit = 3 * (self.m + self.n);
        let mut bland = false;
        self.weights.fill(1.0);
        let mut best_obj = self.objective();
        let mut stalled = 0usize;
        loop {
            if self.pivots_since_refactor >= refactor_every {
                self.refactor()?;
            }
            let Some((e, dir)) = self.choose_entering(bland) else {
                // Confirm against a fresh factorisation before declaring optimality.
                if self.pivots_since_refactor > 0 {
                    self.refactor()?;
                    if self.choose_entering(bland).is_some() {
                        continue;
                    }
                }
                return Ok(PhaseEnd::Optimal);
            };
            if self.iterations >= max_iter {
                return Ok(PhaseEnd::IterationLimit);
            }
            self.iterations += 1;
            self.ftran(e);

            // Ratio test along x_B(theta) = x_B - theta * dir * alpha.
            let mut theta = self.upper[e];
            let mut leave: Option<(usize, ColState, f64)> = None;
            for i in 0..self.m {
                let a = dir * self.alpha[i];
                let bvar = self.basis[i];
                let (limit, to) = if a > PIVOT_TOL {
                    (self.xb[i].max(0.0) / a, ColState::AtLower)
                } else if a < -PIVOT_TOL && self.upper[bvar].is_finite() {
                    ((self.upper[bvar] - self.xb[i]).max(0.0) / -a, ColState::AtUpper)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < theta,
                    Some((r, _, ar)) => {
                        if limit < theta - 1e-12 {
                            true
                        } else if limit <= theta + 1e-12 {
                            if bland {
                                bvar < self.basis[r]
                            } else {
                                a.abs() > ar.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = theta.min(limit);
                    leave = Some((i, to, a));
                }
            }
            if theta.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }

            let gain = self.dj[e] * dir * theta;
            for i in 0..self.m {
                let a = dir * self.alpha[i];
                if a != 0.0 {
                    self.xb[i] -= theta * a;
                }
            }
            match leave {
                None => {
                    self.state[e] = match self.state[e] {
                        ColState::AtLower => ColState::AtUpper,
                        _ => ColState::AtLower,
                    };
                }
                Some((r, to, _)) => {
                    let entering_value = match self.state[e] {
                        ColState::AtUpper => self.upper[e] - theta,
                        _ => theta,
                    };
                    let leaving = self.basis[r];
                    self.pivot(r, e);
                    self.state[leaving] = to;
                    self.xb[r] = entering_value;
                }
            }

            let obj = best_obj + gain;
            if obj < best_obj - 1e-12 * (1.0 + best_obj.abs()) {
                best_obj = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if !bland && stalled > stall_limit {
                    bland = true;
                }
            }
        }
    }
}

/// Solves `problem` to optimality, or reports why it could not.
pub fn solve_lp(problem: &LpProblem, options: &SolveOptions) -> Result<LpSolution> {
    problem.validate()?;
    let nvar = problem.num_vars();

    // Standard-form columns for the original variables.
    let mut origins: Vec<ColumnOrigin> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();
    // First standard column of each original variable; free variables get a
    // second, mirrored column.
    let mut first_col = vec![0; nvar];
    let mut is_free = vec![false; nvar];
    for (j, &(lo, hi)) in problem.bounds.iter().enumerate() {
        let c = problem.objective[j];
        first_col[j] = origins.len();
        if lo.is_finite() {
            origins.push(ColumnOrigin::Shifted { var: j, offset: lo });
            cost.push(c);
            upper.push(hi - lo);
        } else if hi.is_finite() {
            origins.push(ColumnOrigin::Mirrored { var: j, offset: hi });
            cost.push(-c);
            upper.push(f64::INFINITY);
        } else {
            is_free[j] = true;
            origins.push(ColumnOrigin::Shifted { var: j, offset: 0.0 });
            cost.push(c);
            upper.push(f64::INFINITY);
            origins.push(ColumnOrigin::Mirrored { var: j, offset: 0.0 });
            cost.push(-c);
            upper.push(f64::INFINITY);
        }
    }
    let rows: Vec<&Row> = problem.eq.iter().chain(problem.ineq.iter()).collect();
    let m = rows.len();
    let n_eq = problem.eq.len();

    // Shifts folded into the right-hand side; rows flipped so that rhs >= 0.
    let mut rhs = vec![0.0; m];
    let mut row_sign = vec![1.0; m];
    for (i, row) in rows.iter().enumerate() {
        let mut b = row.rhs;
        for (j, a) in row.coeffs.iter().enumerate() {
            if *a != 0.0 {
                let offset = match origins[first_col[j]] {
                    ColumnOrigin::Shifted { offset, .. } | ColumnOrigin::Mirrored { offset, .. } => {
                        offset
                    }
                    _ => unreachable!(),
                };
                b -= a * offset;
            }
        }
        if b < 0.0 {
            row_sign[i] = -1.0;
            b = -b;
        }
        rhs[i] = b;
    }

    let mut cols: Vec<SparseColumn> = vec![SparseColumn::default(); origins.len()];
    for (i, row) in rows.iter().enumerate() {
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let base = first_col[j];
            let sign = match origins[base] {
                ColumnOrigin::Mirrored { .. } => -1.0,
                _ => 1.0,
            };
            cols[base].rows.push(i);
            cols[base].vals.push(row_sign[i] * sign * a);
            if is_free[j] {
                cols[base + 1].rows.push(i);
                cols[base + 1].vals.push(-row_sign[i] * a);
            }
        }
    }

    // Slacks for inequality rows; artificials where the slack cannot start basic.
    let mut basis = vec![usize::MAX; m];
    for i in n_eq..m {
        let j = cols.len();
        cols.push(SparseColumn {
            rows: vec![i],
            vals: vec![row_sign[i]],
        });
        origins.push(ColumnOrigin::Slack);
        cost.push(0.0);
        upper.push(f64::INFINITY);
        if row_sign[i] > 0.0 {
            basis[i] = j;
        }
    }
    let mut n_artificial = 0;
    for (i, slot) in basis.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = cols.len();
            cols.push(SparseColumn {
                rows: vec![i],
                vals: vec![1.0],
            });
            origins.push(ColumnOrigin::Artificial);
            cost.push(0.0);
            upper.push(f64::INFINITY);
            n_artificial += 1;
        }
    }
    let n_cols = cols.len();
    let mut state = vec![ColState::AtLower; n_cols];
    for &b in &basis {
        state[b] = ColState::Basic;
    }
    let is_artificial: Vec<bool> = origins
        .iter()
        .map(|o| matches!(o, ColumnOrigin::Artificial))
        .collect();

    let mut identity = vec![0.0; m * m];
    for i in 0..m {
        identity[i * m + i] = 1.0;
    }
    let mut sx = Simplex {
        m,
        n: n_cols,
        cols,
        xb: rhs.clone(),
        rhs,
        binv: identity,
        basis,
        state,
        upper,
        cost: vec![0.0; n_cols],
        dj: vec![0.0; n_cols],
        weights: vec![1.0; n_cols],
        iterations: 0,
        pivots_since_refactor: 0,
        alpha: vec![0.0; m],
        pivot_row: vec![0.0; n_cols],
    };
    let refactor_every = 100.max(m / 2);

    let scale = 1.0 + sx.rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if n_artificial > 0 {
        for j in 0..n_cols {
            sx.cost[j] = if is_artificial[j] { 1.0 } else { 0.0 };
        }
        sx.refactor()?;
        match sx.run_phase(options.max_iter, refactor_every)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::IterationLimit => {
                return Ok(unsolved(problem, LpStatus::IterationLimit, sx.iterations))
            }
            // Phase one is bounded below by zero.
            PhaseEnd::Unbounded => {
                return Err(Error::Estimation("phase one reported unbounded".into()))
            }
        }
        if sx.objective() > options.tol_feas * scale {
            return Ok(unsolved(problem, LpStatus::Infeasible, sx.iterations));
        }
        for j in 0..n_cols {
            if is_artificial[j] {
                sx.upper[j] = 0.0;
                if sx.state[j] == ColState::AtUpper {
                    sx.state[j] = ColState::AtLower;
                }
            }
        }
    }

    sx.cost.copy_from_slice(&cost);
    sx.refactor()?;
    match sx.run_phase(options.max_iter, refactor_every)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return Ok(unsolved(problem, LpStatus::Unbounded, sx.iterations)),
        PhaseEnd::IterationLimit => {
            return Ok(unsolved(problem, LpStatus::IterationLimit, sx.iterations))
        }
    }
    if sx.pivots_since_refactor > 0 {
        sx.refactor()?;
    }

    let mut col_value: Vec<f64> = (0..n_cols).map(|j| sx.nonbasic_value(j)).collect();
    for (i, &b) in sx.basis.iter().enumerate() {
        col_value[b] = sx.xb[i];
    }
    let mut x = vec![0.0; nvar];
    for (col, origin) in origins.iter().enumerate() {
        match *origin {
            ColumnOrigin::Shifted { var, .. } => x[var] += col_value[col],
            ColumnOrigin::Mirrored { var, .. } => x[var] -= col_value[col],
            _ => {}
        }
    }
    for (var, &col) in first_col.iter().enumerate() {
        if let ColumnOrigin::Shifted { offset, .. } | ColumnOrigin::Mirrored { offset, .. } =
            origins[col]
        {
            x[var] += offset;
        }
    }

    let pi = sx.multipliers();
    let duals: Vec<f64> = pi.iter().zip(&row_sign).map(|(p, s)| p * s).collect();
    let objective_value = problem.evaluate(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        duals_eq: duals[..n_eq].to_vec(),
        duals_ineq: duals[n_eq..].to_vec(),
        iterations: sx.iterations,
    })
}

fn unsolved(problem: &LpProblem, status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        x: vec![f64::NAN; problem.num_vars()],
        objective_value: f64::NAN,
        duals_eq: vec![f64::NAN; problem.num_eq()],
        duals_ineq: vec![f64::NAN; problem.num_ineq()],
        iterations,
    }
}
