//! Two-phase primal simplex on a dense tableau.
//!
//! The model is brought into standard form `min c·x, A x = b, x >= 0, b >= 0`
//! by shifting variables to a zero lower bound, splitting free variables,
//! adding slack/surplus columns and one explicit row per finite upper bound.
//! Rows without a natural unit column start with an artificial basic
//! variable; artificial columns are never materialised because a variable
//! that leaves the basis in phase 1 never re-enters.

use thiserror::Error;

use crate::ilp::{Model, ObjectiveSense, Sense, VarId};
use crate::scalar::Scalar;

pub const DEFAULT_ITERATION_LIMIT: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplexError {
    #[error("simplex exceeded the iteration limit of {limit} pivots")]
    IterationLimitExceeded { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SimplexConfig {
    pub max_iterations: usize,
    /// Number of degenerate pivots within a phase after which Bland's rule
    /// takes over for the rest of that phase. `None` uses `3·(rows + cols)`.
    pub bland_after: Option<usize>,
    /// Record the phase-2 objective after every pivot in [`LpResult::trace`].
    pub record_trace: bool,
    pub ratio_test: RatioTest,
}

/// Leaving-row choice outside the Bland phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RatioTest {
    /// Two-pass Harris test: among rows within a small tolerance of the
    /// minimum ratio, take the largest pivot.
    #[default]
    Harris,
    /// Exact minimum ratio, ties to the lowest basic column. Degenerate LPs
    /// can cycle under this rule until the Bland fallback engages.
    Textbook,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            max_iterations: DEFAULT_ITERATION_LIMIT,
            bland_after: None,
            record_trace: false,
            ratio_test: RatioTest::Harris,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// One value per model variable; empty unless `status` is `Optimal`.
    pub values: Vec<f64>,
    /// Objective in the model's own sense; `Some` iff `Optimal`.
    pub objective: Option<f64>,
    pub iterations: usize,
    /// Phase-2 objective (model sense) after each pivot, when requested.
    pub trace: Vec<f64>,
}

impl LpResult {
    fn without_solution(status: LpStatus, iterations: usize) -> Self {
        LpResult { status, values: Vec::new(), objective: None, iterations, trace: Vec::new() }
    }
}

/// How a model variable is recovered from standard-form columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarMapping {
    /// Lower and upper bound coincide; no column.
    Fixed(f64),
    /// `x = lower + col`
    Shifted { col: usize, lower: f64 },
    /// `x = upper - col` (no finite lower bound)
    Mirrored { col: usize, upper: f64 },
    /// `x = pos - neg` (free)
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Structural(VarId),
    /// Negative half of a split free variable.
    StructuralNeg(VarId),
    Slack {
        row: usize,
    },
    BoundSlack(VarId),
}

/// `min cost·x + cost_offset` subject to `matrix·x = rhs`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct StandardForm<S = f64> {
    pub num_rows: usize,
    pub num_cols: usize,
    /// Row-major `num_rows × num_cols`.
    pub matrix: Vec<S>,
    pub rhs: Vec<S>,
    pub cost: Vec<S>,
    pub cost_offset: f64,
    /// Starting basis; `None` marks a row whose basic variable is artificial.
    pub basis: Vec<Option<usize>>,
    pub columns: Vec<ColumnKind>,
    pub var_map: Vec<VarMapping>,
    /// Constraint rows come first, then one row per finite upper bound.
    pub num_constraint_rows: usize,
    pub num_bound_rows: usize,
    pub num_structural: usize,
    pub num_slack: usize,
    pub num_bound_slack: usize,
    pub num_artificial: usize,
    objective_sense: ObjectiveSense,
    /// Bounds were contradictory; the form is empty and infeasible.
    trivially_infeasible: bool,
}

/// Standard form of `model` with its own variable bounds.
pub fn to_standard_form(model: &Model) -> StandardForm<f64> {
    StandardForm::from_model(model)
}

impl<S: Scalar> StandardForm<S> {
    pub fn from_model(model: &Model) -> Self {
        let (lower, upper): (Vec<f64>, Vec<f64>) = model.variables().iter().map(|v| (v.lower, v.upper)).unzip();
        Self::with_bounds(model, &lower, &upper)
    }

    /// Standard form of `model` with the variable bounds replaced by
    /// `lower`/`upper` (indexed by [`VarId`]).
    pub fn with_bounds(model: &Model, lower: &[f64], upper: &[f64]) -> Self {
        let n = model.num_vars();
        assert!(lower.len() == n && upper.len() == n, "bound vectors must cover every variable");
        let mut columns = Vec::new();
        let mut var_map = Vec::with_capacity(n);
        let mut trivially_infeasible = false;
        for (j, (&l, &u)) in lower.iter().zip(upper).enumerate() {
            let var = VarId(j);
            if l > u {
                trivially_infeasible = true;
            }
            let mapping = if l == u {
                VarMapping::Fixed(l)
            } else if l.is_finite() {
                columns.push(ColumnKind::Structural(var));
                VarMapping::Shifted { col: columns.len() - 1, lower: l }
            } else if u.is_finite() {
                columns.push(ColumnKind::Structural(var));
                VarMapping::Mirrored { col: columns.len() - 1, upper: u }
            } else {
                columns.push(ColumnKind::Structural(var));
                columns.push(ColumnKind::StructuralNeg(var));
                VarMapping::Split { pos: columns.len() - 2, neg: columns.len() - 1 }
            };
            var_map.push(mapping);
        }
        let num_structural = columns.len();

        // Sparse rows over structural columns, with the adjusted rhs.
        let mut rows: Vec<(Vec<(usize, f64)>, f64, Option<Sense>)> = Vec::new();
        for c in model.constraints() {
            let mut entries = Vec::with_capacity(c.expr.len());
            let mut rhs = c.rhs;
            for (v, a) in c.expr.terms() {
                match var_map[v.0] {
                    VarMapping::Fixed(x) => rhs -= a * x,
                    VarMapping::Shifted { col, lower } => {
                        rhs -= a * lower;
                        entries.push((col, a));
                    }
                    VarMapping::Mirrored { col, upper } => {
                        rhs -= a * upper;
                        entries.push((col, -a));
                    }
                    VarMapping::Split { pos, neg } => {
                        entries.push((pos, a));
                        entries.push((neg, -a));
                    }
                }
            }
            rows.push((entries, rhs, Some(c.sense)));
        }
        let num_constraint_rows = rows.len();
        let mut bound_vars = Vec::new();
        for (j, mapping) in var_map.iter().enumerate() {
            if let VarMapping::Shifted { col, lower } = *mapping {
                if upper[j].is_finite() {
                    rows.push((vec![(col, 1.0)], upper[j] - lower, None));
                    bound_vars.push(VarId(j));
                }
            }
        }
        let num_bound_rows = bound_vars.len();

        // Slack columns: constraint slacks first, then bound slacks.
        let mut slack_of_row = vec![None; rows.len()];
        for (i, (_, _, sense)) in rows.iter().enumerate().take(num_constraint_rows) {
            match sense {
                Some(Sense::Le) => {
                    columns.push(ColumnKind::Slack { row: i });
                    slack_of_row[i] = Some((columns.len() - 1, 1.0));
                }
                Some(Sense::Ge) => {
                    columns.push(ColumnKind::Slack { row: i });
                    slack_of_row[i] = Some((columns.len() - 1, -1.0));
                }
                _ => {}
            }
        }
        let num_slack = columns.len() - num_structural;
        for (k, &var) in bound_vars.iter().enumerate() {
            columns.push(ColumnKind::BoundSlack(var));
            slack_of_row[num_constraint_rows + k] = Some((columns.len() - 1, 1.0));
        }
        let num_bound_slack = bound_vars.len();

        let num_rows = rows.len();
        let num_cols = columns.len();
        let mut matrix = vec![S::zero(); num_rows * num_cols];
        let mut rhs_vec = Vec::with_capacity(num_rows);
        let mut basis = Vec::with_capacity(num_rows);
        for (i, (entries, rhs, _)) in rows.iter().enumerate() {
            let flip = *rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            let row = &mut matrix[i * num_cols..(i + 1) * num_cols];
            for &(col, a) in entries {
                row[col] = row[col] + S::from_f64_lossy(sign * a);
            }
            let mut basic = None;
            if let Some((col, s)) = slack_of_row[i] {
                row[col] = S::from_f64_lossy(sign * s);
                if sign * s > 0.0 {
                    basic = Some(col);
                }
            }
            rhs_vec.push(S::from_f64_lossy(sign * rhs));
            basis.push(basic);
        }
        let num_artificial = basis.iter().filter(|b| b.is_none()).count();

        let objective = model.objective();
        let min_sign = -objective.sense.sign();
        let mut cost = vec![S::zero(); num_cols];
        let mut cost_offset = min_sign * objective.expr.constant_term();
        for (v, c) in objective.expr.terms() {
            let c = min_sign * c;
            match var_map[v.0] {
                VarMapping::Fixed(x) => cost_offset += c * x,
                VarMapping::Shifted { col, lower } => {
                    cost_offset += c * lower;
                    cost[col] = S::from_f64_lossy(c);
                }
                VarMapping::Mirrored { col, upper } => {
                    cost_offset += c * upper;
                    cost[col] = S::from_f64_lossy(-c);
                }
                VarMapping::Split { pos, neg } => {
                    cost[pos] = S::from_f64_lossy(c);
                    cost[neg] = S::from_f64_lossy(-c);
                }
            }
        }

        StandardForm {
            num_rows,
            num_cols,
            matrix,
            rhs: rhs_vec,
            cost,
            cost_offset,
            basis,
            columns,
            var_map,
            num_constraint_rows,
            num_bound_rows,
            num_structural,
            num_slack,
            num_bound_slack,
            num_artificial,
            objective_sense: objective.sense,
            trivially_infeasible,
        }
    }

    /// Recovers model variable values from column values.
    pub fn recover(&self, column_values: &[S]) -> Vec<f64> {
        let col = |c: usize| column_values[c].to_f64_lossy();
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMapping::Fixed(x) => x,
                VarMapping::Shifted { col: c, lower } => lower + col(c),
                VarMapping::Mirrored { col: c, upper } => upper - col(c),
                VarMapping::Split { pos, neg } => col(pos) - col(neg),
            })
            .collect()
    }
}

/// Solves the continuous relaxation of `model` in `f64`.
pub fn solve_relaxation(model: &Model) -> Result<LpResult, SimplexError> {
    solve_relaxation_in::<f64>(model, &SimplexConfig::default())
}

/// Solves the continuous relaxation in the scalar type `S`.
pub fn solve_relaxation_in<S: Scalar>(model: &Model, config: &SimplexConfig) -> Result<LpResult, SimplexError> {
    let sf = StandardForm::<S>::from_model(model);
    solve_standard_form(model, &sf, config)
}

/// Solves the relaxation with bounds overridden per variable.
pub fn solve_with_bounds(
    model: &Model,
    lower: &[f64],
    upper: &[f64],
    config: &SimplexConfig,
) -> Result<LpResult, SimplexError> {
    let sf = StandardForm::<f64>::with_bounds(model, lower, upper);
    solve_standard_form(model, &sf, config)
}

fn solve_standard_form<S: Scalar>(
    model: &Model,
    sf: &StandardForm<S>,
    config: &SimplexConfig,
) -> Result<LpResult, SimplexError> {
    if sf.trivially_infeasible {
        return Ok(LpResult::without_solution(LpStatus::Infeasible, 0));
    }
    let mut tableau = Tableau::new(sf, config);
    let status = tableau.run()?;
    let iterations = tableau.iterations;
    if status != LpStatus::Optimal {
        return Ok(LpResult::without_solution(status, iterations));
    }
    let values = sf.recover(&tableau.column_values());
    let objective = model.objective().expr.evaluate(&values).unwrap_or(f64::NAN);
    let sign = sf.objective_sense.sign();
    let trace = tableau.trace.iter().map(|z| -sign * (z + sf.cost_offset)).collect();
    Ok(LpResult { status, values, objective: Some(objective), iterations, trace })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Tableau<'a, S> {
    rows: usize,
    cols: usize,
    /// `rows × cols`, row-major.
    data: Vec<S>,
    rhs: Vec<S>,
    /// Reduced costs of the phase-1 objective; last entry is `-w`.
    phase1: Vec<S>,
    /// Reduced costs of the real objective; last entry is `-z` (without offset).
    cost: Vec<S>,
    basis: Vec<Option<usize>>,
    is_basic: Vec<bool>,
    iterations: usize,
    config: &'a SimplexConfig,
    bland_threshold: usize,
    trace: Vec<f64>,
    /// Copy of the entering column, loaded before each pivot.
    column: Vec<S>,
    nonzeros: Vec<usize>,
    pivot_buf: Vec<S>,
}

impl<'a, S: Scalar> Tableau<'a, S> {
    fn new(sf: &StandardForm<S>, config: &'a SimplexConfig) -> Self {
        let (rows, cols) = (sf.num_rows, sf.num_cols);
        let data = sf.matrix.clone();
        let mut phase1 = vec![S::zero(); cols + 1];
        for (i, b) in sf.basis.iter().enumerate() {
            if b.is_none() {
                for (p, &a) in phase1.iter_mut().zip(&data[i * cols..(i + 1) * cols]) {
                    *p = *p - a;
                }
                phase1[cols] = phase1[cols] - sf.rhs[i];
            }
        }
        let mut cost = sf.cost.clone();
        cost.push(S::zero());
        let mut is_basic = vec![false; cols];
        for b in sf.basis.iter().flatten() {
            is_basic[*b] = true;
        }
        // Initial basic columns are slacks with zero cost, so `cost` is
        // already a reduced-cost row.
        Tableau {
            rows,
            cols,
            data,
            rhs: sf.rhs.clone(),
            phase1,
            cost,
            basis: sf.basis.clone(),
            is_basic,
            iterations: 0,
            config,
            bland_threshold: config.bland_after.unwrap_or(3 * (rows + cols)),
            trace: Vec::new(),
            column: vec![S::zero(); rows],
            nonzeros: Vec::with_capacity(cols),
            pivot_buf: Vec::with_capacity(cols),
        }
    }

    fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    fn load_column(&mut self, j: usize) {
        let cols = self.cols;
        for (i, x) in self.column.iter_mut().enumerate() {
            *x = self.data[i * cols + j];
        }
    }

    fn run(&mut self) -> Result<LpStatus, SimplexError> {
        if self.basis.iter().any(Option::is_none) {
            self.iterate(Phase::One)?;
            // Summed from the rows rather than read off the objective row,
            // which accumulates round-off.
            let infeasibility =
                (0..self.rows).filter(|&i| self.basis[i].is_none()).fold(S::zero(), |acc, i| acc + self.rhs[i]);
            if infeasibility > S::FEASIBILITY_TOL {
                return Ok(LpStatus::Infeasible);
            }
            self.drive_out_artificials();
        }
        self.iterate(Phase::Two)
    }

    fn iterate(&mut self, phase: Phase) -> Result<LpStatus, SimplexError> {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            let Some(enter) = self.entering(phase, bland) else {
                return Ok(LpStatus::Optimal);
            };
            self.load_column(enter);
            let Some((leave, step)) = self.leaving(bland) else {
                // Phase 1 is bounded below by zero, so only phase 2 gets here.
                return Ok(LpStatus::Unbounded);
            };
            if self.iterations >= self.config.max_iterations {
                return Err(SimplexError::IterationLimitExceeded { limit: self.config.max_iterations });
            }
            let d = match phase {
                Phase::One => &self.phase1,
                Phase::Two => &self.cost,
            };
            let (dj, z) = (d[enter], d[self.cols]);
            self.pivot(leave, enter, phase);
            self.iterations += 1;
            // Pivots that do not move the objective count towards the Bland switch.
            if -dj * step <= S::REDUCED_COST_TOL * (S::one() + z.abs()) {
                degenerate += 1;
                if degenerate >= self.bland_threshold {
                    bland = true;
                }
            }
            if phase == Phase::Two && self.config.record_trace {
                self.trace.push(-self.cost[self.cols].to_f64_lossy());
            }
        }
    }

    fn entering(&self, phase: Phase, bland: bool) -> Option<usize> {
        let d = match phase {
            Phase::One => &self.phase1,
            Phase::Two => &self.cost,
        };
        let tol = -S::REDUCED_COST_TOL;
        let mut best: Option<(usize, S)> = None;
        for (j, &dj) in d[..self.cols].iter().enumerate() {
            if dj < tol && !self.is_basic[j] {
                if bland {
                    return Some(j);
                }
                if best.map_or(true, |(_, b)| dj < b) {
                    best = Some((j, dj));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Two-pass (Harris) ratio test on the loaded column. Returns the pivot
    /// row and the step length.
    ///
    /// The first pass finds the largest step that keeps every basic variable
    /// above `-HARRIS_TOL`; the second picks, among rows whose exact ratio fits
    /// in that step, the largest pivot element (Dantzig) or the lowest basic
    /// column (Bland).
    fn leaving(&self, bland: bool) -> Option<(usize, S)> {
        let slack = S::FEASIBILITY_TOL * S::from_f64_lossy(0.01);
        let mut max_step: Option<S> = None;
        for (&a, &b) in self.column.iter().zip(&self.rhs) {
            if a > S::PIVOT_TOL {
                let bound = (b.max(S::zero()) + slack) / a;
                max_step = Some(max_step.map_or(bound, |m| m.min(bound)));
            }
        }
        let max_step = max_step?;
        // Artificial basics rank before every real column.
        let key = |row: usize| self.basis[row].map_or(0, |c| c + 1);
        if !bland && self.config.ratio_test == RatioTest::Textbook {
            let mut best: Option<(usize, S)> = None;
            for (i, (&a, &b)) in self.column.iter().zip(&self.rhs).enumerate() {
                if a > S::PIVOT_TOL {
                    let ratio = b.max(S::zero()) / a;
                    if best.map_or(true, |(bi, br)| ratio < br || (ratio == br && key(i) < key(bi))) {
                        best = Some((i, ratio));
                    }
                }
            }
            return best;
        }
        let candidates = self.column.iter().zip(&self.rhs).enumerate().filter_map(|(i, (&a, &b))| {
            let ratio = b.max(S::zero()) / a;
            (a > S::PIVOT_TOL && ratio <= max_step).then_some((i, ratio, a))
        });
        let mut best: Option<(usize, S, S)> = None;
        if bland {
            // Lowest basic column among the candidates, ignoring pivots far
            // smaller than the best available one.
            let largest = candidates.clone().map(|(_, _, a)| a).fold(S::zero(), S::max);
            let floor = largest * S::from_f64_lossy(1e-3);
            for (i, ratio, a) in candidates.filter(|&(_, _, a)| a >= floor) {
                if best.map_or(true, |(bi, _, _)| key(i) < key(bi)) {
                    best = Some((i, ratio, a));
                }
            }
        } else {
            for (i, ratio, a) in candidates {
                if best.map_or(true, |(bi, _, ba)| a > ba || (a == ba && key(i) < key(bi))) {
                    best = Some((i, ratio, a));
                }
            }
        }
        best.map(|(i, r, _)| (i, r))
    }

    /// Pivots on `(r, c)`; column `c` must be loaded.
    fn pivot(&mut self, r: usize, c: usize, phase: Phase) {
        let cols = self.cols;
        let inv = S::one() / self.column[r];
        let mut pivot_row = std::mem::take(&mut self.pivot_buf);
        let mut nz = std::mem::take(&mut self.nonzeros);
        {
            let prow = &mut self.data[r * cols..(r + 1) * cols];
            for x in prow.iter_mut() {
                *x = *x * inv;
            }
            prow[c] = S::one();
            pivot_row.clear();
            pivot_row.extend_from_slice(prow);
        }
        nz.clear();
        nz.extend(pivot_row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, _)| j));
        self.rhs[r] = self.rhs[r] * inv;
        let br = self.rhs[r];

        let drop = |v: S| if v.abs() < S::DROP_TOL { S::zero() } else { v };
        let eliminate = |row: &mut [S], f: S| {
            for &j in &nz {
                row[j] = drop(row[j] - f * pivot_row[j]);
            }
            row[c] = S::zero();
        };
        for i in 0..self.rows {
            let f = self.column[i];
            if i == r || f.is_zero() {
                continue;
            }
            eliminate(&mut self.data[i * cols..(i + 1) * cols], f);
            let b = drop(self.rhs[i] - f * br);
            self.rhs[i] = if b < S::zero() { S::zero() } else { b };
        }
        let objectives: &mut [&mut Vec<S>] =
            if phase == Phase::One { &mut [&mut self.phase1, &mut self.cost] } else { &mut [&mut self.cost] };
        for obj in objectives.iter_mut() {
            let f = obj[c];
            if !f.is_zero() {
                eliminate(&mut obj[..cols], f);
                obj[cols] = drop(obj[cols] - f * br);
            }
        }
        self.nonzeros = nz;
        self.pivot_buf = pivot_row;

        if let Some(old) = self.basis[r] {
            self.is_basic[old] = false;
        }
        self.basis[r] = Some(c);
        self.is_basic[c] = true;
    }

    /// After a successful phase 1, pivots remaining artificial basics out on
    /// any usable column. Rows whose entries are all below the feasibility
    /// tolerance are redundant up to round-off; they are cleared and keep an
    /// artificial at level zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r].is_some() {
                continue;
            }
            // The artificial sits at zero up to tolerance, so these pivots
            // must not move any other row.
            self.rhs[r] = S::zero();
            let mut best: Option<(usize, S)> = None;
            for j in 0..self.cols {
                let a = self.at(r, j).abs();
                if !self.is_basic[j] && a > S::FEASIBILITY_TOL && best.map_or(true, |(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => {
                    self.load_column(j);
                    self.pivot(r, j, Phase::One);
                }
                None => {
                    let cols = self.cols;
                    self.data[r * cols..(r + 1) * cols].fill(S::zero());
                }
            }
        }
    }

    fn column_values(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.cols];
        for (i, b) in self.basis.iter().enumerate() {
            if let Some(c) = *b {
                x[c] = self.rhs[i].max(S::zero());
            }
        }
        x
    }
}
