//! ILP model types: variables, sparse linear expressions, constraints and
//! an objective.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

/// Default feasibility tolerance used by [`Model::check_feasible`] callers.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

/// Dense, model-local variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    /// Amount by which `lhs (sense) rhs` is violated; zero when satisfied.
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Sense::Le => (lhs - rhs).max(0.0),
            Sense::Ge => (rhs - lhs).max(0.0),
            Sense::Eq => (lhs - rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

impl ObjectiveSense {
    /// +1 for maximization, -1 for minimization.
    pub fn sign(self) -> f64 {
        match self {
            ObjectiveSense::Maximize => 1.0,
            ObjectiveSense::Minimize => -1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid bounds for `{name}`: lower {lower} > upper {upper}")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{0}` must have bounds [0, 1]")]
    BinaryBounds(String),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("no value for variable {0}")]
    MissingValue(VarId),
    #[error("non-finite coefficient or right-hand side in `{0}`")]
    NonFinite(String),
}

/// Words that the LP reader treats as section keywords or bound tokens.
const RESERVED: &[&str] = &[
    "max", "maximize", "maximise", "maximum", "min", "minimize", "minimise", "minimum", "subject", "st", "such",
    "bounds", "bound", "generals", "general", "gen", "integers", "binaries", "binary", "bin", "end", "free", "inf",
    "infinity",
];

/// `[A-Za-z_][A-Za-z0-9_]*`, excluding LP keywords.
pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.iter().any(|kw| kw.eq_ignore_ascii_case(name))
}

/// Sparse linear expression `Σ coef·var + constant`.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: value }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        let mut e = Self::new();
        e.add_term(var, coef);
        e
    }

    /// Sum of the given variables with unit coefficients.
    pub fn sum<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        let mut e = Self::new();
        for v in vars {
            e.add_term(v, 1.0);
        }
        e
    }

    /// Adds `coef·var`, merging with an existing term.
    pub fn add_term(&mut self, var: VarId, coef: f64) -> &mut Self {
        let entry = self.terms.entry(var).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&var);
        }
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    pub fn with_term(mut self, var: VarId, coef: f64) -> Self {
        self.add_term(var, coef);
        self
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, var: VarId) -> f64 {
        self.terms.get(&var).copied().unwrap_or(0.0)
    }

    /// Terms in ascending variable order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms.keys().next_back().copied()
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.values().all(|c| c.is_finite())
    }

    /// `Σ coef·value + constant` over a dense assignment indexed by [`VarId`].
    pub fn evaluate(&self, values: &[f64]) -> Result<f64, ModelError> {
        let mut acc = self.constant;
        for (&v, &c) in &self.terms {
            let x = values.get(v.0).ok_or(ModelError::MissingValue(v))?;
            acc += c * x;
        }
        Ok(acc)
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.terms.clear();
        } else {
            self.terms.values_mut().for_each(|c| *c *= factor);
        }
        self.constant *= factor;
    }
}

impl FromIterator<(VarId, f64)> for LinExpr {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        let mut e = LinExpr::new();
        for (v, c) in iter {
            e.add_term(v, c);
        }
        e
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        for (v, c) in rhs.terms() {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += &rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(mut self) -> LinExpr {
        self.scale(-1.0);
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        self.scale(rhs);
        self
    }
}

/// A linear row `expr (sense) rhs`. The stored expression never carries a
/// constant; it is folded into `rhs` when the constraint is added.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn violation(&self, values: &[f64]) -> Result<f64, ModelError> {
        Ok(self.sense.violation(self.expr.evaluate(values)?, self.rhs))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub expr: LinExpr,
}

/// Outcome of [`Model::check_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Names of violated constraints, then `bound:<var>` and
    /// `integrality:<var>` entries.
    pub violated: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    var_index: HashMap<String, VarId>,
    constraint_index: HashMap<String, ConstraintId>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective { sense: ObjectiveSense::Maximize, expr: LinExpr::new() },
            var_index: HashMap::new(),
            constraint_index: HashMap::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if !is_valid_identifier(&name) {
            return Err(ModelError::BadIdentifier(name));
        }
        if self.var_index.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        if kind == VarKind::Binary && (lower != 0.0 || upper != 1.0) {
            return Err(ModelError::BinaryBounds(name));
        }
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable { name, lower, upper, kind });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_variable(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        mut expr: LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstraintId, ModelError> {
        let name = name.into();
        if !is_valid_identifier(&name) {
            return Err(ModelError::BadIdentifier(name));
        }
        if self.constraint_index.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        self.check_expr(&expr)?;
        if !expr.is_finite() || !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        let rhs = rhs - expr.constant;
        expr.constant = 0.0;
        let id = ConstraintId(self.constraints.len());
        self.constraint_index.insert(name.clone(), id);
        self.constraints.push(Constraint { name, expr, sense, rhs });
        Ok(id)
    }

    pub fn set_objective(&mut self, sense: ObjectiveSense, expr: LinExpr) -> Result<(), ModelError> {
        self.check_expr(&expr)?;
        if !expr.is_finite() {
            return Err(ModelError::NonFinite("objective".into()));
        }
        self.objective = Objective { sense, expr };
        Ok(())
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<(), ModelError> {
        match expr.max_var() {
            Some(v) if v.0 >= self.variables.len() => Err(ModelError::UnknownVariable(v)),
            _ => Ok(()),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.constraint_index.get(name).map(|id| &self.constraints[id.0])
    }

    pub fn has_constraint(&self, name: &str) -> bool {
        self.constraint_index.contains_key(name)
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    /// Checks every constraint, bound and integrality requirement. A check
    /// fails only when its residual exceeds `tol`.
    pub fn check_feasible(&self, values: &[f64], tol: f64) -> Result<Feasibility, ModelError> {
        if values.len() < self.variables.len() {
            return Err(ModelError::MissingValue(VarId(values.len())));
        }
        let mut violated = Vec::new();
        for c in &self.constraints {
            if c.violation(values)? > tol {
                violated.push(c.name.clone());
            }
        }
        for (var, &x) in self.variables.iter().zip(values) {
            if x < var.lower - tol || x > var.upper + tol {
                violated.push(format!("bound:{}", var.name));
            }
            if var.kind.is_integral() && (x - x.round()).abs() > tol {
                violated.push(format!("integrality:{}", var.name));
            }
        }
        Ok(Feasibility { feasible: violated.is_empty(), violated })
    }

    /// Equality up to a renaming of variable ids: variables, constraint
    /// rows and the objective are compared by name. The model name is ignored.
    pub fn structurally_eq(&self, other: &Model) -> bool {
        if self.num_vars() != other.num_vars()
            || self.num_constraints() != other.num_constraints()
            || self.objective.sense != other.objective.sense
            || self.objective.expr.constant != other.objective.expr.constant
        {
            return false;
        }
        let same_vars = self.variables.iter().all(|v| other.var_id(&v.name).map(|id| other.variable(id)) == Some(v));
        let named = |m: &Model, e: &LinExpr| -> BTreeMap<String, u64> {
            e.terms().map(|(v, c)| (m.variable(v).name.clone(), c.to_bits())).collect()
        };
        same_vars
            && named(self, &self.objective.expr) == named(other, &other.objective.expr)
            && self.constraints.iter().zip(&other.constraints).all(|(a, b)| {
                a.name == b.name
                    && a.sense == b.sense
                    && a.rhs == b.rhs
                    && named(self, &a.expr) == named(other, &b.expr)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn queens_like(n: usize) -> (Model, Vec<Vec<VarId>>) {
        let mut m = Model::new("q");
        let x: Vec<Vec<VarId>> =
            (1..=n).map(|i| (1..=n).map(|j| m.add_binary(format!("x_{i}_{j}")).unwrap()).collect()).collect();
        for i in 0..n {
            m.add_constraint(format!("row_{i}"), LinExpr::sum(x[i].iter().copied()), Sense::Le, 1.0).unwrap();
            m.add_constraint(format!("col_{i}"), LinExpr::sum(x.iter().map(|r| r[i])), Sense::Le, 1.0).unwrap();
        }
        (m, x)
    }

    #[test]
    fn first_variable_gets_id_zero() {
        let mut m = Model::new("t");
        assert_eq!(m.add_binary("x_1_1").unwrap(), VarId(0));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut m = Model::new("t");
        let err = m.add_variable("y", 2.0, 1.0, VarKind::Integer).unwrap_err();
        assert!(matches!(err, ModelError::InvalidBounds { .. }));
    }

    #[test]
    fn bad_names_and_duplicates() {
        let mut m = Model::new("t");
        assert!(matches!(m.add_binary("1x"), Err(ModelError::BadIdentifier(_))));
        assert!(matches!(m.add_binary("a-b"), Err(ModelError::BadIdentifier(_))));
        assert!(matches!(m.add_binary("End"), Err(ModelError::BadIdentifier(_))));
        m.add_binary("a").unwrap();
        assert!(matches!(m.add_binary("a"), Err(ModelError::DuplicateName(_))));
        assert!(matches!(m.add_variable("b", 0.0, 2.0, VarKind::Binary), Err(ModelError::BinaryBounds(_))));
    }

    #[test]
    fn sixty_four_board_variables_are_dense() {
        let (m, x) = queens_like(8);
        let ids: Vec<usize> = x.iter().flatten().map(|v| v.0).collect();
        assert_eq!(ids, (0..64).collect::<Vec<_>>());
        assert_eq!(m.num_vars(), 64);
    }

    #[test]
    fn row_constraint_has_eight_terms() {
        let (m, _) = queens_like(8);
        assert_eq!(m.constraint_by_name("row_6").unwrap().expr.len(), 8);
    }

    #[test]
    fn constant_is_folded_into_rhs() {
        let mut m = Model::new("t");
        let x = m.add_binary("x").unwrap();
        let mut e = LinExpr::term(x, 1.0);
        e.add_constant(3.0);
        m.add_constraint("c", e, Sense::Le, 5.0).unwrap();
        let c = &m.constraints()[0];
        assert_eq!(c.rhs, 2.0);
        assert_eq!(c.expr.constant_term(), 0.0);
    }

    #[test]
    fn unknown_variable_in_constraint() {
        let mut m = Model::new("t");
        for k in 0..4 {
            m.add_binary(format!("v{k}")).unwrap();
        }
        let err = m.add_constraint("c", LinExpr::term(VarId(99), 1.0), Sense::Le, 1.0).unwrap_err();
        assert_eq!(err, ModelError::UnknownVariable(VarId(99)));
    }

    #[test]
    fn evaluate_examples() {
        let (_, x) = queens_like(8);
        let all = LinExpr::sum(x.iter().flatten().copied());
        assert_eq!(all.evaluate(&[1.0; 64]).unwrap(), 64.0);
        assert_eq!(LinExpr::new().evaluate(&[]).unwrap(), 0.0);
        let e = LinExpr::term(VarId(0), 3.0).with_term(VarId(1), 2.0);
        assert_eq!(e.evaluate(&[4.0, 0.0]).unwrap(), 12.0);
        assert_eq!(e.evaluate(&[4.0]), Err(ModelError::MissingValue(VarId(1))));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut e = LinExpr::term(VarId(2), 1.5);
        e.add_term(VarId(2), -1.5);
        assert!(e.is_empty());
        let e = LinExpr::term(VarId(1), 4.0) * 0.0;
        assert!(e.is_empty());
    }

    #[test]
    fn doubled_column_is_reported() {
        let (m, x) = queens_like(4);
        let mut values = vec![0.0; 16];
        values[x[0][1].0] = 1.0;
        values[x[2][1].0] = 1.0;
        let f = m.check_feasible(&values, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.violated, vec!["col_1".to_string()]);

        let zeros = m.check_feasible(&[0.0; 16], DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!(zeros.feasible);
    }

    #[test]
    fn bounds_and_integrality_are_checked() {
        let mut m = Model::new("t");
        m.add_variable("z", 0.0, 3.0, VarKind::Integer).unwrap();
        let f = m.check_feasible(&[2.5], 1e-6).unwrap();
        assert_eq!(f.violated, vec!["integrality:z".to_string()]);
        let f = m.check_feasible(&[4.0], 1e-6).unwrap();
        assert_eq!(f.violated, vec!["bound:z".to_string()]);
        assert!(m.check_feasible(&[], 1e-6).is_err());
    }
}
