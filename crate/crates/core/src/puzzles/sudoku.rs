//! 9×9 Sudoku with binaries `x_{r}_{c}_{v}`: cell (r, c) holds value v.

use std::fmt;

use crate::bnb::{solve, SolveConfig, SolveStatus};
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId, VarKind};
use crate::puzzles::{invalid, PuzzleError};

/// Values 1..=9, 0 for blank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SudokuGrid {
    pub cells: [[u8; 9]; 9],
}

impl SudokuGrid {
    pub fn empty() -> Self {
        SudokuGrid { cells: [[0; 9]; 9] }
    }

    /// Reads 9 lines of 9 characters; digits 1-9 are givens, `.` or `0`
    /// blanks. Blank lines and `#` comments are skipped, spaces and `|`
    /// separators inside a line are ignored.
    pub fn parse(text: &str) -> Result<Self, PuzzleError> {
        let mut grid = Self::empty();
        let mut r = 0;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            let chars: Vec<char> = line.chars().filter(|c| !c.is_whitespace() && *c != '|').collect();
            if chars.is_empty() || chars.iter().all(|&c| c == '-' || c == '+') {
                continue;
            }
            if r == 9 {
                return Err(invalid("more than 9 rows"));
            }
            if chars.len() != 9 {
                return Err(invalid(format!("row {} has {} cells", r + 1, chars.len())));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                grid.cells[r][c] = match ch {
                    '.' | '0' => 0,
                    '1'..='9' => ch as u8 - b'0',
                    other => return Err(invalid(format!("row {}: unexpected `{other}`", r + 1))),
                };
            }
            r += 1;
        }
        if r != 9 {
            return Err(invalid(format!("expected 9 rows, found {r}")));
        }
        Ok(grid)
    }

    pub fn givens(&self) -> usize {
        self.cells.iter().flatten().filter(|&&v| v != 0).count()
    }

    pub fn is_complete(&self) -> bool {
        self.givens() == 81
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::empty();
        for r in 0..9 {
            for c in 0..9 {
                t.cells[c][r] = self.cells[r][c];
            }
        }
        t
    }

    /// No value repeats in a row, column or block (blanks ignored).
    pub fn is_consistent(&self) -> bool {
        units().all(|unit| {
            let mut seen = [false; 10];
            unit.iter().all(|&(r, c)| {
                let v = self.cells[r][c] as usize;
                v == 0 || !std::mem::replace(&mut seen[v], true)
            })
        })
    }

    /// Complete and consistent.
    pub fn is_solved(&self) -> bool {
        self.is_complete() && self.is_consistent()
    }

    /// Every given of `self` appears unchanged in `other`.
    pub fn is_completed_by(&self, other: &SudokuGrid) -> bool {
        (0..9).all(|r| (0..9).all(|c| self.cells[r][c] == 0 || self.cells[r][c] == other.cells[r][c]))
    }
}

impl fmt::Display for SudokuGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.cells {
            for &v in row {
                write!(f, "{}", if v == 0 { '.' } else { (b'0' + v) as char })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Rows, columns and blocks as lists of 0-based cells.
fn units() -> impl Iterator<Item = [(usize, usize); 9]> {
    (0..27).map(|u| {
        std::array::from_fn(|k| match u / 9 {
            0 => (u % 9, k),
            1 => (k, u % 9),
            _ => {
                let b = u % 9;
                (3 * (b / 3) + k / 3, 3 * (b % 3) + k % 3)
            }
        })
    })
}

#[derive(Debug, Clone)]
pub struct SudokuModel {
    pub model: Model,
    pub grid: SudokuGrid,
    /// `x[r][c][v - 1]`, 0-based `r` and `c`.
    pub x: Vec<Vec<Vec<VarId>>>,
}

/// Builds the feasibility model. Variables of given cells are fixed through
/// their bounds; since a binary must keep bounds [0, 1], those are declared
/// integer with bounds [1, 1] or [0, 0].
pub fn build_sudoku(grid: &SudokuGrid) -> Result<SudokuModel, PuzzleError> {
    if grid.cells.iter().flatten().any(|&v| v > 9) {
        return Err(invalid("cell values must be 0..=9"));
    }
    if !grid.is_consistent() {
        return Err(invalid("givens repeat a value in a row, column or block"));
    }
    let mut model = Model::new("sudoku");
    let mut x = vec![vec![Vec::with_capacity(9); 9]; 9];
    for r in 0..9 {
        for c in 0..9 {
            let given = grid.cells[r][c];
            for v in 1..=9u8 {
                let name = format!("x_{}_{}_{}", r + 1, c + 1, v);
                let id = if given == 0 {
                    model.add_binary(name)?
                } else {
                    let b = if v == given { 1.0 } else { 0.0 };
                    model.add_variable(name, b, b, VarKind::Integer)?
                };
                x[r][c].push(id);
            }
        }
    }
    for r in 0..9 {
        for c in 0..9 {
            model.add_constraint(
                format!("cell_{}_{}", r + 1, c + 1),
                LinExpr::sum(x[r][c].iter().copied()),
                Sense::Eq,
                1.0,
            )?;
        }
    }
    for v in 0..9 {
        for r in 0..9 {
            model.add_constraint(
                format!("row_{}_{}", r + 1, v + 1),
                LinExpr::sum((0..9).map(|c| x[r][c][v])),
                Sense::Eq,
                1.0,
            )?;
        }
    }
    for v in 0..9 {
        for c in 0..9 {
            model.add_constraint(
                format!("col_{}_{}", c + 1, v + 1),
                LinExpr::sum((0..9).map(|r| x[r][c][v])),
                Sense::Eq,
                1.0,
            )?;
        }
    }
    for v in 0..9 {
        for b in 0..9 {
            let cells = (0..9).map(|k| x[3 * (b / 3) + k / 3][3 * (b % 3) + k % 3][v]);
            model.add_constraint(format!("box_{}_{}", b + 1, v + 1), LinExpr::sum(cells), Sense::Eq, 1.0)?;
        }
    }
    model.set_objective(ObjectiveSense::Minimize, LinExpr::new())?;
    Ok(SudokuModel { model, grid: *grid, x })
}

impl SudokuModel {
    pub fn decode_values(&self, values: &[f64]) -> SudokuGrid {
        let mut g = SudokuGrid::empty();
        for r in 0..9 {
            for c in 0..9 {
                if let Some(v) = (0..9).find(|&v| values[self.x[r][c][v].0] > 0.5) {
                    g.cells[r][c] = v as u8 + 1;
                }
            }
        }
        g
    }

    /// Variables equal to one in the solution `grid`.
    fn ones(&self, grid: &SudokuGrid) -> Vec<VarId> {
        let mut out = Vec::with_capacity(81);
        for r in 0..9 {
            for c in 0..9 {
                out.push(self.x[r][c][grid.cells[r][c] as usize - 1]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Uniqueness {
    Unique(SudokuGrid),
    Multiple { first: SudokuGrid, second: SudokuGrid },
    Infeasible,
}

/// Solves `grid`, then excludes the solution with `Σ_{ones} x ≤ 80` and
/// solves again.
pub fn check_unique(grid: &SudokuGrid, config: &SolveConfig) -> Result<Uniqueness, PuzzleError> {
    let mut s = build_sudoku(grid)?;
    let config = SolveConfig { stop_at_first_incumbent: true, ..config.clone() };
    let first = solve(&s.model, &config, None)?;
    match first.status {
        SolveStatus::Infeasible => return Ok(Uniqueness::Infeasible),
        SolveStatus::LimitReached if !first.has_values() => {
            return Err(invalid("limit reached before a first solution was found"))
        }
        _ => {}
    }
    let first = s.decode_values(&first.values);
    let ones = s.ones(&first);
    s.model.add_constraint("no_good", LinExpr::sum(ones), Sense::Le, 80.0)?;
    let second = solve(&s.model, &config, None)?;
    match second.status {
        SolveStatus::Infeasible => Ok(Uniqueness::Unique(first)),
        _ if second.has_values() => Ok(Uniqueness::Multiple { first, second: s.decode_values(&second.values) }),
        _ => Err(invalid("limit reached before uniqueness was decided")),
    }
}
