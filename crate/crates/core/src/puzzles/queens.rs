//! Non-attacking queens and the minimal blocking configuration.
//!
//! Cells are `x_{i}_{j}` with 1-based row `i` and column `j`. Up-diagonals
//! are the cells with equal `i + j`, down-diagonals those with equal `i − j`.

use std::collections::BTreeSet;

use crate::bnb::Solution;
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId};
use crate::puzzles::PuzzleError;

#[derive(Debug, Clone, Copy, Default)]
pub struct QueensOptions {
    /// Omit the two length-1 corner diagonals of each direction; their `≤ 1`
    /// rows are implied by the binary bounds.
    pub drop_trivial_diagonals: bool,
}

#[derive(Debug, Clone)]
pub struct QueensModel {
    pub model: Model,
    pub n: usize,
    /// `cells[i][j]` is the variable of row `i + 1`, column `j + 1`.
    pub cells: Vec<Vec<VarId>>,
}

/// 1-based queen positions on an `n × n` board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueensBoard {
    pub n: usize,
    pub queens: BTreeSet<(usize, usize)>,
}

impl QueensBoard {
    pub fn new(n: usize, queens: impl IntoIterator<Item = (usize, usize)>) -> Self {
        QueensBoard { n, queens: queens.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.queens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queens.is_empty()
    }

    /// No two queens share a row, column or diagonal.
    pub fn is_non_attacking(&self) -> bool {
        let q: Vec<_> = self.queens.iter().collect();
        q.iter().enumerate().all(|(a, &&p)| q[a + 1..].iter().all(|&&r| !attacks(p, r)))
    }

    /// Every empty cell is attacked, so no further queen fits without
    /// being attacked.
    pub fn is_blocking(&self) -> bool {
        (1..=self.n).all(|i| {
            (1..=self.n).all(|j| self.queens.contains(&(i, j)) || self.queens.iter().any(|&q| attacks(q, (i, j))))
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.n + 1));
        for i in 1..=self.n {
            for j in 1..=self.n {
                out.push(if self.queens.contains(&(i, j)) { 'Q' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Two distinct cells on a common line.
pub fn attacks(a: (usize, usize), b: (usize, usize)) -> bool {
    a != b
        && (a.0 == b.0
            || a.1 == b.1
            || a.0 + a.1 == b.0 + b.1
            || a.0 as isize - a.1 as isize == b.0 as isize - b.1 as isize)
}

fn signed_name(k: isize) -> String {
    if k < 0 {
        format!("m{}", -k)
    } else {
        k.to_string()
    }
}

fn board(n: usize, name: &str) -> Result<(Model, Vec<Vec<VarId>>), PuzzleError> {
    if n < 1 {
        return Err(PuzzleError::InvalidSize(n));
    }
    let mut model = Model::new(name);
    let mut cells = Vec::with_capacity(n);
    for i in 1..=n {
        let row = (1..=n).map(|j| model.add_binary(format!("x_{i}_{j}"))).collect::<Result<Vec<_>, _>>()?;
        cells.push(row);
    }
    Ok((model, cells))
}

fn add_line_constraints(model: &mut Model, cells: &[Vec<VarId>], options: QueensOptions) -> Result<(), PuzzleError> {
    let n = cells.len();
    for i in 0..n {
        model.add_constraint(format!("row_{}", i + 1), LinExpr::sum(cells[i].iter().copied()), Sense::Le, 1.0)?;
    }
    for j in 0..n {
        model.add_constraint(format!("col_{}", j + 1), LinExpr::sum(cells.iter().map(|r| r[j])), Sense::Le, 1.0)?;
    }
    let keep = |len: usize| len > 1 || !options.drop_trivial_diagonals;
    for k in 2..=2 * n {
        let line: Vec<VarId> =
            (1..=n).filter(|&i| k > i && k - i >= 1 && k - i <= n).map(|i| cells[i - 1][k - i - 1]).collect();
        if keep(line.len()) {
            model.add_constraint(format!("up_{k}"), LinExpr::sum(line), Sense::Le, 1.0)?;
        }
    }
    let n_i = n as isize;
    for k in -(n_i - 1)..=(n_i - 1) {
        let line: Vec<VarId> = (1..=n_i)
            .filter(|&i| i - k >= 1 && i - k <= n_i)
            .map(|i| cells[(i - 1) as usize][(i - k - 1) as usize])
            .collect();
        if keep(line.len()) {
            model.add_constraint(format!("down_{}", signed_name(k)), LinExpr::sum(line), Sense::Le, 1.0)?;
        }
    }
    Ok(())
}

/// Maximize the number of pairwise non-attacking queens on an `n × n` board.
pub fn build_queens(n: usize, options: QueensOptions) -> Result<QueensModel, PuzzleError> {
    let (mut model, cells) = board(n, "queens")?;
    add_line_constraints(&mut model, &cells, options)?;
    model.set_objective(ObjectiveSense::Maximize, LinExpr::sum(cells.iter().flatten().copied()))?;
    Ok(QueensModel { model, n, cells })
}

/// Fewest non-attacking queens such that every empty cell is attacked.
pub fn build_queens_blocking(n: usize, options: QueensOptions) -> Result<QueensModel, PuzzleError> {
    let (mut model, cells) = board(n, "queens_blocking")?;
    add_line_constraints(&mut model, &cells, options)?;
    for i in 1..=n {
        for j in 1..=n {
            let mut cover = LinExpr::term(cells[i - 1][j - 1], 1.0);
            for k in 1..=n {
                for l in 1..=n {
                    if attacks((i, j), (k, l)) {
                        cover.add_term(cells[k - 1][l - 1], 1.0);
                    }
                }
            }
            model.add_constraint(format!("cover_{i}_{j}"), cover, Sense::Ge, 1.0)?;
        }
    }
    model.set_objective(ObjectiveSense::Minimize, LinExpr::sum(cells.iter().flatten().copied()))?;
    Ok(QueensModel { model, n, cells })
}

impl QueensModel {
    pub fn decode(&self, solution: &Solution) -> QueensBoard {
        self.decode_values(&solution.values)
    }

    pub fn decode_values(&self, values: &[f64]) -> QueensBoard {
        let queens = self.cells.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().filter(|(_, v)| values[v.0] > 0.5).map(move |(j, _)| (i + 1, j + 1))
        });
        QueensBoard::new(self.n, queens)
    }

    /// Dense assignment placing queens on the given 1-based cells.
    pub fn assignment(&self, board: &QueensBoard) -> Vec<f64> {
        let mut values = vec![0.0; self.model.num_vars()];
        for &(i, j) in &board.queens {
            values[self.cells[i - 1][j - 1].0] = 1.0;
        }
        values
    }
}
