//! Tiling a rectangular room with square tiles: every cell covered exactly
//! once, as few tiles as possible.

use crate::bnb::Solution;
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId};
use crate::puzzles::{content_lines, invalid, parse_num, PuzzleError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingInstance {
    pub rows: usize,
    pub cols: usize,
    pub sizes: Vec<usize>,
}

impl TilingInstance {
    pub fn new(rows: usize, cols: usize, mut sizes: Vec<usize>) -> Result<Self, PuzzleError> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("room {rows}x{cols} is empty")));
        }
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.is_empty() {
            return Err(invalid("no tile sizes"));
        }
        if let Some(&a) = sizes.iter().find(|&&a| a == 0 || a > rows.min(cols)) {
            return Err(invalid(format!("tile size {a} does not fit a {rows}x{cols} room")));
        }
        Ok(TilingInstance { rows, cols, sizes })
    }

    /// Reads `R C` on the first line followed by tile sizes (whitespace or
    /// comma separated, `a..b` ranges allowed).
    pub fn parse(text: &str) -> Result<Self, PuzzleError> {
        let mut lines = content_lines(text);
        let (line, head) = lines.next().ok_or_else(|| invalid("empty tiling instance"))?;
        let dims: Vec<&str> = head.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(invalid(format!("line {line}: expected `R C`")));
        }
        let rows = parse_num(dims[0], line)?;
        let cols = parse_num(dims[1], line)?;
        let mut sizes = Vec::new();
        for (line, rest) in lines {
            for token in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                sizes.extend(parse_sizes(token).map_err(|e| invalid(format!("line {line}: {e}")))?);
            }
        }
        Self::new(rows, cols, sizes)
    }
}

/// Parses `3`, `1..12` or `1,2,5..7` into a size list.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad size range `{part}`"))?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad size range `{part}`"))?;
            if a > b {
                return Err(format!("empty size range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad size `{part}`"))?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Placement {
    pub size: usize,
    /// 1-based top row.
    pub row: usize,
    /// 1-based left column.
    pub col: usize,
}

impl Placement {
    pub fn covers(&self, r: usize, c: usize) -> bool {
        (self.row..self.row + self.size).contains(&r) && (self.col..self.col + self.size).contains(&c)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TilingOptions {
    /// Adds `Σ x ≤ max_tiles` as the row `tile_cap`.
    pub max_tiles: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TilingModel {
    pub model: Model,
    pub instance: TilingInstance,
    pub placements: Vec<(Placement, VarId)>,
}

/// Number of anchor positions over all sizes.
pub fn placement_count(instance: &TilingInstance) -> usize {
    instance.sizes.iter().map(|&a| (instance.rows - a + 1) * (instance.cols - a + 1)).sum()
}

pub fn build_tiling(instance: &TilingInstance, options: TilingOptions) -> Result<TilingModel, PuzzleError> {
    let (rows, cols) = (instance.rows, instance.cols);
    let mut model = Model::new("tiling");
    let mut placements = Vec::with_capacity(placement_count(instance));
    for &a in &instance.sizes {
        for r in 1..=rows + 1 - a {
            for c in 1..=cols + 1 - a {
                let v = model.add_binary(format!("x_{a}_{r}_{c}"))?;
                placements.push((Placement { size: a, row: r, col: c }, v));
            }
        }
    }
    for r in 1..=rows {
        for c in 1..=cols {
            let cover = LinExpr::sum(placements.iter().filter(|(p, _)| p.covers(r, c)).map(|&(_, v)| v));
            model.add_constraint(format!("cover_{r}_{c}"), cover, Sense::Eq, 1.0)?;
        }
    }
    let all = LinExpr::sum(placements.iter().map(|&(_, v)| v));
    if let Some(k) = options.max_tiles {
        model.add_constraint("tile_cap", all.clone(), Sense::Le, k as f64)?;
    }
    model.set_objective(ObjectiveSense::Minimize, all)?;
    Ok(TilingModel { model, instance: instance.clone(), placements })
}

impl TilingModel {
    pub fn decode(&self, solution: &Solution) -> Vec<Placement> {
        self.placements.iter().filter(|&&(_, v)| solution.is_one(v)).map(|&(p, _)| p).collect()
    }
}

/// Every cell of the room is covered by exactly one placement, all
/// placements lie inside the room and use allowed sizes.
pub fn is_exact_cover(instance: &TilingInstance, placements: &[Placement]) -> bool {
    let mut count = vec![0u32; instance.rows * instance.cols];
    for p in placements {
        if !instance.sizes.contains(&p.size)
            || p.row == 0
            || p.col == 0
            || p.row + p.size - 1 > instance.rows
            || p.col + p.size - 1 > instance.cols
        {
            return false;
        }
        for r in p.row..p.row + p.size {
            for c in p.col..p.col + p.size {
                count[(r - 1) * instance.cols + c - 1] += 1;
            }
        }
    }
    count.iter().all(|&k| k == 1)
}

/// Grid of tile numbers (1-based, in list order) for display.
pub fn render(instance: &TilingInstance, placements: &[Placement]) -> String {
    let mut grid = vec![vec![0usize; instance.cols]; instance.rows];
    for (k, p) in placements.iter().enumerate() {
        for row in grid.iter_mut().skip(p.row - 1).take(p.size) {
            for cell in row.iter_mut().skip(p.col - 1).take(p.size) {
                *cell = k + 1;
            }
        }
    }
    let width = placements.len().to_string().len();
    let mut out = String::new();
    for row in grid {
        let line: Vec<String> = row.iter().map(|k| format!("{k:>width$}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
