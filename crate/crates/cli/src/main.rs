//! `optlab`: build, emit, solve and render the toolkit's models.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use optlab::bnb::{enumerate_optimal, solve, LazyCutHandler, Solution, SolveConfig, SolveStats, SolveStatus};
use optlab::ilp::Model;
use optlab::lp_io::{parse_lp, write_lp};
use optlab::puzzles::knapsack::{build_knapsack, KnapsackInstance};
use optlab::puzzles::knight::{self, build_knight_tour};
use optlab::puzzles::path::{build_shortest_path, PathInstance};
use optlab::puzzles::queens::{build_queens, build_queens_blocking, QueensModel, QueensOptions};
use optlab::puzzles::sudoku::{build_sudoku, check_unique, SudokuGrid, Uniqueness};
use optlab::puzzles::tiling::{self, build_tiling, parse_sizes, TilingInstance, TilingOptions};
use optlab::puzzles::tsp::{build_tsp, WeightedGraph};
use optlab::simplex::{solve_relaxation_in, LpStatus};
use optlab::tsp_art::{
    self, exact_tour, heuristic_tour, render_svg, sample_points, GrayImage, SplitMix64, SvgStyle, TwoOptBudget,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_UNBOUNDED: u8 = 4;

#[derive(Parser)]
#[command(name = "optlab", version, about = "Integer linear programming lab: puzzles, tours and LP files")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Write the model in LP format (including lazy cuts found while solving)
    #[arg(long, global = true, value_name = "FILE")]
    emit_lp: Option<PathBuf>,
    /// Solve only the LP relaxation
    #[arg(long, global = true)]
    relax_only: bool,
    /// Wall-clock limit for branch and bound
    #[arg(long, global = true, value_name = "SEC")]
    time_limit: Option<f64>,
    /// Node limit for branch and bound
    #[arg(long, global = true, value_name = "N")]
    node_limit: Option<usize>,
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct Diagonals {
    /// Omit the length-1 corner diagonals
    #[arg(long, conflicts_with = "keep_trivial_diagonals")]
    drop_trivial_diagonals: bool,
    /// Keep every diagonal row (the default)
    #[arg(long)]
    keep_trivial_diagonals: bool,
}

impl Diagonals {
    fn options(&self) -> QueensOptions {
        QueensOptions { drop_trivial_diagonals: self.drop_trivial_diagonals }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve an LP file
    Solve {
        file: PathBuf,
        /// Enumerate every optimal solution (binary models only)
        #[arg(long)]
        count_all: bool,
    },
    /// Place as many non-attacking queens as possible
    Queens {
        #[arg(short = 'n', default_value_t = 8)]
        n: usize,
        /// Enumerate every optimal placement
        #[arg(long)]
        count_all: bool,
        #[command(flatten)]
        diagonals: Diagonals,
    },
    /// Fewest non-attacking queens that leave no safe empty cell
    QueensBlock {
        #[arg(short = 'n', default_value_t = 8)]
        n: usize,
        #[command(flatten)]
        diagonals: Diagonals,
    },
    /// Solve a Sudoku (9 lines of 9 characters, `.` for blanks) and check uniqueness
    Sudoku {
        /// Puzzle file, `-` for standard input
        file: PathBuf,
        /// Only solve, skip the uniqueness check
        #[arg(long)]
        no_unique: bool,
    },
    /// Shortest round trip through points or a distance matrix
    Tsp {
        /// Instance file: `n`, then n lines `x y` or n matrix rows
        file: Option<PathBuf>,
        /// Random points in the unit square instead of a file
        #[arg(long, conflicts_with = "file")]
        random: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Knight's tour on an n×n board
    Knight {
        #[arg(short = 'n', default_value_t = 8)]
        n: usize,
        /// Require a closed tour (the default)
        #[arg(long, conflicts_with = "open")]
        closed: bool,
        /// Allow an open tour
        #[arg(long)]
        open: bool,
    },
    /// 0/1 knapsack from a CSV file `name,weight,utility`
    Knapsack {
        file: PathBuf,
        #[arg(long)]
        capacity: f64,
    },
    /// Tile a room with square tiles using as few tiles as possible
    Tiling {
        /// Room rows and columns
        #[arg(num_args = 0..=2, value_names = ["R", "C"])]
        dims: Vec<usize>,
        #[arg(long, conflicts_with = "dims")]
        rows: Option<usize>,
        #[arg(long, conflicts_with = "dims")]
        cols: Option<usize>,
        /// Allowed tile sizes, e.g. `1..12` or `1,2,5`
        #[arg(long, default_value = "1..12")]
        sizes: String,
        /// Add the constraint `tiles <= K`
        #[arg(long, value_name = "K")]
        max_tiles: Option<usize>,
        /// Stop at the first feasible tiling
        #[arg(long)]
        first: bool,
    },
    /// Shortest path in an arc list `u v cost`
    Path {
        file: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        target: usize,
    },
    /// Stipple a PGM image (or read points) and draw one closed tour as SVG
    Art {
        /// Grayscale image (PGM, P2 or P5)
        #[arg(long, conflicts_with = "point_file")]
        pgm: Option<PathBuf>,
        /// Point list `x y` per line instead of an image
        #[arg(long)]
        point_file: Option<PathBuf>,
        /// Number of points to sample
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        /// Solve exactly (at most 12 points)
        #[arg(long)]
        exact: bool,
        /// Cap on 2-opt moves
        #[arg(long)]
        max_moves: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        stroke_width: f64,
    },
}

/// Result of one command: what to print and how to exit.
struct Report {
    status: &'static str,
    exit: u8,
    objective: Option<f64>,
    values: BTreeMap<String, f64>,
    stats: Option<SolveStats>,
    text: String,
    extra: serde_json::Map<String, Value>,
}

impl Report {
    fn new(status: &'static str, exit: u8) -> Self {
        Report {
            status,
            exit,
            objective: None,
            values: BTreeMap::new(),
            stats: None,
            text: String::new(),
            extra: serde_json::Map::new(),
        }
    }

    fn from_solution(model: &Model, solution: &Solution) -> Self {
        let (status, exit) = status_of(solution.status);
        let mut r = Report::new(status, exit);
        r.objective = solution.objective;
        if solution.has_values() {
            r.values = named_values(model, &solution.values);
        }
        r.stats = Some(solution.stats.clone());
        r
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn json(&self) -> Value {
        let stats = self.stats.clone().unwrap_or_default();
        let mut v = json!({
            "status": self.status,
            "objective": self.objective,
            "values": self.values,
            "stats": {
                "nodes_explored": stats.nodes_explored,
                "lp_iterations_total": stats.lp_iterations_total,
                "cuts_added": stats.cuts_added,
                "wall_time_ms": stats.wall_time.as_secs_f64() * 1000.0,
            },
        });
        if let Value::Object(map) = &mut v {
            map.extend(self.extra.clone());
        }
        v
    }
}

fn status_of(status: SolveStatus) -> (&'static str, u8) {
    match status {
        SolveStatus::Optimal => ("optimal", EXIT_OK),
        SolveStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE),
        SolveStatus::Unbounded => ("unbounded", EXIT_UNBOUNDED),
        SolveStatus::LimitReached => ("limit_reached", EXIT_LIMIT),
    }
}

fn named_values(model: &Model, values: &[f64]) -> BTreeMap<String, f64> {
    model.variables().iter().zip(values).map(|(v, &x)| (v.name.clone(), x)).collect()
}

/// Shortest decimal that reads back to the same value.
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn config(common: &Common) -> Result<SolveConfig> {
    let mut c = SolveConfig::default();
    if let Some(t) = common.time_limit {
        if !(t.is_finite() && t >= 0.0) {
            bail!("--time-limit must be a non-negative number of seconds");
        }
        c = c.with_time_limit(Duration::from_secs_f64(t));
    }
    if let Some(n) = common.node_limit {
        c = c.with_node_limit(n);
    }
    Ok(c)
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin()).context("reading standard input");
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(common: &Common, model: &Model, cuts: &[optlab::ilp::Constraint]) -> Result<()> {
    if let Some(path) = &common.emit_lp {
        let mut m = model.clone();
        for c in cuts {
            m.add_constraint(c.name.clone(), c.expr.clone(), c.sense, c.rhs)?;
        }
        fs::write(path, write_lp(&m)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Relaxation only: prints the LP optimum.
fn relax(common: &Common, model: &Model) -> Result<Report> {
    emit(common, model, &[])?;
    let lp = solve_relaxation_in::<f64>(model, &config(common)?.simplex)?;
    let (status, exit) = match lp.status {
        LpStatus::Optimal => ("optimal", EXIT_OK),
        LpStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE),
        LpStatus::Unbounded => ("unbounded", EXIT_UNBOUNDED),
    };
    let mut r = Report::new(status, exit);
    r.objective = lp.objective;
    r.values = if lp.values.is_empty() { BTreeMap::new() } else { named_values(model, &lp.values) };
    r.stats = Some(SolveStats { lp_iterations_total: lp.iterations, ..SolveStats::default() });
    r.line(format!("status {status}"));
    if let Some(z) = lp.objective {
        r.line(format!("relaxation {}", fmt_num(z)));
    }
    Ok(r)
}

/// Branch and bound, with the LP emitted afterwards so lazy cuts are kept.
fn run_solve(common: &Common, model: &Model, lazy: Option<&mut dyn LazyCutHandler>) -> Result<Solution> {
    let cfg = config(common)?;
    let solution = solve(model, &cfg, lazy)?;
    emit(common, model, &solution.cuts)?;
    Ok(solution)
}

fn status_line(r: &mut Report) {
    let s = r.status;
    r.line(format!("status {s}"));
    if let Some(z) = r.objective {
        r.line(format!("optimum {}", fmt_num(z)));
    }
}

fn count_all(common: &Common, model: &Model, render: impl Fn(&[f64]) -> String) -> Result<Report> {
    emit(common, model, &[])?;
    let e = enumerate_optimal(model, &config(common)?, usize::MAX)?;
    let mut r = match e.solutions.first() {
        Some(first) => Report::from_solution(model, first),
        None => Report::new(status_of(e.status).0, status_of(e.status).1),
    };
    if !e.complete {
        (r.status, r.exit) = ("limit_reached", EXIT_LIMIT);
    }
    let mut stats = SolveStats::default();
    for s in &e.solutions {
        stats.nodes_explored += s.stats.nodes_explored;
        stats.lp_iterations_total += s.stats.lp_iterations_total;
        stats.wall_time += s.stats.wall_time;
    }
    r.stats = Some(stats);
    status_line(&mut r);
    r.line(format!("solutions {}", e.solutions.len()));
    if !common.json {
        for (k, s) in e.solutions.iter().enumerate() {
            r.line(format!("# {}", k + 1));
            r.text.push_str(&render(&s.values));
        }
    }
    r.extra.insert("solutions".into(), json!(e.solutions.len()));
    r.extra.insert("complete".into(), json!(e.complete));
    Ok(r)
}

fn queens_cmd(common: &Common, q: &QueensModel, count: bool) -> Result<Report> {
    if common.relax_only {
        return relax(common, &q.model);
    }
    let render = |values: &[f64]| q.decode_values(values).render();
    if count {
        return count_all(common, &q.model, render);
    }
    let s = run_solve(common, &q.model, None)?;
    let mut r = Report::from_solution(&q.model, &s);
    status_line(&mut r);
    if s.has_values() {
        let board = q.decode(&s);
        r.text.push_str(&board.render());
        r.extra.insert("queens".into(), json!(board.queens.iter().collect::<Vec<_>>()));
    }
    Ok(r)
}

fn run(cli: &Cli) -> Result<Report> {
    let common = &cli.common;
    match &cli.command {
        Command::Solve { file, count_all: count } => {
            let model = parse_lp(&read_input(file)?).with_context(|| format!("parsing {}", file.display()))?;
            if common.relax_only {
                return relax(common, &model);
            }
            if *count {
                return count_all(common, &model, |_| String::new());
            }
            let s = run_solve(common, &model, None)?;
            let mut r = Report::from_solution(&model, &s);
            status_line(&mut r);
            if !common.json {
                for (name, x) in &r.values.clone() {
                    if *x != 0.0 {
                        r.line(format!("{name} {}", fmt_num(*x)));
                    }
                }
            }
            Ok(r)
        }
        Command::Queens { n, count_all: count, diagonals } => {
            let q = build_queens(*n, diagonals.options())?;
            queens_cmd(common, &q, *count)
        }
        Command::QueensBlock { n, diagonals } => {
            let q = build_queens_blocking(*n, diagonals.options())?;
            queens_cmd(common, &q, false)
        }
        Command::Sudoku { file, no_unique } => {
            let grid = SudokuGrid::parse(&read_input(file)?)?;
            let s = build_sudoku(&grid)?;
            if common.relax_only {
                return relax(common, &s.model);
            }
            if *no_unique || common.emit_lp.is_some() {
                let sol = run_solve(common, &s.model, None)?;
                let mut r = Report::from_solution(&s.model, &sol);
                status_line(&mut r);
                if sol.has_values() {
                    r.text.push_str(&s.decode_values(&sol.values).to_string());
                }
                return Ok(r);
            }
            let mut r = match check_unique(&grid, &config(common)?)? {
                Uniqueness::Unique(g) => {
                    let mut r = Report::new("optimal", EXIT_OK);
                    r.line("unique");
                    r.text.push_str(&g.to_string());
                    r.extra.insert("grid".into(), json!(g.to_string()));
                    r.extra.insert("unique".into(), json!(true));
                    r
                }
                Uniqueness::Multiple { first, second } => {
                    let mut r = Report::new("optimal", EXIT_OK);
                    r.line("multiple");
                    r.text.push_str(&first.to_string());
                    r.line("");
                    r.text.push_str(&second.to_string());
                    r.extra.insert("grid".into(), json!(first.to_string()));
                    r.extra.insert("second".into(), json!(second.to_string()));
                    r.extra.insert("unique".into(), json!(false));
                    r
                }
                Uniqueness::Infeasible => {
                    let mut r = Report::new("infeasible", EXIT_INFEASIBLE);
                    r.line("infeasible");
                    r
                }
            };
            r.objective = (r.exit == EXIT_OK).then_some(0.0);
            Ok(r)
        }
        Command::Tsp { file, random, seed } => {
            let graph = match (file, random) {
                (Some(f), _) => WeightedGraph::parse(&read_input(f)?)?,
                (None, Some(n)) => {
                    let mut rng = SplitMix64::new(*seed);
                    let pts: Vec<_> = (0..*n).map(|_| (rng.next_f64(), rng.next_f64())).collect();
                    WeightedGraph::from_points(&pts)?
                }
                (None, None) => bail!("tsp needs an instance file or --random N"),
            };
            let t = build_tsp(&graph)?;
            if common.relax_only {
                return relax(common, &t.model);
            }
            let mut handler = t.subtour_handler();
            let s = run_solve(common, &t.model, Some(&mut handler))?;
            let mut r = Report::from_solution(&t.model, &s);
            status_line(&mut r);
            if s.has_values() {
                let tour = t.decode_tour(&s);
                r.line(format!("tour {}", tour.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")));
                r.extra.insert("tour".into(), json!(tour));
            }
            Ok(r)
        }
        Command::Knight { n, open, .. } => {
            let closed = !*open;
            let k = build_knight_tour(*n, closed)?;
            if common.relax_only {
                return relax(common, &k.cycle.model);
            }
            let mut handler = k.subtour_handler();
            let s = run_solve(common, &k.cycle.model, Some(&mut handler))?;
            let mut r = Report::from_solution(&k.cycle.model, &s);
            status_line(&mut r);
            if s.has_values() {
                let cells = k.decode(&s);
                r.text.push_str(&knight::render(*n, &cells));
                r.extra.insert("cells".into(), json!(cells));
            }
            Ok(r)
        }
        Command::Knapsack { file, capacity } => {
            let inst = KnapsackInstance::from_csv(&read_input(file)?, *capacity)?;
            let k = build_knapsack(&inst)?;
            if common.relax_only {
                return relax(common, &k.model);
            }
            let s = run_solve(common, &k.model, None)?;
            let mut r = Report::from_solution(&k.model, &s);
            status_line(&mut r);
            if s.has_values() {
                let names = k.selected_names(&s);
                r.line(format!("weight {}", fmt_num(inst.total_weight(&k.decode(&s)))));
                for name in &names {
                    r.line(format!("take {name}"));
                }
                r.extra.insert("selected".into(), json!(names));
            }
            Ok(r)
        }
        Command::Tiling { dims, rows, cols, sizes, max_tiles, first } => {
            let (rows, cols) = match (dims.as_slice(), rows, cols) {
                ([r, c], None, None) => (*r, *c),
                ([], Some(r), Some(c)) => (*r, *c),
                _ => bail!("tiling needs `R C` or both --rows and --cols"),
            };
            let sizes = parse_sizes(sizes).map_err(anyhow::Error::msg)?;
            let inst = TilingInstance::new(rows, cols, sizes)?;
            let t = build_tiling(&inst, TilingOptions { max_tiles: *max_tiles })?;
            if common.relax_only {
                return relax(common, &t.model);
            }
            let mut cfg = config(common)?;
            cfg.stop_at_first_incumbent = *first;
            let s = solve(&t.model, &cfg, None)?;
            emit(common, &t.model, &s.cuts)?;
            let mut r = Report::from_solution(&t.model, &s);
            if *first && s.status == SolveStatus::Optimal {
                r.status = "feasible";
            }
            status_line(&mut r);
            if s.has_values() {
                let placements = t.decode(&s);
                r.line(format!("tiles {}", placements.len()));
                for p in &placements {
                    r.line(format!("{}x{} at {} {}", p.size, p.size, p.row, p.col));
                }
                r.text.push_str(&tiling::render(&inst, &placements));
                r.extra.insert(
                    "placements".into(),
                    json!(placements.iter().map(|p| [p.size, p.row, p.col]).collect::<Vec<_>>()),
                );
            }
            Ok(r)
        }
        Command::Path { file, source, target } => {
            let inst = PathInstance::parse(&read_input(file)?, *source, *target)?;
            let p = build_shortest_path(&inst)?;
            if common.relax_only {
                return relax(common, &p.model);
            }
            let s = run_solve(common, &p.model, None)?;
            let mut r = Report::from_solution(&p.model, &s);
            status_line(&mut r);
            if s.has_values() {
                let arcs = p.decode(&s);
                let mut nodes = vec![inst.source];
                nodes.extend(arcs.iter().map(|&k| inst.arcs[k].to));
                r.line(format!("path {}", nodes.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")));
                r.extra.insert("path".into(), json!(nodes));
            }
            Ok(r)
        }
        Command::Art { pgm, point_file, points, seed, svg, exact, max_moves, stroke_width } => {
            let pts = match (pgm, point_file) {
                (Some(path), _) => {
                    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                    sample_points(&GrayImage::from_pgm(&bytes)?, *points, *seed)?.points
                }
                (None, Some(path)) => tsp_art::parse_points(&read_input(path)?)?,
                (None, None) => bail!("art needs --pgm FILE or --point-file FILE"),
            };
            let tour = if *exact {
                exact_tour(&pts, tsp_art::DEFAULT_EXACT_CAP)?
            } else {
                heuristic_tour(&pts, TwoOptBudget { max_moves: *max_moves, time: config(common)?.time_limit })?
            };
            let mut r = Report::new("optimal", EXIT_OK);
            if !*exact {
                r.status = "feasible";
            }
            r.objective = Some(tour.length);
            r.line(format!("points {}", pts.len()));
            r.line(format!("length {}", fmt_num(tour.length)));
            let style = SvgStyle { stroke_width: *stroke_width, ..SvgStyle::default() };
            let doc = render_svg(&pts, &tour, &style);
            match svg {
                Some(path) => fs::write(path, &doc).with_context(|| format!("writing {}", path.display()))?,
                None if !common.json => r.text.push_str(&doc),
                None => {}
            }
            r.extra.insert("tour".into(), json!(tour.order));
            Ok(r)
        }
    }
}

fn init_logging() {
    let level = match std::env::var("OPTLAB_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).target(env_logger::Target::Stderr).init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(report) => {
            if cli.common.json {
                println!("{}", report.json());
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
