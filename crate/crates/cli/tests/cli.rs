use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn optlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optlab")).args(args).env("OPTLAB_LOG", "quiet").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = optlab(&all);
    (serde_json::from_slice(&out.stdout).unwrap(), out.status.code().unwrap())
}

#[test]
fn eight_queens_count() {
    let out = optlab(&["queens", "-n", "8", "--count-all"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("optimum 8\n"), "{text}");
    assert!(text.contains("solutions 92\n"));
}

#[test]
fn queens_board_rendering() {
    let out = optlab(&["queens", "-n", "4"]);
    let text = stdout(&out);
    let board: Vec<&str> = text.lines().filter(|l| l.len() == 4 && l.chars().all(|c| c == 'Q' || c == '.')).collect();
    assert_eq!(board.len(), 4);
    assert_eq!(text.matches('Q').count(), 4);
}

#[test]
fn relax_only_infeasible_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lp");
    fs::write(&path, "Minimize\nobj: x\nSubject To\nlo: x >= 2\nhi: x <= 1\nEnd\n").unwrap();
    let out = optlab(&["solve", path.to_str().unwrap(), "--relax-only"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("status infeasible"));
}

#[test]
fn exit_codes() {
    assert_eq!(optlab(&["knight", "-n", "5", "--closed"]).status.code(), Some(2));
    assert_eq!(optlab(&["queens", "-n", "8", "--node-limit", "1"]).status.code(), Some(3));
    assert_eq!(optlab(&["queens", "--bogus"]).status.code(), Some(1));
    assert_eq!(optlab(&["solve", "/nonexistent/model.lp"]).status.code(), Some(1));
    let usage = optlab(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("frobnicate"));
}

#[test]
fn json_fields_always_present() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    fs::write(&pts, "0 0\n4 0\n4 3\n0 3\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["queens", "-n", "5"],
        vec!["knight", "-n", "5", "--closed"],
        vec!["queens", "-n", "6", "--count-all"],
        vec!["queens", "-n", "6", "--relax-only"],
        vec!["art", "--point-file", pts.to_str().unwrap()],
    ];
    for args in runs {
        let (v, _) = json(&args);
        for field in ["status", "objective", "values", "stats"] {
            assert!(v.get(field).is_some(), "{args:?}: missing {field}");
        }
        for field in ["nodes_explored", "lp_iterations_total", "cuts_added", "wall_time_ms"] {
            assert!(v["stats"].get(field).is_some(), "{args:?}: missing stats.{field}");
        }
    }
    let (v, code) = json(&["queens", "-n", "5"]);
    assert_eq!((v["status"].as_str(), v["objective"].as_f64(), code), (Some("optimal"), Some(5.0), 0));
    assert_eq!(v["values"].as_object().unwrap().len(), 25);
}

/// Writes the model with `--emit-lp`, then solves the file and compares
/// objectives.
fn round_trip(dir: &Path, name: &str, args: &[&str]) {
    let lp = dir.join(format!("{name}.lp"));
    let mut all = args.to_vec();
    all.extend(["--emit-lp", lp.to_str().unwrap()]);
    let (direct, code) = json(&all);
    assert_eq!(code, 0, "{name}: {direct}");
    let (from_file, code) = json(&["solve", lp.to_str().unwrap()]);
    assert_eq!(code, 0, "{name}: {from_file}");
    assert_eq!(direct["objective"], from_file["objective"], "{name}");
}

#[test]
fn emitted_models_solve_to_the_same_objective() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let write = |file: &str, text: &str| {
        let p = d.join(file);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let sudoku = write(
        "s.txt",
        "53..7....\n6..195...\n.98....6.\n8...6...3\n4..8.3..1\n7...2...6\n.6....28.\n...419..5\n....8..79\n",
    );
    let tsp = write("t.txt", "6\n0 0\n1 0\n0 1\n10 0\n11 0\n10 1\n");
    let knap = write("k.csv", "name,weight,utility\na,12,4\nb,2,2\nc,1,1\nd,1,2\ne,4,10\n");
    let path = write("p.txt", "0 1 4\n0 2 1\n2 1 2\n1 3 1\n2 3 5\n");
    round_trip(d, "queens", &["queens", "-n", "6"]);
    round_trip(d, "block", &["queens-block", "-n", "5"]);
    round_trip(d, "sudoku", &["sudoku", &sudoku]);
    round_trip(d, "tsp", &["tsp", &tsp]);
    round_trip(d, "random_tsp", &["tsp", "--random", "7", "--seed", "3"]);
    round_trip(d, "knight", &["knight", "-n", "6", "--closed"]);
    round_trip(d, "knapsack", &["knapsack", &knap, "--capacity", "15"]);
    round_trip(d, "tiling", &["tiling", "5", "5", "--sizes", "1..4"]);
    round_trip(d, "path", &["path", &path, "--source", "0", "--target", "3"]);
}

#[test]
fn emitted_tour_model_keeps_lazy_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("t.txt");
    fs::write(&inst, "6\n0 0\n1 0\n0 1\n10 0\n11 0\n10 1\n").unwrap();
    let lp = dir.path().join("t.lp");
    optlab(&["tsp", inst.to_str().unwrap(), "--emit-lp", lp.to_str().unwrap()]);
    assert!(fs::read_to_string(&lp).unwrap().contains("lazy_1:"));
}

#[test]
fn sudoku_uniqueness_report() {
    let dir = tempfile::tempdir().unwrap();
    let open = dir.path().join("open.txt");
    fs::write(&open, format!("123456789\n456789123\n789123456\n{}", ".........\n".repeat(6))).unwrap();
    let (v, code) = json(&["sudoku", open.to_str().unwrap()]);
    assert_eq!((code, v["unique"].as_bool()), (0, Some(false)));
    assert_ne!(v["grid"], v["second"]);
}

#[test]
fn tiling_eleven_tiles() {
    let out =
        optlab(&["tiling", "13", "13", "--sizes", "1..12", "--max-tiles", "11", "--first", "--time-limit", "600"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("tiles 11\n"), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains(" at ")).count(), 11);
}

#[test]
fn art_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("img.pgm");
    let mut bytes = b"P5\n16 16\n255\n".to_vec();
    bytes.extend((0..256).map(|k| if k % 16 < 8 { 0u8 } else { 255 }));
    fs::write(&pgm, bytes).unwrap();
    let svg = dir.path().join("out.svg");
    let args = ["art", "--pgm", pgm.to_str().unwrap(), "--points", "40", "--seed", "5", "--svg", svg.to_str().unwrap()];
    assert_eq!(optlab(&args).status.code(), Some(0));
    let first = fs::read_to_string(&svg).unwrap();
    assert!(first.starts_with("<?xml") && first.contains("<path d=\"M"));
    optlab(&args);
    assert_eq!(fs::read_to_string(&svg).unwrap(), first);
}
