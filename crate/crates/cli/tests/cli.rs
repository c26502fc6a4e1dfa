use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CANTOR: &str = "huntspec v1\nplus (-inf,inf) path=cantor(64) I=(-inf,inf) anchor=0\n";
const CONST: &str = "huntspec v1\nconst (-inf,inf)\n";
const SPACE_DRIFT: &str = "huntspec v1\n\
minus (-inf,0) path=linear(-1,0) I=(0,inf)\n\
const [0,0]\n\
plus (0,inf) path=linear(1,0) I=(0,inf)\n";

fn dethunt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dethunt")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_constant_spec() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "c.hunt", CONST);
    let o = dethunt(&["validate", "--spec", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["type"], "⊙");
}

#[test]
fn malformed_spec_exits_one_with_json_diagnostics() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "bad.hunt", "huntspec v1\nconst [1,0]\n");
    let o = dethunt(&["validate", "--spec", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v[0]["line"], 2);
    assert_eq!(v[0]["column"], 7);

    let p = write_spec(&dir, "overlap.hunt", "huntspec v1\nconst (-inf,1]\nconst [0,inf)\n");
    assert_eq!(dethunt(&["validate", "--spec", s(&p)]).status.code(), Some(1));
}

#[test]
fn unreadable_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.hunt");
    assert_eq!(dethunt(&["validate", "--spec", s(&missing)]).status.code(), Some(2));
    let p = write_spec(&dir, "c.hunt", CONST);
    let out = dir.path().join("no_such_dir").join("out.txt");
    assert_eq!(dethunt(&["export", "--spec", s(&p), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(dethunt(&["validate"]).status.code(), Some(1));
    assert_eq!(dethunt(&["frobnicate"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "c.hunt", CONST);
    assert_eq!(dethunt(&["eval", "--spec", s(&p), "--x", "0", "--tol", "0"]).status.code(), Some(1));
    assert_eq!(dethunt(&["symbol", "--spec", s(&p), "--x", "0", "--format", "svg"]).status.code(), Some(1));
}

#[test]
fn classify_cantor() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "cantor.hunt", CANTOR);
    let o = dethunt(&["classify", "--spec", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["feller"]["verdict"], "holds");
    assert_eq!(v["rich"]["verdict"], "fails");
    assert_eq!(v["hunt"]["verdict"], "holds");
    assert_eq!(v["finite_variation"]["verdict"], "holds");
}

#[test]
fn eval_csv_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "sd.hunt", SPACE_DRIFT);
    let args = ["eval", "--spec", s(&p), "--x", "-1,0,0.5", "--T", "2", "--level", "3"];
    let a = dethunt(&args);
    let b = dethunt(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,t,value");
    assert_eq!(rows.len(), 1 + 3 * 9);
    let last: Vec<f64> = rows[27].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last, vec![0.5, 2.0, 2.5]);
    let zero: Vec<f64> = rows[18].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(zero, vec![0.0, 2.0, 0.0]);
}

#[test]
fn eval_svg_has_a_polyline_per_start() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "sd.hunt", SPACE_DRIFT);
    let out = dir.path().join("plot.svg");
    let o = dethunt(&["eval", "--spec", s(&p), "--x", "-1,1", "--format", "svg", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("viewBox=\"0 0 640 400\""));
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn symbol_table() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "sd.hunt", SPACE_DRIFT);
    let o = dethunt(&["symbol", "--spec", s(&p), "--x", "-2,3", "--xi", "1,-2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        // p(x, xi) = -i sign(x) xi
        assert_eq!(r[2], 0.0);
        assert_eq!(r[3], -r[0].signum() * r[1]);
    }
}

#[test]
fn export_roundtrips() {
    let dir = TempDir::new().unwrap();
    let p = write_spec(&dir, "sd.hunt", SPACE_DRIFT);
    let o = dethunt(&["export", "--spec", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o);
    assert!(first.starts_with("huntspec v1\n"));
    let q = write_spec(&dir, "again.hunt", &first);
    let again = stdout(&dethunt(&["export", "--spec", s(&q)]));
    assert_eq!(first, again);
}

#[test]
fn gallery_table_passes() {
    let o = dethunt(&["gallery"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.contains(",PASS,")), "{text}");
}
