use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vintage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vintage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The single `error:` line on stderr.
fn error_line(o: &Output) -> String {
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error:")).collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    lines[0].to_string()
}

const SMALL: &str = r#"
seed = 5
store = "store"
output = "out"

[data.synthetic]
rows_per_month = 250
months = 10

[split]
dev = { start = 0, end = 3 }
otv = { start = 4, end = 4 }
prod = [{ start = 7, end = 7 }, { start = 8, end = 8 }, { start = 9, end = 9 }]
gap = 2

[schedule]
periods = 3
families = ["LR", "GBT"]

[schedule.budgets]
LR = 1
GBT = 1

[schedule.spaces.GBT]
params = [["rounds", { scale = "int", lo = 5, hi = 10 }]]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_every_row_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = vintage(&["generate", "--config", arg(&cfg), "--out", arg(&a)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(vintage(&["generate", "--config", arg(&cfg), "--out", arg(&b)])
        .status
        .success());
    let first = fs::read(a.join("data.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("data.csv")).unwrap());
    let lines = String::from_utf8(first).unwrap().lines().count();
    assert_eq!(lines, 1 + 10 * 250);
}

#[test]
fn generate_rejects_one_month() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &SMALL.replace("months = 10", "months = 1"));
    let o = vintage(&["generate", "--config", arg(&cfg)]);
    assert!(!o.status.success());
    assert!(
        error_line(&o).starts_with("error: class=invalid-spec"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn missing_data_file_is_data_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "[data.synthetic]\nrows_per_month = 250\nmonths = 10\n",
        "[data]\npath = \"nowhere.csv\"\n\n[schema]\ncolumns = [{ name = \"m\", role = \"vintage-date\" }, { name = \"y\", role = \"label\" }]\n",
    );
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = vintage(&["replay", "--config", arg(&cfg)]);
    assert!(!o.status.success());
    assert!(
        error_line(&o).starts_with("error: class=data-not-found"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn missing_config_is_reported() {
    let o = vintage(&["replay", "--config", "/definitely/not/here.toml"]);
    assert!(!o.status.success());
    assert!(error_line(&o).starts_with("error: class=config-unreadable"));
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().delimiter(b'\t').from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn replay_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let o = vintage(&["--threads", "1", "replay", "--config", arg(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");

    let lineage = read_rows(&out.join("lineage.tsv"));
    assert_eq!(lineage.len(), 3);
    assert_eq!(
        lineage.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["0", "1", "2"]
    );
    let metrics = read_rows(&out.join("metrics.tsv"));
    assert_eq!(metrics.len(), 3);

    let summary = fs::read_to_string(out.join("summary.tsv")).unwrap();
    for m in ["AUC", "KS", "F1", "3DCR"] {
        let row = summary.lines().find(|l| l.starts_with(&format!("{m}\t"))).unwrap();
        let cells: Vec<&str> = row.split('\t').collect();
        let (c, b, d): (f64, f64, f64) = (
            cells[1].parse().unwrap(),
            cells[2].parse().unwrap(),
            cells[3].parse().unwrap(),
        );
        assert!((c - b - d).abs() < 2e-4, "{row}");
    }

    // a second replay into the same store is refused
    let again = vintage(&["replay", "--config", arg(&cfg)]);
    assert!(!again.status.success());
    assert!(error_line(&again).starts_with("error: class=store-not-empty"));

    let table = vintage(&["report", "--config", arg(&cfg), "--format", "table"]);
    assert!(table.status.success(), "{}", stderr(&table));
    let text = stdout(&table);
    for block in [
        "LR^FW (OTV)",
        "GBT^FW (OTV)",
        "LR^FO (OTV)",
        "LR^RW (OTV)",
        "GBT^FO (OTV)",
        "GBT^RW (OTV)",
        "Champion (PROD)",
    ] {
        assert!(text.contains(block), "missing {block}:\n{text}");
    }

    let delimited = vintage(&["report", "--config", arg(&cfg), "--format", "delimited"]);
    assert!(delimited.status.success());
    let text = stdout(&delimited);
    let (candidates, champions) = text.split_once("\n\n").unwrap();
    let rows = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(candidates.as_bytes())
        .records()
        .count();
    // two FW models in period 0, then two families times two strategies
    assert_eq!(rows, 2 + 2 * 4);
    let champ_rows = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(champions.as_bytes())
        .records()
        .count();
    assert_eq!(champ_rows, 3);
}

#[test]
fn rerun_gives_identical_hashes() {
    let hashes = |dir: &Path, threads: &str| {
        let cfg = write_config(dir, "c.toml", SMALL);
        let o = vintage(&["--threads", threads, "replay", "--config", arg(&cfg)]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
            .lines()
            .filter(|l| l.starts_with("report hash\t") || l.starts_with("store hash\t"))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ha, hb) = (hashes(a.path(), "1"), hashes(b.path(), "3"));
    assert_eq!(ha.len(), 2);
    assert_eq!(ha, hb);
}

#[test]
fn report_on_empty_store_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let o = vintage(&["report", "--config", arg(&cfg)]);
    assert!(!o.status.success());
    assert!(error_line(&o).starts_with("error: class=empty-store"));
    fs::create_dir_all(dir.path().join("store")).unwrap();
    let o = vintage(&["report", "--config", arg(&cfg)]);
    assert!(!o.status.success());
    assert!(error_line(&o).starts_with("error: class=empty-store"));
}

#[test]
fn gap_violation_mid_replay_names_last_completed_period() {
    let dir = tempfile::tempdir().unwrap();
    // width 3 moves OTV to month 7 in period 1, too close to PROD month 8
    let text = SMALL
        .replace("periods = 3", "periods = 2\nrelease_width = 3")
        .replace(", { start = 9, end = 9 }", "")
        .replace("families = [\"LR\", \"GBT\"]", "families = [\"LR\"]");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = vintage(&["replay", "--config", arg(&cfg)]);
    assert!(!o.status.success());
    let line = error_line(&o);
    assert!(
        line.starts_with("error: class=gap-violation period=1 last_completed=0"),
        "{line}"
    );
}
