use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_isolp");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("ISO_LP_THREADS", "1").output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn generate(dir: &TempDir, name: &str, family: &str, permute: Option<u64>) -> PathBuf {
    let p = dir.path().join(name);
    let mut args = vec!["generate", "--family", family, "--out", p.to_str().unwrap()];
    let seed;
    if let Some(s) = permute {
        seed = s.to_string();
        args.extend(["--permute", &seed]);
    }
    assert_eq!(run(&args).status.code(), Some(0));
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Reads the plain edge-list format without the library.
fn adjacency(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let n: usize = lines.next().unwrap().split_whitespace().next().unwrap().parse().unwrap();
    let mut adj = vec![vec![0.0; n]; n];
    for l in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        let (u, v, w): (usize, usize, f64) = (t[0].parse().unwrap(), t[1].parse().unwrap(), t[2].parse().unwrap());
        adj[u - 1][v - 1] = w;
        adj[v - 1][u - 1] = w;
    }
    adj
}

#[test]
fn frucht_pair_is_isomorphic_and_the_map_checks_out() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.g", "frucht", None);
    let b = generate(&dir, "b.g", "frucht", Some(11));
    let out = run(&["solve", s(&a), s(&b), "--restarts", "20", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdict"], "isomorphic");
    assert_eq!(v["seed"], 7);

    let map: Vec<usize> = v["permutation"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as usize - 1).collect();
    let (ga, gb) = (adjacency(&a), adjacency(&b));
    for u in 0..12 {
        for w in 0..12 {
            assert_eq!(ga[u][w], gb[map[u]][map[w]]);
        }
    }
    assert!(v["restarts_used"].as_u64().unwrap() >= 1);
    assert_eq!(v["per_restart"].as_array().unwrap().len() as u64, v["restarts_used"].as_u64().unwrap());
}

#[test]
fn hexagon_and_two_triangles_differ_in_spectrum() {
    let dir = TempDir::new().unwrap();
    let c6 = write(&dir, "c6.g", "6 6\n1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 1\n6 1 1\n");
    let tt = write(&dir, "tt.g", "# two triangles\n6 6\n1 2 1\n2 3 1\n3 1 1\n4 5 1\n5 6 1\n6 4 1\n");
    let out = run(&["solve", s(&c6), s(&tt), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "not_isomorphic");
    assert_eq!(v["reason"], "spectra_mismatch");
    assert!(v["permutation"].is_null());
}

#[test]
fn same_file_twice_is_isomorphic() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "p.g", "petersen", None);
    let out = run(&["solve", s(&p), s(&p), "--seed", "3", "--no-pruning"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["mask_allowed"], 100);
}

#[test]
fn unreadable_input_exits_64() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.g", "2 1\n1 2 1\n");
    let bad = write(&dir, "bad.g", "2 1\n1 3 1\n");
    let dup = write(&dir, "dup.g", "2 2\n1 2 1\n2 1 1\n");
    for other in [&bad, &dup, &dir.path().join("missing.g")] {
        let out = run(&["solve", s(&good), s(other), "--seed", "1"]);
        assert_eq!(out.status.code(), Some(64));
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(&["solve", s(&good)]).status.code(), Some(64));
    assert_eq!(run(&["solve", s(&good), s(&good), "--tol", "abc"]).status.code(), Some(64));
}

#[test]
fn verbose_prints_residual_traces() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.g", "frucht", None);
    let out = run(&["solve", s(&a), s(&a), "--seed", "2", "--verbose", "--restarts", "1"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("# restart 1 seed 3"));
    assert!(err.contains("iter,primal,dual\n1,"));
}

#[test]
fn bench_header_is_pinned() {
    let out = run(&["bench", "--family", "frucht", "--trials", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "family,n,allowed,sparsity_ratio,trials,success_no_mask,success_with_mask,mean_iters,mean_wall_time_s\n\
         frucht,12,14,0.097222,0,,,,\n"
    );
}

#[test]
fn bench_writes_rates_to_file() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = run(&["bench", "--family", "g2n", "--sizes", "4,9", "--trials", "3", "--seed", "1", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("g2n,4,"));
    assert!(rows[1].starts_with("g2n,9,"));
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields.len(), 9);
    let with_mask: f64 = fields[6].parse().unwrap();
    assert!((0.0..=1.0).contains(&with_mask));
}

#[test]
fn bench_rejects_unknown_family() {
    assert_eq!(run(&["bench", "--family", "nope", "--seed", "1"]).status.code(), Some(64));
}

#[test]
fn bench_reads_graphs_from_files() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "p.g", "petersen", None);
    let family = format!("file:{}", s(&p));
    let out = run(&["bench", "--family", &family, "--trials", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",10,100,1.000000,0,"), "{text}");
}

#[test]
fn timing_emits_one_row_per_size() {
    let out = run(&["timing", "--sizes", "20", "--repeats", "3", "--max-iter", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,repeats,iters,iter_time_s,iter_time_min_s,total_time_s,total_time_min_s"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["20", "3", "5"]);
    let (mean, min): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
    assert!(min > 0.0 && min <= mean);
    assert!(lines.next().is_none());
}

#[test]
fn missing_seed_is_reported() {
    let out = run(&["bench", "--family", "frucht", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("seed: "));
}
