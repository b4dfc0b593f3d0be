use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn meshflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("meshflow-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_topology(dir: &Path, name: &str, nodes: usize, edges: &[(usize, usize, u64)]) -> String {
    let nodes: Vec<String> = (0..nodes).map(|i| format!("{{\"id\": {i}}}")).collect();
    let edges: Vec<String> = edges
        .iter()
        .map(|(u, v, c)| format!("{{\"u\": {u}, \"v\": {v}, \"cap_mbps\": {c}}}"))
        .collect();
    let text = format!("{{\"nodes\": [{}], \"edges\": [{}]}}", nodes.join(","), edges.join(","));
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn chain(len: usize, cap: u64) -> Vec<(usize, usize, u64)> {
    (0..len).map(|i| (i, i + 1, cap)).collect()
}

fn two_chains(cap: u64) -> Vec<(usize, usize, u64)> {
    let a = [0, 1, 2, 3, 4, 5, 11];
    let b = [0, 6, 7, 8, 9, 10, 11];
    a.windows(2).chain(b.windows(2)).map(|w| (w[0], w[1], cap)).collect()
}

#[test]
fn gen_hundred_nodes_is_deterministic() {
    let dir = scratch("gen");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for out in [&a, &b] {
        let o = meshflow(&[
            "gen",
            "--nodes",
            "100",
            "--links",
            "320",
            "--cap-min",
            "5",
            "--cap-max",
            "15",
            "--seed",
            "42",
            "--allow-disconnected",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).starts_with("nodes=100 links="));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let links = 2 * text.matches("\"cap_mbps\"").count();
    assert!((304..=336).contains(&links), "{links}");
}

#[test]
fn gen_rejects_bad_input() {
    let dir = scratch("gen-bad");
    let out = dir.join("x.json");
    let o = meshflow(&["gen", "--nodes", "1", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    // 320 directed links cannot connect 100 unit-disk nodes
    let o = meshflow(&["gen", "--nodes", "100", "--links", "320", "-o", out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    let o = meshflow(&["gen", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_single_edge_and_chain() {
    let dir = scratch("solve");
    let edge = write_topology(&dir, "edge.json", 2, &[(0, 1, 11)]);
    let o = meshflow(&["solve", &edge, "0", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("throughput=11 (11.000 Mbps)"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("p(")).count(), 1);

    let six = write_topology(&dir, "chain.json", 7, &chain(6, 12));
    let o = meshflow(&["solve", &six, "0", "6", "--dump-schedule"]);
    let text = stdout(&o);
    assert!(text.contains("(4.000 Mbps)"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("p(")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.starts_with("slot ")).count(), 3);

    let o = meshflow(&["solve", &six, "0", "6", "--single-path"]);
    assert!(stdout(&o).contains("(4.000 Mbps)"));
}

#[test]
fn solve_unreachable_exits_two() {
    let dir = scratch("nopath");
    let g = write_topology(&dir, "g.json", 3, &[(0, 1, 11)]);
    let o = meshflow(&["solve", &g, "0", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = meshflow(&["compare", &g, "2", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = meshflow(&["solve", &g, "0", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_reports_ratio() {
    let dir = scratch("compare");
    let edge = write_topology(&dir, "edge.json", 2, &[(0, 1, 11)]);
    let o = meshflow(&["compare", &edge, "0", "1"]);
    assert_eq!(stdout(&o).trim(), "multipath=11.000 mtm=11.000 ratio=1.000");
    let two = write_topology(&dir, "two.json", 12, &two_chains(12));
    let o = meshflow(&["compare", &two, "0", "11"]);
    assert_eq!(stdout(&o).trim(), "multipath=6.000 mtm=4.000 ratio=1.500");
    let o = meshflow(&["compare", &two, "0", "11", "--no-reuse-baseline"]);
    assert_eq!(stdout(&o).trim(), "multipath=6.000 mtm=2.000 ratio=3.000");
}

#[test]
fn verify_outcomes() {
    let dir = scratch("verify");
    let two = write_topology(&dir, "two.json", 12, &two_chains(11));
    let o = meshflow(&["verify", &two, "0", "11", "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("oracle=11/2"));

    let six = write_topology(&dir, "chain.json", 7, &chain(6, 12));
    let dump = stdout(&meshflow(&["solve", &six, "0", "6", "--dump-schedule"]));
    let good = dir.join("good.txt");
    fs::write(&good, &dump).unwrap();
    let o = meshflow(&["verify", &six, "0", "6", "--solution", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.join("bad.txt");
    fs::write(&bad, dump.replace("0->1@12", "0->1@24")).unwrap();
    let o = meshflow(&["verify", &six, "0", "6", "--solution", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("validate:"));

    let big = dir.join("big.json");
    meshflow(&[
        "gen",
        "--nodes",
        "30",
        "--links",
        "200",
        "--seed",
        "3",
        "-o",
        big.to_str().unwrap(),
    ]);
    let o = meshflow(&["verify", big.to_str().unwrap(), "0", "1", "--oracle"]);
    let text = stdout(&o);
    assert!(text.contains("oracle: skipped"), "{text}");
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{text}");
}

fn experiment(extra: &[&str]) -> Output {
    let mut args = vec![
        "experiment",
        "--nodes",
        "40",
        "--links",
        "200",
        "--trials",
        "4",
        "--hop-min",
        "1",
        "--hop-max",
        "3",
        "--seed",
        "11",
        "--no-timing",
    ];
    args.extend_from_slice(extra);
    meshflow(&args)
}

#[test]
fn experiment_is_byte_stable() {
    let a = experiment(&[]);
    let b = experiment(&[]);
    assert!(a.status.success(), "{a:?}");
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("hop,trial,seed,multipath_mbps,mtm_mbps,ratio,paths,slots,runtime_ms")
    );
    let means: Vec<&str> = text.lines().filter(|l| l.contains(",mean,")).collect();
    assert_eq!(means.len(), 3);
    for row in text.lines().skip(1).filter(|l| !l.contains(",mean,")) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(cols[8], "0.000");
        let ratio: f64 = cols[5].parse().unwrap();
        assert!(ratio >= 1.0, "{row}");
    }
    let hop1: Vec<&str> = means[0].split(',').collect();
    let r: f64 = hop1[5].parse().unwrap();
    assert!((1.0..=1.05).contains(&r), "{}", means[0]);
}

#[test]
fn experiment_writes_file_and_checks_config() {
    let dir = scratch("experiment");
    let out = dir.join("sweep.csv");
    let o = experiment(&["-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), experiment(&[]).stdout);
    let o = meshflow(&["experiment", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = meshflow(&[
        "experiment",
        "--nodes",
        "5",
        "--links",
        "8",
        "--hop-min",
        "2",
        "--hop-max",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
