use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use hermite_eval::{sample_bivariate_normal, TestDistribution};
use tempfile::TempDir;

fn hsketch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsketch")).args(args).output().unwrap()
}

fn hsketch_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hsketch"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_numbers(out: &Output) -> Vec<f64> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn write_lines(file: &str, lines: impl IntoIterator<Item = String>) {
    let text: String = lines.into_iter().map(|l| l + "\n").collect();
    fs::write(file, text).unwrap();
}

fn normal_data(dir: &TempDir, n: usize, seed: u64) -> String {
    let file = path(dir, &format!("normal{seed}.txt"));
    write_lines(
        &file,
        TestDistribution::Normal.sample(n, seed).iter().map(|x| x.to_string()),
    );
    file
}

fn assert_exit(out: &Output, code: i32, prefix: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains(prefix));
}

#[test]
fn build_then_quantile_prints_one_number() {
    let dir = TempDir::new().unwrap();
    let data = normal_data(&dir, 5000, 3);
    let sketch = path(&dir, "s.hsk");
    let out = hsketch(&[
        "build",
        "--type",
        "univariate",
        "--n",
        "30",
        "--standardize",
        "true",
        "--input",
        &data,
        "--out",
        &sketch,
    ]);
    assert!(out.status.success());
    let out = hsketch(&["query", "--sketch", &sketch, "quantile", "--at", "0.5"]);
    assert!(out.status.success());
    let values = stdout_numbers(&out);
    assert_eq!(values.len(), 1);
    assert!(values[0].abs() < 0.1, "{values:?}");
}

#[test]
fn query_output_is_deterministic_and_leaves_file_untouched() {
    let dir = TempDir::new().unwrap();
    let data = normal_data(&dir, 2000, 4);
    let sketch = path(&dir, "s.hsk");
    let out = hsketch(&["build", "--type", "univariate", "--input", &data, "--out", &sketch]);
    assert!(out.status.success());
    let before = fs::read(&sketch).unwrap();
    let args = [
        "query",
        "--sketch",
        sketch.as_str(),
        "cdf",
        "--at",
        "-1.5,0,2.25",
        "--clipped",
        "true",
    ];
    let first = hsketch(&args);
    let second = hsketch(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&sketch).unwrap(), before);
    let text = String::from_utf8(first.stdout).unwrap();
    for line in text.lines() {
        // 17 significant digits in scientific notation.
        let mantissa = line.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{line}");
    }
    let cdf: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert!(cdf[0] < cdf[1] && cdf[1] < cdf[2]);
}

#[test]
fn merge_with_mismatched_order_exits_4() {
    let dir = TempDir::new().unwrap();
    let data = normal_data(&dir, 100, 5);
    let (a, b, m) = (path(&dir, "a.hsk"), path(&dir, "b.hsk"), path(&dir, "m.hsk"));
    for (file, n) in [(&a, "10"), (&b, "12")] {
        let out = hsketch(&[
            "build",
            "--type",
            "univariate",
            "--n",
            n,
            "--input",
            &data,
            "--out",
            file,
        ]);
        assert!(out.status.success());
    }
    let out = hsketch(&["merge", &a, &b, "--out", &m]);
    assert_exit(&out, 4, "incompatible error");
    assert!(!Path::new(&m).exists());
}

#[test]
fn merged_unstandardized_shards_match_single_build() {
    let dir = TempDir::new().unwrap();
    let xs = TestDistribution::Logistic.sample(3000, 6);
    let (d1, d2, all) = (path(&dir, "d1"), path(&dir, "d2"), path(&dir, "all"));
    write_lines(&d1, xs[..1000].iter().map(|x| x.to_string()));
    write_lines(&d2, xs[1000..].iter().map(|x| x.to_string()));
    write_lines(&all, xs.iter().map(|x| x.to_string()));
    let (s1, s2, s, m) = (path(&dir, "s1"), path(&dir, "s2"), path(&dir, "s"), path(&dir, "m"));
    for (input, out) in [(&d1, &s1), (&d2, &s2), (&all, &s)] {
        let r = hsketch(&[
            "build",
            "--type",
            "univariate",
            "--standardize",
            "false",
            "--input",
            input,
            "--out",
            out,
        ]);
        assert!(r.status.success());
    }
    assert!(hsketch(&["merge", &s1, &s2, "--out", &m]).status.success());
    let q = |file: &str| stdout_numbers(&hsketch(&["query", "--sketch", file, "pdf", "--at", "-2,0,1"]));
    for (x, y) in q(&m).iter().zip(q(&s)) {
        assert!((x - y).abs() < 1e-13, "{x} vs {y}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let data = normal_data(&dir, 10, 7);
    let out = path(&dir, "s.hsk");
    assert_exit(
        &hsketch(&[
            "build",
            "--type",
            "univariate",
            "--n",
            "-1",
            "--input",
            &data,
            "--out",
            &out,
        ]),
        2,
        "error",
    );
    assert_exit(
        &hsketch(&[
            "build",
            "--type",
            "univariate",
            "--n",
            "500",
            "--input",
            &data,
            "--out",
            &out,
        ]),
        2,
        "usage error",
    );
    assert_exit(&hsketch(&["frobnicate"]), 2, "error");

    let biv = path(&dir, "b.hsk");
    let r = hsketch_stdin(
        &["build", "--type", "bivariate", "--input", "-", "--out", &biv],
        "0,1\n1,0\n2,2\n",
    );
    assert!(r.status.success());
    assert_exit(
        &hsketch(&["query", "--sketch", &biv, "quantile", "--at", "0.5"]),
        2,
        "usage error",
    );
    assert_exit(
        &hsketch(&["query", "--sketch", &biv, "pdf", "--at", "0.5"]),
        2,
        "usage error",
    );
}

#[test]
fn bad_lines_fail_or_skip() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "s.hsk");
    let input = "1.0\nabc\n2.0\n";
    let r = hsketch_stdin(&["build", "--type", "univariate", "--input", "-", "--out", &out], input);
    assert_exit(&r, 3, "data error");
    let r = hsketch_stdin(
        &[
            "build",
            "--type",
            "univariate",
            "--input",
            "-",
            "--out",
            &out,
            "--on-bad-line",
            "skip",
        ],
        input,
    );
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("skipped 1"));

    let missing = path(&dir, "missing.txt");
    assert_exit(
        &hsketch(&["build", "--type", "univariate", "--input", &missing, "--out", &out]),
        3,
        "data error",
    );
    let garbage = path(&dir, "garbage.hsk");
    fs::write(&garbage, "not a sketch").unwrap();
    assert_exit(
        &hsketch(&["query", "--sketch", &garbage, "pdf", "--at", "0"]),
        3,
        "data error",
    );
    assert_exit(
        &hsketch(&["query", "--sketch", &out, "quantile", "--at", "1.5"]),
        3,
        "data error",
    );
}

#[test]
fn exponential_sketch_needs_sequential_update() {
    let dir = TempDir::new().unwrap();
    let data = normal_data(&dir, 200, 8);
    let sketch = path(&dir, "e.hsk");
    let r = hsketch(&[
        "build",
        "--type",
        "univariate",
        "--lambda",
        "0.05",
        "--input",
        &data,
        "--out",
        &sketch,
    ]);
    assert!(r.status.success());
    let before = fs::read(&sketch).unwrap();
    assert_exit(
        &hsketch(&["update", "--sketch", &sketch, "--input", &data]),
        4,
        "incompatible error",
    );
    assert_eq!(fs::read(&sketch).unwrap(), before);
    let r = hsketch(&["update", "--sketch", &sketch, "--input", &data, "--sequential"]);
    assert!(r.status.success());
    assert_ne!(fs::read(&sketch).unwrap(), before);
}

#[test]
fn update_matches_single_build() {
    let dir = TempDir::new().unwrap();
    let xs = TestDistribution::Exponential.sample(1000, 9);
    let (d1, d2, all) = (path(&dir, "d1"), path(&dir, "d2"), path(&dir, "all"));
    write_lines(&d1, xs[..400].iter().map(|x| format!("{x:e}")));
    write_lines(&d2, xs[400..].iter().map(|x| format!("{x:e}")));
    write_lines(&all, xs.iter().map(|x| format!("{x:e}")));
    let (s, t) = (path(&dir, "s"), path(&dir, "t"));
    let build = |input: &str, out: &str| {
        hsketch(&[
            "build",
            "--type",
            "univariate",
            "--standardize",
            "false",
            "--input",
            input,
            "--out",
            out,
        ])
    };
    assert!(build(&d1, &s).status.success());
    assert!(hsketch(&["update", "--sketch", &s, "--input", &d2]).status.success());
    assert!(build(&all, &t).status.success());
    let q = |file: &str| {
        stdout_numbers(&hsketch(&[
            "query",
            "--sketch",
            file,
            "quantile",
            "--at",
            "0.1,0.5,0.9",
            "--algorithm",
            "bisection",
        ]))
    };
    for (x, y) in q(&s).iter().zip(q(&t)) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn kendall_on_correlated_normal_sample() {
    let dir = TempDir::new().unwrap();
    let pairs = sample_bivariate_normal(4000, 0.5, 11).unwrap();
    let data = path(&dir, "pairs.csv");
    write_lines(&data, pairs.iter().map(|[x, y]| format!("{x},{y}")));
    let sketch = path(&dir, "biv.hsk");
    let r = hsketch(&[
        "build",
        "--type",
        "bivariate",
        "--n",
        "30",
        "--input",
        &data,
        "--out",
        &sketch,
    ]);
    assert!(r.status.success());
    let tau = stdout_numbers(&hsketch(&["corr", "--sketch", &sketch, "kendall"]));
    assert_eq!(tau.len(), 1);
    assert!((tau[0] - 1.0 / 3.0).abs() < 0.02, "{tau:?}");
    let rho = stdout_numbers(&hsketch(&["corr", "--sketch", &sketch, "spearman"]));
    assert!((rho[0] - 0.4826).abs() < 0.04, "{rho:?}");
    let density = stdout_numbers(&hsketch(&["query", "--sketch", &sketch, "pdf", "--at", "0,0,-1,1"]));
    assert_eq!(density.len(), 2);
    assert!(density[0] > density[1]);
}

#[test]
fn bench_emits_csv() {
    let out = hsketch(&[
        "bench",
        "quantile",
        "--n",
        "500",
        "--m",
        "2",
        "--dists",
        "normal,uniform",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("normal,500,"));

    let out = hsketch(&["bench", "correlation", "--n", "500", "--m", "2", "--rhos", "-0.5,0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);

    assert_exit(&hsketch(&["bench", "quantile", "--dists", "cauchy"]), 2, "usage error");
}
