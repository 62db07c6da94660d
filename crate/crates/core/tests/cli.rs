use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robinson_fit::io::{heatmap_ppm, parse_matrix, parse_order};
use robinson_fit::oracle::exact_fit;
use robinson_fit::{check_robinson, compatibility_violation, linf_distance, Dissimilarity, TotalOrder};

const E4B: &str = "0 1 2 3\n1 0 4 2\n2 4 0 1\n3 2 1 0\n";

fn robfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robfit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn put(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    text.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn line_distance_fits_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "line.txt", "0 1 2 3 4\n1 0 1 2 3\n2 1 0 1 2\n3 2 1 0 1\n4 3 2 1 0\n");
    let out = robfit(&["fit", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(value(&text, "achieved_error"), "0");
    let perm = value(&text, "permutation");
    assert!(perm == "0 1 2 3 4" || perm == "4 3 2 1 0", "{perm}");
}

#[test]
fn e4b_fit_is_within_guarantee_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "e4b.txt", E4B);
    let out = robfit(&["fit", s(&f), "--emit-fitted", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let m = parse_matrix(E4B).unwrap();
    let star = exact_fit(&m.d).unwrap().epsilon_star;
    let achieved: f64 = value(&text, "achieved_error").parse().unwrap();
    let accepted: f64 = value(&text, "accepted_epsilon").parse().unwrap();
    assert!(achieved <= 16.0 * star);
    assert!(text.lines().any(|l| l.starts_with("trace: ")));

    // the fitted matrix and permutation reproduce the reported error
    let fitted_text: String = text.lines().skip_while(|l| *l != "fitted:").skip(1).map(|l| format!("{l}\n")).collect();
    let fitted = parse_matrix(&fitted_text).unwrap();
    let order_text: String = value(&text, "permutation").split(' ').map(|l| format!("{l}\n")).collect();
    let order = parse_order(&order_text, &m).unwrap();
    assert!(check_robinson(&fitted.d, &order));
    assert_eq!(linf_distance(&m.d, &fitted.d).unwrap(), achieved);

    // and the order passes verify at 16 times the accepted error
    let o = put(dir.path(), "e4b.order", &order_text);
    let bound = (16.0 * accepted).to_string();
    assert_eq!(robfit(&["verify", s(&f), s(&o), "--eps", &bound]).status.code(), Some(0));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "e4b.txt", E4B);
    let id = put(dir.path(), "id.order", "0\n1\n2\n3\n");
    let m = parse_matrix(E4B).unwrap();
    let v = compatibility_violation(&m.d, &TotalOrder::identity(4));
    let below = (v - 0.5).to_string();
    let at = v.to_string();
    assert_eq!(robfit(&["verify", s(&f), s(&id), "--eps", &below]).status.code(), Some(1));
    assert_eq!(robfit(&["verify", s(&f), s(&id), "--eps", &at]).status.code(), Some(0));
    let short = put(dir.path(), "short.order", "0\n1\n");
    assert_eq!(robfit(&["verify", s(&f), s(&short), "--eps", "1"]).status.code(), Some(2));
}

#[test]
fn gen_output_is_robinson_under_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let r = robfit(&["gen", "--n", "6", "--eta", "0", "--seed", "11", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    let m = parse_matrix(&fs::read_to_string(&out).unwrap()).unwrap();
    let order = parse_order(&fs::read_to_string(dir.path().join("g.txt.order")).unwrap(), &m).unwrap();
    assert!(check_robinson(&m.d, &order));
    let v = robfit(&["verify", s(&out), s(&dir.path().join("g.txt.order")), "--eps", "0"]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn oracle_reports_optimum_and_refuses_large_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "e4b.txt", E4B);
    let out = robfit(&["oracle", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let m = parse_matrix(E4B).unwrap();
    let r = exact_fit(&m.d).unwrap();
    let text = stdout(&out);
    assert_eq!(value(&text, "epsilon_star").parse::<f64>().unwrap(), r.epsilon_star);
    let w: String = value(&text, "witness_order").split(' ').map(|l| format!("{l}\n")).collect();
    assert_eq!(compatibility_violation(&m.d, &parse_order(&w, &m).unwrap()), r.epsilon_star);

    let big = dir.path().join("big.txt");
    robfit(&["gen", "--n", "12", "--seed", "1", "--out", s(&big)]);
    let refused = robfit(&["oracle", s(&big)]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(!refused.stderr.is_empty());
}

#[test]
fn parse_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = put(dir.path(), "bad.txt", "0 1 2\n1 0 3\n2 3\n");
    let out = robfit(&["fit", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let asym = put(dir.path(), "asym.txt", "0 1\n2 0\n");
    assert_eq!(robfit(&["fit", s(&asym)]).status.code(), Some(2));
    assert_eq!(robfit(&["fit", s(&dir.path().join("missing.txt"))]).status.code(), Some(2));
    assert_eq!(robfit(&["fit"]).status.code(), Some(2));
    assert_eq!(robfit(&["fit", s(&bad), "--search", "sideways"]).status.code(), Some(2));
}

#[test]
fn json_and_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "e4b.txt", E4B);
    let out = robfit(&["fit", s(&f), "--json", "--cross-check", "--search", "linear"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["search_mode"], "linear");
    assert_eq!(v["cross_check"]["search_mode"], "binary");
    assert_eq!(v["cross_check"]["agree"], true);
    assert_eq!(v["permutation"].as_array().unwrap().len(), 4);
    assert!(v.get("fitted").is_none());
}

#[test]
fn heatmap_and_graph_dump_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = put(dir.path(), "e4b.txt", E4B);
    let img = dir.path().join("h.ppm");
    let dot = dir.path().join("g.dot");
    let out = robfit(&["fit", s(&f), "--heatmap", s(&img), "--dump-graphs", s(&dot)]);
    assert_eq!(out.status.code(), Some(0));
    let m = parse_matrix(E4B).unwrap();
    let order = parse_order(
        &value(&stdout(&out), "permutation").split(' ').map(|l| format!("{l}\n")).collect::<String>(),
        &m,
    )
    .unwrap();
    assert_eq!(fs::read(&img).unwrap(), heatmap_ppm(&m.d, &order));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("// eps "));
}

#[test]
fn fitted_heatmap_has_no_inversions() {
    let m = parse_matrix(E4B).unwrap();
    let r = robinson_fit::solver::fit(&m.d);
    let img = heatmap_ppm(&r.fitted, &r.order);
    let header = b"P6\n4 4\n255\n".len();
    let gray: Vec<u8> = img[header..].chunks(3).map(|p| p[0]).collect();
    for row in 0..4 {
        for c in row..3 {
            assert!(gray[row * 4 + c] <= gray[row * 4 + c + 1]);
        }
        for c in 1..=row {
            assert!(gray[row * 4 + c - 1] >= gray[row * 4 + c]);
        }
    }
    let one = Dissimilarity::zeros(1).unwrap();
    assert_eq!(heatmap_ppm(&one, &TotalOrder::identity(1)).len(), b"P6\n1 1\n255\n".len() + 3);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    robfit(&["gen", "--n", "9", "--eta", "2", "--seed", "5", "--out", s(&f)]);
    let run = |tag: &str| {
        let img = dir.path().join(format!("{tag}.ppm"));
        let out = robfit(&["fit", s(&f), "--trace", "--emit-fitted", "--heatmap", s(&img)]);
        (out.stdout, fs::read(img).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
