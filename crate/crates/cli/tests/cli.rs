use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn xclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xclab"))
        .current_dir(dir)
        .args(args)
        .env_remove("XCLAB_THREADS")
        .output()
        .expect("spawn xclab")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = xclab(dir, args);
    assert!(
        out.status.success(),
        "xclab {args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not json ({e}): {text}"))
}

fn header(path: &Path, key: &str) -> usize {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| {
            l.strip_prefix(key)
                .map(|v| v.split_whitespace().next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no {key} in {}", path.display()))
}

/// square, square pyramid, segment, triangle in a fresh directory.
fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    ok(p, &["gen", "cube", "--dim", "2", "-o", "square.poly"]);
    ok(
        p,
        &[
            "gen",
            "pyramid",
            "--base",
            "square.poly",
            "-o",
            "sqpyr.poly",
        ],
    );
    ok(p, &["gen", "simplex", "--dim", "1", "-o", "seg.poly"]);
    ok(p, &["gen", "simplex", "--dim", "2", "-o", "tri.poly"]);
    dir
}

#[test]
fn gen_counts() {
    let dir = workspace();
    let p = dir.path();
    assert_eq!(header(&p.join("square.poly"), "H "), 4);
    assert_eq!(header(&p.join("square.poly"), "V "), 4);
    assert_eq!(header(&p.join("sqpyr.poly"), "H "), 5);
    assert_eq!(header(&p.join("sqpyr.poly"), "V "), 5);
    ok(
        p,
        &[
            "gen",
            "product",
            "--left",
            "square.poly",
            "--right",
            "sqpyr.poly",
            "-o",
            "prod.poly",
        ],
    );
    assert_eq!(header(&p.join("prod.poly"), "H "), 9);
    assert_eq!(header(&p.join("prod.poly"), "V "), 20);

    let pent = ok(p, &["gen", "polygon", "--points", "0,0;2,0;3,2;1,3;-1,2"]);
    assert!(pent.contains("H 5\n") && pent.contains("V 5\n"));
}

#[test]
fn gen_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    // reflex vertex
    let out = xclab(p, &["gen", "polygon", "--points", "0,0;2,0;1,1/4;2,2;0,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&String::from_utf8_lossy(&out.stdout))["error"].is_string());

    let out = xclab(p, &["gen", "cube"]);
    assert_eq!(out.status.code(), Some(1));
    let out = xclab(p, &["gen", "polygon", "--points", "0,0;1.5,0;0,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(xclab(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(xclab(dir.path(), &["bounds"]).status.code(), Some(1));
    assert_eq!(xclab(dir.path(), &["--help"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_xclab"))
        .args(["bounds", "x.mat"])
        .env("XCLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slack_of_square_and_pyramid() {
    let dir = workspace();
    let p = dir.path();
    let sq = ok(p, &["slack", "square.poly"]);
    assert_eq!(sq, "MAT 4 4\n0 1 1 0\n1 0 0 1\n0 0 1 1\n1 1 0 0\n");

    ok(
        p,
        &[
            "slack",
            "sqpyr.poly",
            "--irredundant",
            "-o",
            "t.mat",
            "--labels",
            "t.json",
        ],
    );
    assert_eq!(header(&p.join("t.mat"), "MAT "), 5);
    let labels = json(&fs::read_to_string(p.join("t.json")).unwrap());
    assert_eq!(labels["rows"].as_array().unwrap().len(), 5);
    assert_eq!(labels["cols"].as_array().unwrap().len(), 5);
}

#[test]
fn slack_rejects_vertex_outside() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    fs::write(
        p.join("bad.poly"),
        "POLY bad\nDIM 1\nH 2\n-1 0\n1 1\nV 2\n0\n2\n",
    )
    .unwrap();
    let out = xclab(p, &["slack", "bad.poly"]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(report["violations"][0]["kind"], "negative_slack");
}

#[test]
fn bounds_examples() {
    let dir = workspace();
    let p = dir.path();
    ok(p, &["slack", "square.poly", "-o", "sq.mat"]);
    let r = json(&ok(
        p,
        &["bounds", "sq.mat", "--json", "--witness", "sq.decomp"],
    ));
    assert_eq!(r["rank_lb"], 3);
    assert_eq!(r["rectcover_lb"], 4);
    assert_eq!(r["best_ub"], 4);
    assert_eq!(r["certified"], true);
    assert_eq!(header(&p.join("sq.decomp"), "DECOMP 4 4 "), 4);

    let mut eye = String::from("MAT 5 5\n");
    for i in 0..5 {
        let row: Vec<&str> = (0..5).map(|j| if i == j { "1" } else { "0" }).collect();
        eye += &(row.join(" ") + "\n");
    }
    fs::write(p.join("eye.mat"), eye).unwrap();
    let r = json(&ok(p, &["bounds", "eye.mat", "--json"]));
    assert_eq!(
        (r["rank_lb"].clone(), r["rectcover_lb"].clone()),
        (5.into(), 5.into())
    );
    assert_eq!(
        (r["best_ub"].clone(), r["certified"].clone()),
        (5.into(), true.into())
    );

    let text = ok(p, &["bounds", "sq.mat"]);
    assert!(text.contains("certified     true"));
}

#[test]
fn bounds_budget_exhaustion_is_data() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    // dense positive 20x20, deterministic pseudo-random entries
    let mut text = String::from("MAT 20 20\n");
    let mut x: u64 = 12345;
    for _ in 0..20 {
        let row: Vec<String> = (0..20)
            .map(|_| {
                x = x
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((x >> 33) % 97 + 1).to_string()
            })
            .collect();
        text += &(row.join(" ") + "\n");
    }
    fs::write(p.join("dense.mat"), text).unwrap();
    let r = json(&ok(
        p,
        &[
            "bounds",
            "dense.mat",
            "--bb-budget",
            "10",
            "--restarts",
            "4",
            "--json",
        ],
    ));
    assert_eq!(r["rectcover"]["status"], "budget exceeded");
    assert!(r["rectcover_lb"].is_null());
    // only the linear rank can certify here
    let certified = r["rank_lb"] == r["best_ub"];
    assert_eq!(r["certified"], certified);
}

#[test]
fn bounds_rejects_negative_entries() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("neg.mat"), "MAT 1 2\n1 -1/2\n").unwrap();
    let out = xclab(dir.path(), &["bounds", "neg.mat"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("negative entry"));
}

#[test]
fn bounds_json_is_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    // rank 2 but 3 x 4, so the search has to find a smaller witness
    fs::write(p.join("m.mat"), "MAT 3 4\n1 2 3 4\n2 4 6 8\n1 1 1 1\n").unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_xclab"))
            .current_dir(p)
            .args([
                "bounds",
                "m.mat",
                "--json",
                "--seed",
                "7",
                "--restarts",
                "40",
            ])
            .env("XCLAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
    assert_eq!(json(&String::from_utf8(one).unwrap())["best_ub"], 2);
}

#[test]
fn verify_theorem_prism() {
    let dir = workspace();
    let p = dir.path();
    let v = json(&ok(
        p,
        &["verify-theorem", "seg.poly", "tri.poly", "--json"],
    ));
    assert_eq!(v["predicted"], 5);
    assert_eq!(v["ub_verified"], true);
    assert_eq!(v["rectcover_lb"], 5);
    assert_eq!(v["lb_status"], "certified");
    assert!(v["contradiction"].is_null());
}

#[test]
fn verify_theorem_square_times_square_pyramid() {
    let dir = workspace();
    let p = dir.path();
    let out_dir = p.join("out");
    let v = json(&ok(
        p,
        &[
            "verify-theorem",
            "square.poly",
            "sqpyr.poly",
            "--json",
            "--out-dir",
            "out",
        ],
    ));
    assert_eq!(v["predicted"], 9);
    assert_eq!(v["ub_verified"], true);
    assert_eq!(v["falsification"]["target"], 8);
    assert_eq!(v["falsification"]["found"], false);
    assert_eq!(header(&out_dir.join("A.mat"), "MAT "), 9);
    assert_eq!(header(&out_dir.join("witness.decomp"), "DECOMP 9 20 "), 9);
    let sidecar = json(&fs::read_to_string(out_dir.join("A.json")).unwrap());
    assert_eq!(sidecar["regions"]["k"], 4);
}

#[test]
fn verify_theorem_needs_a_pyramid() {
    let dir = workspace();
    let out = xclab(
        dir.path(),
        &["verify-theorem", "square.poly", "square.poly"],
    );
    assert_eq!(out.status.code(), Some(2));
    let body = json(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(body["error"], "neither factor is a pyramid");
}

fn prism_dir() -> (TempDir, PathBuf) {
    let dir = workspace();
    ok(
        dir.path(),
        &["verify-theorem", "seg.poly", "tri.poly", "--out-dir", "out"],
    );
    let out = dir.path().join("out");
    (dir, out)
}

#[test]
fn audit_prism_witness() {
    let (_dir, out) = prism_dir();
    let r = json(&ok(
        &out,
        &[
            "audit",
            "--matrix",
            "A.mat",
            "--decomp",
            "witness.decomp",
            "--regions",
            "A.json",
            "--r-s",
            "2",
            "--r-tprime",
            "2",
            "--json",
        ],
    ));
    assert_eq!(r["outcome"], "nothing_to_audit");
    assert_eq!(r["factors"], 5);
}

#[test]
fn audit_names_first_violated_claim() {
    let (_dir, out) = prism_dir();
    // claiming r+(T') = 3 makes the 5-factor witness look too small
    let r = json(&ok(
        &out,
        &[
            "audit",
            "--matrix",
            "A.mat",
            "--decomp",
            "witness.decomp",
            "--regions",
            "A.json",
            "--r-s",
            "2",
            "--r-tprime",
            "3",
            "--json",
        ],
    ));
    assert_eq!(r["outcome"]["claim_violated"]["claim"], 1);
    assert_eq!(r["claims"][0]["status"], "violated");
}

#[test]
fn audit_rejects_corrupted_decomposition() {
    let (_dir, out) = prism_dir();
    let text = fs::read_to_string(out.join("witness.decomp")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = lines[1].replacen('1', "2", 1);
    fs::write(out.join("bad.decomp"), lines.join("\n") + "\n").unwrap();
    let o = xclab(
        &out,
        &[
            "audit",
            "--matrix",
            "A.mat",
            "--decomp",
            "bad.decomp",
            "--regions",
            "A.json",
            "--r-s",
            "2",
            "--r-tprime",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("does not verify"));

    // region map for another shape
    fs::write(
        out.join("r.json"),
        r#"{"n_p":3,"m_p":3,"k":2,"m_qprime":2}"#,
    )
    .unwrap();
    let o = xclab(
        &out,
        &[
            "audit",
            "--matrix",
            "A.mat",
            "--decomp",
            "witness.decomp",
            "--regions",
            "r.json",
            "--r-s",
            "2",
            "--r-tprime",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}
