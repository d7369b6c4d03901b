use std::path::{Path, PathBuf};

use locsep_cli::run_command_with;
use tempfile::TempDir;

fn n1_net() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/n1.net")
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("locsep").chain(args.iter().copied());
    let code = run_command_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn certify(dir: &TempDir) -> String {
    let cert = path(dir, "c.json");
    let net = n1_net();
    let r = run(&["certify", net.to_str().unwrap(), "msrc", "mtgt3", "-o", &cert]);
    assert_eq!(r.code, 0, "{}", r.err);
    cert
}

#[test]
fn decide_verdicts() {
    let net = n1_net();
    let net = net.to_str().unwrap();
    let r = run(&["decide", net, "msrc", "mtgt3"]);
    assert_eq!((r.code, r.out.as_str()), (3, "unreachable\n"));
    let r = run(&["decide", net, "msrc", "mtgt4"]);
    assert_eq!((r.code, r.out.as_str()), (0, "reachable\n"));
}

#[test]
fn decide_writes_witness() {
    let dir = TempDir::new().unwrap();
    let w = path(&dir, "w.json");
    let r = run(&["decide", n1_net().to_str().unwrap(), "msrc", "mtgt4", "-w", &w]);
    assert_eq!(r.code, 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(doc["support"].as_array().unwrap().len(), 4);
}

#[test]
fn certify_then_check() {
    let dir = TempDir::new().unwrap();
    let cert = certify(&dir);
    let r = run(&["check", n1_net().to_str().unwrap(), &cert]);
    assert_eq!((r.code, r.out.as_str()), (0, "accept\n"));
}

#[test]
fn certify_refuses_reachable_pair() {
    let dir = TempDir::new().unwrap();
    let r = run(&["certify", n1_net().to_str().unwrap(), "msrc", "mtgt4", "-o", &path(&dir, "c.json")]);
    assert_eq!(r.code, 4);
    assert!(!dir.path().join("c.json").exists());
}

#[test]
fn tampered_certificate_is_rejected_with_triple() {
    let dir = TempDir::new().unwrap();
    let cert = certify(&dir);
    let text = std::fs::read_to_string(&cert).unwrap();
    let needle = "\"p2\": \"-1\"";
    assert_eq!(text.matches(needle).count(), 1);
    let tampered = path(&dir, "tampered.json");
    std::fs::write(&tampered, text.replace(needle, "\"p2\": \"1\"")).unwrap();
    for jobs in ["1", "8"] {
        let r = run(&["check", n1_net().to_str().unwrap(), &tampered, "--jobs", jobs]);
        assert_eq!(r.code, 5);
        assert_eq!(r.out, "reject: not closed: direction fwd transition t1 clause 1\n");
    }
}

#[test]
fn certificate_for_another_net_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cert = certify(&dir);
    let other = path(&dir, "other.net");
    let text = std::fs::read_to_string(n1_net()).unwrap();
    std::fs::write(&other, text.replace("out p4:1\n\nmarking", "out p4:2\n\nmarking")).unwrap();
    let r = run(&["check", &other, &cert]);
    assert_eq!(r.code, 5);
    assert!(r.out.contains("different net"));
}

#[test]
fn separate_prints_one_sided_formulas() {
    let dir = TempDir::new().unwrap();
    let cert = certify(&dir);
    let fwd = run(&["separate", &cert, "--direction", "fwd"]);
    assert_eq!(fwd.code, 0);
    assert_eq!(fwd.out, "[-p4 < 0] | [-p1 - p2 - p4 < 0]\n");
    let bwd = run(&["separate", &cert, "--direction", "bwd"]);
    assert_eq!(bwd.code, 0);
    assert!(bwd.out.contains("p3"));
}

#[test]
fn compile_set2set_round() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.poly");
    std::fs::write(&a, "point p1:2\n").unwrap();
    for (bound, expected) in [("1", 0), ("2", 3)] {
        let b = path(&dir, "b.poly");
        std::fs::write(&b, format!("p4 >= {bound}\n")).unwrap();
        let out = path(&dir, "q.net");
        let r = run(&["compile-set2set", n1_net().to_str().unwrap(), &a, &b, "-o", &out]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert_eq!(run(&["decide", &out, "source", "target"]).code, expected);
    }
}

#[test]
fn fuzz_is_deterministic_across_jobs() {
    let base = ["fuzz", "--spec", "3,3,2,2", "--count", "12", "--seed", "9", "--json"];
    let seq = run(&[&base[..], &["--jobs", "1"]].concat());
    let par = run(&[&base[..], &["--jobs", "8"]].concat());
    assert_eq!(seq.code, 0, "{}", seq.out);
    assert_eq!(seq.out, par.out);
    let text = run(&base[..base.len() - 1]);
    assert!(text.out.ends_with("violations 0\n"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["decide"]).code, 2);
    assert_eq!(run(&["separate", "c.json", "--direction", "up"]).code, 2);
    assert_eq!(run(&["fuzz", "--spec", "1,2"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    let r = run(&["decide", "/nonexistent/n.net", "a", "b"]);
    assert_eq!(r.code, 1);
    assert!(r.err.starts_with("error:"));
    let r = run(&["decide", n1_net().to_str().unwrap(), "msrc", "nope"]);
    assert_eq!(r.code, 1);
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.net");
    std::fs::write(&bad, "places p1\nmarking m p1:2/4\n").unwrap();
    let r = run(&["decide", &bad, "m", "m"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("line 2"));
}

#[test]
fn every_command_is_byte_stable() {
    let net = n1_net();
    let net = net.to_str().unwrap();
    let dir = TempDir::new().unwrap();
    let produce = |tag: &str| -> Vec<String> {
        let cert = path(&dir, &format!("c{tag}.json"));
        let wit = path(&dir, &format!("w{tag}.json"));
        let poly = path(&dir, "a.poly");
        std::fs::write(&poly, "point p1:2\n").unwrap();
        let compiled = path(&dir, &format!("q{tag}.net"));
        let mut outs = vec![
            run(&["decide", net, "msrc", "mtgt4", "-w", &wit]).out,
            run(&["certify", net, "msrc", "mtgt3", "-o", &cert]).out,
            run(&["check", net, &cert, "--jobs", "8"]).out,
            run(&["separate", &cert, "--direction", "bwd"]).out,
            run(&["compile-set2set", net, &poly, &poly, "-o", &compiled]).out,
            run(&["fuzz", "--spec", "3,3,2,2", "--count", "5", "--seed", "1"]).out,
        ];
        for f in [&cert, &wit, &compiled] {
            outs.push(std::fs::read_to_string(f).unwrap());
        }
        outs
    };
    assert_eq!(produce("1"), produce("2"));
}
