use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const F: &str = "x1^7*x2^7*x3^7 + x1*x2^7*x3^17";
const G: &str = "x2^3*x3^34 + x1^8*x2^8*x3^8";
const PRODUCT: &str = "x1^15*x2^15*x3^15 + x1^9*x2^15*x3^25 + x1^7*x2^10*x3^41 + x1*x2^10*x3^51";

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyred-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyred")).args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_polyred"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn multiply_every_method() {
    let f = scratch("mul_f.txt", F);
    let g = scratch("mul_g.txt", G);
    for method in ["sks", "iks", "crt", "hybrid", "direct"] {
        let o = run(&["multiply", f.to_str().unwrap(), g.to_str().unwrap(), "--method", method]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).trim(), PRODUCT, "{method}");
    }
}

#[test]
fn stats_report_the_degree() {
    let f = scratch("stats_f.txt", F);
    let g = scratch("stats_g.txt", G);
    let o = run(&["multiply", f.to_str().unwrap(), g.to_str().unwrap(), "--method", "iks", "--stats"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let json: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(json["d_hx"], 13217);
    assert_eq!(json["plan"], "method=iks n=3 exponents=1,16,256");
}

#[test]
fn reduce_then_recover() {
    let f = scratch("rr_f.txt", F);
    let g = scratch("rr_g.txt", G);
    let o = run(&["reduce", f.to_str().unwrap(), g.to_str().unwrap(), "--method", "crt", "--bases", "17,31,52", "--product"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("f_x = x^69 + x^7"), "{text}");
    assert!(text.contains("plan = method=crt n=3 bases=17,31,52 modulus=27404 cofactors=1612,884,527 inverses=11,2,15"));
    let saved = scratch("rr_reduced.txt", &text);
    let h = text.lines().find_map(|l| l.strip_prefix("h_x = ")).unwrap();
    let h = scratch("rr_h.txt", h);
    let o = run(&["recover", h.to_str().unwrap(), "--plan-file", saved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), PRODUCT);
}

#[test]
fn recover_from_stdin() {
    let o = run_with_stdin(&["recover", "-", "--plan", "method=sks n=3 base=52"], "x^19299");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "x1^7*x2^7*x3^7");
}

#[test]
fn exponent_beyond_the_plan_exits_with_mismatch() {
    let o = run_with_stdin(&["recover", "-", "--plan", "method=sks n=3 base=52"], "x^140608");
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn malformed_input_exits_with_input_error() {
    let bad = scratch("bad.txt", "x1 + + x2");
    let f = scratch("bad_f.txt", F);
    let o = run(&["multiply", f.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["multiply", f.to_str().unwrap(), f.to_str().unwrap(), "--method", "iks", "--bases", "3,5,7"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["recover", "-", "--plan", "method=iks n=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_methods() {
    let f = scratch("v_f.txt", F);
    let g = scratch("v_g.txt", G);
    let o = run(&["verify", f.to_str().unwrap(), g.to_str().unwrap(), "--method", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for m in ["sks", "iks", "crt", "hybrid"] {
        assert!(text.contains(&format!("{m}: ok")), "{text}");
    }
}

#[test]
fn field_coefficients() {
    let f = scratch("gf_f.txt", "3*x1 + 4*x2");
    let o = run(&["multiply", f.to_str().unwrap(), f.to_str().unwrap(), "--modulus", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2*x1^2 + 3*x1*x2 + 2*x2^2");
    let o = run(&["multiply", f.to_str().unwrap(), f.to_str().unwrap(), "--modulus", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_csv() {
    let o = run(&["bench", "table3", "--tuple", "3,4,5", "--terms", "30", "--trials", "2", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,d1,d2,d3,L,T,trial,seed,d_sks,d_iks,d_hr,ratio_iks,ratio_hr,pred_iks,pred_hr");
    assert_eq!(lines.count(), 2);
    let again = run(&["bench", "table3", "--tuple", "3,4,5", "--terms", "30", "--trials", "2", "--seed", "9"]);
    assert_eq!(stdout(&again), text);
}
