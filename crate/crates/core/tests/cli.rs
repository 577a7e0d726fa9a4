use tdesign::cli::run;
use tdesign::design::Design;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn tdesign(args: &[&str]) -> Out {
    let mut argv = vec!["tdesign"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(argv, &mut o, &mut e);
    Out {
        code,
        stdout: String::from_utf8(o).unwrap(),
        stderr: String::from_utf8(e).unwrap(),
    }
}

fn weights(json: &str) -> Vec<f64> {
    Design::from_json(json).unwrap().0.weights().to_vec()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn reported_value(stderr: &str) -> f64 {
    stderr.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn maximin_three_point_design() {
    let r = tdesign(&["maximin", "--models", "poly", "--m1", "0", "--m2", "2", "--interval", "-1", "1", "--bset", "-2", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(close(&weights(&r.stdout), &[0.3125, 0.375, 0.3125], 1e-9));
}

#[test]
fn bayes_uniform_efficiency_prior() {
    let r = tdesign(&["bayes", "--models", "poly", "--m1", "0", "--m2", "2", "--prior", "uniform-eff", "--a", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(close(&weights(&r.stdout), &[23.0 / 76.0, 15.0 / 38.0, 23.0 / 76.0], 1e-12));
}

#[test]
fn bayes_discrete_prior() {
    let r = tdesign(&["bayes", "--models", "poly", "--m1", "0", "--m2", "2", "--prior", "atoms", "--atom", "-0.5:0.5", "--atom", "0.5:0.5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    // β = 1/4: end weights (1 + β)/4
    assert!(close(&weights(&r.stdout), &[0.3125, 0.375, 0.3125], 1e-9));
}

#[test]
fn poly_two_point_design() {
    let r = tdesign(&["poly", "--m", "2", "--beta", "1"]);
    assert_eq!(r.code, 0);
    let (d, _) = Design::from_json(&r.stdout).unwrap();
    assert_eq!(d.support(), &[-1.0, 1.0]);
    assert_eq!(d.weights(), &[0.5, 0.5]);
}

#[test]
fn eff_reproduces_local_value() {
    let r = tdesign(&["local", "--models", "poly", "--m1", "1", "--m2", "3", "--b", "0.4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, &r.stdout).unwrap();
    let e = tdesign(&["eff", "--models", "poly", "--m1", "1", "--m2", "3", "--b", "0.4", "--design", path.to_str().unwrap()]);
    assert_eq!(e.code, 0, "{}", e.stderr);
    let report: serde_json::Value = serde_json::from_str(&e.stdout).unwrap();
    let t = report["t"].as_f64().unwrap();
    let v = reported_value(&r.stderr);
    assert!((t - v).abs() <= 1e-12 * v, "{t} vs {v}");
}

#[test]
fn eff_reproduces_nonlinear_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mm.json");
    let p = path.to_str().unwrap();
    let r = tdesign(&["local", "--models", "mm-emax", "--theta2", "-1,1,2", "-o", p]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let e = tdesign(&["eff", "--models", "mm-emax", "--theta2", "-1,1,2", "--design", p]);
    let report: serde_json::Value = serde_json::from_str(&e.stdout).unwrap();
    let v = reported_value(&r.stderr);
    assert!((report["t"].as_f64().unwrap() - v).abs() <= 1e-12 * v);
    assert!((report["efficiency"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn eff_sweep_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mm.json");
    let p = path.to_str().unwrap();
    assert_eq!(tdesign(&["local", "--models", "mm-emax", "--theta2", "-0.25,1,2", "-o", p]).code, 0);
    let e = tdesign(&["eff", "--models", "mm-emax", "--theta2", "-1,1,2", "--design", p, "--sweep", "2:6:5"]);
    assert_eq!(e.code, 0, "{}", e.stderr);
    let lines: Vec<&str> = e.stdout.lines().collect();
    assert_eq!(lines[0], "theta22,efficiency");
    assert_eq!(lines.len(), 6);
    for l in &lines[1..] {
        let eff: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&eff));
    }
}

#[test]
fn rvalue_report() {
    let r = tdesign(&["rvalue", "--models", "poly", "--m1", "0", "--m2", "2", "--b", "0"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    // best constant for x² on [-1, 1] is 1/2, deviation 1/2
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn certify_reports_least_favourable_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    assert_eq!(tdesign(&["maximin", "--models", "poly", "--m1", "0", "--m2", "2", "--bset", "-inf", "inf", "-o", p]).code, 0);
    let c = tdesign(&["certify", "--models", "poly", "--m1", "0", "--m2", "2", "--bset", "-inf", "inf", "--design", p]);
    assert_eq!(c.code, 0, "{}", c.stderr);
    let v: serde_json::Value = serde_json::from_str(&c.stdout).unwrap();
    assert_eq!(v["bound_check"], "pass");
    assert!((v["value"].as_f64().unwrap() - (23.0 - 10.0 * 5f64.sqrt())).abs() < 1e-9);
    assert!(v["equivalence_gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn power_curves_are_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b1.json");
    std::fs::write(&path, r#"{"interval":[-1,1],"support":[-1,0,1],"weights":[0.3,0.4,0.3]}"#).unwrap();
    let arg = format!("B1={}", path.to_str().unwrap());
    let args = ["power", "--design", &arg, "--vartheta", "0:1:3", "--replications", "2000", "--seed", "7"];
    let a = tdesign(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, tdesign(&args).stdout);
    let lines: Vec<&str> = a.stdout.lines().collect();
    assert_eq!(lines[0], "vartheta2,power,stderr,design_id,contamination");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",B1,false"), "{}", lines[1]);
}

#[test]
fn exit_codes() {
    assert_eq!(tdesign(&[]).code, 1);
    assert_eq!(tdesign(&["frobnicate"]).code, 1);
    assert_eq!(tdesign(&["--help"]).code, 0);
    let missing = tdesign(&["maximin", "--models", "poly", "--m1", "0", "--bset", "-1", "1"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("Usage"));
    assert_eq!(tdesign(&["maximin", "--models", "poly", "--m1", "0", "--m2", "2", "--bset", "-1", "2"]).code, 2);
    assert_eq!(tdesign(&["poly", "--m", "2", "--beta", "1.5"]).code, 2);
    // the uniform design is not maximin optimal, so its certificate fails
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.json");
    std::fs::write(&path, r#"{"interval":[-1,1],"support":[-1,0,1],"weights":[0.25,0.5,0.25]}"#).unwrap();
    let c = tdesign(&["certify", "--models", "poly", "--m1", "0", "--m2", "2", "--bset", "-2", "2", "--design", path.to_str().unwrap()]);
    assert_eq!(c.code, 3, "{}", c.stderr);
}
