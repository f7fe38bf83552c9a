use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn factorkde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factorkde")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = factorkde(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, n: usize, d: usize) -> std::path::PathBuf {
    let path = dir.join("sample.csv");
    let (n, d) = (n.to_string(), d.to_string());
    ok(&["simulate", "--family", "gumbel", "--theta", "1.4", "--n", &n, "--d", &d, "--seed", "7", "--out", s(&path)]);
    path
}

#[test]
fn simulate_writes_uniform_sample_and_latent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let latent = dir.path().join("v0.csv");
    ok(&[
        "simulate", "--family", "clayton", "--theta", "2", "--n", "50", "--d", "4", "--seed", "3", "--out", s(&out),
        "--latent-out", s(&latent),
    ]);
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["u1", "u2", "u3", "u4"]);
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().flatten().all(|&x| x > 0.0 && x < 1.0));
    let (h, rows) = read_csv(&latent);
    assert_eq!(h, ["v0"]);
    assert_eq!(rows.len(), 50);
}

#[test]
fn simulate_is_reproducible_and_precise() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), 30, 3);
    let first = fs::read_to_string(&a).unwrap();
    simulate(dir.path(), 30, 3);
    assert_eq!(first, fs::read_to_string(&a).unwrap());
    let field = first.lines().nth(1).unwrap().split(',').next().unwrap();
    let digits = field.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert!(digits >= 9, "{field}");
}

#[test]
fn proxy_outputs_ranks_in_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 40, 5);
    let out = dir.path().join("proxy.csv");
    ok(&["proxy", "--in", s(&data), "--already-uniform", "--out", s(&out)]);
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["z_bar", "v_hat", "w_hat"]);
    let mut v: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    v.sort_by(f64::total_cmp);
    for (i, x) in v.iter().enumerate() {
        assert!((x - (i + 1) as f64 / 41.0).abs() < 1e-12);
    }
}

#[test]
fn pair_density_grid_by_name_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 200, 3);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["pair-density", "--in", s(&data), "--cols", "u1,u3", "--grid", "11", "--out", s(&a)]);
    ok(&["pair-density", "--in", s(&data), "--cols", "1,3", "--grid", "11", "--out", s(&b)]);
    let (h, rows) = read_csv(&a);
    assert_eq!(h, ["u", "v", "density"]);
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| r[2] >= 0.0 && r[2].is_finite()));
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    let r = factorkde(&["pair-density", "--in", s(&data), "--cols", "u1,u2,u3", "--out", s(&a)]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn factor_density_and_rmsd() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 200, 6);
    let eval = dir.path().join("eval.csv");
    fs::write(&eval, "a,b,c\n0.5,0.5,0.5\n0.2,0.3,0.4\n0.9,0.8,0.7\n").unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    ok(&["factor-density", "--in", s(&data), "--k", "3", "--eval", s(&eval), "--out", s(&x)]);
    ok(&["factor-density", "--in", s(&data), "--k", "3", "--eval", s(&eval), "--out", s(&y), "--quad-nodes", "800"]);
    let (h, rows) = read_csv(&x);
    assert_eq!(h, ["u1", "u2", "u3", "density"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[3] > 0.0));
    let out = ok(&["rmsd", "--a", s(&x), "--b", s(&y)]);
    let diff: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(diff < 1e-3, "{diff}");
    let out = ok(&["rmsd", "--a", s(&x), "--b", s(&x)]);
    let same: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(same, 0.0);
}

#[test]
fn factor_density_rejects_bad_k() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 50, 3);
    let eval = dir.path().join("eval.csv");
    fs::write(&eval, "a,b\n0.5,0.5\n").unwrap();
    let out = dir.path().join("x.csv");
    let r = factorkde(&["factor-density", "--in", s(&data), "--k", "4", "--eval", s(&eval), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn scree_sums_to_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 300, 5);
    let out = factorkde(&["scree", "--in", s(&data)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let eig: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eig.len(), 5);
    assert!((eig.iter().sum::<f64>() - 5.0).abs() < 1e-6);
    assert!(eig.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn already_uniform_rejects_raw_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("raw.csv");
    fs::write(&data, "x,y\n1.5,-2\n0.3,4\n2.0,1.0\n-1,0.5\n").unwrap();
    let out = dir.path().join("p.csv");
    let r = factorkde(&["proxy", "--in", s(&data), "--already-uniform", "--out", s(&out)]);
    assert!(!r.status.success());
    ok(&["proxy", "--in", s(&data), "--out", s(&out)]);
}

#[test]
fn mc_study_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.csv");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"family": "clayton", "theta": 2.0, "n": 60, "d": 4, "k": 2, "reps": 3, "seed0": 11,
                "factor.quad_nodes": 50, "output": "{}"}}"#,
            s(&out)
        ),
    )
    .unwrap();
    let r = ok(&["mc-study", "--config", s(&cfg)]);
    let stdout = String::from_utf8(r.stdout).unwrap();
    assert!(stdout.starts_with("estimator,rmse"));
    assert_eq!(stdout.lines().count(), 3);
    assert!(out.exists());
    let again = dir.path().join("again.csv");
    ok(&["mc-study", "--config", s(&cfg), "--out", s(&again)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), fs::read_to_string(&again).unwrap());
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"family": "frank", "theta": 2.0, "n": 60, "d": 4, "k": 2, "reps": 3, "seed0": 1}"#).unwrap();
    assert_eq!(factorkde(&["mc-study", "--config", s(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, r#"{"family": "gumbel", "theta": 1.4, "n": 60, "d": 4, "k": 9, "reps": 3, "seed0": 1}"#).unwrap();
    assert_eq!(factorkde(&["mc-study", "--config", s(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, "not json").unwrap();
    assert_eq!(factorkde(&["mc-study", "--config", s(&cfg)]).status.code(), Some(2));
    let r = factorkde(&["simulate", "--family", "gumbel", "--theta", "0.5", "--n", "5", "--d", "2", "--out", "x.csv"]);
    assert_eq!(r.status.code(), Some(2));
}
