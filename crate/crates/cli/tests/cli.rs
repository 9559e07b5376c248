use std::path::Path;
use std::process::{Command, Output};

fn suplab(args: &[&str]) -> Output {
    suplab_env(args, None)
}

fn suplab_env(args: &[&str], data_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_suplab"));
    cmd.args(args).env_remove("SUPLAB_DATA_DIR");
    if let Some(d) = data_dir {
        cmd.env("SUPLAB_DATA_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn census_at_i_has_four_matrices() {
    let o = suplab(&["census", "--z", "0,1", "--level", "1", "--l", "1", "--delta", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "z.x,z.y,N,l,delta,m_star,m_upper,m_parab,total");
    assert_eq!(lines[2].rsplit(',').next(), Some("4"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn census_range_emits_one_row_per_determinant() {
    let o = suplab(&["census", "--z=-0.2,0.4", "--level", "5", "--l", "1", "--l-max", "6", "--delta", "12"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<u64> = r.split(',').skip(5).map(|c| c.parse().unwrap()).collect();
        assert_eq!(r.split(',').nth(3).unwrap(), (i + 1).to_string());
        assert_eq!(cells[0] + cells[1] + cells[2], cells[3]);
    }
}

#[test]
fn delta_passes_form_check() {
    let v = json(&suplab(&["form", "check", "--eta", "1:24", "--trunc", "100"]));
    let h = &v["result"]["hecke"];
    for flag in ["multiplicative_ok", "recursion_ok", "bad_prime_ok"] {
        assert_eq!(h[flag], true);
    }
    assert_eq!(v["result"]["deligne_ok"], true);
    assert_eq!(v["config"]["command"]["form"]["check"]["trunc"], 100);
}

#[test]
fn non_eigenform_fails_check_with_exit_one() {
    // Δ with a(10) corrupted breaks multiplicativity
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"level":1,"weight":12,"coeffs":[1,-24,252,-1472,4830,-6048,-16744,84480,-113643,5]}"#)
        .unwrap();
    let o = suplab(&["form", "check", "--coeffs", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["passed"], false);
}

#[test]
fn fit_recovers_synthetic_slope() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let mut text = String::from("# config: synthetic\nN,k,sup,normalized_sup\n");
    for n in [5.0f64, 6.0, 7.0, 10.0, 30.0] {
        text += &format!("{n},4,1.0,{}\n", 2.0 * n.powf(-1.0 / 6.0));
    }
    std::fs::write(&p, text).unwrap();
    let v = json(&suplab(&["fit", "--table", p.to_str().unwrap()]));
    let slope = v["result"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0 / 6.0).abs() < 1e-12, "{slope}");
}

#[test]
fn exit_codes() {
    assert_eq!(suplab(&["bogus"]).status.code(), Some(2));
    assert_eq!(suplab(&["census", "--z", "0,1"]).status.code(), Some(2));
    assert_eq!(suplab(&["scan", "--form", "5.4", "--coeffs", "x.json"]).status.code(), Some(2));
    assert_eq!(suplab(&["census", "--z", "0,-1", "--level", "1", "--l", "1", "--delta", "2"]).status.code(), Some(1));
    assert_eq!(suplab(&["reduce", "--z", "0.1,0.5", "--level", "4"]).status.code(), Some(1));
    assert_eq!(suplab(&["scan", "--form", "11.2"]).status.code(), Some(1));
    assert_eq!(suplab(&["amplify", "--level", "5", "--L", "3", "--form", "nope"]).status.code(), Some(1));
    assert_eq!(suplab(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["amplify", "--level", "7", "--L", "5", "--form", "7.4"][..],
        &["reduce", "--z=-3.3,0.004", "--level", "30"][..],
        &["scan", "--form", "6.4", "--grid", "24,24"][..],
    ] {
        let a = suplab(args);
        let b = suplab(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn config_echoes_defaults() {
    let v = json(&suplab(&["scan", "--form", "5.4", "--grid", "16,16"]));
    let c = &v["config"]["command"]["scan"];
    assert_eq!(c["opts"]["refine"], 3);
    assert_eq!(c["opts"]["top"], 10);
    assert_eq!(c["opts"]["trunc"], 2000);
    assert_eq!(c["opts"]["grid"]["nx"], 16);
    assert!(v["config"]["threads"].as_u64().unwrap() >= 1);
    let r = &v["result"];
    let ratio = r["sup_value"].as_f64().unwrap() / r["petersson"].as_f64().unwrap().sqrt();
    assert!((ratio - r["normalized_sup"].as_f64().unwrap()).abs() < 1e-12 * ratio);
}

#[test]
fn export_import_round_trip_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(suplab(&["form", "export", "--form", "7.4", "--trunc", "300", "--output", a.to_str().unwrap()])
        .status
        .success());
    assert!(suplab(&["form", "import", "--coeffs", a.to_str().unwrap(), "--output", b.to_str().unwrap()])
        .status
        .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = suplab(&["form", "expand", "--eta", "1:24", "--trunc", "4"]);
    assert_eq!(stdout(&o).trim(), r#"{"level":1,"weight":12,"coeffs":[1,-24,252,-1472]}"#);
}

#[test]
fn data_dir_overrides_builtin_tables() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("form_7_4.json"),
        r#"{"level":7,"weight":4,"coeffs":[1,-1,-2,-7,16,2,-7,15,-23,99]}"#,
    )
    .unwrap();
    assert!(suplab(&["form", "export", "--form", "7.4", "--trunc", "10"]).status.success());
    let o = suplab_env(&["form", "export", "--form", "7.4", "--trunc", "10"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pretrace_check_balances() {
    let v = json(&suplab(&["pretrace-check", "--level", "6", "--weight", "4", "--z=0.27,0.41", "--delta-max", "30"]));
    let r = &v["result"];
    assert!(r["residual"].as_f64().unwrap() < 1e-2, "{r}");
    assert_eq!(v["config"]["command"]["pretrace-check"]["petersson_tol"], 1e-4);
}

#[test]
fn parabolic_sum_vanishes_off_squares() {
    let v =
        json(&suplab(&["parabolic", "--z", "0.1,0.7", "--level", "5", "--l", "4", "--weight", "4", "--t-max", "64"]));
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
    let v = json(&suplab(&["parabolic", "--z", "0.1,0.7", "--level", "5", "--l", "3", "--weight", "4"]));
    assert_eq!(v["result"]["terms"], 0);
    assert_eq!(v["result"]["value"], 0.0);
    assert_eq!(
        suplab(&["parabolic", "--z", "0.1,0.7", "--level", "5", "--l", "4", "--weight", "3"]).status.code(),
        Some(1)
    );
}
