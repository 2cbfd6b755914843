use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use casimir_core::{total_pressure, CavityConfig, Material, QuadratureSettings};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_casimir-enz"));
    cmd.env_remove("CASIMIR_ENZ_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn pressure_prints_one_json_line_matching_the_library() {
    let o = run(&["pressure", "--material", "drude:3,0.035", "--t", "2nm", "--d", "100nm", "--rel-tol", "1e-7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    let cfg = CavityConfig::new(Material::drude(3.0, 0.035).unwrap(), 2.0, 100.0).unwrap();
    let lib = total_pressure(&cfg, &QuadratureSettings::with_rel_tol(1e-7)).unwrap();
    assert_eq!(v["pressure_Pa"].as_f64().unwrap(), lib.pressure);
    assert!(v["error_Pa"].as_f64().unwrap() >= 0.0);
}

#[test]
fn pressure_grid_gives_one_line_per_combination() {
    let o = run(&["pressure", "--material", "lorentz:1,15,0.01", "--t", "2, 20 nm", "--d", "10,100 nm", "--rel-tol", "1e-6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn validation_errors_exit_with_2_and_name_the_problem() {
    let o = run(&["pressure", "--material", "drude:3,0.035", "--t", "-2nm", "--d", "10nm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--t"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    fs::write(&path, "task = pressure\nmaterial = drude:3,0.035\nthickness = 2 nm\n").unwrap();
    let o = run(&["pressure", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3: unknown key 'thickness'"), "{}", stderr(&o));

    let o = run(&["pressure", "--material", "drude:3,0.035", "--d", "10nm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing required key 't'"));
}

#[test]
fn conductor_optimum_search_is_a_numerical_failure() {
    let o = run(&[
        "fom",
        "--material",
        "drude:3,0.035",
        "--t",
        "log(1, 200, 8) nm",
        "--d",
        "10nm",
        "--find-optimum",
        "--rel-tol",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no interior FOM maximum"));
}

#[test]
fn scenario_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.scn");
    let out = dir.path().join("out/fom.csv");
    fs::write(
        &path,
        format!(
            "# Lorentz film\ntask = fom\nmaterial = lorentz:1,15,0.01\nt = log(1, 100, 9) nm\nd = 10 nm\nrel_tol = 1e-6\noutput = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = run(&["fom", "--scenario", path.to_str().unwrap(), "--d", "20 nm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# d = 20 nm"));
    assert!(csv.contains("# rel_tol = 0.000001"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t_nm,d_nm,pressure_Pa,fom_Pa_per_nm");
    assert_eq!(rows.len(), 10);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(1) == Some("20")));

    let o = run(&["pressure", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("declares task 'fom'"));
}

#[test]
fn spectrum_bodies_do_not_depend_on_thread_count() {
    let args = [
        "spectrum",
        "--material",
        "drude:3,0.035",
        "--t",
        "2nm",
        "--d",
        "10nm",
        "--points",
        "40",
        "--refine",
        "false",
    ];
    let one = bin().args(args).env("CASIMIR_ENZ_THREADS", "1").output().unwrap();
    let four = bin().args(args).args(["--threads", "4"]).output().unwrap();
    assert!(one.status.success() && four.status.success());
    let a = stdout(&one);
    assert_eq!(body(&a), body(&stdout(&four)));
    let lines: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "omega_eV,p_total,p_ev_TM,p_ev_TE,p_prop_TM,p_prop_TE");
    assert_eq!(lines.len(), 41);
    for row in &lines[1..] {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - (v[2] + v[3] + v[4] + v[5])).abs() <= 1e-9 * v[1].abs().max(1.0));
    }
}

#[test]
fn modes_reports_both_thin_film_pairs() {
    let o = run(&["modes", "--material", "drude:3,0.035", "--t", "2nm", "--d", "10nm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let labels: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(labels, ["SR_SPP", "ENZ"]);
    let band = |label: &str| -> f64 { rows.iter().find(|r| r[1] == label).unwrap()[6].parse().unwrap() };
    assert!(band("ENZ") > 0.0 && band("SR_SPP") < 0.0);
}

#[test]
fn fig1_preset_writes_panels_and_manifest_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&["preset", "fig1", "--outdir", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["fig1a_t200_d10.csv", "fig1b_t2_d10.csv"] {
        let x = fs::read_to_string(a.path().join(name)).unwrap();
        let y = fs::read_to_string(b.path().join(name)).unwrap();
        assert_eq!(body(&x), body(&y));
        assert!(x.contains("# material = drude:3,0.035"));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let settings = &f["settings"];
        for key in ["t", "d", "rel_tol", "max_evals", "omega_min", "omega_max", "points", "refine"] {
            assert!(settings[key].is_string(), "manifest misses {key}");
        }
    }
}

#[test]
fn fig_s2_without_tables_is_actionable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "preset",
        "figS2",
        "--outdir",
        dir.path().to_str().unwrap(),
        "--data-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("au_nk.txt") && err.contains("--data-dir"), "{err}");
}

#[test]
fn materials_show_reads_shipped_tables() {
    let au = data_dir().join("au_nk.txt");
    let o = run(&[
        "materials",
        "show",
        au.to_str().unwrap(),
        "--low-tail",
        "drude:7.872,0.053",
        "--points",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    // ε(iξ) is real, above 1 and decreasing
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3] && w[1][3] > 1.0));
}

#[test]
fn optics_reflect_emits_requested_rows() {
    let o = run(&["optics", "reflect", "--material", "drude:3,0.035", "--t", "20nm", "--omega", "2", "--points", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(body(&stdout(&o)).lines().count(), 8);
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["preset", "fig7", "--outdir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
