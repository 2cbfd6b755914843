//! Fixed figure data sets. Parameters are pinned in code so reruns cannot
//! drift.

use std::path::{Path, PathBuf};

use casimir_core::materials::{LowFrequencyTail, PowerLawDecay};
use casimir_core::real::geomspace;
use casimir_core::{asymptote_check, default_thickness_grid, Material, QuadratureSettings, SpectrumOptions};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::output::{plain, sci, write_file, Table, VERSION};
use crate::run::{fom_table, modes_table, optimum_table, spectrum_table};
use crate::scenario::{MaterialSpec, Scenario, Task};

pub const PRESETS: &[&str] = &["fig1", "fig2", "fig3", "figS1", "figS2"];

const DRUDE: MaterialSpec = MaterialSpec::Drude { omega_p: 3.0, gamma_p: 0.035 };
const LORENTZ: MaterialSpec = MaterialSpec::Lorentz { c_l: 1.0, omega_l: 15.0, gamma_l: 0.01 };
const GAPS: [f64; 3] = [10.0, 100.0, 1000.0];
const MODE_GAPS: [f64; 7] = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

/// Gold: tabulated n,k with a Drude continuation below the table.
pub const AU_FILE: &str = "au_nk.txt";
pub const AU_TAIL: LowFrequencyTail = LowFrequencyTail::DrudeTail { omega_p: 7.872, gamma_p: 0.053 };
pub const AU_DECAY: PowerLawDecay = PowerLawDecay { exponent: 2.0 };
/// Fused silica: constant continuation below, faster decay above.
pub const SIO2_FILE: &str = "sio2_nk.txt";
pub const SIO2_TAIL: LowFrequencyTail = LowFrequencyTail::Constant;
pub const SIO2_DECAY: PowerLawDecay = PowerLawDecay { exponent: 3.0 };

fn scenario(task: Task, material: MaterialSpec, thickness: Vec<f64>, gap: Vec<f64>) -> Scenario {
    let quad = match task {
        Task::Spectrum | Task::Modes => SpectrumOptions::default_quad(),
        Task::Pressure | Task::Fom => QuadratureSettings::default(),
    };
    Scenario {
        task,
        material,
        low_tail: None,
        high_decay: None,
        thickness,
        gap,
        quad,
        omega_min: None,
        omega_max: None,
        points: 600,
        refine: true,
        find_optimum: false,
        output: None,
    }
}

fn table_scenario(path: PathBuf, low: LowFrequencyTail, high: PowerLawDecay, gap: Vec<f64>) -> Scenario {
    Scenario {
        low_tail: Some(low),
        high_decay: Some(high),
        ..scenario(Task::Fom, MaterialSpec::Table { path }, default_thickness_grid(), gap)
    }
}

struct Panel {
    file: String,
    description: String,
    table: Table,
}

/// Runs a preset, writing one CSV per panel and `manifest.json` into
/// `outdir`. Returns the paths written.
pub fn run_preset(name: &str, outdir: &Path, data_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let panels = match name {
        "fig1" => fig1()?,
        "fig2" => fig2()?,
        "fig3" => fig3()?,
        "figS1" => fig_s1()?,
        "figS2" => fig_s2(data_dir)?,
        _ => {
            return Err(CliError::scenario(format!(
                "unknown preset '{name}' (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    let mut written = Vec::new();
    let mut files = Vec::new();
    for panel in &panels {
        let path = outdir.join(&panel.file);
        write_file(&path, &panel.table.render())?;
        let settings: Map<String, Value> = panel
            .table
            .header
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        files.push(json!({
            "file": panel.file,
            "description": panel.description,
            "settings": settings,
            "notes": panel.table.notes,
            "rows": panel.table.rows.len(),
        }));
        written.push(path);
    }
    let manifest = json!({ "preset": name, "version": VERSION, "files": files });
    let path = outdir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("json values serialize") + "\n";
    write_file(&path, &text)?;
    written.push(path);
    Ok(written)
}

fn spectrum_panel(file: &str, description: &str, material: MaterialSpec, t: f64, d: f64) -> CliResult<Panel> {
    let s = scenario(Task::Spectrum, material, vec![t], vec![d]);
    let m = s.build_material()?;
    Ok(Panel {
        file: file.into(),
        description: description.into(),
        table: spectrum_table(&s, &m)?,
    })
}

fn fig1() -> CliResult<Vec<Panel>> {
    Ok(vec![
        spectrum_panel("fig1a_t200_d10.csv", "Drude spectrum, t = 200 nm, d = 10 nm", DRUDE, 200.0, 10.0)?,
        spectrum_panel("fig1b_t2_d10.csv", "Drude spectrum, t = 2 nm, d = 10 nm", DRUDE, 2.0, 10.0)?,
    ])
}

fn fig_s1() -> CliResult<Vec<Panel>> {
    let mut panels = Vec::new();
    for t in [200.0, 2.0] {
        for d in GAPS {
            panels.push(spectrum_panel(
                &format!("figS1_t{t}_d{d}.csv"),
                &format!("Drude spectrum, t = {t} nm, d = {d} nm"),
                DRUDE,
                t,
                d,
            )?);
        }
    }
    Ok(panels)
}

fn fig2() -> CliResult<Vec<Panel>> {
    let s = scenario(Task::Modes, DRUDE, vec![2.0], MODE_GAPS.to_vec());
    let m = s.build_material()?;
    Ok(vec![Panel {
        file: "fig2_modes.csv".into(),
        description: "Drude mode tracking at t = 2 nm".into(),
        table: modes_table(&s, &m)?,
    }])
}

fn fig3() -> CliResult<Vec<Panel>> {
    let mut panels = Vec::new();
    for (spec, tag) in [(DRUDE, "drude"), (LORENTZ, "lorentz")] {
        let s = scenario(Task::Fom, spec, default_thickness_grid(), GAPS.to_vec());
        let m = s.build_material()?;
        panels.push(Panel {
            file: format!("fig3ab_fom_{tag}.csv"),
            description: format!("pressure and FOM versus thickness, {tag}"),
            table: fom_table(&s, &m)?,
        });
    }

    let drude = Material::drude(3.0, 0.035)?;
    let quad = QuadratureSettings::default();
    let (d, t_lo, t_hi, n) = (10.0, 20.0, 500.0, 16);
    let fit = asymptote_check(&drude, d, t_lo, t_hi, n, &quad)?;
    let header = vec![
        ("material".to_string(), DRUDE.to_string()),
        ("d".to_string(), format!("{d} nm")),
        ("t".to_string(), format!("log({t_lo}, {t_hi}, {n}) nm")),
        ("rel_tol".to_string(), quad.rel_tol.to_string()),
        ("max_evals".to_string(), quad.max_evals.to_string()),
    ];
    let mut table = Table::new(header, vec!["t_nm", "fom_Pa_per_nm", "fit_Pa_per_nm"]);
    table.notes.push(format!(
        "fit A(1 - exp(-alpha t))/(alpha t): A = {} Pa/nm, alpha = {} 1/nm, relative RMS = {}, top slope = {}",
        sci(fit.amplitude),
        sci(fit.alpha),
        sci(fit.rel_rms),
        sci(fit.top_slope)
    ));
    for p in &fit.points {
        let x = fit.alpha * p.t;
        let model = fit.amplitude * -(-x).exp_m1() / x;
        table.push(vec![plain(p.t), sci(p.fom), sci(model)]);
    }
    panels.push(Panel {
        file: "fig3c_asymptote.csv".into(),
        description: "Drude FOM with the attenuation asymptote fit".into(),
        table,
    });

    let s = Scenario {
        find_optimum: true,
        ..scenario(Task::Fom, LORENTZ, default_thickness_grid(), geomspace(10.0, 1000.0, 9))
    };
    let m = s.build_material()?;
    panels.push(Panel {
        file: "fig3d_topt.csv".into(),
        description: "Lorentz optimal thickness versus separation".into(),
        table: optimum_table(&s, &m)?,
    });
    Ok(panels)
}

fn fig_s2(data_dir: &Path) -> CliResult<Vec<Panel>> {
    let au = data_dir.join(AU_FILE);
    let sio2 = data_dir.join(SIO2_FILE);
    for (path, what) in [(&au, "Au"), (&sio2, "SiO2")] {
        if !path.is_file() {
            return Err(CliError::Io(format!(
                "{what} n,k table not found at {}. Run `python3 data/generate_tables.py` from the repository root, \
                 or pass --data-dir pointing at a directory holding {AU_FILE} and {SIO2_FILE} \
                 (three columns: energy_eV n k, '#' comments allowed)",
                path.display()
            )));
        }
    }
    let mut panels = Vec::new();
    for (s, tag) in [
        (table_scenario(au, AU_TAIL, AU_DECAY, GAPS.to_vec()), "au"),
        (table_scenario(sio2, SIO2_TAIL, SIO2_DECAY, GAPS.to_vec()), "sio2"),
    ] {
        let m = s.build_material()?;
        panels.push(Panel {
            file: format!("figS2_fom_{tag}.csv"),
            description: format!("FOM versus thickness from tabulated optical data, {tag}"),
            table: fom_table(&s, &m)?,
        });
    }
    Ok(panels)
}
