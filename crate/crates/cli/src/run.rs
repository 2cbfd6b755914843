//! Task runners. Each returns the text that goes to the output so callers
//! decide where it is written.

use casimir_core::optics::slab_reflection_real;
use casimir_core::real::geomspace;
use casimir_core::{
    force_spectrum, sweep_fom, total_pressure, track_modes, CavityConfig, Error, ForceSpectrum, Material, Polarization,
    SlabGeometry,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{plain, sci, Table};
use crate::scenario::{Scenario, Task};

#[derive(Serialize)]
struct PressureLine<'a> {
    material: &'a str,
    t_nm: f64,
    d_nm: f64,
    #[serde(rename = "pressure_Pa")]
    pressure_pa: f64,
    #[serde(rename = "error_Pa")]
    error_pa: f64,
    evaluations: usize,
}

/// Runs the scenario's task and returns its output text.
pub fn run_scenario(s: &Scenario) -> CliResult<String> {
    let material = s.build_material()?;
    match s.task {
        Task::Pressure => pressure_json(s, &material),
        Task::Spectrum => Ok(spectrum_table(s, &material)?.render()),
        Task::Modes => Ok(modes_table(s, &material)?.render()),
        Task::Fom if s.find_optimum => Ok(optimum_table(s, &material)?.render()),
        Task::Fom => Ok(fom_table(s, &material)?.render()),
    }
}

/// One JSON object per line for every (t, d) combination.
pub fn pressure_json(s: &Scenario, material: &Material) -> CliResult<String> {
    let combos: Vec<(f64, f64)> = s
        .thickness
        .iter()
        .flat_map(|&t| s.gap.iter().map(move |&d| (t, d)))
        .collect();
    let results: Vec<_> = combos
        .par_iter()
        .map(|&(t, d)| total_pressure(&CavityConfig::new(material.clone(), t, d)?, &s.quad))
        .collect::<Result<_, Error>>()?;
    let name = s.material.to_string();
    let mut out = String::new();
    for (&(t, d), r) in combos.iter().zip(&results) {
        let line = PressureLine {
            material: &name,
            t_nm: t,
            d_nm: d,
            pressure_pa: r.pressure,
            error_pa: r.est_abs_error,
            evaluations: r.evaluations,
        };
        out.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
        out.push('\n');
    }
    Ok(out)
}

pub fn spectrum_rows(spec: &ForceSpectrum, table: &mut Table) {
    for p in &spec.points {
        table.push(vec![
            sci(p.omega),
            sci(p.total()),
            sci(p.ev_tm),
            sci(p.ev_te),
            sci(p.prop_tm),
            sci(p.prop_te),
        ]);
    }
}

pub const SPECTRUM_COLUMNS: [&str; 6] = ["omega_eV", "p_total", "p_ev_TM", "p_ev_TE", "p_prop_TM", "p_prop_TE"];

/// Spectral density in Pa/eV on the scenario's frequency grid.
pub fn spectrum_table(s: &Scenario, material: &Material) -> CliResult<Table> {
    let cfg = CavityConfig::new(material.clone(), s.thickness[0], s.gap[0])?;
    let spec = force_spectrum(&cfg, &s.spectrum_options(material))?;
    let mut table = Table::new(s.echo(material), SPECTRUM_COLUMNS.to_vec());
    table.notes.push("spectral densities in Pa/eV".into());
    spectrum_rows(&spec, &mut table);
    Ok(table)
}

pub const MODE_COLUMNS: [&str; 7] = [
    "d_nm",
    "label",
    "omega_peak_eV",
    "omega_valley_eV",
    "band_lo_eV",
    "band_hi_eV",
    "band_pressure_Pa",
];

/// Peak-valley pairs and their band pressures for each gap.
pub fn modes_table(s: &Scenario, material: &Material) -> CliResult<Table> {
    let template = CavityConfig::new(material.clone(), s.thickness[0], s.gap[0])?;
    let rows = track_modes(&template, &s.gap, &s.spectrum_options(material))?;
    let mut table = Table::new(s.echo(material), MODE_COLUMNS.to_vec());
    for m in rows {
        table.push(vec![
            plain(m.separation),
            m.pair.label.to_string(),
            sci(m.pair.omega_peak),
            sci(m.pair.omega_valley),
            sci(m.pair.band_lo),
            sci(m.pair.band_hi),
            sci(m.band_pressure),
        ]);
    }
    Ok(table)
}

pub const FOM_COLUMNS: [&str; 4] = ["t_nm", "d_nm", "pressure_Pa", "fom_Pa_per_nm"];

/// FOM on the thickness grid for every gap.
pub fn fom_table(s: &Scenario, material: &Material) -> CliResult<Table> {
    let mut table = Table::new(s.echo(material), FOM_COLUMNS.to_vec());
    for &d in &s.gap {
        let scan = sweep_fom(material, d, &s.thickness, &s.quad)?;
        if let Some(t_opt) = scan.t_opt {
            table.notes.push(format!("d = {d} nm: t_opt = {} nm", sci(t_opt)));
        }
        for p in &scan.points {
            table.push(vec![plain(p.t), plain(p.d), sci(p.pressure), sci(p.fom)]);
        }
    }
    Ok(table)
}

/// Optimal thickness per gap. Gaps without an interior maximum get `nan`
/// and a note; if no gap has one the run fails.
pub fn optimum_table(s: &Scenario, material: &Material) -> CliResult<Table> {
    let mut table = Table::new(s.echo(material), vec!["d_nm", "t_opt_nm"]);
    let mut found = 0;
    let mut last_err = None;
    for &d in &s.gap {
        let t_opt = sweep_fom(material, d, &s.thickness, &s.quad)?.t_opt;
        match t_opt {
            Some(t) => {
                found += 1;
                table.push(vec![plain(d), sci(t)]);
            }
            None => {
                let err = Error::NoInteriorMaximum { d };
                table.notes.push(err.to_string());
                table.push(vec![plain(d), sci(f64::NAN)]);
                last_err = Some(err);
            }
        }
    }
    match (found, last_err) {
        (0, Some(err)) => Err(CliError::Core(err)),
        _ => Ok(table),
    }
}

/// ε on both axes over a logarithmic energy grid.
pub fn materials_table(material: &Material, omega_min: f64, omega_max: f64, points: usize) -> CliResult<Table> {
    if !(omega_min > 0.0 && omega_max > omega_min) || points < 2 {
        return Err(CliError::scenario("need 0 < omega_min < omega_max and points >= 2"));
    }
    let header = vec![
        ("material".to_string(), material.name.clone()),
        ("omega_min".to_string(), format!("{omega_min} eV")),
        ("omega_max".to_string(), format!("{omega_max} eV")),
        ("points".to_string(), points.to_string()),
    ];
    let mut table = Table::new(header, vec!["energy_eV", "eps_re", "eps_im", "eps_imag_axis"]);
    for w in geomspace(omega_min, omega_max, points) {
        let eps = material.eps_real_axis(w)?;
        let eps_i = material.eps_imag_axis(w)?;
        table.push(vec![sci(w), sci(eps.re), sci(eps.im), sci(eps_i)]);
    }
    Ok(table)
}

/// Slab reflection coefficients versus in-plane wavevector at fixed energy.
pub fn reflect_table(slab: &SlabGeometry, omega: f64, k_max: f64, points: usize) -> CliResult<Table> {
    if !(omega > 0.0 && k_max > 0.0) || points < 2 {
        return Err(CliError::scenario("need omega > 0, k_max > 0 and points >= 2"));
    }
    let header = vec![
        ("material".to_string(), slab.material.name.clone()),
        ("t".to_string(), format!("{} nm", slab.thickness)),
        ("omega".to_string(), format!("{omega} eV")),
        ("k_max".to_string(), format!("{k_max} 1/nm")),
        ("points".to_string(), points.to_string()),
    ];
    let mut table = Table::new(header, vec!["k_per_nm", "r_TE_re", "r_TE_im", "r_TM_re", "r_TM_im"]);
    for i in 0..points {
        let k = k_max * i as f64 / (points - 1) as f64;
        let te = slab_reflection_real(slab, omega, k, Polarization::TE)?;
        let tm = slab_reflection_real(slab, omega, k, Polarization::TM)?;
        table.push(vec![sci(k), sci(te.re), sci(te.im), sci(tm.re), sci(tm.im)]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn pressure_line_has_expected_fields() {
        let s = parse_scenario("task = pressure\nmaterial = drude:3,0.035\nt = 200\nd = 100\nrel_tol = 1e-6").unwrap();
        let out = run_scenario(&s).unwrap();
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        let p = v["pressure_Pa"].as_f64().unwrap();
        assert!((p / -2.715843 - 1.0).abs() < 1e-4, "{p}");
        assert!(v["error_Pa"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn drude_has_no_optimum() {
        let s = parse_scenario("task = fom\nmaterial = drude:3,0.035\nt = log(1, 100, 8)\nd = 10\nfind_optimum = true")
            .unwrap();
        let err = run_scenario(&s).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn reflect_is_bounded_for_propagating_waves() {
        let slab = SlabGeometry::new(20.0, Material::drude(3.0, 0.035).unwrap()).unwrap();
        let table = reflect_table(&slab, 2.0, 0.005, 5).unwrap();
        for row in &table.rows {
            let te: f64 = row[1].parse::<f64>().unwrap().hypot(row[2].parse().unwrap());
            assert!(te <= 1.0, "{te}");
        }
    }
}
