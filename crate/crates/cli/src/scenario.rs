//! Key-value scenario documents.
//!
//! ```text
//! # comment
//! task = fom
//! material = lorentz:1,15,0.01
//! t = log(0.5, 500, 24) nm
//! d = 10, 100, 1000 nm
//! ```
//!
//! Command-line flags use the same keys (`--rel-tol` sets `rel_tol`) and
//! override values read from a file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use casimir_core::materials::{Extrapolation, LowFrequencyTail, PowerLawDecay};
use casimir_core::real::{geomspace, linspace};
use casimir_core::{default_thickness_grid, load_nk_table, GridPolicy, Material, QuadratureSettings, SpectrumOptions};

use crate::error::{CliError, CliResult};

/// Every key a scenario may set.
pub const KEYS: &[&str] = &[
    "task",
    "material",
    "low_tail",
    "high_decay",
    "t",
    "d",
    "rel_tol",
    "abs_tol",
    "max_evals",
    "omega_min",
    "omega_max",
    "points",
    "refine",
    "find_optimum",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Pressure,
    Spectrum,
    Modes,
    Fom,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pressure" => Ok(Task::Pressure),
            "spectrum" => Ok(Task::Spectrum),
            "modes" => Ok(Task::Modes),
            "fom" => Ok(Task::Fom),
            _ => Err(format!("unknown task '{s}' (expected pressure, spectrum, modes or fom)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Pressure => "pressure",
            Task::Spectrum => "spectrum",
            Task::Modes => "modes",
            Task::Fom => "fom",
        })
    }
}

/// Dielectric model named in a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum MaterialSpec {
    Drude { omega_p: f64, gamma_p: f64 },
    Lorentz { c_l: f64, omega_l: f64, gamma_l: f64 },
    Table { path: PathBuf },
}

impl FromStr for MaterialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(args) = s.strip_prefix("drude:") {
            let v = number_list(args, 2, "drude:omega_p,gamma_p")?;
            return Ok(MaterialSpec::Drude { omega_p: v[0], gamma_p: v[1] });
        }
        if let Some(args) = s.strip_prefix("lorentz:") {
            let v = number_list(args, 3, "lorentz:C_L,omega_L,gamma_L")?;
            return Ok(MaterialSpec::Lorentz { c_l: v[0], omega_l: v[1], gamma_l: v[2] });
        }
        if let Some(path) = s.strip_prefix("table:") {
            return Ok(MaterialSpec::Table { path: PathBuf::from(path.trim()) });
        }
        if s.contains('/') || s.ends_with(".txt") || s.ends_with(".csv") || s.ends_with(".dat") {
            return Ok(MaterialSpec::Table { path: PathBuf::from(s) });
        }
        Err(format!(
            "unknown material '{s}' (expected drude:omega_p,gamma_p, lorentz:C_L,omega_L,gamma_L or table:PATH)"
        ))
    }
}

impl fmt::Display for MaterialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaterialSpec::Drude { omega_p, gamma_p } => write!(f, "drude:{omega_p},{gamma_p}"),
            MaterialSpec::Lorentz { c_l, omega_l, gamma_l } => write!(f, "lorentz:{c_l},{omega_l},{gamma_l}"),
            MaterialSpec::Table { path } => write!(f, "table:{}", path.display()),
        }
    }
}

impl MaterialSpec {
    /// Builds the material, reading the n,k file for tables.
    pub fn build(&self, low: Option<LowFrequencyTail>, high: Option<PowerLawDecay>) -> CliResult<Material> {
        Ok(match self {
            MaterialSpec::Drude { omega_p, gamma_p } => Material::drude(*omega_p, *gamma_p)?,
            MaterialSpec::Lorentz { c_l, omega_l, gamma_l } => Material::lorentz(*c_l, *omega_l, *gamma_l)?,
            MaterialSpec::Table { path } => {
                let table = load_nk_table(path, Extrapolation { low, high })?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Material::tabulated(name, table)
            }
        })
    }
}

pub fn parse_low_tail(s: &str) -> Result<Option<LowFrequencyTail>, String> {
    let s = s.trim();
    match s {
        "none" => Ok(None),
        "constant" => Ok(Some(LowFrequencyTail::Constant)),
        _ => match s.strip_prefix("drude:") {
            Some(args) => {
                let v = number_list(args, 2, "drude:omega_p,gamma_p")?;
                Ok(Some(LowFrequencyTail::DrudeTail { omega_p: v[0], gamma_p: v[1] }))
            }
            None => Err(format!("expected none, constant or drude:omega_p,gamma_p, got '{s}'")),
        },
    }
}

pub fn parse_high_decay(s: &str) -> Result<Option<PowerLawDecay>, String> {
    match s.trim() {
        "none" => Ok(None),
        v => {
            let exponent = number(v)?;
            if !(exponent > 0.0) {
                return Err(format!("decay exponent must be > 0, got {exponent}"));
            }
            Ok(Some(PowerLawDecay { exponent }))
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a number, got '{s}'"))
}

fn number_list(s: &str, n: usize, form: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(number).collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {form}, got {} value(s)", v.len()));
    }
    Ok(v)
}

/// Parses a length or length grid into nm: `2 nm`, `1.5um`,
/// `10, 100, 1000 nm`, `log(0.5, 500, 24) nm`, `lin(1, 5, 5) nm`. A bare
/// number is taken as nm. Values must be positive and strictly increasing.
pub fn parse_length_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let (body, scale) = [("nm", 1.0), ("um", 1e3), ("µm", 1e3), ("μm", 1e3)]
        .iter()
        .find_map(|&(unit, scale)| s.strip_suffix(unit).map(|b| (b.trim(), scale)))
        .unwrap_or((s, 1.0));
    if body.is_empty() {
        return Err("empty grid".into());
    }
    let values = if let Some(args) = body.strip_prefix("log(").and_then(|b| b.strip_suffix(')')) {
        let (a, b, n) = range_args(args)?;
        if !(a > 0.0) {
            return Err("log grids need a positive start".into());
        }
        geomspace(a, b, n)
    } else if let Some(args) = body.strip_prefix("lin(").and_then(|b| b.strip_suffix(')')) {
        let (a, b, n) = range_args(args)?;
        linspace(a, b, n)
    } else {
        body.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    let values: Vec<f64> = values.into_iter().map(|v| v * scale).collect();
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(format!("lengths must be > 0 nm, got {v}"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(values)
}

fn range_args(args: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = args.split(',').collect();
    if parts.len() != 3 {
        return Err("expected (start, stop, count)".into());
    }
    let a = number(parts[0])?;
    let b = number(parts[1])?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("count must be a positive integer, got '{}'", parts[2].trim()))?;
    if n < 2 || !(b > a) {
        return Err("need stop > start and count >= 2".into());
    }
    Ok((a, b, n))
}

fn parse_energy(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = number(s.strip_suffix("eV").unwrap_or(s))?;
    if !(v > 0.0) {
        return Err(format!("energy must be > 0 eV, got {v}"));
    }
    Ok(v)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if !(v > 0.0) {
        return Err(format!("must be > 0, got {v}"));
    }
    Ok(v)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("expected a positive integer, got '{}'", s.trim()))
}

/// Where a value came from, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
enum Origin {
    Line(usize),
    Flag,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Raw key-value pairs collected from a file and flags.
#[derive(Clone, Debug, Default)]
pub struct ScenarioBuilder {
    entries: BTreeMap<&'static str, Entry>,
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.trim().replace('-', "_");
    KEYS.iter().copied().find(|k| *k == key)
}

impl ScenarioBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut builder = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::scenario(format!("line {line_no}: expected 'key = value', got '{line}'")));
            };
            let Some(key) = canonical_key(key) else {
                return Err(CliError::scenario(format!(
                    "line {line_no}: unknown key '{}' (known keys: {})",
                    key.trim(),
                    KEYS.join(", ")
                )));
            };
            if let Some(prev) = builder.entries.get(key) {
                if let Origin::Line(first) = prev.origin {
                    return Err(CliError::scenario(format!(
                        "line {line_no}: key '{key}' already set on line {first}"
                    )));
                }
            }
            builder.entries.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    origin: Origin::Line(line_no),
                },
            );
        }
        Ok(builder)
    }

    /// Sets a key from the command line, replacing any file value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        let Some(key) = canonical_key(key) else {
            return Err(CliError::scenario(format!("unknown key '{key}'")));
        };
        self.entries.insert(
            key,
            Entry {
                value: value.into(),
                origin: Origin::Flag,
            },
        );
        Ok(())
    }

    /// Raw value of `key`, if set.
    pub fn value(&self, key: &str) -> Option<&str> {
        canonical_key(key).and_then(|k| self.entries.get(k)).map(|e| e.value.as_str())
    }

    fn get<T>(&self, key: &'static str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<Option<T>> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        parse(&entry.value).map(Some).map_err(|reason| {
            let at = match entry.origin {
                Origin::Line(n) => format!("line {n}: key '{key}'"),
                Origin::Flag => format!("--{}", key.replace('_', "-")),
            };
            CliError::scenario(format!("{at}: {reason}"))
        })
    }

    fn require<T>(&self, key: &'static str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<T> {
        self.get(key, parse)?
            .ok_or_else(|| CliError::scenario(format!("missing required key '{key}'")))
    }

    /// Validates the collected values and fills in defaults.
    pub fn build(&self) -> CliResult<Scenario> {
        let task: Task = self.require("task", |s| s.trim().parse())?;
        let material: MaterialSpec = self.require("material", |s| s.parse())?;
        let low_tail = self.get("low_tail", parse_low_tail)?.unwrap_or(Some(LowFrequencyTail::Constant));
        let high_decay = self.get("high_decay", parse_high_decay)?.unwrap_or(Some(PowerLawDecay::default()));

        let thickness = match (task, self.get("t", parse_length_grid)?) {
            (_, Some(t)) => t,
            (Task::Fom, None) => default_thickness_grid(),
            (_, None) => return Err(CliError::scenario("missing required key 't'")),
        };
        let gap = self.require("d", parse_length_grid)?;
        let single = |key: &str, v: &[f64]| {
            if v.len() == 1 {
                Ok(())
            } else {
                Err(CliError::scenario(format!("task {task} takes a single '{key}', got {} values", v.len())))
            }
        };
        match task {
            Task::Spectrum => {
                single("t", &thickness)?;
                single("d", &gap)?;
            }
            Task::Modes => single("t", &thickness)?,
            Task::Pressure | Task::Fom => {}
        }
        if task == Task::Fom && thickness.len() < 3 {
            return Err(CliError::scenario("task fom needs at least 3 thickness values"));
        }

        let base = match task {
            Task::Pressure | Task::Fom => QuadratureSettings::default(),
            Task::Spectrum | Task::Modes => SpectrumOptions::default_quad(),
        };
        let quad = QuadratureSettings {
            rel_tol: self.get("rel_tol", parse_positive)?.unwrap_or(base.rel_tol),
            abs_tol: self
                .get("abs_tol", |s| {
                    let v = number(s)?;
                    if v >= 0.0 {
                        Ok(v)
                    } else {
                        Err(format!("must be >= 0, got {v}"))
                    }
                })?
                .unwrap_or(base.abs_tol),
            max_evals: self.get("max_evals", parse_count)?.unwrap_or(base.max_evals),
        };
        quad.validate()?;

        let find_optimum = self.get("find_optimum", parse_bool)?.unwrap_or(false);
        if find_optimum && task != Task::Fom {
            return Err(CliError::scenario("find_optimum applies only to task fom"));
        }

        Ok(Scenario {
            task,
            material,
            low_tail,
            high_decay,
            thickness,
            gap,
            quad,
            omega_min: self.get("omega_min", parse_energy)?,
            omega_max: self.get("omega_max", parse_energy)?,
            points: self.get("points", parse_count)?.unwrap_or(600),
            refine: self.get("refine", parse_bool)?.unwrap_or(true),
            find_optimum,
            output: self.get("output", |s| Ok(PathBuf::from(s.trim())))?,
        })
    }
}

/// A validated run description with every default resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub material: MaterialSpec,
    /// Extrapolation below the first tabulated energy (tables only).
    pub low_tail: Option<LowFrequencyTail>,
    /// Extrapolation above the last tabulated energy (tables only).
    pub high_decay: Option<PowerLawDecay>,
    /// Film thickness grid in nm.
    pub thickness: Vec<f64>,
    /// Gap grid in nm.
    pub gap: Vec<f64>,
    pub quad: QuadratureSettings,
    /// Spectrum window in eV; `None` means the material default.
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: usize,
    pub refine: bool,
    pub find_optimum: bool,
    pub output: Option<PathBuf>,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    ScenarioBuilder::parse(text)?.build()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn low_tail_str(t: &Option<LowFrequencyTail>) -> String {
    match t {
        None => "none".into(),
        Some(LowFrequencyTail::Constant) => "constant".into(),
        Some(LowFrequencyTail::DrudeTail { omega_p, gamma_p }) => format!("drude:{omega_p},{gamma_p}"),
    }
}

impl Scenario {
    pub fn build_material(&self) -> CliResult<Material> {
        self.material.build(self.low_tail, self.high_decay)
    }

    pub fn spectrum_options(&self, material: &Material) -> SpectrumOptions {
        let mut opts = SpectrumOptions::for_material(material);
        if let Some(lo) = self.omega_min {
            opts.omega_min = lo;
        }
        if let Some(hi) = self.omega_max {
            opts.omega_max = hi;
        }
        opts.grid = GridPolicy::Uniform { points: self.points };
        opts.refine = self.refine;
        opts.quad = self.quad;
        opts
    }

    /// Resolved settings in a fixed order, for output headers.
    pub fn echo(&self, material: &Material) -> Vec<(String, String)> {
        let mut out = vec![
            ("task".to_string(), self.task.to_string()),
            ("material".to_string(), self.material.to_string()),
        ];
        if matches!(self.material, MaterialSpec::Table { .. }) {
            out.push(("low_tail".into(), low_tail_str(&self.low_tail)));
            let high = self.high_decay.map(|h| h.exponent.to_string()).unwrap_or_else(|| "none".into());
            out.push(("high_decay".into(), high));
        }
        out.push(("t".into(), format!("{} nm", join(&self.thickness))));
        out.push(("d".into(), format!("{} nm", join(&self.gap))));
        out.push(("rel_tol".into(), self.quad.rel_tol.to_string()));
        out.push(("abs_tol".into(), self.quad.abs_tol.to_string()));
        out.push(("max_evals".into(), self.quad.max_evals.to_string()));
        if matches!(self.task, Task::Spectrum | Task::Modes) {
            let opts = self.spectrum_options(material);
            out.push(("omega_min".into(), format!("{} eV", opts.omega_min)));
            out.push(("omega_max".into(), format!("{} eV", opts.omega_max)));
            out.push(("points".into(), self.points.to_string()));
            out.push(("refine".into(), self.refine.to_string()));
        }
        if self.task == Task::Fom {
            out.push(("find_optimum".into(), self.find_optimum.to_string()));
        }
        out
    }
}
