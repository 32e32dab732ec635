//! Named reproduction scenarios, saturation tables and their CSV encodings.
//!
//! Series CSV: `t,ew,purity,entropy_nats[,beta_env0,...]`.
//! Table CSV: `config,g,ew_level,ew_st,p_level,p_st,h_level,h_st,beta_end`,
//! with `>T` marking a saturation time beyond a grid that ends at `T`.
//! Numbers carry 12 significant digits.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::channel::{asymptotic, evolve_series};
use crate::error::{Error, Result};
use crate::measures::{
    measure_all, saturation, EntropyBase, Measure, MeasureSeries, SaturationTime, DEFAULT_SATURATION_THRESHOLD,
};
use crate::model::{beta, initial_density, InitialState, NoiseParams, Partition};

pub const CONFIGS: [&str; 4] = ["cse", "bse", "tse", "ise"];

/// Grid size used when a scenario does not specify one.
pub fn default_steps(t_max: f64) -> usize {
    if t_max <= 10.0 {
        400
    } else {
        1200
    }
}

/// `steps` evenly spaced points on `[0, t_max]`; a single step is just `t = 0`.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_max must be nonnegative, got {t_max}")));
    }
    match steps {
        0 => Err(Error::InvalidParameter("a grid needs at least one point".into())),
        1 => Ok(vec![0.0]),
        _ => {
            let last = (steps - 1) as f64;
            Ok((0..steps).map(|i| if i == steps - 1 { t_max } else { t_max * i as f64 / last }).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Labelled partitions; each is run against every `g`.
    pub configs: Vec<(String, Partition)>,
    pub g_values: Vec<f64>,
    pub lambda: f64,
    pub p: f64,
    pub t_max: f64,
    pub steps: usize,
    pub base: EntropyBase,
}

impl Scenario {
    /// `fig2`..`fig5`: one configuration at g = 1 on [0, 2].
    /// `fig6`..`fig9`: one configuration at g ∈ {1e-2, 1e-1, 10} on [0, 10].
    /// `fig10`: all four configurations at g ∈ {1e-4, 5e-3} on [0, 120].
    pub fn preset(name: &str) -> Result<Self> {
        let (configs, g_values, t_max): (&[&str], Vec<f64>, f64) = match name {
            "fig2" => (&["cse"], vec![1.0], 2.0),
            "fig3" => (&["bse"], vec![1.0], 2.0),
            "fig4" => (&["tse"], vec![1.0], 2.0),
            "fig5" => (&["ise"], vec![1.0], 2.0),
            "fig6" => (&["cse"], vec![1e-2, 1e-1, 10.0], 10.0),
            "fig7" => (&["bse"], vec![1e-2, 1e-1, 10.0], 10.0),
            "fig8" => (&["tse"], vec![1e-2, 1e-1, 10.0], 10.0),
            "fig9" => (&["ise"], vec![1e-2, 1e-1, 10.0], 10.0),
            "fig10" => (&CONFIGS, vec![1e-4, 5e-3], 120.0),
            _ => return Err(Error::UnknownPreset(name.to_owned())),
        };
        let configs = configs
            .iter()
            .map(|c| Ok((c.to_string(), Partition::preset(c, 4)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_owned(),
            configs,
            g_values,
            lambda: 1.0,
            p: 1.0,
            t_max,
            steps: default_steps(t_max),
            base: EntropyBase::Natural,
        })
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"]
    }
}

/// One curve of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub config: String,
    pub partition: Partition,
    pub g: f64,
    pub series: MeasureSeries,
    /// Phase variance of each environment at each grid time.
    pub env_betas: Vec<Vec<f64>>,
}

/// Evolves the scenario's initial state for every (configuration, g) pair.
pub fn run_scenario(s: &Scenario) -> Result<Vec<Curve>> {
    let jobs: Vec<(&String, &Partition, f64)> =
        s.configs.iter().flat_map(|(label, p)| s.g_values.iter().map(move |&g| (label, p, g))).collect();
    jobs.into_par_iter()
        .map(|(label, partition, g)| {
            let noise = NoiseParams::with_coupling(g, s.lambda, 0.0)?;
            run_curve(label, partition, &noise, s.p, s.t_max, s.steps, s.base)
        })
        .collect()
}

/// Measures for a single configuration along `[0, t_max]`.
pub fn run_curve(
    label: &str,
    partition: &Partition,
    noise: &NoiseParams,
    p: f64,
    t_max: f64,
    steps: usize,
    base: EntropyBase,
) -> Result<Curve> {
    let rho0 = initial_density(&InitialState { n_qubits: partition.n_qubits(), p })?;
    let grid = time_grid(t_max, steps)?;
    let states = evolve_series(&rho0, partition, noise, &grid)?;
    let series = MeasureSeries::from_states(&grid, &states, &rho0, base)?;
    let env_betas = grid
        .iter()
        .map(|&t| beta(noise, t).map(|b| vec![b; partition.n_envs()]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve { config: label.to_owned(), partition: partition.clone(), g: noise.g, series, env_betas })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablePreset {
    pub name: &'static str,
    pub configs: &'static [&'static str],
    pub g_values: &'static [f64],
    pub t_max: f64,
}

pub const TABLE_PRESETS: [TablePreset; 5] = [
    TablePreset { name: "table1", configs: &["cse"], g_values: &[1e-2, 1e-1, 10.0], t_max: 10.0 },
    TablePreset { name: "table2", configs: &["bse"], g_values: &[1e-2, 1e-1, 10.0], t_max: 10.0 },
    TablePreset { name: "table3", configs: &["tse"], g_values: &[1e-2, 1e-1, 10.0], t_max: 10.0 },
    TablePreset { name: "table4", configs: &["ise"], g_values: &[1e-2, 1e-1, 10.0], t_max: 10.0 },
    TablePreset { name: "comparative", configs: &CONFIGS, g_values: &[1e-4, 5e-3], t_max: 120.0 },
];

impl TablePreset {
    pub fn by_name(name: &str) -> Result<&'static TablePreset> {
        TABLE_PRESETS.iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownPreset(name.to_owned()))
    }
}

/// Saturation level and time of each measure for one configuration and `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub config: String,
    pub g: f64,
    pub t_max: f64,
    /// EW, purity, entropy (nats) of the long-time state.
    pub levels: [f64; 3],
    pub saturation_times: [SaturationTime; 3],
    pub beta_end: f64,
}

/// Rows for a table preset, GHZ input, λ = 1, 5% saturation band.
pub fn build_table(preset: &TablePreset) -> Result<Vec<TableRow>> {
    let jobs: Vec<(&str, f64)> =
        preset.configs.iter().flat_map(|&c| preset.g_values.iter().map(move |&g| (c, g))).collect();
    jobs.into_par_iter()
        .map(|(config, g)| table_row(config, g, preset.t_max, default_steps(preset.t_max)))
        .collect()
}

pub fn table_row(config: &str, g: f64, t_max: f64, steps: usize) -> Result<TableRow> {
    let partition = Partition::preset(config, 4)?;
    let noise = NoiseParams::new(g)?;
    let curve = run_curve(config, &partition, &noise, 1.0, t_max, steps, EntropyBase::Natural)?;
    let rho0 = initial_density(&InitialState::ghz(4))?;
    let limit = asymptotic(&rho0, &partition)?;
    let (ew, p, h) = measure_all(&limit, &rho0, EntropyBase::Natural)?;
    let levels = [ew, p, h];
    let mut saturation_times = [SaturationTime::BeyondGrid; 3];
    for (slot, (measure, level)) in saturation_times.iter_mut().zip(Measure::ALL.iter().zip(levels)) {
        let report = saturation(&curve.series.times, curve.series.column(*measure), level, DEFAULT_SATURATION_THRESHOLD)?;
        *slot = report.saturation_time;
    }
    Ok(TableRow {
        config: config.to_owned(),
        g,
        t_max,
        levels,
        saturation_times,
        beta_end: beta(&noise, t_max)?,
    })
}

/// Saturation levels (EW, P, H) as printed in the published tables.
pub const REFERENCE_LEVELS: [(&str, [f64; 3]); 4] = [
    ("cse", [0.09, 0.6, 0.73]),
    ("bse", [-0.2, 0.32, 1.35]),
    ("tse", [-0.3, 0.18, 1.73]),
    ("ise", [-0.37, 0.13, 2.1]),
];

/// Published saturation times (EW, P, H), read off figures. `None` means the
/// table reports "beyond the plotted range".
pub const REFERENCE_SATURATION_TIMES: [(&str, f64, [Option<f64>; 3]); 20] = [
    ("cse", 1e-2, [Some(10.0), Some(9.0), Some(9.0)]),
    ("cse", 1e-1, [Some(4.5), Some(3.0), Some(3.0)]),
    ("cse", 10.0, [Some(1.5), Some(1.3), Some(0.8)]),
    ("bse", 1e-2, [None, None, None]),
    ("bse", 1e-1, [Some(7.0), Some(5.0), Some(5.0)]),
    ("bse", 10.0, [Some(3.0), Some(2.3), Some(1.3)]),
    ("tse", 1e-2, [None, None, None]),
    ("tse", 1e-1, [Some(7.0), Some(4.5), Some(4.5)]),
    ("tse", 10.0, [Some(3.0), Some(1.8), Some(1.8)]),
    ("ise", 1e-2, [None, None, None]),
    ("ise", 1e-1, [Some(6.7), Some(4.5), Some(4.5)]),
    ("ise", 10.0, [Some(2.5), Some(1.8), Some(1.3)]),
    ("cse", 1e-4, [Some(110.0), Some(90.0), Some(90.0)]),
    ("cse", 5e-3, [Some(17.0), Some(16.0), Some(16.0)]),
    ("bse", 1e-4, [None, Some(120.0), Some(120.0)]),
    ("bse", 5e-3, [Some(30.0), Some(20.0), Some(20.0)]),
    ("tse", 1e-4, [Some(120.0), Some(117.0), Some(117.0)]),
    ("tse", 5e-3, [Some(25.0), Some(20.0), Some(18.0)]),
    ("ise", 1e-4, [Some(110.0), Some(120.0), Some(120.0)]),
    ("ise", 5e-3, [Some(17.0), Some(23.0), Some(20.0)]),
];

pub fn reference_level(config: &str) -> Option<[f64; 3]> {
    REFERENCE_LEVELS.iter().find(|(c, _)| *c == config).map(|(_, v)| *v)
}

pub fn reference_saturation_times(config: &str, g: f64) -> Option<[Option<f64>; 3]> {
    REFERENCE_SATURATION_TIMES
        .iter()
        .find(|(c, rg, _)| *c == config && (rg / g - 1.0).abs() < 1e-9)
        .map(|(_, _, v)| *v)
}

/// One measure of one table row next to its published counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub config: String,
    pub g: f64,
    pub measure: Measure,
    pub level: f64,
    pub reference_level: f64,
    pub saturation_time: SaturationTime,
    pub reference_saturation_time: Option<f64>,
    pub t_max: f64,
}

impl Comparison {
    pub fn level_diff(&self) -> f64 {
        (self.level - self.reference_level).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablesReport {
    pub rows: Vec<TableRow>,
    pub comparisons: Vec<Comparison>,
}

/// All five tables together with a per-measure comparison against the
/// published values.
pub fn reproduce_tables() -> Result<TablesReport> {
    let mut rows = Vec::new();
    for preset in &TABLE_PRESETS {
        rows.extend(build_table(preset)?);
    }
    let comparisons = compare_rows(&rows);
    Ok(TablesReport { rows, comparisons })
}

pub fn compare_rows(rows: &[TableRow]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for row in rows {
        let Some(levels) = reference_level(&row.config) else { continue };
        let times = reference_saturation_times(&row.config, row.g).unwrap_or([None; 3]);
        for (i, measure) in Measure::ALL.iter().enumerate() {
            out.push(Comparison {
                config: row.config.clone(),
                g: row.g,
                measure: *measure,
                level: row.levels[i],
                reference_level: levels[i],
                saturation_time: row.saturation_times[i],
                reference_saturation_time: times[i],
                t_max: row.t_max,
            });
        }
    }
    out
}

/// `x` with 12 significant digits, plain decimal where reasonable.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_owned()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn format_saturation(t: SaturationTime, t_max: f64) -> String {
    match t {
        SaturationTime::At(v) => format_number(v),
        SaturationTime::BeyondGrid => format!(">{}", format_number(t_max)),
    }
}

pub fn series_csv(series: &MeasureSeries, env_betas: Option<&[Vec<f64>]>) -> Result<String> {
    let n_envs = match env_betas {
        Some(b) => {
            if b.len() != series.len() {
                return Err(Error::DimensionMismatch { left: series.len(), right: b.len() });
            }
            b.first().map_or(0, Vec::len)
        }
        None => 0,
    };
    let mut out = String::from("t,ew,purity,");
    out.push_str(series.base.column_name());
    for e in 0..n_envs {
        let _ = write!(out, ",beta_env{e}");
    }
    out.push('\n');
    for i in 0..series.len() {
        let cells = [series.times[i], series.ew[i], series.purity[i], series.entropy[i]];
        out.push_str(&cells.map(format_number).join(","));
        if let Some(b) = env_betas {
            if b[i].len() != n_envs {
                return Err(Error::Csv(format!("row {i} has {} phase variances, expected {n_envs}", b[i].len())));
            }
            for v in &b[i] {
                out.push(',');
                out.push_str(&format_number(*v));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Inverse of [`series_csv`].
pub fn parse_series_csv(text: &str) -> Result<(MeasureSeries, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("missing header".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[..3] != ["t", "ew", "purity"] {
        return Err(Error::Csv(format!("unexpected header `{header}`")));
    }
    let base = match cols[3] {
        "entropy_nats" => EntropyBase::Natural,
        "entropy_bits" => EntropyBase::Two,
        other => return Err(Error::Csv(format!("unknown entropy column `{other}`"))),
    };
    for (e, c) in cols[4..].iter().enumerate() {
        if *c != format!("beta_env{e}") {
            return Err(Error::Csv(format!("unexpected column `{c}`")));
        }
    }
    let mut series = MeasureSeries::empty(base);
    let mut env_betas = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|_| Error::Csv(format!("line {}: bad number `{c}`", lineno + 2))))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != cols.len() {
            return Err(Error::Csv(format!("line {}: {} cells, expected {}", lineno + 2, cells.len(), cols.len())));
        }
        series.push(cells[0], (cells[1], cells[2], cells[3]));
        env_betas.push(cells[4..].to_vec());
    }
    Ok((series, env_betas))
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("config,g,ew_level,ew_st,p_level,p_st,h_level,h_st,beta_end\n");
    for r in rows {
        let _ = write!(out, "{},{}", r.config, format_number(r.g));
        for i in 0..3 {
            let _ = write!(out, ",{},{}", format_number(r.levels[i]), format_saturation(r.saturation_times[i], r.t_max));
        }
        let _ = writeln!(out, ",{}", format_number(r.beta_end));
    }
    out
}

pub fn comparison_csv(comparisons: &[Comparison]) -> String {
    let mut out = String::from("config,g,measure,level,reference_level,abs_diff,st,reference_st\n");
    for c in comparisons {
        let measure = match c.measure {
            Measure::Witness => "ew",
            Measure::Purity => "purity",
            Measure::Entropy => "entropy_nats",
        };
        let reference_st = match c.reference_saturation_time {
            Some(t) => format_number(t),
            None => format!(">{}", format_number(c.t_max)),
        };
        let _ = writeln!(
            out,
            "{},{},{measure},{},{},{},{},{reference_st}",
            c.config,
            format_number(c.g),
            format_number(c.level),
            format_number(c.reference_level),
            format_number(c.level_diff()),
            format_saturation(c.saturation_time, c.t_max),
        );
    }
    out
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_owned(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
