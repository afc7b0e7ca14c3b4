//! Command-line front end: a TOML run configuration, flag overrides, the
//! seven pipelines and the CSV/JSON report writer.
//!
//! Exit status is 0 on success, 2 when the run finished but raised flags
//! (an indeterminate index, a failed self-check, a missing order fit), and 1
//! on any error. Errors are printed to stderr as one line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    a_term_norm_sweep, curvature_convergence, decomposition_residual, divergent_term_check, expansion_sweep,
    homotopy_scan, lambda_trace_check, probe_refinement, ConvergenceReport,
};
use crate::geometry::{GeometrySpec, OffsetGeometry};
use crate::operators::{assemble_mode_dirac, assemble_normal_t, assemble_product, verify_twist_unitary, Grid1D, Mode};
use crate::spectral::{eig_symmetric, graded_index, EigRequest, IndexResult};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    /// Smallest eigenvalues of the surface and tube operators, per mode.
    Spectrum,
    /// Graded index of the normal operator and of the tube operator.
    Index,
    /// Tube spectrum against the surface spectrum as eps -> 0.
    Expansion,
    /// Curvature field and A-term decay in eps.
    Curvature,
    /// Index and low spectrum along the t-homotopy.
    Homotopy,
    /// Anticommutator probe under grid refinement.
    Probe,
    /// Quick self-checks of identities that hold exactly.
    Validate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Index => "index",
            Subcommand::Expansion => "expansion",
            Subcommand::Curvature => "curvature",
            Subcommand::Homotopy => "homotopy",
            Subcommand::Probe => "probe",
            Subcommand::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

fn default_m_max() -> f64 {
    2.5
}
fn default_k() -> usize {
    6
}
fn default_seed() -> u64 {
    1
}
fn default_t_grid() -> usize {
    11
}
fn default_trials() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "Grids::default_n")]
    pub n_u: usize,
    #[serde(default = "Grids::default_n")]
    pub n_s: usize,
    /// Grid doublings used by the probe.
    #[serde(default = "Grids::default_levels")]
    pub levels: usize,
}

impl Grids {
    fn default_n() -> usize {
        96
    }
    fn default_levels() -> usize {
        2
    }
}

impl Default for Grids {
    fn default() -> Self {
        Grids { n_u: Self::default_n(), n_s: Self::default_n(), levels: Self::default_levels() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_hermiticity")]
    pub hermiticity: f64,
    /// Relative to the operator norm.
    #[serde(default = "Tolerances::default_residual")]
    pub residual: f64,
    #[serde(default = "Tolerances::default_gap_ratio")]
    pub gap_ratio: f64,
}

impl Tolerances {
    fn default_hermiticity() -> f64 {
        crate::spectral::HERMITICITY_TOL
    }
    fn default_residual() -> f64 {
        crate::spectral::RESIDUAL_TOL
    }
    fn default_gap_ratio() -> f64 {
        crate::spectral::GAP_RATIO_MIN
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: Self::default_hermiticity(),
            residual: Self::default_residual(),
            gap_ratio: Self::default_gap_ratio(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "OutputSpec::default_directory")]
    pub directory: PathBuf,
    #[serde(default = "OutputSpec::default_formats")]
    pub formats: Vec<Format>,
}

impl OutputSpec {
    fn default_directory() -> PathBuf {
        PathBuf::from("out")
    }
    fn default_formats() -> Vec<Format> {
        vec![Format::Csv, Format::Json]
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { directory: Self::default_directory(), formats: Self::default_formats() }
    }
}

/// Everything a run depends on. Serialized back into every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_m_max")]
    pub m_max: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    #[serde(default = "default_trials")]
    pub probe_trials: usize,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(one_line(e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks counts and tolerances, builds the geometry and checks every eps
    /// against its focal bound.
    pub fn validate(&self) -> Result<OffsetGeometry> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilons must be non-empty".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::Config(format!("epsilons must be positive, got {e}")));
        }
        let counts = [
            ("grids.n_u", self.grids.n_u),
            ("grids.n_s", self.grids.n_s),
            ("grids.levels", self.grids.levels),
            ("k", self.k),
            ("t_grid", self.t_grid),
            ("probe_trials", self.probe_trials),
        ];
        if let Some((name, _)) = counts.iter().find(|c| c.1 == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.t_grid < 2 {
            return Err(Error::Config("t_grid must be at least 2".into()));
        }
        if !(self.m_max.is_finite() && self.m_max >= 0.0) {
            return Err(Error::Config(format!("m_max must be non-negative, got {}", self.m_max)));
        }
        let t = &self.tolerances;
        if ![t.hermiticity, t.residual, t.gap_ratio].iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats must be non-empty".into()));
        }
        let geom = OffsetGeometry::from_spec(&self.geometry)?;
        for &e in &self.epsilons {
            geom.check_offset(e)?;
        }
        if self.modes(&geom).is_empty() {
            return Err(Error::Config(format!("no admissible modes with |m| <= {}", self.m_max)));
        }
        Ok(geom)
    }

    pub fn modes(&self, geom: &OffsetGeometry) -> Vec<Mode> {
        Mode::admissible(geom, self.m_max)
    }

    fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(e) = &o.epsilons {
            self.epsilons = e.clone();
        }
        if let Some(n) = o.n_u {
            self.grids.n_u = n;
        }
        if let Some(n) = o.n_s {
            self.grids.n_s = n;
        }
        if let Some(m) = o.m_max {
            self.m_max = m;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out {
            self.output.directory = d.clone();
        }
        if let Some(f) = &o.format {
            let mut f = f.clone();
            f.sort();
            f.dedup();
            self.output.formats = f;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Comma-separated offsets, replacing the config list.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long = "n-u")]
    pub n_u: Option<usize>,
    #[arg(long = "n-s")]
    pub n_s: Option<usize>,
    #[arg(long = "m-max")]
    pub m_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

#[derive(Debug, Parser)]
#[command(name = "codim1lab", version, about = "Dirac operators on tubes around surfaces of revolution")]
pub struct Cli {
    pub subcommand: Subcommand,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// A CSV table with its header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Table { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    fn convergence(name: &str, r: &ConvergenceReport) -> Self {
        let mut t = Table::new(name, &["param_name", "param_value", "error"]);
        for (p, e) in r.params.iter().zip(&r.errors) {
            t.rows.push(vec![r.param_name.clone(), fmt_f(*p), fmt_f(*e)]);
        }
        t
    }
}

/// Round-trip exact float formatting: 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_index(i: Option<i64>) -> String {
    i.map(|v| v.to_string()).unwrap_or_default()
}

/// The outcome of one pipeline before it is written.
#[derive(Clone, Debug)]
pub struct Report {
    pub subcommand: Subcommand,
    pub tables: Vec<Table>,
    pub records: Value,
    pub summary: Value,
    pub flags: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.flags.is_empty() {
            0
        } else {
            2
        }
    }
}

fn fit_summary(r: &ConvergenceReport) -> Value {
    json!({ "fitted_order": r.fitted_order, "fit_residual": r.fit_residual })
}

fn spectrum_rows(cfg: &RunConfig, geom: &OffsetGeometry, flags: &mut Vec<String>) -> Result<(Table, Value)> {
    let modes = cfg.modes(geom);
    let gu = Grid1D::new(cfg.grids.n_u, 0.0, geom.length())?;
    // eps = 0 stands for the surface operator itself.
    let eps: Vec<f64> = std::iter::once(0.0).chain(cfg.epsilons.iter().copied()).collect();
    let jobs: Vec<(Mode, f64)> = modes.iter().flat_map(|&m| eps.iter().map(move |&e| (m, e))).collect();
    let spectra = jobs
        .par_iter()
        .map(|&(m, e)| {
            let op = if e == 0.0 {
                assemble_mode_dirac(geom, m, &gu, 0.0)?
            } else {
                assemble_product(geom, m, e, &gu, &Grid1D::normal(cfg.grids.n_s, e)?)?
            };
            eig_symmetric(&op, EigRequest::smallest(cfg.k).with_vectors(false))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("spectrum", &["mode", "k", "eigenvalue", "residual", "epsilon", "t"]);
    let mut records = Vec::new();
    for (&(m, e), sp) in jobs.iter().zip(&spectra) {
        if sp.max_residual() > cfg.tolerances.residual * sp.norm {
            flags.push(format!("residual above tolerance for m = {m} at eps = {e}"));
        }
        for (k, (v, r)) in sp.eigenvalues.iter().zip(&sp.residuals).enumerate() {
            table.rows.push(vec![m.to_string(), k.to_string(), fmt_f(*v), fmt_f(*r), fmt_f(e), fmt_f(1.0)]);
            records.push(json!({ "mode": m.to_string(), "k": k, "eigenvalue": v, "residual": r, "epsilon": e, "t": 1.0 }));
        }
    }
    Ok((table, Value::Array(records)))
}

fn index_checked(cfg: &RunConfig, r: IndexResult, what: &str, flags: &mut Vec<String>) -> IndexResult {
    let mut r = r;
    if r.index.is_some() && r.gap_ratio < cfg.tolerances.gap_ratio {
        r.index = None;
    }
    if r.index.is_none() {
        flags.push(format!("indeterminate index for {what}"));
    }
    r
}

fn run_index(cfg: &RunConfig, geom: &OffsetGeometry, flags: &mut Vec<String>) -> Result<(Table, Value)> {
    let modes = cfg.modes(geom);
    let gu = Grid1D::new(cfg.grids.n_u, 0.0, geom.length())?;
    let estimates: Vec<f64> = modes
        .iter()
        .map(|&m| Ok(eig_symmetric(&assemble_mode_dirac(geom, m, &gu, 0.0)?, EigRequest::smallest(2))?.smallest_modulus()))
        .collect::<Result<_>>()?;
    let normal = cfg
        .epsilons
        .par_iter()
        .map(|&e| {
            let t = assemble_normal_t(e, &Grid1D::normal(cfg.grids.n_s, e)?)?;
            graded_index(&t, &eig_symmetric(&t, EigRequest::smallest(cfg.k.max(3)))?, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.epsilons.len()).flat_map(|e| (0..modes.len()).map(move |m| (e, m))).collect();
    let product = jobs
        .par_iter()
        .map(|&(e, m)| {
            let eps = cfg.epsilons[e];
            let h = assemble_product(geom, modes[m], eps, &gu, &Grid1D::normal(cfg.grids.n_s, eps)?)?;
            graded_index(&h, &eig_symmetric(&h, EigRequest::smallest(cfg.k))?, Some(estimates[m]))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("index", &["operator", "epsilon", "index", "ker_plus", "ker_minus"]);
    let mut records = Vec::new();
    for (i, (&e, r)) in cfg.epsilons.iter().zip(normal).enumerate() {
        let r = index_checked(cfg, r, &format!("normal operator at eps = {e}"), flags);
        table.rows.push(vec!["normal".into(), fmt_f(e), fmt_index(r.index), r.kernel_dim_plus.to_string(), r.kernel_dim_minus.to_string()]);
        records.push(json!({ "operator": "normal", "epsilon": e, "result": r }));
        let per_mode: Vec<IndexResult> = (0..modes.len())
            .map(|m| index_checked(cfg, product[i * modes.len() + m].clone(), &format!("m = {} at eps = {e}", modes[m]), flags))
            .collect();
        let total = per_mode.iter().map(|r| r.index).sum::<Option<i64>>();
        let plus: usize = per_mode.iter().map(|r| r.kernel_dim_plus).sum();
        let minus: usize = per_mode.iter().map(|r| r.kernel_dim_minus).sum();
        table.rows.push(vec!["product".into(), fmt_f(e), fmt_index(total), plus.to_string(), minus.to_string()]);
        let modes_json: Vec<Value> = modes.iter().zip(&per_mode).map(|(m, r)| json!({ "mode": m.to_string(), "result": r })).collect();
        records.push(json!({ "operator": "product", "epsilon": e, "index": total, "modes": modes_json }));
    }
    Ok((table, Value::Array(records)))
}

/// Runs one pipeline. Nothing is written to disk.
pub fn execute(sub: Subcommand, cfg: &RunConfig) -> Result<Report> {
    let geom = cfg.validate()?;
    let modes = cfg.modes(&geom);
    let mut flags = Vec::new();
    let (tables, records, summary) = match sub {
        Subcommand::Spectrum => {
            let (t, r) = spectrum_rows(cfg, &geom, &mut flags)?;
            (vec![t], r, json!({}))
        }
        Subcommand::Index => {
            let (t, r) = run_index(cfg, &geom, &mut flags)?;
            (vec![t], r, json!({}))
        }
        Subcommand::Expansion => {
            let rep = expansion_sweep(&geom, &modes, &cfg.epsilons, cfg.grids.n_u, cfg.grids.n_s, cfg.k)?;
            flags.extend(rep.report.flags.iter().cloned());
            let s = fit_summary(&rep.report);
            (vec![Table::convergence("expansion", &rep.report)], serde_json::to_value(&rep).map_err(out_err)?, s)
        }
        Subcommand::Curvature => {
            let c = curvature_convergence(&geom, &cfg.epsilons, cfg.grids.n_u, cfg.grids.n_s)?;
            let a = a_term_norm_sweep(&geom, &cfg.epsilons, cfg.grids.n_u, cfg.grids.n_s)?;
            flags.extend(c.deviation.flags.iter().cloned());
            flags.extend(a.flags.iter().map(|f| format!("a_term: {f}")));
            let s = json!({
                "fitted_order": c.deviation.fitted_order,
                "fit_residual": c.deviation.fit_residual,
                "a_term": fit_summary(&a),
            });
            let tables = vec![Table::convergence("curvature", &c.deviation), Table::convergence("a_term", &a)];
            (tables, json!({ "curvature": c, "a_term": a }), s)
        }
        Subcommand::Homotopy => {
            let reps = cfg
                .epsilons
                .iter()
                .map(|&e| homotopy_scan(&geom, &modes, e, cfg.t_grid, cfg.grids.n_u, cfg.grids.n_s, cfg.k))
                .collect::<Result<Vec<_>>>()?;
            let mut t = Table::new("homotopy", &["epsilon", "t", "index", "gap"]);
            let mut s = Vec::new();
            for r in &reps {
                flags.extend(r.flags.iter().map(|f| format!("eps = {}: {f}", r.epsilon)));
                for p in &r.points {
                    t.rows.push(vec![fmt_f(r.epsilon), fmt_f(p.t), fmt_index(p.index), fmt_f(p.gap)]);
                }
                s.push(json!({
                    "epsilon": r.epsilon,
                    "max_jump": r.max_jump,
                    "lipschitz_constant": r.lipschitz_constant,
                    "worst_jump_to_gap": r.worst_jump_to_gap,
                }));
            }
            (vec![t], serde_json::to_value(&reps).map_err(out_err)?, json!({ "scans": s }))
        }
        Subcommand::Probe => {
            let jobs: Vec<(Mode, f64)> = modes.iter().flat_map(|&m| cfg.epsilons.iter().map(move |&e| (m, e))).collect();
            let studies = jobs
                .par_iter()
                .map(|&(m, e)| probe_refinement(&geom, m, e, cfg.grids.n_u, cfg.grids.n_s, cfg.grids.levels, cfg.probe_trials, cfg.seed))
                .collect::<Result<Vec<_>>>()?;
            let mut t = Table::new("probe", &["mode", "epsilon", "n_u", "n_s", "anticommutator_ratio", "domination_ratio", "trials"]);
            let mut recs = Vec::new();
            for (&(m, e), st) in jobs.iter().zip(&studies) {
                flags.extend(st.flags.iter().map(|f| format!("m = {m}, eps = {e}: {f}")));
                for (nu, ns, r) in &st.levels {
                    t.rows.push(vec![
                        m.to_string(),
                        fmt_f(e),
                        nu.to_string(),
                        ns.to_string(),
                        fmt_f(r.anticommutator_ratio),
                        fmt_f(r.domination_ratio),
                        r.trials.to_string(),
                    ]);
                }
                recs.push(json!({ "mode": m.to_string(), "epsilon": e, "study": st }));
            }
            (vec![t], Value::Array(recs), json!({}))
        }
        Subcommand::Validate => {
            let (t, r) = run_validate(cfg, &geom, &modes, &mut flags)?;
            (vec![t], r, json!({}))
        }
    };
    Ok(Report { subcommand: sub, tables, records, summary, flags })
}

fn out_err(e: serde_json::Error) -> Error {
    Error::Output(e.to_string())
}

fn run_validate(cfg: &RunConfig, geom: &OffsetGeometry, modes: &[Mode], flags: &mut Vec<String>) -> Result<(Table, Value)> {
    let mut t = Table::new("validate", &["check", "value", "lower", "upper", "pass"]);
    let mut recs = Vec::new();
    let mut check = |name: String, value: f64, lo: f64, hi: f64| {
        let pass = value >= lo && value <= hi;
        if !pass {
            flags.push(format!("check failed: {name} = {value}"));
        }
        t.rows.push(vec![name.clone(), fmt_f(value), fmt_f(lo), fmt_f(hi), pass.to_string()]);
        recs.push(json!({ "check": name, "value": value, "lower": lo, "upper": hi, "pass": pass }));
    };

    let twist = (0..20u64)
        .map(|i| verify_twist_unitary(cfg.seed.wrapping_add(i), 3, 2).max_defect())
        .fold(0.0, f64::max);
    check("twist_unitary_defect".into(), twist, 0.0, 1e-13);

    let steps = [1e-3, 5e-4, 2.5e-4];
    let lt = lambda_trace_check(geom, &steps, cfg.grids.n_u)?;
    check("lambda_trace_order".into(), lt.fitted_order.unwrap_or(f64::NAN), 1.8, 2.2);

    let dr = decomposition_residual(geom, &[1e-2, 5e-3, 2.5e-3], 20, cfg.seed)?;
    check("decomposition_order".into(), dr.fitted_order.unwrap_or(f64::NAN), 1.7, 2.3);

    let e0 = cfg.epsilons[0];
    let div = divergent_term_check(&[e0, e0 / 2.0, e0 / 4.0], cfg.grids.n_s)?;
    check("divergent_term_order".into(), div.fitted_order.unwrap_or(f64::NAN), -1.05, -0.95);

    let gu = Grid1D::new(cfg.grids.n_u, 0.0, geom.length())?;
    for &e in &cfg.epsilons {
        let tm = assemble_normal_t(e, &Grid1D::normal(cfg.grids.n_s, e)?)?;
        let idx = graded_index(&tm, &eig_symmetric(&tm, EigRequest::smallest(3))?, None)?;
        check(format!("normal_index(eps={e})"), idx.index.map(|v| v as f64).unwrap_or(f64::NAN), 1.0, 1.0);
        for &m in modes {
            let h = assemble_product(geom, m, e, &gu, &Grid1D::normal(cfg.grids.n_s, e)?)?;
            check(format!("hermitian_defect(m={m},eps={e})"), h.matrix.hermitian_defect(), 0.0, cfg.tolerances.hermiticity);
            let g = h.grading.as_ref().expect("product operators are graded");
            check(format!("grading_defect(m={m},eps={e})"), g.anticommutator_defect(&h.matrix), 0.0, cfg.tolerances.hermiticity);
        }
    }
    Ok((t, Value::Array(recs)))
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
    w.write_record(&table.header).map_err(|e| Error::Output(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(out_err)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::Output(format!("{}: {e}", path.display())))
}

/// Writes `<table>.csv`, `<subcommand>.json` and `summary.json` into the
/// configured directory and returns the paths written.
pub fn write_report(report: &Report, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir).map_err(|e| Error::Output(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let name = report.subcommand.name();
    if cfg.output.formats.contains(&Format::Csv) {
        for t in &report.tables {
            let p = dir.join(format!("{}.csv", t.name));
            write_csv(&p, t)?;
            written.push(p);
        }
    }
    if cfg.output.formats.contains(&Format::Json) {
        let p = dir.join(format!("{name}.json"));
        write_json(
            &p,
            &json!({
                "tool": "codim1lab",
                "version": VERSION,
                "subcommand": name,
                "config": cfg,
                "records": report.records,
                "flags": report.flags,
            }),
        )?;
        written.push(p);
    }
    let mut summary = json!({
        "subcommand": name,
        "version": VERSION,
        "exit_code": report.exit_code(),
        "flags": report.flags,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut summary, &report.summary) {
        for (k, v) in src {
            dst.insert(k.clone(), v.clone());
        }
    }
    let p = dir.join("summary.json");
    write_json(&p, &summary)?;
    written.push(p);
    Ok(written)
}

/// Parses the config, applies overrides, runs and writes. Returns the exit
/// status.
pub fn run(cli: &Cli) -> Result<i32> {
    let mut cfg = RunConfig::load(&cli.config)?;
    cfg.apply(&cli.overrides)?;
    let report = execute(cli.subcommand, &cfg)?;
    write_report(&report, &cfg)?;
    Ok(report.exit_code())
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", one_line(&e.to_string()));
            1
        }
    }
}
