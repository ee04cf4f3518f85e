//! Batch driver behind the `wgmaxwell` binary: convergence runs over a
//! refinement ladder, stability probes, and single solves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::analysis::{self, ErrorReport};
use crate::assembly::{apply_boundary_conditions, CoefficientField, Discretization, Kind, LinearSystem};
use crate::error::{Error, Result};
use crate::manufactured::{case_by_name, derive_sources, ExactCase};
use crate::mesh::Mesh;
use crate::solver::{self, SolveSummary};

/// Errors at or below this value count as exact.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    #[default]
    Triangles,
    Quadrilaterals,
}

/// A refinement level: `n` subdivisions per side of the case domain, or a
/// mesh file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Structured(usize),
    File(PathBuf),
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Level::Structured(n) => write!(f, "n={n}"),
            Level::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub energy: f64,
    pub multiplier: f64,
    pub l2: f64,
    pub edge: f64,
}

impl Thresholds {
    pub fn for_order(k: usize) -> Self {
        let k = k as f64;
        Self { energy: k - 0.2, multiplier: k - 0.2, l2: k + 0.8, edge: k + 0.8 }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_coercivity_samples() -> usize {
    200
}
fn default_witness_samples() -> usize {
    50
}
fn default_commutativity_cells() -> usize {
    100
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Kind,
    pub case: String,
    pub k: usize,
    pub levels: Vec<Level>,
    #[serde(default)]
    pub mesh: MeshKind,
    /// Material file; the case's own coefficients when absent.
    #[serde(default)]
    pub coefficients: Option<PathBuf>,
    /// Overrides the case frequency.
    #[serde(default)]
    pub omega: Option<f64>,
    /// Overrides the conductivity on every cell.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Run the stability probes as part of `converge`.
    #[serde(default)]
    pub probes: bool,
    #[serde(default)]
    pub plot: bool,
    /// Rate thresholds on the finest pair; `k - 0.2` and `k + 0.8` by default.
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
    #[serde(default = "default_coercivity_samples")]
    pub coercivity_samples: usize,
    #[serde(default = "default_witness_samples")]
    pub witness_samples: usize,
    #[serde(default = "default_commutativity_cells")]
    pub commutativity_cells: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(kind: Kind, case: &str, k: usize, levels: &[usize]) -> Self {
        Self {
            kind,
            case: case.to_string(),
            k,
            levels: levels.iter().map(|&n| Level::Structured(n)).collect(),
            mesh: MeshKind::default(),
            coefficients: None,
            omega: None,
            sigma: None,
            output: default_output(),
            probes: false,
            plot: false,
            thresholds: None,
            coercivity_samples: default_coercivity_samples(),
            witness_samples: default_witness_samples(),
            commutativity_cells: default_commutativity_cells(),
            seed: default_seed(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<ExactCase> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("no refinement levels given".into()));
        }
        if self.levels.contains(&Level::Structured(0)) {
            return Err(Error::InvalidConfig("structured levels need n >= 1".into()));
        }
        let case = case_by_name(&self.case)?;
        if case.kind != self.kind {
            return Err(Error::InvalidConfig(format!(
                "case `{}` is a {} case, config asks for {}",
                self.case, case.kind, self.kind
            )));
        }
        Ok(case)
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds.unwrap_or_else(|| Thresholds::for_order(self.k))
    }

    fn mesh(&self, case: &ExactCase, level: &Level) -> Result<Mesh> {
        match (level, self.mesh) {
            (Level::Structured(n), MeshKind::Triangles) => Mesh::structured_triangulation(*n, case.domain),
            (Level::Structured(n), MeshKind::Quadrilaterals) => Mesh::structured_quadrilateral(*n, case.domain),
            (Level::File(p), _) => Mesh::load_json(p),
        }
    }

    fn coefficients(&self, case: &ExactCase, mesh: &Mesh) -> Result<CoefficientField> {
        let omega = self.omega.unwrap_or(case.omega);
        let base = match &self.coefficients {
            Some(p) => CoefficientField::load_json(p, mesh.num_cells(), omega)?,
            None => {
                let c = case.coefficients(mesh)?;
                CoefficientField::new(c.materials().to_vec(), omega)?
            }
        };
        match self.sigma {
            Some(s) => {
                let mats = base.materials().iter().map(|m| crate::assembly::Material { sigma: s, ..*m }).collect();
                CoefficientField::new(mats, omega)
            }
            None => Ok(base),
        }
    }
}

/// A mesh, its coefficients and the case data for one level.
pub struct Problem {
    pub case: ExactCase,
    pub mesh: Mesh,
    pub coeff: CoefficientField,
    pub k: usize,
}

impl Problem {
    pub fn new(config: &RunConfig, level: &Level) -> Result<Self> {
        let case = config.validate()?;
        let mesh = config.mesh(&case, level)?;
        let coeff = config.coefficients(&case, &mesh)?;
        Ok(Self { case, mesh, coeff, k: config.k })
    }

    pub fn discretization(&self) -> Result<Discretization<'_>> {
        Discretization::new(&self.mesh, &self.coeff, self.k, self.case.kind)
    }

    /// Assembled system with boundary data applied.
    pub fn system(&self, disc: &Discretization) -> Result<LinearSystem> {
        let src = derive_sources(&self.case, &self.mesh, &self.coeff)?;
        let full = disc.assemble_unconstrained(&src)?;
        apply_boundary_conditions(&full, &disc.boundary_data(&src))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelResult {
    pub level: String,
    pub h: f64,
    pub cells: usize,
    pub dofs: usize,
    pub errors: ErrorReport,
    pub solver: SolveSummary,
    pub divergence_residual: f64,
}

/// Assembles, solves and measures one level.
pub fn run_level(config: &RunConfig, level: &Level) -> Result<LevelResult> {
    let problem = Problem::new(config, level)?;
    let disc = problem.discretization()?;
    let src = derive_sources(&problem.case, &problem.mesh, &problem.coeff)?;
    let full = disc.assemble_unconstrained(&src)?;
    let system = apply_boundary_conditions(&full, &disc.boundary_data(&src))?;
    let report = solver::solve(&system.matrix, &system.rhs)?;
    let x = system.expand(&report.solution);
    let fields = problem.case.exact_fields(&problem.mesh)?;
    let errors = analysis::error_report(&disc, &x, |c, p| fields.u(c, p), |c, p| fields.p(c, p))?;
    let div = analysis::divergence_residual(&disc, &x, src.charge.as_ref());
    log::info!(
        "{level}: {} dofs, energy error {:.3e}, residual {:.2e}",
        system.dim(),
        errors.energy,
        report.relative_residual
    );
    Ok(LevelResult {
        level: level.to_string(),
        h: problem.mesh.h(),
        cells: problem.mesh.num_cells(),
        dofs: system.dim(),
        errors,
        solver: report.summary(),
        divergence_residual: div.relative,
    })
}

/// An observed rate, or `exact` when the whole error column vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Exact,
    Value(f64),
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Exact => s.serialize_str("exact"),
            Rate::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Exact => write!(f, "exact"),
            Rate::Value(v) => write!(f, "{v:.4}"),
        }
    }
}

pub const COLUMNS: [&str; 4] = ["energy", "multiplier", "l2", "edge"];

fn column(e: &ErrorReport, i: usize) -> f64 {
    [e.energy, e.multiplier, e.l2, e.edge][i]
}

/// `log(e_1 / e_2) / log(h_1 / h_2)` for consecutive levels, which is
/// `log2(e_1 / e_2)` under halving.
pub fn fit_rates(h: &[f64], errors: &[f64]) -> Vec<Rate> {
    if errors.iter().all(|&e| e <= EXACT_TOL) {
        return vec![Rate::Exact; errors.len().saturating_sub(1)];
    }
    h.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| Rate::Value((e[0] / e[1]).ln() / (h[0] / h[1]).ln()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub kind: Kind,
    pub case: String,
    pub k: usize,
    pub levels: Vec<LevelResult>,
    /// Rates per column, one per consecutive pair of levels.
    pub rates: Vec<(String, Vec<Rate>)>,
    /// `None` when the case is not smooth enough for rate thresholds.
    pub thresholds: Option<Thresholds>,
    pub probes: Option<ProbeReport>,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn finest_rate(&self, col: &str) -> Option<Rate> {
        self.rates.iter().find(|(c, _)| c == col).and_then(|(_, r)| r.last().copied())
    }

    /// The level table as CSV, one row per level with the rate into it.
    pub fn csv(&self, stamp: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {stamp}");
        let _ = writeln!(
            out,
            "level,h,cells,dofs,energy,multiplier,l2,edge,energy_rate,multiplier_rate,l2_rate,edge_rate,solver_residual,divergence_residual"
        );
        for (i, l) in self.levels.iter().enumerate() {
            let _ = write!(out, "{},{:.6e},{},{}", l.level, l.h, l.cells, l.dofs);
            for c in 0..4 {
                let _ = write!(out, ",{:.6e}", column(&l.errors, c));
            }
            for (_, rates) in &self.rates {
                match i.checked_sub(1).and_then(|j| rates.get(j)) {
                    Some(r) => {
                        let _ = write!(out, ",{r}");
                    }
                    None => out.push(','),
                }
            }
            let _ = writeln!(out, ",{:.3e},{:.3e}", l.solver.relative_residual, l.divergence_residual);
        }
        out
    }
}

fn stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("generated at unix time {secs}")
}

/// Runs every level, fits rates and checks thresholds. Writes nothing.
pub fn convergence(config: &RunConfig) -> Result<ConvergenceReport> {
    let case = config.validate()?;
    if config.levels.len() < 2 {
        return Err(Error::InvalidConfig("at least two levels are needed to fit rates".into()));
    }
    let mut levels = Vec::with_capacity(config.levels.len());
    for (i, level) in config.levels.iter().enumerate() {
        levels.push(run_level(config, level).map_err(|e| e.at_level(i))?);
    }
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let rates: Vec<(String, Vec<Rate>)> = COLUMNS
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let e: Vec<f64> = levels.iter().map(|l| column(&l.errors, c)).collect();
            (name.to_string(), fit_rates(&h, &e))
        })
        .collect();
    let thresholds = case.smooth.then(|| config.thresholds());
    let mut failures = Vec::new();
    if let Some(t) = thresholds {
        let want = [t.energy, t.multiplier, t.l2, t.edge];
        for ((name, r), min) in rates.iter().zip(want) {
            if let Some(Rate::Value(v)) = r.last() {
                if !(*v >= min) {
                    failures.push(format!("{name} rate {v:.3} below {min}"));
                }
            }
        }
    }
    let probes = if config.probes { Some(probes(config)?) } else { None };
    if let Some(p) = &probes {
        failures.extend(p.entries.iter().filter(|e| !e.passed).map(|e| format!("probe {} failed", e.name)));
    }
    Ok(ConvergenceReport {
        kind: config.kind,
        case: config.case.clone(),
        k: config.k,
        levels,
        rates,
        thresholds,
        probes,
        passed: failures.is_empty(),
        failures,
    })
}

/// [`convergence`] plus `report.csv`, `report.json` and optionally
/// `plot.svg` in the output directory.
pub fn run_convergence(config: &RunConfig) -> Result<ConvergenceReport> {
    let report = convergence(config)?;
    std::fs::create_dir_all(&config.output)?;
    std::fs::write(config.output.join("report.csv"), report.csv(&stamp()))?;
    std::fs::write(config.output.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    if config.plot {
        if let Err(e) = std::fs::write(config.output.join("plot.svg"), svg_plot(&report)) {
            log::warn!("could not write plot: {e}");
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub name: String,
    pub passed: bool,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
    pub passed: bool,
}

impl ProbeReport {
    pub fn get(&self, name: &str) -> Option<&ProbeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub const COMMUTATIVITY_TOL: f64 = 1e-11;
pub const WITNESS_TOL: f64 = 1e-11;
pub const WITNESS_CURL_TOL: f64 = 1e-12;
pub const COERCIVITY_TOL: f64 = 1e-10;

/// Stability probes on the levels of `config`. Random sampling is seeded
/// from the config.
pub fn probes(config: &RunConfig) -> Result<ProbeReport> {
    use rand::SeedableRng;
    let case = config.validate()?;
    let seed = config.seed;
    let k = config.k;
    let mut entries = Vec::new();
    let entry = |name: &str, passed: bool, details: serde_json::Value| ProbeEntry {
        name: name.to_string(),
        passed,
        details,
    };

    let first = Problem::new(config, &config.levels[0]).map_err(|e| e.at_level(0))?;
    let flux = first.coeff.flux(case.kind, 0);
    let c = analysis::commutativity_probe(k, config.commutativity_cells, flux, seed)?;
    let ci = analysis::commutativity_probe(k, config.commutativity_cells, Matrix2::identity(), seed + 1)?;
    let worst = c.divergence.max(c.curl).max(ci.divergence).max(ci.curl);
    entries.push(entry(
        "commutativity",
        worst <= COMMUTATIVITY_TOL,
        serde_json::json!({ "coefficient": c, "identity": ci, "max": worst, "tol": COMMUTATIVITY_TOL }),
    ));

    let finest_index = config.levels.len() - 1;
    let finest = Problem::new(config, &config.levels[finest_index]).map_err(|e| e.at_level(finest_index))?;
    let disc = finest.discretization().map_err(|e| e.at_level(finest_index))?;
    let co = analysis::coercivity_probe(&disc, config.coercivity_samples, seed).map_err(|e| e.at_level(finest_index))?;
    entries.push(entry(
        "coercivity",
        co.passes(COERCIVITY_TOL),
        serde_json::json!({ "probe": co, "tol": COERCIVITY_TOL }),
    ));

    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let (mut gap, mut curl, mut bound) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..config.witness_samples {
        let q = analysis::random_multiplier(&disc, &mut rng);
        let w = analysis::infsup_witness(&disc, &q)?;
        gap = gap.max(w.relative_gap());
        curl = curl.max(w.edge_curl);
        bound = bound.max(w.bound);
    }
    let one = {
        let dm = &disc.dofmap;
        let mut q = DVector::from_element(dm.len(), Complex64::default());
        let v = disc.interpolate(|_, _| [Complex64::default(); 2], Some(|_: usize, _| Complex64::new(1.0, 0.0)))?;
        for c in 0..dm.num_cells {
            for l in 0..dm.n_mult {
                q[dm.mult(c, l)] = v[dm.mult(c, l)];
            }
        }
        analysis::infsup_witness(&disc, &q)?
    };
    // only boundary traces jump for q = 1, and only the electric norm sees them
    let expected_one = match case.kind {
        Kind::Electric => perimeter(&finest.mesh) * finest.mesh.h(),
        Kind::Magnetic => 0.0,
    };
    entries.push(entry(
        "infsup_witness",
        gap <= WITNESS_TOL && curl <= WITNESS_CURL_TOL,
        serde_json::json!({
            "samples": config.witness_samples,
            "max_relative_gap": gap,
            "max_edge_curl": curl,
            "max_bound": bound,
            "constant_multiplier": { "lhs": one.lhs.re, "rhs": one.rhs.re, "expected": expected_one },
            "tol": WITNESS_TOL,
        }),
    ));

    let mut consts = Vec::new();
    for (i, level) in config.levels.iter().enumerate() {
        let p = Problem::new(config, level).map_err(|e| e.at_level(i))?;
        consts.push(analysis::inequality_probe(&p.mesh, k, 3, seed).map_err(|e| e.at_level(i))?);
    }
    let spread = |f: fn(&analysis::InequalityProbe) -> f64| {
        let v: Vec<f64> = consts.iter().map(f).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (st, si) = (spread(|c| c.trace), spread(|c| c.inverse));
    entries.push(entry(
        "trace_inverse",
        st <= 2.0 && si <= 2.0,
        serde_json::json!({ "levels": consts, "trace_spread": st, "inverse_spread": si }),
    ));

    let passed = entries.iter().all(|e| e.passed);
    Ok(ProbeReport { entries, passed })
}

fn perimeter(mesh: &Mesh) -> f64 {
    mesh.boundary_edges().map(|e| mesh.edge(e).length).sum()
}

/// [`probes`] plus `probes.json` in the output directory.
pub fn run_probes(config: &RunConfig) -> Result<ProbeReport> {
    let report = probes(config)?;
    std::fs::create_dir_all(&config.output)?;
    std::fs::write(config.output.join("probes.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub level: String,
    pub dofs: usize,
    pub solver: SolveSummary,
    pub errors: ErrorReport,
}

/// Solves the first level; with `dump` set, writes the reduced matrix to
/// that path and the right-hand side next to it with `.rhs` appended.
pub fn run_solve(config: &RunConfig, dump: Option<&Path>) -> Result<SolveOutcome> {
    let level = &config.levels[0];
    let problem = Problem::new(config, level).map_err(|e| e.at_level(0))?;
    let disc = problem.discretization()?;
    let system = problem.system(&disc)?;
    if let Some(path) = dump {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        system.matrix.write_matrix_market(&mut out)?;
        let mut rhs = path.as_os_str().to_owned();
        rhs.push(".rhs");
        let out = std::io::BufWriter::new(std::fs::File::create(Path::new(&rhs))?);
        crate::solver::sparse::write_vector_market(&system.rhs, out)?;
    }
    let start = Instant::now();
    let report = solver::solve(&system.matrix, &system.rhs)?;
    log::debug!("solve took {:.3}s", start.elapsed().as_secs_f64());
    let x = system.expand(&report.solution);
    let fields = problem.case.exact_fields(&problem.mesh)?;
    let errors = analysis::error_report(&disc, &x, |c, p| fields.u(c, p), |c, p| fields.p(c, p))?;
    Ok(SolveOutcome { level: level.to_string(), dofs: system.dim(), solver: report.summary(), errors })
}

/// Log-log chart of the error columns against `h`.
pub fn svg_plot(report: &ConvergenceReport) -> String {
    let (w, h, pad) = (640.0, 480.0, 60.0);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let pts: Vec<(f64, [f64; 4])> = report
        .levels
        .iter()
        .map(|l| (l.h.log10(), [0, 1, 2, 3].map(|c| column(&l.errors, c).max(1e-300).log10())))
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().flat_map(|p| p.1).filter(|v| v.is_finite() && *v > -250.0).collect();
    let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif">{} k={}: log10 error vs log10 h</text>"#,
        w / 2.0,
        report.case,
        report.k
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{pad},{pad} {pad},{} {},{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    for (c, name) in COLUMNS.iter().enumerate() {
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1[c]))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            line.join(" "),
            colors[c]
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{}">{name}</text>"#,
            w - pad + 4.0,
            pad + 16.0 * c as f64,
            colors[c]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_level_is_rejected() {
        let cfg = RunConfig::new(Kind::Electric, "electric-trig", 1, &[4]);
        assert!(matches!(convergence(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_json_str(
            r#"{"kind": "magnetic", "case": "magnetic-trig", "k": 2, "levels": [2, 4, "mesh.json"], "plot": true}"#,
        )
        .unwrap();
        assert_eq!(cfg.levels[2], Level::File("mesh.json".into()));
        assert_eq!(cfg.thresholds(), Thresholds::for_order(2));
        assert!(RunConfig::from_json_str(r#"{"kind": "electric", "case": "x", "k": 1, "levels": [2], "bogus": 1}"#).is_err());
        let bad = RunConfig::new(Kind::Electric, "magnetic-trig", 1, &[2, 4]);
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let unknown = RunConfig::new(Kind::Electric, "nope", 1, &[2, 4]);
        assert!(matches!(unknown.validate(), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn rates_and_exact_columns() {
        let r = fit_rates(&[0.5, 0.25, 0.125], &[1.0, 0.25, 0.0625]);
        assert_eq!(r, vec![Rate::Value(2.0), Rate::Value(2.0)]);
        assert_eq!(fit_rates(&[0.5, 0.25], &[1e-12, 1e-13]), vec![Rate::Exact]);
        assert_eq!(serde_json::to_string(&Rate::Exact).unwrap(), "\"exact\"");
    }

    #[test]
    fn exact_case_reports_exact_rates() {
        let cfg = RunConfig::new(Kind::Electric, "electric-poly1", 1, &[2, 4]);
        let rep = convergence(&cfg).unwrap();
        assert!(rep.passed, "{:?}", rep.failures);
        for (_, r) in &rep.rates {
            assert_eq!(r, &vec![Rate::Exact]);
        }
    }

    #[test]
    fn zero_conductivity_is_reported() {
        let mut cfg = RunConfig::new(Kind::Electric, "electric-trig", 1, &[2, 4]);
        cfg.sigma = Some(0.0);
        let err = convergence(&cfg).unwrap_err();
        assert!(matches!(&err, Error::AtLevel { level: 0, source } if matches!(**source, Error::CoercivityPrecondition(_))));
        assert!(matches!(probes(&cfg), Err(Error::AtLevel { .. })));
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = RunConfig::new(Kind::Magnetic, "magnetic-trig", 1, &[2, 4]);
        let a = convergence(&cfg).unwrap().csv("x");
        let b = convergence(&cfg).unwrap().csv("x");
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 4);
    }

    #[test]
    fn default_probes_pass() {
        let mut cfg = RunConfig::new(Kind::Electric, "electric-trig", 1, &[2, 4]);
        cfg.coercivity_samples = 10;
        cfg.witness_samples = 5;
        cfg.commutativity_cells = 10;
        let rep = probes(&cfg).unwrap();
        assert!(rep.passed, "{rep:#?}");
        let w = &rep.get("infsup_witness").unwrap().details["constant_multiplier"];
        let four_h = w["expected"].as_f64().unwrap();
        assert!((four_h - 4.0 * 0.25f64.hypot(0.25)).abs() < 1e-15);
        assert!((w["lhs"].as_f64().unwrap() - four_h).abs() < 1e-12);
        assert!((w["rhs"].as_f64().unwrap() - four_h).abs() < 1e-12);
    }
}
