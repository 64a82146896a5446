//! Campaign runner: zero-mode spectroscopy sweeps over mass, system size and
//! cone angle, plus the bulk phase diagram. Each campaign writes CSV files,
//! a JSON sidecar per CSV and a single manifest.
//!
//! Jobs are independent; a failing job is logged and recorded in the
//! manifest while the remaining jobs still run.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::assemble_defect;
use crate::bulk::{gap_scan, winding3d, BlochModel, GAP_THRESHOLD};
use crate::clifford::make_clifford;
use crate::error::{Error, Result};
use crate::pattern::{build_pattern, PatternParams};
use crate::spectral::{ldos, radial_profile, LdosGrid, LdosMethod, LdosRequest, SiteSelection, DEFAULT_DENSE_CAP, DEFAULT_EPSILON};

/// Radius of the disk whose zero-energy LDOS is reported as the core weight.
pub const CORE_RADIUS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    MSweep,
    CoreRemoval,
    DefectSequence,
    PhaseDiagram,
}

impl Campaign {
    pub fn name(&self) -> &'static str {
        match self {
            Campaign::MSweep => "m_sweep",
            Campaign::CoreRemoval => "core_removal",
            Campaign::DefectSequence => "defect_sequence",
            Campaign::PhaseDiagram => "phase_diagram",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.replace('-', "_").as_str() {
            "m_sweep" => Ok(Campaign::MSweep),
            "core_removal" => Ok(Campaign::CoreRemoval),
            "defect_sequence" => Ok(Campaign::DefectSequence),
            "phase_diagram" => Ok(Campaign::PhaseDiagram),
            other => Err(Error::InvalidParameter(format!("unknown campaign '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnergySpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

impl EnergySpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EnergySpec::List(v) => v.clone(),
            EnergySpec::Range { min, max, count } => match count {
                0 => Vec::new(),
                1 => vec![*min],
                _ => (0..*count)
                    .map(|k| min + (max - min) * k as f64 / (*count - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdosConfig {
    pub energies: EnergySpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_method")]
    pub method: LdosMethod,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_method() -> LdosMethod {
    LdosMethod::ShiftedSolve
}
fn default_bin_width() -> f64 {
    1.0
}
fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl Default for LdosConfig {
    fn default() -> Self {
        Self {
            energies: EnergySpec::List(vec![0.0]),
            epsilon: DEFAULT_EPSILON,
            method: LdosMethod::ShiftedSolve,
            bin_width: 1.0,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub campaign: Campaign,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub mass: Vec<f64>,
    #[serde(default)]
    pub r_max: Vec<f64>,
    #[serde(default)]
    pub core_cut: f64,
    #[serde(default)]
    pub ldos: LdosConfig,
    #[serde(default = "default_grid")]
    pub winding_grid: usize,
    #[serde(default = "default_grid")]
    pub gap_grid: usize,
    pub output_dir: PathBuf,
}

fn default_grid() -> usize {
    40
}

impl ExperimentSpec {
    /// Desk-scale defaults for each campaign (r_max = 30).
    pub fn preset(campaign: Campaign, output_dir: impl Into<PathBuf>) -> Self {
        let output_dir = output_dir.into();
        let base = Self {
            campaign,
            alpha: vec![0.75],
            mass: vec![2.0],
            r_max: vec![30.0],
            core_cut: 0.0,
            ldos: LdosConfig::default(),
            winding_grid: 40,
            gap_grid: 40,
            output_dir,
        };
        match campaign {
            Campaign::MSweep => Self {
                mass: vec![4.0, 3.5, 3.0, 2.5, 2.0, 1.5],
                ldos: LdosConfig {
                    energies: EnergySpec::Range {
                        min: -3.0,
                        max: 3.0,
                        count: 121,
                    },
                    ..LdosConfig::default()
                },
                ..base
            },
            Campaign::CoreRemoval => Self {
                mass: vec![2.0, 4.0],
                r_max: vec![20.0, 30.0],
                core_cut: 2.5,
                ..base
            },
            Campaign::DefectSequence => Self {
                alpha: vec![0.75, 0.5, 0.25],
                ..base
            },
            Campaign::PhaseDiagram => Self {
                alpha: Vec::new(),
                r_max: Vec::new(),
                mass: (-10..=10).map(|k| k as f64 * 0.5).collect(),
                gap_grid: 60,
                ..base
            },
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let spec: Self = serde_json::from_reader(File::open(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mass.is_empty() {
            return Err(Error::InvalidParameter("mass list is empty".into()));
        }
        if self.campaign != Campaign::PhaseDiagram {
            if self.alpha.is_empty() || self.r_max.is_empty() {
                return Err(Error::InvalidParameter("alpha and r_max lists must be nonempty".into()));
            }
            for &a in &self.alpha {
                for &r in &self.r_max {
                    PatternParams::new(a, r, self.core_cut)?;
                }
            }
            LdosRequest {
                energies: self.ldos.energies.values(),
                epsilon: self.ldos.epsilon,
                sites: SiteSelection::All,
                method: self.ldos.method,
                dense_cap: self.ldos.dense_cap,
            }
            .validate()?;
            if self.ldos.energies.values().is_empty() {
                return Err(Error::InvalidParameter("energy grid is empty".into()));
            }
        }
        if self.winding_grid < 8 || self.gap_grid < 8 {
            return Err(Error::InvalidParameter("k-grids need at least 8 points per axis".into()));
        }
        Ok(())
    }

    fn campaign_dir(&self) -> PathBuf {
        self.output_dir.join(self.campaign.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobParams {
    pub alpha: Option<f64>,
    pub mass: f64,
    pub r_max: Option<f64>,
    pub core_cut: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub params: JobParams,
    pub ok: bool,
    pub error: Option<String>,
    pub outputs: Vec<String>,
    pub sites: Option<usize>,
    /// Zero-energy LDOS summed over sites with radius below [`CORE_RADIUS`].
    pub core_weight: Option<f64>,
    pub chiral_defect: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    #[serde(rename = "M")]
    pub mass: f64,
    pub gap: f64,
    pub raw: Option<f64>,
    pub winding: Option<i64>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub campaign: Campaign,
    pub spec: ExperimentSpec,
    pub ldos_normalization: String,
    pub jobs: Vec<JobRecord>,
    pub phase_diagram: Vec<PhaseRow>,
    pub complete: bool,
}

impl Manifest {
    fn new(spec: &ExperimentSpec) -> Self {
        Self {
            campaign: spec.campaign,
            spec: spec.clone(),
            ldos_normalization: "LDOS summed over the 4 orbitals of a site; radial values are means over the sites of each bin".into(),
            jobs: Vec::new(),
            phase_diagram: Vec::new(),
            complete: true,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.complete && self.jobs.iter().all(|j| j.ok)
    }

    pub fn job(&self, alpha: f64, mass: f64, r_max: f64) -> Option<&JobRecord> {
        self.jobs.iter().find(|j| {
            j.params.alpha == Some(alpha) && j.params.mass == mass && j.params.r_max == Some(r_max)
        })
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<Manifest> {
    spec.validate()?;
    match spec.campaign {
        Campaign::MSweep => run_m_sweep(spec),
        Campaign::CoreRemoval => run_core_removal(spec),
        Campaign::DefectSequence => run_defect_sequence(spec),
        Campaign::PhaseDiagram => run_phase_diagram(spec),
    }
}

fn expect(spec: &ExperimentSpec, campaign: Campaign) -> Result<()> {
    if spec.campaign != campaign {
        return Err(Error::InvalidParameter(format!(
            "spec is for campaign {}, not {}",
            spec.campaign.name(),
            campaign.name()
        )));
    }
    spec.validate()
}

/// Radial LDOS profiles over an energy grid for every mass.
pub fn run_m_sweep(spec: &ExperimentSpec) -> Result<Manifest> {
    expect(spec, Campaign::MSweep)?;
    run_ldos_jobs(spec, |grid, stem, dir, record| {
        let r_max = record.params.r_max.unwrap_or(0.0);
        let profile = radial_profile(grid, spec.ldos.bin_width, r_max)?;
        let name = format!("radial_{stem}.csv");
        profile.write_csv(BufWriter::new(File::create(dir.join(&name))?))?;
        Ok(vec![name])
    })
}

/// Zero-energy site maps with the core removed, for every `r_max`.
pub fn run_core_removal(spec: &ExperimentSpec) -> Result<Manifest> {
    expect(spec, Campaign::CoreRemoval)?;
    run_ldos_jobs(spec, write_site_map)
}

/// Zero-energy site maps for every cone parameter.
pub fn run_defect_sequence(spec: &ExperimentSpec) -> Result<Manifest> {
    expect(spec, Campaign::DefectSequence)?;
    run_ldos_jobs(spec, write_site_map)
}

fn write_site_map(grid: &LdosGrid, stem: &str, dir: &Path, _: &JobRecord) -> Result<Vec<String>> {
    let name = format!("ldos_{stem}.csv");
    grid.write_csv(BufWriter::new(File::create(dir.join(&name))?))?;
    Ok(vec![name])
}

fn run_ldos_jobs<F>(spec: &ExperimentSpec, emit: F) -> Result<Manifest>
where
    F: Fn(&LdosGrid, &str, &Path, &JobRecord) -> Result<Vec<String>>,
{
    let dir = spec.campaign_dir();
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new(spec);
    for &alpha in &spec.alpha {
        for &r_max in &spec.r_max {
            for &mass in &spec.mass {
                let params = JobParams {
                    alpha: Some(alpha),
                    mass,
                    r_max: Some(r_max),
                    core_cut: Some(spec.core_cut),
                };
                let stem = format!("alpha{alpha}_M{mass}_R{r_max}");
                let mut record = JobRecord {
                    params,
                    ok: false,
                    error: None,
                    outputs: Vec::new(),
                    sites: None,
                    core_weight: None,
                    chiral_defect: None,
                };
                log::info!("{}: {stem}", spec.campaign.name());
                match ldos_job(spec, &mut record, &stem, &dir, &emit) {
                    Ok(()) => record.ok = true,
                    Err(e) => {
                        log::error!("{}: job {stem} failed: {e}", spec.campaign.name());
                        record.error = Some(e.to_string());
                        manifest.complete = false;
                    }
                }
                manifest.jobs.push(record);
            }
        }
    }
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn ldos_job<F>(spec: &ExperimentSpec, record: &mut JobRecord, stem: &str, dir: &Path, emit: &F) -> Result<()>
where
    F: Fn(&LdosGrid, &str, &Path, &JobRecord) -> Result<Vec<String>>,
{
    let alpha = record.params.alpha.unwrap_or(1.0);
    let r_max = record.params.r_max.unwrap_or(0.0);
    let pattern = build_pattern(PatternParams::new(alpha, r_max, spec.core_cut)?)?;
    let h = assemble_defect(&pattern, record.params.mass, &make_clifford())?;
    record.sites = Some(pattern.len());
    record.chiral_defect = Some(h.chiral_defect());
    let req = LdosRequest {
        energies: spec.ldos.energies.values(),
        epsilon: spec.ldos.epsilon,
        sites: SiteSelection::All,
        method: spec.ldos.method,
        dense_cap: spec.ldos.dense_cap,
    };
    let mut grid = ldos(&h, &req)?;
    grid.attach(&pattern);
    grid.meta.mass = Some(record.params.mass);
    if let Some(e0) = grid.energy_index(0.0) {
        record.core_weight = Some(grid.core_weight(e0, CORE_RADIUS));
    }
    let outputs = emit(&grid, stem, dir, record)?;
    for name in &outputs {
        write_json(&dir.join(format!("{name}.json")), &grid.meta)?;
    }
    record.outputs = outputs;
    Ok(())
}

/// Gap and winding number over the mass list; winding is skipped where the
/// gap falls below [`GAP_THRESHOLD`].
pub fn run_phase_diagram(spec: &ExperimentSpec) -> Result<Manifest> {
    expect(spec, Campaign::PhaseDiagram)?;
    let dir = spec.campaign_dir();
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new(spec);
    for &mass in &spec.mass {
        let model = BlochModel::torus3d(mass);
        let gap = gap_scan(&model, spec.gap_grid)?;
        let row = if gap < GAP_THRESHOLD {
            PhaseRow {
                mass,
                gap,
                raw: None,
                winding: None,
                skipped: Some(format!("gap {gap:.3e} below threshold {GAP_THRESHOLD:.0e}")),
            }
        } else {
            match winding3d(&model, spec.winding_grid) {
                Ok(w) => PhaseRow {
                    mass,
                    gap,
                    raw: Some(w.raw),
                    winding: Some(w.rounded),
                    skipped: None,
                },
                Err(e) => PhaseRow {
                    mass,
                    gap,
                    raw: None,
                    winding: None,
                    skipped: Some(e.to_string()),
                },
            }
        };
        log::info!("phase_diagram: M = {mass}, gap = {gap:.4}, winding = {:?}", row.winding);
        manifest.phase_diagram.push(row);
    }
    let mut out = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("phase_diagram.csv"))?));
    out.write_record(["M", "gap", "raw", "winding"])?;
    for r in &manifest.phase_diagram {
        out.write_record(&[
            r.mass.to_string(),
            r.gap.to_string(),
            r.raw.map(|v| v.to_string()).unwrap_or_default(),
            r.winding.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    write_json(&dir.join("phase_diagram.json"), &manifest.phase_diagram)?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}
