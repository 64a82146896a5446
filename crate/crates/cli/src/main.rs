use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use defectlab::experiments::{self, Campaign, ExperimentSpec};
use defectlab::spectral::{chiral_index, eigs_near_zero, EigMethod, DEFAULT_DENSE_CAP, DEFAULT_EPSILON};
use defectlab::{
    assemble_defect, build_pattern, gap_scan, ldos, make_clifford, radial_profile, winding3d, BlochModel, LdosMethod,
    LdosRequest, Pattern, PatternParams,
};

#[derive(Debug, Parser)]
#[command(name = "defectlab", version)]
/// Conical square-lattice defects: patterns, Hamiltonians and zero-mode spectroscopy
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a cone pattern and write its sites and bonds
    Pattern {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Assemble the defect Hamiltonian and dump its nonzero entries
    Assemble {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long = "M", alias = "mass", allow_negative_numbers = true)]
        mass: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Local density of states on a defect pattern
    Ldos {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long = "M", alias = "mass", allow_negative_numbers = true)]
        mass: f64,
        /// Explicit energies; overrides the range options
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        energies: Vec<f64>,
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        e_min: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        e_max: f64,
        #[arg(long, default_value_t = 121)]
        e_count: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Method::ShiftedSolve)]
        method: Method,
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        dense_cap: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Near-zero eigenvalues and the chiral index diagnostic
    Eigs {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long = "M", alias = "mass", allow_negative_numbers = true)]
        mass: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Also evaluate the chiral index with this window (dense)
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Minimal half-gap of a Bloch model on a k-grid
    GapScan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 60)]
        grid_n: usize,
    },
    /// Winding number of the flat-band unitary
    Winding {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 40)]
        grid_n: usize,
    },
    /// Run a campaign from a JSON config or from its desk-scale preset
    Campaign {
        #[arg(value_parser = ["m_sweep", "core_removal", "defect_sequence", "phase_diagram"])]
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset config and exit
        #[arg(long)]
        print_config: bool,
    },
}

#[derive(Debug, Args)]
struct Geometry {
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 30.0)]
    r_max: f64,
    #[arg(long, default_value_t = 0.0)]
    core_cut: f64,
}

impl Geometry {
    fn build(&self) -> Result<Pattern> {
        let params = PatternParams::new(self.alpha, self.r_max, self.core_cut)?;
        Ok(build_pattern(params)?)
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long = "M", alias = "mass", allow_negative_numbers = true)]
    mass: f64,
    #[arg(long, value_enum, default_value_t = ModelKind::Torus3d)]
    variant: ModelKind,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
}

impl ModelArgs {
    fn model(&self) -> BlochModel {
        match self.variant {
            ModelKind::Torus3d => BlochModel::torus3d(self.mass),
            ModelKind::Cylinder => BlochModel::cylinder(self.mass, self.beta),
            ModelKind::Asymptotic => BlochModel::asymptotic(self.mass, self.alpha, self.theta0),
            ModelKind::Planar => BlochModel::planar(self.mass),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    Torus3d,
    Cylinder,
    Asymptotic,
    Planar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    DenseEig,
    ShiftedSolve,
}

impl From<Method> for LdosMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::DenseEig => LdosMethod::DenseEig,
            Method::ShiftedSolve => LdosMethod::ShiftedSolve,
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Pattern { geometry, out } => {
            let pat = geometry.build()?;
            pat.write_sites_csv(create(&out, "sites.csv")?)?;
            pat.write_adjacency_csv(create(&out, "adjacency.csv")?)?;
            let summary = json!({
                "params": pat.params,
                "sites": pat.len(),
                "bonds": pat.bond_count(),
                "max_neighbors": pat.neighbors.iter().map(Vec::len).max().unwrap_or(0),
            });
            serde_json::to_writer_pretty(create(&out, "pattern.json")?, &summary)?;
            print_json(&summary)?;
        }
        Command::Assemble { geometry, mass, out } => {
            let pat = geometry.build()?;
            let h = assemble_defect(&pat, mass, &make_clifford())?;
            h.write_triplets(create(&out, "hamiltonian.csv")?)?;
            print_json(&json!({
                "M": mass,
                "dim": h.dim(),
                "nnz_blocks": h.nnz_blocks(),
                "hermiticity_defect": h.hermiticity_defect(),
                "chiral_defect": h.chiral_defect(),
                "gershgorin_bound": h.gershgorin_bound(),
            }))?;
        }
        Command::Ldos {
            geometry,
            mass,
            energies,
            e_min,
            e_max,
            e_count,
            epsilon,
            method,
            bin_width,
            dense_cap,
            out,
        } => {
            let energies = if energies.is_empty() {
                experiments::EnergySpec::Range {
                    min: e_min,
                    max: e_max,
                    count: e_count,
                }
                .values()
            } else {
                energies
            };
            let pat = geometry.build()?;
            let h = assemble_defect(&pat, mass, &make_clifford())?;
            let mut req = LdosRequest::new(energies, method.into());
            req.epsilon = epsilon;
            req.dense_cap = dense_cap;
            let mut grid = ldos(&h, &req)?;
            grid.attach(&pat);
            grid.meta.mass = Some(mass);
            grid.write_csv(create(&out, "ldos.csv")?)?;
            radial_profile(&grid, bin_width, pat.params.r_max)?.write_csv(create(&out, "radial.csv")?)?;
            serde_json::to_writer_pretty(create(&out, "ldos.json")?, &grid.meta)?;
            print_json(&json!({
                "M": mass,
                "sites": pat.len(),
                "energies": grid.energies.len(),
                "core_weight_E0": grid.energy_index(0.0).map(|e| grid.core_weight(e, experiments::CORE_RADIUS)),
            }))?;
        }
        Command::Eigs {
            geometry,
            mass,
            count,
            delta,
        } => {
            let pat = geometry.build()?;
            let h = assemble_defect(&pat, mass, &make_clifford())?;
            let nz = eigs_near_zero(&h, count, EigMethod::ShiftInvert)?;
            let index = delta.map(|d| chiral_index(&h, d)).transpose()?;
            print_json(&json!({
                "M": mass,
                "values": nz.values,
                "chirality": nz.chirality,
                "degenerate": nz.degenerate,
                "chiral_index": index,
            }))?;
        }
        Command::GapScan { model, grid_n } => {
            let gap = gap_scan(&model.model(), grid_n)?;
            print_json(&json!({ "M": model.mass, "grid_n": grid_n, "gap": gap }))?;
        }
        Command::Winding { model, grid_n } => {
            let w = winding3d(&model.model(), grid_n)?;
            print_json(&json!({ "M": model.mass, "raw": w.raw, "winding": w.rounded }))?;
        }
        Command::Campaign {
            name,
            config,
            out,
            print_config,
        } => {
            let campaign = Campaign::parse(&name)?;
            let mut spec = match &config {
                Some(path) => ExperimentSpec::from_json_file(path)
                    .with_context(|| format!("reading config {}", path.display()))?,
                None => ExperimentSpec::preset(campaign, "out"),
            };
            if spec.campaign != campaign {
                bail!("config is for campaign {}, not {name}", spec.campaign.name());
            }
            if let Some(out) = out {
                spec.output_dir = out;
            }
            if print_config {
                println!("{}", serde_json::to_string_pretty(&spec)?);
                return Ok(true);
            }
            let manifest = experiments::run(&spec)?;
            let failed = manifest.jobs.iter().filter(|j| !j.ok).count();
            print_json(&json!({
                "campaign": campaign.name(),
                "jobs": manifest.jobs.len(),
                "failed": failed,
                "output_dir": spec.output_dir,
            }))?;
            return Ok(manifest.all_ok());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
