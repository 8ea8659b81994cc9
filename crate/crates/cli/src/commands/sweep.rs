use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use qhopfield::{sweep, CapacityResult, GaussianGrid, ModelParams, SolverConfig};

use super::{check_m, check_order, open_output, write_err, DEFAULT_ORDER};
use crate::config::{Config, GridSpec};
use crate::error::{CliError, EXIT_OK};
use crate::format::sig9;

pub const HEADER: &str = "T,omega,m,alpha_c,reason,iterations,stability_value";

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Retrieval overlap m in (0, 1).
    #[arg(long)]
    pub m: Option<f64>,
    /// Temperature axis as start:stop:count.
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub t_grid: Option<GridSpec>,
    /// Drive axis as start:stop:count.
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub omega_grid: Option<GridSpec>,
    /// Gauss–Hermite order.
    #[arg(long)]
    pub order: Option<usize>,
    /// CSV output path; the plot script goes next to it as `<output>.gp`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// A fully resolved sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub m: f64,
    pub t_grid: GridSpec,
    pub omega_grid: GridSpec,
    pub quadrature_order: usize,
    pub output_path: PathBuf,
}

impl SweepPlan {
    fn resolve(args: &SweepArgs, config: &Config) -> Result<Self, CliError> {
        let m = check_m(args.m.or(config.m))?;
        let missing = |name: &str| CliError::Usage(format!("--{name} is required"));
        let t_grid = args.t_grid.or(config.t_grid).ok_or_else(|| missing("t-grid"))?;
        let omega_grid = args.omega_grid.or(config.omega_grid).ok_or_else(|| missing("omega-grid"))?;
        t_grid.validate("t-grid")?;
        omega_grid.validate("omega-grid")?;
        let output_path = args.output.clone().or_else(|| config.output.clone()).ok_or_else(|| missing("output"))?;
        let quadrature_order = check_order(args.order.or(config.order).unwrap_or(DEFAULT_ORDER))?;
        Ok(Self { m, t_grid, omega_grid, quadrature_order, output_path })
    }
}

pub fn run(args: &SweepArgs, config: &Config) -> Result<u8, CliError> {
    let plan = SweepPlan::resolve(args, config)?;
    let temps = plan.t_grid.values();
    let omegas = plan.omega_grid.values();
    let mut points = Vec::with_capacity(temps.len() * omegas.len());
    for &t in &temps {
        for &o in &omegas {
            points.push(ModelParams::from_temperature(t, o, plan.m).map_err(|e| CliError::Usage(e.to_string()))?);
        }
    }
    let grid = GaussianGrid::new(plan.quadrature_order).map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<CapacityResult> = sweep(&points, &grid, &SolverConfig::default())
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Solver(e.to_string()))?;

    let path = plan.output_path.as_path();
    let io = write_err(Some(path));
    let mut out = open_output(Some(path))?;
    writeln!(out, "{HEADER}").map_err(&io)?;
    for (p, r) in points.iter().zip(&results) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(p.temperature()),
            sig9(p.omega),
            sig9(p.m),
            sig9(r.alpha_c),
            r.reason,
            r.iterations,
            sig9(r.stability_value)
        )
        .map_err(&io)?;
    }
    out.flush().map_err(&io)?;
    drop(out);

    let boundary = zero_capacity_boundary(&temps, &omegas, &results);
    let script_path = script_path(path);
    let script = plot_script(path, &plan, &boundary);
    std::fs::write(&script_path, script).map_err(|e| CliError::io(&script_path, e))?;
    eprintln!("wrote {} and {}", path.display(), script_path.display());
    Ok(EXIT_OK)
}

fn script_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".gp");
    PathBuf::from(name)
}

/// For each temperature, the smallest Ω on the grid with zero capacity.
pub fn zero_capacity_boundary(temps: &[f64], omegas: &[f64], results: &[CapacityResult]) -> Vec<(f64, f64)> {
    temps
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| {
            let row = &results[i * omegas.len()..(i + 1) * omegas.len()];
            row.iter().position(|r| r.alpha_c == 0.0).map(|j| (omegas[j], t))
        })
        .collect()
}

fn plot_script(csv: &Path, plan: &SweepPlan, boundary: &[(f64, f64)]) -> String {
    let csv_name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = csv.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    let mut s = String::new();
    s.push_str("# Critical load map; render with `gnuplot <this file>` from its directory.\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,700\n");
    s.push_str(&format!("set output '{stem}.png'\n"));
    s.push_str(&format!("set title 'alpha_c at m = {}'\n", sig9(plan.m)));
    s.push_str("set xlabel 'Omega'\nset ylabel 'T'\nset cblabel 'alpha_c'\n");
    s.push_str("set view map\n");
    s.push_str(&format!("set dgrid3d {},{}\n", plan.t_grid.2, plan.omega_grid.2));
    s.push_str(&format!("set table '{stem}.surface.dat'\n"));
    s.push_str(&format!("splot '{csv_name}' using 2:1:4 skip 1\n"));
    s.push_str("unset table\nunset dgrid3d\nset datafile separator whitespace\n");
    if boundary.is_empty() {
        s.push_str(&format!("splot '{stem}.surface.dat' with pm3d notitle\n"));
    } else {
        s.push_str("$boundary << EOD\n");
        for (o, t) in boundary {
            s.push_str(&format!("{} {} 0\n", sig9(*o), sig9(*t)));
        }
        s.push_str("EOD\n");
        s.push_str(&format!(
            "splot '{stem}.surface.dat' with pm3d notitle, \\\n      $boundary with linespoints lc rgb 'white' title 'zero-capacity boundary'\n"
        ));
    }
    s
}
