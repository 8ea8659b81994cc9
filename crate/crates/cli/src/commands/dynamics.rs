use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use qhopfield::meanfield::{integrate_dynamics, FieldProfile, OverlapState};
use qhopfield::ModelParams;

use super::{check_omega, open_output, write_err};
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::format::sig9;
use crate::Temperature;

pub const HEADER: &str = "t,m_z,m_y,m_x";

/// `m` does not enter the equations of motion.
const UNUSED_M: f64 = 0.5;

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub temperature: Temperature,
    /// Drive strength Ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Homogeneous local energy h.
    #[arg(long, conflicts_with = "fields")]
    pub h: Option<f64>,
    /// File of whitespace-separated per-site local energies.
    #[arg(long, value_name = "FILE")]
    pub fields: Option<PathBuf>,
    /// Initial M_z (default 1)
    #[arg(long)]
    pub m_z0: Option<f64>,
    /// Initial M_y (default 0)
    #[arg(long)]
    pub m_y0: Option<f64>,
    /// Initial M_x (default 0)
    #[arg(long)]
    pub m_x0: Option<f64>,
    /// Final time (default 10)
    #[arg(long)]
    pub t_max: Option<f64>,
    /// RK4 step (default 0.01)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write every stride-th step.
    #[arg(long)]
    pub stride: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn read_fields(path: &std::path::Path) -> Result<FieldProfile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let values = text
        .split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|e| CliError::Usage(format!("{}: {w:?}: {e}", path.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    FieldProfile::sites(values).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(args: &DynamicsArgs, config: &Config) -> Result<u8, CliError> {
    let beta = args.temperature.require(config)?;
    let omega = check_omega(args.omega.or(config.omega).unwrap_or(0.0))?;
    let params = ModelParams::new(beta, omega, UNUSED_M).map_err(|e| CliError::Usage(e.to_string()))?;
    let fields = match (args.h, &args.fields) {
        (Some(h), _) => FieldProfile::homogeneous(h),
        (None, Some(p)) => read_fields(p)?,
        (None, None) => match (config.h, &config.fields) {
            (Some(h), _) => FieldProfile::homogeneous(h),
            (None, Some(p)) => read_fields(p)?,
            (None, None) => FieldProfile::homogeneous(1.0),
        },
    };
    let state0 = OverlapState::new(
        args.m_z0.or(config.m_z0).unwrap_or(1.0),
        args.m_y0.or(config.m_y0).unwrap_or(0.0),
        args.m_x0.or(config.m_x0).unwrap_or(0.0),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let t_max = args.t_max.or(config.t_max).unwrap_or(10.0);
    let dt = args.dt.or(config.dt).unwrap_or(0.01);
    let stride = args.stride.or(config.stride).unwrap_or(1).max(1);
    let traj = integrate_dynamics(&state0, &params, &fields, t_max, dt).map_err(|e| match e {
        qhopfield::meanfield::DynamicsError::InvalidStep(m) => CliError::Usage(m),
        e => CliError::Solver(e.to_string()),
    })?;

    let path = args.output.as_deref().or(config.output.as_deref());
    let io = write_err(path);
    let mut out = open_output(path)?;
    writeln!(out, "{HEADER}").map_err(&io)?;
    let last = traj.points.len() - 1;
    for (k, (t, s)) in traj.points.iter().enumerate() {
        if k % stride == 0 || k == last {
            writeln!(out, "{},{},{},{}", sig9(*t), sig9(s.m_z), sig9(s.m_y), sig9(s.m_x)).map_err(&io)?;
        }
    }
    out.flush().map_err(&io)?;
    Ok(EXIT_OK)
}
