use clap::Args;
use qhopfield::{compute_capacity, GaussianGrid, ModelParams, Reason};

use super::{check_m, check_omega, check_order, DEFAULT_ORDER};
use crate::config::Config;
use crate::error::{CliError, EXIT_LIMIT, EXIT_OK};
use crate::format::sig9;
use crate::Temperature;

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Retrieval overlap m in (0, 1).
    #[arg(long)]
    pub m: Option<f64>,
    #[command(flatten)]
    pub temperature: Temperature,
    /// Drive strength Ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Gauss–Hermite order.
    #[arg(long)]
    pub order: Option<usize>,
}

pub fn run(args: &CapacityArgs, config: &Config) -> Result<u8, CliError> {
    let m = check_m(args.m.or(config.m))?;
    let beta = args.temperature.require(config)?;
    let omega = check_omega(args.omega.or(config.omega).unwrap_or(0.0))?;
    let order = check_order(args.order.or(config.order).unwrap_or(DEFAULT_ORDER))?;
    let params = ModelParams::new(beta, omega, m).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = GaussianGrid::new(order).map_err(|e| CliError::Usage(e.to_string()))?;
    let r = compute_capacity(&params, &grid).map_err(|e| CliError::Solver(e.to_string()))?;
    println!("m                 {}", sig9(m));
    println!("T                 {}", sig9(params.temperature()));
    println!("beta              {}", sig9(beta));
    println!("omega             {}", sig9(omega));
    println!("alpha_c           {}", sig9(r.alpha_c));
    println!("reason            {}", r.reason);
    println!("iterations        {}", r.iterations);
    println!("stability_value   {}", sig9(r.stability_value));
    println!("quadrature_order  {order}");
    Ok(if r.reason == Reason::Ok && r.alpha_c > 0.0 { EXIT_OK } else { EXIT_LIMIT })
}
