use clap::Args;
use qhopfield::limits::{
    classical_zero_t, high_t_capacity, omega_critical, small_omega_coefficient, LimitsError,
};
use qhopfield::GaussianGrid;

use super::{check_omega, check_order, DEFAULT_ORDER};
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::format::sig9;
use crate::Temperature;

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Retrieval overlap m in (0, 1].
    #[arg(long)]
    pub m: Option<f64>,
    #[command(flatten)]
    pub temperature: Temperature,
    /// Drive strength Ω for the high-temperature form.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Gauss–Hermite order for the small-Ω coefficient.
    #[arg(long)]
    pub order: Option<usize>,
}

fn usage(e: LimitsError) -> CliError {
    match e {
        LimitsError::Domain(m) => CliError::Usage(m),
        LimitsError::Capacity(e) => CliError::Solver(e.to_string()),
    }
}

pub fn run(args: &LimitsArgs, config: &Config) -> Result<u8, CliError> {
    let m = args.m.or(config.m).ok_or_else(|| CliError::Usage("--m is required".into()))?;
    let omega_c = omega_critical(m).map_err(usage)?;
    let omega = check_omega(args.omega.or(config.omega).unwrap_or(0.0))?;
    let beta = args.temperature.resolve(config)?;
    let order = check_order(args.order.or(config.order).unwrap_or(DEFAULT_ORDER))?;

    println!("m                  {}", sig9(m));
    match classical_zero_t(m) {
        Ok(a) => println!("classical_zero_t   {}", sig9(a)),
        // The closed form needs m < 1; its m → 1 limit is 2.
        Err(_) => println!("classical_zero_t   {} (limit m -> 1)", sig9(2.0)),
    }
    println!("omega_critical     {}", sig9(omega_c));
    if let Some(beta) = beta {
        println!("beta               {}", sig9(beta));
        println!("omega              {}", sig9(omega));
        println!("high_t_capacity    {}", sig9(high_t_capacity(beta, omega)));
        if m < 1.0 && beta > 0.0 {
            let grid = GaussianGrid::new(order).map_err(|e| CliError::Usage(e.to_string()))?;
            let c = small_omega_coefficient(m, beta, &grid).map_err(usage)?;
            println!("small_omega_coeff  {}", sig9(c));
        }
    }
    Ok(EXIT_OK)
}
