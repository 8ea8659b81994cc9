use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use qhopfield::lindblad::{
    classical_glauber_evolve, evolve, hebb_couplings, overlap_expectation, Axis, DensityMatrix, LindbladError,
    PatternSet, SpinSystem, MAX_SPINS,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_omega, open_output, write_err};
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::format::sig9;
use crate::Temperature;

#[derive(Debug, Args)]
pub struct LindbladArgs {
    /// Number of spins for random patterns.
    #[arg(long)]
    pub n: Option<usize>,
    /// Draw this many random ±1 patterns.
    #[arg(long, conflicts_with = "patterns")]
    pub random_patterns: Option<usize>,
    /// Pattern file: one pattern per line, whitespace-separated ±1 entries.
    #[arg(long, value_name = "FILE")]
    pub patterns: Option<PathBuf>,
    /// Seed for random patterns.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub temperature: Temperature,
    /// Drive strength Ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Final time (default 10)
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Time step (default 0.01)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write every stride-th step.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Index of the pattern the evolution starts in.
    #[arg(long)]
    pub initial: Option<usize>,
    /// Also run the classical Glauber master equation and report the largest
    /// deviation of the populations from it.
    #[arg(long)]
    pub glauber_check: bool,
    /// CSV output path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn lindblad_err(e: LindbladError) -> CliError {
    match e {
        LindbladError::TooLarge(n) => CliError::Limit(format!("at most {MAX_SPINS} spins are supported, got {n}")),
        LindbladError::InvalidPatterns(_) | LindbladError::InvalidStep(_) | LindbladError::InvalidSystem(_) => {
            CliError::Usage(e.to_string())
        }
        e => CliError::Solver(e.to_string()),
    }
}

fn read_patterns(path: &Path) -> Result<PatternSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| w.parse::<i8>().map_err(|e| CliError::Usage(format!("{}: {w:?}: {e}", path.display()))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    PatternSet::new(rows).map_err(lindblad_err)
}

fn patterns(args: &LindbladArgs, config: &Config) -> Result<PatternSet, CliError> {
    let file = args.patterns.as_deref().or(if args.random_patterns.is_some() { None } else { config.patterns.as_deref() });
    if let Some(path) = file {
        return read_patterns(path);
    }
    let p = args.random_patterns.or(config.random_patterns).ok_or_else(|| {
        CliError::Usage("one of --patterns or --random-patterns is required".into())
    })?;
    let n = args.n.or(config.n).ok_or_else(|| CliError::Usage("--n is required with --random-patterns".into()))?;
    if n > MAX_SPINS {
        return Err(CliError::Limit(format!("at most {MAX_SPINS} spins are supported, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.or(config.seed).unwrap_or(0));
    PatternSet::random(n, p, &mut rng).map_err(lindblad_err)
}

pub fn run(args: &LindbladArgs, config: &Config) -> Result<u8, CliError> {
    let patterns = patterns(args, config)?;
    if let Some(n) = args.n.or(config.n) {
        if n != patterns.n() {
            return Err(CliError::Usage(format!("--n {n} does not match patterns of length {}", patterns.n())));
        }
    }
    let beta = args.temperature.require(config)?;
    let omega = check_omega(args.omega.or(config.omega).unwrap_or(0.0))?;
    let t_max = args.t_max.or(config.t_max).unwrap_or(10.0);
    let dt = args.dt.or(config.dt).unwrap_or(0.01);
    let stride = args.stride.or(config.stride).unwrap_or(10).max(1);
    let initial = args.initial.or(config.initial).unwrap_or(0);
    if initial >= patterns.len() {
        return Err(CliError::Usage(format!("--initial {initial} out of range for {} patterns", patterns.len())));
    }

    let system = SpinSystem::new(hebb_couplings(&patterns), beta, omega).map_err(lindblad_err)?;
    let rho0 = DensityMatrix::pattern_state(patterns.pattern(initial)).map_err(lindblad_err)?;
    let states = evolve(&rho0, &system, t_max, dt, stride).map_err(lindblad_err)?;
    let glauber = if args.glauber_check {
        Some(classical_glauber_evolve(&rho0.diagonal(), &system, t_max, dt, stride).map_err(lindblad_err)?)
    } else {
        None
    };

    let path = args.output.as_deref().or(config.output.as_deref());
    let io = write_err(path);
    let mut out = open_output(path)?;
    let mut header = vec!["t".to_string()];
    for mu in 0..patterns.len() {
        header.extend([format!("m_z_{mu}"), format!("m_y_{mu}"), format!("m_x_{mu}")]);
    }
    if glauber.is_some() {
        header.push("glauber_max_dev".into());
    }
    writeln!(out, "{}", header.join(",")).map_err(&io)?;
    for (k, (t, rho)) in states.iter().enumerate() {
        let mut row = vec![sig9(*t)];
        for xi in patterns.iter() {
            for axis in [Axis::Z, Axis::Y, Axis::X] {
                row.push(sig9(overlap_expectation(rho, xi, axis)));
            }
        }
        if let Some(g) = &glauber {
            let dev = rho
                .diagonal()
                .iter()
                .zip(&g[k].1)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            row.push(sig9(dev));
        }
        writeln!(out, "{}", row.join(",")).map_err(&io)?;
    }
    out.flush().map_err(&io)?;
    Ok(EXIT_OK)
}
