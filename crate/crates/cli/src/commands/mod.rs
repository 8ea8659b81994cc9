pub mod capacity;
pub mod dynamics;
pub mod limits;
pub mod lindblad;
pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

/// A buffered writer on `path`, or on stdout when no path is given.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn write_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e)
}

pub fn check_m(m: Option<f64>) -> Result<f64, CliError> {
    let m = m.ok_or_else(|| CliError::Usage("--m is required".into()))?;
    if !(m > 0.0 && m < 1.0) {
        return Err(CliError::Usage(format!("m must lie in (0, 1), got {m}")));
    }
    Ok(m)
}

pub fn check_omega(omega: f64) -> Result<f64, CliError> {
    if !omega.is_finite() || omega < 0.0 {
        return Err(CliError::Usage(format!("omega must be finite and >= 0, got {omega}")));
    }
    Ok(omega)
}

pub fn check_order(order: usize) -> Result<usize, CliError> {
    if order < 2 {
        return Err(CliError::Usage(format!("quadrature order must be at least 2, got {order}")));
    }
    Ok(order)
}

pub const DEFAULT_ORDER: usize = 201;
