//! Versioned JSON solution files. Reals are written with shortest
//! round-trip formatting, so values reload bit-for-bit.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::DiagnosticsReport;
use crate::nonlinearity::{Builtin, NonlinearitySpec, ParseError};
use crate::solver::{scaled_residual, SolveError, WaveProfile};
use crate::spectral::{Grid, Profile, SpectralError};

pub const FORMAT_VERSION: u32 = 1;
/// Allowed gap between the stored and recomputed residual norms.
pub const RESIDUAL_RECHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed solution file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("n = {n} but {found} values are stored")]
    Length { n: usize, found: usize },
    #[error("stored nonlinearity does not parse: {0}")]
    Nonlinearity(#[from] ParseError),
    #[error(transparent)]
    Grid(#[from] SpectralError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("residual mismatch: stored {stored:e}, recomputed {recomputed:e}")]
    ResidualMismatch { stored: f64, recomputed: f64 },
}

impl PersistError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, PersistError::Io { source, .. } if source.kind() == io::ErrorKind::NotFound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format_version: u32,
    pub nonlinearity_source: String,
    /// Softening temperature of `max`/`min`, when the solve used one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    pub c: f64,
    #[serde(rename = "T")]
    pub half_length: f64,
    pub n: usize,
    pub values: Vec<f64>,
    /// Preconditioned residual sup-norm (see the solver module).
    pub residual_norm: f64,
    pub raw_residual_norm: f64,
    pub newton_iters: usize,
    pub amplitude: f64,
    pub diagnostics: DiagnosticsReport,
}

impl SolutionFile {
    pub fn new(w: &WaveProfile, spec: &NonlinearitySpec, diagnostics: DiagnosticsReport) -> Self {
        SolutionFile {
            format_version: FORMAT_VERSION,
            nonlinearity_source: spec.source_text().to_string(),
            smoothing: spec.smoothing_temperature(),
            c: w.c,
            half_length: w.grid().half_length(),
            n: w.grid().len(),
            values: w.profile.values().to_vec(),
            residual_norm: w.residual_norm,
            raw_residual_norm: w.raw_residual_norm,
            newton_iters: w.newton_iters,
            amplitude: diagnostics.amplitude,
            diagnostics,
        }
    }

    /// The stored nonlinearity; built-in source texts come back as built-ins.
    pub fn nonlinearity(&self) -> Result<NonlinearitySpec, PersistError> {
        let spec = match [Builtin::Piecewise, Builtin::Exponential].into_iter().find(|b| b.source() == self.nonlinearity_source) {
            Some(b) => NonlinearitySpec::builtin(b),
            None => NonlinearitySpec::parse(&self.nonlinearity_source)?,
        };
        Ok(match self.smoothing {
            Some(t) => spec.with_smoothing(t)?,
            None => spec,
        })
    }

    pub fn profile(&self) -> Result<Profile, PersistError> {
        if self.values.len() != self.n {
            return Err(PersistError::Length { n: self.n, found: self.values.len() });
        }
        Ok(Profile::new(Grid::new(self.half_length, self.n)?, self.values.clone())?)
    }

    /// Checks the length and recomputes the residual norm.
    pub fn verify(&self) -> Result<(), PersistError> {
        if self.format_version != FORMAT_VERSION {
            return Err(PersistError::Version { found: self.format_version });
        }
        let profile = self.profile()?;
        let spec = self.nonlinearity()?;
        let recomputed = scaled_residual(&spec, self.c, &profile)?.sup_norm();
        if (recomputed - self.residual_norm).abs() > RESIDUAL_RECHECK_TOL {
            return Err(PersistError::ResidualMismatch { stored: self.residual_norm, recomputed });
        }
        Ok(())
    }
}

pub fn save_solution(path: &Path, file: &SolutionFile) -> Result<(), PersistError> {
    let text = serde_json::to_string_pretty(file)?;
    fs::write(path, text + "\n").map_err(|source| PersistError::Io { path: path.to_path_buf(), source })
}

/// Reads a solution file and re-verifies its residual.
pub fn load_solution(path: &Path) -> Result<SolutionFile, PersistError> {
    let text = fs::read_to_string(path).map_err(|source| PersistError::Io { path: path.to_path_buf(), source })?;
    let file: SolutionFile = serde_json::from_str(&text)?;
    file.verify()?;
    Ok(file)
}
