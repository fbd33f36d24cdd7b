//! Time evolution: closed Schrödinger dynamics, the cavity-damped master
//! equation, and its Monte Carlo wave-function unravelling.

mod generator;
mod integrator;
mod lindblad;
mod mcwf;
mod schrodinger;

use std::fmt;
use std::str::FromStr;

pub use lindblad::{evolve_lindblad, evolve_lindblad_observed, LindbladReport};
pub use mcwf::{
    derive_seed, run_mcwf_ensemble, run_mcwf_trajectory, EnsembleOptions, EnsembleResult, JumpEvent,
    TrajectoryRecord,
};
pub use schrodinger::{evolve_schrodinger, evolve_schrodinger_observed};

use crate::error::{Error, Result};

/// Uniform integration grid with a sampling stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub output_stride: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_start: -6.0,
            t_end: 16.0,
            n_steps: 4000,
            output_stride: 40,
        }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize, output_stride: usize) -> Result<Self> {
        let grid = Self {
            t_start,
            t_end,
            n_steps,
            output_stride,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_start >= self.t_end {
            return Err(Error::InvalidConfig(format!(
                "time window [{}, {}] must satisfy t_start < t_end",
                self.t_start, self.t_end
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::InvalidConfig(format!("n_steps must be >= 2, got {}", self.n_steps)));
        }
        if self.output_stride < 1 {
            return Err(Error::InvalidConfig("output_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    /// Time of grid node `k` (node `n_steps` is exactly `t_end`).
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    /// Whether node `k` is sampled. The first and last nodes always are.
    pub fn is_output(&self, k: usize) -> bool {
        k % self.output_stride == 0 || k == self.n_steps
    }

    pub fn output_times(&self) -> Vec<f64> {
        (0..=self.n_steps).filter(|&k| self.is_output(k)).map(|k| self.time(k)).collect()
    }

    /// Same window with twice the steps and the same sampling instants.
    pub fn refined(&self) -> Self {
        Self {
            n_steps: self.n_steps * 2,
            output_stride: self.output_stride * 2,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta, one step per grid interval.
    Rk4,
    /// Dormand–Prince 5(4) with error control inside each grid interval.
    Rk45,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "rk45" | "dopri5" => Ok(Method::Rk45),
            other => Err(Error::InvalidConfig(format!("unknown integration method `{other}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Rk45 => "rk45",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Schrödinger only: rescale to unit norm after every grid step.
    pub renormalize_each_step: bool,
    /// Evolve on the basis states reachable from the initial support.
    pub restrict_to_reachable: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            renormalize_each_step: false,
            restrict_to_reachable: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1e-2], got {tol}")));
            }
        }
        Ok(())
    }
}

/// A sampled state at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
}
