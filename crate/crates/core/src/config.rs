//! JSON run configuration.
//!
//! The metric keys sit at the top level next to optional run settings;
//! every run setting has a default. Unknown keys are rejected so that typos
//! surface as parse errors.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::Execution;
use crate::darboux::{uniform_t_grid, ScanOptions, DEFAULT_NODES};
use crate::geodesics::{IntegrationOptions, PeriodOptions, DEFAULT_MATCH_TOL};
use crate::metric::{EvenPerturbation, HFunction, MetricOfRevolution, DEFAULT_POLE_MARGIN};
use crate::ode::Tolerances;
use crate::returnmap::ReturnMapOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    OddPoly,
    TrigExample,
    HalfSine,
    #[default]
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    /// Coefficients of `u, u³, u⁵, …` for `odd_poly`.
    pub coeffs: Vec<f64>,
    /// Index of the trigonometric example.
    pub k: Option<u32>,
    /// Coefficients of `u², u⁴, …` of the even perturbation.
    pub even_coeffs: Vec<f64>,
    pub label: Option<String>,

    pub tolerances: Tolerances,
    pub pole_margin: f64,
    pub meridian_threshold: f64,
    pub event_tol: f64,
    pub quadrature_nodes: usize,
    pub t_grid: usize,
    pub constancy_tol: f64,
    pub returnmap_grid: [usize; 2],
    pub period_horizon: f64,
    pub return_horizon: f64,
    pub match_tol: f64,
    pub n_random: usize,
    pub seed: u64,
    pub curvature_samples: usize,
    pub validation_samples: usize,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        let integ = IntegrationOptions::default();
        RunConfig {
            family: Family::Zero,
            coeffs: Vec::new(),
            k: None,
            even_coeffs: Vec::new(),
            label: None,
            tolerances: integ.tolerances,
            pole_margin: DEFAULT_POLE_MARGIN,
            meridian_threshold: integ.meridian_threshold,
            event_tol: integ.event_tol,
            quadrature_nodes: DEFAULT_NODES,
            t_grid: 50,
            constancy_tol: ScanOptions::default().constancy_tol,
            returnmap_grid: [8, 8],
            period_horizon: 8.0 * PI,
            return_horizon: 16.0 * PI,
            match_tol: DEFAULT_MATCH_TOL,
            n_random: 20,
            seed: 7,
            curvature_samples: 101,
            validation_samples: 2001,
            execution: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        match self.family {
            Family::OddPoly if self.coeffs.is_empty() => {
                return bad("family odd_poly needs a non-empty `coeffs`".into())
            }
            Family::TrigExample if self.k.is_none() => {
                return bad("family trig_example needs `k`".into())
            }
            _ => {}
        }
        if self
            .coeffs
            .iter()
            .chain(&self.even_coeffs)
            .any(|c| !c.is_finite())
        {
            return bad("coefficients must be finite".into());
        }
        if !self.tolerances.is_valid() {
            return bad(format!("tolerances {:?} must be positive", self.tolerances));
        }
        let positive = [
            ("pole_margin", self.pole_margin),
            ("meridian_threshold", self.meridian_threshold),
            ("event_tol", self.event_tol),
            ("constancy_tol", self.constancy_tol),
            ("period_horizon", self.period_horizon),
            ("return_horizon", self.return_horizon),
            ("match_tol", self.match_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("`{name}` must be positive, got {v}"));
            }
        }
        if self.quadrature_nodes < 8 {
            return bad("`quadrature_nodes` must be at least 8".into());
        }
        if self.t_grid < 2 || self.returnmap_grid.iter().any(|&n| n < 2) {
            return bad("grids need at least two points per axis".into());
        }
        if self.curvature_samples < 2 || self.validation_samples < 3 {
            return bad("sample counts too small".into());
        }
        Ok(())
    }

    pub fn metric(&self) -> MetricOfRevolution {
        let h = match self.family {
            Family::OddPoly => HFunction::OddPolynomial(self.coeffs.clone()),
            Family::TrigExample => HFunction::TrigExample {
                k: self.k.unwrap_or(1),
            },
            Family::HalfSine => HFunction::HalfSineExample,
            Family::Zero => HFunction::Zero,
        };
        let m = MetricOfRevolution::new(h, EvenPerturbation::new(self.even_coeffs.clone()));
        match &self.label {
            Some(label) => m.with_label(label.clone()),
            None => m,
        }
    }

    pub fn integration(&self) -> IntegrationOptions {
        IntegrationOptions {
            tolerances: self.tolerances,
            meridian_threshold: self.meridian_threshold,
            event_tol: self.event_tol,
            pole_margin: self.pole_margin,
        }
    }

    pub fn period(&self) -> PeriodOptions {
        PeriodOptions {
            integration: self.integration(),
            horizon: self.period_horizon,
            match_tol: self.match_tol,
        }
    }

    pub fn scan(&self) -> ScanOptions {
        ScanOptions {
            nodes: self.quadrature_nodes,
            constancy_tol: self.constancy_tol,
            execution: self.execution,
            ..ScanOptions::default()
        }
    }

    pub fn return_map(&self) -> ReturnMapOptions {
        ReturnMapOptions {
            integration: self.integration(),
            horizon: self.return_horizon,
            match_tol: self.match_tol,
            execution: self.execution,
            ..ReturnMapOptions::default()
        }
    }

    pub fn t_grid_points(&self) -> Vec<f64> {
        uniform_t_grid(self.t_grid)
    }
}
