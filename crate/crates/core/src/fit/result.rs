use serde::Serialize;

use crate::optim::LmReport;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    /// Linearised estimate from the Jacobian at the optimum; approximate.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub residual_norm: f64,
    pub n_iter: usize,
    pub converged: bool,
}

impl FitResult {
    pub(crate) fn from_report(report: &LmReport, params: Vec<FitParam>) -> Self {
        FitResult { params, residual_norm: report.residual_norm, n_iter: report.n_iter, converged: report.converged }
    }

    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.stderr)
    }
}

pub(crate) fn param(name: &str, value: f64, stderr: f64) -> FitParam {
    FitParam { name: name.to_string(), value, stderr }
}
