use dpa_core::DpaError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] DpaError),

    #[error("{0}")]
    Output(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    /// 2 for bad input, 3 for quadrature non-convergence, 4 when the Fock cutoff is too small.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e {
                DpaError::InvalidParameter(_) | DpaError::InvalidDimension(_) => 2,
                DpaError::NonConvergence { .. } => 3,
                DpaError::Truncation { .. }
                | DpaError::OutsideRegion { .. }
                | DpaError::WindowTooLarge { .. } => 4,
                _ => 1,
            },
            CliError::Output(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Output(_) => "output",
            CliError::Model(e) => match e {
                DpaError::InvalidDimension(_) => "invalid_dimension",
                DpaError::NotHermitian { .. } => "not_hermitian",
                DpaError::InvalidParameter(_) => "invalid_parameter",
                DpaError::Truncation { .. } => "truncation",
                DpaError::WindowTooLarge { .. } => "window_too_large",
                DpaError::ZeroNormalization => "zero_normalization",
                DpaError::WitnessUndefined => "witness_undefined",
                DpaError::NptOutOfRange { .. } => "npt_out_of_range",
                DpaError::OutsideRegion { .. } => "outside_region",
                DpaError::NonConvergence { .. } => "non_convergence",
            },
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let nc = DpaError::NonConvergence {
            nodes: 384,
            last: 0.1,
            previous: 0.2,
        };
        assert_eq!(CliError::from(nc).exit_code(), 3);
        let tr = DpaError::Truncation {
            cutoff: 5,
            tail_mass: 1e-3,
            limit: 1e-10,
            required_cutoff: 30,
        };
        let e = CliError::from(tr);
        assert_eq!(e.exit_code(), 4);
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "truncation");
        assert_eq!(v["exit_code"], 4);
    }
}
