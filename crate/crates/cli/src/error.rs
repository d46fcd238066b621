use spencer_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit code 1.
    #[error("invalid input `{param}`: {reason}")]
    Input { param: String, reason: String },
    /// Exit code 2.
    #[error("invariant failure: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn input(param: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Input {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } => 1,
            CliError::Invariant(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Input { param, reason } => CliError::input(*param, reason.clone()),
            Error::DimensionMismatch { param, .. } => CliError::input(*param, e.to_string()),
            Error::UnsupportedAlgebra(_) => CliError::input("algebra", e.to_string()),
            Error::NotNilpotent { .. } | Error::Construction { .. } | Error::DegenerateConstraint { .. } | Error::BlowUp { .. } => {
                CliError::Invariant(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let input: CliError = Error::Input { param: "k", reason: "bad".into() }.into();
        assert_eq!(input.exit_code(), 1);
        assert!(input.to_string().contains("`k`"));
        let unsupported: CliError = Error::UnsupportedAlgebra("x".into()).into();
        assert_eq!(unsupported.exit_code(), 1);
        for e in [Error::NotNilpotent { degree: 1 }, Error::BlowUp { step: 3 }, Error::DegenerateConstraint { site: 0 }] {
            assert_eq!(CliError::from(e).exit_code(), 2);
        }
    }
}
