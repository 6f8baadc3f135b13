use serde::Serialize;

/// A failed run, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed arguments or input files (exit 1).
    #[error("{0}")]
    Usage(String),
    /// The request is well formed but outside the model's domain (exit 2).
    #[error("{message}")]
    Domain { kind: &'static str, message: String },
    /// A numerical step broke down (exit 3).
    #[error("{message}")]
    Numerical { kind: &'static str, message: String },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn domain(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Domain {
            kind,
            message: message.into(),
        }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Numerical {
            kind,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain { kind, .. } | CliError::Numerical { kind, .. } => kind,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: u8,
            message: String,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error record serializes")
    }
}

impl From<trires::Error> for CliError {
    fn from(err: trires::Error) -> Self {
        use trires::Error as E;
        let message = err.to_string();
        match err {
            E::ResolventSingular { .. } => CliError::numerical("resolvent_singular", message),
            E::InvalidInput(_) => CliError::domain("invalid_input", message),
            E::InvalidTolerance(_) => CliError::domain("invalid_tolerance", message),
            E::NoEpPossible => CliError::domain("no_ep_possible", message),
            E::NotAdmissible { .. } => CliError::domain("not_admissible", message),
            E::WrongRegime(_) => CliError::domain("wrong_regime", message),
            E::WrongBranch(_) => CliError::domain("wrong_branch", message),
            E::MustStabilize { .. } => CliError::domain("must_stabilize", message),
            E::InvalidGrid(_) => CliError::domain("invalid_grid", message),
            E::NotAnEp(_) => CliError::domain("not_an_ep", message),
            E::InsufficientData(_) => CliError::domain("insufficient_data", message),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::usage(format!("cannot write CSV: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
