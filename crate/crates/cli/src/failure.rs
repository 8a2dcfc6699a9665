//! Error classification and process exit codes.

use std::fmt;

/// A failed command. `Config` and `MissingInput` exit with 2, numerical
/// failures with 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    MissingInput(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::MissingInput(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::MissingInput(_) => "missing-input",
            Self::Numerical(_) => "numerical",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::MissingInput(m) => write!(f, "missing input: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<cgl_trigger::Error> for Failure {
    fn from(e: cgl_trigger::Error) -> Self {
        use cgl_trigger::Error as E;
        match e {
            E::InvalidParams(_)
            | E::BenjaminFeirRegime(_)
            | E::InvalidGrid(_)
            | E::UnsupportedTriggerLevel(_)
            | E::SpeedTooLarge { .. }
            | E::NoCrossing { .. }
            | E::InvalidWavenumber(_)
            | E::ExpansionUnavailable => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::Config(format!("csv: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(Failure::from(cgl_trigger::Error::BenjaminFeirRegime(-1.0)).exit_code(), 2);
        assert_eq!(Failure::from(cgl_trigger::Error::Singular).exit_code(), 3);
        assert_eq!(Failure::MissingInput("x".into()).exit_code(), 2);
    }
}
