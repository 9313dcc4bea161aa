use thiserror::Error;

/// Errors surfaced by the library. Input errors are caller mistakes
/// (bad shapes, non-finite entries); numerical failures mean an
/// algorithm could not deliver its accuracy contract.
#[derive(Debug, Error)]
pub enum UgError {
    #[error("input error: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, UgError>;

impl UgError {
    pub fn input(msg: impl Into<String>) -> Self {
        UgError::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        UgError::Numerical(msg.into())
    }
}
