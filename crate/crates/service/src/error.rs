use thiserror::Error;

use crate::session::Player;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("{0}")]
    Parse(String),
    #[error("chain length must be at least 1, got {0}")]
    BadLength(usize),
    #[error("{0}")]
    IllegalMove(String),
    #[error("it is not {0}'s turn")]
    NotYourTurn(Player),
    #[error("game {0} is over")]
    GameOver(String),
    #[error("no session {0}")]
    UnknownSession(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("event log: {0}")]
    Log(String),
}

impl ServiceError {
    /// Stable error code for the wire.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Parse(_) => "ParseError",
            ServiceError::BadLength(_) => "BadLength",
            ServiceError::IllegalMove(_) => "IllegalMove",
            ServiceError::NotYourTurn(_) => "NotYourTurn",
            ServiceError::GameOver(_) => "GameOver",
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Unsupported(_) => "Unsupported",
            ServiceError::Log(_) => "LogError",
        }
    }
}
