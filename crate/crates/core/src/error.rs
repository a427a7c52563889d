use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trajectory record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error("image: {0}")]
    Image(String),
}
