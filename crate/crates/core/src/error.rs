use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid span [{start}, {end}) for text of length {len}")]
    InvalidSpan { start: usize, end: usize, len: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("tweet {tweet_id}: {message}")]
    Tweet { tweet_id: String, message: String },

    #[error("tweet id mismatch: gold is `{gold}`, prediction is `{predicted}`")]
    TweetMismatch { gold: String, predicted: String },

    #[error("prediction for tweet `{0}` has no gold counterpart")]
    UnknownTweet(String),

    #[error("nothing to aggregate: no label has gold instances")]
    EmptyAggregate,

    #[error("configuration: {0}")]
    Config(String),

    #[error("recognizer `{recognizer}`: {message}")]
    Adapter { recognizer: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn io_path(path: &std::path::Path, source: io::Error) -> Self {
        Error::io(PathBuf::from(path).display().to_string(), source)
    }

    pub(crate) fn tweet(tweet_id: &str, message: impl Into<String>) -> Self {
        Error::Tweet {
            tweet_id: tweet_id.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn adapter(recognizer: &str, message: impl Into<String>) -> Self {
        Error::Adapter {
            recognizer: recognizer.to_string(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line tool: 1 usage, 2 data, 3 adapter.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Adapter { .. } => 3,
            _ => 2,
        }
    }
}
