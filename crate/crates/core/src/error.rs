use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was applied to a value it does not accept.
    #[error("usage error: {0}")]
    Usage(String),

    /// Required context (such as a baseline risk) was not supplied.
    #[error("configuration error: {0}")]
    Config(String),

    /// A step of a multi-step conversion failed.
    #[error("conversion {link} failed: {source}")]
    Chain {
        link: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn in_link(self, link: &'static str) -> Self {
        Error::Chain {
            link,
            source: Box::new(self),
        }
    }
}
