use std::fmt;
use std::path::Path;

use locc_core::Error;

/// Process exit codes. 0 is success and 2 is reserved for usage errors.
pub mod code {
    /// `verify-protocol` ran but the channels differ.
    pub const MISMATCH: u8 = 1;
    pub const PARSE: u8 = 3;
    pub const DIMENSION: u8 = 4;
    pub const COMPLETENESS: u8 = 5;
    pub const INVALID: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(code::IO, format!("{}: {e}", path.display()))
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Json(_) | Error::NonFinite { .. } => (code::PARSE, "parse error"),
            Error::DimensionMismatch(_)
            | Error::NotSquare { .. }
            | Error::InvalidChannel(_)
            | Error::TooFewParties { .. }
            | Error::PartyOutOfRange { .. } => (code::DIMENSION, "dimension error"),
            Error::Incomplete { .. } | Error::IdentityNotInSpan { .. } => (code::COMPLETENESS, "completeness error"),
            Error::NotHermitian { .. }
            | Error::NotIsometric { .. }
            | Error::InvalidParams(_)
            | Error::InvalidProtocol(_)
            | Error::ProtocolIncomplete { .. }
            | Error::InvalidSweep(_) => (code::INVALID, "invalid input"),
            Error::Csv(_) => (code::IO, "write error"),
        };
        Self::new(code, format!("{kind}: {e}"))
    }
}
