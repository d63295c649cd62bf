use std::fmt;

/// A failure attributed to one input field. Displays as `<field>: <reason>`
/// on a single line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub field: String,
    pub reason: String,
}

impl CliError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        let one_line = |s: String| s.split_whitespace().collect::<Vec<_>>().join(" ");
        CliError {
            field: one_line(field.into()),
            reason: one_line(reason.into()),
        }
    }

    pub(crate) fn from_serde(e: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { path };
        CliError::new(field, e.into_inner().to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl std::error::Error for CliError {}
