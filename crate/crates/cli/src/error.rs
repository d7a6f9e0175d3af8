use serde_json::json;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Malformed input document.
    Input {
        message: String,
        /// Failing field, when serde can name it.
        path: Option<String>,
        line: usize,
        column: usize,
    },
    Library(subcarve::Error),
    Io(std::io::Error),
}

impl From<subcarve::Error> for CliError {
    fn from(e: subcarve::Error) -> Self {
        CliError::Library(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Library(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Input { .. } | CliError::Library(_) | CliError::Io(_) => EXIT_VALIDATION,
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        let body = match self {
            CliError::Usage(m) => json!({ "kind": "usage", "message": m }),
            CliError::Input {
                message,
                path,
                line,
                column,
            } => {
                let mut body = json!({
                    "kind": "malformed_input",
                    "message": message,
                    "line": line,
                    "column": column,
                });
                if let Some(p) = path {
                    body["field"] = json!(p);
                }
                body
            }
            CliError::Library(e) => json!({
                "kind": if e.is_numeric() { "numerical_failure" } else { "validation" },
                "message": e.to_string(),
            }),
            CliError::Io(e) => json!({ "kind": "io", "message": e.to_string() }),
        };
        json!({ "error": body }).to_string()
    }
}

/// Parses `text` into `T`, reporting the failing field path and position.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = Some(e.path().to_string()).filter(|p| p != "?" && p != ".");
        let inner = e.into_inner();
        CliError::Input {
            message: inner.to_string(),
            path,
            line: inner.line(),
            column: inner.column(),
        }
    })?;
    de.end().map_err(|e| CliError::Input {
        message: e.to_string(),
        path: None,
        line: e.line(),
        column: e.column(),
    })?;
    Ok(value)
}
