//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes (`d`, `fpr`,
//! `in-a`, ...). Blank lines and lines starting with `#` are ignored. Flags
//! given on the command line take precedence over the file.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::CliError;

/// Parsed configuration file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Parses the file contents.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
            values.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        Ok(Self { values })
    }

    /// `flag` if given, else the parsed file value for `key`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    /// Keys present in the file.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file_values() {
        let c = ConfigFile::parse("# params\nd = 8\nfpr=0.2\n\nprotocol = hampsi\n").unwrap();
        assert_eq!(c.pick::<u64>(None, "d").unwrap(), Some(8));
        assert_eq!(c.pick(Some(3u64), "d").unwrap(), Some(3));
        assert_eq!(c.pick::<f64>(None, "fpr").unwrap(), Some(0.2));
        assert_eq!(c.pick::<u64>(None, "seed").unwrap(), None);
        assert!(c.pick::<u64>(None, "protocol").is_err());
        assert_eq!(c.keys().collect::<Vec<_>>(), ["d", "fpr", "protocol"]);
    }

    #[test]
    fn malformed_line_is_a_config_error() {
        let err = ConfigFile::parse("d = 1\nnonsense\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 2"));
    }
}
