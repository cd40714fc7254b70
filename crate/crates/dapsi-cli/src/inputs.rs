//! Input and output files.
//!
//! Integer sets are either text (one decimal integer or dotted-quad IPv4
//! address per line, `#` starts a comment) or the binary format written by
//! `ingest-ips`: sorted, deduplicated little-endian `u32` values in a file
//! whose name ends in `.bin`. Bit-vector sets are text, one `0`/`1` string per
//! line.

use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;

use dapsi::bits::BitVector;

use crate::error::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses one integer or dotted-quad address.
pub fn parse_int(s: &str) -> Option<u64> {
    if s.contains('.') {
        s.parse::<Ipv4Addr>().ok().map(|ip| u64::from(u32::from(ip)))
    } else {
        s.parse().ok()
    }
}

/// Reads an integer set.
pub fn read_int_set(path: &Path) -> Result<Vec<u64>, CliError> {
    if path.extension().is_some_and(|e| e == "bin") {
        let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if bytes.len() % 4 != 0 {
            return Err(CliError::Config(format!("{}: length is not a multiple of 4", path.display())));
        }
        return Ok(bytes
            .chunks_exact(4)
            .map(|c| u64::from(u32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect());
    }
    content_lines(&read_text(path)?)
        .map(|(n, l)| {
            parse_int(l).ok_or_else(|| CliError::Config(format!("{}:{n}: not an integer: {l}", path.display())))
        })
        .collect()
}

/// Reads a bit-vector set; every vector must have the same length.
pub fn read_vector_set(path: &Path) -> Result<Vec<BitVector>, CliError> {
    let vs = content_lines(&read_text(path)?)
        .map(|(n, l)| l.parse::<BitVector>().map_err(|e| CliError::Config(format!("{}:{n}: {e}", path.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(first) = vs.first() {
        if let Some(bad) = vs.iter().position(|v| v.len() != first.len()) {
            return Err(CliError::Config(format!(
                "{}: vector {} has length {}, expected {}",
                path.display(),
                bad + 1,
                vs[bad].len(),
                first.len()
            )));
        }
    }
    Ok(vs)
}

/// Parses a dotted-quad list into sorted, deduplicated addresses.
pub fn ingest_ips(text: &str) -> Result<Vec<u32>, CliError> {
    let mut out = content_lines(text)
        .map(|(n, l)| {
            l.parse::<Ipv4Addr>()
                .map(u32::from)
                .map_err(|_| CliError::Config(format!("line {n}: not a dotted-quad IPv4 address: {l}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Binary form of an address list.
pub fn encode_ips(ips: &[u32]) -> Vec<u8> {
    ips.iter().flat_map(|ip| ip.to_le_bytes()).collect()
}

/// Writes `contents` to `path`.
pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// CSV of matched pairs with header `a,b`.
pub fn pairs_csv(pairs: &[(u64, u64)]) -> String {
    let mut out = String::from("a,b\n");
    for (a, b) in pairs {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ip_examples() {
        assert_eq!(parse_int("0.0.0.0"), Some(0));
        assert_eq!(parse_int("255.255.255.255"), Some((1 << 32) - 1));
        assert_eq!(parse_int("10.0.0.1"), Some(167_772_161));
        assert_eq!(parse_int("10.0.0"), None);
        assert_eq!(parse_int("42"), Some(42));
    }

    #[test]
    fn ingest_sorts_dedups_and_reports_lines() {
        let ips = ingest_ips("10.0.0.1\n# comment\n0.0.0.0\n10.0.0.1\n\n").unwrap();
        assert_eq!(ips, vec![0, 167_772_161]);
        assert_eq!(encode_ips(&ips), vec![0, 0, 0, 0, 1, 0, 0, 10]);
        let err = ingest_ips("1.2.3.4\n1.2.3.400\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn pairs_csv_has_header() {
        assert_eq!(pairs_csv(&[]), "a,b\n");
        assert_eq!(pairs_csv(&[(10, 12)]), "a,b\n10,12\n");
    }
}
