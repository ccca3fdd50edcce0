//! A tiny textual language for naming channels on command lines:
//! `bsc:<δ>`, `ec:<q>:<δ>`, `bsc^<n>:<δ>` (tensor power), and
//! `file:<path>` for a channel JSON document
//! (`{"input_size": …, "output_size": …, "matrix": […]}`).
//!
//! Parsing ([`ChannelSpec::parse`], also available through [`FromStr`]) does
//! no I/O and rejects anything ambiguous — unknown heads, missing or extra
//! fields, and bare paths without the `file:` head. [`ChannelSpec::resolve`]
//! builds the [`Channel`], reading the file for the `file:` form.

use std::fmt;
use std::str::FromStr;

use crate::channels::{make_bsc, make_ec, tensor_power, Channel};
use crate::{Error, Result};

/// A parsed, not-yet-materialized channel description.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// Binary symmetric channel with crossover probability `δ`.
    Bsc { delta: f64 },
    /// `q`-ary erasure channel with erasure probability `δ`.
    Ec { q: usize, delta: f64 },
    /// `n`-fold tensor power of a binary symmetric channel.
    BscPow { n: u32, delta: f64 },
    /// Channel JSON document on disk.
    File { path: String },
}

fn parse_real(field: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("{field} must be a real number, got {text:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{field} must be finite, got {text:?}")));
    }
    Ok(v)
}

fn parse_uint<T: FromStr>(field: &str, text: &str) -> Result<T> {
    // Reject signs and whitespace that integer FromStr would tolerate.
    if !text.chars().all(|c| c.is_ascii_digit()) || text.is_empty() {
        return Err(Error::Parse(format!(
            "{field} must be an unsigned integer, got {text:?}"
        )));
    }
    text.parse()
        .map_err(|_| Error::Parse(format!("{field} out of range: {text:?}")))
}

impl ChannelSpec {
    /// Parses a spec string. Pure; no filesystem access.
    pub fn parse(text: &str) -> Result<Self> {
        let Some((head, rest)) = text.split_once(':') else {
            return Err(Error::Parse(format!(
                "channel spec {text:?} needs a head: use bsc:<δ>, ec:<q>:<δ>, bsc^<n>:<δ>, or file:<path>"
            )));
        };
        match head {
            "bsc" => {
                if rest.contains(':') {
                    return Err(Error::Parse(format!(
                        "bsc takes a single parameter, got {text:?}"
                    )));
                }
                Ok(ChannelSpec::Bsc {
                    delta: parse_real("crossover probability", rest)?,
                })
            }
            "ec" => {
                let Some((q_text, delta_text)) = rest.split_once(':') else {
                    return Err(Error::Parse(format!(
                        "ec needs two parameters, got {text:?}"
                    )));
                };
                if delta_text.contains(':') {
                    return Err(Error::Parse(format!(
                        "ec takes exactly two parameters, got {text:?}"
                    )));
                }
                Ok(ChannelSpec::Ec {
                    q: parse_uint("alphabet size", q_text)?,
                    delta: parse_real("erasure probability", delta_text)?,
                })
            }
            "file" => {
                if rest.is_empty() {
                    return Err(Error::Parse("file: needs a path".into()));
                }
                Ok(ChannelSpec::File { path: rest.into() })
            }
            _ => {
                if let Some(n_text) = head.strip_prefix("bsc^") {
                    if rest.contains(':') {
                        return Err(Error::Parse(format!(
                            "bsc^<n> takes a single parameter, got {text:?}"
                        )));
                    }
                    return Ok(ChannelSpec::BscPow {
                        n: parse_uint("tensor power", n_text)?,
                        delta: parse_real("crossover probability", rest)?,
                    });
                }
                Err(Error::Parse(format!(
                    "unknown channel spec head {head:?} in {text:?}; use bsc, ec, bsc^<n>, or file"
                )))
            }
        }
    }

    /// Materializes the channel, loading and validating JSON for `file:`.
    pub fn resolve(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Bsc { delta } => make_bsc(*delta),
            ChannelSpec::Ec { q, delta } => make_ec(*q, *delta),
            ChannelSpec::BscPow { n, delta } => tensor_power(&make_bsc(*delta)?, *n as usize),
            ChannelSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
                let ch: Channel = serde_json::from_str(&text)?;
                Ok(ch)
            }
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelSpec::parse(s)
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Bsc { delta } => write!(f, "bsc:{delta}"),
            ChannelSpec::Ec { q, delta } => write!(f, "ec:{q}:{delta}"),
            ChannelSpec::BscPow { n, delta } => write!(f, "bsc^{n}:{delta}"),
            ChannelSpec::File { path } => write!(f, "file:{path}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_constructor_forms() {
        assert_eq!(
            ChannelSpec::parse("bsc:0.1").unwrap(),
            ChannelSpec::Bsc { delta: 0.1 }
        );
        assert_eq!(
            ChannelSpec::parse("ec:3:0.5").unwrap(),
            ChannelSpec::Ec { q: 3, delta: 0.5 }
        );
        assert_eq!(
            ChannelSpec::parse("bsc^4:0.25").unwrap(),
            ChannelSpec::BscPow { n: 4, delta: 0.25 }
        );
        assert_eq!(
            ChannelSpec::parse("file:w.json").unwrap(),
            ChannelSpec::File {
                path: "w.json".into()
            }
        );
    }

    #[test]
    fn resolves_constructors() {
        let w = ChannelSpec::parse("bsc:0.1").unwrap().resolve().unwrap();
        assert_eq!(w.input_size(), 2);
        assert!((w.row(0).prob(1) - 0.1).abs() < 1e-15);
        let w = ChannelSpec::parse("ec:3:0.5").unwrap().resolve().unwrap();
        assert_eq!((w.input_size(), w.output_size()), (3, 4));
        let w = ChannelSpec::parse("bsc^3:0.25").unwrap().resolve().unwrap();
        assert_eq!((w.input_size(), w.output_size()), (8, 8));
        // Parameter validation still happens downstream.
        assert!(ChannelSpec::parse("bsc:1.5").unwrap().resolve().is_err());
        assert!(ChannelSpec::parse("ec:1:0.5").unwrap().resolve().is_err());
        assert!(ChannelSpec::parse("bsc^0:0.3").unwrap().resolve().is_err());
    }

    #[test]
    fn rejects_ambiguous_and_malformed_forms() {
        for bad in [
            "",
            "bsc",
            "bsc:",
            "bsc:0.1:0.2",
            "bsc:abc",
            "bsc:inf",
            "ec:2",
            "ec:2:0.1:9",
            "ec:-2:0.1",
            "ec:2.5:0.1",
            "bsc^:0.1",
            "bsc^-1:0.1",
            "bsc^2",
            "bersek:0.1",
            "w.json",
            "file:",
            "BSC:0.1",
        ] {
            assert!(ChannelSpec::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn file_round_trip_and_display() {
        let dir = std::env::temp_dir().join("sdpi-chanspec-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.json");
        let w = make_bsc(0.2).unwrap();
        std::fs::write(&path, serde_json::to_string(&w).unwrap()).unwrap();
        let spec = ChannelSpec::parse(&format!("file:{}", path.display())).unwrap();
        let loaded = spec.resolve().unwrap();
        assert_eq!(loaded.matrix(), w.matrix());
        assert_eq!(spec.to_string(), format!("file:{}", path.display()));
        assert_eq!(
            ChannelSpec::parse("ec:5:0.25").unwrap().to_string(),
            "ec:5:0.25"
        );
        // Missing file errors at resolve time, not parse time.
        let spec = ChannelSpec::parse("file:/nonexistent/nope.json").unwrap();
        assert!(spec.resolve().is_err());
    }
}
