//! Orientation-pattern sources shared by the subcommands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use orihc_core::orient::Orientation;
use orihc_core::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSource {
    Consistent,
    Antidirected,
    Random,
    File(String),
}

impl PatternSource {
    pub fn parse(spec: &str) -> Result<Self> {
        Ok(match spec {
            "consistent" => PatternSource::Consistent,
            "antidirected" => PatternSource::Antidirected,
            "random" => PatternSource::Random,
            other => {
                if let Some(path) = other.strip_prefix("file:") {
                    PatternSource::File(path.to_string())
                } else if Path::new(other).exists() {
                    PatternSource::File(other.to_string())
                } else {
                    bail!(
                        "unknown pattern source {other:?}: use consistent, antidirected, random, or file:<path>"
                    )
                }
            }
        })
    }

    /// Produce `count` patterns of `len` signs. Random patterns draw
    /// from the dedicated stream of `seed`, so they are reproducible and
    /// independent of any other randomness in the run.
    pub fn materialize(&self, len: usize, count: usize, seed: u64) -> Result<Vec<Orientation>> {
        match self {
            PatternSource::Consistent => Ok(vec![Orientation::consistent(len); count]),
            PatternSource::Antidirected => Ok(vec![Orientation::alternating(len); count]),
            PatternSource::Random => {
                let mut rng = stream_rng(seed, PATTERN_STREAM);
                Ok((0..count).map(|_| Orientation::random(len, &mut rng)).collect())
            }
            PatternSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading pattern file {path}"))?;
                let patterns: Vec<Orientation> = text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(Orientation::parse)
                    .collect::<Result<_, _>>()?;
                if patterns.len() < count {
                    bail!("pattern file {path} has {} patterns, need {count}", patterns.len());
                }
                for (i, p) in patterns.iter().take(count).enumerate() {
                    if p.len() != len {
                        bail!("pattern {i} in {path} has length {}, expected {len}", p.len());
                    }
                }
                Ok(patterns.into_iter().take(count).collect())
            }
        }
    }
}

const PATTERN_STREAM: u64 = u64::MAX - 7;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_materialize() {
        assert_eq!(PatternSource::parse("consistent").unwrap(), PatternSource::Consistent);
        assert!(PatternSource::parse("sideways").is_err());
        let pats = PatternSource::Random.materialize(10, 3, 7).unwrap();
        assert_eq!(pats.len(), 3);
        assert!(pats.iter().all(|p| p.len() == 10));
        // Same seed, same patterns.
        assert_eq!(pats, PatternSource::Random.materialize(10, 3, 7).unwrap());
        let anti = PatternSource::Antidirected.materialize(4, 1, 0).unwrap();
        assert_eq!(anti[0].to_string(), "+-+-");
    }
}
