//! Flag and config-file resolution.
//!
//! Every command shares one flat key set. A config file holds plain
//! `key = value` lines (same keys as the long flags, `#` comments);
//! command-line flags take precedence over file values, and unknown or
//! duplicate file keys are rejected. Resolved values are echoed back
//! canonically in the `params` map of every emitted record.

use bohrdiff_core::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const KEYS: [&str; 16] = [
    "command", "p", "spec", "shifts", "e", "level", "scale", "dmax", "samples", "seed",
    "budget", "cell", "balls", "mode", "preset", "output",
];

#[derive(clap::Args, Debug, Default)]
pub struct Args {
    /// Plain "key = value" config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prime modulus.
    #[arg(long)]
    pub p: Option<u64>,
    /// Partition levels as "n1:m1,n2:m2,...".
    #[arg(long)]
    pub spec: Option<String>,
    /// Shift radii as "k1,k2,...", one per level.
    #[arg(long)]
    pub shifts: Option<String>,
    /// Residue set as "x1,x2,..."; defaults to the odd residues.
    #[arg(long)]
    pub e: Option<String>,
    /// Truncate the construction to its first L levels.
    #[arg(long)]
    pub level: Option<usize>,
    /// Ambient scale.
    #[arg(long)]
    pub scale: Option<u32>,
    /// Largest subgroup codimension checked.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Trial count in sampled mode (default 10000).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Random seed in sampled mode (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instance budget in exhaustive mode (default 2^24).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Cell index, or "z" for the remainder class.
    #[arg(long)]
    pub cell: Option<String>,
    /// Translated Hamming balls as "n1:k1,n2:k2,...".
    #[arg(long)]
    pub balls: Option<String>,
    /// "exhaustive" or "sampled".
    #[arg(long)]
    pub mode: Option<String>,
    /// Named parameter set: p2-exhaustive, p2-sampled, or p3-exhaustive.
    #[arg(long)]
    pub preset: Option<String>,
    /// Report destination: a path, or "-" for standard out.
    #[arg(long)]
    pub output: Option<String>,
}

/// Flags merged over config-file values, still unvalidated against any
/// particular command's requirements.
#[derive(Debug)]
pub struct Resolved {
    pub command: &'static str,
    pub p: Option<u64>,
    pub spec: Option<String>,
    pub shifts: Option<String>,
    pub e: Option<String>,
    pub level: Option<usize>,
    pub scale: Option<u32>,
    pub dmax: Option<usize>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub cell: Option<String>,
    pub balls: Option<String>,
    pub mode: Option<String>,
    pub preset: Option<String>,
    pub output: Option<String>,
}

impl Resolved {
    pub fn from_args(command: &'static str, args: &Args) -> Result<Resolved> {
        let file = match &args.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        if let Some(c) = file.get("command") {
            if c != command {
                return Err(Error::Parse(format!(
                    "config file names command {c:?}, but {command} was invoked"
                )));
            }
        }
        Ok(Resolved {
            command,
            p: merged(args.p, file.get("p"), "p")?,
            spec: text(&args.spec, file.get("spec")),
            shifts: text(&args.shifts, file.get("shifts")),
            e: text(&args.e, file.get("e")),
            level: merged(args.level, file.get("level"), "level")?,
            scale: merged(args.scale, file.get("scale"), "scale")?,
            dmax: merged(args.dmax, file.get("dmax"), "dmax")?,
            samples: merged(args.samples, file.get("samples"), "samples")?,
            seed: merged(args.seed, file.get("seed"), "seed")?,
            budget: merged(args.budget, file.get("budget"), "budget")?,
            cell: text(&args.cell, file.get("cell")),
            balls: text(&args.balls, file.get("balls")),
            mode: text(&args.mode, file.get("mode")),
            preset: text(&args.preset, file.get("preset")),
            output: text(&args.output, file.get("output")),
        })
    }
}

fn merged<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    file: Option<&String>,
    key: &str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file {
        None => Ok(None),
        Some(value) => value
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("config key {key}: bad value {value:?}"))),
    }
}

fn text(flag: &Option<String>, file: Option<&String>) -> Option<String> {
    flag.clone().or_else(|| file.cloned())
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in body.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse(format!(
                "{}:{}: unknown key {key:?}",
                path.display(),
                i + 1
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Parse(format!(
                "{}:{}: duplicate key {key:?}",
                path.display(),
                i + 1
            )));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, body: &str) -> PathBuf {
        let path = std::env::temp_dir().join(format!("bohrdiff-{}-{name}", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn flags_override_file_values() {
        let path = write_temp("override.conf", "p = 3\nsamples = 5\nmode = sampled\n");
        let args = Args {
            config: Some(path.clone()),
            samples: Some(7),
            ..Args::default()
        };
        let cfg = Resolved::from_args("count", &args).unwrap();
        assert_eq!(cfg.p, Some(3));
        assert_eq!(cfg.samples, Some(7));
        assert_eq!(cfg.mode.as_deref(), Some("sampled"));
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let path = write_temp("unknown.conf", "spce = 3:2\n");
        let args = Args { config: Some(path.clone()), ..Args::default() };
        assert!(Resolved::from_args("count", &args).is_err());
        std::fs::remove_file(path).unwrap();

        let path = write_temp("dup.conf", "p = 2\np = 3\n");
        let args = Args { config: Some(path.clone()), ..Args::default() };
        assert!(Resolved::from_args("count", &args).is_err());
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn file_command_must_match() {
        let path = write_temp("cmd.conf", "command = build\n");
        let args = Args { config: Some(path.clone()), ..Args::default() };
        assert!(Resolved::from_args("count", &args).is_err());
        assert!(Resolved::from_args("build", &args).is_ok());
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let path = write_temp("comments.conf", "# header\n\np = 2  # inline\n");
        let args = Args { config: Some(path.clone()), ..Args::default() };
        let cfg = Resolved::from_args("count", &args).unwrap();
        assert_eq!(cfg.p, Some(2));
        std::fs::remove_file(path).unwrap();
    }
}
