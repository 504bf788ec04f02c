//! Experiment configuration: an optional TOML file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Options shared by every subcommand. Each one may also be set in the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the options below; flags win on conflict.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Atoms for `uniform`, sites for operators.
    #[arg(long)]
    pub n: Option<usize>,
    /// Cantor depth.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Limit-periodic spec file (`k amplitude pattern...` per line).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Named operator: free, period2, trap or canonical.
    #[arg(long)]
    pub operator: Option<String>,
    /// Cyclic vector for spectral measures: 0 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub site: Option<i64>,
    /// Measure CSV for the `csv` fixture.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Largest radius of the scale grid (default: diameter/8).
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Smallest radius of the scale grid (default: 8 median spacings).
    #[arg(long)]
    pub eps_min: Option<f64>,
    /// Ratio of consecutive radii, in (0, 1).
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of geometric time points.
    #[arg(long)]
    pub t_points: Option<usize>,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Hölder exponent for witnesses and Strichartz checks.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Mass discarded by Hölder witnesses.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Clause groups or clauses to verify, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub clauses: Option<Vec<String>>,
    /// Tolerance override `clause=value`; repeatable.
    #[arg(long = "tolerance", value_name = "CLAUSE=VALUE")]
    pub tolerance: Vec<String>,
}

/// The resolved configuration. Its JSON form is hashed into every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fixture: Option<String>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub depth: Option<u32>,
    pub spec: Option<PathBuf>,
    pub operator: Option<String>,
    pub site: Option<i64>,
    pub input: Option<PathBuf>,
    pub eps_max: Option<f64>,
    pub eps_min: Option<f64>,
    pub ratio: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_points: Option<usize>,
    pub q: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub clauses: Option<Vec<String>>,
    pub tolerance: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Overlays `flags` on the file named by `--config`, if any.
    pub fn resolve(fixture: Option<String>, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let f = flags.clone();
        let mut tolerance = file.tolerance;
        for item in &f.tolerance {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("tolerance `{item}` is not CLAUSE=VALUE"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("tolerance `{item}` has a bad value")))?;
            tolerance.insert(k.trim().to_string(), v);
        }
        Ok(Self {
            fixture: fixture.or(file.fixture),
            threads: f.threads.or(file.threads),
            out: f.out.or(file.out),
            n: f.n.or(file.n),
            depth: f.depth.or(file.depth),
            spec: f.spec.or(file.spec),
            operator: f.operator.or(file.operator),
            site: f.site.or(file.site),
            input: f.input.or(file.input),
            eps_max: f.eps_max.or(file.eps_max),
            eps_min: f.eps_min.or(file.eps_min),
            ratio: f.ratio.or(file.ratio),
            t_min: f.t_min.or(file.t_min),
            t_max: f.t_max.or(file.t_max),
            t_points: f.t_points.or(file.t_points),
            q: f.q.or(file.q),
            alpha: f.alpha.or(file.alpha),
            delta: f.delta.or(file.delta),
            clauses: f.clauses.or(file.clauses),
            tolerance,
        })
    }

    /// SHA-256 of the command name and the resolved configuration.
    ///
    /// The thread count and output directory do not affect results and are left out.
    pub fn hash(&self, command: &str) -> String {
        let mut cfg = self.clone();
        cfg.threads = None;
        cfg.out = None;
        let json = serde_json::to_string(&cfg).expect("config serializes");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0u8]);
        h.update(json.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "n = 64\ndepth = 3\n[tolerance]\negkt = 0.5\nchain = 0.1\n",
        )
        .unwrap();
        let flags = Flags {
            config: Some(path),
            n: Some(128),
            tolerance: vec!["egkt=1e-6".into()],
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(Some("uniform".into()), &flags).unwrap();
        assert_eq!(cfg.n, Some(128));
        assert_eq!(cfg.depth, Some(3));
        assert_eq!(cfg.tolerance["egkt"], 1e-6);
        assert_eq!(cfg.tolerance["chain"], 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "colour = 3\n").unwrap();
        assert!(matches!(
            ExperimentConfig::load(&path),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn hash_ignores_threads_and_out() {
        let a = ExperimentConfig {
            n: Some(8),
            ..Default::default()
        };
        let b = ExperimentConfig {
            n: Some(8),
            threads: Some(3),
            out: Some("x".into()),
            ..Default::default()
        };
        assert_eq!(a.hash("measure"), b.hash("measure"));
        assert_ne!(a.hash("measure"), a.hash("dims"));
        assert_eq!(a.hash("measure").len(), 64);
    }
}
