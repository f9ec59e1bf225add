use std::path::Path;

use dsim_core::experiments::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Parses a TOML configuration. Missing keys keep their defaults; an empty
/// document is the default configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let msg = e.message().trim().to_string();
        match line {
            Some(l) => CliError::Config(format!("line {l}: {msg}")),
            None => CliError::Config(msg),
        }
    })?;
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Sidecar record of one run. The `config` table can be loaded on its own
/// with [`parse_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub mode: Option<String>,
    pub version: String,
    pub master_seed: u64,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Io(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// The configuration as TOML, the form echoed into CSV headers.
pub fn config_to_toml(cfg: &ExperimentConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Io(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn parse_error_names_line() {
        let err = parse_config("trajectories = 10\n[drive]\nomega = = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse_config("[drive]\ndelta = 0.4\nomgea = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.drive.omega = 2.5;
        cfg.rf.b_rf = Some(0.07);
        let text = config_to_toml(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
