//! Run manifests written next to every result file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use gmud::SimConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub manifest: PathBuf,
    pub dat: Option<PathBuf>,
}

/// Everything needed to reproduce a run's CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub configs: Vec<SimConfig>,
    pub duration_secs: f64,
    pub outputs: OutputPaths,
}

impl RunManifest {
    pub fn new(command: &str, configs: Vec<SimConfig>, elapsed: Duration, outputs: OutputPaths) -> Self {
        Self {
            tool: "gmud-sim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: configs.first().map(|c| c.seed),
            configs,
            duration_secs: elapsed.as_secs_f64(),
            outputs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gmud::{Modulation, Scheme};

    #[test]
    fn json_round_trip() {
        let cfg = SimConfig::new(Scheme::Gmud, Modulation::Qam16, vec![0.0, 2.5]);
        let m = RunManifest::new(
            "sweep",
            vec![cfg],
            Duration::from_millis(1500),
            OutputPaths {
                csv: "a.csv".into(),
                svg: "a.svg".into(),
                manifest: "a.manifest.json".into(),
                dat: None,
            },
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, m.to_json().unwrap()).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
        assert_eq!(m.seed, Some(0));
    }
}
