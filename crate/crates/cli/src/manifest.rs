use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Where the network came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Preset(String),
    Spec(String),
}

/// Provenance record written next to every run's outputs as
/// `<command>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub source: Source,
    /// Splitter reflectivities set on the command line, in percent.
    pub reflectivity_overrides_percent: BTreeMap<String, f64>,
    /// Asymmetric loss after the first splitter, as a fraction.
    pub loss_fraction: Option<f64>,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, source: Source) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            source,
            reflectivity_overrides_percent: BTreeMap::new(),
            loss_fraction: None,
            seed: 0,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_json() {
        let mut m = RunManifest::new("sweep", Source::Preset("n3".into()));
        m.reflectivity_overrides_percent.insert("VBS_12".into(), 51.1);
        m.loss_fraction = Some(0.25);
        m.outputs.push("sweep.csv".into());
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"source\":{\"preset\":\"n3\"}"));
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
