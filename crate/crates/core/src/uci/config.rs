use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::convert::CpMapping;
use super::mock::SpatialPredicate;
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineFlavor {
    /// MCTS engine reporting q/d through verbose move statistics.
    LeelaLike,
    /// Alpha-beta engine reporting centipawns, optionally WDL.
    StockfishLike,
    /// In-process mock; no process is spawned.
    Mock,
}

/// Which in-process evaluator a `Mock` engine uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MockSpec {
    Material,
    PlantedBug {
        delta: f64,
        #[serde(default)]
        predicate: SpatialPredicate,
    },
}

impl Default for MockSpec {
    fn default() -> Self {
        MockSpec::Material
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default)]
    pub executable: PathBuf,
    /// Command-line arguments passed to the executable.
    #[serde(default)]
    pub args: Vec<String>,
    /// Sent in order as `setoption name <k> value <v>`.
    #[serde(default)]
    pub options: Vec<(String, String)>,
    pub node_limit: u64,
    pub flavor: EngineFlavor,
    #[serde(default)]
    pub weights: Option<PathBuf>,
    #[serde(default)]
    pub mock: MockSpec,
    #[serde(default)]
    pub cp_mapping: CpMapping,
    #[serde(default = "default_handshake_secs")]
    pub handshake_timeout_secs: f64,
    #[serde(default = "default_eval_secs")]
    pub eval_timeout_secs: f64,
}

fn default_handshake_secs() -> f64 {
    30.0
}

fn default_eval_secs() -> f64 {
    300.0
}

impl EngineConfig {
    pub fn mock(spec: MockSpec) -> Self {
        EngineConfig {
            executable: PathBuf::new(),
            args: Vec::new(),
            options: Vec::new(),
            node_limit: 1,
            flavor: EngineFlavor::Mock,
            weights: None,
            mock: spec,
            cp_mapping: CpMapping::default(),
            handshake_timeout_secs: default_handshake_secs(),
            eval_timeout_secs: default_eval_secs(),
        }
    }

    pub fn from_preset(preset: Preset, executable: impl Into<PathBuf>) -> Self {
        let mut cfg = EngineConfig::mock(MockSpec::Material);
        cfg.executable = executable.into();
        cfg.flavor = preset.flavor();
        cfg.node_limit = preset.default_nodes();
        cfg.options = preset.options().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        cfg
    }

    pub fn handshake_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.handshake_timeout_secs)
    }

    pub fn eval_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.eval_timeout_secs)
    }

    /// Options in send order, with the weights file appended when configured.
    pub fn effective_options(&self) -> Vec<(String, String)> {
        let mut opts = self.options.clone();
        if let Some(w) = &self.weights {
            if self.flavor == EngineFlavor::LeelaLike && !opts.iter().any(|(k, _)| k == "WeightsFile") {
                opts.push(("WeightsFile".into(), w.display().to_string()));
            }
        }
        opts
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.node_limit == 0 {
            return Err(EngineError::Config("node_limit must be at least 1".into()));
        }
        if let Some((k, _)) = self.options.iter().find(|(k, _)| k.trim().is_empty()) {
            return Err(EngineError::Config(format!("empty option name `{k}`")));
        }
        if self.flavor != EngineFlavor::Mock && self.executable.as_os_str().is_empty() {
            return Err(EngineError::Config("engine executable not set".into()));
        }
        if !(self.cp_mapping.scale > 0.0) {
            return Err(EngineError::Config("centipawn scale must be positive".into()));
        }
        if let MockSpec::PlantedBug { delta, .. } = self.mock {
            if !delta.is_finite() {
                return Err(EngineError::Config("planted-bug delta must be finite".into()));
            }
        }
        Ok(())
    }

    /// Option map for manifests.
    pub fn option_map(&self) -> BTreeMap<String, String> {
        self.effective_options().into_iter().collect()
    }
}

/// Named deterministic engine configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Single-threaded, batch-size-one MCTS search; 400 nodes.
    Leela,
    /// NNUE evaluation; 81,000 nodes matched Leela-400 strength in self-play.
    StockfishNnue,
    /// Hand-crafted evaluation; about 4,100,000 nodes matched Leela-400 strength.
    StockfishClassical,
    /// Modern Stockfish without the NNUE toggle.
    Stockfish,
}

impl Preset {
    pub fn flavor(self) -> EngineFlavor {
        match self {
            Preset::Leela => EngineFlavor::LeelaLike,
            _ => EngineFlavor::StockfishLike,
        }
    }

    pub fn default_nodes(self) -> u64 {
        match self {
            Preset::Leela => 400,
            Preset::StockfishNnue | Preset::Stockfish => 81_000,
            Preset::StockfishClassical => 4_100_000,
        }
    }

    pub fn options(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Preset::Leela => &[
                ("VerboseMoveStats", "true"),
                ("SmartPruningFactor", "0"),
                ("Threads", "1"),
                ("OutOfOrderEval", "false"),
                ("TaskWorkers", "0"),
                ("MinibatchSize", "1"),
                ("MaxPrefetch", "0"),
                ("NNCacheSize", "200000"),
            ],
            Preset::StockfishNnue => {
                &[("Threads", "1"), ("MultiPV", "1"), ("Use NNUE", "true"), ("UCI_ShowWDL", "true")]
            }
            Preset::StockfishClassical => {
                &[("Threads", "1"), ("MultiPV", "1"), ("Use NNUE", "false"), ("UCI_ShowWDL", "true")]
            }
            Preset::Stockfish => &[("Threads", "1"), ("MultiPV", "1"), ("UCI_ShowWDL", "true")],
        }
    }
}

impl FromStr for Preset {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leela" => Ok(Preset::Leela),
            "stockfish-nnue" => Ok(Preset::StockfishNnue),
            "stockfish-classical" => Ok(Preset::StockfishClassical),
            "stockfish" => Ok(Preset::Stockfish),
            other => Err(EngineError::Config(format!("unknown engine preset `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leela_preset_is_deterministic() {
        let cfg = EngineConfig::from_preset(Preset::Leela, "lc0");
        let opts = cfg.option_map();
        assert_eq!(opts["SmartPruningFactor"], "0");
        assert_eq!(opts["Threads"], "1");
        assert_eq!(opts["MinibatchSize"], "1");
        assert_eq!(opts["VerboseMoveStats"], "true");
        assert_eq!(cfg.node_limit, 400);
        assert_eq!(cfg.flavor, EngineFlavor::LeelaLike);
    }

    #[test]
    fn weights_become_an_option() {
        let mut cfg = EngineConfig::from_preset(Preset::Leela, "lc0");
        cfg.weights = Some("/w/T807785.pb.gz".into());
        assert_eq!(cfg.option_map()["WeightsFile"], "/w/T807785.pb.gz");
    }

    #[test]
    fn validation() {
        let mut cfg = EngineConfig::from_preset(Preset::StockfishNnue, "sf");
        assert_eq!(cfg.node_limit, 81_000);
        cfg.validate().unwrap();
        cfg.node_limit = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = EngineConfig::from_preset(Preset::Stockfish, "sf");
        cfg.options.push((" ".into(), "x".into()));
        assert!(cfg.validate().is_err());
        assert!(EngineConfig::from_preset(Preset::Stockfish, "").validate().is_err());
        assert!(EngineConfig::mock(MockSpec::Material).validate().is_ok());
    }

    #[test]
    fn preset_names() {
        for (name, p) in [
            ("leela", Preset::Leela),
            ("stockfish-nnue", Preset::StockfishNnue),
            ("stockfish-classical", Preset::StockfishClassical),
            ("stockfish", Preset::Stockfish),
        ] {
            assert_eq!(name.parse::<Preset>().unwrap(), p);
        }
        assert!("komodo".parse::<Preset>().is_err());
    }
}
