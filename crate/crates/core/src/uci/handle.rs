use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::chess::Board;

use super::{
    EngineConfig, EngineError, EngineFlavor, Evaluation, Evaluator, MaterialMock, MockSpec, PlantedBugMock, UciEngine,
};

/// Any evaluator constructible from an [`EngineConfig`].
pub enum EngineHandle {
    Process(UciEngine),
    Material(MaterialMock),
    PlantedBug(PlantedBugMock<MaterialMock>),
}

impl Evaluator for EngineHandle {
    fn identity(&self) -> String {
        match self {
            EngineHandle::Process(e) => e.identity(),
            EngineHandle::Material(e) => e.identity(),
            EngineHandle::PlantedBug(e) => e.identity(),
        }
    }

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        match self {
            EngineHandle::Process(e) => e.evaluate(board, node_limit),
            EngineHandle::Material(e) => e.evaluate(board, node_limit),
            EngineHandle::PlantedBug(e) => e.evaluate(board, node_limit),
        }
    }
}

/// Starts the configured engine; process engines complete the handshake
/// before this returns.
pub fn start_engine(config: &EngineConfig) -> Result<EngineHandle, EngineError> {
    config.validate()?;
    match config.flavor {
        EngineFlavor::Mock => Ok(match &config.mock {
            MockSpec::Material => EngineHandle::Material(MaterialMock),
            MockSpec::PlantedBug { delta, predicate } => {
                EngineHandle::PlantedBug(PlantedBugMock::new(MaterialMock, *delta, predicate.clone()))
            }
        }),
        _ => {
            let identity = engine_identity(config)?;
            Ok(EngineHandle::Process(UciEngine::start(config, identity)?))
        }
    }
}

/// Stable identity of an engine build plus its evaluation-relevant settings.
///
/// Process engines hash the executable and the weights file, so a rebuilt
/// binary never shares cache entries with its predecessor.
pub fn engine_identity(config: &EngineConfig) -> Result<String, EngineError> {
    if config.flavor == EngineFlavor::Mock {
        return Ok(match &config.mock {
            MockSpec::Material => MaterialMock.identity(),
            MockSpec::PlantedBug { delta, predicate } => {
                PlantedBugMock::new(MaterialMock, *delta, predicate.clone()).identity()
            }
        });
    }
    let mut h = Sha256::new();
    h.update(b"exe:");
    h.update(file_digest(&config.executable)?);
    for a in &config.args {
        h.update(format!("\narg:{a}").as_bytes());
    }
    for (k, v) in config.effective_options() {
        h.update(format!("\nopt:{k}={v}").as_bytes());
    }
    if let Some(w) = &config.weights {
        h.update(b"\nweights:");
        h.update(file_digest(w)?);
    }
    h.update(format!("\nflavor:{:?}\ncp_scale:{}", config.flavor, config.cp_mapping.scale).as_bytes());
    let name = config.executable.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(format!("{name}@{}", &hex::encode(h.finalize())[..16]))
}

fn file_digest(path: &Path) -> Result<String, EngineError> {
    let resolved = resolve_executable(path);
    let bytes = fs::read(&resolved).map_err(|e| EngineError::Spawn {
        executable: path.display().to_string(),
        reason: format!("cannot read for hashing: {e}"),
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Looks a bare command name up on PATH.
fn resolve_executable(path: &Path) -> std::path::PathBuf {
    if path.components().count() > 1 || path.exists() {
        return path.to_path_buf();
    }
    std::env::var_os("PATH")
        .into_iter()
        .flat_map(|p| std::env::split_paths(&p).collect::<Vec<_>>())
        .map(|dir| dir.join(path))
        .find(|candidate| candidate.is_file())
        .unwrap_or_else(|| path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uci::{Preset, SpatialPredicate};
    use std::io::Write;

    #[test]
    fn mock_handles() {
        let mut h = start_engine(&EngineConfig::mock(MockSpec::Material)).unwrap();
        assert_eq!(h.identity(), "mock:material");
        assert_eq!(h.evaluate(&Board::startpos(), 1).unwrap().q, 0.0);
        let cfg = EngineConfig::mock(MockSpec::PlantedBug { delta: 0.5, predicate: SpatialPredicate::default() });
        let h = start_engine(&cfg).unwrap();
        assert_eq!(h.identity(), engine_identity(&cfg).unwrap());
    }

    #[test]
    fn identity_tracks_binary_and_options() {
        let dir = tempfile::tempdir().unwrap();
        let exe = dir.path().join("engine");
        fs::File::create(&exe).unwrap().write_all(b"v1").unwrap();
        let cfg = EngineConfig::from_preset(Preset::Stockfish, &exe);
        let a = engine_identity(&cfg).unwrap();
        assert_eq!(a, engine_identity(&cfg).unwrap());
        let mut other = cfg.clone();
        other.options.push(("Hash".into(), "64".into()));
        assert_ne!(a, engine_identity(&other).unwrap());
        fs::File::create(&exe).unwrap().write_all(b"v2").unwrap();
        assert_ne!(a, engine_identity(&cfg).unwrap());
    }

    #[test]
    fn missing_executable_is_a_spawn_error() {
        let cfg = EngineConfig::from_preset(Preset::Stockfish, "/nonexistent/engine");
        assert!(matches!(start_engine(&cfg), Err(EngineError::Spawn { .. })));
    }
}
