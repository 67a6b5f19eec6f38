pub mod conlang;
pub mod prep;
pub mod report;
pub mod score;
pub mod theory;
pub mod translate;

use std::path::Path;

use shuffleval::backend::BackendConfig;
use shuffleval::manifest::RunManifest;

use crate::CliError;

/// Manifest path convention: `<output>.manifest.json` next to the output, or
/// `run.manifest.json` inside an output directory.
pub fn manifest_path_for(out: &Path) -> std::path::PathBuf {
    if out.is_dir() {
        out.join("run.manifest.json")
    } else {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

pub fn new_manifest(backend: BackendConfig, max_inflight: usize) -> RunManifest {
    let mut manifest = RunManifest::new(backend);
    manifest.max_inflight = max_inflight;
    manifest
}

pub fn write_manifest(manifest: &mut RunManifest, path: &Path) -> Result<(), CliError> {
    manifest.finish();
    manifest
        .write(path)
        .map_err(|e| CliError::Data(format!("writing manifest {}: {e}", path.display())))
}

pub fn record_input(manifest: &mut RunManifest, path: &Path) -> Result<(), CliError> {
    manifest
        .record_input(path)
        .map_err(|e| CliError::Config(format!("input {}: {e}", path.display())))
}
