use std::io::Write;
use std::path::Path;

use locc_core::protocol::ProtocolTree;
use locc_core::sweep::SweepConfig;
use locc_core::KrausChannel;

use crate::failure::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn read_channel(path: &Path) -> Result<KrausChannel, Failure> {
    KrausChannel::from_json(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

pub fn read_protocol(path: &Path) -> Result<ProtocolTree, Failure> {
    ProtocolTree::from_json(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

pub fn read_sweep_config(path: &Path) -> Result<SweepConfig, Failure> {
    SweepConfig::from_json(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(path, e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, |w| {
        w.write_all(text.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Failure::io(path, e))
    })
}
