pub mod diagnose;
pub mod fronts;
pub mod geometry;
pub mod scenario;
pub mod simulate;

use std::path::Path;

use anyhow::Context;
use kpplab::SetDescriptor;

/// A comma-separated coordinate list such as `1,2.5,-3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

impl std::str::FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>().map(Coords)
    }
}

pub fn load_set(path: &Path) -> anyhow::Result<SetDescriptor> {
    let (u, _): (SetDescriptor, _) = crate::config::load(path)?;
    let u = u.normalized()?;
    u.validate()?;
    Ok(u)
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
