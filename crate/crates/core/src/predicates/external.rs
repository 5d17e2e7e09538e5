//! External-condition predicates: IDS alert files and OS signals.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use memchr::memmem;
use walkdir::WalkDir;

use crate::runtime::signals::{Sig, SignalCounters};

pub const DEFAULT_IDS_DIR: &str = "./ids-alerts";
pub const DEFAULT_IDS_PATTERN: &str = "alert*";

/// Where `idsalert` looks: files under `dir` (recursively) whose file name
/// matches `pattern`.
#[derive(Debug)]
pub struct IdsConfig {
    pub dir: PathBuf,
    pub pattern: glob::Pattern,
    warned: AtomicBool,
}

impl Clone for IdsConfig {
    fn clone(&self) -> Self {
        Self::new(self.dir.clone(), self.pattern.clone())
    }
}

impl Default for IdsConfig {
    fn default() -> Self {
        Self::new(
            PathBuf::from(DEFAULT_IDS_DIR),
            glob::Pattern::new(DEFAULT_IDS_PATTERN).expect("valid default pattern"),
        )
    }
}

impl IdsConfig {
    pub fn new(dir: PathBuf, pattern: glob::Pattern) -> Self {
        Self {
            dir,
            pattern,
            warned: AtomicBool::new(false),
        }
    }

    pub fn parse(dir: impl Into<PathBuf>, pattern: &str) -> Result<Self, glob::PatternError> {
        Ok(Self::new(dir.into(), glob::Pattern::new(pattern)?))
    }

    /// True iff some matching file contains `needle`.
    pub fn idsalert(&self, needle: &str) -> bool {
        if !self.dir.is_dir() {
            if !self.warned.swap(true, Ordering::Relaxed) {
                tracing::warn!(dir = %self.dir.display(), "IDS alert directory does not exist");
            }
            return false;
        }
        let finder = memmem::Finder::new(needle.as_bytes());
        WalkDir::new(&self.dir)
            .follow_links(true)
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file())
            .filter(|e| self.name_matches(e.path()))
            .any(|e| match std::fs::read(e.path()) {
                Ok(data) => finder.find(&data).is_some(),
                Err(err) => {
                    tracing::debug!(path = %e.path().display(), %err, "unreadable IDS alert file");
                    false
                }
            })
    }

    fn name_matches(&self, p: &Path) -> bool {
        p.file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| self.pattern.matches(n))
    }
}

/// `signal(sig)`: consumes one pending delivery.
pub fn signal(counters: &SignalCounters, sig: Sig) -> bool {
    counters.take(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursive_scan_with_name_pattern() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = IdsConfig::parse(dir.path(), "alert*").unwrap();
        assert!(!cfg.idsalert("x"));
        let nested = dir.path().join("a/b");
        std::fs::create_dir_all(&nested).unwrap();
        std::fs::write(nested.join("alert.full"), "[**] ICMP flood detected [**]").unwrap();
        std::fs::write(dir.path().join("other.log"), "port scan").unwrap();
        assert!(cfg.idsalert("ICMP flood"));
        assert!(!cfg.idsalert("port scan"));
    }

    #[test]
    fn missing_directory_is_false() {
        let cfg = IdsConfig::parse("/nonexistent/rips-ids", "alert*").unwrap();
        assert!(!cfg.idsalert("anything"));
        assert!(!cfg.idsalert("anything"));
    }
}
