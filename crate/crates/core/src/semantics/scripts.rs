//! Level-transition script discovery and validation.

use std::path::{Path, PathBuf};

use super::Diagnostic;
use crate::runtime::levels::LevelSpec;
use crate::syntax::ast::LevelDecl;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelScripts {
    pub to: PathBuf,
    pub from: PathBuf,
}

/// Resolved `<dir>/<level>.to` and `<dir>/<level>.from` paths, indexed by
/// level ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptTable {
    pub dir: PathBuf,
    pub entries: Vec<LevelScripts>,
}

impl ScriptTable {
    /// Paths for every level without touching the filesystem.
    pub fn resolve<'a>(dir: &Path, names: impl IntoIterator<Item = &'a str>) -> Self {
        let entries = names
            .into_iter()
            .map(|n| LevelScripts {
                to: dir.join(format!("{n}.to")),
                from: dir.join(format!("{n}.from")),
            })
            .collect();
        Self {
            dir: dir.to_path_buf(),
            entries,
        }
    }

    /// Resolve and verify every script, returning one message per problem
    /// in level order (`.to` before `.from`).
    pub fn validate(levels: &[LevelSpec], dir: &Path) -> Result<Self, Vec<String>> {
        let table = Self::resolve(dir, levels.iter().map(|l| l.name.as_str()));
        let errors: Vec<String> = table
            .entries
            .iter()
            .flat_map(|e| [&e.to, &e.from])
            .filter_map(|p| script_problem(p))
            .collect();
        if errors.is_empty() {
            Ok(table)
        } else {
            Err(errors)
        }
    }
}

/// Why `path` is not a usable executable, if it is not.
pub fn script_problem(path: &Path) -> Option<String> {
    match std::fs::metadata(path) {
        Err(_) => Some(format!("script {} does not exist", path.display())),
        Ok(m) if !m.is_file() => Some(format!("script {} is not a regular file", path.display())),
        Ok(m) if !is_executable(&m) => Some(format!("script {} is not executable", path.display())),
        Ok(_) => None,
    }
}

#[cfg(unix)]
fn is_executable(m: &std::fs::Metadata) -> bool {
    use std::os::unix::fs::PermissionsExt;
    m.permissions().mode() & 0o111 != 0
}

#[cfg(not(unix))]
fn is_executable(_: &std::fs::Metadata) -> bool {
    true
}

/// Compile-time check: each diagnostic is positioned at the declaration of
/// the level whose script is missing or not executable.
pub fn check_scripts(levels: &[LevelDecl], dir: &Path) -> Result<ScriptTable, Vec<Diagnostic>> {
    let table = ScriptTable::resolve(dir, levels.iter().map(|l| l.name.as_str()));
    let mut errors = Vec::new();
    for (decl, entry) in levels.iter().zip(&table.entries) {
        for p in [&entry.to, &entry.from] {
            if let Some(msg) = script_problem(p) {
                errors.push(Diagnostic::new(decl.pos, msg));
            }
        }
    }
    if errors.is_empty() {
        Ok(table)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;
    use std::os::unix::fs::PermissionsExt;

    fn make_dir(levels: &[&str], skip: Option<&str>) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for l in levels {
            for ext in ["to", "from"] {
                let name = format!("{l}.{ext}");
                if Some(name.as_str()) == skip {
                    continue;
                }
                let p = dir.path().join(name);
                std::fs::write(&p, "#!/bin/sh\nexit 0\n").unwrap();
                std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
            }
        }
        dir
    }

    fn decls(src: &str) -> Vec<LevelDecl> {
        parse_source(src, "t.rul").unwrap().levels().cloned().collect()
    }

    #[test]
    fn complete_directory_passes() {
        let dir = make_dir(&["A", "B", "C", "D"], None);
        let t = check_scripts(&decls("levels: A; B; C soft; D;"), dir.path()).unwrap();
        assert_eq!(t.entries.len(), 4);
        assert_eq!(t.entries[2].from, dir.path().join("C.from"));
    }

    #[test]
    fn missing_script_is_named() {
        let dir = make_dir(&["A", "B", "C", "D"], Some("D.from"));
        let errs = check_scripts(&decls("levels: A; B; C soft; D;"), dir.path()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("D.from"));
        assert_eq!(errs[0].pos.line, 1);
    }

    #[test]
    fn non_executable_script_is_rejected() {
        let dir = make_dir(&["A"], None);
        std::fs::set_permissions(dir.path().join("A.to"), std::fs::Permissions::from_mode(0o644)).unwrap();
        let errs = check_scripts(&decls("levels: A;"), dir.path()).unwrap_err();
        assert!(errs[0].message.contains("not executable"));
    }

    #[test]
    fn no_levels_is_vacuously_fine() {
        assert!(check_scripts(&[], Path::new("/nonexistent")).is_ok());
    }
}
