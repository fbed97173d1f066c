//! Command results held in memory, a content-addressed cache for them, and the
//! final write to disk.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const CACHE_ENV: &str = "CF_STATLAB_CACHE";

/// Files by name, plus the text printed on stdout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub stdout: String,
}

impl Artifacts {
    pub fn file(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    files: Vec<String>,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// `--cache-dir` wins over the environment; `None` when caching is off.
    pub fn resolve(flag: Option<&Path>, disabled: bool) -> Option<Self> {
        if disabled {
            return None;
        }
        let dir = flag
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))?;
        Some(Self { dir })
    }

    fn entry(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.dir.join(cfg.hash())
    }

    pub fn load(&self, cfg: &ExperimentConfig) -> Option<Artifacts> {
        let dir = self.entry(cfg);
        let manifest: Manifest =
            serde_json::from_slice(&fs::read(dir.join("manifest.json")).ok()?).ok()?;
        let mut out = Artifacts::default();
        for (i, name) in manifest.files.into_iter().enumerate() {
            let bytes = fs::read(dir.join(format!("file{i}"))).ok()?;
            out.files.push((name, bytes));
        }
        out.stdout = fs::read_to_string(dir.join("stdout.txt")).ok()?;
        Some(out)
    }

    pub fn store(&self, cfg: &ExperimentConfig, art: &Artifacts) -> Result<()> {
        let dir = self.entry(cfg);
        let tmp = self.dir.join(format!(".{}.{}", cfg.hash(), std::process::id()));
        fs::create_dir_all(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        for (i, (_, bytes)) in art.files.iter().enumerate() {
            fs::write(tmp.join(format!("file{i}")), bytes)?;
        }
        fs::write(tmp.join("stdout.txt"), &art.stdout)?;
        let manifest = Manifest {
            files: art.files.iter().map(|(n, _)| n.clone()).collect(),
        };
        // the manifest goes last: an entry without one is never loaded
        fs::write(tmp.join("manifest.json"), serde_json::to_vec(&manifest)?)?;
        if dir.exists() {
            fs::remove_dir_all(&tmp)?;
            return Ok(());
        }
        if fs::rename(&tmp, &dir).is_err() {
            // another process won the race
            fs::remove_dir_all(&tmp)?;
        }
        Ok(())
    }
}

/// Runs `compute` unless the cache already has a result for `cfg`.
pub fn cached(
    cache: Option<&Cache>,
    cfg: &ExperimentConfig,
    compute: impl FnOnce() -> Result<Artifacts>,
) -> Result<Artifacts> {
    if let Some(hit) = cache.and_then(|c| c.load(cfg)) {
        return Ok(hit);
    }
    let art = compute()?;
    if let Some(c) = cache {
        c.store(cfg, &art)?;
    }
    Ok(art)
}

/// Writes every file to `overrides[name]` or `out_dir/name`, then prints stdout and
/// the written paths.
pub fn emit(art: &Artifacts, out_dir: &Path, overrides: &BTreeMap<String, PathBuf>) -> Result<()> {
    let mut written = Vec::with_capacity(art.files.len());
    for (name, bytes) in &art.files {
        let path = overrides
            .get(name)
            .cloned()
            .unwrap_or_else(|| out_dir.join(name));
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    out.write_all(art.stdout.as_bytes())?;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::resolve(Some(dir.path()), false).unwrap();
        let mut cfg = ExperimentConfig::new("stats");
        cfg.q = Some(11);
        assert!(cache.load(&cfg).is_none());
        let mut art = Artifacts::default();
        art.file("a.csv", "x\n");
        art.file("b.json", "{}\n");
        art.say("hello");
        cache.store(&cfg, &art).unwrap();
        assert_eq!(cache.load(&cfg).unwrap(), art);
        cache.store(&cfg, &art).unwrap();
    }

    #[test]
    fn disabled_cache() {
        assert!(Cache::resolve(Some(Path::new("/tmp")), true).is_none());
    }

    #[test]
    fn cached_skips_compute_on_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::resolve(Some(dir.path()), false).unwrap();
        let cfg = ExperimentConfig::new("zaremba");
        let first = cached(Some(&cache), &cfg, || {
            let mut a = Artifacts::default();
            a.say("computed");
            Ok(a)
        })
        .unwrap();
        let second = cached(Some(&cache), &cfg, || panic!("should hit")).unwrap();
        assert_eq!(first, second);
    }
}
