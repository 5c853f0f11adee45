//! On-disk codebook cache keyed by the parameters that determine its rows.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::SimConfig;
use crate::codebook::Codebook;
use crate::Result;

/// Cache key of the codebook a configuration needs.
pub fn cache_key(cfg: &SimConfig) -> String {
    let source = match &cfg.custom_taps {
        Some(taps) => {
            let bits: Vec<String> = taps.iter().map(|h| format!("{:016x}", h.to_bits())).collect();
            format!("taps={}", bits.join(","))
        }
        None => format!(
            "rrc tau={:016x} rolloff_h={:016x} span={}",
            cfg.tau.to_bits(),
            cfg.rolloff_h.to_bits(),
            cfg.span
        ),
    };
    let digest = Sha256::digest(format!("{source} np={} nt={}", cfg.np, cfg.nt).as_bytes());
    digest[..12].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, cfg: &SimConfig) -> PathBuf {
    dir.join(format!("ftnlcc-{}.bin", cache_key(cfg)))
}

/// Loads the codebook from the cache directory if a matching file exists,
/// otherwise builds it and, when caching is enabled, stores it.
pub fn load_or_build(cfg: &SimConfig) -> Result<Arc<Codebook>> {
    let params = cfg.codebook_params()?;
    let Some(dir) = &cfg.cache_dir else {
        return Ok(Arc::new(Codebook::build(params)?));
    };
    let path = cache_path(dir, cfg);
    if let Ok(file) = fs::File::open(&path) {
        match Codebook::read_from(BufReader::new(file), params.taps().tau(), cfg.size_cap) {
            Ok(cb) if cb.params() == &params => return Ok(Arc::new(cb)),
            // stale or corrupt entries are rebuilt below
            _ => {}
        }
    }
    let cb = Codebook::build(params)?;
    save(&cb, &path)?;
    Ok(Arc::new(cb))
}

/// Writes a cache file atomically.
pub fn save(cb: &Codebook, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        cb.write_to(&mut out)?;
        std::io::Write::flush(&mut out)?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_differ_by_parameters() {
        let a = SimConfig::desk();
        let mut b = a.clone();
        b.np = 9;
        let mut c = a.clone();
        c.tau = 0.5;
        assert_ne!(cache_key(&a), cache_key(&b));
        assert_ne!(cache_key(&a), cache_key(&c));
        let mut d = a.clone();
        d.block_len = 17;
        assert_eq!(cache_key(&a), cache_key(&d));
    }

    #[test]
    fn build_then_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SimConfig::desk();
        cfg.np = 3;
        cfg.cache_dir = Some(dir.path().to_path_buf());
        let first = load_or_build(&cfg).unwrap();
        let path = cache_path(dir.path(), &cfg);
        assert!(path.exists());
        let second = load_or_build(&cfg).unwrap();
        assert!(first.samples().eq(second.samples()));

        fs::write(&path, b"garbage").unwrap();
        let rebuilt = load_or_build(&cfg).unwrap();
        assert!(rebuilt.samples().eq(first.samples()));
    }
}
