//! Optional on-disk persistence of count-table segments, controlled by the
//! PARTITION_LAB_CACHE_DIR environment variable; unset disables it.
//!
//! A segment file stores the rectangular at-most table (rows 0..=m over
//! totals 0..=n). Layout, all integers little-endian:
//!
//! ```text
//! magic    8 bytes   "PLCACHE1"
//! version  u32       1
//! m        u64       highest row index
//! n        u64       highest total
//! body               (m+1)(n+1) entries row-major, each a u64 byte length
//!                    followed by that many little-endian bytes of the count
//! check    u64       FNV-1a hash of everything before it
//! ```
//!
//! Corrupt or oversized files are skipped with a warning on the error
//! stream, never trusted.

use crate::counting::CountCache;
use num_bigint::BigUint;
use std::path::{Path, PathBuf};

pub const CACHE_DIR_ENV: &str = "PARTITION_LAB_CACHE_DIR";
const MAGIC: &[u8; 8] = b"PLCACHE1";
const VERSION: u32 = 1;
/// Segments larger than this are neither written nor read.
pub const SIZE_CAP_BYTES: u64 = 128 * 1024 * 1024;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn segment_name(n: u64, m: u64) -> String {
    format!("rows_m{m}_n{n}.bin")
}

/// (m, n) parsed back out of a segment file name.
fn parse_name(name: &str) -> Option<(u64, u64)> {
    let rest = name.strip_prefix("rows_m")?.strip_suffix(".bin")?;
    let (m, n) = rest.split_once("_n")?;
    Some((m.parse().ok()?, n.parse().ok()?))
}

/// Largest full rectangle held by the cache, encoded; None when there is
/// nothing worth saving or the segment would exceed the size cap.
fn encode(cache: &CountCache) -> Option<(u64, u64, Vec<u8>)> {
    let lens = cache.row_lengths();
    let width = *lens.iter().min()?;
    if width < 2 || lens.len() < 2 {
        return None;
    }
    let m = (lens.len() - 1) as u64;
    let n = (width - 1) as u64;
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&m.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    for mm in 0..=m {
        for v in &cache.row_ref(mm)[..width] {
            let bytes = v.to_bytes_le();
            buf.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
            buf.extend_from_slice(&bytes);
            if buf.len() as u64 > SIZE_CAP_BYTES {
                return None;
            }
        }
    }
    let check = fnv1a(&buf);
    buf.extend_from_slice(&check.to_le_bytes());
    Some((n, m, buf))
}

fn decode(bytes: &[u8]) -> Option<Vec<Vec<BigUint>>> {
    if bytes.len() < MAGIC.len() + 4 + 8 + 8 + 8 {
        return None;
    }
    let (body, check) = bytes.split_at(bytes.len() - 8);
    if fnv1a(body) != u64::from_le_bytes(check.try_into().unwrap()) {
        return None;
    }
    let (magic, rest) = body.split_at(8);
    if magic != MAGIC {
        return None;
    }
    let (ver, rest) = rest.split_at(4);
    if u32::from_le_bytes(ver.try_into().unwrap()) != VERSION {
        return None;
    }
    let (mb, rest) = rest.split_at(8);
    let (nb, mut rest) = rest.split_at(8);
    let m = u64::from_le_bytes(mb.try_into().unwrap());
    let n = u64::from_le_bytes(nb.try_into().unwrap());
    if m >= 1 << 20 || n >= 1 << 40 {
        return None;
    }
    let mut rows = Vec::with_capacity(m as usize + 1);
    for _ in 0..=m {
        let mut row = Vec::with_capacity(n as usize + 1);
        for _ in 0..=n {
            if rest.len() < 8 {
                return None;
            }
            let (lb, tail) = rest.split_at(8);
            let len = u64::from_le_bytes(lb.try_into().unwrap()) as usize;
            if tail.len() < len {
                return None;
            }
            let (vb, tail) = tail.split_at(len);
            row.push(BigUint::from_bytes_le(vb));
            rest = tail;
        }
        rows.push(row);
    }
    if !rest.is_empty() {
        return None;
    }
    Some(rows)
}

/// Saves the cache's table into `dir` unless an existing segment already
/// covers it. Failures are warnings, never errors: persistence is a cache.
pub fn store_cache_in(dir: &Path, cache: &CountCache) {
    let Some((n, m, bytes)) = encode(cache) else {
        return;
    };
    if let Ok(entries) = std::fs::read_dir(dir) {
        for e in entries.flatten() {
            if let Some((sm, sn)) = e.file_name().to_str().and_then(parse_name) {
                if sm >= m && sn >= n {
                    return;
                }
            }
        }
    }
    if let Err(e) = std::fs::create_dir_all(dir) {
        eprintln!("warning kind=cache msg=\"cannot create cache dir {}: {e}\"", dir.display());
        return;
    }
    let name = segment_name(n, m);
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = std::fs::write(&tmp, &bytes).and_then(|()| std::fs::rename(&tmp, dir.join(&name)));
    if let Err(e) = result {
        eprintln!("warning kind=cache msg=\"cannot write cache segment {name}: {e}\"");
        let _ = std::fs::remove_file(&tmp);
    }
}

/// Loads the smallest stored segment covering (n, m) from `dir`.
pub fn load_cache_from(dir: &Path, n: u64, m: u64) -> Option<CountCache> {
    let entries = std::fs::read_dir(dir).ok()?;
    let mut candidates: Vec<(u64, u64, PathBuf)> = entries
        .flatten()
        .filter_map(|e| {
            let (sm, sn) = e.file_name().to_str().and_then(parse_name)?;
            (sm >= m && sn >= n).then(|| (sm, sn, e.path()))
        })
        .collect();
    candidates.sort_by_key(|(sm, sn, _)| (sm + 1) * (sn + 1));
    for (_, _, path) in candidates {
        match std::fs::metadata(&path) {
            Ok(meta) if meta.len() <= SIZE_CAP_BYTES => {}
            _ => continue,
        }
        let Ok(bytes) = std::fs::read(&path) else {
            continue;
        };
        match decode(&bytes).and_then(CountCache::from_persisted_rows) {
            Some(cache) => return Some(cache),
            None => {
                eprintln!("warning kind=cache msg=\"ignoring corrupt cache segment {}\"", path.display());
            }
        }
    }
    None
}

/// Environment-directed wrappers: no-ops without PARTITION_LAB_CACHE_DIR.
pub fn store_cache(cache: &CountCache) {
    if let Some(dir) = cache_dir() {
        store_cache_in(&dir, cache);
    }
}

pub fn load_cache(n: u64, m: u64) -> Option<CountCache> {
    load_cache_from(&cache_dir()?, n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn scratch_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("persist-test-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn round_trip_preserves_counts() {
        let dir = scratch_dir("round-trip");
        let mut cache = CountCache::new();
        cache.ensure(40, 6).unwrap();
        store_cache_in(&dir, &cache);
        let mut loaded = load_cache_from(&dir, 40, 6).expect("segment loads");
        for n in 0..=40u64 {
            for m in 1..=6u64 {
                assert_eq!(
                    loaded.count_at_most(n, m).unwrap(),
                    cache.count_at_most(n, m).unwrap()
                );
            }
        }
        // the loaded cache still grows past the stored rectangle;
        // partitions of 50 into at most 3 parts: round(53^2/12)
        assert_eq!(loaded.count_at_most(50, 3).unwrap().to_u64().unwrap(), 234);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn undersized_segments_are_not_offered() {
        let dir = scratch_dir("undersized");
        let mut cache = CountCache::new();
        cache.ensure(20, 3).unwrap();
        store_cache_in(&dir, &cache);
        assert!(load_cache_from(&dir, 21, 3).is_none());
        assert!(load_cache_from(&dir, 20, 4).is_none());
        assert!(load_cache_from(&dir, 20, 3).is_some());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn covered_segments_are_not_rewritten() {
        let dir = scratch_dir("covered");
        let mut cache = CountCache::new();
        cache.ensure(30, 5).unwrap();
        store_cache_in(&dir, &cache);
        let count = || std::fs::read_dir(&dir).unwrap().count();
        assert_eq!(count(), 1);
        let mut smaller = CountCache::new();
        smaller.ensure(10, 2).unwrap();
        store_cache_in(&dir, &smaller);
        assert_eq!(count(), 1, "covered segment triggers no write");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn corrupt_files_are_ignored() {
        let dir = scratch_dir("corrupt");
        let mut cache = CountCache::new();
        cache.ensure(25, 4).unwrap();
        store_cache_in(&dir, &cache);
        let path = dir.join(segment_name(25, 4));
        // flip one byte in the middle: the checksum catches it
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_cache_from(&dir, 25, 4).is_none());
        // garbage with a valid-looking name
        std::fs::write(dir.join(segment_name(99, 9)), b"not a segment").unwrap();
        assert!(load_cache_from(&dir, 50, 7).is_none());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn truncated_and_padded_files_fail_decode() {
        let dir = scratch_dir("shape");
        let mut cache = CountCache::new();
        cache.ensure(15, 3).unwrap();
        store_cache_in(&dir, &cache);
        let path = dir.join(segment_name(15, 3));
        let bytes = std::fs::read(&path).unwrap();
        assert!(decode(&bytes[..bytes.len() - 9]).is_none());
        let mut padded = bytes.clone();
        padded.splice(bytes.len() - 8..bytes.len() - 8, [0u8; 4]);
        assert!(decode(&padded).is_none());
        assert!(decode(&bytes).is_some());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
