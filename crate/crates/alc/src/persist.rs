//! Binary index files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! header   "ALC1" | version u32 | t u32 | K u32 | d u32 | n u64 | seed u64
//!          | mode u32 | flags u32 (bit 0: labels present)
//! table k  t*d f64 plane coordinates, row = plane
//!          | buckets u32 | per non-empty bucket, addresses ascending:
//!            address u32 | count u32 | count ids u32, ascending
//! labels   n times: length u32 | UTF-8 bytes        (only when flagged)
//! ```
//!
//! Dense counts are rebuilt on load according to the stored mode.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use alc_core::counts::BucketTable;
use alc_core::index::LshTable;
use alc_core::{CountsMode, HyperplaneSet, IndexParams, LshIndex};

use crate::error::{AlcError, Result};

pub const MAGIC: &[u8; 4] = b"ALC1";
pub const VERSION: u32 = 1;

const FLAG_LABELS: u32 = 1;

pub fn write_index<W: Write>(index: &LshIndex, mut out: W) -> io::Result<()> {
    let p = index.params();
    out.write_all(MAGIC)?;
    for v in [VERSION, p.t, p.tables, index.dim() as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&(index.n() as u64).to_le_bytes())?;
    out.write_all(&p.seed.to_le_bytes())?;
    out.write_all(&p.mode.code().to_le_bytes())?;
    let flags = if index.labels().is_some() { FLAG_LABELS } else { 0 };
    out.write_all(&flags.to_le_bytes())?;
    for table in index.tables() {
        for c in table.planes().coords() {
            out.write_all(&c.to_le_bytes())?;
        }
        let buckets = table.buckets();
        out.write_all(&(buckets.nonempty_buckets() as u32).to_le_bytes())?;
        for (addr, ids) in buckets.buckets() {
            out.write_all(&addr.to_le_bytes())?;
            out.write_all(&(ids.len() as u32).to_le_bytes())?;
            for id in ids {
                out.write_all(&id.to_le_bytes())?;
            }
        }
    }
    if let Some(labels) = index.labels() {
        for l in labels {
            out.write_all(&(l.len() as u32).to_le_bytes())?;
            out.write_all(l.as_bytes())?;
        }
    }
    Ok(())
}

pub fn index_to_bytes(index: &LshIndex) -> Vec<u8> {
    let mut buf = Vec::new();
    write_index(index, &mut buf).expect("writing to memory");
    buf
}

pub fn save_index(index: &LshIndex, path: &Path) -> Result<()> {
    fs::write(path, index_to_bytes(index)).map_err(|e| AlcError::io(path, e))
}

pub fn load_index(path: &Path) -> Result<LshIndex> {
    let bytes = fs::read(path).map_err(|e| AlcError::io(path, e))?;
    read_index(&bytes, path)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    section: String,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn fail(&self, msg: impl Into<String>) -> AlcError {
        AlcError::Format {
            path: self.path.to_path_buf(),
            section: self.section.clone(),
            msg: msg.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.fail(format!("truncated at byte {}", self.bytes.len()))),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses an index from `bytes`; `path` only labels errors.
pub fn read_index(bytes: &[u8], path: &Path) -> Result<LshIndex> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        section: "header".into(),
        path,
    };
    if c.take(4)? != MAGIC {
        return Err(c.fail("bad magic"));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(AlcError::UnsupportedVersion {
            path: path.to_path_buf(),
            found: version,
            expected: VERSION,
        });
    }
    let t = c.u32()?;
    let k = c.u32()?;
    let d = c.u32()? as usize;
    let n = c.u64()?;
    let seed = c.u64()?;
    let mode_code = c.u32()?;
    let flags = c.u32()?;
    let mode = CountsMode::from_code(mode_code).ok_or_else(|| c.fail(format!("unknown counts mode {mode_code}")))?;
    if n == 0 || n > u32::MAX as u64 {
        return Err(c.fail(format!("element count {n} out of range")));
    }
    if flags & !FLAG_LABELS != 0 {
        return Err(c.fail(format!("unknown flags {flags:#x}")));
    }
    let params = IndexParams::new(t, k, seed, mode)?;
    let n = n as usize;
    let mut tables = Vec::with_capacity(k as usize);
    for kk in 0..k {
        c.section = format!("table {kk} planes");
        let coords = (0..t as usize * d).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
        let planes = HyperplaneSet::from_planes(t, d, seed, coords)?;
        c.section = format!("table {kk} buckets");
        let count = c.u32()?;
        let mut map = BTreeMap::new();
        let mut prev: Option<u32> = None;
        for _ in 0..count {
            let addr = c.u32()?;
            if prev.is_some_and(|p| p >= addr) {
                return Err(c.fail("bucket addresses not ascending"));
            }
            prev = Some(addr);
            let size = c.u32()? as usize;
            if size > n {
                return Err(c.fail(format!("bucket of {size} elements exceeds n = {n}")));
            }
            let ids = (0..size).map(|_| c.u32()).collect::<Result<Vec<_>>>()?;
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(c.fail("element ids not ascending"));
            }
            map.insert(addr, ids);
        }
        let buckets = BucketTable::from_buckets(t, n, map).map_err(|e| c.fail(e.to_string()))?;
        tables.push(LshTable::from_parts(planes, buckets, mode)?);
    }
    let labels = if flags & FLAG_LABELS != 0 {
        c.section = "labels".into();
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let len = c.u32()? as usize;
            let raw = c.take(len)?;
            let s = std::str::from_utf8(raw).map_err(|_| c.fail("label is not UTF-8"))?;
            labels.push(s.to_owned());
        }
        Some(labels)
    } else {
        None
    };
    c.section = "end of file".into();
    if c.pos != bytes.len() {
        return Err(c.fail(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(LshIndex::from_tables(params, d, tables, labels)?)
}

/// Reads a whole stream and parses it.
pub fn read_index_from<R: Read>(mut r: R, path: &Path) -> Result<LshIndex> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(|e| AlcError::io(path, e))?;
    read_index(&buf, path)
}
