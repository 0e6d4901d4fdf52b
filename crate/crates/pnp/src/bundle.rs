//! Versioned binary graph bundle.
//!
//! Layout: magic `PNPGRAPH`, `u32` version, `u64` payload length, payload,
//! then the SHA-256 of the payload. Integers are little-endian `u64`, floats
//! are stored as their IEEE bit patterns so a round trip is bit-exact.

use std::fs;
use std::path::Path;

use pnp_core::graph::{FeatureCatalog, Graph};
use pnp_core::sparse::CsrMatrix;
use pnp_core::IdMap;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const MAGIC: &[u8; 8] = b"PNPGRAPH";
pub const VERSION: u32 = 1;

pub fn encode(graph: &Graph) -> Vec<u8> {
    let mut p = Vec::new();
    for ids in [graph.users(), graph.movies(), graph.features()] {
        put_u64s(&mut p, ids.ids());
    }
    let catalog = graph.catalog();
    put(&mut p, catalog.labels().len() as u64);
    for label in catalog.labels() {
        put(&mut p, label.len() as u64);
        p.extend_from_slice(label.as_bytes());
    }
    let types: Vec<u64> = (0..catalog.len()).map(|k| catalog.type_of(k) as u64).collect();
    put_u64s(&mut p, &types);
    for m in [graph.ratings(), graph.membership()] {
        let (indptr, indices, values) = m.parts();
        put(&mut p, m.rows() as u64);
        put(&mut p, m.cols() as u64);
        put_u64s(&mut p, &indptr.iter().map(|&x| x as u64).collect::<Vec<_>>());
        put_u64s(&mut p, &indices.iter().map(|&x| x as u64).collect::<Vec<_>>());
        put_u64s(&mut p, &values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    let mut out = Vec::with_capacity(p.len() + 52);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put(&mut out, p.len() as u64);
    out.extend_from_slice(&p);
    out.extend_from_slice(&Sha256::digest(&p));
    out
}

pub fn save(graph: &Graph, path: &Path) -> Result<()> {
    fs::write(path, encode(graph)).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<Graph> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|message| CliError::format(path, message))
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Graph, String> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err("not a graph bundle".into());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported bundle version {version} (expected {VERSION})"));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() != len.saturating_add(32) {
        return Err("truncated or oversized bundle".into());
    }
    let (payload, digest) = body.split_at(len);
    if Sha256::digest(payload).as_slice() != digest {
        return Err("content hash mismatch; bundle is corrupt or was modified".into());
    }

    let mut r = Reader { buf: payload };
    let users = id_map(r.u64s()?, "user")?;
    let movies = id_map(r.u64s()?, "movie")?;
    let features = id_map(r.u64s()?, "feature")?;
    let mut labels = Vec::new();
    for _ in 0..r.u64()? {
        let n = r.u64()? as usize;
        let raw = r.take(n)?;
        labels.push(String::from_utf8(raw.to_vec()).map_err(|_| "type label is not UTF-8".to_string())?);
    }
    let types = r.u64s()?.into_iter().map(|t| t as usize).collect();
    let catalog = FeatureCatalog::new(features, types, labels).map_err(|e| e.to_string())?;
    let ratings = r.matrix()?;
    let membership = r.matrix()?;
    if !r.buf.is_empty() {
        return Err("trailing bytes after bundle payload".into());
    }
    Graph::from_parts(users, movies, ratings, membership, catalog).map_err(|e| e.to_string())
}

fn id_map(ids: Vec<u64>, what: &str) -> std::result::Result<IdMap, String> {
    IdMap::from_sorted(ids).ok_or_else(|| format!("{what} ids are not strictly ascending"))
}

fn put(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_u64s(out: &mut Vec<u8>, xs: &[u64]) {
    put(out, xs.len() as u64);
    xs.iter().for_each(|&x| put(out, x));
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if n > self.buf.len() {
            return Err("unexpected end of payload".into());
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u64s(&mut self) -> std::result::Result<Vec<u64>, String> {
        let n = self.u64()? as usize;
        let raw = self.take(n.checked_mul(8).ok_or("length overflow")?)?;
        Ok(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn matrix(&mut self) -> std::result::Result<CsrMatrix, String> {
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        let indptr = self.u64s()?.into_iter().map(|x| x as usize).collect();
        let indices = self.u64s()?.into_iter().map(|x| x as usize).collect();
        let values = self.u64s()?.into_iter().map(f64::from_bits).collect();
        CsrMatrix::from_parts(rows, cols, indptr, indices, values).map_err(|e| e.to_string())
    }
}
