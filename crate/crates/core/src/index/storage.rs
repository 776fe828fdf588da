//! On-disk index format.
//!
//! An index directory holds `index.gir` plus a human-readable `stats.txt`
//! (`key=value` lines). The binary layout is:
//!
//! ```text
//! magic (8 bytes) | version (u32 le) | payload | sha256(all preceding)
//! ```
//!
//! The payload stores the document table followed by the term dictionary;
//! postings carry delta-encoded doc ids and varint term frequencies. The
//! trailing checksum is verified before the payload is touched, so a
//! flipped byte surfaces as a checksum error rather than garbage data.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::builder::write_varint;
use super::{DocEntry, Index, Posting, TermEntry};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GIRIDX\0\0";
const VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;
const INDEX_FILE: &str = "index.gir";
const STATS_FILE: &str = "stats.txt";

pub(super) fn save(index: &Index, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let stats = index.stats();
    let mut summary = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(summary, "N={}", stats.num_docs);
    let _ = writeln!(summary, "TC={}", stats.total_tokens);
    let _ = writeln!(summary, "avg_l={}", stats.avg_doc_len());
    let _ = writeln!(summary, "vocab={}", stats.vocab_size);
    std::fs::write(dir.join(STATS_FILE), summary)?;

    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());

    write_varint(&mut buf, index.num_docs())?;
    write_varint(&mut buf, index.total_tokens)?;
    for doc in &index.docs {
        write_varint(&mut buf, doc.docno.len() as u64)?;
        buf.write_all(doc.docno.as_bytes())?;
        write_varint(&mut buf, doc.len)?;
    }
    write_varint(&mut buf, index.vocab_size())?;
    for (term, entry) in &index.terms {
        write_varint(&mut buf, term.len() as u64)?;
        buf.write_all(term.as_bytes())?;
        write_varint(&mut buf, entry.postings.len() as u64)?;
        let mut prev = 0u32;
        for p in &entry.postings {
            write_varint(&mut buf, u64::from(p.doc_id - prev))?;
            write_varint(&mut buf, u64::from(p.tf))?;
            prev = p.doc_id;
        }
    }

    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    std::fs::write(dir.join(INDEX_FILE), buf)?;
    Ok(())
}

pub(super) fn load(dir: &Path) -> Result<Index> {
    let path = dir.join(INDEX_FILE);
    if !path.is_file() {
        return Err(Error::IndexMissing(dir.to_path_buf()));
    }
    let bytes = std::fs::read(&path)?;
    if bytes.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
        return Err(Error::IndexTruncated);
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::IndexBadMagic);
    }
    let (body, stored) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body)[..] != stored[..] {
        return Err(Error::IndexChecksum);
    }
    let version = u32::from_le_bytes(body[MAGIC.len()..MAGIC.len() + 4].try_into().unwrap());
    if version != VERSION {
        return Err(Error::IndexVersion {
            found: version,
            expected: VERSION,
        });
    }

    let mut cursor = Cursor {
        bytes: body,
        pos: MAGIC.len() + 4,
    };
    let num_docs = cursor.varint()?;
    let total_tokens = cursor.varint()?;
    let mut docs = Vec::with_capacity(num_docs as usize);
    for _ in 0..num_docs {
        let docno = cursor.string()?;
        let len = cursor.varint()?;
        docs.push(DocEntry { docno, len });
    }
    let vocab = cursor.varint()?;
    let mut terms = BTreeMap::new();
    for _ in 0..vocab {
        let term = cursor.string()?;
        let count = cursor.varint()?;
        let mut postings = Vec::with_capacity(count as usize);
        let mut doc_id = 0u32;
        let mut cf = 0u64;
        for i in 0..count {
            let gap = cursor.varint()? as u32;
            let tf = cursor.varint()? as u32;
            doc_id = if i == 0 { gap } else { doc_id + gap };
            cf += u64::from(tf);
            postings.push(Posting { doc_id, tf });
        }
        terms.insert(term, TermEntry { cf, postings });
    }
    if cursor.pos != body.len() {
        return Err(Error::IndexTruncated);
    }
    Ok(Index::from_parts(total_tokens, docs, terms))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn varint(&mut self) -> Result<u64> {
        let mut value = 0u64;
        let mut shift = 0u32;
        loop {
            let byte = *self.bytes.get(self.pos).ok_or(Error::IndexTruncated)?;
            self.pos += 1;
            value |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
            shift += 7;
            if shift >= 64 {
                return Err(Error::IndexTruncated);
            }
        }
    }

    fn string(&mut self) -> Result<String> {
        let len = self.varint()? as usize;
        let end = self.pos.checked_add(len).ok_or(Error::IndexTruncated)?;
        if end > self.bytes.len() {
            return Err(Error::IndexTruncated);
        }
        let s =
            std::str::from_utf8(&self.bytes[self.pos..end]).map_err(|_| Error::IndexTruncated)?;
        self.pos = end;
        Ok(s.to_string())
    }
}
