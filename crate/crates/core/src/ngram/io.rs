//! Binary n-gram model files.
//!
//! Layout (little-endian): magic `CRNGRAM\0`, version, order, smoothing
//! kind/lambda/discount, vocabulary, then one record per trie node in
//! depth-first token order: the node's reversed context and its
//! `(token, count)` followers. Continuation counts are derived on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{CountTrie, NGramModel, SmoothingConfig, SmoothingKind};
use crate::codec;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CRNGRAM\0";
const VERSION: u32 = 1;

impl NGramModel {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        codec::write_header(w, MAGIC, VERSION)?;
        w.write_u32::<LE>(self.order() as u32)?;
        let sm = self.smoothing();
        w.write_u8(match sm.kind {
            SmoothingKind::Mle => 0,
            SmoothingKind::JelinekMercer => 1,
            SmoothingKind::KneserNey => 2,
        })?;
        w.write_f64::<LE>(sm.lambda)?;
        w.write_f64::<LE>(sm.discount)?;
        codec::write_vocabulary(w, self.vocab())?;

        type Followers = Vec<(u32, u64)>;
        let mut records: Vec<(Vec<u32>, Followers)> = Vec::new();
        self.trie().visit(|ctx, node| {
            records.push((ctx.to_vec(), node.followers.iter().map(|(&k, &v)| (k, v)).collect()));
        });
        codec::write_len(w, records.len())?;
        for (ctx, followers) in records {
            codec::write_u32s(w, &ctx)?;
            codec::write_len(w, followers.len())?;
            for (tok, n) in followers {
                w.write_u32::<LE>(tok)?;
                w.write_u64::<LE>(n)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        codec::read_header(r, MAGIC, VERSION)?;
        let order = r.read_u32::<LE>()? as usize;
        let kind = match r.read_u8()? {
            0 => SmoothingKind::Mle,
            1 => SmoothingKind::JelinekMercer,
            2 => SmoothingKind::KneserNey,
            k => return Err(Error::Format(format!("unknown smoothing kind {k}"))),
        };
        let smoothing = SmoothingConfig {
            kind,
            lambda: r.read_f64::<LE>()?,
            discount: r.read_f64::<LE>()?,
        };
        let vocab = codec::read_vocabulary(r)?;
        let mut trie = CountTrie::default();
        let n = codec::read_len(r)?;
        for _ in 0..n {
            let ctx = codec::read_u32s(r)?;
            if ctx.len() >= order {
                return Err(Error::Format(format!(
                    "context of length {} in an order-{order} model",
                    ctx.len()
                )));
            }
            let m = codec::read_len(r)?;
            for _ in 0..m {
                let tok = r.read_u32::<LE>()?;
                let count = r.read_u64::<LE>()?;
                if tok as usize >= vocab.len() {
                    return Err(Error::Format(format!("token id {tok} outside vocabulary")));
                }
                trie.add_exact(&ctx, tok, count);
            }
        }
        trie.rebuild_continuations();
        NGramModel::from_parts(order, vocab, smoothing, trie)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
