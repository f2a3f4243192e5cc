//! Binary PV model files.
//!
//! Layout (little-endian): magic `CRPVDBOW`, version, hyper-parameters,
//! vocabulary, documents (source id and token ids), document vectors and
//! node vectors. The Huffman tree is rebuilt from vocabulary frequencies.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::huffman::HuffmanTree;
use super::{Doc, HyperParams, PvModel};
use crate::codec;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CRPVDBOW";
const VERSION: u32 = 1;

impl PvModel {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        codec::write_header(w, MAGIC, VERSION)?;
        let h = &self.hyper;
        w.write_u32::<LE>(h.dim as u32)?;
        w.write_u32::<LE>(h.window as u32)?;
        w.write_u64::<LE>(h.min_count)?;
        w.write_u32::<LE>(h.epochs as u32)?;
        w.write_f32::<LE>(h.alpha0)?;
        w.write_f32::<LE>(h.alpha_min)?;
        w.write_u64::<LE>(h.seed)?;
        w.write_u32::<LE>(h.infer_steps as u32)?;
        codec::write_vocabulary(w, &self.vocab)?;
        codec::write_len(w, self.docs.len())?;
        for d in &self.docs {
            codec::write_str(w, &d.source_id)?;
            codec::write_u32s(w, &d.ids)?;
        }
        codec::write_f32s(w, &self.doc_vectors)?;
        codec::write_f32s(w, &self.node_vectors)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        codec::read_header(r, MAGIC, VERSION)?;
        let hyper = HyperParams {
            dim: r.read_u32::<LE>()? as usize,
            window: r.read_u32::<LE>()? as usize,
            min_count: r.read_u64::<LE>()?,
            epochs: r.read_u32::<LE>()? as usize,
            alpha0: r.read_f32::<LE>()?,
            alpha_min: r.read_f32::<LE>()?,
            seed: r.read_u64::<LE>()?,
            infer_steps: r.read_u32::<LE>()? as usize,
            workers: 1,
        };
        hyper.validate()?;
        let vocab = codec::read_vocabulary(r)?;
        let n = codec::read_len(r)?;
        let mut docs = Vec::with_capacity(n);
        for _ in 0..n {
            let source_id = codec::read_str(r)?;
            let ids = codec::read_u32s(r)?;
            if let Some(&bad) = ids.iter().find(|&&id| id as usize >= vocab.len()) {
                return Err(Error::Format(format!("token id {bad} outside vocabulary")));
            }
            docs.push(Doc { source_id, ids });
        }
        let tree = HuffmanTree::build(vocab.freqs())?;
        let doc_vectors = codec::read_f32s(r)?;
        let node_vectors = codec::read_f32s(r)?;
        if doc_vectors.len() != docs.len() * hyper.dim {
            return Err(Error::Format(format!(
                "{} document values for {} documents of dim {}",
                doc_vectors.len(),
                docs.len(),
                hyper.dim
            )));
        }
        if node_vectors.len() != tree.num_internal() * hyper.dim {
            return Err(Error::Format(format!(
                "{} node values for {} internal nodes of dim {}",
                node_vectors.len(),
                tree.num_internal(),
                hyper.dim
            )));
        }
        let mut model = PvModel {
            hyper,
            vocab,
            tree,
            docs,
            doc_vectors,
            node_vectors,
            norms: Vec::new(),
        };
        model.refresh_norms();
        Ok(model)
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

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        buf
    }
}
