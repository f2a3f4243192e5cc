//! Little-endian primitives for the binary model files.

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::corpus::{TokenMode, VocabStats, Vocabulary};
use crate::error::{Error, Result};

// Refuse absurd lengths from corrupted files before allocating.
const MAX_LEN: u64 = 1 << 32;

pub fn write_header<W: Write>(w: &mut W, magic: &[u8; 8], version: u32) -> Result<()> {
    w.write_all(magic)?;
    w.write_u32::<LE>(version)?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R, magic: &[u8; 8], version: u32) -> Result<()> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    let v = r.read_u32::<LE>()?;
    if v != version {
        return Err(Error::Format(format!("unsupported version {v}, expected {version}")));
    }
    Ok(())
}

pub fn write_len<W: Write>(w: &mut W, n: usize) -> Result<()> {
    w.write_u64::<LE>(n as u64)?;
    Ok(())
}

pub fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let n = r.read_u64::<LE>()?;
    if n > MAX_LEN {
        return Err(Error::Format(format!("length {n} out of range")));
    }
    Ok(n as usize)
}

pub fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    write_len(w, s.len())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let n = read_len(r)?;
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_f32s<W: Write>(w: &mut W, xs: &[f32]) -> Result<()> {
    write_len(w, xs.len())?;
    for &x in xs {
        w.write_f32::<LE>(x)?;
    }
    Ok(())
}

pub fn read_f32s<R: Read>(r: &mut R) -> Result<Vec<f32>> {
    let n = read_len(r)?;
    let mut out = vec![0f32; n];
    r.read_f32_into::<LE>(&mut out)?;
    Ok(out)
}

pub fn write_u32s<W: Write>(w: &mut W, xs: &[u32]) -> Result<()> {
    write_len(w, xs.len())?;
    for &x in xs {
        w.write_u32::<LE>(x)?;
    }
    Ok(())
}

pub fn read_u32s<R: Read>(r: &mut R) -> Result<Vec<u32>> {
    let n = read_len(r)?;
    let mut out = vec![0u32; n];
    r.read_u32_into::<LE>(&mut out)?;
    Ok(out)
}

pub fn write_vocabulary<W: Write>(w: &mut W, vocab: &Vocabulary) -> Result<()> {
    w.write_u8(match vocab.mode() {
        TokenMode::FullNames => 0,
        TokenMode::Subtokens => 1,
    })?;
    w.write_u64::<LE>(vocab.min_count())?;
    let s = vocab.stats();
    for v in [s.sequences, s.tokens, s.types, s.tokens_kept, s.types_kept] {
        w.write_u64::<LE>(v)?;
    }
    write_len(w, vocab.len())?;
    for (tok, &f) in vocab.tokens().iter().zip(vocab.freqs()) {
        write_str(w, tok)?;
        w.write_u64::<LE>(f)?;
    }
    Ok(())
}

pub fn read_vocabulary<R: Read>(r: &mut R) -> Result<Vocabulary> {
    let mode = match r.read_u8()? {
        0 => TokenMode::FullNames,
        1 => TokenMode::Subtokens,
        m => return Err(Error::Format(format!("unknown token mode {m}"))),
    };
    let min_count = r.read_u64::<LE>()?;
    let mut st = [0u64; 5];
    for v in &mut st {
        *v = r.read_u64::<LE>()?;
    }
    let stats = VocabStats {
        sequences: st[0],
        tokens: st[1],
        types: st[2],
        tokens_kept: st[3],
        types_kept: st[4],
    };
    let n = read_len(r)?;
    let mut tokens = Vec::with_capacity(n);
    let mut freqs = Vec::with_capacity(n);
    for _ in 0..n {
        tokens.push(read_str(r)?);
        freqs.push(r.read_u64::<LE>()?);
    }
    Vocabulary::from_parts(tokens, freqs, min_count, mode, stats)
}
