use std::io::{BufRead, Read, Write};
use std::path::Path;

use super::{EmbeddingModel, TrainConfig, Vocab};
use crate::error::{Error, Result};

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut num = || -> Result<usize> {
        it.next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad vector header {line:?}")))
    };
    let (v, d) = (num()?, num()?);
    if d == 0 {
        return Err(Error::Format("vector dimension is zero".into()));
    }
    Ok((v, d))
}

fn assemble(words: Vec<String>, input: Vec<f32>, dim: usize) -> Result<EmbeddingModel> {
    let n = words.len();
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = words.iter().find(|w| !seen.insert(w.as_str())) {
        return Err(Error::Format(format!("duplicate token {dup}")));
    }
    Ok(EmbeddingModel {
        vocab: Vocab::from_parts(words, vec![0; n]),
        input,
        output: vec![0.0; n * dim],
        config: TrainConfig {
            dim,
            ..TrainConfig::default()
        },
    })
}

impl EmbeddingModel {
    /// Text format: `<vocab_size> <dim>`, then `token v1 ... vdim` per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (i, word) in self.vocab.words().iter().enumerate() {
            write!(w, "{word}")?;
            for x in self.row(i) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.ok_or_else(|| Error::Format("empty vector file".into()))?;
        let (v, dim) = parse_header(&header)?;
        let mut words = Vec::with_capacity(v);
        let mut input = Vec::with_capacity(v * dim);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().unwrap_or_default().to_string();
            let vals: Vec<f32> = parts
                .filter(|p| !p.is_empty())
                .map(|p| p.parse().map_err(|_| Error::Format(format!("bad number {p:?}"))))
                .collect::<Result<_>>()?;
            if vals.len() != dim {
                return Err(Error::Format(format!("{word}: expected {dim} values, got {}", vals.len())));
            }
            words.push(word);
            input.extend(vals);
        }
        if words.len() != v {
            return Err(Error::Format(format!("header says {v} tokens, found {}", words.len())));
        }
        assemble(words, input, dim)
    }

    /// Binary format: the same header line, then per token the word, a
    /// space, `dim` little-endian f32 values and a newline.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (i, word) in self.vocab.words().iter().enumerate() {
            w.write_all(word.as_bytes())?;
            w.write_all(b" ")?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(reader: R) -> Result<Self> {
        let mut r = std::io::BufReader::new(reader);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let (v, dim) = parse_header(&header)?;
        let mut words = Vec::with_capacity(v);
        let mut input = Vec::with_capacity(v * dim);
        let mut buf = [0u8; 4];
        for _ in 0..v {
            let mut word = Vec::new();
            r.read_until(b' ', &mut word)?;
            if word.pop() != Some(b' ') {
                return Err(Error::Format("truncated binary vectors".into()));
            }
            let start = word.iter().position(|b| *b != b'\n').unwrap_or(word.len());
            let word = String::from_utf8(word[start..].to_vec()).map_err(|_| Error::Format("token is not UTF-8".into()))?;
            for _ in 0..dim {
                r.read_exact(&mut buf)?;
                input.push(f32::from_le_bytes(buf));
            }
            words.push(word);
        }
        assemble(words, input, dim)
    }

    /// Saves by extension: `.bin` writes binary, anything else text.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path.extension().is_some_and(|e| e == "bin") {
            self.write_binary(f)
        } else {
            self.write_text(f)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "bin") {
            Self::read_binary(f)
        } else {
            Self::read_text(std::io::BufReader::new(f))
        }
    }
}
