//! Vocabulary files: one JSON header line, then one motif graph per line in
//! vocabulary order.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{graph_from_str, graph_to_string};
use crate::kernel::CompatConfig;

use super::{MotifVocabulary, VocabParams};

const FORMAT_TAG: &str = "motifconv-vocabulary";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabHeader {
    pub format: String,
    pub k: usize,
    /// Preset name, or `custom` for a hand-built kernel configuration.
    pub kernel: String,
    pub alpha: f64,
    pub n_motifs: usize,
    pub seed: Option<u64>,
    pub compat: CompatConfig,
    pub provenance: Vec<usize>,
    #[serde(default)]
    pub params: Option<VocabParams>,
}

impl VocabHeader {
    fn new(v: &MotifVocabulary, params: Option<&VocabParams>) -> Self {
        VocabHeader {
            format: FORMAT_TAG.to_string(),
            k: v.k,
            kernel: v
                .kernel
                .preset()
                .map_or_else(|| "custom".to_string(), |p| p.name().to_string()),
            alpha: v.kernel.alpha,
            n_motifs: v.len(),
            seed: params.map(|p| p.seed),
            compat: v.kernel,
            provenance: v.provenance.clone(),
            params: params.copied(),
        }
    }
}

pub fn write_vocabulary<W: Write>(
    mut out: W,
    v: &MotifVocabulary,
    params: Option<&VocabParams>,
) -> std::io::Result<()> {
    let header =
        serde_json::to_string(&VocabHeader::new(v, params)).expect("headers always serialize");
    writeln!(out, "{header}")?;
    for m in &v.motifs {
        writeln!(out, "{}", graph_to_string(m))?;
    }
    out.flush()
}

pub fn read_vocabulary<R: BufRead>(
    input: R,
    source: &str,
) -> Result<(MotifVocabulary, VocabHeader)> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (format!("{source}:{}", i + 1), l))
        .filter(|(_, l)| l.as_ref().map_or(true, |t| !t.trim().is_empty()));
    let (record, first) = lines.next().ok_or(Error::Empty("vocabulary file"))?;
    let first = first.map_err(|e| Error::parse(&record, e.to_string()))?;
    let header: VocabHeader = serde_json::from_str(&first)
        .map_err(|e| Error::parse(&record, format!("bad vocabulary header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(Error::parse(
            &record,
            format!("unexpected format tag `{}`", header.format),
        ));
    }
    let mut motifs = Vec::new();
    for (record, line) in lines {
        let line = line.map_err(|e| Error::parse(&record, e.to_string()))?;
        motifs.push(graph_from_str(line.trim(), &record)?);
    }
    if motifs.len() != header.n_motifs {
        return Err(Error::parse(
            source,
            format!(
                "header declares {} motifs, file holds {}",
                header.n_motifs,
                motifs.len()
            ),
        ));
    }
    let vocab = MotifVocabulary::new(motifs, header.k, header.compat, header.provenance.clone())?;
    Ok((vocab, header))
}

pub fn save_vocabulary(
    path: impl AsRef<Path>,
    v: &MotifVocabulary,
    params: Option<&VocabParams>,
) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_vocabulary(std::io::BufWriter::new(file), v, params).map_err(|e| Error::io(path, e))
}

pub fn load_vocabulary(path: impl AsRef<Path>) -> Result<(MotifVocabulary, VocabHeader)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_vocabulary(BufReader::new(file), &path.display().to_string())
}
