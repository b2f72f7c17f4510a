//! On-disk formats: TSV files (lexicon, category edges, gold lists, results,
//! reports), the space-separated tokenized corpus, and the FKTE embedding
//! binary.  Parse errors carry `path:line` so the CLI can point at the
//! offending row.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use areatopics_core::embedding::EmbeddingMatrix;
use areatopics_core::lexicon::{TokenizedCorpus, TopicLexicon};

pub const EMBEDDING_MAGIC: [u8; 4] = *b"FKTE";
pub const EMBEDDING_VERSION: u32 = 1;

/// Lexicon TSV: `phrase \t id \t frequency`, rows sorted by id from 0.
pub fn read_lexicon(path: &Path) -> Result<TopicLexicon> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading lexicon {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let mut cols = line.split('\t');
        let (Some(phrase), Some(id), Some(frequency), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            bail!("{}:{}: expected 3 tab-separated columns", path.display(), n);
        };
        let id: usize = id
            .parse()
            .with_context(|| format!("{}:{}: bad id `{id}`", path.display(), n))?;
        if id != i {
            bail!("{}:{}: id {} out of order (expected {})", path.display(), n, id, i);
        }
        let frequency: u64 = frequency
            .parse()
            .with_context(|| format!("{}:{}: bad frequency `{frequency}`", path.display(), n))?;
        rows.push((phrase.to_string(), frequency));
    }
    TopicLexicon::from_rows(rows).with_context(|| format!("invalid lexicon {}", path.display()))
}

pub fn write_lexicon(path: &Path, lexicon: &TopicLexicon) -> Result<()> {
    let mut out = String::new();
    for (id, phrase, frequency) in lexicon.entries() {
        out.push_str(&format!("{phrase}\t{id}\t{frequency}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing lexicon {}", path.display()))
}

/// Tokenized corpus: one document per line, topic phrases joined by single
/// spaces.  Phrases must exist in `lexicon`; blank lines are skipped.
pub fn read_corpus(path: &Path, lexicon: &TopicLexicon) -> Result<TokenizedCorpus> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading corpus {}", path.display()))?;
    let mut documents = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut document = Vec::new();
        for phrase in line.split(' ').filter(|p| !p.is_empty()) {
            let id = lexicon.id(phrase).with_context(|| {
                format!("{}:{}: phrase `{phrase}` not in the lexicon", path.display(), i + 1)
            })?;
            document.push(id);
        }
        documents.push(document);
    }
    Ok(TokenizedCorpus::from_documents(documents))
}

pub fn write_corpus(path: &Path, corpus: &TokenizedCorpus, lexicon: &TopicLexicon) -> Result<()> {
    let mut out = String::new();
    for document in corpus.documents() {
        for (i, &t) in document.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(lexicon.phrase(t).context("corpus id outside the lexicon")?);
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing corpus {}", path.display()))
}

/// Category edges TSV: `parent_phrase \t child_phrase` per row.  No
/// normalization or lexicon checks here; ingestion handles both.
pub fn read_edges(path: &Path) -> Result<Vec<(String, String)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading edges {}", path.display()))?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut cols = line.split('\t');
        let (Some(parent), Some(child), None) = (cols.next(), cols.next(), cols.next()) else {
            bail!("{}:{}: expected 2 tab-separated columns", path.display(), i + 1);
        };
        edges.push((parent.to_string(), child.to_string()));
    }
    Ok(edges)
}

pub fn write_edges(path: &Path, edges: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (parent, child) in edges {
        out.push_str(&format!("{parent}\t{child}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing edges {}", path.display()))
}

/// FKTE binary: magic `FKTE`, version u32, vocab_count u64, dim u32 (all
/// little-endian), then vocab_count rows of dim f32 input-vector values.
/// Row index = topic id in the accompanying lexicon TSV.
pub fn write_embeddings(path: &Path, matrix: &EmbeddingMatrix) -> Result<()> {
    let rows = matrix.rows();
    let dim = matrix.dim();
    let mut bytes = Vec::with_capacity(20 + rows * dim * 4);
    bytes.extend_from_slice(&EMBEDDING_MAGIC);
    bytes.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(rows as u64).to_le_bytes());
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    for x in matrix.input_rows() {
        bytes.extend_from_slice(&(*x as f32).to_le_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("writing embeddings {}", path.display()))
}

/// Unit vectors are rebuilt on load, so queries work straight away.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes =
        fs::read(path).with_context(|| format!("reading embeddings {}", path.display()))?;
    let header_err = || format!("{}: not an FKTE embedding file", path.display());
    if bytes.len() < 20 {
        bail!("{}: truncated header ({} bytes)", path.display(), bytes.len());
    }
    if bytes[0..4] != EMBEDDING_MAGIC {
        bail!(header_err());
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != EMBEDDING_VERSION {
        bail!("{}: unsupported version {version}", path.display());
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let expected = 20u64
        .checked_add(rows.checked_mul(dim as u64).and_then(|c| c.checked_mul(4)).context(
            "embedding dimensions overflow",
        )?)
        .context("embedding dimensions overflow")?;
    if bytes.len() as u64 != expected {
        bail!(
            "{}: expected {} bytes for {} x {} vectors, found {}",
            path.display(),
            expected,
            rows,
            dim,
            bytes.len()
        );
    }
    let mut input = Vec::with_capacity((rows * dim as u64) as usize);
    for chunk in bytes[20..].chunks_exact(4) {
        input.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
    }
    EmbeddingMatrix::from_input_vectors(dim as usize, input)
        .with_context(|| format!("invalid embeddings in {}", path.display()))
}

/// One row of a gold-list file: `area_phrase \t rank \t topic_phrase`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRow {
    pub area: String,
    pub rank: u64,
    pub topic: String,
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldRow>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading gold list {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let mut cols = line.split('\t');
        let (Some(area), Some(rank), Some(topic), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            bail!("{}:{}: expected 3 tab-separated columns", path.display(), n);
        };
        let rank: u64 = rank
            .parse()
            .with_context(|| format!("{}:{}: bad rank `{rank}`", path.display(), n))?;
        rows.push(GoldRow { area: area.to_string(), rank, topic: topic.to_string() });
    }
    Ok(rows)
}

/// Alias file: `phrase \t canonical_phrase`, mapping near-duplicates onto one
/// canonical form before matching.
pub fn read_aliases(path: &Path) -> Result<Vec<(String, String)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading aliases {}", path.display()))?;
    let mut aliases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut cols = line.split('\t');
        let (Some(phrase), Some(canonical), None) = (cols.next(), cols.next(), cols.next()) else {
            bail!("{}:{}: expected 2 tab-separated columns", path.display(), i + 1);
        };
        aliases.push((phrase.to_string(), canonical.to_string()));
    }
    Ok(aliases)
}

/// One row of an extraction or baseline result: `rank \t phrase \t score`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub rank: u64,
    pub phrase: String,
    pub score: f64,
}

/// Result files end with `elapsed_seconds \t <float>` unless the run was
/// deterministic (timing would break byte-for-byte reproducibility).
pub fn write_result<W: Write>(
    mut w: W,
    rows: &[ResultRow],
    elapsed_seconds: Option<f64>,
) -> Result<()> {
    for row in rows {
        writeln!(w, "{}\t{}\t{}", row.rank, row.phrase, row.score)?;
    }
    if let Some(elapsed) = elapsed_seconds {
        writeln!(w, "elapsed_seconds\t{elapsed}")?;
    }
    Ok(())
}

pub fn read_result(path: &Path) -> Result<(Vec<ResultRow>, Option<f64>)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading results {}", path.display()))?;
    let mut rows = Vec::new();
    let mut elapsed = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(rest) = line.strip_prefix("elapsed_seconds\t") {
            elapsed = Some(rest.parse().with_context(|| {
                format!("{}:{}: bad elapsed value `{rest}`", path.display(), n)
            })?);
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(rank), Some(phrase), Some(score), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            bail!("{}:{}: expected 3 tab-separated columns", path.display(), n);
        };
        let rank: u64 = rank
            .parse()
            .with_context(|| format!("{}:{}: bad rank `{rank}`", path.display(), n))?;
        let score: f64 = score
            .parse()
            .with_context(|| format!("{}:{}: bad score `{score}`", path.display(), n))?;
        rows.push(ResultRow { rank, phrase: phrase.to_string(), score });
    }
    Ok((rows, elapsed))
}

/// One evaluated (dataset, area, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub area: String,
    pub method: String,
    pub precision_at_k: f64,
    pub average_precision: f64,
}

/// Report TSV: one row per cell, then a `MAP \t <float>` summary line
/// averaging the listed APs.
pub fn write_report<W: Write>(mut w: W, rows: &[ReportRow], map: Option<f64>) -> Result<()> {
    for row in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            row.dataset, row.area, row.method, row.precision_at_k, row.average_precision
        )?;
    }
    if let Some(map) = map {
        writeln!(w, "MAP\t{map}")?;
    }
    Ok(())
}
