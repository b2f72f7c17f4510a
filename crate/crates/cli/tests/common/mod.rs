//! Shared fixtures for the CLI and acceptance tests: a synthetic mini-wiki
//! with planted topic clusters, and a large random embedding file for the
//! latency checks.

#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use areatopics::formats;
use areatopics_core::embedding::EmbeddingMatrix;

/// The compiled `areatopics` binary.
pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_areatopics"))
}

pub struct MiniWiki {
    pub dir: tempfile::TempDir,
    pub titles: PathBuf,
    pub documents: PathBuf,
    pub edges: PathBuf,
    pub gold: PathBuf,
    /// Raw area title as a human would type it.
    pub area_raw: &'static str,
    /// Normalized area phrase.
    pub area: &'static str,
    /// Normalized topic phrases per cluster; cluster 0 is the planted
    /// "representative" set sitting at depth 1 under the area.
    pub clusters: Vec<Vec<String>>,
}

/// Synthetic knowledge base with three topic clusters that co-occur only
/// internally.  Cluster 0 hangs directly under the area in the category
/// graph and its documents mention the area, so both the graph and the
/// embeddings point at it; clusters 1 and 2 are reachable distractors whose
/// members sit at depth 2.
pub fn mini_wiki(per_cluster: usize, n_docs: usize, seed: u64) -> MiniWiki {
    let dir = tempfile::tempdir().unwrap();
    let names = ["alpha", "beta", "gamma"];
    let clusters: Vec<Vec<String>> = names
        .iter()
        .map(|name| (0..per_cluster).map(|i| format!("{name}_topic_{i:02}")).collect())
        .collect();

    // Titles in raw, un-normalized form.
    let mut titles = String::from("Machine Cognition\n");
    for cluster in &clusters {
        for phrase in cluster {
            titles.push_str(&title_case(phrase));
            titles.push('\n');
        }
    }
    let titles_path = dir.path().join("titles.txt");
    fs::write(&titles_path, titles).unwrap();

    // Category graph: cluster 0 at depth 1; clusters 1 and 2 behind a hub
    // topic each, so their members land at depth 2.
    let mut edges = String::new();
    for phrase in &clusters[0] {
        edges.push_str(&format!("Machine Cognition\t{}\n", title_case(phrase)));
    }
    for cluster in &clusters[1..] {
        edges.push_str(&format!("Machine Cognition\t{}\n", title_case(&cluster[0])));
        for phrase in &cluster[1..] {
            edges.push_str(&format!("{}\t{}\n", title_case(&cluster[0]), title_case(phrase)));
        }
    }
    let edges_path = dir.path().join("edges.tsv");
    fs::write(&edges_path, edges).unwrap();

    // Documents: each draws from one cluster only; cluster-0 documents
    // mention the area half the time so its vector lands in that cluster.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = String::new();
    for _ in 0..n_docs {
        let c = rng.random_range(0..clusters.len());
        let mut words: Vec<String> = Vec::new();
        if c == 0 && rng.random::<f64>() < 0.5 {
            words.push("machine cognition".to_string());
        }
        let len = rng.random_range(5..=9);
        for _ in 0..len {
            let phrase = &clusters[c][rng.random_range(0..per_cluster)];
            words.push(phrase.replace('_', " "));
        }
        documents.push_str(&words.join(" "));
        documents.push('\n');
    }
    let documents_path = dir.path().join("documents.txt");
    fs::write(&documents_path, documents).unwrap();

    // Gold list: exactly the planted cluster.
    let mut gold = String::new();
    for (i, phrase) in clusters[0].iter().enumerate() {
        gold.push_str(&format!("machine_cognition\t{}\t{phrase}\n", i + 1));
    }
    let gold_path = dir.path().join("gold.tsv");
    fs::write(&gold_path, gold).unwrap();

    MiniWiki {
        dir,
        titles: titles_path,
        documents: documents_path,
        edges: edges_path,
        gold: gold_path,
        area_raw: "Machine Cognition",
        area: "machine_cognition",
        clusters,
    }
}

fn title_case(phrase: &str) -> String {
    phrase
        .split('_')
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub struct LatencyFixture {
    pub dir: tempfile::TempDir,
    pub embeddings: PathBuf,
    pub lexicon: PathBuf,
    pub categories: PathBuf,
    pub area: &'static str,
    pub expected_candidates: usize,
    pub expected_contributive: usize,
}

/// A `vocab`-row random embedding file plus a category graph giving the area
/// `direct_children` depth-1 topics and enough depth-2 topics to reach
/// `candidates` in total.
pub fn latency_fixture(
    vocab: usize,
    dim: usize,
    direct_children: usize,
    candidates: usize,
    seed: u64,
) -> LatencyFixture {
    assert!(candidates >= direct_children && candidates < vocab);
    let dir = tempfile::tempdir().unwrap();

    let mut lexicon = String::from("area_root\t0\t1\n");
    for i in 1..vocab {
        lexicon.push_str(&format!("topic_{i:05}\t{i}\t1\n"));
    }
    let lexicon_path = dir.path().join("model.lexicon.tsv");
    fs::write(&lexicon_path, lexicon).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..vocab * dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let matrix = EmbeddingMatrix::from_input_vectors(dim, flat).unwrap();
    let embeddings_path = dir.path().join("model.fkte");
    formats::write_embeddings(&embeddings_path, &matrix).unwrap();

    let mut edges = String::new();
    for i in 1..=direct_children {
        edges.push_str(&format!("area_root\ttopic_{i:05}\n"));
    }
    for i in direct_children + 1..=candidates {
        edges.push_str(&format!("topic_00001\ttopic_{i:05}\n"));
    }
    let categories_path = dir.path().join("edges.tsv");
    fs::write(&categories_path, edges).unwrap();

    LatencyFixture {
        dir,
        embeddings: embeddings_path,
        lexicon: lexicon_path,
        categories: categories_path,
        area: "area_root",
        expected_candidates: candidates,
        expected_contributive: direct_children + 1,
    }
}
