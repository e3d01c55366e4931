//! Motif vocabulary construction.
//!
//! Centered k-hop subgraphs are sampled from a dataset, clustered by matcher
//! similarity with average linkage, and each cluster is represented by its
//! medoid. Sample sets larger than `partition_size` are first shuffled and cut
//! into batches; each batch is reduced to `per_partition_keep` medoids and the
//! procedure repeats on the pooled medoids until one batch remains.

mod cluster;
mod file;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{k_hop_nodes, k_hop_subgraph, ArgGraph};
use crate::kernel::CompatConfig;
use crate::matching::{pairwise_similarity, MatchParams};

pub use cluster::{average_linkage_cluster, members_by_label, select_medoid};
pub use file::{load_vocabulary, read_vocabulary, save_vocabulary, write_vocabulary, VocabHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabParams {
    /// Neighborhood radius of sampled subgraphs.
    pub k: usize,
    pub sample_target: usize,
    pub n_motifs: usize,
    /// Largest sample set clustered in one batch.
    pub partition_size: usize,
    /// Medoids kept from each batch in the partition-merge path.
    pub per_partition_keep: usize,
    pub seed: u64,
}

impl Default for VocabParams {
    fn default() -> Self {
        VocabParams {
            k: 1,
            sample_target: 300,
            n_motifs: 5,
            partition_size: 1000,
            per_partition_keep: 50,
            seed: 0,
        }
    }
}

impl VocabParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if self.k == 0 {
            return bad("k must be >= 1");
        }
        if self.n_motifs == 0 {
            return bad("n_motifs must be >= 1");
        }
        if self.n_motifs > self.sample_target {
            return bad("n_motifs must not exceed sample_target");
        }
        if self.partition_size < 2 {
            return bad("partition_size must be >= 2");
        }
        if self.per_partition_keep == 0 || self.per_partition_keep >= self.partition_size {
            return bad("per_partition_keep must lie in 1..partition_size");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotifVocabulary {
    pub motifs: Vec<ArgGraph>,
    pub k: usize,
    pub kernel: CompatConfig,
    /// Number of sampled subgraphs each motif stands for.
    pub provenance: Vec<usize>,
}

impl MotifVocabulary {
    pub fn new(
        motifs: Vec<ArgGraph>,
        k: usize,
        kernel: CompatConfig,
        provenance: Vec<usize>,
    ) -> Result<Self> {
        if motifs.is_empty() {
            return Err(Error::Empty("motif vocabulary"));
        }
        if k == 0 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        if provenance.len() != motifs.len() {
            return Err(Error::InvalidParam(format!(
                "{} provenance entries for {} motifs",
                provenance.len(),
                motifs.len()
            )));
        }
        if let Some(i) = motifs.iter().position(|m| m.center().is_none()) {
            return Err(Error::InvalidParam(format!("motif {i} has no center")));
        }
        kernel.validate()?;
        Ok(MotifVocabulary {
            motifs,
            k,
            kernel,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }
}

/// Where a sampled subgraph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOrigin {
    pub graph: usize,
    pub center: usize,
}

/// Samples centered k-hop subgraphs. Candidates are drawn uniformly (graph,
/// then node); a candidate whose node already lies in an accepted subgraph is
/// kept with probability 0.5. Stops at `sample_target` subgraphs or after
/// `20 * sample_target` draws.
pub fn sample_subgraphs(dataset: &[ArgGraph], params: &VocabParams) -> Result<Vec<ArgGraph>> {
    Ok(sample_subgraphs_with_origin(dataset, params)?
        .into_iter()
        .map(|(g, _)| g)
        .collect())
}

pub fn sample_subgraphs_with_origin(
    dataset: &[ArgGraph],
    params: &VocabParams,
) -> Result<Vec<(ArgGraph, SampleOrigin)>> {
    params.validate()?;
    let nonempty: Vec<usize> = (0..dataset.len())
        .filter(|&i| dataset[i].node_count() > 0)
        .collect();
    if nonempty.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut visited: Vec<Vec<bool>> = dataset
        .iter()
        .map(|g| vec![false; g.node_count()])
        .collect();
    let mut out = Vec::with_capacity(params.sample_target);
    let max_attempts = params.sample_target.saturating_mul(20);
    for _ in 0..max_attempts {
        if out.len() == params.sample_target {
            break;
        }
        let gi = nonempty[rng.gen_range(0..nonempty.len())];
        let g = &dataset[gi];
        let v = rng.gen_range(0..g.node_count());
        if visited[gi][v] && !rng.gen_bool(0.5) {
            continue;
        }
        for w in k_hop_nodes(g, v, params.k)? {
            visited[gi][w] = true;
        }
        out.push((
            k_hop_subgraph(g, v, params.k)?,
            SampleOrigin {
                graph: gi,
                center: v,
            },
        ));
    }
    Ok(out)
}

// A pooled representative: index into the sample list and how many samples
// it stands for.
#[derive(Debug, Clone, Copy)]
struct Rep {
    sample: usize,
    weight: usize,
}

fn cluster_reps(
    reps: &[Rep],
    samples: &[ArgGraph],
    n_clusters: usize,
    cfg: &CompatConfig,
    mp: &MatchParams,
    workers: usize,
) -> Result<Vec<Rep>> {
    let graphs: Vec<ArgGraph> = reps.iter().map(|r| samples[r.sample].clone()).collect();
    let sim = pairwise_similarity(&graphs, cfg, mp, workers)?;
    let labels = average_linkage_cluster(&sim, n_clusters)?;
    members_by_label(&labels)
        .iter()
        .map(|members| {
            let medoid = select_medoid(members, &sim)?;
            Ok(Rep {
                sample: reps[medoid].sample,
                weight: members.iter().map(|&m| reps[m].weight).sum(),
            })
        })
        .collect()
}

/// Builds an `n_motifs` vocabulary. Motifs are ordered by descending cluster
/// size; equal sizes keep the order in which their clusters first appear.
pub fn build_vocabulary(
    dataset: &[ArgGraph],
    params: &VocabParams,
    cfg: &CompatConfig,
    mp: &MatchParams,
    workers: usize,
) -> Result<MotifVocabulary> {
    build_vocabulary_with_rounds(dataset, params, cfg, mp, workers).map(|(v, _)| v)
}

/// Like [`build_vocabulary`], also returning the number of partition-merge
/// rounds run before the final clustering (0 for the single-stage path).
pub fn build_vocabulary_with_rounds(
    dataset: &[ArgGraph],
    params: &VocabParams,
    cfg: &CompatConfig,
    mp: &MatchParams,
    workers: usize,
) -> Result<(MotifVocabulary, usize)> {
    cfg.validate()?;
    mp.validate()?;
    let samples = sample_subgraphs(dataset, params)?;
    if samples.len() < params.n_motifs {
        return Err(Error::InvalidParam(format!(
            "only {} subgraphs sampled, fewer than the {} motifs requested",
            samples.len(),
            params.n_motifs
        )));
    }
    let mut reps: Vec<Rep> = (0..samples.len())
        .map(|sample| Rep { sample, weight: 1 })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let mut rounds = 0;
    while reps.len() > params.partition_size {
        rounds += 1;
        reps.shuffle(&mut rng);
        let mut merged = Vec::new();
        for batch in reps.chunks(params.partition_size) {
            if batch.len() <= params.per_partition_keep {
                merged.extend_from_slice(batch);
            } else {
                merged.extend(cluster_reps(
                    batch,
                    &samples,
                    params.per_partition_keep,
                    cfg,
                    mp,
                    workers,
                )?);
            }
        }
        reps = merged;
    }
    if reps.len() < params.n_motifs {
        return Err(Error::InvalidParam(format!(
            "partition-merge left {} representatives, fewer than the {} motifs requested",
            reps.len(),
            params.n_motifs
        )));
    }
    let mut finals = cluster_reps(&reps, &samples, params.n_motifs, cfg, mp, workers)?;
    // stable sort keeps first-appearance order among equal sizes
    finals.sort_by_key(|r| std::cmp::Reverse(r.weight));
    let vocab = MotifVocabulary::new(
        finals.iter().map(|r| samples[r.sample].clone()).collect(),
        params.k,
        *cfg,
        finals.iter().map(|r| r.weight).collect(),
    )?;
    Ok((vocab, rounds))
}
