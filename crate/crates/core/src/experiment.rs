//! End-to-end synthetic classification experiment.
//!
//! Generates the five-template dataset, splits it 8:1:1, builds a motif
//! vocabulary on the training split, convolves every graph, max-pools node
//! features, standardizes with training statistics and fits a logistic
//! regression head.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    confusion_matrix, evaluate, per_class_accuracy, train_logreg, LogRegParams,
};
use crate::convolution::{
    cache_key, convolve_dataset, readout, write_graph_features_csv, FeatureCache, FeatureMatrix,
    GraphFeatureRow, Readout, Standardizer,
};
use crate::error::{Error, Result};
use crate::graph::ArgGraph;
use crate::kernel::{CompatConfig, KernelPreset};
use crate::matching::{brute_force_match, MatchParams};
use crate::synthgen::{builtin_templates, generate_dataset, NoiseConfig};
use crate::vocabulary::{build_vocabulary, MotifVocabulary, VocabParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub size: usize,
    /// Drives dataset generation, the split and vocabulary sampling.
    pub seed: u64,
    pub noise: NoiseConfig,
    pub kernel: KernelPreset,
    pub alpha: f64,
    pub matching: MatchParams,
    /// `vocab.seed` is replaced by `seed` when the experiment runs.
    pub vocab: VocabParams,
    pub readout: Readout,
    pub logreg: LogRegParams,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            size: 500,
            seed: 0,
            noise: NoiseConfig::default(),
            kernel: KernelPreset::Synthetic,
            alpha: KernelPreset::Synthetic.config().alpha,
            matching: MatchParams {
                sinkhorn_max_iters: 100,
                ..MatchParams::default()
            },
            vocab: VocabParams {
                k: 4,
                sample_target: 200,
                n_motifs: 5,
                ..VocabParams::default()
            },
            readout: Readout::Max,
            logreg: LogRegParams::default(),
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn compat(&self) -> CompatConfig {
        self.kernel.config().with_alpha(self.alpha)
    }

    /// The configuration as it is actually run.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.vocab.seed = c.seed;
        c
    }
}

/// Index sets of an 8:1:1 split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random 8:1:1 split of `n` items (train and validation sizes rounded down,
/// the test set takes the rest).
pub fn split_indices(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    idx.shuffle(&mut rng);
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    Split {
        train: idx[..n_train].to_vec(),
        val: idx[n_train..n_train + n_val].to_vec(),
        test: idx[n_train + n_val..].to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub class: i64,
    pub count: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub per_class: Vec<ClassAccuracy>,
    /// Test-set counts, `confusion[true][predicted]` in class order.
    pub confusion: Vec<Vec<usize>>,
    pub classes: Vec<i64>,
    pub motif_sizes: Vec<usize>,
    pub motif_provenance: Vec<usize>,
    /// Oracle similarity of each motif (row) to each template (column).
    pub motif_template_similarity: Vec<Vec<f64>>,
}

impl ExperimentReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "config {}\n",
            serde_json::to_string(&self.config).expect("config serializes")
        ));
        s.push_str(&format!(
            "split train={} val={} test={}\n",
            self.n_train, self.n_val, self.n_test
        ));
        s.push_str(&format!("train_accuracy {:.6}\n", self.train_accuracy));
        if let Some(v) = self.val_accuracy {
            s.push_str(&format!("val_accuracy {v:.6}\n"));
        }
        s.push_str(&format!("test_accuracy {:.6}\n", self.test_accuracy));
        for c in &self.per_class {
            match c.accuracy {
                Some(a) => s.push_str(&format!(
                    "class {} n={} accuracy {a:.6}\n",
                    c.class, c.count
                )),
                None => s.push_str(&format!("class {} n=0 accuracy -\n", c.class)),
            }
        }
        s.push_str("confusion (rows true, columns predicted)\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            s.push_str(&format!("  {}\n", cells.join(" ")));
        }
        for (i, row) in self.motif_template_similarity.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            s.push_str(&format!(
                "motif {i} nodes={} members={} template_similarity {}\n",
                self.motif_sizes[i],
                self.motif_provenance[i],
                cells.join(" ")
            ));
        }
        s
    }
}

/// Graph-level feature rows of one split, ready for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFeatures {
    pub train: Vec<GraphFeatureRow>,
    pub val: Vec<GraphFeatureRow>,
    pub test: Vec<GraphFeatureRow>,
}

impl SplitFeatures {
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, rows) in [
            ("train", &self.train),
            ("val", &self.val),
            ("test", &self.test),
        ] {
            let path = dir.join(format!("{name}_features.csv"));
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_graph_features_csv(std::io::BufWriter::new(file), rows)
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub vocabulary: MotifVocabulary,
    /// Raw readout vectors, before standardization.
    pub features: SplitFeatures,
}

fn rows_for(ids: &[usize], graphs: &[ArgGraph], pooled: &[Vec<f64>]) -> Vec<GraphFeatureRow> {
    ids.iter()
        .map(|&i| GraphFeatureRow {
            graph_id: i,
            label: graphs[i].label(),
            features: pooled[i].clone(),
        })
        .collect()
}

/// Labeled feature vectors; every row must carry a label.
pub fn labeled(rows: &[GraphFeatureRow]) -> Result<(Vec<Vec<f64>>, Vec<i64>)> {
    rows.iter()
        .map(|r| {
            r.label
                .map(|l| (r.features.clone(), l))
                .ok_or_else(|| Error::InvalidParam(format!("graph {} has no label", r.graph_id)))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

/// Standardizes with training statistics, trains, and scores each split.
pub struct ClassificationResult {
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub classes: Vec<i64>,
    pub confusion: ndarray::Array2<usize>,
}

pub fn classify_features(
    train: &[GraphFeatureRow],
    val: &[GraphFeatureRow],
    test: &[GraphFeatureRow],
    hyper: &LogRegParams,
) -> Result<ClassificationResult> {
    let (xtr, ytr) = labeled(train)?;
    let (xte, yte) = labeled(test)?;
    let scaler = Standardizer::fit(&xtr)?;
    let xtr = scaler.apply_all(&xtr)?;
    let xte = scaler.apply_all(&xte)?;
    let model = train_logreg(&xtr, &ytr, hyper)?;
    let val_accuracy = if val.is_empty() {
        None
    } else {
        let (xv, yv) = labeled(val)?;
        Some(evaluate(&model, &scaler.apply_all(&xv)?, &yv)?)
    };
    Ok(ClassificationResult {
        train_accuracy: evaluate(&model, &xtr, &ytr)?,
        val_accuracy,
        test_accuracy: evaluate(&model, &xte, &yte)?,
        confusion: confusion_matrix(&model, &xte, &yte)?,
        classes: model.classes,
    })
}

pub fn run_experiment(
    config: &ExperimentConfig,
    cache: Option<&FeatureCache>,
) -> Result<ExperimentOutput> {
    let config = config.resolved();
    let cfg = config.compat();
    cfg.validate()?;
    let graphs = generate_dataset(config.size, config.seed, &config.noise)?;
    let split = split_indices(graphs.len(), config.seed);
    if split.test.is_empty() {
        return Err(Error::InvalidParam(format!(
            "dataset of {} graphs leaves no test split",
            config.size
        )));
    }
    let train_graphs: Vec<ArgGraph> = split.train.iter().map(|&i| graphs[i].clone()).collect();
    let vocab = build_vocabulary(
        &train_graphs,
        &config.vocab,
        &cfg,
        &config.matching,
        config.workers,
    )?;

    let features: Vec<FeatureMatrix> = match cache {
        Some(c) => {
            let key = cache_key(&graphs, &vocab, &cfg, &config.matching);
            match c.load(&key) {
                Some(f) if f.len() == graphs.len() => f,
                _ => {
                    let f =
                        convolve_dataset(&graphs, &vocab, &cfg, &config.matching, config.workers)?;
                    c.store(&key, &f)?;
                    f
                }
            }
        }
        None => convolve_dataset(&graphs, &vocab, &cfg, &config.matching, config.workers)?,
    };
    let pooled = features
        .iter()
        .map(|f| readout(&f.rows, config.readout))
        .collect::<Result<Vec<_>>>()?;
    let split_features = SplitFeatures {
        train: rows_for(&split.train, &graphs, &pooled),
        val: rows_for(&split.val, &graphs, &pooled),
        test: rows_for(&split.test, &graphs, &pooled),
    };
    let result = classify_features(
        &split_features.train,
        &split_features.val,
        &split_features.test,
        &config.logreg,
    )?;

    let per_class = per_class_accuracy(&result.confusion)
        .into_iter()
        .zip(&result.classes)
        .zip(result.confusion.rows())
        .map(|((accuracy, &class), row)| ClassAccuracy {
            class,
            count: row.sum(),
            accuracy,
        })
        .collect();
    let templates = builtin_templates();
    let motif_template_similarity = vocab
        .motifs
        .iter()
        .map(|m| {
            templates
                .iter()
                .map(|t| brute_force_match(m, &t.graph, &cfg).map(|(_, s)| s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let report = ExperimentReport {
        n_train: split.train.len(),
        n_val: split.val.len(),
        n_test: split.test.len(),
        train_accuracy: result.train_accuracy,
        val_accuracy: result.val_accuracy,
        test_accuracy: result.test_accuracy,
        per_class,
        confusion: result
            .confusion
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        classes: result.classes,
        motif_sizes: vocab.motifs.iter().map(|m| m.node_count()).collect(),
        motif_provenance: vocab.provenance.clone(),
        motif_template_similarity,
        config,
    };
    Ok(ExperimentOutput {
        report,
        vocabulary: vocab,
        features: split_features,
    })
}

/// Assigns motifs to templates one-to-one, maximizing the smallest matched
/// similarity. Returns `(template index per motif, smallest similarity)`, or
/// `None` when there are more motifs than templates.
pub fn best_bijection(sim: &[Vec<f64>]) -> Option<(Vec<usize>, f64)> {
    let n = sim.len();
    let m = sim.first().map_or(0, |r| r.len());
    if n == 0 || n > m {
        return None;
    }
    fn search(
        sim: &[Vec<f64>],
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if row == sim.len() {
            let worst = cur
                .iter()
                .enumerate()
                .map(|(i, &j)| sim[i][j])
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(_, b)| worst > *b) {
                *best = Some((cur.clone(), worst));
            }
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                search(sim, row + 1, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    search(sim, 0, &mut vec![false; m], &mut Vec::new(), &mut best);
    best
}
