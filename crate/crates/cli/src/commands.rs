//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use motifconv::bench::bench_pairwise;
use motifconv::convolution::{
    cache_key, convolve_dataset, read_graph_features_csv, readout, write_graph_features_csv,
    write_node_features_csv, FeatureCache, GraphFeatureRow,
};
use motifconv::experiment::{classify_features, run_experiment, ExperimentConfig};
use motifconv::io::{load_dataset, load_graph, save_dataset};
use motifconv::kernel::{CompatConfig, KernelPreset};
use motifconv::synthgen::{builtin_templates, generate_dataset, NoiseConfig};
use motifconv::vocabulary::{build_vocabulary, load_vocabulary, save_vocabulary};
use motifconv::{match_and_score, pairwise_similarity, LogRegParams, MatchParams, VocabParams};

use crate::config::RunConfig;
use crate::{Cli, Command, MatchArgs};

/// Resolves settings as flag, then config file, then default.
struct Resolver {
    file: RunConfig,
}

impl Resolver {
    fn compat(&self, m: &MatchArgs) -> Result<CompatConfig> {
        let preset = m
            .kernel
            .or(self.file.kernel)
            .unwrap_or(KernelPreset::Synthetic);
        let mut cfg = preset.config();
        if let Some(a) = m.alpha.or(self.file.alpha) {
            cfg = cfg.with_alpha(a);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn match_params(&self, m: &MatchArgs, base: MatchParams) -> Result<MatchParams> {
        let mut p = self.file.matching.apply(base);
        if let Some(v) = m.beta0 {
            p.beta0 = v;
        }
        if let Some(v) = m.beta_f {
            p.beta_final = v;
        }
        if let Some(v) = m.beta_r {
            p.beta_rate = v;
        }
        if let Some(v) = m.sinkhorn_iters {
            p.sinkhorn_max_iters = v;
        }
        p.validate()?;
        Ok(p)
    }

    fn workers(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.workers).unwrap_or(1)
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.file.seed).unwrap_or(0)
    }

    fn cache(&self, flag: Option<PathBuf>) -> Option<FeatureCache> {
        flag.or_else(|| self.file.cache_dir.clone())
            .map(FeatureCache::new)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_features(path: &Path) -> Result<Vec<GraphFeatureRow>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_graph_features_csv(
        BufReader::new(file),
        &path.display().to_string(),
    )?)
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let r = Resolver { file };
    match cli.command {
        Command::Match {
            graph_a,
            graph_b,
            matching,
        } => {
            let a = load_graph(&graph_a)?;
            let b = load_graph(&graph_b)?;
            let cfg = r.compat(&matching)?;
            let mp = r.match_params(&matching, MatchParams::default())?;
            let (h, score) = match_and_score(&a, &b, &cfg, &mp)?;
            println!("{score:.6}");
            let pairs: Vec<String> = h
                .sorted_pairs()
                .iter()
                .map(|(u, i)| format!("{u}-{i}"))
                .collect();
            println!("{}", pairs.join(" "));
        }
        Command::Pairwise {
            dataset,
            workers,
            out,
            matching,
        } => {
            let graphs = load_dataset(&dataset)?;
            let cfg = r.compat(&matching)?;
            let mp = r.match_params(&matching, MatchParams::default())?;
            let sim = pairwise_similarity(&graphs, &cfg, &mp, r.workers(workers))?;
            let mut w = output(out.as_deref())?;
            let header: Vec<String> = (0..graphs.len()).map(|i| i.to_string()).collect();
            writeln!(w, ",{}", header.join(","))?;
            for i in 0..graphs.len() {
                let cells: Vec<String> = (0..graphs.len())
                    .map(|j| {
                        if j >= i {
                            sim[[i, j]].to_string()
                        } else {
                            String::new()
                        }
                    })
                    .collect();
                writeln!(w, "{i},{}", cells.join(","))?;
            }
            w.flush()?;
        }
        Command::Vocab {
            dataset,
            k,
            samples,
            motifs,
            partition_size,
            keep_per_partition,
            seed,
            workers,
            out,
            matching,
        } => {
            let graphs = load_dataset(&dataset)?;
            let cfg = r.compat(&matching)?;
            let mp = r.match_params(&matching, MatchParams::default())?;
            let mut p = r.file.vocab.apply(VocabParams::default());
            p.k = k.unwrap_or(p.k);
            p.sample_target = samples.unwrap_or(p.sample_target);
            p.n_motifs = motifs.unwrap_or(p.n_motifs);
            p.partition_size = partition_size.unwrap_or(p.partition_size);
            p.per_partition_keep = keep_per_partition.unwrap_or(p.per_partition_keep);
            p.seed = r.seed(seed);
            let vocab = build_vocabulary(&graphs, &p, &cfg, &mp, r.workers(workers))?;
            save_vocabulary(&out, &vocab, Some(&p))?;
            eprintln!(
                "wrote {} motifs (cluster sizes {:?}) to {}",
                vocab.len(),
                vocab.provenance,
                out.display()
            );
        }
        Command::Convolve {
            dataset,
            vocab,
            workers,
            out,
            readout: mode,
            cache_dir,
            matching,
        } => {
            let graphs = load_dataset(&dataset)?;
            let (vocab, _) = load_vocabulary(&vocab)?;
            let cfg = r.compat(&matching)?;
            let mp = r.match_params(&matching, MatchParams::default())?;
            let workers = r.workers(workers);
            let features = match r.cache(cache_dir) {
                Some(cache) => {
                    let key = cache_key(&graphs, &vocab, &cfg, &mp);
                    match cache.load(&key) {
                        Some(f) if f.len() == graphs.len() => f,
                        _ => {
                            let f = convolve_dataset(&graphs, &vocab, &cfg, &mp, workers)?;
                            cache.store(&key, &f)?;
                            f
                        }
                    }
                }
                None => convolve_dataset(&graphs, &vocab, &cfg, &mp, workers)?,
            };
            let w = create(&out)?;
            match mode {
                None => write_node_features_csv(w, &features)?,
                Some(mode) => {
                    let rows = features
                        .iter()
                        .zip(&graphs)
                        .map(|(f, g)| {
                            Ok(GraphFeatureRow {
                                graph_id: f.graph_id,
                                label: g.label(),
                                features: readout(&f.rows, mode)?,
                            })
                        })
                        .collect::<motifconv::Result<Vec<_>>>()?;
                    write_graph_features_csv(w, &rows)?
                }
            }
        }
        Command::Classify {
            train_features,
            test_features,
            lr,
            epochs,
            l2,
        } => {
            let mut hyper = r.file.logreg.apply(LogRegParams::default());
            hyper.lr = lr.unwrap_or(hyper.lr);
            hyper.epochs = epochs.unwrap_or(hyper.epochs);
            hyper.l2 = l2.unwrap_or(hyper.l2);
            let train = read_features(&train_features)?;
            let test = read_features(&test_features)?;
            let res = classify_features(&train, &[], &test, &hyper)?;
            println!("train_accuracy {:.6}", res.train_accuracy);
            println!("test_accuracy {:.6}", res.test_accuracy);
            let per_class = motifconv::classifier::per_class_accuracy(&res.confusion);
            for ((class, acc), row) in res.classes.iter().zip(per_class).zip(res.confusion.rows()) {
                match acc {
                    Some(a) => println!("class {class} n={} accuracy {a:.6}", row.sum()),
                    None => println!("class {class} n=0 accuracy -"),
                }
            }
            println!("confusion (rows true, columns predicted)");
            for row in res.confusion.rows() {
                let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                println!("  {}", cells.join(" "));
            }
        }
        Command::Synth {
            size,
            seed,
            out,
            emit_templates,
            attach_policy,
        } => {
            if out.is_none() && emit_templates.is_none() {
                bail!("nothing to do: pass --out and/or --emit-templates");
            }
            if let Some(path) = emit_templates {
                let templates: Vec<_> = builtin_templates().into_iter().map(|t| t.graph).collect();
                save_dataset(&path, &templates)?;
            }
            if let Some(path) = out {
                let mut noise = NoiseConfig::default();
                if let Some(p) = attach_policy.or(r.file.experiment.attach_policy) {
                    noise.attach = p;
                }
                if let Some(s) = r.file.experiment.noise_std {
                    noise.node_noise_std = s;
                }
                let size = size.or(r.file.experiment.size).unwrap_or(500);
                let graphs = generate_dataset(size, r.seed(seed), &noise)?;
                save_dataset(&path, &graphs)?;
            }
        }
        Command::ExperimentSynthetic {
            size,
            seeds,
            workers,
            report,
            features_dir,
            cache_dir,
            matching,
        } => {
            let defaults = ExperimentConfig::default();
            let cfg = r.compat(&matching)?;
            let mut base = ExperimentConfig {
                size: size.or(r.file.experiment.size).unwrap_or(defaults.size),
                kernel: matching.kernel.or(r.file.kernel).unwrap_or(defaults.kernel),
                alpha: cfg.alpha,
                matching: r.match_params(&matching, defaults.matching)?,
                vocab: r.file.vocab.apply(defaults.vocab),
                logreg: r.file.logreg.apply(defaults.logreg),
                workers: r.workers(workers),
                ..defaults
            };
            if let Some(p) = r.file.experiment.attach_policy {
                base.noise.attach = p;
            }
            if let Some(s) = r.file.experiment.noise_std {
                base.noise.node_noise_std = s;
            }
            let seeds = seeds
                .or_else(|| r.file.experiment.seeds.clone())
                .unwrap_or_else(|| vec![r.seed(None)]);
            if seeds.is_empty() {
                bail!("no seeds given");
            }
            let cache = r.cache(cache_dir);
            let mut reports = Vec::new();
            for &seed in &seeds {
                let out = run_experiment(
                    &ExperimentConfig {
                        seed,
                        ..base.clone()
                    },
                    cache.as_ref(),
                )?;
                print!("{}", out.report.to_text());
                if let Some(dir) = &features_dir {
                    let dir = if seeds.len() == 1 {
                        dir.clone()
                    } else {
                        dir.join(format!("seed_{seed}"))
                    };
                    out.features.write_csvs(&dir)?;
                }
                reports.push(out.report);
            }
            let accs: Vec<f64> = reports.iter().map(|r| r.test_accuracy).collect();
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            let std =
                (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
            println!(
                "summary seeds={} mean_test_accuracy {mean:.6} std {std:.6}",
                accs.len()
            );
            if let Some(path) = report {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &reports)?;
                writeln!(w)?;
                w.flush()?;
            }
        }
        Command::Bench {
            dataset,
            size,
            workers,
            out,
            matching,
        } => {
            let graphs = match dataset {
                Some(p) => load_dataset(&p)?,
                None => generate_dataset(size, r.seed(None), &NoiseConfig::default())?,
            };
            let cfg = r.compat(&matching)?;
            let mp = r.match_params(&matching, MatchParams::default())?;
            let (report, _) = bench_pairwise(&graphs, &cfg, &mp, &workers)?;
            report.write_csv(output(out.as_deref())?)?;
            if !report.identical {
                bail!("pairwise results differ across worker counts");
            }
        }
    }
    Ok(())
}
