//! Five-template synthetic benchmark.
//!
//! Each template is a small ARG with scalar node attributes in {0, 1, 2} and
//! scalar edge attributes in {0.5, 1.0, 1.5}. Every template has a hub
//! (node 0) adjacent to all other nodes, so the whole template lies within
//! two hops of any of its nodes. Templates 2 and 5 share their structure and
//! node attributes and differ in exactly two edge attributes.
//!
//! Samples copy a template, attach `m ~ Binomial(4, 0.1)` distractor nodes
//! and perturb every node attribute with Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ArgGraph, Edge};

pub const TEMPLATE_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    /// 1-based template id, also the class label of its samples.
    pub id: i64,
    pub graph: ArgGraph,
}

// (node attributes, edges as (u, v, attr))
type TemplateSpec = (&'static [f64], &'static [(usize, usize, f64)]);

const TEMPLATE_SPECS: [TemplateSpec; TEMPLATE_COUNT] = [
    (
        &[1.0, 1.0, 2.0, 1.0, 2.0],
        &[
            (0, 1, 0.5),
            (0, 2, 1.5),
            (0, 3, 1.0),
            (0, 4, 1.0),
            (1, 2, 0.5),
            (2, 3, 1.0),
            (2, 4, 1.0),
        ],
    ),
    (
        &[0.0, 1.0, 1.0, 1.0, 1.0],
        &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 0.5), (0, 4, 0.5)],
    ),
    (
        &[0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 2.0],
        &[
            (0, 1, 0.5),
            (0, 2, 0.5),
            (0, 3, 0.5),
            (0, 4, 1.5),
            (0, 5, 1.5),
            (0, 6, 0.5),
            (1, 3, 0.5),
        ],
    ),
    (
        &[2.0, 1.0, 2.0, 0.0, 0.0, 2.0, 0.0],
        &[
            (0, 1, 0.5),
            (0, 2, 1.5),
            (0, 3, 0.5),
            (0, 4, 1.0),
            (0, 5, 1.5),
            (0, 6, 1.0),
        ],
    ),
    // template 2 with edges (0,3) and (0,4) changed from 0.5 to 1.5
    (
        &[0.0, 1.0, 1.0, 1.0, 1.0],
        &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.5), (0, 4, 1.5)],
    ),
];

pub fn builtin_templates() -> Vec<Template> {
    TEMPLATE_SPECS
        .iter()
        .enumerate()
        .map(|(k, (nodes, edges))| {
            let graph = ArgGraph::new(
                nodes.iter().map(|&x| vec![x]).collect(),
                edges
                    .iter()
                    .map(|&(u, v, a)| Edge::new(u, v, vec![a]))
                    .collect(),
                Some(0),
                Some(k as i64 + 1),
            )
            .expect("builtin templates are valid");
            Template {
                id: k as i64 + 1,
                graph,
            }
        })
        .collect()
}

/// How distractor nodes are wired into a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachPolicy {
    /// One edge to a uniformly chosen existing node.
    One,
    /// Added nodes stay isolated.
    None,
}

impl FromStr for AttachPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(AttachPolicy::One),
            "none" => Ok(AttachPolicy::None),
            other => Err(Error::InvalidParam(format!(
                "unknown attach policy `{other}` (expected one or none)"
            ))),
        }
    }
}

impl fmt::Display for AttachPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttachPolicy::One => "one",
            AttachPolicy::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation of the Gaussian added to node attributes.
    pub node_noise_std: f64,
    /// Trials and success probability of the added-node count.
    pub max_added: u64,
    pub add_prob: f64,
    pub attach: AttachPolicy,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            node_noise_std: 0.1,
            max_added: 4,
            add_prob: 0.1,
            attach: AttachPolicy::One,
        }
    }
}

impl NoiseConfig {
    /// Samples identical to their template.
    pub fn noiseless() -> Self {
        NoiseConfig {
            node_noise_std: 0.0,
            add_prob: 0.0,
            ..NoiseConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.node_noise_std.is_finite() && self.node_noise_std >= 0.0) {
            return Err(Error::InvalidParam("noise std must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.add_prob) {
            return Err(Error::InvalidParam("add_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Draws one noisy sample labeled with the template id.
pub fn sample_graph<R: Rng + ?Sized>(
    t: &Template,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<ArgGraph> {
    noise.validate()?;
    let base = &t.graph;
    let mut nodes: Vec<Vec<f64>> = base.nodes().to_vec();
    let mut edges: Vec<Edge> = base.edges().to_vec();

    let added = Binomial::new(noise.max_added, noise.add_prob)
        .map_err(|e| Error::InvalidParam(e.to_string()))?
        .sample(rng);
    let gauss =
        Normal::new(0.0, noise.node_noise_std).map_err(|e| Error::InvalidParam(e.to_string()))?;
    for _ in 0..added {
        let mut attrs = base
            .nodes()
            .choose(rng)
            .expect("templates have nodes")
            .clone();
        for x in attrs.iter_mut() {
            *x += gauss.sample(rng);
        }
        let new = nodes.len();
        if noise.attach == AttachPolicy::One {
            let anchor = rng.gen_range(0..new);
            let edge_attrs = match base.edges().choose(rng) {
                Some(e) => e.attrs.clone(),
                None => Vec::new(),
            };
            edges.push(Edge::new(anchor, new, edge_attrs));
        }
        nodes.push(attrs);
    }
    for x in nodes.iter_mut().flatten() {
        *x += gauss.sample(rng);
    }
    ArgGraph::new(nodes, edges, None, Some(t.id))
}

/// `size` labeled samples, an equal share per template (the remainder goes to
/// the lowest template ids), in a seed-determined shuffled order.
pub fn generate_dataset(size: usize, seed: u64, noise: &NoiseConfig) -> Result<Vec<ArgGraph>> {
    generate_from_templates(&builtin_templates(), size, seed, noise)
}

pub fn generate_from_templates(
    templates: &[Template],
    size: usize,
    seed: u64,
    noise: &NoiseConfig,
) -> Result<Vec<ArgGraph>> {
    if templates.is_empty() {
        return Err(Error::Empty("template list"));
    }
    if size < templates.len() {
        return Err(Error::InvalidParam(format!(
            "dataset size {size} is smaller than the {} templates",
            templates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = size / templates.len();
    let extra = size % templates.len();
    let mut out = Vec::with_capacity(size);
    for (k, t) in templates.iter().enumerate() {
        let count = per + usize::from(k < extra);
        for _ in 0..count {
            out.push(sample_graph(t, noise, &mut rng)?);
        }
    }
    out.shuffle(&mut rng);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CompatConfig;
    use crate::matching::brute_force_match;

    #[test]
    fn five_templates_within_size_bounds() {
        let ts = builtin_templates();
        assert_eq!(ts.len(), 5);
        for (k, t) in ts.iter().enumerate() {
            assert_eq!(t.id, k as i64 + 1);
            assert!((5..=7).contains(&t.graph.node_count()));
            // hub reaches everything
            assert_eq!(t.graph.degree(0), t.graph.node_count() - 1);
        }
    }

    #[test]
    fn twins_differ_in_exactly_two_edges() {
        let ts = builtin_templates();
        let (a, b) = (&ts[1].graph, &ts[4].graph);
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.edge_count(), b.edge_count());
        let differing = a
            .edges()
            .iter()
            .zip(b.edges())
            .filter(|(x, y)| {
                assert_eq!((x.u, x.v), (y.u, y.v));
                x.attrs != y.attrs
            })
            .count();
        assert_eq!(differing, 2);
    }

    #[test]
    fn noiseless_samples_equal_their_template() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = CompatConfig::default();
        for t in builtin_templates() {
            let s = sample_graph(&t, &NoiseConfig::noiseless(), &mut rng).unwrap();
            assert_eq!(s.label(), Some(t.id));
            assert_eq!(s.nodes(), t.graph.nodes());
            let (_, score) = brute_force_match(&s, &t.graph, &cfg).unwrap();
            assert_eq!(score, 1.0);
        }
    }

    #[test]
    fn sample_sizes_and_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ts = builtin_templates();
        let mut unchanged = 0;
        let trials = 2000;
        for k in 0..trials {
            let t = &ts[k % 5];
            let s = sample_graph(t, &NoiseConfig::default(), &mut rng).unwrap();
            assert_eq!(s.label(), Some(t.id));
            let extra = s.node_count() - t.graph.node_count();
            assert!(extra <= 4);
            assert_eq!(s.edge_count() - t.graph.edge_count(), extra);
            if extra == 0 {
                unchanged += 1;
            }
        }
        // P(m = 0) = 0.9^4 = 0.6561
        let frac = unchanged as f64 / trials as f64;
        assert!((0.60..0.72).contains(&frac), "{frac}");
    }

    #[test]
    fn isolated_policy_adds_no_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = NoiseConfig {
            add_prob: 1.0,
            attach: AttachPolicy::None,
            ..NoiseConfig::default()
        };
        let t = &builtin_templates()[0];
        let s = sample_graph(t, &noise, &mut rng).unwrap();
        assert_eq!(s.node_count(), t.graph.node_count() + 4);
        assert_eq!(s.edge_count(), t.graph.edge_count());
    }

    #[test]
    fn dataset_balance_and_determinism() {
        let noise = NoiseConfig::default();
        let ds = generate_dataset(500, 42, &noise).unwrap();
        for id in 1..=5 {
            assert_eq!(ds.iter().filter(|g| g.label() == Some(id)).count(), 100);
        }
        assert_eq!(ds, generate_dataset(500, 42, &noise).unwrap());
        let other = generate_dataset(500, 43, &noise).unwrap();
        let labels = |d: &[ArgGraph]| d.iter().map(|g| g.label()).collect::<Vec<_>>();
        assert_ne!(labels(&ds), labels(&other));

        let small = generate_dataset(10, 1, &noise).unwrap();
        for id in 1..=5 {
            assert_eq!(small.iter().filter(|g| g.label() == Some(id)).count(), 2);
        }
        let odd = generate_dataset(7, 1, &noise).unwrap();
        let counts: Vec<usize> = (1..=5)
            .map(|id| odd.iter().filter(|g| g.label() == Some(id)).count())
            .collect();
        assert_eq!(counts, vec![2, 2, 1, 1, 1]);
        assert!(generate_dataset(4, 1, &noise).is_err());
    }
}
