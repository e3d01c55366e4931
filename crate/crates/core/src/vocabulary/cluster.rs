//! Average-linkage agglomeration and medoid selection.

use ndarray::Array2;

use crate::error::{Error, Result};

fn check_similarity(sim: &Array2<f64>) -> Result<usize> {
    let (r, c) = sim.dim();
    if r != c {
        return Err(Error::InvalidParam(format!(
            "similarity matrix must be square, got {r}x{c}"
        )));
    }
    if sim.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("similarity matrix"));
    }
    Ok(r)
}

/// Agglomerates items under distance `1 - sim` with average linkage until
/// `n_clusters` remain. Among equally close cluster pairs the one with the
/// smallest (first, second) representative indices merges first; a cluster is
/// represented by its lowest member. Labels are numbered in order of first
/// appearance.
pub fn average_linkage_cluster(sim: &Array2<f64>, n_clusters: usize) -> Result<Vec<usize>> {
    let n = check_similarity(sim)?;
    if n_clusters == 0 || n_clusters > n {
        return Err(Error::InvalidParam(format!(
            "cannot form {n_clusters} clusters from {n} items"
        )));
    }
    let mut dist = sim.mapv(|s| 1.0 - s);
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    // parent[i]: the cluster item i was absorbed into (itself while active)
    let mut parent: Vec<usize> = (0..n).collect();

    for _ in 0..(n - n_clusters) {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                let d = dist[[a, b]];
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least two active clusters");
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for x in (0..n).filter(|&x| active[x] && x != a && x != b) {
            let d = (sa * dist[[a, x]] + sb * dist[[b, x]]) / (sa + sb);
            dist[[a, x]] = d;
            dist[[x, a]] = d;
        }
        size[a] += size[b];
        active[b] = false;
        parent[b] = a;
    }

    let root = |mut i: usize| {
        while parent[i] != i {
            i = parent[i];
        }
        i
    };
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    Ok((0..n)
        .map(|i| {
            let r = root(i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect())
}

/// Member with the highest total similarity to the other members; ties go to
/// the member listed first.
pub fn select_medoid(members: &[usize], sim: &Array2<f64>) -> Result<usize> {
    let n = check_similarity(sim)?;
    if members.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    if let Some(&bad) = members.iter().find(|&&m| m >= n) {
        return Err(Error::NodeOutOfRange { node: bad, len: n });
    }
    let mut best = (f64::NEG_INFINITY, members[0]);
    for &m in members {
        let total: f64 = members
            .iter()
            .filter(|&&o| o != m)
            .map(|&o| sim[[m, o]])
            .sum();
        if total > best.0 {
            best = (total, m);
        }
    }
    Ok(best.1)
}

/// Groups item indices by label, each group in ascending order.
pub fn members_by_label(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); count];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Recomputes every average linkage from the raw distances at each step.
    fn naive_average_linkage(sim: &Array2<f64>, n_clusters: usize) -> Vec<usize> {
        let n = sim.nrows();
        let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while clusters.len() > n_clusters {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..clusters.len() {
                for b in a + 1..clusters.len() {
                    let mut total = 0.0;
                    for &i in &clusters[a] {
                        for &j in &clusters[b] {
                            total += 1.0 - sim[[i, j]];
                        }
                    }
                    let d = total / (clusters[a].len() * clusters[b].len()) as f64;
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
            let merged = clusters.remove(best.2);
            clusters[best.1].extend(merged);
            clusters.sort_by_key(|c| *c.iter().min().unwrap());
        }
        let mut labels = vec![0; n];
        for (l, c) in clusters.iter().enumerate() {
            for &i in c {
                labels[i] = l;
            }
        }
        labels
    }

    fn sim_from(n: usize, f: impl Fn(usize, usize) -> f64) -> Array2<f64> {
        Array2::from_shape_fn(
            (n, n),
            |(i, j)| if i == j { 1.0 } else { f(i.min(j), i.max(j)) },
        )
    }

    #[test]
    fn identity_keeps_singletons() {
        let sim = Array2::eye(4);
        assert_eq!(average_linkage_cluster(&sim, 4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(average_linkage_cluster(&sim, 1).unwrap(), vec![0; 4]);
    }

    #[test]
    fn two_tight_groups() {
        let group = [0, 1, 0, 1, 1, 0, 0, 1];
        let sim = sim_from(8, |i, j| if group[i] == group[j] { 0.95 } else { 0.1 });
        let labels = average_linkage_cluster(&sim, 2).unwrap();
        assert_eq!(labels, group.to_vec());
        assert_eq!(labels, naive_average_linkage(&sim, 2));
    }

    #[test]
    fn equal_distances_merge_lowest_pair_first() {
        let sim = sim_from(4, |_, _| 0.5);
        assert_eq!(average_linkage_cluster(&sim, 3).unwrap(), vec![0, 0, 1, 2]);
        assert_eq!(average_linkage_cluster(&sim, 2).unwrap(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn too_many_clusters_is_an_error() {
        assert!(average_linkage_cluster(&Array2::eye(3), 4).is_err());
        assert!(average_linkage_cluster(&Array2::eye(3), 0).is_err());
        assert!(average_linkage_cluster(&Array2::zeros((2, 3)), 1).is_err());
    }

    #[test]
    fn medoid_examples() {
        let sim = sim_from(4, |i, j| match (i, j) {
            (0, 1) | (0, 2) => 0.9,
            _ => 0.1,
        });
        assert_eq!(select_medoid(&[3], &sim).unwrap(), 3);
        assert_eq!(select_medoid(&[0, 1, 2], &sim).unwrap(), 0);
        assert_eq!(select_medoid(&[1, 2, 3], &sim).unwrap(), 1);
        assert!(select_medoid(&[], &sim).is_err());
    }

    fn arb_sim() -> impl Strategy<Value = Array2<f64>> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec(0.0f64..1.0, n * n)
                .prop_map(move |v| sim_from(n, |i, j| v[i * n + j]))
        })
    }

    proptest! {
        #[test]
        fn lance_williams_matches_naive(sim in arb_sim(), frac in 0.0f64..1.0) {
            let n = sim.nrows();
            let k = 1 + ((n - 1) as f64 * frac) as usize;
            prop_assert_eq!(average_linkage_cluster(&sim, k).unwrap(), naive_average_linkage(&sim, k));
        }

        #[test]
        fn medoid_maximizes_total_similarity(sim in arb_sim()) {
            let n = sim.nrows();
            let members: Vec<usize> = (0..n).collect();
            let m = select_medoid(&members, &sim).unwrap();
            let total = |x: usize| members.iter().filter(|&&o| o != x).map(|&o| sim[[x, o]]).sum::<f64>();
            for &o in &members {
                prop_assert!(total(m) >= total(o));
            }
        }
    }
}
