use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurityVariant {
    /// For each ground-truth category, its best overlap with any cluster.
    #[default]
    AsWritten,
    /// For each cluster, its best overlap with any category.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub purity: f64,
    pub n: usize,
    pub k: usize,
}

/// Overlap counts `table[category][cluster]` over the shared id set.
fn contingency<A: Ord + Clone, B: Ord + Clone>(
    truth: &BTreeMap<String, A>,
    clusters: &BTreeMap<String, B>,
) -> Result<BTreeMap<A, BTreeMap<B, usize>>> {
    if truth.len() != clusters.len() || truth.keys().any(|k| !clusters.contains_key(k)) {
        return Err(Error::invalid(
            "ground truth and clustering cover different ids",
        ));
    }
    let mut table: BTreeMap<A, BTreeMap<B, usize>> = BTreeMap::new();
    for (id, g) in truth {
        *table
            .entry(g.clone())
            .or_default()
            .entry(clusters[id].clone())
            .or_default() += 1;
    }
    Ok(table)
}

/// Purity of `clusters` against `truth`, both keyed by the same ids.
pub fn purity<A: Ord + Clone, B: Ord + Clone>(
    truth: &BTreeMap<String, A>,
    clusters: &BTreeMap<String, B>,
    variant: PurityVariant,
) -> Result<f64> {
    let n = truth.len();
    if n == 0 {
        return Err(Error::invalid("purity of an empty set"));
    }
    let table = contingency(truth, clusters)?;
    let total: usize = match variant {
        PurityVariant::AsWritten => table.values().map(|row| *row.values().max().unwrap()).sum(),
        PurityVariant::Standard => {
            let mut best: BTreeMap<&B, usize> = BTreeMap::new();
            for row in table.values() {
                for (c, &v) in row {
                    let e = best.entry(c).or_default();
                    *e = (*e).max(v);
                }
            }
            best.values().sum()
        }
    };
    Ok(total as f64 / n as f64)
}

/// Restrict `truth` to the clustered ids and score.
pub fn purity_report(
    truth: &BTreeMap<String, usize>,
    clusters: &BTreeMap<String, usize>,
    variant: PurityVariant,
) -> Result<PurityReport> {
    let shared: BTreeMap<String, usize> = clusters
        .keys()
        .filter_map(|id| truth.get(id).map(|g| (id.clone(), *g)))
        .collect();
    let restricted: BTreeMap<String, usize> =
        shared.keys().map(|id| (id.clone(), clusters[id])).collect();
    let k = restricted
        .values()
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(PurityReport {
        purity: purity(&shared, &restricted, variant)?,
        n: shared.len(),
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn hand_enumerated_example() {
        let g = map(&[
            ("1", "A"),
            ("2", "A"),
            ("3", "A"),
            ("4", "B"),
            ("5", "B"),
            ("6", "B"),
        ]);
        let c = map(&[
            ("1", "x"),
            ("2", "x"),
            ("4", "x"),
            ("3", "y"),
            ("5", "y"),
            ("6", "y"),
        ]);
        assert!((purity(&g, &c, PurityVariant::AsWritten).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        let g = map(&[("1", "A"), ("2", "B"), ("3", "C")]);
        let one = map(&[("1", "x"), ("2", "x"), ("3", "x")]);
        assert_eq!(purity(&g, &one, PurityVariant::AsWritten).unwrap(), 1.0);
        assert!((purity(&g, &one, PurityVariant::Standard).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(purity(&g, &g, PurityVariant::AsWritten).unwrap(), 1.0);
        assert_eq!(purity(&g, &g, PurityVariant::Standard).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let e: BTreeMap<String, String> = BTreeMap::new();
        assert!(purity(&e, &e, PurityVariant::AsWritten).is_err());
        let g = map(&[("1", "A")]);
        let c = map(&[("2", "x")]);
        assert!(purity(&g, &c, PurityVariant::AsWritten).is_err());
    }

    #[test]
    fn report_restricts_to_labelled_ids() {
        let truth: BTreeMap<String, usize> =
            [("a", 0), ("b", 1)].map(|(k, v)| (k.to_string(), v)).into();
        let clusters: BTreeMap<String, usize> = [("a", 0), ("b", 1), ("z", 1)]
            .map(|(k, v)| (k.to_string(), v))
            .into();
        let r = purity_report(&truth, &clusters, PurityVariant::AsWritten).unwrap();
        assert_eq!((r.purity, r.n, r.k), (1.0, 2, 2));
    }
}
