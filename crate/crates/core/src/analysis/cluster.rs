use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances closer than this are treated as tied.
pub const TIE_EPS: f64 = 1e-12;

/// Tweet id to cluster id in `[0, k)`.
pub type ClusterAssignment = BTreeMap<String, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Average,
}

/// `1 − cos(a, b)`; a zero vector is at distance 1 from everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - dot / (na * nb)
}

struct Cluster {
    members: Vec<usize>,
    /// Lexicographically least member id, used for tie-breaks and final ids.
    key: String,
}

/// Bottom-up average-linkage clustering under cosine distance.
///
/// At each step the closest pair merges. Pairs within [`TIE_EPS`] of the
/// minimum count as tied and the pair with the smallest
/// `(min key, max key)` wins, where a cluster's key is its least member id.
/// Final cluster ids follow ascending key order.
pub fn agglomerative_cluster(points: &[(String, Vec<f64>)], k: usize) -> Result<ClusterAssignment> {
    let n = points.len();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "{n} embeddings cannot form {k} clusters"
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (id, _) in points {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cosine_distance(&points[i].1, &points[j].1);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut clusters: Vec<Option<Cluster>> = points
        .iter()
        .enumerate()
        .map(|(i, (id, _))| {
            Some(Cluster {
                members: vec![i],
                key: id.clone(),
            })
        })
        .collect();
    let mut live = n;
    while live > k {
        let alive: Vec<usize> = (0..n).filter(|&i| clusters[i].is_some()).collect();
        let mut best = f64::INFINITY;
        for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                best = best.min(dist[i][j]);
            }
        }
        let mut pick: Option<(usize, usize)> = None;
        let mut pick_key: Option<(&str, &str)> = None;
        for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                if dist[i][j] > best + TIE_EPS {
                    continue;
                }
                let (a, b) = (
                    &clusters[i].as_ref().unwrap().key,
                    &clusters[j].as_ref().unwrap().key,
                );
                let key = if a < b {
                    (a.as_str(), b.as_str())
                } else {
                    (b.as_str(), a.as_str())
                };
                if pick_key.is_none_or(|p| key < p) {
                    pick_key = Some(key);
                    pick = Some((i, j));
                }
            }
        }
        let (i, j) = pick.expect("at least two live clusters");
        let cj = clusters[j].take().unwrap();
        let ci = clusters[i].as_mut().unwrap();
        let (ni, nj) = (ci.members.len() as f64, cj.members.len() as f64);
        ci.members.extend(cj.members);
        if cj.key < ci.key {
            ci.key = cj.key;
        }
        for &m in &alive {
            if m != i && m != j {
                let d = (ni * dist[i][m] + nj * dist[j][m]) / (ni + nj);
                dist[i][m] = d;
                dist[m][i] = d;
            }
        }
        live -= 1;
    }
    let mut done: Vec<Cluster> = clusters.into_iter().flatten().collect();
    done.sort_by(|a, b| a.key.cmp(&b.key));
    let mut out = ClusterAssignment::new();
    for (c, cl) in done.iter().enumerate() {
        for &m in &cl.members {
            out.insert(points[m].0.clone(), c);
        }
    }
    Ok(out)
}

/// `tweet_id cluster_id` lines in id order.
pub fn clusters_to_lines(assignment: &ClusterAssignment) -> String {
    assignment
        .iter()
        .map(|(id, c)| format!("{id} {c}\n"))
        .collect()
}

pub fn parse_cluster_lines(text: &str) -> Result<ClusterAssignment> {
    let mut out = ClusterAssignment::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: &str| Error::Parse {
            line: i + 1,
            message: message.into(),
        };
        let mut parts = line.split_whitespace();
        let (Some(id), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err("expected `tweet_id cluster_id`"));
        };
        let c = c
            .parse()
            .map_err(|_| parse_err("cluster id is not an integer"))?;
        if out.insert(id.to_string(), c).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(out)
}
