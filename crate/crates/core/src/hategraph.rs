//! Follow graph, PageRank, hate-account selection and per-author binary
//! follow vectors.
//!
//! The ordered [`HateAccountSet`] is the index contract for every follow
//! vector: position `i` of a vector refers to `accounts[i]`. Its canonical
//! order is descending PageRank with ties broken by ascending account id.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed graph over account ids. Vertices are kept in ascending id order
/// and duplicate edges are collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FollowGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
}

impl FollowGraph {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Followees of `id` in ascending id order; empty for unknown ids.
    pub fn following(&self, id: &str) -> impl Iterator<Item = &str> {
        self.index_of(id)
            .into_iter()
            .flat_map(move |i| self.out[i].iter().map(move |&j| self.ids[j].as_str()))
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.out.iter().enumerate().flat_map(move |(i, outs)| {
            outs.iter()
                .map(move |&j| (self.ids[i].as_str(), self.ids[j].as_str()))
        })
    }
}

pub fn build_graph<S: AsRef<str>>(edges: &[(S, S)]) -> FollowGraph {
    let vertices: BTreeSet<&str> = edges
        .iter()
        .flat_map(|(a, b)| [a.as_ref(), b.as_ref()])
        .collect();
    let ids: Vec<String> = vertices.into_iter().map(str::to_string).collect();
    let index: HashMap<String, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ids.len()];
    for (a, b) in edges {
        sets[index[a.as_ref()]].insert(index[b.as_ref()]);
    }
    FollowGraph {
        ids,
        index,
        out: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    /// Scores aligned with [`FollowGraph::ids`].
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl PageRank {
    pub fn score_of(&self, graph: &FollowGraph, id: &str) -> Option<f64> {
        graph.index_of(id).map(|i| self.scores[i])
    }
}

/// Power iteration with uniform teleport; dangling vertices spread their
/// mass uniformly over all vertices.
pub fn pagerank(graph: &FollowGraph, params: PageRankParams) -> Result<PageRank> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::invalid(format!(
            "damping {} outside (0, 1)",
            params.damping
        )));
    }
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let d = params.damping;
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n)
            .filter(|&v| graph.out[v].is_empty())
            .map(|v| x[v])
            .sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|v| *v = base);
        for (v, outs) in graph.out.iter().enumerate() {
            if outs.is_empty() {
                continue;
            }
            let share = d * x[v] / outs.len() as f64;
            for &w in outs {
                next[w] += share;
            }
        }
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if delta < params.tol {
            converged = true;
            break;
        }
    }
    Ok(PageRank {
        scores: x,
        iterations,
        converged,
    })
}

/// Ordered hate-account set; the order is the follow-vector index contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HateAccountSet {
    accounts: Vec<String>,
    index: HashMap<String, usize>,
}

impl HateAccountSet {
    /// Wrap an already canonically ordered list, e.g. one read back from disk.
    pub fn from_ordered(accounts: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(accounts.len());
        for (i, a) in accounts.iter().enumerate() {
            if index.insert(a.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate hate account `{a}`")));
            }
        }
        Ok(Self { accounts, index })
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    pub fn accounts(&self) -> &[String] {
        &self.accounts
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// One id per line in canonical order.
    pub fn to_lines(&self) -> String {
        self.accounts.iter().map(|a| format!("{a}\n")).collect()
    }
}

// Scores are compared on a 1e-12 grid so that rank ties reached through
// different summation orders still fall back to the id tie-break.
fn rank_key(score: f64) -> i64 {
    (score * 1e12).round() as i64
}

/// Seeds plus the highest-ranked non-seed vertices up to `k` accounts.
/// A `k` beyond the vertex count selects every vertex.
pub fn select_hate_accounts<S: AsRef<str>>(
    graph: &FollowGraph,
    ranks: &PageRank,
    seeds: &[S],
    k: usize,
) -> Result<HateAccountSet> {
    let mut seed_idx = BTreeSet::new();
    for s in seeds {
        let s = s.as_ref();
        let i = graph
            .index_of(s)
            .ok_or_else(|| Error::invalid(format!("seed account `{s}` is not in the graph")))?;
        seed_idx.insert(i);
    }
    if k < seed_idx.len() {
        return Err(Error::invalid(format!(
            "k = {k} is smaller than the {} seed accounts",
            seed_idx.len()
        )));
    }
    let by_rank = |a: &usize, b: &usize| {
        rank_key(ranks.scores[*b])
            .cmp(&rank_key(ranks.scores[*a]))
            .then_with(|| graph.ids[*a].cmp(&graph.ids[*b]))
    };
    let mut rest: Vec<usize> = (0..graph.vertex_count())
        .filter(|i| !seed_idx.contains(i))
        .collect();
    rest.sort_by(by_rank);
    let k = k.min(graph.vertex_count());
    let mut chosen: Vec<usize> = seed_idx.into_iter().collect();
    chosen.extend(rest.into_iter().take(k - chosen.len()));
    chosen.sort_by(by_rank);
    HateAccountSet::from_ordered(chosen.into_iter().map(|i| graph.ids[i].clone()).collect())
}

/// Keep only edges whose followee is a hate account.
pub fn project_hate_graph<S: AsRef<str>>(
    author_edges: &[(S, S)],
    hate: &HateAccountSet,
) -> FollowGraph {
    let kept: Vec<(&str, &str)> = author_edges
        .iter()
        .map(|(a, b)| (a.as_ref(), b.as_ref()))
        .filter(|(_, b)| hate.contains(b))
        .collect();
    build_graph(&kept)
}

/// Which hate accounts an author follows, indexed by the set's order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryFollowVector {
    bits: Vec<bool>,
}

impl BinaryFollowVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Indices of set bits, ascending.
    pub fn active(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }

    pub fn to_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|b| if *b { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("bad bit `{c}` in follow vector"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }
}

pub fn follow_vector(
    author_id: &str,
    author_edges: &FollowGraph,
    hate: &HateAccountSet,
) -> BinaryFollowVector {
    let mut v = BinaryFollowVector::zeros(hate.len());
    for followee in author_edges.following(author_id) {
        if let Some(i) = hate.position(followee) {
            v.bits[i] = true;
        }
    }
    v
}

/// Read whitespace-separated `follower followee` pairs, skipping blank lines
/// and `#` comments.
pub fn read_edges<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => edges.push((a.to_string(), b.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected `follower followee`, got `{line}`"),
                })
            }
        }
    }
    Ok(edges)
}

pub fn edges_to_lines<S: AsRef<str>>(edges: impl IntoIterator<Item = (S, S)>) -> String {
    edges
        .into_iter()
        .map(|(a, b)| format!("{} {}\n", a.as_ref(), b.as_ref()))
        .collect()
}

/// Read one id per line (seed lists and hate-account sets).
pub fn read_id_list<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') {
            ids.push(line.to_string());
        }
    }
    Ok(ids)
}
