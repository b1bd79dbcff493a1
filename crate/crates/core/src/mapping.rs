//! Bit-to-pattern codebooks and the projection onto the feasible set.
//!
//! A labeled full binary tree defines a prefix-free, instantaneously
//! encodable map between bit sequences and subcarrier activation patterns:
//! the codeword of a pattern is the edge-label sequence from the root to its
//! leaf (left = 0, right = 1). This module builds such codebooks, runs the
//! Huffman algorithm used by the projection heuristic, and projects a
//! relaxed probability vector onto the nearest feasible dyadic vector under
//! a choice of distance.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::check_simplex;
use crate::tree_core::{DyadicProbabilityVector, FullBinaryTree, TreeProfile};

// ---------------------------------------------------------------------------
// Codebooks
// ---------------------------------------------------------------------------

/// One active pattern and its codeword.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodebookEntry {
    /// Pattern index, 0-based. (Serialized JSON uses 1-based indices.)
    pub sap: usize,
    /// Root-to-leaf edge labels; `false` = 0 = left.
    pub code: Vec<bool>,
}

impl CodebookEntry {
    pub fn code_string(&self) -> String {
        self.code
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

/// A complete prefix-free bit-to-SAP map over patterns `0..c`. Patterns
/// without a leaf (null assignments) are listed in `dropped`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Codebook {
    entries: Vec<CodebookEntry>,
    dropped: BTreeSet<usize>,
    c: usize,
}

impl Codebook {
    /// Reads the codebook off a labeled tree. `saps_by_leaf[j]` is the
    /// pattern assigned to the j-th leaf in left-to-right order; it must be
    /// injective into `0..c` and cover every leaf.
    pub fn from_tree(tree: &FullBinaryTree, saps_by_leaf: &[usize], c: usize) -> Result<Self> {
        let codes = tree.codewords();
        if codes.len() != saps_by_leaf.len() {
            return Err(Error::InvalidAssignment(format!(
                "tree has {} leaves but {} patterns were assigned",
                codes.len(),
                saps_by_leaf.len()
            )));
        }
        if saps_by_leaf.len() > c {
            return Err(Error::InvalidAssignment(format!(
                "{} leaves cannot be filled from {c} patterns",
                saps_by_leaf.len()
            )));
        }
        let mut seen = vec![false; c];
        for &sap in saps_by_leaf {
            if sap >= c {
                return Err(Error::InvalidAssignment(format!(
                    "pattern index {sap} out of range for c = {c}"
                )));
            }
            if seen[sap] {
                return Err(Error::InvalidAssignment(format!(
                    "pattern {sap} assigned to two leaves"
                )));
            }
            seen[sap] = true;
        }
        let entries = saps_by_leaf
            .iter()
            .zip(codes)
            .map(|(&sap, code)| CodebookEntry { sap, code })
            .collect();
        let dropped = (0..c).filter(|&i| !seen[i]).collect();
        Ok(Self {
            entries,
            dropped,
            c,
        })
    }

    /// Codebook realizing a dyadic probability vector: the canonical tree of
    /// its depth multiset, with leaves assigned rank-matched (each pattern
    /// takes the first unused leaf of its own depth).
    pub fn for_dyadic(p: &DyadicProbabilityVector) -> Self {
        let c = p.len();
        let depths = p.depth_multiset();
        if depths.len() == 1 {
            // single pattern: the degenerate tree, empty codeword
            let sap = (0..c).find(|&i| p.exponent(i).is_some()).unwrap();
            return Self::from_tree(&FullBinaryTree::Leaf, &[sap], c).unwrap();
        }
        let counts_len = *depths.last().unwrap() as usize;
        let mut counts = vec![0u32; counts_len];
        for &q in &depths {
            counts[q as usize - 1] += 1;
        }
        let profile = TreeProfile::new(counts).expect("dyadic vector satisfies Kraft");
        let tree = profile.canonical_tree();
        let leaf_depths = tree.leaf_depths();
        let mut assignment = Vec::with_capacity(leaf_depths.len());
        let mut used = vec![false; c];
        for &d in &leaf_depths {
            let sap = (0..c)
                .find(|&i| !used[i] && p.exponent(i) == Some(d as u8))
                .expect("depth multisets match");
            used[sap] = true;
            assignment.push(sap);
        }
        Self::from_tree(&tree, &assignment, c).unwrap()
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn dropped(&self) -> &BTreeSet<usize> {
        &self.dropped
    }

    /// Total number of patterns (active + dropped).
    pub fn num_saps(&self) -> usize {
        self.c
    }

    /// Codeword length of `sap`, if active.
    pub fn depth_of(&self, sap: usize) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.sap == sap)
            .map(|e| e.code.len())
    }

    /// True when every pair of codewords is prefix-free.
    pub fn is_prefix_free(&self) -> bool {
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                let n = a.code.len().min(b.code.len());
                if a.code[..n] == b.code[..n] {
                    return false;
                }
            }
        }
        true
    }

    /// Exact check of the Kraft equality `sum 2^-len = 1`.
    pub fn kraft_equality_holds(&self) -> bool {
        let d = self.entries.iter().map(|e| e.code.len()).max().unwrap_or(0);
        if d > 64 {
            return false;
        }
        let total: u128 = self
            .entries
            .iter()
            .map(|e| 1u128 << (d - e.code.len()))
            .sum();
        total == 1u128 << d
    }

    /// JSON form: `{"entries": [{"sap": 1, "code": "00"}, ...],
    /// "num_saps": 6, "dropped": [4]}` with 1-based pattern indices.
    pub fn to_json(&self) -> String {
        let doc = CodebookDoc {
            entries: self
                .entries
                .iter()
                .map(|e| EntryDoc {
                    sap: e.sap + 1,
                    code: e.code_string(),
                })
                .collect(),
            num_saps: self.c,
            dropped: self.dropped.iter().map(|&s| s + 1).collect(),
        };
        serde_json::to_string(&doc).expect("codebook serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CodebookDoc =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("codebook JSON: {e}")))?;
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in &doc.entries {
            if e.sap == 0 || e.sap > doc.num_saps {
                return Err(Error::Parse(format!(
                    "pattern index {} out of range",
                    e.sap
                )));
            }
            let code = e
                .code
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("bad codeword {:?}", e.code))),
                })
                .collect::<Result<Vec<bool>>>()?;
            entries.push(CodebookEntry {
                sap: e.sap - 1,
                code,
            });
        }
        let active: BTreeSet<usize> = entries.iter().map(|e| e.sap).collect();
        if active.len() != entries.len() {
            return Err(Error::Parse("duplicate pattern in codebook".into()));
        }
        let dropped = (0..doc.num_saps).filter(|i| !active.contains(i)).collect();
        let cb = Self {
            entries,
            dropped,
            c: doc.num_saps,
        };
        if !cb.is_prefix_free() || !cb.kraft_equality_holds() {
            return Err(Error::Parse(
                "codebook is not a complete prefix code".into(),
            ));
        }
        Ok(cb)
    }
}

#[derive(Serialize, Deserialize)]
struct CodebookDoc {
    entries: Vec<EntryDoc>,
    num_saps: usize,
    dropped: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    sap: usize,
    code: String,
}

/// Greedy prefix parse of a bit stream into pattern indices. The trailing
/// bits too short to match any codeword are returned as the residue.
///
/// A degenerate codebook whose single codeword is empty consumes no bits:
/// the whole stream is returned as residue.
pub fn encode(bits: &[bool], codebook: &Codebook) -> (Vec<usize>, Vec<bool>) {
    if codebook.entries.len() == 1 && codebook.entries[0].code.is_empty() {
        return (Vec::new(), bits.to_vec());
    }
    // decode trie over the codewords
    #[derive(Clone)]
    struct Node {
        child: [Option<usize>; 2],
        sap: Option<usize>,
    }
    let mut trie = vec![Node {
        child: [None, None],
        sap: None,
    }];
    for e in &codebook.entries {
        let mut at = 0;
        for &b in &e.code {
            let slot = usize::from(b);
            at = match trie[at].child[slot] {
                Some(next) => next,
                None => {
                    trie.push(Node {
                        child: [None, None],
                        sap: None,
                    });
                    let next = trie.len() - 1;
                    trie[at].child[slot] = Some(next);
                    next
                }
            };
        }
        trie[at].sap = Some(e.sap);
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut at = 0;
    for (i, &b) in bits.iter().enumerate() {
        at = trie[at].child[usize::from(b)].expect("complete code matches every prefix");
        if let Some(sap) = trie[at].sap {
            out.push(sap);
            at = 0;
            start = i + 1;
        }
    }
    (out, bits[start..].to_vec())
}

/// Concatenates the codewords of a pattern sequence; inverse of [`encode`]
/// up to the residue. Errors on patterns with a null assignment.
pub fn decode(saps: &[usize], codebook: &Codebook) -> Result<Vec<bool>> {
    let mut code_of: Vec<Option<&[bool]>> = vec![None; codebook.c];
    for e in &codebook.entries {
        code_of[e.sap] = Some(&e.code);
    }
    let mut out = Vec::new();
    for &sap in saps {
        match code_of.get(sap) {
            Some(Some(code)) => out.extend_from_slice(code),
            _ => return Err(Error::DroppedSap { sap }),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Huffman depths
// ---------------------------------------------------------------------------

/// Depths returned by the Huffman algorithm, aligned with the input order.
/// Depth 0 occurs only for a single-symbol input.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HuffmanResult {
    depths: Vec<u32>,
}

impl HuffmanResult {
    pub fn depths(&self) -> &[u32] {
        &self.depths
    }
}

/// Optimal prefix-code depths for positive probabilities summing to one
/// (within 1e-9; callers renormalize). Deterministic tie-breaking: the two
/// smallest weights merge first, ties broken by earliest creation index
/// (leaves are created in input order, merged nodes afterwards in merge
/// order).
pub fn huffman(probs: &[f64]) -> Result<HuffmanResult> {
    if probs.is_empty() {
        return Err(Error::InvalidProbability("no symbols".into()));
    }
    if !probs.iter().all(|&p| crate::math::is_positive(p)) {
        return Err(Error::InvalidProbability(
            "Huffman weights must be strictly positive".into(),
        ));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!(
            "Huffman weights sum to {sum}, expected 1"
        )));
    }
    let n = probs.len();
    if n == 1 {
        return Ok(HuffmanResult { depths: vec![0] });
    }

    #[derive(PartialEq)]
    struct Item {
        weight: f64,
        creation: usize,
    }
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.weight
                .total_cmp(&other.weight)
                .then(self.creation.cmp(&other.creation))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap: BinaryHeap<Reverse<Item>> = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            Reverse(Item {
                weight: p,
                creation: i,
            })
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect(); // parent[i] == i marks a root
    let mut next_creation = n;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        parent.push(next_creation);
        parent[a.creation] = next_creation;
        parent[b.creation] = next_creation;
        heap.push(Reverse(Item {
            weight: a.weight + b.weight,
            creation: next_creation,
        }));
        next_creation += 1;
    }
    let root = next_creation - 1;
    let depths = (0..n)
        .map(|leaf| {
            let mut at = leaf;
            let mut depth = 0;
            while at != root {
                at = parent[at];
                depth += 1;
            }
            depth
        })
        .collect();
    Ok(HuffmanResult { depths })
}

// ---------------------------------------------------------------------------
// Projection from the relaxation
// ---------------------------------------------------------------------------

/// Distance used to compare a feasible candidate against the relaxed vector.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DistanceMetric {
    /// Squared Euclidean norm of the difference.
    Euclidean,
    /// `KL(candidate || relaxed)`; infinite when the candidate puts mass on
    /// a zero of the relaxed vector.
    Kl,
    /// Total variation: the largest absolute componentwise difference.
    TotalVariation,
}

impl DistanceMetric {
    pub fn distance(self, candidate: &[f64], relaxed: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean => candidate
                .iter()
                .zip(relaxed)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
            DistanceMetric::Kl => candidate
                .iter()
                .zip(relaxed)
                .map(|(&a, &b)| {
                    if a == 0.0 {
                        0.0
                    } else if b == 0.0 {
                        f64::INFINITY
                    } else {
                        a * (a / b).ln()
                    }
                })
                .sum(),
            DistanceMetric::TotalVariation => candidate
                .iter()
                .zip(relaxed)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Kl => "kl",
            DistanceMetric::TotalVariation => "tv",
        }
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DistanceMetric::Euclidean),
            "kl" => Ok(DistanceMetric::Kl),
            "tv" => Ok(DistanceMetric::TotalVariation),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric {other:?} (expected euclidean, kl, or tv)"
            ))),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One candidate produced by the projection sweep.
#[derive(Clone, Debug)]
pub struct ProjectionCandidate {
    /// Sweep index `k`; the candidate keeps the `C - k + 1` largest entries.
    pub k: usize,
    pub vector: DyadicProbabilityVector,
    pub distance: f64,
}

/// Full projection output: every sweep candidate plus the winner.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub candidates: Vec<ProjectionCandidate>,
    pub winner: usize,
}

impl ProjectionReport {
    pub fn winner(&self) -> &ProjectionCandidate {
        &self.candidates[self.winner]
    }
}

/// Projects a relaxed probability vector onto the feasible set.
///
/// The entries are stably sorted in decreasing order; for each `k = 1..=C`
/// the top `C - k + 1` entries are renormalized, run through [`huffman`],
/// and replaced by the dyadic leaf probabilities (dropped entries become
/// zero); the candidates are unsorted back and the one closest to the input
/// under `metric` wins. Zero entries inside a window are excluded from the
/// Huffman input and stay zero. Distance ties break toward the candidate
/// with more nonzero entries, then the lowest `k`.
pub fn project_to_feasible(
    p_relaxed: &[f64],
    metric: DistanceMetric,
) -> Result<DyadicProbabilityVector> {
    Ok(project_with_report(p_relaxed, metric)?
        .winner()
        .vector
        .clone())
}

/// [`project_to_feasible`] keeping all intermediate candidates.
pub fn project_with_report(p_relaxed: &[f64], metric: DistanceMetric) -> Result<ProjectionReport> {
    check_simplex(p_relaxed, 1e-6)?;
    let c = p_relaxed.len();
    let mut order: Vec<usize> = (0..c).collect();
    // stable decreasing sort: equal entries keep their input order
    order.sort_by(|&a, &b| {
        p_relaxed[b]
            .partial_cmp(&p_relaxed[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let sorted: Vec<f64> = order.iter().map(|&i| p_relaxed[i]).collect();

    let mut candidates: Vec<ProjectionCandidate> = Vec::with_capacity(c);
    for k in 1..=c {
        let window = &sorted[..c - k + 1];
        let positive: Vec<f64> = window.iter().copied().filter(|&x| x > 0.0).collect();
        if positive.is_empty() {
            continue;
        }
        let s: f64 = positive.iter().sum();
        let normalized: Vec<f64> = positive.iter().map(|&x| x / s).collect();
        let depths = huffman(&normalized)?;
        let mut exps_sorted: Vec<Option<u8>> = vec![None; c];
        let mut di = 0;
        for (j, &val) in window.iter().enumerate() {
            if val > 0.0 {
                exps_sorted[j] = Some(
                    u8::try_from(depths.depths()[di])
                        .map_err(|_| Error::InvalidArgument("depth overflow".into()))?,
                );
                di += 1;
            }
        }
        let mut exponents = vec![None; c];
        for (slot, &orig) in order.iter().enumerate() {
            exponents[orig] = exps_sorted[slot];
        }
        let vector = DyadicProbabilityVector::from_exponents(exponents)?;
        let distance = metric.distance(&vector.values(), p_relaxed);
        candidates.push(ProjectionCandidate {
            k,
            vector,
            distance,
        });
    }

    let mut winner = 0;
    for (i, cand) in candidates.iter().enumerate().skip(1) {
        let best = &candidates[winner];
        let better = cand.distance < best.distance
            || (cand.distance == best.distance
                && cand.vector.support_size() > best.vector.support_size());
        if better {
            winner = i;
        }
    }
    Ok(ProjectionReport { candidates, winner })
}
