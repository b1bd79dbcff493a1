//! Full binary trees for bit-to-pattern encoding.
//!
//! A full binary tree with `v` internal nodes has `v + 1` leaves; a leaf at
//! depth `q` is reached by a uniform bit source with probability `2^-q`.
//! Only the number of leaves per level matters for the pattern probability
//! distribution, so trees are handled up to leaf-level-profile equivalence
//! (the "reduced set"). This module constructs the reduced sets, evaluates
//! enumeration bounds, and materializes the feasible set of dyadic
//! probability vectors obtainable by assigning patterns (including null
//! assignments) to tree leaves.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{binomial_u128, k_subsets, next_permutation};

/// Largest leaf depth supported by the exact dyadic arithmetic here.
const MAX_DEPTH: u32 = 64;

/// Capacity guard for [`build_feasible_set`]: `C = 28` covers the (8, 6)
/// configuration. The set size grows superexponentially (roughly like
/// `C! / 2` for the deepest trees), so while any `C <= 28` is accepted,
/// materialization is only practical for `C <~ 10` (about 10^7 vectors,
/// hundreds of MB); `C <= 8` stays below a few hundred thousand vectors.
pub const MAX_FEASIBLE_C: usize = 28;

// ---------------------------------------------------------------------------
// Leaf-level profiles
// ---------------------------------------------------------------------------

/// Leaf-level profile of a full binary tree: `leaf_counts[q - 1]` is the
/// number of leaves at depth `q`. Valid profiles satisfy the Kraft equality
/// `sum_q n_q 2^-q = 1` exactly.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TreeProfile {
    leaf_counts: Vec<u32>,
}

impl TreeProfile {
    /// Builds a profile from per-depth leaf counts (`leaf_counts[0]` is the
    /// count at depth 1). Rejects profiles that violate the Kraft equality
    /// or have no leaves on the deepest level.
    pub fn new(leaf_counts: Vec<u32>) -> Result<Self> {
        if leaf_counts.is_empty() {
            return Err(Error::InvalidArgument(
                "profile must have at least one level".into(),
            ));
        }
        if *leaf_counts.last().unwrap() == 0 {
            return Err(Error::InvalidArgument(
                "deepest level of a profile must contain a leaf".into(),
            ));
        }
        let p = Self { leaf_counts };
        if !p.kraft_equality_holds() {
            return Err(Error::InvalidArgument(format!(
                "profile {p} violates the Kraft equality"
            )));
        }
        Ok(p)
    }

    /// Leaf counts per depth, starting at depth 1.
    pub fn leaf_counts(&self) -> &[u32] {
        &self.leaf_counts
    }

    /// Number of leaves at depth `q` (1-based).
    pub fn leaves_at(&self, q: usize) -> u32 {
        if q >= 1 && q <= self.leaf_counts.len() {
            self.leaf_counts[q - 1]
        } else {
            0
        }
    }

    /// Maximum leaf depth `d`.
    pub fn depth(&self) -> usize {
        self.leaf_counts.len()
    }

    /// Total number of leaves, `v + 1`.
    pub fn leaf_count(&self) -> usize {
        self.leaf_counts.iter().map(|&n| n as usize).sum()
    }

    /// Number of internal nodes `v`.
    pub fn internal_nodes(&self) -> usize {
        self.leaf_count() - 1
    }

    /// Exact check of `sum_q n_q 2^-q = 1` in integer arithmetic: with
    /// `d` the maximum depth, `sum_q n_q 2^(d-q) = 2^d`.
    pub fn kraft_equality_holds(&self) -> bool {
        let d = self.leaf_counts.len() as u32;
        if d > MAX_DEPTH {
            return false;
        }
        let mut acc: u128 = 0;
        let target: u128 = 1u128 << d;
        for (idx, &n) in self.leaf_counts.iter().enumerate() {
            let q = idx as u32 + 1;
            acc += (n as u128) << (d - q);
            if acc > target {
                return false;
            }
        }
        acc == target
    }

    /// Leaf depths in ascending order, one entry per leaf.
    pub fn leaf_depths(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.leaf_count());
        for (idx, &n) in self.leaf_counts.iter().enumerate() {
            for _ in 0..n {
                out.push(idx as u32 + 1);
            }
        }
        out
    }

    /// The canonical ordered tree realizing this profile (deepest leaves
    /// leftmost); profile <-> canonical tree is a bijection.
    pub fn canonical_tree(&self) -> FullBinaryTree {
        FullBinaryTree::from_profile(self)
    }

    /// Parses the comma-separated serialization, e.g. `"1,1,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let counts: std::result::Result<Vec<u32>, _> =
            s.split(',').map(|t| t.trim().parse::<u32>()).collect();
        match counts {
            Ok(c) => Self::new(c),
            Err(e) => Err(Error::Parse(format!("bad profile string {s:?}: {e}"))),
        }
    }
}

impl fmt::Display for TreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.leaf_counts.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for TreeProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TreeProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TreeProfile::parse(&s).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Ordered trees
// ---------------------------------------------------------------------------

/// An ordered full binary tree. Every internal node has exactly two
/// children; leaves carry no payload. Used as the canonical shape behind a
/// [`TreeProfile`] and as the structure bit-to-pattern codebooks are read
/// from (left edge = 0, right edge = 1).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FullBinaryTree {
    Leaf,
    Node {
        left: Box<FullBinaryTree>,
        right: Box<FullBinaryTree>,
    },
}

impl FullBinaryTree {
    /// The protograph: one root with two leaves, `(..)`.
    pub fn protograph() -> Self {
        FullBinaryTree::Node {
            left: Box::new(FullBinaryTree::Leaf),
            right: Box::new(FullBinaryTree::Leaf),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            FullBinaryTree::Leaf => 1,
            FullBinaryTree::Node { left, right } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn internal_nodes(&self) -> usize {
        self.leaf_count() - 1
    }

    pub fn max_depth(&self) -> usize {
        match self {
            FullBinaryTree::Leaf => 0,
            FullBinaryTree::Node { left, right } => 1 + left.max_depth().max(right.max_depth()),
        }
    }

    /// Depth of every leaf in left-to-right order.
    pub fn leaf_depths(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.walk_depths(0, &mut out);
        out
    }

    fn walk_depths(&self, depth: u32, out: &mut Vec<u32>) {
        match self {
            FullBinaryTree::Leaf => out.push(depth),
            FullBinaryTree::Node { left, right } => {
                left.walk_depths(depth + 1, out);
                right.walk_depths(depth + 1, out);
            }
        }
    }

    /// Root-to-leaf edge labels for every leaf in left-to-right order;
    /// left edges are 0 (`false`), right edges are 1 (`true`).
    pub fn codewords(&self) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.walk_codes(&mut prefix, &mut out);
        out
    }

    fn walk_codes(&self, prefix: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        match self {
            FullBinaryTree::Leaf => out.push(prefix.clone()),
            FullBinaryTree::Node { left, right } => {
                prefix.push(false);
                left.walk_codes(prefix, out);
                prefix.pop();
                prefix.push(true);
                right.walk_codes(prefix, out);
                prefix.pop();
            }
        }
    }

    /// Leaf-level profile of this tree. Errors only for the bare leaf,
    /// which has no profile (zero internal nodes).
    pub fn profile(&self) -> Result<TreeProfile> {
        if matches!(self, FullBinaryTree::Leaf) {
            return Err(Error::InvalidArgument(
                "the single-leaf tree has no leaf-level profile".into(),
            ));
        }
        let depths = self.leaf_depths();
        let d = *depths.iter().max().unwrap() as usize;
        let mut counts = vec![0u32; d];
        for q in depths {
            counts[q as usize - 1] += 1;
        }
        TreeProfile::new(counts)
    }

    /// Canonical ordered realization of a profile: deeper leaves are packed
    /// to the left, so equal profiles always produce identical trees.
    pub fn from_profile(profile: &TreeProfile) -> Self {
        // Canonical prefix codes assign lexicographically increasing
        // codewords to leaves sorted by increasing depth; complementing all
        // bits mirrors the tree so the deepest leaves end up leftmost.
        let depths = profile.leaf_depths();
        let mut codes: Vec<Vec<bool>> = Vec::with_capacity(depths.len());
        let mut code: u64 = 0;
        let mut prev_len = depths[0];
        for (i, &q) in depths.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (q - prev_len);
                prev_len = q;
            }
            let complement = !code & ((1u64 << q) - 1);
            codes.push((0..q).rev().map(|b| (complement >> b) & 1 == 1).collect());
        }
        Self::from_codewords(codes).expect("valid profile yields a complete code")
    }

    /// Builds the tree realizing a complete prefix-free codeword set.
    pub fn from_codewords(mut codes: Vec<Vec<bool>>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::InvalidArgument("no codewords".into()));
        }
        codes.sort();
        Self::build_node(&codes, 0)
    }

    fn build_node(codes: &[Vec<bool>], depth: usize) -> Result<Self> {
        if codes.len() == 1 && codes[0].len() == depth {
            return Ok(FullBinaryTree::Leaf);
        }
        if codes.iter().any(|c| c.len() <= depth) {
            return Err(Error::InvalidArgument(
                "codeword set is not prefix-free".into(),
            ));
        }
        let split = codes.partition_point(|c| !c[depth]);
        if split == 0 || split == codes.len() {
            return Err(Error::InvalidArgument(
                "codeword set is not complete (a node has one child)".into(),
            ));
        }
        Ok(FullBinaryTree::Node {
            left: Box::new(Self::build_node(&codes[..split], depth + 1)?),
            right: Box::new(Self::build_node(&codes[split..], depth + 1)?),
        })
    }

    /// Parenthesis serialization: a leaf is `.`, an internal node is
    /// `(<left><right>)`; the protograph is `(..)`.
    pub fn paren_string(&self) -> String {
        let mut s = String::new();
        self.write_paren(&mut s);
        s
    }

    fn write_paren(&self, s: &mut String) {
        match self {
            FullBinaryTree::Leaf => s.push('.'),
            FullBinaryTree::Node { left, right } => {
                s.push('(');
                left.write_paren(s);
                right.write_paren(s);
                s.push(')');
            }
        }
    }

    /// Parses the parenthesis serialization.
    pub fn parse_paren(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let (tree, used) = Self::parse_at(bytes, 0)?;
        if used != bytes.len() {
            return Err(Error::Parse(format!("trailing input in tree string {s:?}")));
        }
        Ok(tree)
    }

    fn parse_at(bytes: &[u8], pos: usize) -> Result<(Self, usize)> {
        match bytes.get(pos) {
            Some(b'.') => Ok((FullBinaryTree::Leaf, pos + 1)),
            Some(b'(') => {
                let (left, p1) = Self::parse_at(bytes, pos + 1)?;
                let (right, p2) = Self::parse_at(bytes, p1)?;
                if bytes.get(p2) != Some(&b')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                Ok((
                    FullBinaryTree::Node {
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    p2 + 1,
                ))
            }
            other => Err(Error::Parse(format!(
                "unexpected {:?} at offset {pos}",
                other.map(|&b| b as char)
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Reduced-set construction and enumeration bounds
// ---------------------------------------------------------------------------

/// The reduced set of `v`-node full binary trees, one representative per
/// leaf-level profile, sorted lexicographically by profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedTreeSet {
    v: usize,
    trees: Vec<TreeProfile>,
}

impl ReducedTreeSet {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn trees(&self) -> &[TreeProfile] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// JSON serialization: an array of `{"profile": "...", "tree": "..."}`
    /// objects, the tree given as a canonical parenthesis string.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self).expect("tree set serializes")
    }
}

impl Serialize for ReducedTreeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            profile: String,
            tree: String,
        }
        let mut seq = s.serialize_seq(Some(self.trees.len()))?;
        for t in &self.trees {
            seq.serialize_element(&Entry {
                profile: t.to_string(),
                tree: t.canonical_tree().paren_string(),
            })?;
        }
        seq.end()
    }
}

/// Constructs the complete reduced set of `v`-node full binary trees.
///
/// Starting from the protograph, each tree of the previous set is grown by
/// appending the protograph to the left-most leaf on the lowest level, and
/// to the left-most available leaf on the next-to-lowest level where such a
/// leaf exists. On leaf-level profiles those two moves are
/// `n_d -= 1, n_{d+1} += 2` and `n_{d-1} -= 1, n_d += 2`.
///
/// Rejects `v = 0`: the single-leaf tree has no profile and is handled by
/// the feasible-set builder directly.
pub fn construct_reduced_set(v: usize) -> Result<ReducedTreeSet> {
    Ok(reduced_sets_up_to(v)?.pop().expect("nonempty for v >= 1"))
}

/// All reduced sets for `1..=v_max` in one pass.
pub fn reduced_sets_up_to(v_max: usize) -> Result<Vec<ReducedTreeSet>> {
    if v_max == 0 {
        return Err(Error::InvalidArgument(
            "reduced sets are defined for v >= 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(v_max);
    let mut current: BTreeSet<Vec<u32>> = BTreeSet::new();
    current.insert(vec![2]);
    push_set(&mut out, 1, &current);
    for v in 2..=v_max {
        let mut next = BTreeSet::new();
        for t in &current {
            let d = t.len();
            // grow at the lowest level: new level d+1 with one protograph
            let mut grown = t.clone();
            grown[d - 1] -= 1;
            grown.push(2);
            next.insert(grown);
            // grow at the next-to-lowest level where a leaf exists
            if d >= 2 && t[d - 2] >= 1 {
                let mut grown = t.clone();
                grown[d - 2] -= 1;
                grown[d - 1] += 2;
                next.insert(grown);
            }
        }
        current = next;
        push_set(&mut out, v, &current);
    }
    Ok(out)
}

fn push_set(out: &mut Vec<ReducedTreeSet>, v: usize, profiles: &BTreeSet<Vec<u32>>) {
    let trees = profiles
        .iter()
        .map(|c| TreeProfile::new(c.clone()).expect("construction preserves Kraft equality"))
        .collect();
    out.push(ReducedTreeSet { v, trees });
}

/// Catalan number `c_v = C(2v, v) / (v + 1)`, the count of ordered full
/// binary trees with `v` internal nodes.
pub fn catalan(v: usize) -> BigUint {
    let mut result = BigUint::from(1u32);
    for i in 1..=v {
        result = result * BigUint::from((v + i) as u64) / BigUint::from(i as u64);
    }
    result / BigUint::from((v + 1) as u64)
}

/// Loose reduced-set bound `2^(v-1)`: each growth step at most doubles the
/// set.
pub fn loose_bound(v: usize) -> BigUint {
    assert!(v >= 1, "loose bound defined for v >= 1");
    BigUint::from(1u32) << (v - 1)
}

/// Recurrence upper bound on the reduced-set sizes: `B_1 = 1` and
///
/// `B_v = 2 B_{v-1} - delta_v - sum_{q=2}^{floor(log2(v-1))} B_{v-2^q}`
///
/// with `delta_v = 1` iff `v` is a power of two and the sum empty for
/// `v < 5`. The recursion runs over the bound values themselves; it matches
/// the true counts exactly for `v <= 9`.
pub fn tight_bound_recurrence(v_max: usize) -> Vec<BigUint> {
    assert!(v_max >= 1, "recurrence defined for v >= 1");
    let mut b: Vec<BigUint> = Vec::with_capacity(v_max);
    b.push(BigUint::from(1u32)); // B_1
    for v in 2..=v_max {
        let mut value = BigUint::from(2u32) * &b[v - 2];
        if v.is_power_of_two() {
            value -= BigUint::from(1u32);
        }
        if v >= 5 {
            let top = (v - 1).ilog2();
            for q in 2..=top {
                let idx = v - (1usize << q); // v - 2^q >= 1 since 2^q <= v - 1
                value -= &b[idx - 1];
            }
        }
        b.push(value);
    }
    b
}

/// Number of probability-distinct pattern-to-leaf assignments for a tree
/// with profile `profile` when all `v + 1` leaves are filled from a pool of
/// `c` patterns: the multinomial `(v+1)! / (n_1! ... n_d!)`. The caller
/// accounts for which patterns are active via `C(c, v+1)`.
pub fn assignment_count(profile: &TreeProfile, c: usize) -> Result<BigUint> {
    let leaves = profile.leaf_count();
    if c < leaves {
        return Err(Error::InvalidArgument(format!(
            "need at least {leaves} patterns to fill the leaves, got {c}"
        )));
    }
    let mut result = factorial(leaves);
    for &n in profile.leaf_counts() {
        result /= factorial(n as usize);
    }
    Ok(result)
}

fn factorial(n: usize) -> BigUint {
    let mut f = BigUint::from(1u32);
    for i in 2..=n {
        f *= BigUint::from(i as u64);
    }
    f
}

// ---------------------------------------------------------------------------
// Dyadic probability vectors and the feasible set
// ---------------------------------------------------------------------------

/// A pattern probability vector realizable by binary-tree encoding: each
/// entry is 0 or `2^-q`, stored as the exact exponent (`None` for zero), and
/// the entries sum to exactly one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DyadicProbabilityVector {
    exponents: Vec<Option<u8>>,
}

impl DyadicProbabilityVector {
    /// Builds from per-entry exponents (`Some(q)` for probability `2^-q`,
    /// `None` for zero), verifying the exact unit sum.
    pub fn from_exponents(exponents: Vec<Option<u8>>) -> Result<Self> {
        let q_max = exponents.iter().flatten().copied().max();
        let q_max = match q_max {
            Some(q) if u32::from(q) <= MAX_DEPTH => u32::from(q),
            Some(q) => {
                return Err(Error::InvalidArgument(format!(
                    "exponent {q} exceeds supported depth {MAX_DEPTH}"
                )))
            }
            None => {
                return Err(Error::InvalidProbability(
                    "all-zero vector is not a probability distribution".into(),
                ))
            }
        };
        let mut acc: u128 = 0;
        for q in exponents.iter().flatten() {
            acc += 1u128 << (q_max - u32::from(*q));
        }
        if acc != 1u128 << q_max {
            return Err(Error::InvalidProbability(
                "dyadic entries do not sum to one".into(),
            ));
        }
        Ok(Self { exponents })
    }

    /// The one-hot vector on entry `i`.
    pub fn one_hot(len: usize, i: usize) -> Self {
        assert!(i < len);
        let mut exponents = vec![None; len];
        exponents[i] = Some(0);
        Self { exponents }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Exponent of entry `i` (`None` when the entry is zero).
    pub fn exponent(&self, i: usize) -> Option<u8> {
        self.exponents[i]
    }

    pub fn exponents(&self) -> &[Option<u8>] {
        &self.exponents
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.exponents.iter().flatten().count()
    }

    /// Entries as floats; dyadics are exact in f64.
    pub fn values(&self) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| match e {
                Some(q) => (-(f64::from(*q))).exp2(),
                None => 0.0,
            })
            .collect()
    }

    /// The multiset of nonzero leaf depths, ascending.
    pub fn depth_multiset(&self) -> Vec<u8> {
        let mut d: Vec<u8> = self.exponents.iter().flatten().copied().collect();
        d.sort_unstable();
        d
    }
}

impl fmt::Display for DyadicProbabilityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values().iter().map(|v| format!("{v}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Visits every feasible dyadic probability vector of length `c` built from
/// trees with `v` in `v_range` (where `v = 0` denotes the degenerate single
/// SAP), in a deterministic order: `v` ascending, profiles lexicographic,
/// active subsets lexicographic, exponent arrangements lexicographic.
pub fn visit_feasible<F: FnMut(DyadicProbabilityVector)>(
    c: usize,
    v_range: std::ops::RangeInclusive<usize>,
    mut f: F,
) -> Result<()> {
    if c < 1 {
        return Err(Error::InvalidArgument("need c >= 1".into()));
    }
    let v_max = *v_range.end();
    if v_max >= c {
        return Err(Error::InvalidArgument(format!(
            "trees with v = {v_max} have more leaves than the {c} patterns"
        )));
    }
    for v in v_range {
        if v == 0 {
            for i in 0..c {
                f(DyadicProbabilityVector::one_hot(c, i));
            }
            continue;
        }
        let set = construct_reduced_set(v)?;
        let leaves = v + 1;
        let subsets = k_subsets(c, leaves);
        for profile in set.trees() {
            let base: Vec<u8> = profile
                .leaf_depths()
                .iter()
                .map(|&q| u8::try_from(q).expect("desk-scale depth"))
                .collect();
            for subset in &subsets {
                let mut arrangement = base.clone();
                loop {
                    let mut exponents = vec![None; c];
                    for (pos, &q) in subset.iter().zip(&arrangement) {
                        exponents[*pos] = Some(q);
                    }
                    f(DyadicProbabilityVector { exponents });
                    if !next_permutation(&mut arrangement) {
                        break;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Materializes the full feasible set of dyadic probability vectors for `c`
/// patterns, i.e. everything reachable with trees of `v = 0 ..= c-1`
/// (including null assignments). Guarded at `c <=` [`MAX_FEASIBLE_C`]; see
/// the guard's documentation for the practical memory limits.
pub fn build_feasible_set(c: usize) -> Result<Vec<DyadicProbabilityVector>> {
    if !(2..=MAX_FEASIBLE_C).contains(&c) {
        return Err(Error::CapacityExceeded {
            what: "feasible-set size parameter C",
            value: c,
            max: MAX_FEASIBLE_C,
        });
    }
    let mut out = Vec::new();
    visit_feasible(c, 0..=c - 1, |p| out.push(p))?;
    Ok(out)
}

/// Exact cardinality of the class of feasible vectors built from `v`-node
/// trees: `C(c, v+1) * sum_t (v+1)!/(n_t1! ... n_td!)`.
pub fn feasible_class_size(c: usize, v: usize) -> Result<BigUint> {
    if v >= c {
        return Err(Error::InvalidArgument(format!(
            "v = {v} needs more leaves than the {c} patterns"
        )));
    }
    if v == 0 {
        return Ok(BigUint::from(c as u64));
    }
    let set = construct_reduced_set(v)?;
    let mut total = BigUint::ZERO;
    for profile in set.trees() {
        total += assignment_count(profile, c)?;
    }
    Ok(total * BigUint::from(binomial_u128(c, v + 1)))
}
