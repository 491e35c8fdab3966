//! Partitions of the chain and the three families `Q_l`, `P_l`, `R_l`.
//!
//! * `Q_l`: `l` convex blocks `A_1 < ... < A_l`.
//! * `P_l` (`l >= 2`): convex blocks `A_2 < ... < A_l` together with a block `A_1`
//!   made of a nonempty prefix and a nonempty suffix of the chain, so `1, n ∈ A_1`.
//! * `R_l`: every other partition into `l` blocks.
//!
//! The one-block partition `{X}` is classified as `Q_1`; `P_1` is empty.

use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::chain::{join, parse_list};
use crate::error::{Error, Result};

/// A partition of `{1, ..., n}` stored as block labels `1..=l`, numbered by
/// first occurrence. Equal partitions therefore have equal label sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Q,
    P,
    R,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Q => "Q",
            Family::P => "P",
            Family::R => "R",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionClass {
    pub family: Family,
    pub blocks: usize,
}

/// Whether `s` is an interval of the chain `{1..n}`.
pub fn is_convex(s: &[usize], n: usize) -> bool {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    match (v.first(), v.last()) {
        (Some(&lo), Some(&hi)) => lo >= 1 && hi <= n && hi - lo + 1 == v.len(),
        _ => false,
    }
}

/// Maximal runs of consecutive integers in a sorted block.
fn runs(block: &[usize]) -> usize {
    if block.is_empty() {
        return 0;
    }
    1 + block.windows(2).filter(|w| w[1] != w[0] + 1).count()
}

impl Partition {
    /// Canonicalises an arbitrary labelling (any values, equal value = same block).
    pub fn from_labels<T: PartialEq>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidPartition("partition of an empty set".into()));
        }
        let mut seen: Vec<&T> = Vec::new();
        let labels = raw
            .iter()
            .map(|v| match seen.iter().position(|s| *s == v) {
                Some(i) => i + 1,
                None => {
                    seen.push(v);
                    seen.len()
                }
            })
            .collect();
        Ok(Partition {
            labels,
            blocks: seen.len(),
        })
    }

    /// Builds a partition of `{1..n}` from explicit blocks.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![0usize; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &x in block {
                if x == 0 || x > n {
                    return Err(Error::InvalidPartition(format!("{x} is outside 1..={n}")));
                }
                if raw[x - 1] != 0 {
                    return Err(Error::InvalidPartition(format!("{x} appears twice")));
                }
                raw[x - 1] = b + 1;
            }
        }
        if let Some(x) = raw.iter().position(|&l| l == 0) {
            return Err(Error::InvalidPartition(format!("{} is not covered", x + 1)));
        }
        Partition::from_labels(&raw)
    }

    /// Parses `1,4|2,3`; `n` is the number of listed elements.
    pub fn parse(literal: &str) -> Result<Self> {
        let blocks = literal
            .trim()
            .split('|')
            .map(parse_list)
            .collect::<Result<Vec<_>>>()?;
        let n = blocks.iter().map(Vec::len).sum();
        Partition::from_blocks(n, &blocks)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// Label sequence; `labels()[x - 1]` is the block of `x`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.labels[x - 1]
    }

    /// Blocks in label order, i.e. ordered by their minima; each block ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i + 1);
        }
        out
    }

    pub fn block(&self, label: usize) -> Vec<usize> {
        (1..=self.n())
            .filter(|&x| self.block_of(x) == label)
            .collect()
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        let mut image = vec![0usize; self.blocks + 1];
        self.labels.iter().zip(&coarser.labels).all(|(&l, &c)| {
            if image[l] == 0 {
                image[l] = c;
            }
            image[l] == c
        })
    }

    pub fn classify(&self) -> PartitionClass {
        PartitionClass {
            family: self.family(),
            blocks: self.blocks,
        }
    }

    pub fn family(&self) -> Family {
        let n = self.n();
        let blocks = self.blocks();
        if blocks.iter().all(|b| runs(b) == 1) {
            return Family::Q;
        }
        let first = &blocks[0];
        let others_convex = blocks[1..].iter().all(|b| runs(b) == 1);
        if others_convex && first.last() == Some(&n) && runs(first) == 2 {
            Family::P
        } else {
            Family::R
        }
    }

    /// Label of the first block that is not convex and is not a prefix-plus-suffix
    /// pair containing both `1` and `n`. Such a block exists exactly for `R`.
    pub fn r_block(&self) -> Option<usize> {
        let n = self.n();
        self.blocks()
            .iter()
            .position(|b| {
                let r = runs(b);
                r >= 2 && !(r == 2 && b[0] == 1 && b[b.len() - 1] == n)
            })
            .map(|i| i + 1)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks().iter().map(|b| join(b)).collect();
        f.write_str(&parts.join("|"))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(serializer)
    }
}

/// Interval partition from cut points: a cut `c` separates `c` from `c + 1`.
fn from_cuts(n: usize, cuts: &[usize]) -> Vec<usize> {
    let mut labels = Vec::with_capacity(n);
    let mut label = 1;
    let mut next = cuts.iter().peekable();
    for x in 1..=n {
        labels.push(label);
        if next.peek() == Some(&&x) {
            next.next();
            label += 1;
        }
    }
    labels
}

/// `Q_l`: partitions into `l` ordered intervals, by cut vectors in lexicographic
/// order. Yields `C(n-1, l-1)` items; nothing when `l` is outside `1..=n`.
pub fn enumerate_q(n: usize, l: usize) -> impl Iterator<Item = Partition> {
    let valid = n >= 1 && (1..=n).contains(&l);
    let k = if valid { l - 1 } else { 0 };
    (1..n)
        .combinations(k)
        .filter(move |_| valid)
        .map(move |cuts| Partition {
            labels: from_cuts(n, &cuts),
            blocks: l,
        })
}

/// `P_l` for `2 <= l <= n-1`: interval partitions into `l + 1` pieces with the
/// first and last piece merged. Yields `C(n-1, l)` items.
pub fn enumerate_p(n: usize, l: usize) -> Result<impl Iterator<Item = Partition>> {
    if l < 2 || l + 1 > n {
        return Err(Error::InvalidArity { n, blocks: l });
    }
    Ok((1..n).combinations(l).map(move |cuts| {
        let mut labels = from_cuts(n, &cuts);
        for v in labels.iter_mut() {
            if *v == l + 1 {
                *v = 1;
            }
        }
        Partition { labels, blocks: l }
    }))
}

/// All partitions of `{1..n}` into exactly `l` blocks, as restricted-growth
/// strings in lexicographic order. Yields `S(n, l)` items.
pub fn enumerate_all(n: usize, l: usize) -> AllPartitions {
    AllPartitions::new(n, l)
}

/// `R_l`: everything in [`enumerate_all`] that is neither `Q` nor `P`.
pub fn enumerate_r(n: usize, l: usize) -> impl Iterator<Item = Partition> {
    enumerate_all(n, l).filter(|p| p.family() == Family::R)
}

/// Lexicographic restricted-growth strings (0-based internally) with exactly
/// `l` distinct values.
pub struct AllPartitions {
    n: usize,
    l: usize,
    current: Option<Vec<usize>>,
}

impl AllPartitions {
    fn new(n: usize, l: usize) -> Self {
        let current = if n >= 1 && (1..=n).contains(&l) {
            let mut a = vec![0; n];
            Self::complete(&mut a, 0, 0, l);
            Some(a)
        } else {
            None
        };
        AllPartitions { n, l, current }
    }

    // Fills a[from..] with the smallest completion reaching l labels, given the
    // current maximum label `max`.
    fn complete(a: &mut [usize], from: usize, mut max: usize, l: usize) {
        let n = a.len();
        for j in from..n {
            let remaining = n - j;
            let missing = l - 1 - max;
            if from == 0 && j == 0 {
                a[0] = 0;
                continue;
            }
            if remaining > missing {
                a[j] = 0;
            } else {
                max += 1;
                a[j] = max;
            }
        }
    }

    fn advance(&mut self) {
        let Some(a) = self.current.as_mut() else {
            return;
        };
        let n = self.n;
        let l = self.l;
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(a[i - 1]);
        }
        for i in (1..n).rev() {
            let bound = prefix_max[i] + 1;
            if a[i] < bound && a[i] + 1 < l {
                let new_max = prefix_max[i].max(a[i] + 1);
                // Labels still to introduce must fit in the remaining positions.
                if l - 1 - new_max < n - i {
                    a[i] += 1;
                    Self::complete(a, i + 1, new_max, l);
                    return;
                }
            }
        }
        self.current = None;
    }
}

impl Iterator for AllPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let a = self.current.clone()?;
        self.advance();
        Some(Partition {
            labels: a.into_iter().map(|v| v + 1).collect(),
            blocks: self.l,
        })
    }
}

/// Refines `p ∈ P_i` (or the one-block partition) to a member of `P_m`.
///
/// `p` is cut into its interval pieces (the first block contributes its prefix
/// and its suffix); the leftmost piece of size at least two loses its left end
/// until `m + 1` pieces exist, and then the first and last pieces are merged.
pub fn refine_to_p(p: &Partition, m: usize) -> Result<Partition> {
    let n = p.n();
    let infeasible = |reason: &str| Error::InfeasibleRefinement {
        partition: p.to_string(),
        reason: reason.to_string(),
    };
    if m < 2 || m + 1 > n {
        return Err(infeasible("target block count must satisfy 2 <= m <= n-1"));
    }
    let blocks = p.blocks();
    let mut pieces: Vec<Vec<usize>> = match (p.num_blocks(), p.family()) {
        (1, _) => vec![blocks[0].clone()],
        (_, Family::P) => {
            let first = &blocks[0];
            let split = first
                .windows(2)
                .position(|w| w[1] != w[0] + 1)
                .expect("P blocks have a gap")
                + 1;
            let mut v = vec![first[..split].to_vec()];
            v.extend(blocks[1..].iter().cloned());
            v.push(first[split..].to_vec());
            v
        }
        _ => {
            return Err(infeasible(
                "only P-family or one-block partitions refine into P_m",
            ))
        }
    };
    if pieces.len() > m + 1 {
        return Err(infeasible("partition already has more than m blocks"));
    }
    while pieces.len() < m + 1 {
        let i = pieces
            .iter()
            .position(|piece| piece.len() >= 2)
            .expect("m + 1 <= n leaves a piece to cut");
        let head = pieces[i].remove(0);
        pieces.insert(i, vec![head]);
    }
    let last = pieces.pop().expect("at least three pieces");
    pieces[0].extend(last);
    let out = Partition::from_blocks(n, &pieces)?;
    debug_assert!(out.refines(p) && out.family() == Family::P && out.num_blocks() == m);
    Ok(out)
}

/// Refines `p ∈ R_k` to a member of `R_m`, `k <= m <= n - 1`.
///
/// Keeps a two-element witness `{d, e}` of the first `R`-block intact: other
/// blocks are split first (leftmost block, left end), and only then does the
/// witness block shed elements, starting with whichever of `1`, `n` it holds
/// outside the witness.
pub fn refine_to_r(p: &Partition, m: usize) -> Result<Partition> {
    let n = p.n();
    let infeasible = |reason: &str| Error::InfeasibleRefinement {
        partition: p.to_string(),
        reason: reason.to_string(),
    };
    let k = p.num_blocks();
    if m < k || m + 1 > n {
        return Err(infeasible("target block count must satisfy k <= m <= n-1"));
    }
    let d_label = p
        .r_block()
        .ok_or_else(|| infeasible("partition is not in R"))?;
    let mut blocks = p.blocks();
    let d_idx = d_label - 1;
    let d_block = blocks[d_idx].clone();
    let (d, e) = d_block
        .windows(2)
        .map(|w| (w[0], w[1]))
        .find(|&(a, b)| b != a + 1 && (a, b) != (1, n))
        .expect("an R-block has a gap pair other than (1, n)");

    let mut needed = m - k;
    while needed > 0 {
        if let Some(i) = (0..blocks.len()).find(|&i| i != d_idx && blocks[i].len() >= 2) {
            let head = blocks[i].remove(0);
            blocks.push(vec![head]);
            needed -= 1;
        } else {
            break;
        }
    }
    if needed > 0 {
        let mut order: Vec<usize> = Vec::new();
        for end in [1, n] {
            if d_block.contains(&end) && end != d && end != e {
                order.push(end);
            }
        }
        let ends = order.clone();
        order.extend(
            d_block
                .iter()
                .copied()
                .filter(|x| !ends.contains(x) && *x != d && *x != e),
        );
        for x in order.into_iter().take(needed) {
            blocks[d_idx].retain(|&v| v != x);
            blocks.push(vec![x]);
            needed -= 1;
        }
    }
    if needed > 0 {
        return Err(infeasible("not enough elements to split"));
    }
    let out = Partition::from_blocks(n, &blocks)?;
    if out.family() != Family::R || !out.refines(p) || out.num_blocks() != m {
        return Err(infeasible("refinement left the R family"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{binomial, stirling2};

    fn part(s: &str) -> Partition {
        Partition::parse(s).unwrap()
    }

    #[test]
    fn canonical_labels() {
        let p = Partition::from_labels(&[7, 3, 7, 3, 9]).unwrap();
        assert_eq!(p.labels(), &[1, 2, 1, 2, 3]);
        assert_eq!(p, part("1,3|2,4|5"));
        assert_eq!(part("2,4|1,3|5"), part("1,3|2,4|5"));
        assert!(Partition::parse("1,2|2").is_err());
        assert!(Partition::parse("1,3").is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            part("1,2|3,4").classify(),
            PartitionClass {
                family: Family::Q,
                blocks: 2
            }
        );
        assert_eq!(
            part("1,4|2,3").classify(),
            PartitionClass {
                family: Family::P,
                blocks: 2
            }
        );
        assert_eq!(
            part("1,3|2,4").classify(),
            PartitionClass {
                family: Family::R,
                blocks: 2
            }
        );
        assert_eq!(part("1,2,3,4").family(), Family::Q);
        // Prefix-plus-suffix block but another block is not convex.
        assert_eq!(part("1,6|2,4|3,5").family(), Family::R);
        // Three runs in the block holding 1 and n.
        assert_eq!(part("1,3,5|2|4").family(), Family::R);
    }

    #[test]
    fn convexity() {
        assert!(is_convex(&[2, 3, 4], 5));
        assert!(!is_convex(&[1, 3], 5));
        assert!(is_convex(&[5], 5));
        assert!(!is_convex(&[6], 5));
    }

    #[test]
    fn q_enumeration() {
        let v: Vec<String> = enumerate_q(3, 2).map(|p| p.to_string()).collect();
        assert_eq!(v, ["1|2,3", "1,2|3"]);
        assert_eq!(
            enumerate_q(4, 1).map(|p| p.to_string()).collect::<Vec<_>>(),
            ["1,2,3,4"]
        );
        assert_eq!(enumerate_q(5, 2).count(), 4);
        assert_eq!(enumerate_q(3, 0).count(), 0);
        assert_eq!(enumerate_q(3, 4).count(), 0);
    }

    #[test]
    fn p_enumeration() {
        let mut v: Vec<Partition> = enumerate_p(4, 2).unwrap().collect();
        v.sort();
        let mut expected = vec![part("1,4|2,3"), part("1,3,4|2"), part("1,2,4|3")];
        expected.sort();
        assert_eq!(v, expected);
        assert_eq!(enumerate_p(5, 2).unwrap().count(), 6);
        let v: Vec<String> = enumerate_p(4, 3).unwrap().map(|p| p.to_string()).collect();
        assert_eq!(v, ["1,4|2|3"]);
        assert!(matches!(enumerate_p(4, 1), Err(Error::InvalidArity { .. })));
        assert!(matches!(enumerate_p(4, 4), Err(Error::InvalidArity { .. })));
    }

    #[test]
    fn all_and_r_enumeration() {
        assert_eq!(enumerate_all(4, 2).count(), 7);
        assert_eq!(enumerate_all(3, 3).count(), 1);
        assert_eq!(enumerate_all(5, 3).count(), 25);
        assert_eq!(enumerate_all(1, 1).count(), 1);
        assert_eq!(enumerate_all(3, 4).count(), 0);
        let r: Vec<String> = enumerate_r(4, 2).map(|p| p.to_string()).collect();
        assert_eq!(r, ["1,3|2,4"]);
        assert_eq!(enumerate_r(3, 2).count(), 0);
        assert_eq!(enumerate_r(5, 3).count(), 15);
    }

    #[test]
    fn restricted_growth_order_is_lexicographic_and_unique() {
        for n in 1..=7 {
            for l in 1..=n {
                let v: Vec<Vec<usize>> = enumerate_all(n, l).map(|p| p.labels().to_vec()).collect();
                assert!(v.windows(2).all(|w| w[0] < w[1]), "n={n} l={l}");
                assert_eq!(v.len() as u64, stirling2(n as u64, l as u64).unwrap());
                assert!(enumerate_all(n, l).all(|p| p.num_blocks() == l));
            }
        }
    }

    #[test]
    fn family_counts_small() {
        for n in 2..=7usize {
            for l in 2..=n {
                let c = |a: usize, b: usize| binomial(a as u64, b as u64).unwrap() as usize;
                assert_eq!(enumerate_q(n, l).count(), c(n - 1, l - 1));
                let p = enumerate_p(n, l).map(|it| it.count()).unwrap_or(0);
                assert_eq!(p, c(n - 1, l));
            }
        }
    }

    #[test]
    fn refine_to_p_examples() {
        let p = part("1,4,5|2,3");
        let r = refine_to_p(&p, 3).unwrap();
        assert!(r.refines(&p));
        assert_eq!(
            r.classify(),
            PartitionClass {
                family: Family::P,
                blocks: 3
            }
        );

        let same = part("1,4|2,3");
        assert_eq!(refine_to_p(&same, 2).unwrap(), same);

        let whole = part("1,2,3,4");
        let r = refine_to_p(&whole, 2).unwrap();
        assert_eq!(r.family(), Family::P);
        assert_eq!(r.num_blocks(), 2);

        assert!(refine_to_p(&part("1,2|3,4"), 3).is_err());
        assert!(refine_to_p(&whole, 4).is_err());
        assert!(refine_to_p(&part("1,5|2|3|4"), 3).is_err());
    }

    #[test]
    fn refine_to_r_keeps_family() {
        for n in 4..=8 {
            for k in 2..n {
                for p in enumerate_r(n, k) {
                    for m in k..n {
                        let r = refine_to_r(&p, m).unwrap();
                        assert!(r.refines(&p));
                        assert_eq!(r.family(), Family::R);
                        assert_eq!(r.num_blocks(), m);
                    }
                }
            }
        }
        assert!(refine_to_r(&part("1,2|3,4"), 3).is_err());
    }

    #[test]
    fn json_is_list_of_blocks() {
        let v = serde_json::to_value(part("1,4|2,3")).unwrap();
        assert_eq!(v, serde_json::json!([[1, 4], [2, 3]]));
    }
}
