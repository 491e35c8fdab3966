//! Chains, transformations with restricted range, and their restrictions to `Y`.
//!
//! Points of the chain `X = {1 < 2 < ... < n}` are 1-based throughout. Maps act
//! on the right: in the product `f.compose(&g)` the map `f` is applied first.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

const NOT_IN_Y: usize = usize::MAX;

/// The pair `(n, Y)`: the chain `X = {1, ..., n}` and the range `Y ⊆ X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawContext", into = "RawContext")]
pub struct ChainContext {
    n: usize,
    y: Vec<usize>,
    // slot[x - 1] is the 0-based index of x in Y, or NOT_IN_Y.
    slot: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawContext {
    n: usize,
    y: Vec<usize>,
}

impl TryFrom<RawContext> for ChainContext {
    type Error = Error;

    fn try_from(raw: RawContext) -> Result<Self> {
        Self::build(raw.n, raw.y)
    }
}

impl From<ChainContext> for RawContext {
    fn from(ctx: ChainContext) -> Self {
        RawContext { n: ctx.n, y: ctx.y }
    }
}

impl ChainContext {
    /// Validates `(n, Y)`; `y` must be strictly increasing inside `1..=n`.
    pub fn new(n: usize, y: &[usize]) -> Result<Arc<Self>> {
        Self::build(n, y.to_vec()).map(Arc::new)
    }

    fn build(n: usize, y: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidContext("n must be positive".into()));
        }
        if y.is_empty() {
            return Err(Error::InvalidContext("Y must be nonempty".into()));
        }
        if y.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidContext(format!(
                "Y must be strictly increasing, got {y:?}"
            )));
        }
        if y[0] < 1 || y[y.len() - 1] > n {
            return Err(Error::InvalidContext(format!(
                "Y must lie in 1..={n}, got {y:?}"
            )));
        }
        let mut slot = vec![NOT_IN_Y; n];
        for (i, &a) in y.iter().enumerate() {
            slot[a - 1] = i;
        }
        Ok(ChainContext { n, y, slot })
    }

    /// Every context on `n` points, ordered by `|Y|` and then lexicographically.
    pub fn all_for(n: usize) -> Vec<Arc<Self>> {
        use itertools::Itertools;
        (1..=n)
            .flat_map(|m| (1..=n).combinations(m))
            .map(|y| ChainContext::new(n, &y).expect("combinations are valid ranges"))
            .collect()
    }

    /// Parses the literal form `n=4 Y=2,3`.
    pub fn parse(literal: &str) -> Result<Arc<Self>> {
        let mut n = None;
        let mut y = None;
        for token in literal.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{token}`")))?;
            match key {
                "n" => {
                    n = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("bad n `{value}`: {e}")))?,
                    )
                }
                "Y" | "y" => y = Some(parse_list(value)?),
                _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
            }
        }
        match (n, y) {
            (Some(n), Some(y)) => ChainContext::new(n, &y),
            _ => Err(Error::Parse(format!(
                "context literal needs both n= and Y=, got `{literal}`"
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    /// `a_i` for `1 <= i <= m`.
    pub fn a(&self, i: usize) -> usize {
        self.y[i - 1]
    }

    /// 0-based position of `x` in `Y`.
    pub fn index_in_y(&self, x: usize) -> Option<usize> {
        match self.slot.get(x.wrapping_sub(1)) {
            Some(&s) if s != NOT_IN_Y => Some(s),
            _ => None,
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.index_in_y(x).is_some()
    }

    pub fn one_in_y(&self) -> bool {
        self.y[0] == 1
    }

    pub fn n_in_y(&self) -> bool {
        self.y[self.y.len() - 1] == self.n
    }

    /// `{1, n} ⊆ Y`, the dichotomy that splits the `OP` modulo `O` formula.
    pub fn contains_both_ends(&self) -> bool {
        self.one_in_y() && self.n_in_y()
    }

    pub fn y_literal(&self) -> String {
        join(&self.y)
    }
}

impl fmt::Display for ChainContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} Y={}", self.n, self.y_literal())
    }
}

pub(crate) fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad integer `{}`: {e}", t.trim())))
        })
        .collect()
}

fn same_ctx(a: &Arc<ChainContext>, b: &Arc<ChainContext>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A total map `X → Y`, stored as its image sequence.
#[derive(Clone)]
pub struct Transformation {
    ctx: Arc<ChainContext>,
    images: Vec<usize>,
}

impl Transformation {
    pub fn new(ctx: &Arc<ChainContext>, images: Vec<usize>) -> Result<Self> {
        if images.len() != ctx.n() {
            return Err(Error::LengthMismatch {
                expected: ctx.n(),
                actual: images.len(),
            });
        }
        if let Some((i, &v)) = images.iter().enumerate().find(|(_, &v)| !ctx.contains(v)) {
            return Err(Error::RangeViolation {
                position: i + 1,
                value: v,
            });
        }
        Ok(Transformation {
            ctx: Arc::clone(ctx),
            images,
        })
    }

    pub(crate) fn new_unchecked(ctx: &Arc<ChainContext>, images: Vec<usize>) -> Self {
        debug_assert!(images.len() == ctx.n() && images.iter().all(|&v| ctx.contains(v)));
        Transformation {
            ctx: Arc::clone(ctx),
            images,
        }
    }

    /// Parses the literal `[v1,...,vn]`.
    pub fn parse(ctx: &Arc<ChainContext>, literal: &str) -> Result<Self> {
        let inner = literal
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected `[v1,...,vn]`, got `{literal}`")))?;
        Transformation::new(ctx, parse_list(inner)?)
    }

    /// The constant map onto `value`.
    pub fn constant(ctx: &Arc<ChainContext>, value: usize) -> Result<Self> {
        Transformation::new(ctx, vec![value; ctx.n()])
    }

    /// The map sending every block labelled `l` of `kernel` to `values[l - 1]`.
    pub fn from_blocks(
        ctx: &Arc<ChainContext>,
        kernel: &Partition,
        values: &[usize],
    ) -> Result<Self> {
        if kernel.n() != ctx.n() {
            return Err(Error::LengthMismatch {
                expected: ctx.n(),
                actual: kernel.n(),
            });
        }
        if values.len() != kernel.num_blocks() {
            return Err(Error::LengthMismatch {
                expected: kernel.num_blocks(),
                actual: values.len(),
            });
        }
        let images = kernel.labels().iter().map(|&l| values[l - 1]).collect();
        Transformation::new(ctx, images)
    }

    pub fn ctx(&self) -> &Arc<ChainContext> {
        &self.ctx
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// `x` mapped, for `1 <= x <= n`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    pub fn same_ctx(&self, other: &Transformation) -> bool {
        same_ctx(&self.ctx, &other.ctx)
    }

    /// The product `self · other`: apply `self`, then `other`.
    pub fn compose(&self, other: &Transformation) -> Result<Transformation> {
        if !self.same_ctx(other) {
            return Err(Error::ContextMismatch);
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Transformation) -> Transformation {
        let images = self.images.iter().map(|&v| other.images[v - 1]).collect();
        Transformation {
            ctx: Arc::clone(&self.ctx),
            images,
        }
    }

    /// `self^k` for `k >= 1`.
    pub fn pow(&self, k: usize) -> Transformation {
        assert!(k >= 1, "semigroup powers start at 1");
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.compose_unchecked(self);
        }
        acc
    }

    /// Sorted image set `Xα`.
    pub fn image_set(&self) -> Vec<usize> {
        let mut v = self.images.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn rank(&self) -> usize {
        self.image_set().len()
    }

    /// The preimage `yα⁻¹`, ascending.
    pub fn preimage(&self, y: usize) -> Vec<usize> {
        (1..=self.n()).filter(|&x| self.apply(x) == y).collect()
    }

    pub fn kernel(&self) -> Partition {
        Partition::from_labels(&self.images).expect("image sequences are nonempty")
    }

    pub fn restrict_to_y(&self) -> YMap {
        let images = self.ctx.y().iter().map(|&a| self.apply(a)).collect();
        YMap {
            ctx: Arc::clone(&self.ctx),
            images,
        }
    }

    pub fn descents(&self) -> usize {
        self.images.windows(2).filter(|w| w[1] < w[0]).count()
    }

    pub fn is_order_preserving(&self) -> bool {
        self.descents() == 0
    }

    /// Descent criterion: at most one descent, and when there is one the last
    /// image does not exceed the first.
    pub fn is_orientation_preserving(&self) -> bool {
        match self.descents() {
            0 => true,
            1 => self.images[self.n() - 1] <= self.images[0],
            _ => false,
        }
    }

    /// Scans every split `X₁ = {1..c}`, `X₂ = {c+1..n}` for one witnessing
    /// orientation preservation straight from the definition; returns the
    /// smallest such `c`.
    pub fn orientation_cut(&self) -> Option<usize> {
        let n = self.n();
        let non_decreasing = |s: &[usize]| s.windows(2).all(|w| w[0] <= w[1]);
        (1..=n).find(|&c| {
            let (x1, x2) = self.images.split_at(c);
            if !non_decreasing(x1) || !non_decreasing(x2) {
                return false;
            }
            match (x2.iter().max(), x1.iter().min()) {
                (Some(hi2), Some(lo1)) => hi2 <= lo1,
                (None, _) => true,
                _ => false,
            }
        })
    }

    /// Independent oracle for [`Transformation::is_orientation_preserving`].
    pub fn is_orientation_preserving_oracle(&self) -> bool {
        self.orientation_cut().is_some()
    }
}

impl PartialEq for Transformation {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images && self.same_ctx(other)
    }
}

impl Eq for Transformation {}

impl Hash for Transformation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl PartialOrd for Transformation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Transformation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.images.cmp(&other.images)
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", join(&self.images))
    }
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} on {}", self.ctx)
    }
}

#[derive(Serialize)]
struct TransformationJson<'a> {
    n: usize,
    y: &'a [usize],
    images: &'a [usize],
}

impl Serialize for Transformation {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        TransformationJson {
            n: self.ctx.n(),
            y: self.ctx.y(),
            images: &self.images,
        }
        .serialize(serializer)
    }
}

/// The restriction `β|_Y` of some `β ∈ T(X,Y)`, seen as a map `Y → Y`.
#[derive(Clone)]
pub struct YMap {
    ctx: Arc<ChainContext>,
    // images[i] is the image of a_{i+1}.
    images: Vec<usize>,
}

impl YMap {
    pub fn new(ctx: &Arc<ChainContext>, images: Vec<usize>) -> Result<Self> {
        if images.len() != ctx.m() {
            return Err(Error::LengthMismatch {
                expected: ctx.m(),
                actual: images.len(),
            });
        }
        if let Some((i, &v)) = images.iter().enumerate().find(|(_, &v)| !ctx.contains(v)) {
            return Err(Error::RangeViolation {
                position: ctx.a(i + 1),
                value: v,
            });
        }
        Ok(YMap {
            ctx: Arc::clone(ctx),
            images,
        })
    }

    /// Builds a map from 0-based positions in `Y`.
    pub fn from_indices(ctx: &Arc<ChainContext>, indices: &[usize]) -> Self {
        YMap {
            ctx: Arc::clone(ctx),
            images: indices.iter().map(|&i| ctx.y()[i]).collect(),
        }
    }

    pub fn identity(ctx: &Arc<ChainContext>) -> Self {
        YMap {
            ctx: Arc::clone(ctx),
            images: ctx.y().to_vec(),
        }
    }

    pub fn ctx(&self) -> &Arc<ChainContext> {
        &self.ctx
    }

    /// Images of `a_1, ..., a_m`.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Image of `a ∈ Y`.
    pub fn apply(&self, a: usize) -> usize {
        let i = self.ctx.index_in_y(a).expect("argument must lie in Y");
        self.images[i]
    }

    /// Images as 0-based positions in `Y`.
    pub fn indices(&self) -> Vec<usize> {
        self.images
            .iter()
            .map(|&v| self.ctx.index_in_y(v).expect("YMap values lie in Y"))
            .collect()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.ctx.m()];
        self.indices()
            .into_iter()
            .all(|i| !std::mem::replace(&mut seen[i], true))
    }

    pub fn is_identity(&self) -> bool {
        self.images == self.ctx.y()
    }

    /// Apply `self`, then `other`.
    pub fn compose(&self, other: &YMap) -> Result<YMap> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(YMap {
            ctx: Arc::clone(&self.ctx),
            images: self.images.iter().map(|&v| other.apply(v)).collect(),
        })
    }

    /// `self^k`, with `self^0` the identity on `Y`.
    pub fn pow(&self, k: usize) -> YMap {
        let mut acc = YMap::identity(&self.ctx);
        for _ in 0..k {
            acc = acc.compose(self).expect("same context");
        }
        acc
    }

    /// Order in `S(Y)`; `None` unless `self` is a permutation.
    pub fn order(&self) -> Option<usize> {
        if !self.is_permutation() {
            return None;
        }
        let mut acc = self.clone();
        let mut k = 1;
        while !acc.is_identity() {
            acc = acc.compose(self).expect("same context");
            k += 1;
        }
        Some(k)
    }
}

impl PartialEq for YMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images && same_ctx(&self.ctx, &other.ctx)
    }
}

impl Eq for YMap {}

impl Hash for YMap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl PartialOrd for YMap {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for YMap {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.images.cmp(&other.images)
    }
}

impl fmt::Display for YMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .ctx
            .y()
            .iter()
            .zip(&self.images)
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        write!(f, "({})", pairs.join(" "))
    }
}

impl fmt::Debug for YMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, y: &[usize]) -> Arc<ChainContext> {
        ChainContext::new(n, y).unwrap()
    }

    fn t(c: &Arc<ChainContext>, images: &[usize]) -> Transformation {
        Transformation::new(c, images.to_vec()).unwrap()
    }

    #[test]
    fn context_validation() {
        assert!(ChainContext::new(4, &[2, 3]).is_ok());
        assert!(ChainContext::new(4, &[3, 2]).is_err());
        assert!(ChainContext::new(4, &[0, 2]).is_err());
        assert!(ChainContext::new(4, &[2, 5]).is_err());
        assert!(ChainContext::new(4, &[]).is_err());
        assert!(ChainContext::new(0, &[1]).is_err());
        let c = ctx(4, &[1, 4]);
        assert!(c.one_in_y() && c.n_in_y());
        let c = ctx(4, &[2, 4]);
        assert!(!c.one_in_y() && c.n_in_y());
    }

    #[test]
    fn context_literal_round_trip() {
        let c = ChainContext::parse("n=4 Y=2,3").unwrap();
        assert_eq!(*c, *ctx(4, &[2, 3]));
        assert_eq!(c.to_string(), "n=4 Y=2,3");
        assert!(ChainContext::parse("n=4").is_err());
        assert!(ChainContext::parse("n=4 Y=2,x").is_err());
        assert!(ChainContext::parse("n=4 Z=2").is_err());
    }

    #[test]
    fn all_contexts_count() {
        assert_eq!(ChainContext::all_for(4).len(), 15);
        assert_eq!(ChainContext::all_for(1).len(), 1);
    }

    #[test]
    fn make_transformation_checks_range_and_length() {
        let c = ctx(4, &[2, 3]);
        assert!(Transformation::new(&c, vec![2, 3, 2, 2]).is_ok());
        assert_eq!(
            Transformation::new(&c, vec![1, 3, 2, 2]).unwrap_err(),
            Error::RangeViolation {
                position: 1,
                value: 1
            }
        );
        assert_eq!(
            Transformation::new(&c, vec![2, 3]).unwrap_err(),
            Error::LengthMismatch {
                expected: 4,
                actual: 2
            }
        );
        let full = ctx(2, &[1, 2]);
        let id = t(&full, &[1, 2]);
        assert_eq!(id.kernel().num_blocks(), 2);
    }

    #[test]
    fn literal_parsing() {
        let c = ctx(4, &[2, 3]);
        assert_eq!(
            Transformation::parse(&c, "[2,3,2,2]").unwrap(),
            t(&c, &[2, 3, 2, 2])
        );
        assert_eq!(
            Transformation::parse(&c, " [2, 3, 2, 2] ")
                .unwrap()
                .to_string(),
            "[2,3,2,2]"
        );
        assert!(Transformation::parse(&c, "2,3,2,2").is_err());
    }

    #[test]
    fn composition_applies_left_factor_first() {
        let c = ctx(4, &[2, 3]);
        let f = t(&c, &[2, 3, 3, 2]);
        let g = t(&c, &[2, 3, 2, 2]);
        assert_eq!(f.compose(&g).unwrap(), t(&c, &[3, 2, 2, 3]));
        let k = t(&c, &[2, 2, 2, 2]);
        assert_eq!(k.compose(&g).unwrap(), t(&c, &[3, 3, 3, 3]));
        let full = ctx(3, &[1, 2, 3]);
        let id = t(&full, &[1, 2, 3]);
        let h = t(&full, &[3, 1, 1]);
        assert_eq!(id.compose(&h).unwrap(), h);
        let other = ctx(4, &[2, 4]);
        assert_eq!(
            f.compose(&t(&other, &[2, 2, 2, 2])).unwrap_err(),
            Error::ContextMismatch
        );
    }

    #[test]
    fn restriction_examples() {
        let c = ctx(4, &[2, 3]);
        let eta = t(&c, &[2, 3, 2, 2]);
        let r = eta.restrict_to_y();
        assert_eq!(r.images(), &[3, 2]);
        assert!(r.is_permutation());
        assert!(t(&c, &[2, 2, 3, 3]).restrict_to_y().is_identity());
        let k = t(&c, &[2, 2, 2, 2]).restrict_to_y();
        assert_eq!(k.images(), &[2, 2]);
        assert!(!k.is_permutation());
    }

    #[test]
    fn kernel_examples() {
        let c = ctx(4, &[2, 3]);
        assert_eq!(t(&c, &[2, 3, 2, 2]).kernel().to_string(), "1,3,4|2");
        assert_eq!(t(&c, &[2, 2, 2, 2]).kernel().to_string(), "1,2,3,4");
        let full = ctx(3, &[1, 2, 3]);
        assert_eq!(t(&full, &[1, 2, 3]).kernel().to_string(), "1|2|3");
    }

    #[test]
    fn order_and_orientation_predicates() {
        let c = ctx(4, &[2, 3]);
        assert!(t(&c, &[2, 2, 3, 3]).is_order_preserving());
        assert!(!t(&c, &[2, 3, 2, 2]).is_order_preserving());
        assert!(t(&c, &[2, 2, 2, 2]).is_order_preserving());

        let eta = t(&c, &[2, 3, 2, 2]);
        assert!(eta.is_orientation_preserving());
        assert_eq!(eta.orientation_cut(), Some(2));
        let bad = t(&c, &[3, 2, 3, 2]);
        assert!(!bad.is_orientation_preserving());
        assert_eq!(bad.orientation_cut(), None);
        let k = t(&c, &[2, 2, 2, 2]);
        assert!(k.is_orientation_preserving_oracle());
        // One descent but the wrap-around fails.
        assert!(!t(&c, &[2, 3, 2, 3]).is_orientation_preserving());
    }

    #[test]
    fn ymap_group_operations() {
        let c = ctx(5, &[1, 3, 5]);
        let cyc = YMap::new(&c, vec![3, 5, 1]).unwrap();
        assert_eq!(cyc.order(), Some(3));
        assert!(cyc.pow(3).is_identity());
        assert!(YMap::new(&c, vec![3, 3, 1]).unwrap().order().is_none());
        assert!(YMap::new(&c, vec![3, 2, 1]).is_err());
    }

    #[test]
    fn json_field_names() {
        let c = ctx(4, &[2, 3]);
        let v = serde_json::to_value(t(&c, &[2, 3, 2, 2])).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"n": 4, "y": [2, 3], "images": [2, 3, 2, 2]})
        );
        let back: ChainContext =
            serde_json::from_value(serde_json::json!({"n": 4, "y": [2, 3]})).unwrap();
        assert_eq!(back, *c);
        assert!(
            serde_json::from_value::<ChainContext>(serde_json::json!({"n": 2, "y": [3]})).is_err()
        );
    }
}
