//! Brute-force ground truth: the semigroups `T(X,Y) ⊇ OP(X,Y) ⊇ O(X,Y)` as
//! explicit sets, closure by worklist saturation, relative generation tests,
//! and bounded searches for minimum relative generating sets.
//!
//! Transformations are encoded densely as mixed-radix integers over image
//! positions in `Y`, so a universe of `m^n` maps is a bitset.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use crate::chain::{ChainContext, Transformation, YMap};
use crate::error::{Error, Result};
use crate::generators::build_eta;
use crate::partition::{enumerate_p, enumerate_r, Partition};

pub type Code = u32;

/// Hard limits on exhaustive work. Exceeding one is an error, never a silent cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest universe `m^n` that may be materialised.
    pub max_universe: u64,
    /// Largest number of candidate subsets a search may test.
    pub max_subsets: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_universe: 10_000_000,
            max_subsets: 10_000_000,
        }
    }
}

impl Budget {
    /// Overrides `max_universe` when set.
    pub const ENV_VAR: &'static str = "OPRANK_MAX_UNIVERSE";

    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(v) = std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|s| s.parse().ok())
        {
            b.max_universe = v;
        }
        b
    }
}

#[derive(Debug, Clone)]
struct Universe {
    ctx: Arc<ChainContext>,
    n: usize,
    m: usize,
    size: usize,
    pow: Vec<u32>,
}

impl Universe {
    fn new(ctx: &Arc<ChainContext>, budget: &Budget) -> Result<Self> {
        let (n, m) = (ctx.n(), ctx.m());
        let size = (m as u64)
            .checked_pow(n as u32)
            .filter(|&s| s <= budget.max_universe && s <= u64::from(u32::MAX))
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "universe {m}^{n} exceeds the limit of {} elements",
                    budget.max_universe
                ))
            })?;
        let mut pow = Vec::with_capacity(n);
        let mut p = 1u32;
        for _ in 0..n {
            pow.push(p);
            p = p.wrapping_mul(m as u32);
        }
        Ok(Universe {
            ctx: Arc::clone(ctx),
            n,
            m,
            size: size as usize,
            pow,
        })
    }

    fn encode(&self, t: &Transformation) -> Code {
        t.images()
            .iter()
            .zip(&self.pow)
            .map(|(&v, &p)| self.ctx.index_in_y(v).expect("images lie in Y") as u32 * p)
            .sum()
    }

    fn decode_into(&self, mut code: Code, out: &mut [u8]) {
        let m = self.m as u32;
        for slot in out.iter_mut().take(self.n) {
            *slot = (code % m) as u8;
            code /= m;
        }
    }

    fn decode(&self, code: Code) -> Transformation {
        let mut idx = vec![0u8; self.n];
        self.decode_into(code, &mut idx);
        let y = self.ctx.y();
        Transformation::new_unchecked(&self.ctx, idx.iter().map(|&i| y[i as usize]).collect())
    }

    fn restriction(&self, t: &Transformation) -> Vec<u8> {
        t.restrict_to_y()
            .indices()
            .into_iter()
            .map(|i| i as u8)
            .collect()
    }

    // Code of x·g where `idx` are x's image positions and `r` is g|_Y.
    fn product_code(&self, idx: &[u8], r: &[u8]) -> Code {
        idx.iter()
            .zip(&self.pow)
            .map(|(&i, &p)| u32::from(r[i as usize]) * p)
            .sum()
    }
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(size: usize) -> Self {
        Bitset(vec![0; size.div_ceil(64)])
    }

    fn get(&self, i: Code) -> bool {
        self.0[i as usize / 64] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`; true when it was clear.
    fn insert(&mut self, i: Code) -> bool {
        let w = &mut self.0[i as usize / 64];
        let bit = 1u64 << (i % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }
}

/// An explicit finite set of transformations over one context.
#[derive(Debug, Clone)]
pub struct SemigroupSet {
    universe: Universe,
    members: Vec<Code>,
    closed: bool,
}

impl SemigroupSet {
    fn from_codes(universe: Universe, mut members: Vec<Code>, closed: bool) -> Self {
        members.sort_unstable();
        members.dedup();
        SemigroupSet {
            universe,
            members,
            closed,
        }
    }

    /// Wraps arbitrary transformations; not marked closed.
    pub fn from_elements(
        ctx: &Arc<ChainContext>,
        elements: &[Transformation],
        budget: &Budget,
    ) -> Result<Self> {
        let universe = Universe::new(ctx, budget)?;
        let mut codes = Vec::with_capacity(elements.len());
        for e in elements {
            if e.ctx().as_ref() != ctx.as_ref() {
                return Err(Error::ContextMismatch);
            }
            codes.push(universe.encode(e));
        }
        Ok(SemigroupSet::from_codes(universe, codes, false))
    }

    pub fn ctx(&self) -> &Arc<ChainContext> {
        &self.universe.ctx
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Set only after a full saturation pass or for a set known to be a semigroup.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn contains(&self, t: &Transformation) -> bool {
        t.ctx().as_ref() == self.ctx().as_ref() && self.contains_code(self.universe.encode(t))
    }

    fn contains_code(&self, c: Code) -> bool {
        self.members.binary_search(&c).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Transformation> + '_ {
        self.members.iter().map(|&c| self.universe.decode(c))
    }

    pub fn to_vec(&self) -> Vec<Transformation> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &SemigroupSet) -> bool {
        self.ctx().as_ref() == other.ctx().as_ref()
            && self.members.iter().all(|&c| other.contains_code(c))
    }

    pub fn same_members(&self, other: &SemigroupSet) -> bool {
        self.ctx().as_ref() == other.ctx().as_ref() && self.members == other.members
    }

    /// Members of `self` not in `other`.
    pub fn difference(&self, other: &SemigroupSet) -> Vec<Transformation> {
        self.members
            .iter()
            .filter(|&&c| !other.contains_code(c))
            .map(|&c| self.universe.decode(c))
            .collect()
    }

    /// Checks every pairwise product directly; quadratic, for tests.
    pub fn verify_closed(&self) -> bool {
        let u = &self.universe;
        let mut idx = vec![0u8; u.n];
        let restrictions: Vec<Vec<u8>> = self.iter().map(|t| u.restriction(&t)).collect();
        self.members.iter().all(|&c| {
            u.decode_into(c, &mut idx);
            restrictions
                .iter()
                .all(|r| self.contains_code(u.product_code(&idx, r)))
        })
    }

    fn bitset(&self) -> Bitset {
        let mut b = Bitset::new(self.universe.size);
        for &c in &self.members {
            b.insert(c);
        }
        b
    }
}

fn filtered(
    ctx: &Arc<ChainContext>,
    budget: &Budget,
    keep: impl Fn(&[u8]) -> bool,
) -> Result<SemigroupSet> {
    let universe = Universe::new(ctx, budget)?;
    let mut idx = vec![0u8; universe.n];
    let codes = (0..universe.size as Code)
        .filter(|&c| {
            universe.decode_into(c, &mut idx);
            keep(&idx)
        })
        .collect();
    Ok(SemigroupSet::from_codes(universe, codes, true))
}

/// `T(X,Y)`, all `m^n` maps.
pub fn enumerate_t(ctx: &Arc<ChainContext>, budget: &Budget) -> Result<SemigroupSet> {
    filtered(ctx, budget, |_| true)
}

/// `O(X,Y)`: non-decreasing image sequences.
pub fn enumerate_o(ctx: &Arc<ChainContext>, budget: &Budget) -> Result<SemigroupSet> {
    filtered(ctx, budget, |idx| idx.windows(2).all(|w| w[0] <= w[1]))
}

/// `OP(X,Y)`, filtered by the descent criterion.
pub fn enumerate_op(ctx: &Arc<ChainContext>, budget: &Budget) -> Result<SemigroupSet> {
    filtered(ctx, budget, |idx| {
        match idx.windows(2).filter(|w| w[1] < w[0]).count() {
            0 => true,
            1 => idx[idx.len() - 1] <= idx[0],
            _ => false,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    NotEqual,
}

/// Result of [`closure`]. After an early `NotEqual` exit `set` is partial.
#[derive(Debug, Clone)]
pub struct Closure {
    pub set: SemigroupSet,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub discovered: usize,
    pub frontier: usize,
}

/// Saturation state shared by the public entry points.
struct Saturation<'a> {
    universe: &'a Universe,
    seen: Bitset,
    found: Vec<Code>,
    target: Option<(&'a Bitset, usize)>,
}

enum Stop {
    Exhausted,
    Left,
    Reached,
}

impl<'a> Saturation<'a> {
    fn new(universe: &'a Universe, target: Option<(&'a Bitset, usize)>) -> Self {
        Saturation {
            universe,
            seen: Bitset::new(universe.size),
            found: Vec::new(),
            target,
        }
    }

    fn add(&mut self, c: Code) -> Option<Stop> {
        if !self.seen.insert(c) {
            return None;
        }
        self.found.push(c);
        match self.target {
            Some((t, _)) if !t.get(c) => Some(Stop::Left),
            Some((_, size)) if self.found.len() == size => Some(Stop::Reached),
            _ => None,
        }
    }

    /// `closed_seeds` are products of each other already; they only need
    /// multiplying by the restrictions of `extra`.
    fn run(
        &mut self,
        closed_seeds: &[Code],
        extra: &[Code],
        progress: &mut dyn FnMut(Progress),
    ) -> Stop {
        let u = self.universe;
        let mut idx = vec![0u8; u.n];
        let mut restrictions = |codes: &[Code]| {
            let mut set: Vec<Vec<u8>> = codes
                .iter()
                .map(|&c| {
                    u.decode_into(c, &mut idx);
                    let y = u.ctx.y();
                    let mut full = vec![0u8; u.n];
                    full.copy_from_slice(&idx);
                    y.iter().map(|&a| full[a - 1]).collect()
                })
                .collect();
            set.sort_unstable();
            set.dedup();
            set
        };
        let extra_r = restrictions(extra);
        let mut all_r = restrictions(closed_seeds);
        all_r.extend(extra_r.iter().cloned());
        all_r.sort_unstable();
        all_r.dedup();

        for &c in closed_seeds {
            if let Some(stop) = self.add(c) {
                return stop;
            }
        }
        let mut queue: VecDeque<Code> = VecDeque::new();
        for &c in extra {
            if self.seen.get(c) {
                continue;
            }
            queue.push_back(c);
            if let Some(stop) = self.add(c) {
                return stop;
            }
        }
        let mut idx = vec![0u8; u.n];
        if !extra_r.is_empty() {
            for &c in closed_seeds {
                u.decode_into(c, &mut idx);
                for r in &extra_r {
                    let p = u.product_code(&idx, r);
                    if !self.seen.get(p) {
                        queue.push_back(p);
                        if let Some(stop) = self.add(p) {
                            return stop;
                        }
                    }
                }
            }
        }
        let mut ticks = 0usize;
        while let Some(c) = queue.pop_front() {
            u.decode_into(c, &mut idx);
            for r in &all_r {
                let p = u.product_code(&idx, r);
                if !self.seen.get(p) {
                    queue.push_back(p);
                    if let Some(stop) = self.add(p) {
                        return stop;
                    }
                }
            }
            ticks += 1;
            if ticks.is_multiple_of(4096) {
                progress(Progress {
                    discovered: self.found.len(),
                    frontier: queue.len(),
                });
            }
        }
        progress(Progress {
            discovered: self.found.len(),
            frontier: 0,
        });
        Stop::Exhausted
    }
}

/// The subsemigroup generated by `gens`, by worklist saturation: every newly
/// found element is multiplied on the right by every generator (only `g|_Y`
/// matters for `x·g`, so generators are deduplicated by restriction).
///
/// With `within`, a member outside `within` stops the run with `NotEqual`; if
/// `within` is closed, reaching all of it stops with `Equal`.
pub fn closure(
    gens: &[Transformation],
    within: Option<&SemigroupSet>,
    budget: &Budget,
) -> Result<Closure> {
    closure_with_progress(gens, within, budget, &mut |_| {})
}

pub fn closure_with_progress(
    gens: &[Transformation],
    within: Option<&SemigroupSet>,
    budget: &Budget,
    progress: &mut dyn FnMut(Progress),
) -> Result<Closure> {
    let ctx = gens
        .first()
        .map(|g| Arc::clone(g.ctx()))
        .ok_or_else(|| Error::HypothesisViolation("closure needs at least one generator".into()))?;
    if gens.iter().any(|g| g.ctx().as_ref() != ctx.as_ref())
        || within.is_some_and(|w| w.ctx().as_ref() != ctx.as_ref())
    {
        return Err(Error::ContextMismatch);
    }
    let universe = Universe::new(&ctx, budget)?;
    let codes: Vec<Code> = gens.iter().map(|g| universe.encode(g)).collect();
    let target_bits = within
        .filter(|w| w.is_closed())
        .map(|w| (w.bitset(), w.len()));
    let partial_bits;
    let target = match (&target_bits, within) {
        (Some((b, size)), _) => Some((b, *size)),
        (None, Some(w)) => {
            partial_bits = w.bitset();
            // Size usize::MAX: only the NotEqual exit can fire.
            Some((&partial_bits, usize::MAX))
        }
        (None, None) => None,
    };
    let mut sat = Saturation::new(&universe, target);
    let stop = sat.run(&[], &codes, progress);
    let found = std::mem::take(&mut sat.found);
    drop(sat);
    Ok(match stop {
        Stop::Left => Closure {
            set: SemigroupSet::from_codes(universe, found, false),
            verdict: Some(Verdict::NotEqual),
        },
        Stop::Reached => Closure {
            set: within.expect("target implies within").clone(),
            verdict: Some(Verdict::Equal),
        },
        Stop::Exhausted => {
            let set = SemigroupSet::from_codes(universe, found, true);
            let verdict = within.map(|w| {
                if set.same_members(w) {
                    Verdict::Equal
                } else {
                    Verdict::NotEqual
                }
            });
            Closure { set, verdict }
        }
    })
}

/// Whether `⟨base ∪ extra⟩ = target`, reusing the universe and target bitset
/// across many queries.
pub struct GenerationOracle {
    universe: Universe,
    base: Vec<Code>,
    base_closed: bool,
    target: Bitset,
    target_len: usize,
}

impl GenerationOracle {
    /// `target` must be closed and contain `base`.
    pub fn new(target: &SemigroupSet, base: &SemigroupSet) -> Result<Self> {
        if !target.is_closed() {
            return Err(Error::HypothesisViolation(
                "target set is not known to be closed".into(),
            ));
        }
        if !base.is_subset(target) {
            return Err(Error::HypothesisViolation(
                "base is not contained in the target".into(),
            ));
        }
        Ok(GenerationOracle {
            universe: target.universe.clone(),
            base: base.members.clone(),
            base_closed: base.is_closed(),
            target: target.bitset(),
            target_len: target.len(),
        })
    }

    pub fn generates(&self, extra: &[Transformation]) -> Result<bool> {
        let mut codes = Vec::with_capacity(extra.len());
        for e in extra {
            if e.ctx().as_ref() != self.universe.ctx.as_ref() {
                return Err(Error::ContextMismatch);
            }
            let c = self.universe.encode(e);
            if !self.target.get(c) {
                return Err(Error::HypothesisViolation(format!(
                    "{e} is not in the target set"
                )));
            }
            codes.push(c);
        }
        Ok(self.generates_codes(&codes))
    }

    fn generates_codes(&self, extra: &[Code]) -> bool {
        let mut sat = Saturation::new(&self.universe, Some((&self.target, self.target_len)));
        let stop = if self.base_closed {
            sat.run(&self.base, extra, &mut |_| {})
        } else {
            let all: Vec<Code> = self.base.iter().chain(extra).copied().collect();
            sat.run(&[], &all, &mut |_| {})
        };
        match stop {
            Stop::Reached => true,
            Stop::Left => false,
            Stop::Exhausted => sat.found.len() == self.target_len,
        }
    }

    fn encode(&self, t: &Transformation) -> Code {
        self.universe.encode(t)
    }
}

/// `⟨base ∪ extra⟩ = target`.
pub fn is_relative_generating(
    target: &SemigroupSet,
    base: &SemigroupSet,
    extra: &[Transformation],
) -> Result<bool> {
    GenerationOracle::new(target, base)?.generates(extra)
}

/// Generating, and no set obtained by dropping one element still generates.
pub fn is_minimal_relative_generating(
    target: &SemigroupSet,
    base: &SemigroupSet,
    extra: &[Transformation],
) -> Result<bool> {
    let oracle = GenerationOracle::new(target, base)?;
    minimal_with(&oracle, extra)
}

pub(crate) fn minimal_with(oracle: &GenerationOracle, extra: &[Transformation]) -> Result<bool> {
    if !oracle.generates(extra)? {
        return Ok(false);
    }
    for i in 0..extra.len() {
        let mut rest = extra.to_vec();
        rest.remove(i);
        if oracle.generates(&rest)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All maps in the monoid generated by `gens` (identity included), sorted.
pub fn ymap_monoid_closure(ctx: &Arc<ChainContext>, gens: &[YMap]) -> Result<Vec<YMap>> {
    if gens.iter().any(|g| g.ctx().as_ref() != ctx.as_ref()) {
        return Err(Error::ContextMismatch);
    }
    let gen_idx: Vec<Vec<usize>> = gens.iter().map(YMap::indices).collect();
    let identity: Vec<usize> = (0..ctx.m()).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for g in &gen_idx {
            let p: Vec<usize> = x.iter().map(|&i| g[i]).collect();
            if seen.insert(p.clone()) {
                queue.push_back(p);
            }
        }
    }
    let mut out: Vec<YMap> = seen
        .into_iter()
        .map(|v| YMap::from_indices(ctx, &v))
        .collect();
    out.sort();
    Ok(out)
}

/// Whether every permutation of `Y` occurs in `set`.
pub fn contains_all_permutations(ctx: &ChainContext, set: &[YMap]) -> bool {
    let perms = set
        .iter()
        .filter(|s| s.is_permutation())
        .collect::<HashSet<_>>()
        .len();
    perms as u128 == (1..=ctx.m() as u128).product::<u128>()
}

/// Whether `S(Y) ⊆ ⟨gens⟩`. Only permutations can contribute to permutations,
/// so non-injective generators are ignored.
pub fn generates_symmetric_group(ctx: &Arc<ChainContext>, gens: &[YMap]) -> Result<bool> {
    let perms: Vec<YMap> = gens
        .iter()
        .filter(|g| g.is_permutation())
        .cloned()
        .collect();
    Ok(contains_all_permutations(
        ctx,
        &ymap_monoid_closure(ctx, &perms)?,
    ))
}

/// Necessary conditions a candidate set must meet before it is tested by closure.
#[derive(Debug, Clone, Default)]
pub struct NecessityFilter {
    /// Every partition listed must be the kernel of some candidate.
    pub required_kernels: Vec<Partition>,
    /// When set, `S(Y) ⊆ ⟨{β|_Y : β ∈ B}, extra⟩` must hold.
    pub symmetric_group_with: Option<YMap>,
}

impl NecessityFilter {
    pub fn none() -> Self {
        NecessityFilter::default()
    }

    /// Every `P ∈ P_m` must occur as a kernel (`OP` modulo `O`).
    pub fn op_mod_o(ctx: &ChainContext) -> Self {
        let required_kernels = enumerate_p(ctx.n(), ctx.m())
            .map(Iterator::collect)
            .unwrap_or_default();
        NecessityFilter {
            required_kernels,
            symmetric_group_with: None,
        }
    }

    /// Every `P ∈ R_m` must occur as a kernel, and the restrictions together
    /// with `η|_Y` must generate `S(Y)` (`T` modulo `OP`).
    pub fn t_mod_op(ctx: &Arc<ChainContext>) -> Self {
        NecessityFilter {
            required_kernels: enumerate_r(ctx.n(), ctx.m()).collect(),
            symmetric_group_with: Some(build_eta(ctx).restrict_to_y()),
        }
    }
}

/// Outcome of [`brute_min_relrank`].
#[derive(Debug, Clone)]
pub struct RelRankSearch {
    pub rank: usize,
    pub witness: Vec<Transformation>,
    /// Candidate sets passed to the closure test.
    pub candidates_tested: u64,
}

/// Smallest `|B| <= upper_bound`, `B ⊆ pool`, with `⟨base ∪ B⟩ = target`.
///
/// Sizes are tried in increasing order. Subsets are enumerated depth first over
/// `pool` with the filter's required kernels placed first, so branches that can
/// no longer cover every required kernel are cut before any closure runs.
pub fn brute_min_relrank(
    target: &SemigroupSet,
    base: &SemigroupSet,
    pool: &[Transformation],
    upper_bound: usize,
    filter: &NecessityFilter,
    budget: &Budget,
) -> Result<RelRankSearch> {
    let oracle = GenerationOracle::new(target, base)?;
    let ctx = Arc::clone(target.ctx());

    let kernel_of = |t: &Transformation| {
        let k = t.kernel();
        filter.required_kernels.iter().position(|r| *r == k)
    };
    let mut ordered: Vec<(Option<usize>, Transformation)> =
        pool.iter().map(|t| (kernel_of(t), t.clone())).collect();
    ordered.sort_by_key(|(k, _)| k.unwrap_or(usize::MAX));
    let kinds: Vec<Option<usize>> = ordered.iter().map(|(k, _)| *k).collect();
    let maps: Vec<Transformation> = ordered.into_iter().map(|(_, t)| t).collect();
    let codes: Vec<Code> = maps
        .iter()
        .map(|t| {
            if t.ctx().as_ref() != ctx.as_ref() {
                Err(Error::ContextMismatch)
            } else {
                Ok(oracle.encode(t))
            }
        })
        .collect::<Result<_>>()?;
    let required = filter.required_kernels.len();
    let mut last_index = vec![None; required];
    for (i, k) in kinds.iter().enumerate() {
        if let Some(k) = k {
            last_index[*k] = Some(i);
        }
    }
    let restrictions: Vec<YMap> = maps.iter().map(Transformation::restrict_to_y).collect();

    struct Dfs<'a> {
        size: usize,
        kinds: &'a [Option<usize>],
        last_index: &'a [Option<usize>],
        codes: &'a [Code],
        restrictions: &'a [YMap],
        filter: &'a NecessityFilter,
        ctx: &'a Arc<ChainContext>,
        oracle: &'a GenerationOracle,
        budget: &'a Budget,
        tested: u64,
        chosen: Vec<usize>,
        cover: Vec<usize>,
        uncovered: usize,
    }

    impl Dfs<'_> {
        fn leaf(&mut self) -> Result<bool> {
            if let Some(extra) = &self.filter.symmetric_group_with {
                let mut gens: Vec<YMap> = self
                    .chosen
                    .iter()
                    .map(|&i| self.restrictions[i].clone())
                    .collect();
                gens.push(extra.clone());
                if !generates_symmetric_group(self.ctx, &gens)? {
                    return Ok(false);
                }
            }
            self.tested += 1;
            if self.tested > self.budget.max_subsets {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} candidate sets",
                    self.budget.max_subsets
                )));
            }
            let extra: Vec<Code> = self.chosen.iter().map(|&i| self.codes[i]).collect();
            Ok(self.oracle.generates_codes(&extra))
        }

        fn go(&mut self, start: usize) -> Result<bool> {
            let slots = self.size - self.chosen.len();
            if slots == 0 {
                return if self.uncovered == 0 {
                    self.leaf()
                } else {
                    Ok(false)
                };
            }
            if self.uncovered > slots {
                return Ok(false);
            }
            for i in start..self.codes.len() {
                if self.codes.len() - i < slots {
                    break;
                }
                // An uncovered kernel with no candidates left cannot be covered.
                let stranded = self
                    .cover
                    .iter()
                    .zip(self.last_index)
                    .any(|(&c, last)| c == 0 && last.is_none_or(|l| l < i));
                if stranded {
                    break;
                }
                self.chosen.push(i);
                if let Some(k) = self.kinds[i] {
                    self.cover[k] += 1;
                    if self.cover[k] == 1 {
                        self.uncovered -= 1;
                    }
                }
                let found = self.go(i + 1)?;
                if let Some(k) = self.kinds[i] {
                    self.cover[k] -= 1;
                    if self.cover[k] == 0 {
                        self.uncovered += 1;
                    }
                }
                if found {
                    return Ok(true);
                }
                self.chosen.pop();
            }
            Ok(false)
        }
    }

    let mut tested = 0;
    for size in 0..=upper_bound.min(codes.len()) {
        let mut dfs = Dfs {
            size,
            kinds: &kinds,
            last_index: &last_index,
            codes: &codes,
            restrictions: &restrictions,
            filter,
            ctx: &ctx,
            oracle: &oracle,
            budget,
            tested,
            chosen: Vec::new(),
            cover: vec![0; required],
            uncovered: required,
        };
        let found = dfs.go(0)?;
        tested = dfs.tested;
        if found {
            return Ok(RelRankSearch {
                rank: size,
                witness: dfs.chosen.iter().map(|&i| maps[i].clone()).collect(),
                candidates_tested: tested,
            });
        }
    }
    Err(Error::NoWitnessWithinBound(upper_bound))
}

/// Every subset of `pool` with at most `max_size` elements that relatively
/// generates `target` over `base`, without any pruning.
pub fn relative_generating_subsets(
    target: &SemigroupSet,
    base: &SemigroupSet,
    pool: &[Transformation],
    max_size: usize,
    budget: &Budget,
) -> Result<Vec<Vec<Transformation>>> {
    use itertools::Itertools;
    let oracle = GenerationOracle::new(target, base)?;
    let codes: Vec<Code> = pool.iter().map(|t| oracle.encode(t)).collect();
    let mut out = Vec::new();
    let mut tested = 0u64;
    for size in 0..=max_size.min(pool.len()) {
        for combo in (0..pool.len()).combinations(size) {
            tested += 1;
            if tested > budget.max_subsets {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} candidate sets",
                    budget.max_subsets
                )));
            }
            let extra: Vec<Code> = combo.iter().map(|&i| codes[i]).collect();
            if oracle.generates_codes(&extra) {
                out.push(combo.iter().map(|&i| pool[i].clone()).collect());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{canonical_a, canonical_b_t_mod_op};

    fn ctx(n: usize, y: &[usize]) -> Arc<ChainContext> {
        ChainContext::new(n, y).unwrap()
    }

    fn t(c: &Arc<ChainContext>, images: &[usize]) -> Transformation {
        Transformation::new(c, images.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let b = Budget::default();
        let c = ctx(2, &[1, 2]);
        assert_eq!(enumerate_t(&c, &b).unwrap().len(), 4);
        let o: Vec<String> = enumerate_o(&c, &b)
            .unwrap()
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(o.len(), 3);
        for s in ["[1,1]", "[1,2]", "[2,2]"] {
            assert!(o.contains(&s.to_string()));
        }
        assert_eq!(enumerate_op(&c, &b).unwrap().len(), 4);
        assert_eq!(enumerate_t(&ctx(4, &[2, 3]), &b).unwrap().len(), 16);
        assert_eq!(enumerate_t(&ctx(5, &[1, 3, 5]), &b).unwrap().len(), 243);
    }

    #[test]
    fn budget_is_enforced() {
        let small = Budget {
            max_universe: 100,
            ..Budget::default()
        };
        assert!(matches!(
            enumerate_t(&ctx(5, &[1, 3, 5]), &small),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn closure_examples() {
        let b = Budget::default();
        let c = ctx(2, &[1, 2]);
        let cl = closure(&[t(&c, &[2, 1])], None, &b).unwrap();
        let mut v: Vec<String> = cl.set.iter().map(|t| t.to_string()).collect();
        v.sort();
        assert_eq!(v, ["[1,2]", "[2,1]"]);
        assert!(cl.set.is_closed());

        let c = ctx(4, &[2, 3]);
        let o = enumerate_o(&c, &b).unwrap();
        let op = enumerate_op(&c, &b).unwrap();
        let mut gens = o.to_vec();
        gens.extend(canonical_a(&c).unwrap().to_vec());
        let cl = closure(&gens, Some(&op), &b).unwrap();
        assert_eq!(cl.verdict, Some(Verdict::Equal));

        let tt = enumerate_t(&c, &b).unwrap();
        let mut gens = op.to_vec();
        gens.extend(canonical_b_t_mod_op(&c).unwrap().0.to_vec());
        let cl = closure(&gens, None, &b).unwrap();
        assert_eq!(cl.set.len(), 16);
        assert!(cl.set.same_members(&tt));

        // Leaving the comparison set stops early.
        let cl = closure(&[t(&c, &[3, 2, 3, 2])], Some(&op), &b).unwrap();
        assert_eq!(cl.verdict, Some(Verdict::NotEqual));
    }

    #[test]
    fn closure_reports_progress() {
        let b = Budget::default();
        let c = ctx(5, &[1, 3, 5]);
        let op = enumerate_op(&c, &b).unwrap();
        let mut last = None;
        closure_with_progress(&op.to_vec(), None, &b, &mut |p| last = Some(p)).unwrap();
        assert_eq!(last.unwrap().discovered, op.len());
        assert_eq!(last.unwrap().frontier, 0);
    }

    #[test]
    fn ymap_closure_examples() {
        let c = ctx(4, &[2, 3]);
        let swap = YMap::new(&c, vec![3, 2]).unwrap();
        let cl = ymap_monoid_closure(&c, &[swap]).unwrap();
        assert_eq!(cl.len(), 2);
        assert!(contains_all_permutations(&c, &cl));

        let c = ctx(5, &[1, 3, 5]);
        let eta = build_eta(&c).restrict_to_y();
        let cl = ymap_monoid_closure(&c, std::slice::from_ref(&eta)).unwrap();
        assert_eq!(cl.len(), 3);
        assert!(!contains_all_permutations(&c, &cl));
        let tau = YMap::new(&c, vec![3, 1, 5]).unwrap();
        let cl = ymap_monoid_closure(&c, &[eta, tau]).unwrap();
        assert_eq!(cl.len(), 6);
        assert!(contains_all_permutations(&c, &cl));
    }

    #[test]
    fn relative_generation_examples() {
        let b = Budget::default();
        let c = ctx(4, &[2, 3]);
        let o = enumerate_o(&c, &b).unwrap();
        let op = enumerate_op(&c, &b).unwrap();
        let tt = enumerate_t(&c, &b).unwrap();
        assert!(is_relative_generating(&op, &o, &canonical_a(&c).unwrap().to_vec()).unwrap());
        assert!(!is_relative_generating(&op, &o, &[]).unwrap());
        let bb = canonical_b_t_mod_op(&c).unwrap().0.to_vec();
        assert!(is_relative_generating(&tt, &op, &bb).unwrap());
        assert!(is_relative_generating(&op, &o, &[t(&c, &[3, 2, 3, 2])]).is_err());
    }

    #[test]
    fn brute_search_examples() {
        let b = Budget::default();
        for (y, expected) in [(&[2usize, 3][..], 3usize), (&[1, 4][..], 4)] {
            let c = ctx(4, y);
            let o = enumerate_o(&c, &b).unwrap();
            let op = enumerate_op(&c, &b).unwrap();
            let pool = op.difference(&o);
            let r =
                brute_min_relrank(&op, &o, &pool, 6, &NecessityFilter::op_mod_o(&c), &b).unwrap();
            assert_eq!(r.rank, expected, "Y={y:?}");
            assert!(is_relative_generating(&op, &o, &r.witness).unwrap());
        }
        let c = ctx(4, &[2, 3]);
        let op = enumerate_op(&c, &b).unwrap();
        let tt = enumerate_t(&c, &b).unwrap();
        let pool = tt.difference(&op);
        let r = brute_min_relrank(&tt, &op, &pool, 3, &NecessityFilter::t_mod_op(&c), &b).unwrap();
        assert_eq!(r.rank, 1);
        // Unpruned search agrees.
        let r = brute_min_relrank(&tt, &op, &pool, 3, &NecessityFilter::none(), &b).unwrap();
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn no_witness_within_bound() {
        let b = Budget::default();
        let c = ctx(4, &[1, 4]);
        let o = enumerate_o(&c, &b).unwrap();
        let op = enumerate_op(&c, &b).unwrap();
        let pool = op.difference(&o);
        assert_eq!(
            brute_min_relrank(&op, &o, &pool, 3, &NecessityFilter::op_mod_o(&c), &b).unwrap_err(),
            Error::NoWitnessWithinBound(3)
        );
    }

    #[test]
    fn closure_idempotent_and_monotone() {
        let b = Budget::default();
        let c = ctx(4, &[1, 2, 4]);
        let g = vec![t(&c, &[2, 4, 1, 1]), t(&c, &[4, 1, 2, 2])];
        let h = vec![
            t(&c, &[2, 4, 1, 1]),
            t(&c, &[4, 1, 2, 2]),
            t(&c, &[1, 1, 4, 2]),
        ];
        let cg = closure(&g, None, &b).unwrap().set;
        let again = closure(&cg.to_vec(), None, &b).unwrap().set;
        assert!(cg.same_members(&again));
        let ch = closure(&h, None, &b).unwrap().set;
        assert!(cg.is_subset(&ch));
        assert!(cg.verify_closed() && ch.verify_closed());
    }
}
