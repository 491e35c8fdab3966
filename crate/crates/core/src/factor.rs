//! Certified factorizations: `β ∈ OP(X,Y)` over `O(X,Y) ∪ A`, and
//! `γ ∈ T(X,Y)` over `OP(X,Y) ∪ B`, as explicit words whose product is checked.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::chain::{ChainContext, Transformation, YMap};
use crate::closure::generates_symmetric_group;
use crate::error::{Error, Result};
use crate::generators::{alpha_label, build_alpha_p, build_eta, kernel_witness, GeneratingSet};
use crate::partition::{enumerate_r, refine_to_p, refine_to_r, Family, Partition};

/// What a factor is, and hence which set it is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorTag {
    /// An element of `O(X,Y)`.
    BaseO,
    /// An element of `OP(X,Y)`.
    BaseOp,
    /// A member of the canonical set `A`.
    GeneratorA,
    /// A member of the supplied set `B`.
    GeneratorB,
    /// `η^k`.
    EtaPower(usize),
}

impl FactorTag {
    pub fn name(&self) -> &'static str {
        match self {
            FactorTag::BaseO => "BaseO",
            FactorTag::BaseOp => "BaseOP",
            FactorTag::GeneratorA => "GeneratorA",
            FactorTag::GeneratorB => "GeneratorB",
            FactorTag::EtaPower(_) => "EtaPower",
        }
    }
}

/// One factor. For [`FactorTag::EtaPower`] `map` is `η` itself and the
/// factor stands for `η^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub tag: FactorTag,
    pub map: Transformation,
    pub label: Option<String>,
}

impl Factor {
    fn new(tag: FactorTag, map: Transformation) -> Self {
        Factor {
            tag,
            map,
            label: None,
        }
    }

    fn labelled(tag: FactorTag, map: Transformation, label: &str) -> Self {
        Factor {
            tag,
            map,
            label: Some(label.to_string()),
        }
    }

    /// The transformation this factor contributes to the product.
    pub fn value(&self) -> Transformation {
        match self.tag {
            FactorTag::EtaPower(k) => self.map.pow(k),
            _ => self.map.clone(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.tag, &self.label) {
            (FactorTag::EtaPower(1), _) => f.write_str("eta"),
            (FactorTag::EtaPower(k), _) => write!(f, "eta^{k}"),
            (_, Some(label)) => f.write_str(label),
            (_, None) => write!(f, "{}", self.map),
        }
    }
}

impl Serialize for Factor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let power = match self.tag {
            FactorTag::EtaPower(k) => Some(k),
            _ => None,
        };
        let mut s = serializer.serialize_struct("Factor", 2 + power.is_some() as usize)?;
        s.serialize_field("tag", self.tag.name())?;
        s.serialize_field("images", self.map.images())?;
        if let Some(k) = power {
            s.serialize_field("power", &k)?;
        } else {
            s.skip_field("power")?;
        }
        s.end()
    }
}

/// A nonempty product of factors, read left to right (apply the first factor first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    factors: Vec<Factor>,
}

impl Word {
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The product, or `None` for the empty word.
    pub fn product(&self) -> Option<Transformation> {
        self.factors
            .iter()
            .map(Factor::value)
            .reduce(|acc, f| acc.compose_unchecked(&f))
    }

    fn push(&mut self, factor: Factor) {
        // Consecutive η powers merge.
        if let (Some(last), FactorTag::EtaPower(k)) = (self.factors.last_mut(), factor.tag) {
            if let FactorTag::EtaPower(j) = last.tag {
                last.tag = FactorTag::EtaPower(j + k);
                return;
            }
        }
        self.factors.push(factor);
    }

    fn extend(&mut self, other: Word) {
        for f in other.factors {
            self.push(f);
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        write!(f, "{}", self.factors.iter().join(" * "))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.factors.serialize(serializer)
    }
}

fn certified(word: Word, target: &Transformation) -> Result<Word> {
    match word.product() {
        Some(p) if &p == target => Ok(word),
        other => Err(Error::HypothesisViolation(format!(
            "factorization of {target} produced {}",
            other.map_or_else(|| "the empty word".to_string(), |p| p.to_string())
        ))),
    }
}

fn require_proper_range(ctx: &ChainContext) -> Result<()> {
    if ctx.m() < 2 || ctx.m() >= ctx.n() {
        return Err(Error::HypothesisViolation(format!(
            "needs 1 < m < n, got n={} m={}",
            ctx.n(),
            ctx.m()
        )));
    }
    Ok(())
}

/// A factor drawn from `A`: `α_P` (possibly equal to `η`) or an order-preserving `θ`.
fn a_factor(theta: Transformation) -> Factor {
    if theta.is_order_preserving() {
        Factor::new(FactorTag::BaseO, theta)
    } else {
        let label = alpha_label(&theta.kernel());
        Factor::labelled(FactorTag::GeneratorA, theta, &label)
    }
}

/// Writes `β ∈ OP(X,Y)` as a word over `O(X,Y) ∪ A`, where `A` is
/// [`canonical_a`](crate::generators::canonical_a).
pub fn factor_op_over_o(beta: &Transformation) -> Result<Word> {
    let ctx = beta.ctx();
    require_proper_range(ctx)?;
    if !beta.is_orientation_preserving() {
        return Err(Error::HypothesisViolation(format!(
            "{beta} is not orientation-preserving"
        )));
    }
    let word = if beta.is_order_preserving() {
        Word {
            factors: vec![Factor::new(FactorTag::BaseO, beta.clone())],
        }
    } else if beta.rank() == ctx.m() {
        factor_full_rank(beta)?
    } else if beta.kernel().family() == Family::P {
        factor_p_kernel(beta)?
    } else {
        factor_q_kernel(beta)?
    };
    certified(word, beta)
}

/// Rank `m`: `β = θ η^r` with `θ` sharing the kernel of `β`.
fn factor_full_rank(beta: &Transformation) -> Result<Word> {
    let ctx = beta.ctx();
    let m = ctx.m();
    let theta = kernel_witness(beta)?;
    // The block θ sends to a_1 is the block β sends to a_{r+1}.
    let x = theta.preimage(ctx.a(1))[0];
    let r = ctx.index_in_y(beta.apply(x)).expect("images lie in Y");
    let power = if r == 0 { m } else { r };
    let mut word = Word {
        factors: Vec::new(),
    };
    word.push(a_factor(theta));
    word.push(Factor::new(FactorTag::EtaPower(power), build_eta(ctx)));
    Ok(word)
}

/// Rank `< m`, kernel in `P_i`: `β = θ η^k f` with `θ = α_{P'}` and `f ∈ O(X,Y)`.
fn factor_p_kernel(beta: &Transformation) -> Result<Word> {
    let ctx = beta.ctx();
    let (n, m) = (ctx.n(), ctx.m());
    let y = ctx.y();
    let p_prime = refine_to_p(&beta.kernel(), m)?;
    let theta = build_alpha_p(ctx, &p_prime)?;
    let eta = build_eta(ctx);
    // Block minima form the transversal T.
    let transversal: Vec<usize> = p_prime.blocks().iter().map(|b| b[0]).collect();
    let a = *beta.images().iter().min().expect("n >= 1");

    // f*_k(y) = β(x) for the x ∈ T with x θ η^k = y.
    let f_star = |k: usize| -> HashMap<usize, usize> {
        let eta_k = eta.pow(k);
        transversal
            .iter()
            .map(|&x| (eta_k.apply(theta.apply(x)), beta.apply(x)))
            .collect()
    };
    let k = (1..=m)
        .find(|&k| f_star(k)[&y[0]] == a && f_star(k % m + 1)[&y[0]] != a)
        .ok_or_else(|| Error::HypothesisViolation(format!("no rotation index found for {beta}")))?;
    let fs = f_star(k);
    let images = (1..=n)
        .map(|x| {
            let anchor = y.iter().rev().find(|&&ai| ai <= x).copied().unwrap_or(y[0]);
            fs[&anchor]
        })
        .collect();
    let f = Transformation::new_unchecked(ctx, images);

    let label = alpha_label(&p_prime);
    let mut word = Word {
        factors: Vec::new(),
    };
    word.push(Factor::labelled(FactorTag::GeneratorA, theta, &label));
    word.push(Factor::new(FactorTag::EtaPower(k), eta));
    word.push(Factor::new(FactorTag::BaseO, f));
    Ok(word)
}

/// Rank `i < m`, kernel in `Q_i`: `β = φ ν` with `φ ∈ O(X,Y)` and `ker ν ∈ P_i`.
fn factor_q_kernel(beta: &Transformation) -> Result<Word> {
    let ctx = beta.ctx();
    let n = ctx.n();
    let kernel = beta.kernel();
    let i = kernel.num_blocks();
    // b_j is the image of the j-th interval.
    let b: Vec<usize> = kernel
        .blocks()
        .iter()
        .map(|blk| beta.apply(blk[0]))
        .collect();
    let phi = Transformation::new_unchecked(
        ctx,
        (1..=n).map(|x| ctx.a(kernel.block_of(x) + 1)).collect(),
    );
    let nu_images = (1..=n)
        .map(|x| {
            (2..=i)
                .find(|&j| ctx.a(j) <= x && x < ctx.a(j + 1))
                .map_or(b[i - 1], |j| b[j - 2])
        })
        .collect();
    let nu = Transformation::new_unchecked(ctx, nu_images);
    let mut word = Word {
        factors: vec![Factor::new(FactorTag::BaseO, phi)],
    };
    word.extend(factor_p_kernel(&nu)?);
    Ok(word)
}

/// A shortest word over `gens` (indices) whose product is `sigma`, by
/// breadth-first search from the identity; among shortest words the one found
/// first when generators are tried in index order wins.
pub fn permutation_word(sigma: &YMap, gens: &[YMap]) -> Result<Vec<usize>> {
    let ctx = sigma.ctx();
    if !sigma.is_permutation() {
        return Err(Error::NotInSubgroup(format!(
            "{sigma} is not a permutation"
        )));
    }
    if gens.iter().any(|g| g.ctx().as_ref() != ctx.as_ref()) {
        return Err(Error::ContextMismatch);
    }
    if let Some(g) = gens.iter().find(|g| !g.is_permutation()) {
        return Err(Error::NotInSubgroup(format!(
            "generator {g} is not a permutation"
        )));
    }
    let target = sigma.indices();
    let identity: Vec<usize> = (0..ctx.m()).collect();
    let gen_idx: Vec<Vec<usize>> = gens.iter().map(YMap::indices).collect();
    // parent[p] = (predecessor, generator index)
    let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, usize)>> =
        HashMap::from([(identity.clone(), None)]);
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        if x == target {
            let mut word = Vec::new();
            let mut cur = x;
            while let Some(Some((prev, g))) = parent.get(&cur).cloned() {
                word.push(g);
                cur = prev;
            }
            word.reverse();
            return Ok(word);
        }
        for (gi, g) in gen_idx.iter().enumerate() {
            let p: Vec<usize> = x.iter().map(|&i| g[i]).collect();
            if !parent.contains_key(&p) {
                parent.insert(p.clone(), Some((x.clone(), gi)));
                queue.push_back(p);
            }
        }
    }
    Err(Error::NotInSubgroup(sigma.to_string()))
}

/// Replaces each map `Y → Y` of `word` by a transformation in `sources ∪ {η}`
/// restricting to it (`η` preferred). Runs of `η` become [`FactorTag::EtaPower`].
pub fn lift_y_word_to_transformations(word: &[YMap], sources: &GeneratingSet) -> Result<Word> {
    let ctx = sources.ctx();
    let eta = build_eta(ctx);
    let eta_y = eta.restrict_to_y();
    let mut out = Word {
        factors: Vec::new(),
    };
    for w in word {
        if w.ctx().as_ref() != ctx.as_ref() {
            return Err(Error::ContextMismatch);
        }
        if *w == eta_y {
            out.push(Factor::new(FactorTag::EtaPower(1), eta.clone()));
            continue;
        }
        let g = sources
            .elements()
            .iter()
            .find(|g| g.map.restrict_to_y() == *w)
            .ok_or_else(|| Error::UnknownRestriction(w.to_string()))?;
        out.push(Factor::labelled(
            FactorTag::GeneratorB,
            g.map.clone(),
            &g.label,
        ));
    }
    Ok(out)
}

/// Checks the two hypotheses that make `B` a relative generating set of
/// `T(X,Y)` modulo `OP(X,Y)`.
pub fn check_t_mod_op_hypotheses(ctx: &Arc<ChainContext>, b: &GeneratingSet) -> Result<()> {
    if b.ctx().as_ref() != ctx.as_ref() {
        return Err(Error::ContextMismatch);
    }
    let kernels: Vec<Partition> = b.maps().map(Transformation::kernel).collect();
    if let Some(missing) = enumerate_r(ctx.n(), ctx.m()).find(|p| !kernels.contains(p)) {
        return Err(Error::HypothesisViolation(format!(
            "R_m kernel coverage: no element of B has kernel {missing}"
        )));
    }
    let mut gens: Vec<YMap> = b.maps().map(Transformation::restrict_to_y).collect();
    gens.push(build_eta(ctx).restrict_to_y());
    if !generates_symmetric_group(ctx, &gens)? {
        return Err(Error::HypothesisViolation(
            "symmetric group: the restrictions of B with eta|_Y do not generate S(Y)".into(),
        ));
    }
    Ok(())
}

/// Writes `γ ∈ T(X,Y)` as a word over `OP(X,Y) ∪ B`.
pub fn factor_t_over_op(gamma: &Transformation, b: &GeneratingSet) -> Result<Word> {
    let ctx = gamma.ctx();
    if ctx.m() >= ctx.n() {
        return Err(Error::HypothesisViolation(format!(
            "needs m < n, got n={} m={}",
            ctx.n(),
            ctx.m()
        )));
    }
    check_t_mod_op_hypotheses(ctx, b)?;
    if gamma.is_orientation_preserving() {
        return Ok(Word {
            factors: vec![Factor::new(FactorTag::BaseOp, gamma.clone())],
        });
    }
    let kernel = gamma.kernel();
    let word = if kernel.family() == Family::R {
        factor_r_kernel(gamma, b)?
    } else {
        factor_via_r_kernel(gamma, b)?
    };
    certified(word, gamma)
}

/// Kernel in `R_k`: `γ = λ μ ν` with `λ ∈ B`, `μ ∈ ⟨B, η⟩` and `ν ∈ O(X,Y)`.
fn factor_r_kernel(gamma: &Transformation, b: &GeneratingSet) -> Result<Word> {
    let ctx = gamma.ctx();
    let n = ctx.n();
    let y = ctx.y();
    let p = refine_to_r(&gamma.kernel(), ctx.m())?;
    let lambda = b
        .elements()
        .iter()
        .find(|g| g.map.kernel() == p)
        .ok_or_else(|| Error::HypothesisViolation(format!("no element of B has kernel {p}")))?;
    let ys = gamma.image_set();
    // A_i: points of Y whose λ-block γ sends to y_i.
    let mut a_sets: Vec<Vec<usize>> = vec![Vec::new(); ys.len()];
    for &z in y {
        let x = lambda.map.preimage(z)[0];
        let i = ys.binary_search(&gamma.apply(x)).expect("image value");
        a_sets[i].push(z);
    }
    // C_i ∩ Y: consecutive runs of Y with |C_i ∩ Y| = |A_i|.
    let mut c_sets: Vec<Vec<usize>> = Vec::with_capacity(ys.len());
    let mut offset = 0;
    for a_i in &a_sets {
        c_sets.push(y[offset..offset + a_i.len()].to_vec());
        offset += a_i.len();
    }
    let mut sigma = vec![0; ctx.m()];
    for (a_i, c_i) in a_sets.iter().zip(&c_sets) {
        for (&from, &to) in a_i.iter().zip(c_i) {
            sigma[ctx.index_in_y(from).expect("in Y")] = to;
        }
    }
    let sigma = YMap::new(ctx, sigma)?;
    // C_i ends at its last Y point; the last interval runs to n.
    let nu_images = (1..=n)
        .map(|x| {
            let i = c_sets
                .iter()
                .position(|c| x <= *c.last().expect("nonempty"))
                .unwrap_or(ys.len() - 1);
            ys[i]
        })
        .collect();
    let nu = Transformation::new_unchecked(ctx, nu_images);

    let eta_y = build_eta(ctx).restrict_to_y();
    let mut gens: Vec<YMap> = b
        .maps()
        .map(Transformation::restrict_to_y)
        .filter(|r| r.is_permutation() && *r != eta_y)
        .unique()
        .collect();
    gens.push(eta_y);
    let path = permutation_word(&sigma, &gens)?;
    let mu_word: Vec<YMap> = path.into_iter().map(|i| gens[i].clone()).collect();

    let mut word = Word {
        factors: vec![Factor::labelled(
            FactorTag::GeneratorB,
            lambda.map.clone(),
            &lambda.label,
        )],
    };
    word.extend(lift_y_word_to_transformations(&mu_word, b)?);
    word.push(Factor::new(FactorTag::BaseO, nu));
    Ok(word)
}

/// Kernel in `Q_k ∪ P_k` (and `γ ∉ OP`): `γ = ρ₁ ρ₂` with `ρ₁ ∈ OP(X,Y)` and
/// `ker ρ₂ ∈ R_k`.
fn factor_via_r_kernel(gamma: &Transformation, b: &GeneratingSet) -> Result<Word> {
    let ctx = gamma.ctx();
    let kernel = gamma.kernel();
    let k = kernel.num_blocks();
    let rho1 = Transformation::from_blocks(ctx, &kernel, &ctx.y()[..k])?;
    let d = r_partition_through(ctx, k).ok_or_else(|| Error::InfeasibleRefinement {
        partition: kernel.to_string(),
        reason: format!("no R_{k} partition separates a_1, ..., a_{k}"),
    })?;
    // ρ₂ sends D_{a_j} to γ(block j).
    let rho2_images = (1..=ctx.n())
        .map(|x| {
            let j = (1..=k)
                .find(|&j| d.block_of(ctx.a(j)) == d.block_of(x))
                .expect("every block holds one a_j");
            gamma.apply(kernel.block(j)[0])
        })
        .collect();
    let rho2 = Transformation::new_unchecked(ctx, rho2_images);
    debug_assert_eq!(rho2.kernel(), d);
    let mut word = Word {
        factors: vec![Factor::new(
            if rho1.is_order_preserving() {
                FactorTag::BaseO
            } else {
                FactorTag::BaseOp
            },
            rho1,
        )],
    };
    word.extend(factor_r_kernel(&rho2, b)?);
    Ok(word)
}

/// A partition in `R_k` with `a_1, ..., a_k` in distinct blocks.
///
/// First tries sending every other point into a single block `D_{a_j}`
/// (`j = 1, ..., k`), then falls back to all assignments in lexicographic order.
fn r_partition_through(ctx: &Arc<ChainContext>, k: usize) -> Option<Partition> {
    let n = ctx.n();
    let anchors = &ctx.y()[..k];
    let free: Vec<usize> = (1..=n).filter(|x| !anchors.contains(x)).collect();
    let build = |assign: &[usize]| {
        let mut labels = vec![0; n];
        for (j, &a) in anchors.iter().enumerate() {
            labels[a - 1] = j;
        }
        for (&x, &j) in free.iter().zip(assign) {
            labels[x - 1] = j;
        }
        Partition::from_labels(&labels)
            .ok()
            .filter(|p| p.family() == Family::R)
    };
    (0..k)
        .find_map(|j| build(&vec![j; free.len()]))
        .or_else(|| {
            std::iter::repeat_n(0..k, free.len())
                .multi_cartesian_product()
                .find_map(|assign| build(&assign))
        })
}
