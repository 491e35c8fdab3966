//! The distinguished maps `η` and `α_P`, canonical relative generating sets,
//! and the relative-rank formulas.

mod minimality;

pub use minimality::{
    check_min_relgen_op_mod_o, check_min_relgen_t_mod_op, Condition, MinimalityReport,
};

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::chain::{ChainContext, Transformation};
use crate::counting::{binomial, stirling2};
use crate::error::{Error, Result};
use crate::partition::{enumerate_p, enumerate_r, Family, Partition};

/// A labelled member of a [`GeneratingSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub map: Transformation,
}

impl Serialize for Generator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Generator", 2)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("images", self.map.images())?;
        s.end()
    }
}

/// A finite set of transformations over one context, deduplicated by value and
/// kept in insertion order.
#[derive(Debug, Clone)]
pub struct GeneratingSet {
    ctx: Arc<ChainContext>,
    elements: Vec<Generator>,
}

impl GeneratingSet {
    pub fn new(ctx: &Arc<ChainContext>) -> Self {
        GeneratingSet {
            ctx: Arc::clone(ctx),
            elements: Vec::new(),
        }
    }

    /// Labels elements `b1, b2, ...` in order.
    pub fn from_maps(
        ctx: &Arc<ChainContext>,
        maps: impl IntoIterator<Item = Transformation>,
    ) -> Result<Self> {
        let mut set = GeneratingSet::new(ctx);
        for (i, map) in maps.into_iter().enumerate() {
            set.insert(format!("b{}", i + 1), map)?;
        }
        Ok(set)
    }

    /// Adds `map` unless an equal map is present; returns whether it was added.
    pub fn insert(&mut self, label: impl Into<String>, map: Transformation) -> Result<bool> {
        if map.ctx().as_ref() != self.ctx.as_ref() {
            return Err(Error::ContextMismatch);
        }
        if self.contains(&map) {
            return Ok(false);
        }
        self.elements.push(Generator {
            label: label.into(),
            map,
        });
        Ok(true)
    }

    pub fn contains(&self, map: &Transformation) -> bool {
        self.elements.iter().any(|g| &g.map == map)
    }

    pub fn ctx(&self) -> &Arc<ChainContext> {
        &self.ctx
    }

    pub fn elements(&self) -> &[Generator] {
        &self.elements
    }

    pub fn maps(&self) -> impl Iterator<Item = &Transformation> + '_ {
        self.elements.iter().map(|g| &g.map)
    }

    pub fn to_vec(&self) -> Vec<Transformation> {
        self.maps().cloned().collect()
    }

    pub fn label_of(&self, map: &Transformation) -> Option<&str> {
        self.elements
            .iter()
            .find(|g| &g.map == map)
            .map(|g| g.label.as_str())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// A copy without the element at `index`.
    pub fn without(&self, index: usize) -> GeneratingSet {
        let mut out = self.clone();
        out.elements.remove(index);
        out
    }
}

impl Serialize for GeneratingSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("GeneratingSet", 2)?;
        s.serialize_field("ctx", self.ctx.as_ref())?;
        s.serialize_field("elements", &self.elements)?;
        s.end()
    }
}

/// The rotation `η`: its restriction to `Y` is the cycle `(a_1 a_2 ... a_m)`.
pub fn build_eta(ctx: &Arc<ChainContext>) -> Transformation {
    let n = ctx.n();
    let m = ctx.m();
    let y = ctx.y();
    if m == 1 {
        return Transformation::new_unchecked(ctx, vec![y[0]; n]);
    }
    // Γ = 1 if 1 ∉ Y, else 2 (only used when 1 ∉ Y or n ∉ Y).
    let gamma = if ctx.one_in_y() { 2 } else { 1 };
    let both_ends = ctx.contains_both_ends();
    let images = (1..=n)
        .map(|x| {
            if let Some(i) = (1..m).find(|&i| ctx.a(i) <= x && x < ctx.a(i + 1)) {
                ctx.a(i + 1)
            } else if x == ctx.a(m) {
                ctx.a(1)
            } else {
                debug_assert!(!both_ends, "every point is covered when 1, n ∈ Y");
                ctx.a(gamma)
            }
        })
        .collect();
    Transformation::new_unchecked(ctx, images)
}

/// `α_P` for `P ∈ P_m`: block `A_i ↦ a_i`, or `A_i ↦ a_{i+1}` with `A_m ↦ a_1`
/// when `1, n ∈ Y`. Its kernel is `P`.
pub fn build_alpha_p(ctx: &Arc<ChainContext>, p: &Partition) -> Result<Transformation> {
    let m = ctx.m();
    if p.n() != ctx.n() || p.num_blocks() != m || p.family() != Family::P {
        return Err(Error::WrongClass(p.to_string()));
    }
    let values: Vec<usize> = if ctx.contains_both_ends() {
        (1..=m).map(|i| ctx.a(i % m + 1)).collect()
    } else {
        ctx.y().to_vec()
    };
    Transformation::from_blocks(ctx, p, &values)
}

pub fn alpha_label(p: &Partition) -> String {
    format!("alpha[{p}]")
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

/// `{α_P : P ∈ P_m} ∪ {η}`, with `η` first.
pub fn canonical_a(ctx: &Arc<ChainContext>) -> Result<GeneratingSet> {
    require_proper_range(ctx)?;
    let eta = build_eta(ctx);
    let mut set = GeneratingSet::new(ctx);
    let eta_kernel = eta.kernel();
    // η = α_{ker η} when 1 ∉ Y; it is then listed under its α label. When
    // 1 ∈ Y but n ∉ Y, η is a rotation of α_{ker η} and both are members.
    let is_alpha = eta_kernel.family() == Family::P && build_alpha_p(ctx, &eta_kernel)? == eta;
    if is_alpha {
        set.insert(alpha_label(&eta_kernel), eta)?;
    } else {
        set.insert("eta", eta)?;
    }
    for p in enumerate_p(ctx.n(), ctx.m())? {
        set.insert(alpha_label(&p), build_alpha_p(ctx, &p)?)?;
    }
    Ok(set)
}

/// The order-preserving map sending the `i`-th interval of a `Q` kernel to `a_i`.
fn order_preserving_with_kernel(
    ctx: &Arc<ChainContext>,
    kernel: &Partition,
) -> Result<Transformation> {
    debug_assert_eq!(kernel.family(), Family::Q);
    Transformation::from_blocks(ctx, kernel, &ctx.y()[..kernel.num_blocks()])
}

/// For `β ∈ OP(X,Y)` of rank `m`: an `α̂` with the same kernel that is either
/// order-preserving or one of the `α_P`.
pub fn kernel_witness(beta: &Transformation) -> Result<Transformation> {
    let ctx = beta.ctx();
    if !beta.is_orientation_preserving() {
        return Err(Error::HypothesisViolation(format!(
            "{beta} is not orientation-preserving"
        )));
    }
    if beta.rank() != ctx.m() {
        return Err(Error::HypothesisViolation(format!(
            "{beta} has rank {} but m = {}",
            beta.rank(),
            ctx.m()
        )));
    }
    if beta.is_order_preserving() {
        return Ok(beta.clone());
    }
    let kernel = beta.kernel();
    match kernel.family() {
        Family::Q => order_preserving_with_kernel(ctx, &kernel),
        Family::P => build_alpha_p(ctx, &kernel),
        Family::R => unreachable!("orientation-preserving kernels are never in R"),
    }
}

/// How the transposition-carrying element of [`canonical_b_t_mod_op`] was chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Designation {
    /// `m <= 2`: `η|_Y` alone generates `S(Y)`.
    NotNeeded,
    /// The first `P' ∈ R_m` having `Y` as a transversal.
    Transversal(String),
    /// No member of `R_m` has `Y` as a transversal.
    NotFound,
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Designation::NotNeeded => f.write_str("not needed (m <= 2)"),
            Designation::Transversal(p) => write!(f, "transversal partition {p}"),
            Designation::NotFound => f.write_str("no R_m partition has Y as a transversal"),
        }
    }
}

/// One `β_P` per `P ∈ R_m`. Generic members send the block with the `i`-th
/// smallest minimum to `a_i`; for `m >= 3` the designated member restricts to
/// the transposition `(a_1 a_2)` on `Y`.
pub fn canonical_b_t_mod_op(ctx: &Arc<ChainContext>) -> Result<(GeneratingSet, Designation)> {
    let n = ctx.n();
    let m = ctx.m();
    if m >= n {
        return Err(Error::HypothesisViolation(format!(
            "needs m < n, got n={n} m={m}"
        )));
    }
    let transversal = |p: &Partition| {
        let mut hit = vec![false; m + 1];
        ctx.y()
            .iter()
            .all(|&a| !std::mem::replace(&mut hit[p.block_of(a)], true))
    };
    let r_m: Vec<Partition> = enumerate_r(n, m).collect();
    let designated = if m >= 3 {
        r_m.iter().position(transversal)
    } else {
        None
    };
    let mut set = GeneratingSet::new(ctx);
    for (idx, p) in r_m.iter().enumerate() {
        if Some(idx) == designated {
            let mut values = vec![0; m];
            for (i, &a) in ctx.y().iter().enumerate() {
                let swapped = match i {
                    0 => ctx.a(2),
                    1 => ctx.a(1),
                    _ => a,
                };
                values[p.block_of(a) - 1] = swapped;
            }
            set.insert(
                format!("beta'[{p}]"),
                Transformation::from_blocks(ctx, p, &values)?,
            )?;
        } else {
            set.insert(
                format!("beta[{p}]"),
                Transformation::from_blocks(ctx, p, ctx.y())?,
            )?;
        }
    }
    let designation = match (m >= 3, designated) {
        (false, _) => Designation::NotNeeded,
        (true, Some(i)) => Designation::Transversal(r_m[i].to_string()),
        (true, None) => Designation::NotFound,
    };
    Ok((set, designation))
}

/// `rank(OP(X,Y) : O(X,Y))`: `C(n-1, m)`, plus one when `{1, n} ⊆ Y`; zero for `m = 1`.
pub fn relrank_op_mod_o(ctx: &ChainContext) -> Result<u64> {
    let (n, m) = (ctx.n() as u64, ctx.m() as u64);
    if m == 1 {
        return Ok(0);
    }
    if m == n {
        return Err(Error::HypothesisViolation(
            "m = n is outside the theorem's scope".into(),
        ));
    }
    let base = binomial(n - 1, m)?;
    Ok(if ctx.contains_both_ends() {
        base + 1
    } else {
        base
    })
}

/// `rank(T(X,Y) : OP(X,Y)) = S(n, m) - C(n, m)` for `2 <= m < n`; zero for `m = 1`.
pub fn relrank_t_mod_op(ctx: &ChainContext) -> Result<u64> {
    let (n, m) = (ctx.n() as u64, ctx.m() as u64);
    if m == 1 {
        // T(X,Y) consists of constants here and equals OP(X,Y).
        return Ok(0);
    }
    if m == n {
        return Err(Error::HypothesisViolation(
            "m = n is outside the theorem's scope".into(),
        ));
    }
    Ok(stirling2(n, m)? - binomial(n, m)?)
}
