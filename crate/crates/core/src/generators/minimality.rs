//! Kernel-and-restriction criteria for minimal relative generating sets.
//!
//! Both criteria reduce generation questions to two pieces of data per
//! element: its kernel and its restriction to `Y`. A product of maps
//! `Y → Y` is a permutation iff every factor is, so only the permutation
//! restrictions matter for the group-membership tests.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::{build_eta, GeneratingSet};
use crate::chain::{ChainContext, YMap};
use crate::closure::{generates_symmetric_group, ymap_monoid_closure};
use crate::error::{Error, Result};
use crate::partition::{enumerate_p, enumerate_r, Family, Partition};

/// Which of the three conditions of a criterion failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Every required kernel occurs outside `B̃`.
    I,
    /// `B ∖ B̃` has exactly one element per required kernel.
    II,
    /// The restriction-to-`Y` condition.
    III,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::I => "i",
            Condition::II => "ii",
            Condition::III => "iii",
        })
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Verdict of a minimality check, with the failing condition and a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub verdict: bool,
    pub failed_condition: Option<Condition>,
    /// What broke the failing condition (a kernel, a count, or an element label).
    pub witness: Option<String>,
    /// Labels of the elements placed in `B̃`.
    pub tilde: Vec<String>,
}

impl MinimalityReport {
    fn pass(tilde: Vec<String>) -> Self {
        MinimalityReport {
            verdict: true,
            failed_condition: None,
            witness: None,
            tilde,
        }
    }

    fn fail(condition: Condition, witness: String, tilde: Vec<String>) -> Self {
        MinimalityReport {
            verdict: false,
            failed_condition: Some(condition),
            witness: Some(witness),
            tilde,
        }
    }
}

impl fmt::Display for MinimalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.failed_condition, &self.witness) {
            (None, _) => write!(f, "minimal"),
            (Some(c), Some(w)) => write!(f, "not minimal: condition ({c}) fails at {w}"),
            (Some(c), None) => write!(f, "not minimal: condition ({c}) fails"),
        }
    }
}

fn check_ctx(ctx: &Arc<ChainContext>, b: &GeneratingSet) -> Result<()> {
    if b.ctx().as_ref() != ctx.as_ref() {
        return Err(Error::ContextMismatch);
    }
    if ctx.m() < 2 || ctx.m() >= ctx.n() {
        return Err(Error::HypothesisViolation(format!(
            "needs 1 < m < n, got n={} m={}",
            ctx.n(),
            ctx.m()
        )));
    }
    Ok(())
}

fn permutation_closure(
    ctx: &Arc<ChainContext>,
    gens: impl Iterator<Item = YMap>,
) -> Result<Vec<YMap>> {
    let perms: Vec<YMap> = gens.filter(YMap::is_permutation).collect();
    if perms.is_empty() {
        return Ok(Vec::new());
    }
    ymap_monoid_closure(ctx, &perms)
}

/// Decides whether `B ⊆ OP(X,Y)` is a minimal relative generating set of
/// `OP(X,Y)` modulo `O(X,Y)`, with `B̃` the elements whose kernel is in `Q_m`.
pub fn check_min_relgen_op_mod_o(
    ctx: &Arc<ChainContext>,
    b: &GeneratingSet,
) -> Result<MinimalityReport> {
    check_ctx(ctx, b)?;
    if let Some(g) = b
        .elements()
        .iter()
        .find(|g| !g.map.is_orientation_preserving())
    {
        return Err(Error::ElementNotInOP(g.map.to_string()));
    }
    let m = ctx.m();
    let kernels: Vec<Partition> = b.maps().map(|t| t.kernel()).collect();
    let in_tilde: Vec<bool> = kernels
        .iter()
        .map(|k| k.num_blocks() == m && k.family() == Family::Q)
        .collect();
    let tilde: Vec<String> = b
        .elements()
        .iter()
        .zip(&in_tilde)
        .filter(|(_, &t)| t)
        .map(|(g, _)| g.label.clone())
        .collect();

    let p_m: Vec<Partition> = enumerate_p(ctx.n(), m)?.collect();
    let rest: Vec<&Partition> = kernels
        .iter()
        .zip(&in_tilde)
        .filter(|(_, &t)| !t)
        .map(|(k, _)| k)
        .collect();
    if let Some(missing) = p_m.iter().find(|p| !rest.contains(p)) {
        return Ok(MinimalityReport::fail(
            Condition::I,
            missing.to_string(),
            tilde,
        ));
    }
    if rest.len() != p_m.len() {
        return Ok(MinimalityReport::fail(
            Condition::II,
            format!("|B \\ B~| = {} but |P_m| = {}", rest.len(), p_m.len()),
            tilde,
        ));
    }

    let eta = build_eta(ctx).restrict_to_y();
    let restrictions: Vec<YMap> = b.maps().map(|t| t.restrict_to_y()).collect();
    if !permutation_closure(ctx, restrictions.iter().cloned())?.contains(&eta) {
        return Ok(MinimalityReport::fail(
            Condition::III,
            "eta|_Y is not generated by the restrictions".into(),
            tilde,
        ));
    }
    for (i, g) in b.elements().iter().enumerate() {
        if !in_tilde[i] {
            continue;
        }
        let others = restrictions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone());
        if permutation_closure(ctx, others)?.contains(&eta) {
            return Ok(MinimalityReport::fail(
                Condition::III,
                g.label.clone(),
                tilde,
            ));
        }
    }
    Ok(MinimalityReport::pass(tilde))
}

/// Decides whether `B ⊆ T(X,Y)` is a minimal relative generating set of
/// `T(X,Y)` modulo `OP(X,Y)`.
///
/// Conditions (i) and (ii) force `B ∖ B̃` to be one element per `R_m` kernel.
/// Whichever element is picked for a kernel `K`, the kernels occurring in `B̃`
/// are the same: every kernel outside `R_m`, plus every `K ∈ R_m` carried by
/// two or more elements. So condition (iii) does not depend on the pick and a
/// single candidate `B̃` settles the existential question.
pub fn check_min_relgen_t_mod_op(
    ctx: &Arc<ChainContext>,
    b: &GeneratingSet,
) -> Result<MinimalityReport> {
    check_ctx(ctx, b)?;
    let kernels: Vec<Partition> = b.maps().map(|t| t.kernel()).collect();
    let r_m: Vec<Partition> = enumerate_r(ctx.n(), ctx.m()).collect();

    // One representative (the first) per R_m kernel; everything else is B̃.
    let mut chosen: HashMap<&Partition, usize> = HashMap::new();
    for (i, k) in kernels.iter().enumerate() {
        if r_m.contains(k) {
            chosen.entry(k).or_insert(i);
        }
    }
    let in_tilde: Vec<bool> = (0..kernels.len())
        .map(|i| chosen.get(&kernels[i]) != Some(&i))
        .collect();
    let tilde: Vec<String> = b
        .elements()
        .iter()
        .zip(&in_tilde)
        .filter(|(_, &t)| t)
        .map(|(g, _)| g.label.clone())
        .collect();
    if let Some(missing) = r_m.iter().find(|p| !chosen.contains_key(p)) {
        return Ok(MinimalityReport::fail(
            Condition::I,
            missing.to_string(),
            tilde,
        ));
    }

    let eta = build_eta(ctx).restrict_to_y();
    let restrictions: Vec<YMap> = b.maps().map(|t| t.restrict_to_y()).collect();
    let with_eta = |skip: Option<usize>| {
        let mut gens: Vec<YMap> = restrictions
            .iter()
            .enumerate()
            .filter(|&(j, _)| Some(j) != skip)
            .map(|(_, r)| r.clone())
            .collect();
        gens.push(eta.clone());
        generates_symmetric_group(ctx, &gens)
    };
    if !with_eta(None)? {
        return Ok(MinimalityReport::fail(
            Condition::III,
            "S(Y) is not generated by the restrictions and eta|_Y".into(),
            tilde,
        ));
    }
    let tilde_kernels: Vec<&Partition> = kernels
        .iter()
        .zip(&in_tilde)
        .filter(|(_, &t)| t)
        .map(|(k, _)| k)
        .collect();
    for (i, g) in b.elements().iter().enumerate() {
        if tilde_kernels.contains(&&kernels[i]) && with_eta(Some(i))? {
            return Ok(MinimalityReport::fail(
                Condition::III,
                g.label.clone(),
                tilde,
            ));
        }
    }
    Ok(MinimalityReport::pass(tilde))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Transformation;
    use crate::generators::{build_alpha_p, canonical_a, canonical_b_t_mod_op};

    fn ctx(n: usize, y: &[usize]) -> Arc<ChainContext> {
        ChainContext::new(n, y).unwrap()
    }

    fn t(c: &Arc<ChainContext>, images: &[usize]) -> Transformation {
        Transformation::new(c, images.to_vec()).unwrap()
    }

    #[test]
    fn canonical_a_is_minimal() {
        for y in [&[2usize, 3][..], &[1, 4], &[2, 4], &[1, 2, 4]] {
            let c = ctx(4, y);
            let r = check_min_relgen_op_mod_o(&c, &canonical_a(&c).unwrap()).unwrap();
            assert!(r.verdict, "Y={y:?}: {r}");
        }
    }

    #[test]
    fn canonical_a_with_rotated_eta_is_not_minimal() {
        // 1 ∈ Y, n ∉ Y: η and α_{ker η} share a kernel, one of them is redundant.
        let c = ctx(4, &[1, 3]);
        let a = canonical_a(&c).unwrap();
        let r = check_min_relgen_op_mod_o(&c, &a).unwrap();
        assert_eq!(r.failed_condition, Some(Condition::II));
        let alpha0 = a
            .elements()
            .iter()
            .position(|g| g.map == build_alpha_p(&c, &build_eta(&c).kernel()).unwrap())
            .unwrap();
        assert!(
            check_min_relgen_op_mod_o(&c, &a.without(alpha0))
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn extra_rotation_fails_ii() {
        let c = ctx(4, &[2, 3]);
        let mut b = canonical_a(&c).unwrap();
        // Kernel 1,4|2,3 again, with the other image rotation.
        b.insert("extra", t(&c, &[3, 2, 2, 3])).unwrap();
        let r = check_min_relgen_op_mod_o(&c, &b).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.failed_condition, Some(Condition::II));
    }

    #[test]
    fn missing_alpha_fails_i() {
        let c = ctx(4, &[2, 3]);
        let b = canonical_a(&c).unwrap();
        let r = check_min_relgen_op_mod_o(&c, &b.without(1)).unwrap();
        assert_eq!(r.failed_condition, Some(Condition::I));
        assert!(r.witness.is_some());
    }

    #[test]
    fn op_checker_rejects_non_op() {
        let c = ctx(4, &[2, 3]);
        let b = GeneratingSet::from_maps(&c, [t(&c, &[3, 2, 3, 2])]).unwrap();
        assert!(matches!(
            check_min_relgen_op_mod_o(&c, &b),
            Err(Error::ElementNotInOP(_))
        ));
        let other = ctx(4, &[1, 4]);
        assert_eq!(
            check_min_relgen_op_mod_o(&other, &b).unwrap_err(),
            Error::ContextMismatch
        );
    }

    #[test]
    fn canonical_b_is_minimal_with_empty_tilde() {
        for y in [&[2usize, 3][..], &[1, 4], &[1, 2, 4], &[2, 3, 4]] {
            let c = ctx(4, y);
            let (b, _) = canonical_b_t_mod_op(&c).unwrap();
            let r = check_min_relgen_t_mod_op(&c, &b).unwrap();
            assert!(r.verdict, "Y={y:?}: {r}");
            assert!(r.tilde.is_empty());
        }
    }

    #[test]
    fn redundant_duplicate_kernel_fails() {
        let c = ctx(4, &[2, 3]);
        let (mut b, _) = canonical_b_t_mod_op(&c).unwrap();
        let existing = b.to_vec()[0].clone();
        // Same kernel 1,3|2,4 with the swapped images; its Y-map is a
        // permutation already generated by eta|_Y.
        let twin = t(
            &c,
            &existing.images().iter().map(|&v| 5 - v).collect::<Vec<_>>(),
        );
        assert_eq!(twin.kernel(), existing.kernel());
        b.insert("twin", twin).unwrap();
        let r = check_min_relgen_t_mod_op(&c, &b).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.failed_condition, Some(Condition::III));
    }

    #[test]
    fn empty_set_fails() {
        let c = ctx(4, &[2, 3]);
        let r = check_min_relgen_t_mod_op(&c, &GeneratingSet::new(&c)).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.failed_condition, Some(Condition::I));
    }

    #[test]
    fn report_json_shape() {
        let c = ctx(4, &[2, 3]);
        let r = check_min_relgen_t_mod_op(&c, &GeneratingSet::new(&c)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], false);
        assert_eq!(v["failed_condition"], "i");
        assert!(v["witness"].is_string());
        let ok = check_min_relgen_op_mod_o(&c, &canonical_a(&c).unwrap()).unwrap();
        let v = serde_json::to_value(&ok).unwrap();
        assert!(v["failed_condition"].is_null());
    }
}
