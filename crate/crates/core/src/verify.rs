//! Verification grid: every rank formula, generation claim, factorization and
//! minimality criterion checked against exhaustive computation, one report
//! row per check and context.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{ChainContext, Transformation, YMap};
use crate::closure::{
    brute_min_relrank, closure, enumerate_o, enumerate_op, enumerate_t, generates_symmetric_group,
    minimal_with, relative_generating_subsets, Budget, GenerationOracle, NecessityFilter,
    SemigroupSet, Verdict,
};
use crate::counting::{binomial, stirling2};
use crate::error::{Error, Result};
use crate::factor::{factor_op_over_o, factor_t_over_op, FactorTag};
use crate::generators::{
    build_eta, canonical_a, canonical_b_t_mod_op, check_min_relgen_op_mod_o,
    check_min_relgen_t_mod_op, relrank_op_mod_o, relrank_t_mod_op, GeneratingSet,
};
use crate::partition::{enumerate_all, enumerate_p, enumerate_q, enumerate_r, Partition};

/// Which group of checks to run. The names are the CLI's `verify` scopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// `rank(OP:O)` formula against exhaustive search, and kernel necessity.
    Thm5,
    /// The `OP:O` minimality criterion against direct minimality.
    Thm6,
    /// `rank(T:OP)` formula against search and by generation, kernel and
    /// permutation necessity, and the `m = 2` erratum row.
    Thm11,
    /// The `T:OP` minimality criterion against direct minimality.
    Thm12,
    /// `⟨η|_Y⟩` equals the permutations among restrictions of `OP(X,Y)`.
    LemmaEta,
    /// `⟨O(X,Y), A⟩ = OP(X,Y)` by closure and by factorization.
    Prop2,
    /// Factorization of every `γ ∈ T(X,Y)` over `OP(X,Y) ∪ B`.
    Lemma7,
    /// Partition family counts.
    Counts,
}

impl Scope {
    pub const ALL: [Scope; 8] = [
        Scope::Thm5,
        Scope::Thm6,
        Scope::Thm11,
        Scope::Thm12,
        Scope::LemmaEta,
        Scope::Prop2,
        Scope::Lemma7,
        Scope::Counts,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scope::Thm5 => "thm5",
            Scope::Thm6 => "thm6",
            Scope::Thm11 => "thm11",
            Scope::Thm12 => "thm12",
            Scope::LemmaEta => "lemma-eta",
            Scope::Prop2 => "prop2",
            Scope::Lemma7 => "lemma7",
            Scope::Counts => "counts",
        }
    }

    /// Parses a comma-separated list of scope names; `all` expands to every scope.
    pub fn parse_list(s: &str) -> Result<Vec<Scope>> {
        let mut scopes = Vec::new();
        for name in s.split(',').map(str::trim) {
            if name == "all" {
                scopes.extend(Scope::ALL);
            } else {
                scopes.push(name.parse()?);
            }
        }
        Ok(scopes.into_iter().sorted().dedup().collect())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scope::ALL
            .into_iter()
            .find(|scope| scope.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scope {s:?}")))
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed-form value only.
    Formula,
    /// Counting by explicit enumeration.
    Enumeration,
    /// Saturation and set comparison.
    Closure,
    /// Minimum-size subset search.
    Search,
    /// Round trip through a factorization.
    Factorization,
    /// Criterion compared against direct minimality on a family of sets.
    Equivalence,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Method::Formula => "formula",
            Method::Enumeration => "enumeration",
            Method::Closure => "closure",
            Method::Search => "search",
            Method::Factorization => "factorization",
            Method::Equivalence => "equivalence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

/// One verified claim for one context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub scope: Scope,
    pub n: usize,
    pub m: usize,
    pub y: Vec<usize>,
    pub check: &'static str,
    pub method: Method,
    pub formula_value: Option<u64>,
    pub brute_value: Option<u64>,
    pub universe_size: Option<u64>,
    pub millis: u64,
    pub status: Status,
    pub note: String,
}

impl Row {
    fn new(scope: Scope, ctx: &ChainContext, check: &'static str, method: Method) -> Self {
        Row {
            scope,
            n: ctx.n(),
            m: ctx.m(),
            y: ctx.y().to_vec(),
            check,
            method,
            formula_value: None,
            brute_value: None,
            universe_size: (ctx.m() as u64).checked_pow(ctx.n() as u32),
            millis: 0,
            status: Status::Pass,
            note: String::new(),
        }
    }

    fn compare(mut self, formula: u64, brute: u64) -> Self {
        self.formula_value = Some(formula);
        self.brute_value = Some(brute);
        self.status = if formula == brute {
            Status::Pass
        } else {
            Status::Fail
        };
        self
    }

    fn verdict(mut self, ok: bool, note: impl Into<String>) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self.note = note.into();
        self
    }

    fn skipped(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = note.into();
        self
    }

    /// Budget exhaustion is a skip; any other error is a failure.
    fn on_error(self, e: Error) -> Self {
        match e {
            Error::BudgetExceeded(msg) => self.skipped(format!("budget exceeded: {msg}")),
            other => self.verdict(false, other.to_string()),
        }
    }

    pub fn y_literal(&self) -> String {
        self.y.iter().join(",")
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        write!(
            f,
            "{:<7} n={} m={} Y={{{}}} {:<18} {:<13} formula={} brute={} {}ms",
            self.status,
            self.n,
            self.m,
            self.y_literal(),
            self.check,
            self.method,
            value(self.formula_value),
            value(self.brute_value),
            self.millis
        )?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

/// All rows of a run, in a fixed order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    pub fn all_pass(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} rows: {} PASS, {} FAIL, {} SKIPPED",
            self.rows.len(),
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        )
    }
}

/// One element of a `--y-contains` list: a fixed point or the top of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Point(usize),
    Top,
}

/// Which `Y` to visit for each `n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum YFilter {
    /// Every nonempty subset.
    #[default]
    All,
    /// Exactly this set (for every `n` that contains it).
    Exact(Vec<usize>),
    /// Every subset containing these points.
    Contains(Vec<Bound>),
}

impl YFilter {
    /// Parses a `--y-contains` list such as `1,n`.
    pub fn parse_contains(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| match t.trim() {
                "n" => Ok(Bound::Top),
                v => v
                    .parse()
                    .map(Bound::Point)
                    .map_err(|_| Error::Parse(format!("bad point {v:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(YFilter::Contains)
    }

    fn accepts(&self, ctx: &ChainContext) -> bool {
        match self {
            YFilter::All => true,
            YFilter::Exact(y) => ctx.y() == y.as_slice(),
            YFilter::Contains(points) => points.iter().all(|b| match b {
                Bound::Point(p) => ctx.contains(*p),
                Bound::Top => ctx.n_in_y(),
            }),
        }
    }
}

/// The `(n, Y)` grid and the per-check size limits.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n_min: usize,
    pub n_max: usize,
    pub y: YFilter,
    pub budget: Budget,
    /// Largest `n` for the exhaustive `rank(OP:O)` search.
    pub search_op_n_max: usize,
    /// Largest `n` for the exhaustive `rank(T:OP)` search.
    pub search_t_n_max: usize,
    /// Largest `n` for the necessity audits over all small generating sets.
    pub necessity_n_max: usize,
    /// Largest `n` for factoring every element of `T(X,Y)`.
    pub factor_t_n_max: usize,
    /// Largest `n` for the minimality comparisons.
    pub equivalence_n_max: usize,
    /// Most candidate sets per context in the minimality comparisons.
    pub equivalence_cap: usize,
    /// Largest `n` for the partition counts.
    pub counts_n_max: usize,
}

impl Grid {
    pub fn new(n_max: usize) -> Self {
        Grid {
            n_min: 2,
            n_max,
            y: YFilter::All,
            budget: Budget::from_env(),
            search_op_n_max: 5,
            search_t_n_max: 4,
            necessity_n_max: 4,
            factor_t_n_max: 5,
            equivalence_n_max: 5,
            equivalence_cap: 20_000,
            counts_n_max: n_max,
        }
    }

    pub fn contexts(&self) -> Vec<Arc<ChainContext>> {
        (self.n_min.max(1)..=self.n_max)
            .flat_map(ChainContext::all_for)
            .filter(|c| self.y.accepts(c))
            .collect()
    }
}

fn timed(f: impl FnOnce() -> Row) -> Row {
    let start = Instant::now();
    let mut row = f();
    row.millis = start.elapsed().as_millis() as u64;
    row
}

fn proper(ctx: &ChainContext) -> bool {
    ctx.m() >= 2 && ctx.m() < ctx.n()
}

const OUT_OF_SCOPE: &str = "m = n is outside the theorem's scope";

/// Runs `scopes` over the grid. Contexts run in parallel; rows come back in
/// scope, then context, then check order.
pub fn run(scopes: &[Scope], grid: &Grid) -> Report {
    let contexts = grid.contexts();
    let mut jobs: Vec<(Scope, Option<Arc<ChainContext>>)> = Vec::new();
    for &scope in scopes.iter().sorted().dedup() {
        match scope {
            Scope::Counts => jobs.push((scope, None)),
            _ => jobs.extend(contexts.iter().map(|c| (scope, Some(Arc::clone(c))))),
        }
    }
    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|(scope, ctx)| match ctx {
            Some(c) => rows_for(*scope, c, grid),
            None => count_rows(grid),
        })
        .collect::<Vec<_>>()
        .concat();
    if scopes.contains(&Scope::Thm11) {
        rows.extend((grid.n_min.max(4)..=grid.n_max).map(erratum_row));
    }
    Report { rows }
}

/// Rows for one scope and one context.
pub fn rows_for(scope: Scope, ctx: &Arc<ChainContext>, grid: &Grid) -> Vec<Row> {
    match scope {
        Scope::Thm5 => vec![
            timed(|| relrank_op_row(ctx, grid)),
            timed(|| necessity_op_row(ctx, grid)),
        ],
        Scope::Thm6 => vec![timed(|| equivalence_row(ctx, grid, Kind::OpModO))],
        Scope::Thm11 => vec![
            timed(|| relrank_t_row(ctx, grid)),
            timed(|| generation_t_row(ctx, grid)),
            timed(|| necessity_t_row(ctx, grid)),
        ],
        Scope::Thm12 => vec![timed(|| equivalence_row(ctx, grid, Kind::TModOp))],
        Scope::LemmaEta => vec![timed(|| eta_row(ctx, grid))],
        Scope::Prop2 => vec![
            timed(|| generation_op_row(ctx, grid)),
            timed(|| factor_op_row(ctx, grid)),
        ],
        Scope::Lemma7 => vec![timed(|| factor_t_row(ctx, grid))],
        Scope::Counts => Vec::new(),
    }
}

fn relrank_op_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Thm5, ctx, "relrank-op-o", Method::Search);
    let formula = match relrank_op_mod_o(ctx) {
        Ok(v) => v,
        Err(_) => return row.skipped(OUT_OF_SCOPE),
    };
    if ctx.n() > grid.search_op_n_max {
        let mut row = row.skipped(format!("search limited to n <= {}", grid.search_op_n_max));
        row.formula_value = Some(formula);
        return row;
    }
    let result = (|| {
        let op = enumerate_op(ctx, &grid.budget)?;
        let o = enumerate_o(ctx, &grid.budget)?;
        let filter = if proper(ctx) {
            NecessityFilter::op_mod_o(ctx)
        } else {
            NecessityFilter::none()
        };
        brute_min_relrank(
            &op,
            &o,
            &op.difference(&o),
            formula as usize,
            &filter,
            &grid.budget,
        )
    })();
    match result {
        Ok(r) => row.compare(formula, r.rank as u64),
        Err(Error::NoWitnessWithinBound(b)) => {
            let mut row = row.verdict(false, format!("no relative generating set of size <= {b}"));
            row.formula_value = Some(formula);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn relrank_t_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Thm11, ctx, "relrank-t-op", Method::Search);
    let formula = match relrank_t_mod_op(ctx) {
        Ok(v) => v,
        Err(_) => return row.skipped(OUT_OF_SCOPE),
    };
    if ctx.n() > grid.search_t_n_max {
        let mut row = row.skipped(format!("search limited to n <= {}", grid.search_t_n_max));
        row.formula_value = Some(formula);
        return row;
    }
    let result = (|| {
        let t = enumerate_t(ctx, &grid.budget)?;
        let op = enumerate_op(ctx, &grid.budget)?;
        let filter = if ctx.m() >= 2 {
            NecessityFilter::t_mod_op(ctx)
        } else {
            NecessityFilter::none()
        };
        brute_min_relrank(
            &t,
            &op,
            &t.difference(&op),
            formula as usize,
            &filter,
            &grid.budget,
        )
    })();
    match result {
        Ok(r) => row.compare(formula, r.rank as u64),
        Err(Error::NoWitnessWithinBound(b)) => {
            let mut row = row.verdict(false, format!("no relative generating set of size <= {b}"));
            row.formula_value = Some(formula);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn generation_t_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Thm11, ctx, "generation-t-op", Method::Closure);
    let formula = match relrank_t_mod_op(ctx) {
        Ok(v) => v,
        Err(_) => return row.skipped(OUT_OF_SCOPE),
    };
    let result = (|| {
        let t = enumerate_t(ctx, &grid.budget)?;
        let op = enumerate_op(ctx, &grid.budget)?;
        let (b, designation) = canonical_b_t_mod_op(ctx)?;
        let mut gens = op.to_vec();
        gens.extend(b.to_vec());
        let verdict = closure(&gens, Some(&t), &grid.budget)?.verdict;
        Ok::<_, Error>((b.len() as u64, verdict == Some(Verdict::Equal), designation))
    })();
    match result {
        Ok((size, equal, designation)) => {
            let mut row = row.compare(formula, size);
            if !equal {
                row = row.verdict(false, "closure of OP with the canonical set is not T");
            } else {
                row.note = format!("designated element: {designation}");
            }
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn necessity_op_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Thm5, ctx, "necessity-op-o", Method::Enumeration);
    if !proper(ctx) {
        return row.skipped("needs 1 < m < n");
    }
    if ctx.n() > grid.necessity_n_max {
        return row.skipped(format!("audit limited to n <= {}", grid.necessity_n_max));
    }
    let result = (|| {
        let op = enumerate_op(ctx, &grid.budget)?;
        let o = enumerate_o(ctx, &grid.budget)?;
        let bound = relrank_op_mod_o(ctx)? as usize + 1;
        let found = relative_generating_subsets(&op, &o, &op.difference(&o), bound, &grid.budget)?;
        let required: Vec<Partition> = enumerate_p(ctx.n(), ctx.m())?.collect();
        let bad = found.iter().find(|b| !covers(b, &required)).cloned();
        Ok::<_, Error>((found.len(), bad))
    })();
    match result {
        Ok((count, bad)) => {
            let mut row = row.verdict(
                bad.is_none(),
                match bad {
                    None => format!(
                        "{count} generating sets of size <= rank + 1 all carry every P_m kernel"
                    ),
                    Some(b) => format!(
                        "generating set missing a P_m kernel: {}",
                        b.iter().join(" ")
                    ),
                },
            );
            row.brute_value = Some(count as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn necessity_t_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Thm11, ctx, "necessity-t-op", Method::Enumeration);
    if !proper(ctx) {
        return row.skipped("needs 1 < m < n");
    }
    if ctx.n() > grid.necessity_n_max {
        return row.skipped(format!("audit limited to n <= {}", grid.necessity_n_max));
    }
    let result = (|| {
        let t = enumerate_t(ctx, &grid.budget)?;
        let op = enumerate_op(ctx, &grid.budget)?;
        let bound = relrank_t_mod_op(ctx)? as usize + 1;
        let found = relative_generating_subsets(&t, &op, &t.difference(&op), bound, &grid.budget)?;
        let required: Vec<Partition> = enumerate_r(ctx.n(), ctx.m()).collect();
        let eta = build_eta(ctx).restrict_to_y();
        let mut bad = None;
        for b in &found {
            let mut gens: Vec<YMap> = b.iter().map(Transformation::restrict_to_y).collect();
            gens.push(eta.clone());
            if !covers(b, &required) {
                bad = Some(format!(
                    "generating set missing an R_m kernel: {}",
                    b.iter().join(" ")
                ));
                break;
            }
            if !generates_symmetric_group(ctx, &gens)? {
                bad = Some(format!(
                    "generating set without S(Y): {}",
                    b.iter().join(" ")
                ));
                break;
            }
        }
        Ok::<_, Error>((found.len(), bad))
    })();
    match result {
        Ok((count, bad)) => {
            let ok = bad.is_none();
            let mut row = row.verdict(
                ok,
                bad.unwrap_or_else(|| {
                    format!("{count} generating sets of size <= rank + 1 carry every R_m kernel and generate S(Y)")
                }),
            );
            row.brute_value = Some(count as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn covers(b: &[Transformation], required: &[Partition]) -> bool {
    let kernels: Vec<Partition> = b.iter().map(Transformation::kernel).collect();
    required.iter().all(|p| kernels.contains(p))
}

fn generation_op_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Prop2, ctx, "generation-op-o", Method::Closure);
    if !proper(ctx) {
        return row.skipped("needs 1 < m < n");
    }
    let result = (|| {
        let op = enumerate_op(ctx, &grid.budget)?;
        let o = enumerate_o(ctx, &grid.budget)?;
        let mut gens = o.to_vec();
        gens.extend(canonical_a(ctx)?.to_vec());
        Ok::<_, Error>((op.len(), closure(&gens, Some(&op), &grid.budget)?.verdict))
    })();
    match result {
        Ok((size, verdict)) => {
            let mut row = row.verdict(
                verdict == Some(Verdict::Equal),
                format!("|OP(X,Y)| = {size}"),
            );
            row.brute_value = Some(size as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn factor_op_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Prop2, ctx, "factor-op-o", Method::Factorization);
    if !proper(ctx) {
        return row.skipped("needs 1 < m < n");
    }
    let result = (|| {
        let op = enumerate_op(ctx, &grid.budget)?;
        let a = canonical_a(ctx)?;
        for beta in op.iter() {
            if let Some(problem) = audit_op_word(&beta, &a)? {
                return Ok((op.len(), Some(problem)));
            }
        }
        Ok::<_, Error>((op.len(), None))
    })();
    match result {
        Ok((size, problem)) => {
            let ok = problem.is_none();
            let mut row = row.verdict(
                ok,
                problem.unwrap_or_else(|| format!("{size} words certified")),
            );
            row.brute_value = Some(size as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

/// `None` when the word for `beta` multiplies out and every tag is truthful.
pub fn audit_op_word(beta: &Transformation, a: &GeneratingSet) -> Result<Option<String>> {
    let m = beta.ctx().m();
    let word = factor_op_over_o(beta)?;
    if word.product().as_ref() != Some(beta) {
        return Ok(Some(format!("{beta}: product mismatch for {word}")));
    }
    for f in word.factors() {
        let ok = match f.tag {
            FactorTag::BaseO => f.map.is_order_preserving(),
            FactorTag::GeneratorA => a.contains(&f.map),
            FactorTag::EtaPower(k) => (1..=m).contains(&k) && a.contains(&f.map),
            FactorTag::BaseOp | FactorTag::GeneratorB => false,
        };
        if !ok {
            return Ok(Some(format!("{beta}: bad factor {f} in {word}")));
        }
    }
    Ok(None)
}

/// `None` when the word for `gamma` multiplies out and every tag is truthful.
pub fn audit_t_word(gamma: &Transformation, b: &GeneratingSet) -> Result<Option<String>> {
    let word = factor_t_over_op(gamma, b)?;
    if word.product().as_ref() != Some(gamma) {
        return Ok(Some(format!("{gamma}: product mismatch for {word}")));
    }
    for f in word.factors() {
        let ok = match f.tag {
            FactorTag::BaseO => f.map.is_order_preserving(),
            FactorTag::BaseOp => f.map.is_orientation_preserving(),
            FactorTag::GeneratorB => b.contains(&f.map),
            FactorTag::EtaPower(_) => f.map == build_eta(gamma.ctx()),
            FactorTag::GeneratorA => false,
        };
        if !ok {
            return Ok(Some(format!("{gamma}: bad factor {f} in {word}")));
        }
    }
    Ok(None)
}

fn factor_t_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(Scope::Lemma7, ctx, "factor-t-op", Method::Factorization);
    if ctx.m() >= ctx.n() {
        return row.skipped(OUT_OF_SCOPE);
    }
    if ctx.n() > grid.factor_t_n_max {
        return row.skipped(format!(
            "factorization sweep limited to n <= {}",
            grid.factor_t_n_max
        ));
    }
    let result = (|| {
        let t = enumerate_t(ctx, &grid.budget)?;
        let (b, _) = canonical_b_t_mod_op(ctx)?;
        for gamma in t.iter() {
            if let Some(problem) = audit_t_word(&gamma, &b)? {
                return Ok((t.len(), Some(problem)));
            }
        }
        Ok::<_, Error>((t.len(), None))
    })();
    match result {
        Ok((size, problem)) => {
            let ok = problem.is_none();
            let mut row = row.verdict(
                ok,
                problem.unwrap_or_else(|| format!("{size} words certified")),
            );
            row.brute_value = Some(size as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

fn eta_row(ctx: &Arc<ChainContext>, grid: &Grid) -> Row {
    let row = Row::new(
        Scope::LemmaEta,
        ctx,
        "eta-restrictions",
        Method::Enumeration,
    );
    let result = (|| {
        let op = enumerate_op(ctx, &grid.budget)?;
        let cyclic = crate::closure::ymap_monoid_closure(ctx, &[build_eta(ctx).restrict_to_y()])?;
        let restricted: Vec<YMap> = op
            .iter()
            .map(|b| b.restrict_to_y())
            .filter(YMap::is_permutation)
            .sorted()
            .dedup()
            .collect();
        Ok::<_, Error>((cyclic, restricted))
    })();
    match result {
        Ok((cyclic, restricted)) => {
            let mut row = row.verdict(
                cyclic == restricted,
                format!(
                    "|<eta|_Y>| = {}, permutations among restrictions: {}",
                    cyclic.len(),
                    restricted.len()
                ),
            );
            row.formula_value = Some(ctx.m() as u64);
            row.brute_value = Some(restricted.len() as u64);
            if row.formula_value != row.brute_value {
                row.status = Status::Fail;
            }
            row
        }
        Err(e) => row.on_error(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    OpModO,
    TModOp,
}

/// Outcome of comparing a minimality criterion with direct minimality.
#[derive(Debug, Clone, Default)]
pub struct Equivalence {
    /// Candidate sets compared.
    pub tested: usize,
    /// Sets found minimal by direct computation.
    pub minimal: usize,
    /// Sets on which the criterion and direct minimality disagree.
    pub disagreements: Vec<String>,
    /// Minimal sets on which the minimum-size condition on `B̃` disagrees
    /// with `|B| = rank`.
    pub size_disagreements: Vec<String>,
}

/// The largest `s` with `Σ_{i<=s} C(p, i) <= cap`.
fn max_subset_size(pool: usize, cap: usize) -> usize {
    let mut total = 0u64;
    for s in 0..=pool {
        total += binomial(pool as u64, s as u64).unwrap_or(u64::MAX);
        if total > cap as u64 {
            return s.saturating_sub(1);
        }
    }
    pool
}

/// Compares the `OP:O` criterion with direct minimality on every subset of the
/// rank-`m` elements of `OP(X,Y)` up to the size that keeps the family within
/// `cap` sets.
pub fn op_mod_o_equivalence(
    ctx: &Arc<ChainContext>,
    cap: usize,
    budget: &Budget,
) -> Result<Equivalence> {
    let op = enumerate_op(ctx, budget)?;
    let o = enumerate_o(ctx, budget)?;
    let pool: Vec<Transformation> = op.iter().filter(|t| t.rank() == ctx.m()).collect();
    let rank = relrank_op_mod_o(ctx)? as usize;
    let tilde_size = usize::from(ctx.contains_both_ends());
    equivalence(ctx, &op, &o, &pool, cap, |b| {
        let r = check_min_relgen_op_mod_o(ctx, b)?;
        Ok((r.verdict, r.tilde.len(), rank, tilde_size))
    })
}

/// Compares the `T:OP` criterion with direct minimality on every subset of the
/// rank-`m` elements of `T(X,Y)` up to the size that keeps the family within
/// `cap` sets.
pub fn t_mod_op_equivalence(
    ctx: &Arc<ChainContext>,
    cap: usize,
    budget: &Budget,
) -> Result<Equivalence> {
    let t = enumerate_t(ctx, budget)?;
    let op = enumerate_op(ctx, budget)?;
    let pool: Vec<Transformation> = t.iter().filter(|t| t.rank() == ctx.m()).collect();
    let rank = relrank_t_mod_op(ctx)? as usize;
    equivalence(ctx, &t, &op, &pool, cap, |b| {
        let r = check_min_relgen_t_mod_op(ctx, b)?;
        Ok((r.verdict, r.tilde.len(), rank, 0))
    })
}

fn equivalence(
    ctx: &Arc<ChainContext>,
    target: &SemigroupSet,
    base: &SemigroupSet,
    pool: &[Transformation],
    cap: usize,
    criterion: impl Fn(&GeneratingSet) -> Result<(bool, usize, usize, usize)> + Sync,
) -> Result<Equivalence> {
    let oracle = GenerationOracle::new(target, base)?;
    let max_size = max_subset_size(pool.len(), cap);
    let subsets: Vec<Vec<usize>> = (0..=max_size)
        .flat_map(|s| (0..pool.len()).combinations(s))
        .collect();
    // (directly minimal, criterion mismatch, size-condition mismatch)
    type Outcome = (bool, Option<String>, Option<String>);
    let outcomes: Vec<Result<Outcome>> = subsets
        .par_iter()
        .map(|idx| {
            let maps: Vec<Transformation> = idx.iter().map(|&i| pool[i].clone()).collect();
            let direct = minimal_with(&oracle, &maps)?;
            let set = GeneratingSet::from_maps(ctx, maps.iter().cloned())?;
            let (verdict, tilde, rank, tilde_at_min) = criterion(&set)?;
            let describe = || maps.iter().join(" ");
            let mismatch = (direct != verdict)
                .then(|| format!("{{{}}}: direct {direct}, criterion {verdict}", describe()));
            let size = (direct && ((maps.len() == rank) != (tilde == tilde_at_min)))
                .then(|| format!("{{{}}}: |B| = {}, |B~| = {tilde}", describe(), maps.len()));
            Ok((direct, mismatch, size))
        })
        .collect();
    let mut out = Equivalence {
        tested: subsets.len(),
        ..Equivalence::default()
    };
    for o in outcomes {
        let (direct, mismatch, size) = o?;
        out.minimal += usize::from(direct);
        out.disagreements.extend(mismatch);
        out.size_disagreements.extend(size);
    }
    Ok(out)
}

fn equivalence_row(ctx: &Arc<ChainContext>, grid: &Grid, kind: Kind) -> Row {
    let (scope, check) = match kind {
        Kind::OpModO => (Scope::Thm6, "minimal-op-o"),
        Kind::TModOp => (Scope::Thm12, "minimal-t-op"),
    };
    let row = Row::new(scope, ctx, check, Method::Equivalence);
    if !proper(ctx) {
        return row.skipped("needs 1 < m < n");
    }
    if ctx.n() > grid.equivalence_n_max {
        return row.skipped(format!(
            "minimality comparison limited to n <= {}",
            grid.equivalence_n_max
        ));
    }
    let cap = if ctx.n() <= 4 {
        grid.equivalence_cap
    } else {
        grid.equivalence_cap / 10
    };
    let result = match kind {
        Kind::OpModO => op_mod_o_equivalence(ctx, cap, &grid.budget),
        Kind::TModOp => t_mod_op_equivalence(ctx, cap, &grid.budget),
    };
    match result {
        Ok(eq) => {
            let ok = eq.disagreements.is_empty() && eq.size_disagreements.is_empty();
            let note = if ok {
                format!(
                    "{} sets compared, {} minimal, all agree",
                    eq.tested, eq.minimal
                )
            } else {
                eq.disagreements
                    .first()
                    .or(eq.size_disagreements.first())
                    .cloned()
                    .unwrap_or_default()
            };
            let mut row = row.verdict(ok, note);
            row.brute_value = Some(eq.tested as u64);
            row
        }
        Err(e) => row.on_error(e),
    }
}

/// `|R_2| = S(n,2) - C(n,2)` and is positive for `n >= 4`, although the
/// `m = 2` step of the published argument for the `T:OP` rank formula treats
/// `R_2` as empty. The formula itself is unaffected.
pub fn erratum_row(n: usize) -> Row {
    let start = Instant::now();
    let count = enumerate_r(n, 2).count() as u64;
    let formula = stirling2(n as u64, 2).and_then(|s| Ok(s - binomial(n as u64, 2)?));
    let mut row = Row {
        scope: Scope::Thm11,
        n,
        m: 2,
        y: Vec::new(),
        check: "erratum-r2",
        method: Method::Enumeration,
        formula_value: formula.as_ref().ok().copied(),
        brute_value: Some(count),
        universe_size: None,
        millis: 0,
        status: Status::Pass,
        note: String::new(),
    };
    let ok = formula.is_ok_and(|f| f == count) && count >= 1;
    row = row.verdict(
        ok,
        format!(
            "erratum: the m = 2 case of the proof treats R_2 as empty, but |R_2| = {count} = S({n},2) - C({n},2) here"
        ),
    );
    row.millis = start.elapsed().as_millis() as u64;
    row
}

fn count_rows(grid: &Grid) -> Vec<Row> {
    let mut rows = Vec::new();
    for n in 1..=grid.counts_n_max {
        let ctx = ChainContext::new(n, &[1]).expect("valid");
        for l in 1..=n {
            rows.extend(count_rows_for(n, l, &ctx));
        }
    }
    rows
}

fn count_rows_for(n: usize, l: usize, ctx: &ChainContext) -> Vec<Row> {
    let (nu, lu) = (n as u64, l as u64);
    let mut rows = Vec::new();
    let mut push = |check: &'static str, formula: Result<u64>, count: u64, note: Option<&str>| {
        let start = Instant::now();
        let mut row = Row::new(Scope::Counts, ctx, check, Method::Enumeration);
        row.m = l;
        row.y = Vec::new();
        row.universe_size = None;
        row = match (note, formula) {
            (Some(note), _) => {
                let mut r = row.skipped(note);
                r.brute_value = Some(count);
                r
            }
            (None, Ok(f)) => row.compare(f, count),
            (None, Err(e)) => row.on_error(e),
        };
        row.millis = start.elapsed().as_millis() as u64;
        rows.push(row);
    };
    let small = (l < 2).then_some("the identity is stated for l >= 2; P_1 is empty by convention");
    push(
        "count-q",
        binomial(nu - 1, lu - 1),
        enumerate_q(n, l).count() as u64,
        None,
    );
    let p_count = enumerate_p(n, l).map(|it| it.count() as u64).unwrap_or(0);
    push("count-p", binomial(nu - 1, lu), p_count, small);
    push(
        "count-all",
        stirling2(nu, lu),
        enumerate_all(n, l).count() as u64,
        None,
    );
    let r_formula = stirling2(nu, lu).and_then(|s| Ok(s.saturating_sub(binomial(nu, lu)?)));
    push(
        "count-r",
        r_formula,
        enumerate_r(n, l).count() as u64,
        small,
    );
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_max: usize) -> Grid {
        Grid::new(n_max)
    }

    #[test]
    fn scope_names_round_trip() {
        for s in Scope::ALL {
            assert_eq!(s.name().parse::<Scope>().unwrap(), s);
        }
        assert_eq!(Scope::parse_list("all").unwrap().len(), 8);
        assert!("thm7".parse::<Scope>().is_err());
    }

    #[test]
    fn y_filters() {
        let mut g = grid(4);
        g.y = YFilter::parse_contains("1,n").unwrap();
        assert!(g.contexts().iter().all(|c| c.contains_both_ends()));
        g.y = YFilter::Exact(vec![2, 3]);
        assert_eq!(g.contexts().len(), 2);
    }

    #[test]
    fn thm5_row_example() {
        let c = ChainContext::new(5, &[2, 4]).unwrap();
        let row = relrank_op_row(&c, &grid(5));
        assert_eq!(row.status, Status::Pass, "{row}");
        assert_eq!(row.formula_value, Some(6));
        assert_eq!(row.brute_value, Some(6));
    }

    #[test]
    fn thm11_row_example() {
        let c = ChainContext::new(4, &[2, 3]).unwrap();
        let row = relrank_t_row(&c, &grid(4));
        assert_eq!((row.formula_value, row.brute_value), (Some(1), Some(1)));
        let full = ChainContext::new(3, &[1, 2, 3]).unwrap();
        assert_eq!(relrank_t_row(&full, &grid(4)).status, Status::Skipped);
    }

    #[test]
    fn erratum_rows() {
        let row = erratum_row(4);
        assert_eq!(row.status, Status::Pass);
        assert_eq!(row.brute_value, Some(1));
        assert_eq!(erratum_row(6).brute_value, Some(16));
        assert!(row.note.contains("erratum"));
    }

    #[test]
    fn count_rows_pass() {
        let mut g = grid(6);
        g.counts_n_max = 6;
        let rows = count_rows(&g);
        assert!(
            rows.iter().all(|r| r.status != Status::Fail),
            "{:#?}",
            rows.iter().find(|r| r.status == Status::Fail)
        );
    }

    #[test]
    fn small_run_all_pass() {
        let report = run(&Scope::ALL, &grid(4));
        let failed: Vec<String> = report
            .rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.to_string())
            .collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }

    #[test]
    fn row_json_shape() {
        let row = erratum_row(4);
        let v = serde_json::to_value(&row).unwrap();
        assert_eq!(v["status"], "PASS");
        assert_eq!(v["scope"], "thm11");
        assert_eq!(v["method"], "enumeration");
    }
}
