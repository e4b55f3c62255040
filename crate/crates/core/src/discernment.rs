//! Discernibility relations, their evaluation on assembly states, the
//! weak-discernment classifier and the physicality audit.
//!
//! A relation is evaluated on every ordered pair of particle labels (factor
//! indices, starting at 0). The resulting truth table weakly discerns two
//! particles when the pair relation and the two reflexive instances disagree:
//! either `R(x,y) ∧ R(y,x) ∧ ¬R(x,x) ∧ ¬R(y,y)` or the dual pattern with the
//! diagonal true and the off-diagonal false.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c, commutator, eigen_residual, embed_single, expectation, AssemblyState, Matrix, Operator, StateKind, Tolerance,
};
use crate::observables::{
    lattice_momentum, lattice_position, pair_difference_squared, pij_blocks, pij_sum_operator, total_spin_squared,
    variance_operator, LatticeConfig, ProjectorFamily, SpinConfig,
};
use crate::symmetry::{is_permutation_invariant, projector, Sector};

/// Default threshold for the lattice commutator relation, in units of ħ.
pub const DEFAULT_C_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    Rt,
    C,
    T,
    Tprime,
    R,
    Rprime,
    Dprime,
    DprimeP,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::Rt,
        RelationKind::C,
        RelationKind::T,
        RelationKind::Tprime,
        RelationKind::R,
        RelationKind::Rprime,
        RelationKind::Dprime,
        RelationKind::DprimeP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Rt => "Rt",
            RelationKind::C => "C",
            RelationKind::T => "T",
            RelationKind::Tprime => "Tprime",
            RelationKind::R => "R",
            RelationKind::Rprime => "Rprime",
            RelationKind::Dprime => "Dprime",
            RelationKind::DprimeP => "DprimeP",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            RelationKind::Rt | RelationKind::C | RelationKind::T | RelationKind::R => Mode::Categorical,
            _ => Mode::Probabilistic,
        }
    }

    pub fn postulate(self) -> Postulate {
        match self.mode() {
            Mode::Categorical => Postulate::StrongProperty,
            Mode::Probabilistic => Postulate::BornRule,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.replace(['\'', '′'], "prime").chars().filter(|c| !matches!(c, '_' | '-')).collect();
        match norm.to_ascii_lowercase().as_str() {
            "rt" => Ok(RelationKind::Rt),
            "c" => Ok(RelationKind::C),
            "t" => Ok(RelationKind::T),
            "tprime" => Ok(RelationKind::Tprime),
            "r" => Ok(RelationKind::R),
            "rprime" => Ok(RelationKind::Rprime),
            "dprime" | "d" => Ok(RelationKind::Dprime),
            "dprimep" | "dprimemomentum" | "dp" => Ok(RelationKind::DprimeP),
            _ => Err(Error::Parse(format!("unknown relation `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Categorical,
    Probabilistic,
}

/// Interpretive assumption a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Postulate {
    StrongProperty,
    BornRule,
}

/// Named single-particle quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub operator: Operator,
}

impl Quantity {
    pub fn new(name: impl Into<String>, operator: Operator) -> Result<Self> {
        if operator.n_factors() != 1 {
            return Err(Error::Shape("a quantity acts on a single particle".into()));
        }
        if !operator.is_hermitian(1e-10 * operator.max_abs_entry().max(1.0)) {
            return Err(Error::Contract(format!("quantity `{}` is not hermitian", name.into())));
        }
        Ok(Self { name: name.into(), operator })
    }

    pub fn position(cfg: LatticeConfig) -> Result<Self> {
        Self::new("Q", lattice_position(cfg)?)
    }

    pub fn momentum(cfg: LatticeConfig) -> Result<Self> {
        Self::new("P", lattice_momentum(cfg)?)
    }
}

/// A discernibility relation with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Relation {
    /// Eigenvalue `t` of the projector-difference sum.
    Rt { family: ProjectorFamily, t: f64 },
    /// Same-particle position/momentum commutator, thresholded on the lattice.
    C { lattice: LatticeConfig, threshold: f64 },
    /// Modal total-spin relation.
    T { spin: SpinConfig },
    /// Born-rule total-spin relation.
    Tprime { spin: SpinConfig },
    /// Non-vanishing pair variance, eigenstate form.
    R { quantity: Quantity },
    /// Non-vanishing pair variance, expectation form.
    Rprime { quantity: Quantity },
    /// N-particle position variance minus the pair-excluded sum.
    Dprime { lattice: LatticeConfig, particles: usize },
    /// Momentum analogue of [`Relation::Dprime`].
    DprimeP { lattice: LatticeConfig, particles: usize },
}

impl Relation {
    pub fn kind(&self) -> RelationKind {
        match self {
            Relation::Rt { .. } => RelationKind::Rt,
            Relation::C { .. } => RelationKind::C,
            Relation::T { .. } => RelationKind::T,
            Relation::Tprime { .. } => RelationKind::Tprime,
            Relation::R { .. } => RelationKind::R,
            Relation::Rprime { .. } => RelationKind::Rprime,
            Relation::Dprime { .. } => RelationKind::Dprime,
            Relation::DprimeP { .. } => RelationKind::DprimeP,
        }
    }

    /// Human-readable label, e.g. `R(Q)` or `Rt(t=-2)`.
    pub fn label(&self) -> String {
        match self {
            Relation::Rt { t, .. } => format!("Rt(t={t})"),
            Relation::R { quantity } => format!("R({})", quantity.name),
            Relation::Rprime { quantity } => format!("Rprime({})", quantity.name),
            other => other.kind().name().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationSpec {
    pub relation: Relation,
    pub tol: Tolerance,
}

impl RelationSpec {
    pub fn new(relation: Relation, tol: Tolerance) -> Result<Self> {
        match &relation {
            Relation::T { spin } | Relation::Tprime { spin } => {
                if spin.twice_s == 0 {
                    return Err(Error::DegenerateSpin);
                }
            }
            Relation::C { lattice, threshold } => {
                lattice.validated()?;
                if !(threshold.is_finite() && *threshold > 0.0) {
                    return Err(Error::Contract(format!("commutator threshold must be positive, got {threshold}")));
                }
            }
            Relation::Dprime { lattice, particles } | Relation::DprimeP { lattice, particles } => {
                lattice.validated()?;
                if *particles < 2 {
                    return Err(Error::Contract("D′ needs at least two particles".into()));
                }
            }
            Relation::Rt { t, .. } => {
                if !t.is_finite() {
                    return Err(Error::Contract("t must be finite".into()));
                }
            }
            Relation::R { .. } | Relation::Rprime { .. } => {}
        }
        Ok(Self { relation, tol })
    }

    pub fn with_default_tol(relation: Relation) -> Result<Self> {
        Self::new(relation, Tolerance::default())
    }

    pub fn kind(&self) -> RelationKind {
        self.relation.kind()
    }

    pub fn mode(&self) -> Mode {
        self.kind().mode()
    }

    pub fn postulate(&self) -> Postulate {
        self.kind().postulate()
    }

    /// Whether the relation is a finite-lattice stand-in for a continuum one.
    pub fn lattice_analogue(&self) -> bool {
        matches!(self.relation, Relation::C { .. })
    }
}

/// Outcome of evaluating a relation on one ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub holds: bool,
    pub witness: f64,
}

/// Truth values indexed by ordered particle pair, `entries[x][y]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    pub entries: Vec<Vec<bool>>,
}

impl TruthTable {
    pub fn new(entries: Vec<Vec<bool>>) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("truth table must be square".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        Self { entries: (0..n).map(|x| (0..n).map(|y| f(x, y)).collect()).collect() }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.entries[x][y]
    }

    /// Pairs `x < y` that exhibit the weak-discernment pattern.
    pub fn discerned_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                let off = self.get(x, y) && self.get(y, x);
                let off_false = !self.get(x, y) && !self.get(y, x);
                let diag = self.get(x, x) && self.get(y, y);
                let diag_false = !self.get(x, x) && !self.get(y, y);
                if (off && diag_false) || (off_false && diag) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    WeaklyDiscerned,
    NotDiscerned,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::WeaklyDiscerned => "weakly-discerned",
            Verdict::NotDiscerned => "not-discerned",
        })
    }
}

pub fn classify(table: &TruthTable) -> Verdict {
    if table.discerned_pairs().is_empty() {
        Verdict::NotDiscerned
    } else {
        Verdict::WeaklyDiscerned
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockRole {
    /// An operator the definition is built from.
    Constituent,
    /// An operator the defining condition is evaluated against.
    Assembled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildingBlock {
    pub description: String,
    pub role: BlockRole,
    pub permutation_invariant: bool,
    pub proportional_to_identity: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Physicality {
    Physical,
    UnphysicalBuildingBlocks,
    TrivialMultipleOfIdentity,
}

impl fmt::Display for Physicality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Physicality::Physical => "physical",
            Physicality::UnphysicalBuildingBlocks => "unphysical-building-blocks",
            Physicality::TrivialMultipleOfIdentity => "trivial-multiple-of-identity",
        })
    }
}

/// Permutation-invariance audit of the operators a relation is defined from.
///
/// `findings` is `[Physical]` when every block is invariant and the assembled
/// operators are not all multiples of the identity on `sector`; otherwise it
/// lists the applicable defects. The triviality finding annotates; callers
/// decide whether it disqualifies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityAudit {
    pub relation: RelationKind,
    pub sector: Sector,
    pub building_blocks: Vec<BuildingBlock>,
    pub findings: Vec<Physicality>,
}

impl PhysicalityAudit {
    fn from_blocks(relation: RelationKind, sector: Sector, building_blocks: Vec<BuildingBlock>) -> Self {
        let mut findings = Vec::new();
        if building_blocks.iter().any(|b| !b.permutation_invariant) {
            findings.push(Physicality::UnphysicalBuildingBlocks);
        }
        let mut assembled = building_blocks.iter().filter(|b| b.role == BlockRole::Assembled).peekable();
        if assembled.peek().is_some() && assembled.all(|b| b.proportional_to_identity) {
            findings.push(Physicality::TrivialMultipleOfIdentity);
        }
        if findings.is_empty() {
            findings.push(Physicality::Physical);
        }
        Self { relation, sector, building_blocks, findings }
    }

    pub fn is_physical(&self) -> bool {
        self.findings == [Physicality::Physical]
    }

    pub fn is_trivial(&self) -> bool {
        self.findings.contains(&Physicality::TrivialMultipleOfIdentity)
    }

    /// Primary classification; unphysical building blocks take precedence.
    pub fn overall(&self) -> Physicality {
        self.findings[0]
    }
}

/// `Some(c)` when `O` acts as `c·1` on the given sector.
pub fn sector_multiple_of_identity(o: &Operator, sector: Sector, tol: f64) -> Result<Option<f64>> {
    if sector == Sector::Full {
        return Ok(o.proportional_to_identity(tol).filter(|c0| c0.im.abs() <= tol).map(|c0| c0.re));
    }
    let d = o
        .homogeneous_dim()
        .ok_or_else(|| Error::Contract("sector restriction needs equal factor dimensions".into()))?;
    let proj = projector(d, o.n_factors(), sector)?;
    if proj.empty {
        return Ok(None);
    }
    let pi = proj.operator.matrix();
    let o_pi = o.matrix() * pi;
    let c0 = o_pi.trace() / pi.trace();
    if c0.im.abs() > tol {
        return Ok(None);
    }
    let dev = crate::hilbert::max_abs_diff(&o_pi, &(pi * c0));
    Ok((dev <= tol).then_some(c0.re))
}

fn block(description: String, role: BlockRole, o: &Operator, sector: Sector, tol: Tolerance) -> Result<BuildingBlock> {
    let scale = o.max_abs_entry().max(1.0);
    Ok(BuildingBlock {
        description,
        role,
        permutation_invariant: is_permutation_invariant(o, tol),
        proportional_to_identity: sector_multiple_of_identity(o, sector, tol.bound(scale))?.is_some(),
    })
}

/// Sector on which a relation's assembled operators are judged for triviality.
pub fn audit_sector(kind: RelationKind) -> Sector {
    match kind {
        RelationKind::Rt => Sector::Antisymmetric,
        _ => Sector::Full,
    }
}

/// Enumerates the operators the relation's definition refers to and tests
/// each for permutation invariance and for being a multiple of the identity.
pub fn physicality_audit(spec: &RelationSpec) -> Result<PhysicalityAudit> {
    audit_with(spec, None)
}

/// `prebuilt` supplies the single assembled operator of R/R′/D′ kinds.
fn audit_with(spec: &RelationSpec, prebuilt: Option<&Operator>) -> Result<PhysicalityAudit> {
    let kind = spec.kind();
    let sector = audit_sector(kind);
    let tol = spec.tol;
    let mut blocks = Vec::new();
    match &spec.relation {
        Relation::Rt { family, .. } => {
            for slot in 0..2 {
                for ((i, j), p) in pij_blocks(family, slot)? {
                    if i != j {
                        blocks.push(block(format!("P({slot})[{i},{j}] = (E{i} - E{j}) on particle {slot}"), BlockRole::Constituent, &p, sector, tol)?);
                    }
                }
            }
            for x in 0..2 {
                for y in 0..2 {
                    let sum = pij_sum_operator(family, x, y)?;
                    blocks.push(block(format!("sum_ij P({x})[i,j] P({y})[i,j]"), BlockRole::Assembled, &sum, sector, tol)?);
                }
            }
        }
        Relation::C { lattice, .. } => {
            let q = lattice_position(*lattice)?;
            let p = lattice_momentum(*lattice)?;
            for slot in 0..2 {
                blocks.push(block(format!("Q({slot})"), BlockRole::Constituent, &embed_single(&q, slot, 2)?, sector, tol)?);
                blocks.push(block(format!("P({slot})"), BlockRole::Constituent, &embed_single(&p, slot, 2)?, sector, tol)?);
            }
            for x in 0..2 {
                for y in 0..2 {
                    let comm = commutator(&embed_single(&p, x, 2)?, &embed_single(&q, y, 2)?)?;
                    blocks.push(block(format!("[P({x}), Q({y})]"), BlockRole::Assembled, &comm, sector, tol)?);
                }
            }
        }
        Relation::T { spin } | Relation::Tprime { spin } => {
            for x in 0..2 {
                for y in 0..2 {
                    let op = total_spin_squared(*spin, x, y)?;
                    blocks.push(block(format!("|S({x}) + S({y})|^2"), BlockRole::Assembled, &op, sector, tol)?);
                }
            }
        }
        Relation::R { quantity } | Relation::Rprime { quantity } => {
            let op = match prebuilt {
                Some(op) => op.clone(),
                None => pair_difference_squared(&quantity.operator, 0, 1, 2)?.scale(0.25),
            };
            blocks.push(block(format!("(1/4)({0}(0) - {0}(1))^2", quantity.name), BlockRole::Assembled, &op, sector, tol)?);
        }
        Relation::Dprime { lattice, particles } | Relation::DprimeP { lattice, particles } => {
            let name = if kind == RelationKind::Dprime { "Q" } else { "P" };
            let op = match prebuilt {
                Some(op) => op.clone(),
                None => variance_operator(&d_quantity(kind, *lattice)?, *particles)?,
            };
            blocks.push(block(format!("(Delta^({particles})_{name})^2"), BlockRole::Assembled, &op, sector, tol)?);
        }
    }
    Ok(PhysicalityAudit::from_blocks(kind, sector, blocks))
}

/// Full evaluation of a relation on one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscernmentReport {
    pub relation: RelationKind,
    pub label: String,
    pub lattice_analogue: bool,
    pub particles: usize,
    pub truth_table: TruthTable,
    pub witnesses: Vec<Vec<f64>>,
    pub verdict: Verdict,
    pub mode: Mode,
    pub postulate: Postulate,
    pub tolerance: Tolerance,
    pub audit: PhysicalityAudit,
}

enum Prepared {
    Rt { sums: Vec<Vec<Operator>>, t: f64 },
    C { commutators: Vec<Vec<Operator>>, threshold: f64 },
    T { deviations: Vec<Vec<f64>>, target: f64 },
    Tprime { totals: Vec<Vec<Operator>>, target: f64 },
    R { pair_ops: Vec<Vec<Operator>>, probabilistic: bool },
    D { variance: Operator, pair_ops: Vec<Vec<Operator>> },
}

/// Relation with its operators built once for a fixed assembly shape, for
/// evaluating many states.
pub struct Evaluator {
    spec: RelationSpec,
    dims: Vec<usize>,
    prepared: Prepared,
    audit: PhysicalityAudit,
}

fn expect_dims(kind: RelationKind, dims: &[usize], d: usize, n: Option<usize>) -> Result<()> {
    let ok = dims.iter().all(|&x| x == d) && n.is_none_or(|n| dims.len() == n) && dims.len() >= 2;
    if !ok {
        let need = match n {
            Some(n) => format!("{n} factors of dimension {d}"),
            None => format!("at least two factors of dimension {d}"),
        };
        return Err(Error::Shape(format!("relation {kind} needs {need}, state has dims {dims:?}")));
    }
    Ok(())
}

fn pair_grid(n: usize, f: impl Fn(usize, usize) -> Result<Operator>) -> Result<Vec<Vec<Operator>>> {
    (0..n).map(|x| (0..n).map(|y| f(x, y)).collect()).collect()
}

impl Evaluator {
    pub fn new(spec: RelationSpec, dims: &[usize]) -> Result<Self> {
        let kind = spec.kind();
        let prepared = match &spec.relation {
            Relation::Rt { family, t } => {
                expect_dims(kind, dims, family.dim(), Some(2))?;
                Prepared::Rt { sums: pair_grid(2, |x, y| pij_sum_operator(family, x, y))?, t: *t }
            }
            Relation::C { lattice, threshold } => {
                expect_dims(kind, dims, lattice.sites, Some(2))?;
                let q = lattice_position(*lattice)?;
                let p = lattice_momentum(*lattice)?;
                let commutators =
                    pair_grid(2, |x, y| commutator(&embed_single(&p, x, 2)?, &embed_single(&q, y, 2)?))?;
                Prepared::C { commutators, threshold: *threshold }
            }
            Relation::T { spin } => {
                expect_dims(kind, dims, spin.dim(), Some(2))?;
                let target = spin.doubled_casimir();
                let id = Matrix::identity(spin.dim().pow(2), spin.dim().pow(2)) * c(target, 0.0);
                let mut deviations = vec![vec![0.0; 2]; 2];
                for (x, row) in deviations.iter_mut().enumerate() {
                    for (y, dev) in row.iter_mut().enumerate() {
                        let op = total_spin_squared(*spin, x, y)?;
                        *dev = crate::hilbert::max_abs_diff(op.matrix(), &id);
                    }
                }
                Prepared::T { deviations, target }
            }
            Relation::Tprime { spin } => {
                expect_dims(kind, dims, spin.dim(), Some(2))?;
                Prepared::Tprime {
                    totals: pair_grid(2, |x, y| total_spin_squared(*spin, x, y))?,
                    target: spin.doubled_casimir(),
                }
            }
            Relation::R { quantity } | Relation::Rprime { quantity } => {
                expect_dims(kind, dims, quantity.operator.side(), None)?;
                let n = dims.len();
                let pair_ops =
                    pair_grid(n, |x, y| Ok(pair_difference_squared(&quantity.operator, x, y, n)?.scale(0.25)))?;
                Prepared::R { pair_ops, probabilistic: kind == RelationKind::Rprime }
            }
            Relation::Dprime { lattice, particles } | Relation::DprimeP { lattice, particles } => {
                expect_dims(kind, dims, lattice.sites, Some(*particles))?;
                let a = d_quantity(kind, *lattice)?;
                let n = *particles;
                let scale = 1.0 / (n * n) as f64;
                let variance = variance_operator(&a, n)?;
                let pair_ops = pair_grid(n, |x, y| Ok(pair_difference_squared(&a, x, y, n)?.scale(scale)))?;
                Prepared::D { variance, pair_ops }
            }
        };
        let audit = match &prepared {
            Prepared::R { pair_ops, .. } => audit_with(&spec, Some(&pair_ops[0][1]))?,
            Prepared::D { variance, .. } => audit_with(&spec, Some(variance))?,
            _ => physicality_audit(&spec)?,
        };
        Ok(Self { spec, dims: dims.to_vec(), prepared, audit })
    }

    pub fn spec(&self) -> &RelationSpec {
        &self.spec
    }

    pub fn audit(&self) -> &PhysicalityAudit {
        &self.audit
    }

    pub fn particles(&self) -> usize {
        self.dims.len()
    }

    fn check_state(&self, state: &AssemblyState) -> Result<()> {
        if state.dims() != self.dims.as_slice() {
            return Err(Error::Shape(format!(
                "state dims {:?} differ from the evaluator's {:?}",
                state.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    pub fn evaluate_pair(&self, state: &AssemblyState, x: usize, y: usize) -> Result<Evaluation> {
        self.check_state(state)?;
        let n = self.particles();
        for p in [x, y] {
            if p >= n {
                return Err(Error::Index { index: p, len: n });
            }
        }
        let tol = self.spec.tol;
        Ok(match &self.prepared {
            Prepared::Rt { sums, t } => {
                let residual = eigen_residual(&sums[x][y], state, *t)?;
                Evaluation { holds: residual <= tol.bound(*t), witness: residual }
            }
            Prepared::C { commutators, threshold } => {
                let ratio = commutator_ratio(&commutators[x][y], state);
                Evaluation { holds: ratio > *threshold, witness: ratio }
            }
            Prepared::T { deviations, target } => {
                let dev = deviations[x][y];
                Evaluation { holds: dev <= tol.bound(*target), witness: dev }
            }
            Prepared::Tprime { totals, target } => {
                let value = expectation(state, &totals[x][y])?;
                Evaluation { holds: (value - target).abs() <= tol.bound(*target), witness: value }
            }
            Prepared::R { pair_ops, probabilistic: false } => {
                let op = &pair_ops[x][y];
                let residual = eigen_residual(op, state, 0.0)?;
                Evaluation { holds: residual > annihilation_bound(op, tol), witness: residual }
            }
            Prepared::R { pair_ops, probabilistic: true } => {
                let value = expectation(state, &pair_ops[x][y])?;
                Evaluation { holds: value > tol.abs_tol, witness: value }
            }
            Prepared::D { variance, pair_ops } => {
                let (lhs, pairs) = d_expectations(variance, pair_ops, state)?;
                d_evaluation(lhs, &pairs, x, y, tol)
            }
        })
    }

    pub fn evaluate(&self, state: &AssemblyState) -> Result<DiscernmentReport> {
        self.check_state(state)?;
        let n = self.particles();
        let mut entries = vec![vec![false; n]; n];
        let mut witnesses = vec![vec![0.0; n]; n];
        let cached = match &self.prepared {
            Prepared::D { variance, pair_ops } => Some(d_expectations(variance, pair_ops, state)?),
            _ => None,
        };
        for x in 0..n {
            for y in 0..n {
                let e = match &cached {
                    Some((lhs, pairs)) => d_evaluation(*lhs, pairs, x, y, self.spec.tol),
                    None => self.evaluate_pair(state, x, y)?,
                };
                entries[x][y] = e.holds;
                witnesses[x][y] = e.witness;
            }
        }
        let truth_table = TruthTable { entries };
        Ok(DiscernmentReport {
            relation: self.spec.kind(),
            label: self.spec.relation.label(),
            lattice_analogue: self.spec.lattice_analogue(),
            particles: n,
            verdict: classify(&truth_table),
            truth_table,
            witnesses,
            mode: self.spec.mode(),
            postulate: self.spec.postulate(),
            tolerance: self.spec.tol,
            audit: self.audit.clone(),
        })
    }
}

fn d_quantity(kind: RelationKind, lattice: LatticeConfig) -> Result<Operator> {
    if kind == RelationKind::Dprime {
        lattice_position(lattice)
    } else {
        lattice_momentum(lattice)
    }
}

/// `⟨(Δ⁽ⁿ⁾)²⟩` and the matrix of pair expectations `⟨(1/n²)(A⁽ⁱ⁾ − A⁽ʲ⁾)²⟩`, `i < j`.
fn d_expectations(variance: &Operator, pair_ops: &[Vec<Operator>], state: &AssemblyState) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = pair_ops.len();
    let lhs = expectation(state, variance)?;
    let mut pairs = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            pairs[i][j] = expectation(state, &pair_ops[i][j])?;
        }
    }
    Ok((lhs, pairs))
}

fn d_evaluation(lhs: f64, pairs: &[Vec<f64>], x: usize, y: usize, tol: Tolerance) -> Evaluation {
    let n = pairs.len();
    let skip = (x.min(y), x.max(y));
    let mut excluded = 0.0;
    for (i, row) in pairs.iter().enumerate() {
        for (j, value) in row.iter().enumerate().take(n).skip(i + 1) {
            if x == y || (i, j) != skip {
                excluded += value;
            }
        }
    }
    let diff = lhs - excluded;
    Evaluation { holds: diff.abs() > tol.bound(lhs), witness: diff }
}

/// `abs_tol · (1 + ‖O‖)` with the norm estimated as `max|entry|·side`.
fn annihilation_bound(op: &Operator, tol: Tolerance) -> f64 {
    tol.abs_tol * (1.0 + op.norm_bound())
}

/// `‖Mρ‖_F / ‖ρ‖_F`; for pure states this is `‖Mψ‖`.
fn commutator_ratio(m: &Operator, state: &AssemblyState) -> f64 {
    match state.kind() {
        StateKind::Pure(v) => (m.matrix() * v).norm(),
        StateKind::Mixed(_) => {
            let rho = state.density_matrix();
            (m.matrix() * &rho).norm() / rho.norm()
        }
    }
}

/// Evaluates the relation on every ordered pair and classifies the table.
pub fn discern(spec: &RelationSpec, state: &AssemblyState) -> Result<DiscernmentReport> {
    Evaluator::new(spec.clone(), state.dims())?.evaluate(state)
}

fn eval_once(relation: Relation, tol: Tolerance, state: &AssemblyState, x: usize, y: usize) -> Result<Evaluation> {
    let spec = RelationSpec::new(relation, tol)?;
    Evaluator::new(spec, state.dims())?.evaluate_pair(state, x, y)
}

/// `Σᵢⱼ P⁽ˣ⁾ᵢⱼP⁽ʸ⁾ᵢⱼ ρ = tρ`; witness is the eigenvalue residual.
pub fn eval_relation_rt(
    f: &ProjectorFamily,
    t: f64,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    eval_once(Relation::Rt { family: f.clone(), t }, tol, state, x, y)
}

/// Lattice analogue: `‖[P⁽ˣ⁾, Q⁽ʸ⁾]ρ‖ > threshold·‖ρ‖`; witness is the norm ratio.
pub fn eval_relation_c(
    cfg: LatticeConfig,
    state: &AssemblyState,
    x: usize,
    y: usize,
    threshold: f64,
) -> Result<Evaluation> {
    eval_once(Relation::C { lattice: cfg, threshold }, Tolerance::default(), state, x, y)
}

/// Modal form: `|S⁽ˣ⁾ + S⁽ʸ⁾|² = 4s(s+1)ħ²·1` as an operator identity.
/// The witness is the largest entrywise deviation from that identity.
pub fn eval_relation_t(cfg: SpinConfig, x: usize, y: usize, tol: Tolerance) -> Result<Evaluation> {
    if cfg.twice_s == 0 {
        return Err(Error::DegenerateSpin);
    }
    let op = total_spin_squared(cfg, x, y)?;
    let target = cfg.doubled_casimir();
    let d2 = cfg.dim() * cfg.dim();
    let dev = crate::hilbert::max_abs_diff(op.matrix(), &(Matrix::identity(d2, d2) * c(target, 0.0)));
    Ok(Evaluation { holds: dev <= tol.bound(target), witness: dev })
}

/// De-modalized form: the given state is an eigenstate of `|S⁽ˣ⁾ + S⁽ʸ⁾|²`
/// with eigenvalue `4s(s+1)ħ²`.
pub fn eval_relation_t_state(
    cfg: SpinConfig,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    let op = total_spin_squared(cfg, x, y)?;
    let target = cfg.doubled_casimir();
    let residual = eigen_residual(&op, state, target)?;
    Ok(Evaluation { holds: residual <= tol.bound(target), witness: residual })
}

/// `Tr(ρ|S⁽ˣ⁾ + S⁽ʸ⁾|²) = 4s(s+1)ħ²`; witness is the expectation.
pub fn eval_relation_tprime(
    cfg: SpinConfig,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    eval_once(Relation::Tprime { spin: cfg }, tol, state, x, y)
}

/// `¼(A⁽ˣ⁾ − A⁽ʸ⁾)²ρ ≠ 0`; witness is the residual `‖¼(A⁽ˣ⁾ − A⁽ʸ⁾)²ψ‖`.
pub fn eval_relation_r(a: &Operator, state: &AssemblyState, x: usize, y: usize, tol: Tolerance) -> Result<Evaluation> {
    eval_once(Relation::R { quantity: Quantity::new("A", a.clone())? }, tol, state, x, y)
}

/// `¼Tr[ρ(A⁽ˣ⁾ − A⁽ʸ⁾)²] ≠ 0`; witness is the expectation.
pub fn eval_relation_rprime(
    a: &Operator,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    eval_once(Relation::Rprime { quantity: Quantity::new("A", a.clone())? }, tol, state, x, y)
}

/// `⟨(Δ⁽ⁿ⁾_Q)²⟩` compared with the pair-excluded sum
/// `(1/n²) Σ_{i<j, {i,j}≠{x,y}} ⟨(Q⁽ⁱ⁾ − Q⁽ʲ⁾)²⟩`; witness is their difference.
pub fn eval_relation_dprime(
    cfg: LatticeConfig,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    let particles = state.n_factors();
    eval_once(Relation::Dprime { lattice: cfg, particles }, tol, state, x, y)
}

/// Momentum analogue of [`eval_relation_dprime`].
pub fn eval_relation_dprime_momentum(
    cfg: LatticeConfig,
    state: &AssemblyState,
    x: usize,
    y: usize,
    tol: Tolerance,
) -> Result<Evaluation> {
    let particles = state.n_factors();
    eval_once(Relation::DprimeP { lattice: cfg, particles }, tol, state, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Vector;
    use crate::observables::spin_operators;
    use crate::states::{diagonal_pointmass, product_state, random_states, singlet, RandomSpec};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn classify_patterns() {
        let weak = TruthTable::new(vec![vec![false, true], vec![true, false]]).unwrap();
        assert_eq!(classify(&weak), Verdict::WeaklyDiscerned);
        let all = TruthTable::from_fn(2, |_, _| true);
        assert_eq!(classify(&all), Verdict::NotDiscerned);
        let dual = TruthTable::new(vec![vec![true, false], vec![false, true]]).unwrap();
        assert_eq!(classify(&dual), Verdict::WeaklyDiscerned);
        let lopsided = TruthTable::new(vec![vec![true, true], vec![false, false]]).unwrap();
        assert_eq!(classify(&lopsided), Verdict::NotDiscerned);
    }

    #[test]
    fn rt_examples() {
        let f = ProjectorFamily::standard(2).unwrap();
        let s = singlet();
        assert!(eval_relation_rt(&f, -2.0, &s, 0, 1, tol()).unwrap().holds);
        assert!(eval_relation_rt(&f, 2.0, &s, 0, 0, tol()).unwrap().holds);
        assert!(!eval_relation_rt(&f, -2.0, &s, 0, 0, tol()).unwrap().holds);
        let spec = RelationSpec::with_default_tol(Relation::Rt { family: f, t: -2.0 }).unwrap();
        let report = discern(&spec, &s).unwrap();
        assert_eq!(report.verdict, Verdict::WeaklyDiscerned);
        assert_eq!(report.postulate, Postulate::StrongProperty);
    }

    #[test]
    fn rt_audit_is_unphysical_and_trivial() {
        let f = ProjectorFamily::standard(3).unwrap();
        let audit = physicality_audit(&RelationSpec::with_default_tol(Relation::Rt { family: f, t: -2.0 }).unwrap()).unwrap();
        assert_eq!(
            audit.findings,
            vec![Physicality::UnphysicalBuildingBlocks, Physicality::TrivialMultipleOfIdentity]
        );
        // the assembled sums themselves are symmetric
        assert!(audit
            .building_blocks
            .iter()
            .filter(|b| b.role == BlockRole::Assembled)
            .all(|b| b.permutation_invariant));
    }

    #[test]
    fn c_relation_examples() {
        let cfg = LatticeConfig::new(8).unwrap();
        let spec = RandomSpec { seed: 2, sector: Sector::Full, dims: vec![8, 8], count: 3 };
        for st in random_states(&spec).unwrap() {
            let cross = eval_relation_c(cfg, &st, 0, 1, 1e-6).unwrap();
            assert!(!cross.holds);
            assert_eq!(cross.witness, 0.0);
            assert!(eval_relation_c(cfg, &st, 0, 0, 1e-6).unwrap().holds);
        }
        let audit = physicality_audit(
            &RelationSpec::with_default_tol(Relation::C { lattice: cfg, threshold: 1e-6 }).unwrap(),
        )
        .unwrap();
        assert_eq!(audit.findings, vec![Physicality::UnphysicalBuildingBlocks]);
    }

    #[test]
    fn t_relation_modal() {
        let cfg = SpinConfig::half(1.0);
        assert!(eval_relation_t(cfg, 0, 0, tol()).unwrap().holds);
        assert!(eval_relation_t(cfg, 1, 1, tol()).unwrap().holds);
        assert!(!eval_relation_t(cfg, 0, 1, tol()).unwrap().holds);
        let one = SpinConfig::new(1.0, 1.0).unwrap();
        assert!(!eval_relation_t(one, 0, 1, tol()).unwrap().holds);
        let max = total_spin_squared(one, 0, 1).unwrap().eigenvalues().unwrap().last().copied().unwrap();
        assert!((max - 6.0).abs() < 1e-9 && max < 8.0);
        assert!(matches!(
            eval_relation_t(SpinConfig::new(0.0, 1.0).unwrap(), 0, 1, tol()),
            Err(Error::DegenerateSpin)
        ));
    }

    #[test]
    fn tprime_examples() {
        for hbar in [1.0, 0.5] {
            let cfg = SpinConfig::half(hbar);
            let h2 = hbar * hbar;
            let s = singlet();
            let same = eval_relation_tprime(cfg, &s, 0, 0, tol()).unwrap();
            assert!(same.holds && (same.witness - 3.0 * h2).abs() < 1e-12);
            let cross = eval_relation_tprime(cfg, &s, 0, 1, tol()).unwrap();
            assert!(!cross.holds && cross.witness.abs() < 1e-12);
            let up = product_state(&[2, 2], &[0, 0], Sector::Symmetric).unwrap();
            let trip = eval_relation_tprime(cfg, &up, 0, 1, tol()).unwrap();
            assert!(!trip.holds && (trip.witness - 2.0 * h2).abs() < 1e-12);
            // de-modalized T agrees on the singlet
            assert!(eval_relation_t_state(cfg, &s, 1, 1, tol()).unwrap().holds);
            assert!(!eval_relation_t_state(cfg, &s, 0, 1, tol()).unwrap().holds);
        }
    }

    #[test]
    fn r_examples() {
        let spins = spin_operators(SpinConfig::half(1.0)).unwrap();
        let s = singlet();
        assert!(!eval_relation_r(&spins.z, &s, 0, 0, tol()).unwrap().holds);
        assert!(eval_relation_r(&spins.z, &s, 0, 1, tol()).unwrap().holds);
        let up = product_state(&[2, 2], &[0, 0], Sector::Symmetric).unwrap();
        assert!(!eval_relation_r(&spins.z, &up, 0, 1, tol()).unwrap().holds);
        assert!(eval_relation_r(&spins.x, &up, 0, 1, tol()).unwrap().holds);
    }

    #[test]
    fn rprime_examples() {
        let cfg = LatticeConfig::new(8).unwrap();
        let q = lattice_position(cfg).unwrap();
        let p = lattice_momentum(cfg).unwrap();
        let st = random_states(&RandomSpec { seed: 8, sector: Sector::Full, dims: vec![8, 8], count: 1 })
            .unwrap()
            .remove(0);
        assert!(eval_relation_rprime(&q, &st, 0, 1, tol()).unwrap().holds);
        let diag = eval_relation_rprime(&q, &st, 1, 1, tol()).unwrap();
        assert!(!diag.holds);
        assert_eq!(diag.witness, 0.0);
        let pm = diagonal_pointmass(&vec![c(1.0 / 8f64.sqrt(), 0.0); 8], cfg, 2).unwrap();
        assert!(!eval_relation_rprime(&q, &pm, 0, 1, tol()).unwrap().holds);
        assert!(eval_relation_rprime(&p, &pm, 0, 1, tol()).unwrap().holds);
    }

    #[test]
    fn dprime_examples() {
        let cfg = LatticeConfig::new(4).unwrap();
        let st = random_states(&RandomSpec { seed: 4, sector: Sector::Full, dims: vec![4, 4, 4], count: 1 })
            .unwrap()
            .remove(0);
        assert!(eval_relation_dprime(cfg, &st, 0, 1, tol()).unwrap().holds);
        let diag = eval_relation_dprime(cfg, &st, 1, 1, tol()).unwrap();
        assert!(!diag.holds && diag.witness.abs() < 1e-12);
        let f: Vec<_> = [0.1, 0.7, -0.3, 0.2].iter().map(|&x| c(x, 0.05)).collect();
        let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let f: Vec<_> = f.iter().map(|z| z / norm).collect();
        let pm = diagonal_pointmass(&f, cfg, 3).unwrap();
        assert!(!eval_relation_dprime(cfg, &pm, 0, 1, tol()).unwrap().holds);
        assert!(eval_relation_dprime_momentum(cfg, &pm, 0, 1, tol()).unwrap().holds);
        assert!(matches!(
            RelationSpec::with_default_tol(Relation::Dprime { lattice: cfg, particles: 1 }),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn golden_audit_table() {
        let cfg = LatticeConfig::new(4).unwrap();
        let spin = SpinConfig::half(1.0);
        let q = Quantity::position(cfg).unwrap();
        let cases = [
            (Relation::Rt { family: ProjectorFamily::standard(2).unwrap(), t: -2.0 }, false, true),
            (Relation::C { lattice: cfg, threshold: 1e-6 }, false, false),
            (Relation::T { spin }, true, false),
            (Relation::Tprime { spin }, true, false),
            (Relation::R { quantity: q.clone() }, true, false),
            (Relation::Rprime { quantity: q }, true, false),
            (Relation::Dprime { lattice: cfg, particles: 3 }, true, false),
            (Relation::DprimeP { lattice: cfg, particles: 3 }, true, false),
        ];
        for (rel, physical, trivial) in cases {
            let kind = rel.kind();
            let audit = physicality_audit(&RelationSpec::with_default_tol(rel).unwrap()).unwrap();
            assert_eq!(audit.is_physical(), physical, "{kind}");
            assert_eq!(audit.is_trivial(), trivial, "{kind}");
        }
    }

    #[test]
    fn evaluator_rejects_mismatched_state() {
        let spec = RelationSpec::with_default_tol(Relation::T { spin: SpinConfig::half(1.0) }).unwrap();
        let qutrits = Vector::from_element(9, c(1.0 / 3.0, 0.0));
        let st = AssemblyState::pure(qutrits, vec![3, 3], Sector::Symmetric).unwrap();
        assert!(matches!(discern(&spec, &st), Err(Error::Shape(_))));
    }

    #[test]
    fn relation_names_parse() {
        for k in RelationKind::ALL {
            assert_eq!(k.name().parse::<RelationKind>().unwrap(), k);
        }
        assert_eq!("R'".parse::<RelationKind>().unwrap(), RelationKind::Rprime);
        assert!("X".parse::<RelationKind>().is_err());
    }
}
