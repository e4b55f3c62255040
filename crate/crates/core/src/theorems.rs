//! Scripted checks of the discernibility theorems over constructed and
//! sampled states.
//!
//! Every run is deterministic: trial `i` draws its state from ChaCha stream
//! `i` of the configured seed, point-mass profiles and projector families use
//! disjoint stream ranges, and records are emitted in trial order.
//!
//! Particle labels in records are factor indices of one state. Nothing in a
//! report identifies particles across different states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discernment::{
    classify, physicality_audit, Evaluation, Evaluator, Physicality, Postulate, Quantity, Relation, RelationSpec,
    TruthTable, Verdict, DEFAULT_C_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::hilbert::{c, eigen_residual, expectation, max_abs_diff, AssemblyState, Matrix, Tolerance};
use crate::observables::{
    pair_difference_squared, total_spin_squared, LatticeConfig, ProjectorFamily, SpinConfig,
};
use crate::states::{random_pointmass_state, random_state, trial_rng, RNG_ALGORITHM};
use crate::symmetry::Sector;

/// First stream used for point-mass profiles.
pub const POINTMASS_STREAM: u64 = 1 << 40;
/// Stream used for the random projector family of the fermion check.
pub const FAMILY_STREAM: u64 = 1 << 41;
/// States with less off-diagonal weight than this count as diagonal-supported.
pub const DIAGONAL_WEIGHT_TOL: f64 = 1e-12;
/// Annihilation threshold for point-mass states under the position variance.
pub const POINTMASS_RESIDUAL_TOL: f64 = 1e-12;
/// Minimum momentum variance expected of point-mass states.
pub const POINTMASS_MOMENTUM_FLOOR: f64 = 1e-8;
/// Tolerance on spin spectra and the spin Casimir identity.
pub const SPIN_TOL: f64 = 1e-9;
/// Tolerance on the D′ witness identity.
pub const WITNESS_IDENTITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    Sms1,
    Sms2,
    Sms3,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::Sms1,
        TheoremId::Sms2,
        TheoremId::Sms3,
    ];

    pub fn description(self) -> &'static str {
        match self {
            TheoremId::T1 => "R(Q): categorical weak discernment of two lattice particles",
            TheoremId::T2 => "R'(Q): probabilistic weak discernment of two lattice particles",
            TheoremId::T3 => "R(Q) or R(P): categorical, including diagonal point-mass states",
            TheoremId::T4 => "R'(Q) or R'(P): probabilistic, including diagonal point-mass states",
            TheoremId::T5 => "D'(Q): every pair of an n-particle lattice assembly",
            TheoremId::T6 => "D'(Q) or D'(P): n particles, including diagonal point-mass states",
            TheoremId::Sms1 => "Rt on the antisymmetric sector",
            TheoremId::Sms2 => "C: same-particle position/momentum commutator (lattice analogue)",
            TheoremId::Sms3 => "T and T': total spin of two particles",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremId::T1 => "1",
            TheoremId::T2 => "2",
            TheoremId::T3 => "3",
            TheoremId::T4 => "4",
            TheoremId::T5 => "5",
            TheoremId::T6 => "6",
            TheoremId::Sms1 => "SMS1",
            TheoremId::Sms2 => "SMS2",
            TheoremId::Sms3 => "SMS3",
        })
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        let key = up.strip_prefix('T').filter(|r| r.len() == 1).unwrap_or(&up);
        TheoremId::ALL
            .into_iter()
            .find(|id| id.to_string() == key)
            .ok_or_else(|| Error::Parse(format!("unknown theorem `{s}` (expected 1..6, SMS1, SMS2 or SMS3)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub lattice: LatticeConfig,
    pub spin: SpinConfig,
    /// Particle count for the n-particle checks; two-particle checks ignore it.
    pub particles: usize,
    /// Single-particle dimension for the projector-family check.
    pub dimension: usize,
    pub trials: usize,
    /// Number of point-mass profiles for the disjunction checks.
    pub pointmass: usize,
    pub seed: u64,
    pub tol: Tolerance,
    /// Commutator threshold in units of ħ.
    pub c_threshold: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig { sites: 8, spacing: 1.0, hbar: 1.0, centered: true },
            spin: SpinConfig::half(1.0),
            particles: 3,
            dimension: 3,
            trials: 200,
            pointmass: 10,
            seed: 7,
            tol: Tolerance::default(),
            c_threshold: DEFAULT_C_THRESHOLD,
        }
    }
}

impl VerifyConfig {
    fn check(&self, id: TheoremId) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Contract("trials must be at least 1".into()));
        }
        match id {
            TheoremId::T1 | TheoremId::T2 | TheoremId::T3 | TheoremId::T4 | TheoremId::Sms2 => {
                self.lattice.validated()?;
            }
            TheoremId::T5 | TheoremId::T6 => {
                self.lattice.validated()?;
                if self.particles < 2 {
                    return Err(Error::Contract(format!("theorem {id} needs at least 2 particles, got {}", self.particles)));
                }
            }
            TheoremId::Sms1 => {
                if self.dimension < 2 {
                    return Err(Error::Contract(format!(
                        "theorem {id} needs dimension at least 2 for a non-empty antisymmetric sector, got {}",
                        self.dimension
                    )));
                }
            }
            TheoremId::Sms3 => {
                if self.spin.twice_s == 0 {
                    return Err(Error::DegenerateSpin);
                }
            }
        }
        if matches!(id, TheoremId::T3 | TheoremId::T4 | TheoremId::T6) && self.pointmass == 0 {
            return Err(Error::Contract(format!("theorem {id} needs at least one point-mass state")));
        }
        if !(self.c_threshold.is_finite() && self.c_threshold > 0.0) {
            return Err(Error::Contract("commutator threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateFamily {
    Random,
    Pointmass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub family: StateFamily,
    pub sector: Sector,
    pub particles: usize,
    pub pair_x: usize,
    pub pair_y: usize,
    pub relation: String,
    pub witness: f64,
    pub holds: bool,
    /// Verdict of the theorem's relation (or disjunction) on this state.
    pub verdict: Verdict,
    /// Which disjunct held, for the Q-or-P checks.
    pub branch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub rng: String,
    pub tolerance: Tolerance,
    pub hbar: f64,
    pub config: VerifyConfig,
    pub postulates: Vec<Postulate>,
    pub lattice_analogue: bool,
    pub excluded_diagonal_states: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub description: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub trials: Vec<TrialRecord>,
    pub metadata: ReportMetadata,
}

impl TheoremReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Run {
    checks: Vec<Check>,
    trials: Vec<TrialRecord>,
    postulates: Vec<Postulate>,
    lattice_analogue: bool,
    excluded: usize,
}

impl Run {
    fn new() -> Self {
        Self { checks: Vec::new(), trials: Vec::new(), postulates: Vec::new(), lattice_analogue: false, excluded: 0 }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn postulate(&mut self, p: Postulate) {
        if !self.postulates.contains(&p) {
            self.postulates.push(p);
        }
    }

    fn audit(&mut self, spec: &RelationSpec, expected: &[Physicality]) -> Result<()> {
        let audit = physicality_audit(spec)?;
        let names: Vec<String> = audit.findings.iter().map(|f| f.to_string()).collect();
        self.check(format!("audit {}", spec.relation.label()), audit.findings == expected, names.join(" + "));
        Ok(())
    }
}

/// Tracks a per-trial predicate and reports the first violation.
struct Tally {
    name: String,
    total: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), total: 0, failures: 0, first: None }
    }

    fn record(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(context());
            }
        }
    }

    fn finish(self, run: &mut Run) {
        let detail = match &self.first {
            None => format!("{} of {} hold", self.total, self.total),
            Some(first) => format!("{} of {} fail; first: {first}", self.failures, self.total),
        };
        run.check(self.name, self.failures == 0 && self.total > 0, detail);
    }
}

fn sector_for(trial: usize) -> Sector {
    Sector::ALL[trial % Sector::ALL.len()]
}

/// Weight of configurations whose coordinates are not all equal.
fn off_diagonal_weight(state: &AssemblyState) -> f64 {
    let d = state.dims()[0];
    let n = state.n_factors();
    let stride: usize = (0..n).map(|k| d.pow(k as u32)).sum();
    let mut weight = 0.0;
    for (p, v) in state.components() {
        let diag: f64 = (0..d).map(|x| v[x * stride].norm_sqr()).sum();
        weight += p * (1.0 - diag);
    }
    weight.max(0.0)
}

/// Random lattice states, skipping diagonal-supported draws.
fn lattice_states(cfg: &VerifyConfig, n: usize, run: &mut Run) -> Result<Vec<(usize, AssemblyState)>> {
    let dims = vec![cfg.lattice.sites; n];
    let mut out = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let st = random_state(cfg.seed, i as u64, &dims, sector_for(i))?;
        if off_diagonal_weight(&st) < DIAGONAL_WEIGHT_TOL {
            run.excluded += 1;
            continue;
        }
        out.push((i, st));
    }
    Ok(out)
}

fn pointmass_states(cfg: &VerifyConfig, n: usize) -> Result<Vec<AssemblyState>> {
    (0..cfg.pointmass)
        .map(|k| random_pointmass_state(cfg.seed, POINTMASS_STREAM + k as u64, cfg.lattice, n))
        .collect()
}

fn record(
    trial: usize,
    family: StateFamily,
    state: &AssemblyState,
    (x, y): (usize, usize),
    relation: String,
    e: Evaluation,
    verdict: Verdict,
    branch: Option<String>,
) -> TrialRecord {
    TrialRecord {
        trial,
        family,
        sector: state.sector(),
        particles: state.n_factors(),
        pair_x: x,
        pair_y: y,
        relation,
        witness: e.witness,
        holds: e.holds,
        verdict,
        branch,
    }
}

fn unordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect()
}

fn is_symmetric(t: &TruthTable) -> bool {
    let n = t.n();
    (0..n).all(|x| (0..n).all(|y| t.get(x, y) == t.get(y, x)))
}

fn diagonal_false(t: &TruthTable) -> bool {
    (0..t.n()).all(|x| !t.get(x, x))
}

fn off_diagonal_true(t: &TruthTable) -> bool {
    unordered_pairs(t.n()).into_iter().all(|(x, y)| t.get(x, y))
}

/// Runs the scripted check for `id`.
pub fn verify_theorem(id: TheoremId, cfg: &VerifyConfig) -> Result<TheoremReport> {
    cfg.check(id)?;
    let mut run = Run::new();
    match id {
        TheoremId::T1 | TheoremId::T2 => variance_pair(id, cfg, &mut run)?,
        TheoremId::T3 | TheoremId::T4 => variance_disjunction(id, cfg, &mut run)?,
        TheoremId::T5 => dprime(cfg, &mut run)?,
        TheoremId::T6 => dprime_disjunction(cfg, &mut run)?,
        TheoremId::Sms1 => fermions(cfg, &mut run)?,
        TheoremId::Sms2 => commutator(cfg, &mut run)?,
        TheoremId::Sms3 => spin(cfg, &mut run)?,
    }
    let passed = !run.checks.is_empty() && run.checks.iter().all(|c| c.passed);
    let hbar = if id == TheoremId::Sms3 { cfg.spin.hbar } else { cfg.lattice.hbar };
    Ok(TheoremReport {
        theorem: id.to_string(),
        description: id.description().to_string(),
        passed,
        checks: run.checks,
        trials: run.trials,
        metadata: ReportMetadata {
            seed: cfg.seed,
            rng: RNG_ALGORITHM.to_string(),
            tolerance: cfg.tol,
            hbar,
            config: cfg.clone(),
            postulates: run.postulates,
            lattice_analogue: run.lattice_analogue,
            excluded_diagonal_states: run.excluded,
            notes: vec!["particle labels are factor indices within a single state".to_string()],
        },
    })
}

fn variance_relation(probabilistic: bool, quantity: Quantity) -> Relation {
    if probabilistic {
        Relation::Rprime { quantity }
    } else {
        Relation::R { quantity }
    }
}

fn variance_pair(id: TheoremId, cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let spec = RelationSpec::new(variance_relation(id == TheoremId::T2, Quantity::position(cfg.lattice)?), cfg.tol)?;
    run.postulate(spec.postulate());
    let label = spec.relation.label();
    let eval = Evaluator::new(spec.clone(), &[cfg.lattice.sites; 2])?;
    let mut pair = Tally::new(format!("{label}(0,1) holds"));
    let mut diag = Tally::new(format!("{label}(x,x) fails"));
    let mut positive = Tally::new("witness > 0");
    let mut weak = Tally::new("weakly discerned");
    let mut sym = Tally::new("relation symmetric");
    for (i, st) in lattice_states(cfg, 2, run)? {
        let rep = eval.evaluate(&st)?;
        let t = &rep.truth_table;
        let w = rep.witnesses[0][1];
        pair.record(t.get(0, 1), || format!("trial {i}"));
        diag.record(diagonal_false(t), || format!("trial {i}"));
        positive.record(w > 0.0, || format!("trial {i} witness {w:e}"));
        weak.record(rep.verdict == Verdict::WeaklyDiscerned, || format!("trial {i}"));
        sym.record(is_symmetric(t), || format!("trial {i}"));
        let e = Evaluation { holds: t.get(0, 1), witness: w };
        run.trials.push(record(i, StateFamily::Random, &st, (0, 1), label.clone(), e, rep.verdict, None));
    }
    for t in [pair, diag, positive, weak, sym] {
        t.finish(run);
    }
    run.audit(&spec, &[Physicality::Physical])
}

/// Truth table of `A ∨ B` from two tables.
fn disjunction(a: &TruthTable, b: &TruthTable) -> TruthTable {
    TruthTable::from_fn(a.n(), |x, y| a.get(x, y) || b.get(x, y))
}

fn branch_label(q: bool, p: bool) -> Option<String> {
    match (q, p) {
        (true, true) => Some("Q+P".into()),
        (true, false) => Some("Q".into()),
        (false, true) => Some("P".into()),
        (false, false) => None,
    }
}

fn variance_disjunction(id: TheoremId, cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let probabilistic = id == TheoremId::T4;
    let q_spec = RelationSpec::new(variance_relation(probabilistic, Quantity::position(cfg.lattice)?), cfg.tol)?;
    let p_spec = RelationSpec::new(variance_relation(probabilistic, Quantity::momentum(cfg.lattice)?), cfg.tol)?;
    run.postulate(q_spec.postulate());
    let dims = [cfg.lattice.sites; 2];
    let q_eval = Evaluator::new(q_spec.clone(), &dims)?;
    let p_eval = Evaluator::new(p_spec.clone(), &dims)?;
    let q_op = pair_difference_squared(&Quantity::position(cfg.lattice)?.operator, 0, 1, 2)?.scale(0.25);
    let p_op = pair_difference_squared(&Quantity::momentum(cfg.lattice)?.operator, 0, 1, 2)?.scale(0.25);

    let mut weak = Tally::new("Q-or-P weakly discerned on every state");
    let mut annihilated = Tally::new(format!("point-mass states annihilated by Delta_Q^2 (residual < {POINTMASS_RESIDUAL_TOL:e})"));
    let mut momentum = Tally::new(format!("point-mass states have <Delta_P^2> > {POINTMASS_MOMENTUM_FLOOR:e}"));
    let mut p_branch = Tally::new("point-mass states take the P branch");
    let mut states: Vec<(usize, StateFamily, AssemblyState)> =
        lattice_states(cfg, 2, run)?.into_iter().map(|(i, s)| (i, StateFamily::Random, s)).collect();
    let offset = cfg.trials;
    states.extend(pointmass_states(cfg, 2)?.into_iter().enumerate().map(|(k, s)| (offset + k, StateFamily::Pointmass, s)));

    for (i, family, st) in &states {
        let q = q_eval.evaluate(st)?;
        let p = p_eval.evaluate(st)?;
        let table = disjunction(&q.truth_table, &p.truth_table);
        let verdict = classify(&table);
        weak.record(verdict == Verdict::WeaklyDiscerned, || format!("state {i}"));
        let (qh, ph) = (q.truth_table.get(0, 1), p.truth_table.get(0, 1));
        let branch = branch_label(qh, ph);
        if *family == StateFamily::Pointmass {
            let residual = eigen_residual(&q_op, st, 0.0)?;
            annihilated.record(residual < POINTMASS_RESIDUAL_TOL, || format!("state {i} residual {residual:e}"));
            let mom = expectation(st, &p_op)?;
            momentum.record(mom > POINTMASS_MOMENTUM_FLOOR, || format!("state {i} value {mom:e}"));
            p_branch.record(!qh && ph, || format!("state {i} branch {branch:?}"));
        }
        for (rep, h) in [(&q, qh), (&p, ph)] {
            let e = Evaluation { holds: h, witness: rep.witnesses[0][1] };
            run.trials.push(record(*i, *family, st, (0, 1), rep.label.clone(), e, verdict, branch.clone()));
        }
    }
    for t in [weak, annihilated, momentum, p_branch] {
        t.finish(run);
    }
    run.audit(&q_spec, &[Physicality::Physical])?;
    run.audit(&p_spec, &[Physicality::Physical])
}

fn particle_counts(cfg: &VerifyConfig) -> Vec<usize> {
    let mut ns = vec![2, cfg.particles];
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn dprime_spec(momentum: bool, cfg: &VerifyConfig, n: usize) -> Result<RelationSpec> {
    let relation = if momentum {
        Relation::DprimeP { lattice: cfg.lattice, particles: n }
    } else {
        Relation::Dprime { lattice: cfg.lattice, particles: n }
    };
    RelationSpec::new(relation, cfg.tol)
}

fn dprime(cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let q = Quantity::position(cfg.lattice)?;
    for n in particle_counts(cfg) {
        let spec = dprime_spec(false, cfg, n)?;
        run.postulate(spec.postulate());
        let dims = vec![cfg.lattice.sites; n];
        let eval = Evaluator::new(spec.clone(), &dims)?;
        let scale = 1.0 / (n * n) as f64;
        let pairs = unordered_pairs(n);
        let pair_ops = pairs
            .iter()
            .map(|&(x, y)| Ok(pair_difference_squared(&q.operator, x, y, n)?.scale(scale)))
            .collect::<Result<Vec<_>>>()?;
        let rprime = if n == 2 {
            Some(Evaluator::new(RelationSpec::new(Relation::Rprime { quantity: q.clone() }, cfg.tol)?, &dims)?)
        } else {
            None
        };

        let mut off = Tally::new(format!("n={n}: D' holds on every distinct pair"));
        let mut diag = Tally::new(format!("n={n}: D' fails on the diagonal with witness 0 (within 1e-12)"));
        let mut ident = Tally::new(format!("n={n}: witness equals <(1/n^2)(Q_x - Q_y)^2> (within {WITNESS_IDENTITY_TOL:e})"));
        let mut weak = Tally::new(format!("n={n}: weakly discerned"));
        let mut sym = Tally::new(format!("n={n}: relation symmetric"));
        let mut agree = Tally::new("n=2: D' agrees with R'(Q)");
        for (i, st) in lattice_states(cfg, n, run)? {
            let rep = eval.evaluate(&st)?;
            let t = &rep.truth_table;
            off.record(off_diagonal_true(t), || format!("trial {i}"));
            let diag_ok = (0..n).all(|x| !t.get(x, x) && rep.witnesses[x][x].abs() < 1e-12);
            diag.record(diag_ok, || format!("trial {i}"));
            weak.record(rep.verdict == Verdict::WeaklyDiscerned, || format!("trial {i}"));
            sym.record(is_symmetric(t), || format!("trial {i}"));
            for (k, &(x, y)) in pairs.iter().enumerate() {
                let expected = expectation(&st, &pair_ops[k])?;
                let w = rep.witnesses[x][y];
                ident.record((w - expected).abs() <= WITNESS_IDENTITY_TOL, || {
                    format!("trial {i} pair ({x},{y}): {w:e} vs {expected:e}")
                });
                let e = Evaluation { holds: t.get(x, y), witness: w };
                run.trials.push(record(i, StateFamily::Random, &st, (x, y), format!("Dprime(n={n})"), e, rep.verdict, None));
            }
            if let Some(r) = &rprime {
                let rr = r.evaluate(&st)?;
                agree.record(rr.truth_table == *t, || format!("trial {i}"));
            }
        }
        for t in [off, diag, ident, weak, sym] {
            t.finish(run);
        }
        if n == 2 {
            agree.finish(run);
        }
        run.audit(&spec, &[Physicality::Physical])?;
    }
    Ok(())
}

fn dprime_disjunction(cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    for n in particle_counts(cfg) {
        let q_spec = dprime_spec(false, cfg, n)?;
        let p_spec = dprime_spec(true, cfg, n)?;
        run.postulate(q_spec.postulate());
        let dims = vec![cfg.lattice.sites; n];
        let q_eval = Evaluator::new(q_spec.clone(), &dims)?;
        let p_eval = Evaluator::new(p_spec.clone(), &dims)?;
        let pairs = unordered_pairs(n);

        let mut weak = Tally::new(format!("n={n}: D'-or-D'P weakly discerned on every state"));
        let mut q_fails = Tally::new(format!("n={n}: point-mass states fail D' on every pair"));
        let mut p_holds = Tally::new(format!("n={n}: point-mass states satisfy D'P on every pair"));
        let mut states: Vec<(usize, StateFamily, AssemblyState)> =
            lattice_states(cfg, n, run)?.into_iter().map(|(i, s)| (i, StateFamily::Random, s)).collect();
        let offset = cfg.trials;
        states.extend(
            pointmass_states(cfg, n)?.into_iter().enumerate().map(|(k, s)| (offset + k, StateFamily::Pointmass, s)),
        );
        for (i, family, st) in &states {
            let q = q_eval.evaluate(st)?;
            let p = p_eval.evaluate(st)?;
            let verdict = classify(&disjunction(&q.truth_table, &p.truth_table));
            weak.record(verdict == Verdict::WeaklyDiscerned, || format!("state {i}"));
            if *family == StateFamily::Pointmass {
                let qt = &q.truth_table;
                q_fails.record(pairs.iter().all(|&(x, y)| !qt.get(x, y)), || format!("state {i}"));
                p_holds.record(off_diagonal_true(&p.truth_table), || format!("state {i}"));
            }
            for &(x, y) in &pairs {
                let (qh, ph) = (q.truth_table.get(x, y), p.truth_table.get(x, y));
                let branch = branch_label(qh, ph);
                for (rep, h) in [(&q, qh), (&p, ph)] {
                    let e = Evaluation { holds: h, witness: rep.witnesses[x][y] };
                    let label = format!("{}(n={n})", rep.relation);
                    run.trials.push(record(*i, *family, st, (x, y), label, e, verdict, branch.clone()));
                }
            }
        }
        for t in [weak, q_fails, p_holds] {
            t.finish(run);
        }
        run.audit(&q_spec, &[Physicality::Physical])?;
        run.audit(&p_spec, &[Physicality::Physical])?;
    }
    Ok(())
}

fn fermions(cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let d = cfg.dimension;
    let mut rng = trial_rng(cfg.seed, FAMILY_STREAM);
    let family = ProjectorFamily::random_rank_one(d, &mut rng)?;
    let spec = RelationSpec::new(Relation::Rt { family, t: -2.0 }, cfg.tol)?;
    run.postulate(spec.postulate());
    let label = spec.relation.label();
    let eval = Evaluator::new(spec.clone(), &[d, d])?;
    let mut pair = Tally::new("every antisymmetric state is an eigenstate with t = -2");
    let mut diag = Tally::new(format!("Rt(x,x) fails (diagonal eigenvalue 2(d-1) = {})", 2 * (d - 1)));
    let mut weak = Tally::new("weakly discerned");
    for i in 0..cfg.trials {
        let st = random_state(cfg.seed, i as u64, &[d, d], Sector::Antisymmetric)?;
        let rep = eval.evaluate(&st)?;
        let t = &rep.truth_table;
        pair.record(t.get(0, 1) && t.get(1, 0), || format!("trial {i} residual {:e}", rep.witnesses[0][1]));
        diag.record(diagonal_false(t), || format!("trial {i}"));
        weak.record(rep.verdict == Verdict::WeaklyDiscerned, || format!("trial {i}"));
        let e = Evaluation { holds: t.get(0, 1), witness: rep.witnesses[0][1] };
        run.trials.push(record(i, StateFamily::Random, &st, (0, 1), label.clone(), e, rep.verdict, None));
    }
    for t in [pair, diag, weak] {
        t.finish(run);
    }
    run.audit(&spec, &[Physicality::UnphysicalBuildingBlocks, Physicality::TrivialMultipleOfIdentity])
}

fn commutator(cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let threshold = cfg.c_threshold * cfg.lattice.hbar;
    let spec = RelationSpec::new(Relation::C { lattice: cfg.lattice, threshold }, cfg.tol)?;
    run.postulate(spec.postulate());
    run.lattice_analogue = true;
    let eval = Evaluator::new(spec.clone(), &[cfg.lattice.sites; 2])?;
    let mut cross = Tally::new("C(0,1) fails with witness exactly 0");
    let mut same = Tally::new(format!("C(x,x) holds (norm ratio > {threshold:e})"));
    let mut weak = Tally::new("weakly discerned");
    for i in 0..cfg.trials {
        let st = random_state(cfg.seed, i as u64, &[cfg.lattice.sites; 2], sector_for(i))?;
        let rep = eval.evaluate(&st)?;
        let t = &rep.truth_table;
        let w = rep.witnesses[0][1];
        cross.record(!t.get(0, 1) && !t.get(1, 0) && w == 0.0 && rep.witnesses[1][0] == 0.0, || format!("trial {i}"));
        same.record(t.get(0, 0) && t.get(1, 1), || format!("trial {i} ratio {:e}", rep.witnesses[0][0]));
        weak.record(rep.verdict == Verdict::WeaklyDiscerned, || format!("trial {i}"));
        let e = Evaluation { holds: t.get(0, 1), witness: w };
        run.trials.push(record(i, StateFamily::Random, &st, (0, 1), "C".into(), e, rep.verdict, None));
    }
    for t in [cross, same, weak] {
        t.finish(run);
    }
    run.audit(&spec, &[Physicality::UnphysicalBuildingBlocks])
}

/// Spectrum of `(S⁽¹⁾ + S⁽²⁾)²` from angular-momentum addition, ascending.
fn coupled_spectrum(cfg: SpinConfig) -> Vec<f64> {
    let h2 = cfg.hbar * cfg.hbar;
    let mut out = Vec::new();
    for total in 0..=cfg.twice_s as usize {
        let j = total as f64;
        out.extend(std::iter::repeat_n(j * (j + 1.0) * h2, 2 * total + 1));
    }
    out
}

fn spin(cfg: &VerifyConfig, run: &mut Run) -> Result<()> {
    let s = cfg.spin;
    let d = s.dim();
    let target = s.doubled_casimir();
    let h2 = s.hbar * s.hbar;

    let cross = total_spin_squared(s, 0, 1)?;
    let spectrum = cross.eigenvalues()?;
    let oracle = coupled_spectrum(s);
    let dev = spectrum.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let distinct: Vec<String> = {
        let mut v: Vec<String> = Vec::new();
        for (j, total) in (0..=s.twice_s as usize).enumerate() {
            let value = (total * (total + 1)) as f64;
            v.push(format!("{value}hbar^2 x{}", 2 * j + 1));
        }
        v
    };
    run.check(
        "spectrum of |S(0) + S(1)|^2 matches angular-momentum addition",
        spectrum.len() == oracle.len() && dev <= SPIN_TOL,
        format!("{} (max deviation {dev:e})", distinct.join(", ")),
    );
    let max = spectrum.last().copied().unwrap_or(f64::NAN);
    let bound = s.max_pair_total();
    run.check(
        "largest eigenvalue (2s)(2s+1)hbar^2 lies below 4s(s+1)hbar^2",
        (max - bound).abs() <= SPIN_TOL && max < target - SPIN_TOL,
        format!("{} vs {}", max / h2, target / h2),
    );
    let same = total_spin_squared(s, 0, 0)?;
    let d2 = d * d;
    let casimir_dev = max_abs_diff(same.matrix(), &(Matrix::identity(d2, d2) * c(target, 0.0)));
    run.check(
        "|2S(0)|^2 = 4s(s+1)hbar^2 I",
        casimir_dev <= SPIN_TOL,
        format!("{}hbar^2, deviation {casimir_dev:e}", target / h2),
    );

    let t_spec = RelationSpec::new(Relation::T { spin: s }, cfg.tol)?;
    let modal = Evaluator::new(t_spec.clone(), &[d, d])?;
    let dummy = random_state(cfg.seed, 0, &[d, d], Sector::Full)?;
    let table = modal.evaluate(&dummy)?.truth_table;
    let dual = !table.get(0, 1) && !table.get(1, 0) && table.get(0, 0) && table.get(1, 1);
    run.check(
        "modal T table has the dual polarity and weakly discerns",
        dual && classify(&table) == Verdict::WeaklyDiscerned,
        format!("{:?}", table.entries),
    );
    run.postulate(t_spec.postulate());

    let tp_spec = RelationSpec::new(Relation::Tprime { spin: s }, cfg.tol)?;
    run.postulate(tp_spec.postulate());
    let tprime = Evaluator::new(tp_spec.clone(), &[d, d])?;
    let mut weak = Tally::new("T' weakly discerned on every sampled state");
    let mut demodal = Tally::new("de-modalized T weakly discerns every sampled state");
    for i in 0..cfg.trials {
        let st = random_state(cfg.seed, i as u64, &[d, d], sector_for(i))?;
        let rep = tprime.evaluate(&st)?;
        weak.record(rep.verdict == Verdict::WeaklyDiscerned, || format!("trial {i}"));
        let per_state = TruthTable::from_fn(2, |x, y| {
            let op = if x == y { &same } else { &cross };
            eigen_residual(op, &st, target).is_ok_and(|r| r <= cfg.tol.bound(target))
        });
        demodal.record(classify(&per_state) == Verdict::WeaklyDiscerned, || format!("trial {i}"));
        let e = Evaluation { holds: rep.truth_table.get(0, 1), witness: rep.witnesses[0][1] };
        run.trials.push(record(i, StateFamily::Random, &st, (0, 1), "Tprime".into(), e, rep.verdict, None));
    }
    weak.finish(run);
    demodal.finish(run);
    run.audit(&t_spec, &[Physicality::Physical])?;
    run.audit(&tp_spec, &[Physicality::Physical])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_ids_parse() {
        assert_eq!("1".parse::<TheoremId>().unwrap(), TheoremId::T1);
        assert_eq!("T6".parse::<TheoremId>().unwrap(), TheoremId::T6);
        assert_eq!("sms3".parse::<TheoremId>().unwrap(), TheoremId::Sms3);
        assert!("7".parse::<TheoremId>().is_err());
        for id in TheoremId::ALL {
            assert_eq!(id.to_string().parse::<TheoremId>().unwrap(), id);
        }
    }

    #[test]
    fn theorem_one_passes() {
        let rep = verify_theorem(TheoremId::T1, &VerifyConfig::default()).unwrap();
        assert!(rep.passed, "{:?}", rep.failed_checks().collect::<Vec<_>>());
        assert_eq!(rep.trials.len(), 200);
        assert!(rep.trials.iter().all(|t| t.witness > 0.0));
    }

    #[test]
    fn theorem_three_labels_branches() {
        let rep = verify_theorem(TheoremId::T3, &VerifyConfig { trials: 30, ..Default::default() }).unwrap();
        assert!(rep.passed, "{:?}", rep.failed_checks().collect::<Vec<_>>());
        let pm: Vec<_> = rep.trials.iter().filter(|t| t.family == StateFamily::Pointmass).collect();
        assert!(!pm.is_empty());
        assert!(pm.iter().all(|t| t.branch.as_deref() == Some("P")));
        assert!(rep.trials.iter().all(|t| t.branch.is_some()));
    }

    #[test]
    fn sms3_dual_polarity() {
        for twice in [1u32, 2, 3] {
            let spin = SpinConfig::new(twice as f64 / 2.0, 1.0).unwrap();
            let rep = verify_theorem(TheoremId::Sms3, &VerifyConfig { spin, trials: 20, ..Default::default() }).unwrap();
            assert!(rep.passed, "{:?}", rep.failed_checks().collect::<Vec<_>>());
        }
    }

    #[test]
    fn inconsistent_configs_are_contract_errors() {
        let bad = VerifyConfig { dimension: 1, ..Default::default() };
        assert!(matches!(verify_theorem(TheoremId::Sms1, &bad), Err(Error::Contract(_))));
        let bad = VerifyConfig { particles: 1, ..Default::default() };
        assert!(matches!(verify_theorem(TheoremId::T5, &bad), Err(Error::Contract(_))));
        let bad = VerifyConfig { trials: 0, ..Default::default() };
        assert!(matches!(verify_theorem(TheoremId::T1, &bad), Err(Error::Contract(_))));
    }
}
