//! `discern`: verify theorem scripts, evaluate relations on state files,
//! audit relations and sample witness distributions.
//!
//! Exit status is 0 when the command completed, 1 when a verify run has a
//! failing check and 2 for usage, configuration or file errors.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use discernibility::discernment::{
    Evaluator, Quantity, Relation, RelationKind, RelationSpec, DEFAULT_C_THRESHOLD,
};
use discernibility::hilbert::Tolerance;
use discernibility::observables::{spin_operators, LatticeConfig, ProjectorFamily, SpinConfig};
use discernibility::states::{load_state, random_state};
use discernibility::symmetry::Sector;
use discernibility::theorems::{verify_theorem, TheoremId, VerifyConfig};

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "discern", version, about = "Discernibility relations for indistinguishable quantum particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a theorem's scripted check.
    Verify(VerifyArgs),
    /// Evaluate a relation on a state file.
    Discern(DiscernArgs),
    /// Audit a relation's building blocks for permutation invariance.
    Audit(AuditArgs),
    /// Sample witnesses of a relation over random states.
    Sample(SampleArgs),
}

#[derive(Args, Debug, Clone)]
struct Physics {
    /// Lattice sites per particle.
    #[arg(long)]
    lattice_sites: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Spin quantum number s (a positive multiple of 1/2).
    #[arg(long)]
    spin: Option<f64>,
    #[arg(long)]
    particles: Option<usize>,
    /// Single-particle dimension of the projector family (Rt).
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Commutator threshold for C, in units of hbar.
    #[arg(long)]
    threshold: Option<f64>,
}

impl Physics {
    fn tol(&self) -> Result<Tolerance, Failure> {
        Ok(Tolerance::new(self.abs_tol, self.rel_tol)?)
    }

    fn lattice(&self, sites: usize) -> Result<LatticeConfig, Failure> {
        Ok(LatticeConfig { sites, spacing: self.spacing, hbar: self.hbar, centered: true }.validated()?)
    }

    fn spin_config(&self, s: f64) -> Result<SpinConfig, Failure> {
        Ok(SpinConfig::new(s, self.hbar)?)
    }
}

#[derive(Args, Debug, Clone)]
struct Out {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// 1..6, SMS1, SMS2 or SMS3.
    #[arg(long)]
    theorem: TheoremId,
    #[command(flatten)]
    physics: Physics,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Point-mass profiles for the disjunction checks.
    #[arg(long, default_value_t = 10)]
    pointmass: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum QuantityArg {
    Q,
    P,
    Sx,
    Sy,
    Sz,
}

#[derive(Args, Debug, Clone)]
struct RelationArgs {
    #[arg(long)]
    relation: RelationKind,
    /// Single-particle quantity for R and Rprime.
    #[arg(long, value_enum, ignore_case = true)]
    quantity: Option<QuantityArg>,
    /// Eigenvalue t for Rt.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
}

#[derive(Args, Debug)]
struct DiscernArgs {
    #[arg(long)]
    state: PathBuf,
    #[command(flatten)]
    relation: RelationArgs,
    #[command(flatten)]
    physics: Physics,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    relation: RelationArgs,
    #[command(flatten)]
    physics: Physics,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    relation: RelationArgs,
    #[command(flatten)]
    physics: Physics,
    #[arg(long, value_enum, default_value_t = SectorArg::Full)]
    sector: SectorArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SectorArg {
    Full,
    Symmetric,
    Antisymmetric,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::Full => Sector::Full,
            SectorArg::Symmetric => Sector::Symmetric,
            SectorArg::Antisymmetric => Sector::Antisymmetric,
        }
    }
}

/// Error that ends the process with status 2.
#[derive(Debug)]
struct Failure(String);

impl From<discernibility::Error> for Failure {
    fn from(e: discernibility::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(format!("json error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Discern(args) => cmd_discern(args).map(|()| 0),
        Command::Audit(args) => cmd_audit(args).map(|()| 0),
        Command::Sample(args) => cmd_sample(args).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let p = &args.physics;
    let cfg = VerifyConfig {
        lattice: p.lattice(p.lattice_sites.unwrap_or(8))?,
        spin: p.spin_config(p.spin.unwrap_or(0.5))?,
        particles: p.particles.unwrap_or(3),
        dimension: p.dimension.unwrap_or(3),
        trials: args.trials,
        pointmass: args.pointmass,
        seed: args.seed,
        tol: p.tol()?,
        c_threshold: p.threshold.unwrap_or(DEFAULT_C_THRESHOLD),
    };
    let report = verify_theorem(args.theorem, &cfg)?;
    Sink::open(args.out.output.as_deref())?.theorem(&report, args.out.format)?;
    if report.passed {
        Ok(0)
    } else {
        eprintln!("{}", output::failure_summary(&report)?);
        Ok(1)
    }
}

/// Shape of the assembly a relation will be evaluated on.
struct Shape {
    d: usize,
    n: usize,
}

fn quantity_for(q: QuantityArg, d: usize, p: &Physics) -> Result<Quantity, Failure> {
    Ok(match q {
        QuantityArg::Q => Quantity::position(p.lattice(d)?)?,
        QuantityArg::P => Quantity::momentum(p.lattice(d)?)?,
        spin => {
            let s = (d as f64 - 1.0) / 2.0;
            let ops = spin_operators(p.spin_config(s)?)?;
            let (name, op) = match spin {
                QuantityArg::Sx => ("Sx", ops.x),
                QuantityArg::Sy => ("Sy", ops.y),
                _ => ("Sz", ops.z),
            };
            Quantity::new(name, op)?
        }
    })
}

fn build_spec(r: &RelationArgs, p: &Physics, shape: Shape) -> Result<RelationSpec, Failure> {
    let Shape { d, n } = shape;
    let tol = p.tol()?;
    let two = |kind: RelationKind| {
        if n == 2 {
            Ok(())
        } else {
            Err(Failure(format!("relation {kind} needs exactly 2 particles, got {n}")))
        }
    };
    let relation = match r.relation {
        RelationKind::Rt => {
            two(RelationKind::Rt)?;
            Relation::Rt { family: ProjectorFamily::standard(d)?, t: r.t.unwrap_or(-2.0) }
        }
        RelationKind::C => {
            two(RelationKind::C)?;
            let threshold = p.threshold.unwrap_or(DEFAULT_C_THRESHOLD) * p.hbar;
            Relation::C { lattice: p.lattice(d)?, threshold }
        }
        kind @ (RelationKind::T | RelationKind::Tprime) => {
            two(kind)?;
            if d < 2 {
                return Err(discernibility::Error::DegenerateSpin.into());
            }
            let spin = p.spin_config((d as f64 - 1.0) / 2.0)?;
            if kind == RelationKind::T {
                Relation::T { spin }
            } else {
                Relation::Tprime { spin }
            }
        }
        kind @ (RelationKind::R | RelationKind::Rprime) => {
            let q = r
                .quantity
                .ok_or_else(|| Failure(format!("relation {kind} needs --quantity (Q, P, Sx, Sy or Sz)")))?;
            let quantity = quantity_for(q, d, p)?;
            if kind == RelationKind::R {
                Relation::R { quantity }
            } else {
                Relation::Rprime { quantity }
            }
        }
        RelationKind::Dprime => Relation::Dprime { lattice: p.lattice(d)?, particles: n },
        RelationKind::DprimeP => Relation::DprimeP { lattice: p.lattice(d)?, particles: n },
    };
    Ok(RelationSpec::new(relation, tol)?)
}

/// Default single-particle dimension when no state fixes it.
fn default_shape(r: &RelationArgs, p: &Physics) -> Result<Shape, Failure> {
    let spin_dim = |s: f64| -> Result<usize, Failure> { Ok(p.spin_config(s)?.dim()) };
    let d = match (r.relation, r.quantity) {
        (RelationKind::T | RelationKind::Tprime, _) => spin_dim(p.spin.unwrap_or(0.5))?,
        (RelationKind::R | RelationKind::Rprime, Some(QuantityArg::Sx | QuantityArg::Sy | QuantityArg::Sz)) => {
            spin_dim(p.spin.unwrap_or(0.5))?
        }
        (RelationKind::Rt, _) => p.dimension.unwrap_or(3),
        _ => p.lattice_sites.unwrap_or(8),
    };
    let n = match r.relation {
        RelationKind::Dprime | RelationKind::DprimeP => p.particles.unwrap_or(3),
        RelationKind::R | RelationKind::Rprime => p.particles.unwrap_or(2),
        _ => 2,
    };
    Ok(Shape { d, n })
}

fn cmd_discern(args: DiscernArgs) -> Result<(), Failure> {
    let state = load_state(&args.state)?;
    let d = state
        .homogeneous_dim()
        .ok_or_else(|| Failure(format!("state dims {:?} are not all equal", state.dims())))?;
    let p = &args.physics;
    let expected = default_shape(&args.relation, p)?;
    let explicit = match args.relation.relation {
        RelationKind::Rt => p.dimension.is_some(),
        RelationKind::T | RelationKind::Tprime => p.spin.is_some(),
        _ => p.lattice_sites.is_some(),
    };
    if explicit && expected.d != d {
        return Err(Failure(format!(
            "relation dimension {} does not match the state's factor dimension {d}",
            expected.d
        )));
    }
    if p.particles.is_some_and(|n| n != state.n_factors()) {
        return Err(Failure(format!(
            "--particles {} does not match the state's {} factors",
            p.particles.unwrap_or_default(),
            state.n_factors()
        )));
    }
    let spec = build_spec(&args.relation, p, Shape { d, n: state.n_factors() })?;
    let report = Evaluator::new(spec, state.dims())?.evaluate(&state)?;
    Sink::open(args.out.output.as_deref())?.discernment(&report, args.out.format)?;
    Ok(())
}

fn cmd_audit(args: AuditArgs) -> Result<(), Failure> {
    let shape = default_shape(&args.relation, &args.physics)?;
    let spec = build_spec(&args.relation, &args.physics, shape)?;
    let audit = discernibility::discernment::physicality_audit(&spec)?;
    Sink::open(args.out.output.as_deref())?.audit(&audit, args.out.format)?;
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure("--trials must be at least 1".into()));
    }
    let shape = default_shape(&args.relation, &args.physics)?;
    let dims = vec![shape.d; shape.n];
    let spec = build_spec(&args.relation, &args.physics, shape)?;
    let eval = Evaluator::new(spec, &dims)?;
    let sector = Sector::from(args.sector);
    let mut sample = output::Sample::new(&eval, sector, args.seed, args.physics.hbar);
    for i in 0..args.trials {
        let st = random_state(args.seed, i as u64, &dims, sector)?;
        sample.push(i, &eval.evaluate(&st)?);
    }
    let mut sink = Sink::open(args.out.output.as_deref())?;
    sink.sample(&sample.finish(), args.out.format)?;
    Ok(())
}
