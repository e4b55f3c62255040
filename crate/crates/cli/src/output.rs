//! Report rendering. Machine formats carry every float at full precision:
//! JSON uses the shortest representation that round-trips and CSV uses 17
//! significant digits. Text output rounds to 6.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use discernibility::discernment::{
    DiscernmentReport, Evaluator, Mode, PhysicalityAudit, Postulate, Verdict,
};
use discernibility::hilbert::Tolerance;
use discernibility::states::RNG_ALGORITHM;
use discernibility::symmetry::Sector;
use discernibility::theorems::TheoremReport;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 6] = ["trial", "pair_x", "pair_y", "relation", "witness", "verdict"];

fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, Failure> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure(format!("cannot create {}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { out })
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)?;
        self.out.flush()?;
        Ok(())
    }

    fn csv(&mut self, rows: impl IntoIterator<Item = [String; 6]>) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        w.write_record(CSV_HEADER)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        drop(w);
        self.out.flush()?;
        Ok(())
    }

    pub fn theorem(&mut self, r: &TheoremReport, format: Format) -> Result<(), Failure> {
        match format {
            Format::Json => self.json(r),
            Format::Csv => self.csv(r.trials.iter().map(|t| {
                [
                    t.trial.to_string(),
                    t.pair_x.to_string(),
                    t.pair_y.to_string(),
                    t.relation.clone(),
                    full(t.witness),
                    t.verdict.to_string(),
                ]
            })),
            Format::Text => {
                let o = &mut self.out;
                writeln!(o, "theorem {}: {}", r.theorem, r.description)?;
                writeln!(o, "seed {} ({})", r.metadata.seed, r.metadata.rng)?;
                writeln!(o, "tolerance abs {:e} rel {:e}", r.metadata.tolerance.abs_tol, r.metadata.tolerance.rel_tol)?;
                if r.metadata.lattice_analogue {
                    writeln!(o, "lattice analogue of a continuum relation")?;
                }
                if r.metadata.excluded_diagonal_states > 0 {
                    writeln!(o, "excluded diagonal-supported states: {}", r.metadata.excluded_diagonal_states)?;
                }
                for c in &r.checks {
                    writeln!(o, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                }
                let w: Vec<f64> = r.trials.iter().map(|t| t.witness).collect();
                if let Some(s) = Summary::of(&w) {
                    writeln!(o, "witnesses: {} records, min {:.6e}, mean {:.6e}, max {:.6e}", s.count, s.min, s.mean, s.max)?;
                }
                writeln!(o, "{}", if r.passed { "PASSED" } else { "FAILED" })?;
                o.flush()?;
                Ok(())
            }
        }
    }

    pub fn discernment(&mut self, r: &DiscernmentReport, format: Format) -> Result<(), Failure> {
        let n = r.particles;
        match format {
            Format::Json => self.json(r),
            Format::Csv => self.csv((0..n).flat_map(|x| {
                (0..n).map(move |y| {
                    [
                        "0".to_string(),
                        x.to_string(),
                        y.to_string(),
                        r.label.clone(),
                        full(r.witnesses[x][y]),
                        r.verdict.to_string(),
                    ]
                })
            })),
            Format::Text => {
                let o = &mut self.out;
                writeln!(o, "relation {} ({}, {})", r.label, mode_name(r.mode), postulate_name(r.postulate))?;
                if r.lattice_analogue {
                    writeln!(o, "lattice analogue of a continuum relation")?;
                }
                writeln!(o, "  x  y  holds  witness")?;
                for x in 0..n {
                    for y in 0..n {
                        let h = if r.truth_table.get(x, y) { "true" } else { "false" };
                        writeln!(o, "  {x}  {y}  {h:<5}  {:.6e}", r.witnesses[x][y])?;
                    }
                }
                writeln!(o, "verdict: {}", r.verdict)?;
                let findings: Vec<String> = r.audit.findings.iter().map(|f| f.to_string()).collect();
                writeln!(o, "audit: {}", findings.join(" + "))?;
                o.flush()?;
                Ok(())
            }
        }
    }

    pub fn audit(&mut self, a: &PhysicalityAudit, format: Format) -> Result<(), Failure> {
        match format {
            Format::Json => self.json(a),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.out);
                w.write_record(["block", "role", "permutation_invariant", "proportional_to_identity"])?;
                for b in &a.building_blocks {
                    let role = serde_json::to_value(b.role)?.as_str().unwrap_or_default().to_string();
                    w.write_record([
                        b.description.clone(),
                        role,
                        b.permutation_invariant.to_string(),
                        b.proportional_to_identity.to_string(),
                    ])?;
                }
                w.flush()?;
                drop(w);
                self.out.flush()?;
                Ok(())
            }
            Format::Text => {
                let o = &mut self.out;
                writeln!(o, "audit of {} (identity test on the {} sector)", a.relation, a.sector)?;
                for b in &a.building_blocks {
                    writeln!(
                        o,
                        "  {:<48} invariant={:<5} multiple-of-identity={}",
                        b.description, b.permutation_invariant, b.proportional_to_identity
                    )?;
                }
                let findings: Vec<String> = a.findings.iter().map(|f| f.to_string()).collect();
                writeln!(o, "overall: {}", findings.join(" + "))?;
                o.flush()?;
                Ok(())
            }
        }
    }

    pub fn sample(&mut self, s: &SampleReport, format: Format) -> Result<(), Failure> {
        match format {
            Format::Json => self.json(s),
            Format::Csv => {
                self.csv(s.rows.iter().map(|r| {
                    [
                        r.trial.to_string(),
                        r.pair_x.to_string(),
                        r.pair_y.to_string(),
                        s.relation.clone(),
                        full(r.witness),
                        r.verdict.to_string(),
                    ]
                }))?;
                if let Some(sum) = &s.summary {
                    eprintln!("summary: count {} min {} mean {} max {}", sum.count, full(sum.min), full(sum.mean), full(sum.max));
                }
                Ok(())
            }
            Format::Text => {
                let o = &mut self.out;
                writeln!(o, "relation {} on {} random {} states (seed {})", s.relation, s.trials, s.sector, s.seed)?;
                if let Some(sum) = &s.summary {
                    writeln!(o, "witness min {:.6e} mean {:.6e} max {:.6e} over {} pairs", sum.min, sum.mean, sum.max, sum.count)?;
                }
                writeln!(o, "weakly discerned in {} of {} states", s.discerned, s.trials)?;
                o.flush()?;
                Ok(())
            }
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Categorical => "categorical",
        Mode::Probabilistic => "probabilistic",
    }
}

fn postulate_name(p: Postulate) -> &'static str {
    match p {
        Postulate::StrongProperty => "strong property postulate",
        Postulate::BornRule => "Born rule",
    }
}

/// Compact JSON naming the failing checks of a verify run.
pub fn failure_summary(r: &TheoremReport) -> Result<String, Failure> {
    let failed: Vec<_> = r.failed_checks().map(|c| serde_json::json!({ "name": c.name, "detail": c.detail })).collect();
    Ok(serde_json::to_string(&serde_json::json!({ "theorem": r.theorem, "passed": false, "failed_checks": failed }))?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Some(Self { count: values.len(), min, mean, max })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub trial: usize,
    pub pair_x: usize,
    pub pair_y: usize,
    pub witness: f64,
    pub holds: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub relation: String,
    pub sector: Sector,
    pub particles: usize,
    pub trials: usize,
    pub seed: u64,
    pub rng: String,
    pub tolerance: Tolerance,
    pub hbar: f64,
    pub postulate: Postulate,
    pub lattice_analogue: bool,
    pub discerned: usize,
    pub summary: Option<Summary>,
    pub rows: Vec<SampleRow>,
}

/// Accumulates distinct-pair witnesses over sampled states.
pub struct Sample {
    report: SampleReport,
}

impl Sample {
    pub fn new(eval: &Evaluator, sector: Sector, seed: u64, hbar: f64) -> Self {
        let spec = eval.spec();
        Self {
            report: SampleReport {
                relation: spec.relation.label(),
                sector,
                particles: eval.particles(),
                trials: 0,
                seed,
                rng: RNG_ALGORITHM.to_string(),
                tolerance: spec.tol,
                hbar,
                postulate: spec.postulate(),
                lattice_analogue: spec.lattice_analogue(),
                discerned: 0,
                summary: None,
                rows: Vec::new(),
            },
        }
    }

    pub fn push(&mut self, trial: usize, rep: &DiscernmentReport) {
        let n = rep.particles;
        self.report.trials += 1;
        if rep.verdict == Verdict::WeaklyDiscerned {
            self.report.discerned += 1;
        }
        for x in 0..n {
            for y in x + 1..n {
                self.report.rows.push(SampleRow {
                    trial,
                    pair_x: x,
                    pair_y: y,
                    witness: rep.witnesses[x][y],
                    holds: rep.truth_table.get(x, y),
                    verdict: rep.verdict,
                });
            }
        }
    }

    pub fn finish(mut self) -> SampleReport {
        let w: Vec<f64> = self.report.rows.iter().map(|r| r.witness).collect();
        self.report.summary = Summary::of(&w);
        self.report
    }
}
