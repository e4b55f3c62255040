//! Constructors for the assembly states used throughout the toolkit, seeded
//! random sampling, and the JSON state-file format.
//!
//! # State files
//!
//! ```json
//! {
//!   "format": "discernibility-state/1",
//!   "ordering": "row-major-last-fastest",
//!   "dims": [2, 2],
//!   "sector": "antisymmetric",
//!   "amplitudes": [[0, 0], [0.7071067811865476, 0], [-0.7071067811865476, 0], [0, 0]]
//! }
//! ```
//!
//! Mixed states replace `amplitudes` with
//! `"mixture": [{"weight": 0.5, "amplitudes": [...]}, ...]`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, AssemblyState, StateKind, Vector, C64, ZERO};
use crate::observables::{LatticeConfig, ORTHONORMAL_TOL};
use crate::symmetry::{project_vector, Sector, EMPTY_SECTOR_TOL};

/// Recorded in reports so that every sample can be regenerated.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9): seed_from_u64(seed), stream = trial index";

pub const STATE_FORMAT: &str = "discernibility-state/1";
pub const STATE_ORDERING: &str = "row-major-last-fastest";

/// Draws per trial before an empty sector is reported.
pub const MAX_REDRAWS: usize = 16;

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> AssemblyState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = Vector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO]);
    AssemblyState::pure(v, vec![2, 2], Sector::Antisymmetric).expect("singlet is a valid fermion state")
}

/// Computational basis product state, tagged with the given sector.
pub fn product_state(dims: &[usize], levels: &[usize], sector: Sector) -> Result<AssemblyState> {
    let v = crate::hilbert::basis_vector(dims, levels)?;
    AssemblyState::pure(v, dims.to_vec(), sector)
}

/// `Σₖ cₖ φₖ⊗φₖ` for an orthonormal family `φₖ`.
pub fn correlated_boson_state(coeffs: &[C64], basis: &[Vector]) -> Result<AssemblyState> {
    if coeffs.len() != basis.len() || basis.is_empty() {
        return Err(Error::Contract("one coefficient per basis vector is required".into()));
    }
    let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(Error::Contract(format!("coefficients have squared norm {norm}, expected 1")));
    }
    let d = basis[0].len();
    for (i, u) in basis.iter().enumerate() {
        if u.len() != d {
            return Err(Error::Shape("basis vectors differ in length".into()));
        }
        for (j, v) in basis.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (u.dotc(v) - c(expected, 0.0)).norm() > ORTHONORMAL_TOL {
                return Err(Error::Contract("basis vectors are not orthonormal".into()));
            }
        }
    }
    let mut psi = Vector::zeros(d * d);
    for (ck, phi) in coeffs.iter().zip(basis) {
        psi += phi.kronecker(phi) * *ck;
    }
    AssemblyState::pure_normalized(psi, vec![d, d], Sector::Symmetric)
}

/// State supported only on configurations where all `n` particles occupy the
/// same lattice site, with amplitude `f(x)` at `x₁ = … = xₙ = x`.
pub fn diagonal_pointmass(f: &[C64], cfg: LatticeConfig, n: usize) -> Result<AssemblyState> {
    let cfg = cfg.validated()?;
    let l = cfg.sites;
    if f.len() != l {
        return Err(Error::Contract(format!("profile has {} values for {l} sites", f.len())));
    }
    if n < 1 {
        return Err(Error::Contract("point-mass state needs at least one particle".into()));
    }
    let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(Error::Contract(format!("profile has squared norm {norm}, expected 1")));
    }
    let total = l.checked_pow(n as u32).unwrap_or(usize::MAX);
    crate::hilbert::check_capacity(total)?;
    // index of |x x … x⟩ is x·(1 + L + L² + …)
    let stride: usize = (0..n).map(|k| l.pow(k as u32)).sum();
    let mut psi = Vector::zeros(total);
    for (x, fx) in f.iter().enumerate() {
        psi[x * stride] = *fx;
    }
    AssemblyState::pure_normalized(psi, vec![l; n], Sector::Symmetric)
}

/// Parameters of a seeded batch of random pure states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub sector: Sector,
    pub dims: Vec<usize>,
    pub count: usize,
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian_vector<R: Rng>(len: usize, rng: &mut R) -> Vector {
    Vector::from_fn(len, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_sector_vector<R: Rng>(dims: &[usize], sector: Sector, rng: &mut R) -> Result<Vector> {
    let total: usize = dims.iter().product();
    let d = if sector == Sector::Full {
        0
    } else {
        crate::hilbert::homogeneous(dims)
            .ok_or_else(|| Error::Contract("symmetry sectors need equal factor dimensions".into()))?
    };
    for _ in 0..MAX_REDRAWS {
        let g = gaussian_vector(total, rng);
        let v = project_vector(&g, d, dims.len(), sector)?;
        let norm = v.norm();
        if norm >= EMPTY_SECTOR_TOL {
            return Ok(v.unscale(norm));
        }
    }
    Err(Error::EmptySector(sector.to_string()))
}

/// Haar-like random pure states: complex standard-normal amplitudes projected
/// into the sector and renormalized. Trial `i` draws from stream `i`.
pub fn random_states(spec: &RandomSpec) -> Result<Vec<AssemblyState>> {
    if spec.count == 0 {
        return Err(Error::Contract("random state count must be at least 1".into()));
    }
    crate::hilbert::Operator::identity(&spec.dims)?;
    (0..spec.count).map(|i| random_state(spec.seed, i as u64, &spec.dims, spec.sector)).collect()
}

/// Single random pure state drawn from stream `trial`.
pub fn random_state(seed: u64, trial: u64, dims: &[usize], sector: Sector) -> Result<AssemblyState> {
    let mut rng = trial_rng(seed, trial);
    let v = random_sector_vector(dims, sector, &mut rng)?;
    AssemblyState::pure(v, dims.to_vec(), sector)
}

/// Random mixtures of `components` pure sector states with Dirichlet-like
/// weights; trial `i` again draws from stream `i`.
pub fn random_mixed_states(spec: &RandomSpec, components: usize) -> Result<Vec<AssemblyState>> {
    if spec.count == 0 || components == 0 {
        return Err(Error::Contract("count and component number must be at least 1".into()));
    }
    (0..spec.count)
        .map(|i| {
            let mut rng = trial_rng(spec.seed, i as u64);
            let mut parts = Vec::with_capacity(components);
            for _ in 0..components {
                let v = random_sector_vector(&spec.dims, spec.sector, &mut rng)?;
                let w: f64 = -(1.0 - rng.random::<f64>()).ln();
                parts.push((w.max(1e-12), v));
            }
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            let parts = parts.into_iter().map(|(w, v)| (w / total, v)).collect();
            AssemblyState::mixed(parts, spec.dims.clone(), spec.sector)
        })
        .collect()
}

/// Random normalized point-mass profiles on the lattice, one per trial.
pub fn random_pointmass_states(seed: u64, cfg: LatticeConfig, n: usize, count: usize) -> Result<Vec<AssemblyState>> {
    (0..count).map(|i| random_pointmass_state(seed, i as u64, cfg, n)).collect()
}

/// Single random point-mass state drawn from stream `trial`.
pub fn random_pointmass_state(seed: u64, trial: u64, cfg: LatticeConfig, n: usize) -> Result<AssemblyState> {
    let mut rng = trial_rng(seed, trial);
    let f = gaussian_vector(cfg.sites, &mut rng);
    let f = f.unscale(f.norm());
    diagonal_pointmass(f.as_slice(), cfg, n)
}

/// `|⟨ψ|φ⟩|`, equal to 1 exactly when the two vectors span the same ray.
pub fn ray_overlap(a: &Vector, b: &Vector) -> f64 {
    a.dotc(b).norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureEntry {
    weight: f64,
    amplitudes: Vec<[f64; 2]>,
}

/// On-disk representation of an [`AssemblyState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    format: String,
    ordering: String,
    dims: Vec<usize>,
    sector: Sector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mixture: Option<Vec<MixtureEntry>>,
}

fn encode(v: &Vector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn decode(amps: &[[f64; 2]], expected: usize, what: &str, dims: &[usize]) -> Result<Vector> {
    if amps.len() != expected {
        return Err(Error::Parse(format!(
            "field `{what}`: dims {dims:?} require {expected} amplitudes, found {}",
            amps.len()
        )));
    }
    Ok(Vector::from_iterator(expected, amps.iter().map(|[re, im]| c(*re, *im))))
}

impl StateFile {
    pub fn from_state(state: &AssemblyState) -> Self {
        let (amplitudes, mixture) = match state.kind() {
            StateKind::Pure(v) => (Some(encode(v)), None),
            StateKind::Mixed(cs) => (
                None,
                Some(cs.iter().map(|(p, v)| MixtureEntry { weight: *p, amplitudes: encode(v) }).collect()),
            ),
        };
        Self {
            format: STATE_FORMAT.into(),
            ordering: STATE_ORDERING.into(),
            dims: state.dims().to_vec(),
            sector: state.sector(),
            amplitudes,
            mixture,
        }
    }

    pub fn into_state(self) -> Result<AssemblyState> {
        if self.format != STATE_FORMAT {
            return Err(Error::Parse(format!(
                "field `format`: expected `{STATE_FORMAT}`, found `{}`",
                self.format
            )));
        }
        if self.ordering != STATE_ORDERING {
            return Err(Error::Parse(format!(
                "field `ordering`: expected `{STATE_ORDERING}`, found `{}`",
                self.ordering
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Parse("field `dims`: factor dimensions must be positive".into()));
        }
        let expected = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Parse("field `dims`: dimension overflow".into()))?;
        match (self.amplitudes, self.mixture) {
            (Some(amps), None) => {
                let v = decode(&amps, expected, "amplitudes", &self.dims)?;
                AssemblyState::pure(v, self.dims, self.sector)
            }
            (None, Some(entries)) => {
                let mut parts = Vec::with_capacity(entries.len());
                for (k, e) in entries.iter().enumerate() {
                    let v = decode(&e.amplitudes, expected, &format!("mixture[{k}].amplitudes"), &self.dims)?;
                    parts.push((e.weight, v));
                }
                AssemblyState::mixed(parts, self.dims, self.sector)
            }
            _ => Err(Error::Parse("exactly one of `amplitudes` or `mixture` must be present".into())),
        }
    }
}

pub fn state_to_json(state: &AssemblyState) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(state)).expect("state files always serialize")
}

/// Parses and validates a state file. Syntax and schema errors carry the
/// line and column reported by the JSON parser.
pub fn state_from_json(text: &str) -> Result<AssemblyState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_state()
}

pub fn load_state(path: impl AsRef<Path>) -> Result<AssemblyState> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    state_from_json(&text)
}

pub fn save_state(state: &AssemblyState, path: impl AsRef<Path>) -> Result<()> {
    let mut text = state_to_json(state);
    text.push('\n');
    std::fs::write(path.as_ref(), text).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))
}
