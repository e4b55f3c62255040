//! Operator families the discernibility relations are assembled from:
//! projector families and their pairwise-difference sums, spin matrices,
//! lattice position and momentum, and the mean and variance operators over
//! the particles of an assembly.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c, embed_pair, embed_single, max_abs_diff, tensor, AssemblyState, Matrix, Operator, Vector, STRUCTURAL_TOL,
};

/// Tolerance for the orthonormality of a user-supplied basis.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Agreement demanded between two algebraic routes to the same operator,
/// scaled by `max(1, max|entry|)`.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Complete family of mutually orthogonal projectors on a single factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamily {
    projectors: Vec<Operator>,
    d: usize,
}

impl ProjectorFamily {
    /// Validates hermiticity, idempotence, mutual orthogonality and completeness.
    pub fn new(projectors: Vec<Operator>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Contract("projector family is empty".into()))?;
        let d = first.side();
        let mut sum = Matrix::zeros(d, d);
        for (i, e) in projectors.iter().enumerate() {
            if e.dims() != [d] {
                return Err(Error::Shape(format!("projector {i} is not a single-factor {d}x{d} operator")));
            }
            let m = e.matrix();
            if max_abs_diff(m, &m.adjoint()) > STRUCTURAL_TOL {
                return Err(Error::Contract(format!("projector {i} is not hermitian")));
            }
            if max_abs_diff(&(m * m), m) > STRUCTURAL_TOL {
                return Err(Error::Contract(format!("projector {i} is not idempotent")));
            }
            for (j, f) in projectors.iter().enumerate().skip(i + 1) {
                if (m * f.matrix()).iter().any(|z| z.norm() > STRUCTURAL_TOL) {
                    return Err(Error::Contract(format!("projectors {i} and {j} are not orthogonal")));
                }
            }
            sum += m;
        }
        if max_abs_diff(&sum, &Matrix::identity(d, d)) > STRUCTURAL_TOL {
            return Err(Error::Contract("projectors do not sum to the identity".into()));
        }
        Ok(Self { projectors, d })
    }

    /// Rank-one projectors `|bᵢ⟩⟨bᵢ|` onto an orthonormal basis.
    pub fn from_basis(basis: &[Vector]) -> Result<Self> {
        let d = basis.len();
        for (i, u) in basis.iter().enumerate() {
            if u.len() != d {
                return Err(Error::Shape(format!("basis vector {i} has length {}, expected {d}", u.len())));
            }
            for (j, v) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let dev = (u.dotc(v) - c(expected, 0.0)).norm();
                if dev > ORTHONORMAL_TOL {
                    return Err(Error::Contract(format!(
                        "basis is not orthonormal: ⟨b{i}|b{j}⟩ off by {dev:e}"
                    )));
                }
            }
        }
        let projectors = basis
            .iter()
            .map(|b| Operator::hermitian(b * b.adjoint(), vec![d]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projectors)
    }

    pub fn standard(d: usize) -> Result<Self> {
        let basis: Vec<Vector> = (0..d)
            .map(|i| {
                let mut v = Vector::zeros(d);
                v[i] = c(1.0, 0.0);
                v
            })
            .collect();
        Self::from_basis(&basis)
    }

    /// Rank-one family from a Haar-like random orthonormal basis.
    pub fn random_rank_one<R: Rng>(d: usize, rng: &mut R) -> Result<Self> {
        Self::from_basis(&random_orthonormal_basis(d, rng))
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Gram–Schmidt on complex Gaussian vectors.
pub fn random_orthonormal_basis<R: Rng>(d: usize, rng: &mut R) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = Vector::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

/// Random hermitian `d×d` matrix with complex Gaussian entries.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> Operator {
    let g = Matrix::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&g + g.adjoint()).unscale(2.0);
    Operator::hermitian(h, vec![d]).expect("symmetrized matrix is hermitian")
}

fn check_particle_pair(x: usize, y: usize, n: usize) -> Result<()> {
    for p in [x, y] {
        if p >= n {
            return Err(Error::Index { index: p, len: n });
        }
    }
    Ok(())
}

/// Embedded differences `P⁽ˢˡᵒᵗ⁾ᵢⱼ = (Eᵢ − Eⱼ)` on factor `slot` of a
/// two-particle assembly, indexed by `(i, j)`.
pub fn pij_blocks(f: &ProjectorFamily, slot: usize) -> Result<Vec<((usize, usize), Operator)>> {
    let es = f.projectors();
    let mut out = Vec::with_capacity(es.len() * es.len());
    for (i, ei) in es.iter().enumerate() {
        for (j, ej) in es.iter().enumerate() {
            out.push(((i, j), embed_single(&ei.sub(ej)?, slot, 2)?));
        }
    }
    Ok(out)
}

/// `Σᵢⱼ P⁽ˣ⁾ᵢⱼ P⁽ʸ⁾ᵢⱼ` on a two-particle assembly (`x, y ∈ {0, 1}`).
///
/// The sum is carried out term by term and then compared with its closed
/// form: `2(k·Σᵢ Eᵢ⊗Eᵢ − 1⊗1)` for `x ≠ y` and `2(k−1)·1⊗1` for `x = y`,
/// with `k` the number of projectors (`k = d` for rank-one families).
/// For rank-one families `Σᵢ Eᵢ⊗Eᵢ` annihilates the antisymmetric sector,
/// where the cross sum therefore acts as `−2`.
pub fn pij_sum_operator(f: &ProjectorFamily, x: usize, y: usize) -> Result<Operator> {
    check_particle_pair(x, y, 2)?;
    let d = f.dim();
    let bx = pij_blocks(f, x)?;
    let by = pij_blocks(f, y)?;
    let mut sum = Matrix::zeros(d * d, d * d);
    for ((_, px), (_, py)) in bx.iter().zip(&by) {
        sum += px.matrix() * py.matrix();
    }
    let k = f.projectors().len() as f64;
    let id = Matrix::identity(d * d, d * d);
    let closed = if x == y {
        &id * c(2.0 * (k - 1.0), 0.0)
    } else {
        let mut ee = Matrix::zeros(d * d, d * d);
        for e in f.projectors() {
            ee += e.matrix().kronecker(e.matrix());
        }
        (ee * c(k, 0.0) - &id) * c(2.0, 0.0)
    };
    let dev = max_abs_diff(&sum, &closed);
    if dev > 1e-10 * k {
        return Err(Error::NumericalIntegrity(format!(
            "projector-difference sum deviates from its closed form by {dev:e}"
        )));
    }
    Operator::hermitian(sum, vec![d, d])
}

/// Spin quantum number stored as `2s` so that half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinConfig {
    pub twice_s: u32,
    pub hbar: f64,
}

impl SpinConfig {
    pub fn new(s: f64, hbar: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice.is_finite() && twice >= 0.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::Contract(format!("spin {s} is not a non-negative half-integer")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Contract(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { twice_s: twice.round() as u32, hbar })
    }

    pub fn half(hbar: f64) -> Self {
        Self { twice_s: 1, hbar }
    }

    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    /// `s(s+1)ħ²`.
    pub fn casimir(&self) -> f64 {
        let s = self.s();
        s * (s + 1.0) * self.hbar * self.hbar
    }

    /// `4s(s+1)ħ²`, the value of `|2S|²`.
    pub fn doubled_casimir(&self) -> f64 {
        4.0 * self.casimir()
    }

    /// `(2s)(2s+1)ħ²`, the top of the two-particle total-spin spectrum.
    pub fn max_pair_total(&self) -> f64 {
        let two_s = self.twice_s as f64;
        two_s * (two_s + 1.0) * self.hbar * self.hbar
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
}

impl SpinOperators {
    pub fn components(&self) -> [&Operator; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// `(2s+1)`-dimensional spin matrices in the basis `m = s, s−1, …, −s`,
/// built from the ladder operators.
pub fn spin_operators(cfg: SpinConfig) -> Result<SpinOperators> {
    if cfg.twice_s == 0 {
        return Err(Error::DegenerateSpin);
    }
    let d = cfg.dim();
    let s = cfg.s();
    let h = cfg.hbar;
    let mut raise = Matrix::zeros(d, d);
    for k in 1..d {
        let m = s - k as f64;
        raise[(k - 1, k)] = c(h * (s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower) * c(0.5, 0.0);
    let sy = (&raise - &lower) * c(0.0, -0.5);
    let sz = Matrix::from_diagonal(&Vector::from_fn(d, |k, _| c(h * (s - k as f64), 0.0)));
    Ok(SpinOperators {
        x: Operator::hermitian(sx, vec![d])?,
        y: Operator::hermitian(sy, vec![d])?,
        z: Operator::hermitian(sz, vec![d])?,
    })
}

/// `|S⁽ˣ⁾ + S⁽ʸ⁾|²` on a two-particle spin assembly.
///
/// Computed by squaring the embedded sums component by component, then
/// checked against `2s(s+1)ħ²·1 + 2 Σₐ Sₐ⊗Sₐ` (`x ≠ y`) or
/// `4s(s+1)ħ²·1` (`x = y`).
pub fn total_spin_squared(cfg: SpinConfig, x: usize, y: usize) -> Result<Operator> {
    check_particle_pair(x, y, 2)?;
    let spins = spin_operators(cfg)?;
    let d = cfg.dim();
    let mut total = Matrix::zeros(d * d, d * d);
    for s in spins.components() {
        let sum = embed_single(s, x, 2)?.add(&embed_single(s, y, 2)?)?;
        total += sum.square().into_matrix();
    }
    let id = Matrix::identity(d * d, d * d);
    let closed = if x == y {
        &id * c(cfg.doubled_casimir(), 0.0)
    } else {
        let mut ss = &id * c(2.0 * cfg.casimir(), 0.0);
        for s in spins.components() {
            ss += tensor(s, s)?.into_matrix() * c(2.0, 0.0);
        }
        ss
    };
    let scale = cfg.doubled_casimir().max(1.0);
    let dev = max_abs_diff(&total, &closed);
    if dev > 1e-10 * scale {
        return Err(Error::NumericalIntegrity(format!(
            "total spin deviates from its expansion by {dev:e}"
        )));
    }
    Operator::hermitian(total, vec![d, d])
}

/// Periodic one-dimensional lattice on which position and momentum act.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub sites: usize,
    pub spacing: f64,
    pub hbar: f64,
    pub centered: bool,
}

impl LatticeConfig {
    pub fn new(sites: usize) -> Result<Self> {
        Self { sites, spacing: 1.0, hbar: 1.0, centered: true }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.sites < 2 {
            return Err(Error::Contract(format!("lattice needs at least 2 sites, got {}", self.sites)));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::Contract(format!("lattice spacing must be positive, got {}", self.spacing)));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::Contract(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(self)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = hbar;
        self.validated()
    }

    /// Site coordinates `xⱼ`; centered lattices are symmetric about zero.
    pub fn positions(&self) -> Vec<f64> {
        let l = self.sites as f64;
        (0..self.sites)
            .map(|j| {
                let j = j as f64;
                if self.centered {
                    (j - (l - 1.0) / 2.0) * self.spacing
                } else {
                    j * self.spacing
                }
            })
            .collect()
    }

    /// Integer momentum labels in row order of [`LatticeConfig::dft_matrix`].
    pub fn momentum_labels(&self) -> Vec<i64> {
        let l = self.sites as i64;
        (0..l).map(|r| if self.centered { r - l / 2 } else { r }).collect()
    }

    /// `kᵣ = ħ·2π·mᵣ/(L·a)`.
    pub fn momenta(&self) -> Vec<f64> {
        let scale = self.hbar * 2.0 * PI / (self.sites as f64 * self.spacing);
        self.momentum_labels().into_iter().map(|m| m as f64 * scale).collect()
    }

    /// Unitary DFT `F[r, j] = exp(−2πi·mᵣ·j/L)/√L`.
    pub fn dft_matrix(&self) -> Matrix {
        let l = self.sites;
        let norm = (l as f64).sqrt();
        let labels = self.momentum_labels();
        Matrix::from_fn(l, l, |r, j| {
            let phase = -2.0 * PI * (labels[r] * j as i64).rem_euclid(l as i64) as f64 / l as f64;
            c(phase.cos() / norm, phase.sin() / norm)
        })
    }
}

pub fn lattice_position(cfg: LatticeConfig) -> Result<Operator> {
    Operator::diagonal(&cfg.validated()?.positions())
}

/// `P = F† diag(k) F`.
pub fn lattice_momentum(cfg: LatticeConfig) -> Result<Operator> {
    let cfg = cfg.validated()?;
    let f = cfg.dft_matrix();
    let k = Matrix::from_diagonal(&Vector::from_iterator(cfg.sites, cfg.momenta().into_iter().map(|k| c(k, 0.0))));
    let p = f.adjoint() * k * f;
    // symmetrize away rounding so the result is exactly hermitian
    let p = (&p + p.adjoint()).unscale(2.0);
    Operator::hermitian(p, vec![cfg.sites])
}

fn require_single_hermitian(a: &Operator) -> Result<()> {
    if a.n_factors() != 1 {
        return Err(Error::Shape("single-particle quantity expected".into()));
    }
    if !a.is_hermitian(1e-10 * a.max_abs_entry().max(1.0)) {
        return Err(Error::Contract("single-particle quantity must be hermitian".into()));
    }
    Ok(())
}

/// `(1/n) Σᵢ A⁽ⁱ⁾`, the mean of `a` over the particles.
pub fn mean_operator(a: &Operator, n: usize) -> Result<Operator> {
    require_single_hermitian(a)?;
    if n == 0 {
        return Err(Error::Contract("mean over zero particles".into()));
    }
    let mut acc = embed_single(a, 0, n)?.into_matrix();
    for i in 1..n {
        acc += embed_single(a, i, n)?.into_matrix();
    }
    Operator::hermitian(acc.unscale(n as f64), vec![a.side(); n])
}

/// `(A⁽ˣ⁾ − A⁽ʸ⁾)²`, assembled as `A²⁽ˣ⁾ + A²⁽ʸ⁾ − 2A⁽ˣ⁾A⁽ʸ⁾`; zero for `x = y`.
pub fn pair_difference_squared(a: &Operator, x: usize, y: usize, n: usize) -> Result<Operator> {
    require_single_hermitian(a)?;
    check_particle_pair(x, y, n)?;
    if x == y {
        return Operator::zeros(&vec![a.side(); n]);
    }
    let a2 = a.square();
    let m = embed_single(&a2, x, n)?.into_matrix() + embed_single(&a2, y, n)?.into_matrix()
        - embed_pair(a, x, a, y, n)?.into_matrix() * c(2.0, 0.0);
    Operator::hermitian((&m + m.adjoint()).unscale(2.0), vec![a.side(); n])
}

/// `(1/n²) Σ_{i<j} (A⁽ⁱ⁾ − A⁽ʲ⁾)²`.
pub fn variance_operator_pairwise(a: &Operator, n: usize) -> Result<Operator> {
    require_single_hermitian(a)?;
    if n < 2 {
        return Err(Error::Contract("variance needs at least two particles".into()));
    }
    let side = a.side().pow(n as u32);
    let mut acc = Matrix::zeros(side, side);
    for i in 0..n {
        for j in i + 1..n {
            acc += pair_difference_squared(a, i, j, n)?.into_matrix();
        }
    }
    Operator::hermitian(acc.unscale((n * n) as f64), vec![a.side(); n])
}

/// Two-particle correlation form `½(mean(A²) − A⊗A)`.
pub fn variance_operator_correlation_form(a: &Operator) -> Result<Operator> {
    require_single_hermitian(a)?;
    let m = mean_operator(&a.square(), 2)?.into_matrix() - tensor(a, a)?.into_matrix();
    let m = m.unscale(2.0);
    Operator::hermitian((&m + m.adjoint()).unscale(2.0), vec![a.side(); 2])
}

/// Square of the mean operator above which the matmul is replaced by the
/// equivalent Kronecker expansion.
const MATMUL_SIDE_LIMIT: usize = 1024;

/// `(Δ⁽ⁿ⁾_A)² = mean(A²) − mean(A)²`.
///
/// The result is checked entrywise against [`variance_operator_pairwise`].
/// Degenerate `a` is accepted.
pub fn variance_operator(a: &Operator, n: usize) -> Result<Operator> {
    require_single_hermitian(a)?;
    if n < 2 {
        return Err(Error::Contract("variance needs at least two particles".into()));
    }
    let mean_sq = mean_operator(&a.square(), n)?.into_matrix();
    let mean = mean_operator(a, n)?;
    let square_of_mean = if mean.side() <= MATMUL_SIDE_LIMIT {
        mean.square().into_matrix()
    } else {
        // mean(A)² = (1/n²)(Σᵢ A²⁽ⁱ⁾ + Σ_{i≠j} A⁽ⁱ⁾A⁽ʲ⁾)
        let mut acc = mean_sq.clone() * c(n as f64, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += embed_pair(a, i, a, j, n)?.into_matrix();
                }
            }
        }
        acc.unscale((n * n) as f64)
    };
    let v = mean_sq - square_of_mean;
    let v = (&v + v.adjoint()).unscale(2.0);
    let pairwise = variance_operator_pairwise(a, n)?;
    let dev = max_abs_diff(&v, pairwise.matrix());
    if dev > IDENTITY_TOL * pairwise.max_abs_entry().max(1.0) {
        return Err(Error::NumericalIntegrity(format!(
            "variance forms disagree by {dev:e}"
        )));
    }
    Operator::hermitian(v, vec![a.side(); n])
}

/// Minimum eigenvalue gap for a quantity to count as non-degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// `¼ Σᵢⱼ |cᵢⱼ|² (aᵢ − aⱼ)²` with `cᵢⱼ` the amplitudes of the state in the
/// product eigenbasis of `a`; mixtures are averaged over their components.
pub fn expected_variance_closed_form(a: &Operator, state: &AssemblyState) -> Result<f64> {
    require_single_hermitian(a)?;
    let d = a.side();
    if state.dims() != [d, d] {
        return Err(Error::Shape(format!(
            "closed form needs a two-particle state on {d}x{d}, got dims {:?}",
            state.dims()
        )));
    }
    let (values, vectors) = a.eigen()?;
    let spread = values.last().unwrap() - values.first().unwrap();
    for w in values.windows(2) {
        if w[1] - w[0] <= DEGENERACY_GAP * spread.abs().max(1.0) {
            return Err(Error::Contract("closed form requires a non-degenerate quantity".into()));
        }
    }
    let vh = vectors.adjoint();
    let vh_t = vh.transpose();
    let mut total = 0.0;
    for (p, psi) in state.components() {
        let amp = Matrix::from_fn(d, d, |k, l| psi[k * d + l]);
        let coeffs = &vh * amp * &vh_t;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let diff = values[i] - values[j];
                acc += coeffs[(i, j)].norm_sqr() * diff * diff;
            }
        }
        total += p * acc / 4.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_vector, commutator, expectation, is_eigenstate, Tolerance};
    use crate::symmetry::{antisymmetrizer, is_permutation_invariant, Sector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn singlet() -> AssemblyState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = Vector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
        AssemblyState::pure(v, vec![2, 2], Sector::Antisymmetric).unwrap()
    }

    #[test]
    fn standard_and_x_basis_families() {
        let std = ProjectorFamily::standard(2).unwrap();
        assert_eq!(std.projectors()[0], Operator::diagonal(&[1.0, 0.0]).unwrap());
        assert_eq!(std.projectors()[1], Operator::diagonal(&[0.0, 1.0]).unwrap());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Vector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let minus = Vector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
        let fam = ProjectorFamily::from_basis(&[plus, minus]).unwrap();
        let half = c(0.5, 0.0);
        let expected_plus = Matrix::from_row_slice(2, 2, &[half, half, half, half]);
        let expected_minus = Matrix::from_row_slice(2, 2, &[half, -half, -half, half]);
        assert!(max_abs_diff(fam.projectors()[0].matrix(), &expected_plus) < 1e-15);
        assert!(max_abs_diff(fam.projectors()[1].matrix(), &expected_minus) < 1e-15);
        let sum = fam.projectors()[0].add(&fam.projectors()[1]).unwrap();
        assert!(max_abs_diff(sum.matrix(), &Matrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let a = Vector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let b = Vector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(ProjectorFamily::from_basis(&[a, b]), Err(Error::Contract(_))));
    }

    #[test]
    fn pij_sums_qubit() {
        let f = ProjectorFamily::standard(2).unwrap();
        let same = pij_sum_operator(&f, 0, 0).unwrap();
        assert!(max_abs_diff(same.matrix(), &(Matrix::identity(4, 4) * c(2.0, 0.0))) < 1e-14);
        let cross = pij_sum_operator(&f, 0, 1).unwrap();
        assert!(is_eigenstate(&cross, &singlet(), -2.0, Tolerance::default()).unwrap());
    }

    #[test]
    fn pij_cross_sum_on_qutrit_antisymmetric_sector() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let f = ProjectorFamily::random_rank_one(3, &mut rng).unwrap();
        let cross = pij_sum_operator(&f, 1, 0).unwrap();
        let anti = antisymmetrizer(3, 2).unwrap().operator;
        // columns of the antisymmetrizer span the sector
        for col in 0..9 {
            let v = anti.matrix().column(col).into_owned();
            if v.norm() < 1e-9 {
                continue;
            }
            let out = cross.matrix() * &v;
            assert!((out + &v * c(2.0, 0.0)).norm() < 1e-12);
        }
        assert!(is_permutation_invariant(&cross, Tolerance::default()));
    }

    #[test]
    fn spin_half_conventions() {
        let cfg = SpinConfig::half(1.0);
        let s = spin_operators(cfg).unwrap();
        assert_eq!(s.z, Operator::diagonal(&[0.5, -0.5]).unwrap());
        let sq = s.x.square().add(&s.y.square()).unwrap().add(&s.z.square()).unwrap();
        assert!(max_abs_diff(sq.matrix(), &(Matrix::identity(2, 2) * c(0.75, 0.0))) < 1e-15);
    }

    #[test]
    fn spin_one_by_ladder() {
        // Oracle: S± = ħ√2 on the off-diagonals for s = 1, so Sx has entries 1/√2.
        let hbar = 0.5;
        let s = spin_operators(SpinConfig::new(1.0, hbar).unwrap()).unwrap();
        assert_eq!(s.z, Operator::diagonal(&[hbar, 0.0, -hbar]).unwrap());
        let r = hbar / 2f64.sqrt();
        let expected = Matrix::from_row_slice(
            3,
            3,
            &[c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0)],
        );
        assert!(max_abs_diff(s.x.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn spin_commutation_relations() {
        for twice in 1..=4 {
            for hbar in [1.0, 0.5] {
                let cfg = SpinConfig::new(twice as f64 / 2.0, hbar).unwrap();
                let s = spin_operators(cfg).unwrap();
                let lhs = commutator(&s.x, &s.y).unwrap();
                let rhs = s.z.scale_complex(c(0.0, hbar));
                assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-10);
                let sq = s.x.square().add(&s.y.square()).unwrap().add(&s.z.square()).unwrap();
                let d = cfg.dim();
                assert!(max_abs_diff(sq.matrix(), &(Matrix::identity(d, d) * c(cfg.casimir(), 0.0))) < 1e-10);
            }
        }
    }

    #[test]
    fn zero_spin_rejected() {
        assert!(matches!(spin_operators(SpinConfig::new(0.0, 1.0).unwrap()), Err(Error::DegenerateSpin)));
        assert!(SpinConfig::new(0.3, 1.0).is_err());
    }

    #[test]
    fn total_spin_half() {
        for hbar in [1.0, 0.5] {
            let cfg = SpinConfig::half(hbar);
            let same = total_spin_squared(cfg, 0, 0).unwrap();
            assert!(max_abs_diff(same.matrix(), &(Matrix::identity(4, 4) * c(3.0 * hbar * hbar, 0.0))) < 1e-14);
            let cross = total_spin_squared(cfg, 0, 1).unwrap();
            let ev = cross.eigenvalues().unwrap();
            let h2 = hbar * hbar;
            assert!(ev[0].abs() < 1e-12);
            for e in &ev[1..] {
                assert!((e - 2.0 * h2).abs() < 1e-12);
            }
            assert!(ev[3] < 3.0 * h2);
        }
    }

    #[test]
    fn lattice_operators() {
        let q = lattice_position(LatticeConfig::new(2).unwrap()).unwrap();
        assert_eq!(q, Operator::diagonal(&[-0.5, 0.5]).unwrap());

        let cfg = LatticeConfig::new(4).unwrap();
        let f = cfg.dft_matrix();
        assert!(max_abs_diff(&(f.adjoint() * &f), &Matrix::identity(4, 4)) < 1e-12);
        let ev = lattice_momentum(cfg).unwrap().eigenvalues().unwrap();
        let expected = [-PI, -PI / 2.0, 0.0, PI / 2.0];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn momentum_generates_translations() {
        // Oracle: on a periodic lattice exp(−iPa/ħ) shifts every site by one.
        let cfg = LatticeConfig::new(5).unwrap();
        let f = cfg.dft_matrix();
        let phases = Matrix::from_diagonal(&Vector::from_iterator(
            5,
            cfg.momenta().iter().map(|&k| c((-k).cos(), (-k).sin())),
        ));
        let shift = f.adjoint() * phases * &f;
        for j in 0..5 {
            let mut v = Vector::zeros(5);
            v[j] = c(1.0, 0.0);
            let out = &shift * v;
            assert!((out[(j + 1) % 5] - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn lattice_commutators() {
        let cfg = LatticeConfig::new(6).unwrap();
        let q = lattice_position(cfg).unwrap();
        let p = lattice_momentum(cfg).unwrap();
        let cross = commutator(&embed_single(&p, 0, 2).unwrap(), &embed_single(&q, 1, 2).unwrap()).unwrap();
        assert!(cross.max_abs_entry() < 1e-14);
        let same = tensor(&commutator(&p, &q).unwrap(), &Operator::identity(&[6]).unwrap()).unwrap();
        assert!(same.operator_norm() > 0.1);
    }

    #[test]
    fn mean_operator_examples() {
        let sz = Operator::diagonal(&[1.0, -1.0]).unwrap();
        assert_eq!(mean_operator(&sz, 1).unwrap().matrix(), sz.matrix());
        let m = mean_operator(&sz, 2).unwrap();
        let v = basis_vector(&[2, 2], &[0, 1]).unwrap();
        assert!(m.apply(&v).unwrap().norm() < 1e-15);
        let id = Operator::identity(&[3]).unwrap();
        assert_eq!(mean_operator(&id, 3).unwrap().matrix(), &Matrix::identity(27, 27));
    }

    #[test]
    fn variance_examples() {
        let a = Operator::diagonal(&[0.5, -0.5]).unwrap();
        let var = variance_operator(&a, 2).unwrap();
        assert!(is_eigenstate(&var, &singlet(), 0.25, Tolerance::default()).unwrap());
        let v = basis_vector(&[2, 2], &[1, 1]).unwrap();
        assert!(var.apply(&v).unwrap().norm() < 1e-15);
        assert!(matches!(variance_operator(&a, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn position_variance_is_relative_distance() {
        let cfg = LatticeConfig::new(5).unwrap();
        let xs = cfg.positions();
        let var = variance_operator(&lattice_position(cfg).unwrap(), 2).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let k = i * 5 + j;
                let expected = (xs[i] - xs[j]).powi(2) / 4.0;
                assert!((var.matrix()[(k, k)] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        assert!(var.proportional_to_identity(1e-12).is_none());
    }

    #[test]
    fn closed_form_examples() {
        let sz = Operator::diagonal(&[0.5, -0.5]).unwrap();
        assert!((expected_variance_closed_form(&sz, &singlet()).unwrap() - 0.25).abs() < 1e-15);
        let v = basis_vector(&[2, 2], &[0, 0]).unwrap();
        let up_up = AssemblyState::pure(v, vec![2, 2], Sector::Symmetric).unwrap();
        assert!(expected_variance_closed_form(&sz, &up_up).unwrap().abs() < 1e-15);
        let sx = spin_operators(SpinConfig::half(1.0)).unwrap().x;
        assert!((expected_variance_closed_form(&sx, &up_up).unwrap() - 0.125).abs() < 1e-15);
        let var = variance_operator(&sx, 2).unwrap();
        assert!((expectation(&up_up, &var).unwrap() - 0.125).abs() < 1e-15);
        let degenerate = Operator::identity(&[2]).unwrap();
        assert!(matches!(
            expected_variance_closed_form(&degenerate, &up_up),
            Err(Error::Contract(_))
        ));
    }
}
