//! Permutations of tensor factors, the (anti)symmetrizing projectors and the
//! permutation-invariance test that decides whether an operator may stand
//! for a physical quantity of indistinguishable particles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, check_capacity, digits, AssemblyState, Matrix, Operator, StateKind, Tolerance, Vector, ONE};

/// Largest particle number for which factorial enumeration is attempted.
pub const MAX_ENUMERATED_PARTICLES: usize = 8;

/// Norm below which a sector projection counts as empty.
pub const EMPTY_SECTOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Full,
    Symmetric,
    Antisymmetric,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::Full => "full",
            Sector::Symmetric => "symmetric",
            Sector::Antisymmetric => "antisymmetric",
        })
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Sector::Full),
            "symmetric" | "sym" | "boson" => Ok(Sector::Symmetric),
            "antisymmetric" | "anti" | "fermion" => Ok(Sector::Antisymmetric),
            other => Err(Error::Parse(format!("unknown sector `{other}`"))),
        }
    }
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::Full, Sector::Symmetric, Sector::Antisymmetric];

    fn character(self, p: &Permutation) -> f64 {
        match self {
            Sector::Full | Sector::Symmetric => 1.0,
            Sector::Antisymmetric => p.sign() as f64,
        }
    }
}

/// Bijection on `{0, …, n−1}`. The permutation sends tensor factor `j` to slot
/// `mapping[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::Contract(format!("{mapping:?} is not a bijection")));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::Index { index: a.max(b), len: n });
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(a, b);
        Ok(Self { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.mapping[j]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::Shape("composing permutations of different length".into()));
        }
        Ok(Permutation { mapping: other.mapping.iter().map(|&j| self.mapping[j]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (j, &m) in self.mapping.iter().enumerate() {
            inv[m] = j;
        }
        Permutation { mapping: inv }
    }

    pub fn sign(&self) -> i32 {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut sign = 1;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !visited[j] {
                visited[j] = true;
                j = self.mapping[j];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// All `n!` permutations in lexicographic order of their mappings.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation { mapping: current.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }

    /// Index map on `⊗ⁿ C^d`: basis index `i` is sent to `map[i]`.
    fn index_map(&self, d: usize) -> Vec<usize> {
        let n = self.len();
        let total = d.pow(n as u32);
        (0..total)
            .map(|i| {
                let inp = digits(i, d, n);
                let mut out = vec![0; n];
                for (j, &level) in inp.iter().enumerate() {
                    out[self.mapping[j]] = level;
                }
                out.iter().fold(0, |acc, &l| acc * d + l)
            })
            .collect()
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENUMERATED_PARTICLES {
        return Err(Error::Contract(format!(
            "permutation enumeration supports 1..={MAX_ENUMERATED_PARTICLES} factors, got {n}"
        )));
    }
    Ok(())
}

/// `U_π` on `⊗ⁿ C^d`: `U(v₀⊗…⊗vₙ₋₁) = v_{π⁻¹(0)}⊗…⊗v_{π⁻¹(n−1)}`.
pub fn permutation_operator(p: &Permutation, d: usize) -> Result<Operator> {
    let n = p.len();
    if n == 0 {
        return Err(Error::Contract("permutation of zero factors".into()));
    }
    check_capacity(d.checked_pow(n as u32).unwrap_or(usize::MAX))?;
    let map = p.index_map(d);
    let total = map.len();
    let mut m = Matrix::zeros(total, total);
    for (i, &out) in map.iter().enumerate() {
        m[(out, i)] = ONE;
    }
    Operator::new(m, vec![d; n])
}

/// `U_π v` computed by index shuffling.
pub fn permute_vector(v: &Vector, p: &Permutation, d: usize) -> Vector {
    let map = p.index_map(d);
    let mut out = Vector::zeros(v.len());
    for (i, &o) in map.iter().enumerate() {
        out[o] = v[i];
    }
    out
}

/// Largest `‖U_π v − χ(π) v‖` over all permutations, where `χ` is the
/// sector's character (1 or the sign). Zero for the full sector.
pub fn sector_deviation(v: &Vector, d: usize, n: usize, sector: Sector) -> f64 {
    if sector == Sector::Full {
        return 0.0;
    }
    if check_enumerable(n).is_err() {
        return f64::INFINITY;
    }
    Permutation::all(n)
        .iter()
        .map(|p| (permute_vector(v, p, d) - v * c(sector.character(p), 0.0)).norm())
        .fold(0.0, f64::max)
}

/// `(1/n!) Σ_π χ(π) U_π v`.
pub fn project_vector(v: &Vector, d: usize, n: usize, sector: Sector) -> Result<Vector> {
    if sector == Sector::Full {
        return Ok(v.clone());
    }
    check_enumerable(n)?;
    let perms = Permutation::all(n);
    let mut acc = Vector::zeros(v.len());
    for p in &perms {
        acc += permute_vector(v, p, d) * c(sector.character(p), 0.0);
    }
    Ok(acc.unscale(perms.len() as f64))
}

/// A sector projector together with whether it is the zero operator.
#[derive(Clone, Debug)]
pub struct SectorProjector {
    pub sector: Sector,
    pub operator: Operator,
    /// Set when the projector vanishes identically (antisymmetrizing more
    /// factors than the single-particle dimension).
    pub empty: bool,
}

impl SectorProjector {
    pub fn into_operator(self) -> Operator {
        self.operator
    }
}

fn sector_projector(d: usize, n: usize, sector: Sector) -> Result<SectorProjector> {
    check_enumerable(n)?;
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    check_capacity(total)?;
    let perms = Permutation::all(n);
    let mut m = Matrix::zeros(total, total);
    for p in &perms {
        let chi = c(sector.character(p), 0.0);
        for (i, &o) in p.index_map(d).iter().enumerate() {
            m[(o, i)] += chi;
        }
    }
    m.unscale_mut(perms.len() as f64);
    let empty = m.iter().all(|z| z.norm() < EMPTY_SECTOR_TOL);
    let operator = Operator::hermitian(m, vec![d; n])?;
    Ok(SectorProjector { sector, operator, empty })
}

/// `(1/n!) Σ_π U_π`.
pub fn symmetrizer(d: usize, n: usize) -> Result<SectorProjector> {
    sector_projector(d, n, Sector::Symmetric)
}

/// `(1/n!) Σ_π sgn(π) U_π`; empty when `n > d`.
pub fn antisymmetrizer(d: usize, n: usize) -> Result<SectorProjector> {
    sector_projector(d, n, Sector::Antisymmetric)
}

pub fn projector(d: usize, n: usize, sector: Sector) -> Result<SectorProjector> {
    match sector {
        Sector::Full => Ok(SectorProjector {
            sector,
            operator: Operator::identity(&vec![d; n])?,
            empty: false,
        }),
        s => sector_projector(d, n, s),
    }
}

/// Projects every component into `sector` and renormalizes.
///
/// Mixture weights are rescaled by the surviving probability of each
/// component; components that project to zero are dropped.
pub fn project_to_sector(state: &AssemblyState, sector: Sector) -> Result<AssemblyState> {
    let d = state.homogeneous_dim().ok_or_else(|| {
        Error::Contract("sector projection needs equal factor dimensions".into())
    })?;
    let n = state.n_factors();
    let mut projected = Vec::new();
    for (p, v) in state.components() {
        let w = project_vector(v, d, n, sector)?;
        let norm = w.norm();
        if norm >= EMPTY_SECTOR_TOL {
            projected.push((p * norm * norm, w.unscale(norm)));
        }
    }
    let total: f64 = projected.iter().map(|(p, _)| p).sum();
    if projected.is_empty() || total.sqrt() < EMPTY_SECTOR_TOL {
        return Err(Error::EmptySector(sector.to_string()));
    }
    let kind = match state.kind() {
        StateKind::Pure(_) => StateKind::Pure(projected.remove(0).1),
        StateKind::Mixed(_) => {
            StateKind::Mixed(projected.into_iter().map(|(p, v)| (p / total, v)).collect())
        }
    };
    state.with_kind(kind, sector)
}

/// Largest entrywise deviation `|U_π O U_π⁻¹ − O|` over all permutations.
/// `None` when the dimensions are not homogeneous.
pub fn permutation_deviation(o: &Operator) -> Option<f64> {
    let d = o.homogeneous_dim()?;
    let n = o.n_factors();
    if check_enumerable(n).is_err() {
        return None;
    }
    let m = o.matrix();
    let side = o.side();
    let mut worst: f64 = 0.0;
    for p in Permutation::all(n).iter().skip(1) {
        let map = p.index_map(d);
        // (U O U⁻¹)[map[i], map[j]] = O[i, j]
        for j in 0..side {
            for i in 0..side {
                worst = worst.max((m[(map[i], map[j])] - m[(i, j)]).norm());
            }
        }
    }
    Some(worst)
}

/// Indistinguishability test: `U_π O U_π⁻¹ = O` for every permutation of the
/// factors, within `tol` scaled by the largest entry of `O`.
pub fn is_permutation_invariant(o: &Operator, tol: Tolerance) -> bool {
    match permutation_deviation(o) {
        Some(dev) => dev <= tol.bound(o.max_abs_entry()),
        None => false,
    }
}

/// `U_π O U_π⁻¹` as an explicit matrix product.
pub fn conjugate(o: &Operator, p: &Permutation) -> Result<Operator> {
    let d = o
        .homogeneous_dim()
        .ok_or_else(|| Error::Contract("conjugation needs equal factor dimensions".into()))?;
    if p.len() != o.n_factors() {
        return Err(Error::Shape("permutation length differs from factor count".into()));
    }
    let u = permutation_operator(p, d)?;
    let u_inv = permutation_operator(&p.inverse(), d)?;
    u.compose(o)?.compose(&u_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_vector, embed_single, max_abs_diff, partial_trace, tensor, ZERO};

    #[test]
    fn identity_permutation_operator() {
        let u = permutation_operator(&Permutation::identity(3), 2).unwrap();
        assert_eq!(u.matrix(), &Matrix::identity(8, 8));
    }

    #[test]
    fn swap_moves_factors() {
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        let u = permutation_operator(&swap, 2).unwrap();
        let v01 = basis_vector(&[2, 2], &[0, 1]).unwrap();
        let v10 = basis_vector(&[2, 2], &[1, 0]).unwrap();
        assert_eq!(u.apply(&v01).unwrap(), v10);
    }

    #[test]
    fn three_cycle_places_factor_j_at_slot_pj() {
        // factor 0 -> slot 1, factor 1 -> slot 2, factor 2 -> slot 0
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let u = permutation_operator(&p, 3).unwrap();
        let v = basis_vector(&[3, 3, 3], &[0, 1, 2]).unwrap();
        let expected = basis_vector(&[3, 3, 3], &[2, 0, 1]).unwrap();
        assert_eq!(u.apply(&v).unwrap(), expected);
    }

    #[test]
    fn swap_conjugation_moves_embedding() {
        let a = Operator::hermitian(
            Matrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, -0.7), c(0.1, 0.7), c(-1.2, 0.0)]),
            vec![2],
        )
        .unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        let conj = conjugate(&embed_single(&a, 0, 2).unwrap(), &swap).unwrap();
        let expected = embed_single(&a, 1, 2).unwrap();
        assert!(max_abs_diff(conj.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn permutation_basics() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::transposition(3, 0, 2).unwrap().sign(), -1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().sign(), 1);
        let p = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(4));
    }

    #[test]
    fn antisymmetrizer_two_qubits_is_singlet_projector() {
        let a = antisymmetrizer(2, 2).unwrap();
        assert!(!a.empty);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Vector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO]);
        let outer = &singlet * singlet.adjoint();
        assert!(max_abs_diff(a.operator.matrix(), &outer) < 1e-15);
    }

    #[test]
    fn single_particle_symmetrizer_is_identity() {
        for d in 1..5 {
            let sym = symmetrizer(d, 1).unwrap();
            assert_eq!(sym.operator.matrix(), &Matrix::identity(d, d));
        }
    }

    #[test]
    fn pauli_exclusion_at_dimension_limit() {
        let a = antisymmetrizer(2, 3).unwrap();
        assert!(a.empty);
        assert_eq!(a.operator.max_abs_entry(), 0.0);
    }

    #[test]
    fn projectors_idempotent_and_orthogonal() {
        for (d, n) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
            let s = symmetrizer(d, n).unwrap().operator;
            let a = antisymmetrizer(d, n).unwrap().operator;
            assert!(max_abs_diff(s.square().matrix(), s.matrix()) < 1e-12);
            assert!(max_abs_diff(a.square().matrix(), a.matrix()) < 1e-12);
            assert!(s.compose(&a).unwrap().max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn homomorphism() {
        let perms = Permutation::all(3);
        for p in &perms {
            for q in &perms {
                let lhs = permutation_operator(&p.compose(q).unwrap(), 2).unwrap();
                let rhs = permutation_operator(p, 2).unwrap().compose(&permutation_operator(q, 2).unwrap()).unwrap();
                assert_eq!(lhs.matrix(), rhs.matrix());
            }
        }
    }

    #[test]
    fn project_product_state() {
        let v = basis_vector(&[2, 2], &[0, 1]).unwrap();
        let st = AssemblyState::pure(v, vec![2, 2], Sector::Full).unwrap();
        let anti = project_to_sector(&st, Sector::Antisymmetric).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Vector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO]);
        let StateKind::Pure(w) = anti.kind() else { panic!() };
        assert!((w - &singlet).norm() < 1e-15);
        assert_eq!(anti.sector(), Sector::Antisymmetric);

        let sym = project_to_sector(&st, Sector::Symmetric).unwrap();
        let again = project_to_sector(&sym, Sector::Symmetric).unwrap();
        let (StateKind::Pure(a), StateKind::Pure(b)) = (sym.kind(), again.kind()) else { panic!() };
        assert!((a - b).norm() < 1e-15);

        let v = basis_vector(&[2, 2], &[0, 0]).unwrap();
        let st = AssemblyState::pure(v, vec![2, 2], Sector::Full).unwrap();
        assert!(matches!(project_to_sector(&st, Sector::Antisymmetric), Err(Error::EmptySector(_))));
    }

    #[test]
    fn invariance_of_embeddings() {
        let sz = Operator::diagonal(&[1.0, -1.0]).unwrap();
        let tol = Tolerance::default();
        assert!(!is_permutation_invariant(&embed_single(&sz, 0, 2).unwrap(), tol));
        let id = Operator::identity(&[2]).unwrap();
        assert!(is_permutation_invariant(&embed_single(&id, 0, 2).unwrap(), tol));
        let zz = tensor(&sz, &sz).unwrap();
        assert!(is_permutation_invariant(&zz, tol));
    }

    #[test]
    fn symmetric_sector_reductions_agree() {
        let s = 0.5;
        let v = Vector::from_vec(vec![c(0.5, 0.1).unscale(1.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.3)]);
        let st = AssemblyState::pure_normalized(v, vec![2, 2], Sector::Symmetric).unwrap();
        let r0 = partial_trace(&st, 0).unwrap();
        let r1 = partial_trace(&st, 1).unwrap();
        assert!(max_abs_diff(r0.matrix(), r1.matrix()) < 1e-12);
    }
}
