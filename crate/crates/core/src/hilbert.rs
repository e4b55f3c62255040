//! Dense tensor-product linear algebra: operators on `H ⊗ … ⊗ H`, pure and
//! mixed assembly states, partial traces, Born-rule expectations and the
//! eigenstate test used by the strong property postulate.
//!
//! Amplitudes are stored row-major with the last tensor factor varying
//! fastest, so the basis vector `|i₀ i₁ … iₙ₋₁⟩` sits at index
//! `((i₀·d₁ + i₁)·d₂ + …)·dₙ₋₁ + iₙ₋₁`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetry::{self, Sector};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Largest total Hilbert-space dimension any operator may have.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Entrywise tolerance for the hermiticity and unit-norm invariants.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Imaginary residue of an expectation value tolerated before it is
/// reported as a numerical failure.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol.is_finite() && rel_tol.is_finite()) || abs_tol < 0.0 || rel_tol < 0.0 {
            return Err(Error::Contract(format!(
                "tolerances must be finite and non-negative (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    pub fn absolute(abs_tol: f64) -> Result<Self> {
        Self::new(abs_tol, 0.0)
    }

    /// Admissible error for a quantity whose natural magnitude is `scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale.abs()
    }
}

/// Dense square operator on a tensor product of factors with dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: Matrix,
    dims: Vec<usize>,
    hermitian_hint: Option<bool>,
    embedded_slot: Option<usize>,
}

pub(crate) fn check_capacity(total: usize) -> Result<()> {
    if total > MAX_TOTAL_DIM {
        Err(Error::Capacity { requested: total, max: MAX_TOTAL_DIM })
    } else {
        Ok(())
    }
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::Shape("factor dimensions must be positive".into()));
        }
        total = total
            .checked_mul(d)
            .ok_or(Error::Capacity { requested: usize::MAX, max: MAX_TOTAL_DIM })?;
    }
    if dims.is_empty() {
        return Err(Error::Shape("at least one tensor factor is required".into()));
    }
    check_capacity(total)?;
    Ok(total)
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

impl Operator {
    pub fn new(matrix: Matrix, dims: Vec<usize>) -> Result<Self> {
        let total = total_dim(&dims)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape(format!(
                "operator matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != total {
            return Err(Error::Shape(format!(
                "matrix side {} does not match factor dimensions {:?}",
                matrix.nrows(),
                dims
            )));
        }
        Ok(Self { matrix, dims, hermitian_hint: None, embedded_slot: None })
    }

    /// Like [`Operator::new`] but additionally verifies `matrix = matrix†`
    /// within `1e-12` entrywise.
    pub fn hermitian(matrix: Matrix, dims: Vec<usize>) -> Result<Self> {
        let mut op = Self::new(matrix, dims)?;
        let dev = max_abs_diff(&op.matrix, &op.matrix.adjoint());
        if dev > STRUCTURAL_TOL {
            return Err(Error::Contract(format!("operator is not hermitian (deviation {dev:e})")));
        }
        op.hermitian_hint = Some(true);
        Ok(op)
    }

    pub fn single(matrix: Matrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, vec![d])
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let total = total_dim(dims)?;
        Ok(Self {
            matrix: Matrix::identity(total, total),
            dims: dims.to_vec(),
            hermitian_hint: Some(true),
            embedded_slot: None,
        })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let total = total_dim(dims)?;
        Ok(Self {
            matrix: Matrix::zeros(total, total),
            dims: dims.to_vec(),
            hermitian_hint: Some(true),
            embedded_slot: None,
        })
    }

    /// Single-factor operator with the given real diagonal.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let v = Vector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        let mut op = Self::new(Matrix::from_diagonal(&v), vec![values.len()])?;
        op.hermitian_hint = Some(true);
        Ok(op)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    /// Slot this operator was embedded into by [`embed_single`], if any.
    /// Such operators act on one labelled factor and are never symmetric
    /// unless the embedded operator is a scalar.
    pub fn embedded_slot(&self) -> Option<usize> {
        self.embedded_slot
    }

    /// Factor dimension when every factor has the same dimension.
    pub fn homogeneous_dim(&self) -> Option<usize> {
        homogeneous(&self.dims)
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Cheap upper bound on the operator norm: `max|entry| · side`.
    pub fn norm_bound(&self) -> f64 {
        self.max_abs_entry() * self.side() as f64
    }

    /// Spectral norm from the singular values.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.clone().singular_values().iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs_diff(&self.matrix, &self.matrix.adjoint()) <= tol
    }

    fn hermitian_within_default(&self) -> bool {
        if self.hermitian_hint == Some(true) {
            return true;
        }
        self.is_hermitian(1e-10 * self.max_abs_entry().max(1.0))
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            matrix: &self.matrix * c(factor, 0.0),
            dims: self.dims.clone(),
            hermitian_hint: self.hermitian_hint,
            embedded_slot: self.embedded_slot,
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Operator {
        Operator {
            matrix: &self.matrix * factor,
            dims: self.dims.clone(),
            hermitian_hint: None,
            embedded_slot: self.embedded_slot,
        }
    }

    fn check_same_dims(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "factor dimensions differ: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    fn derived(&self, matrix: Matrix, hermitian: Option<bool>) -> Operator {
        Operator { matrix, dims: self.dims.clone(), hermitian_hint: hermitian, embedded_slot: None }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dims(other)?;
        let herm = both_hermitian(self, other);
        Ok(self.derived(&self.matrix + &other.matrix, herm))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dims(other)?;
        let herm = both_hermitian(self, other);
        Ok(self.derived(&self.matrix - &other.matrix, herm))
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dims(other)?;
        Ok(self.derived(&self.matrix * &other.matrix, None))
    }

    pub fn square(&self) -> Operator {
        let herm = if self.hermitian_hint == Some(true) { Some(true) } else { None };
        self.derived(&self.matrix * &self.matrix, herm)
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.side() {
            return Err(Error::Shape(format!(
                "vector length {} does not match operator side {}",
                v.len(),
                self.side()
            )));
        }
        Ok(&self.matrix * v)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Real eigenvalues in ascending order (hermitian operators only).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.hermitian_within_default() {
            return Err(Error::Contract("eigenvalues requested for a non-hermitian operator".into()));
        }
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Eigen-decomposition `(ascending eigenvalues, eigenvectors as columns)`.
    pub fn eigen(&self) -> Result<(Vec<f64>, Matrix)> {
        if !self.hermitian_within_default() {
            return Err(Error::Contract("eigen-decomposition of a non-hermitian operator".into()));
        }
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let n = self.side();
        let mut vectors = Matrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        Ok((values, vectors))
    }

    /// Whether the operator is `c·I` for some scalar `c`, within `tol`.
    pub fn proportional_to_identity(&self, tol: f64) -> Option<C64> {
        let n = self.side();
        let c0 = self.matrix.trace() / c(n as f64, 0.0);
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { c0 } else { ZERO };
                dev = dev.max((self.matrix[(i, j)] - target).norm());
            }
        }
        (dev <= tol).then_some(c0)
    }
}

fn both_hermitian(a: &Operator, b: &Operator) -> Option<bool> {
    (a.hermitian_hint == Some(true) && b.hermitian_hint == Some(true)).then_some(true)
}

pub(crate) fn homogeneous(dims: &[usize]) -> Option<usize> {
    let first = *dims.first()?;
    dims.iter().all(|&d| d == first).then_some(first)
}

/// Kronecker product `a ⊗ b`; the factor lists are concatenated.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    let total = a.side().checked_mul(b.side()).unwrap_or(usize::MAX);
    check_capacity(total)?;
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Ok(Operator {
        matrix: a.matrix.kronecker(&b.matrix),
        dims,
        hermitian_hint: both_hermitian(a, b),
        embedded_slot: None,
    })
}

/// Tensor product of a list of operators, left to right.
pub fn tensor_all(ops: &[&Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Shape("tensor product of an empty list".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, op| tensor(&acc, op))
}

pub fn adjoint(a: &Operator) -> Operator {
    Operator {
        matrix: a.matrix.adjoint(),
        dims: a.dims.clone(),
        hermitian_hint: a.hermitian_hint,
        embedded_slot: a.embedded_slot,
    }
}

/// `ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_dims(b)?;
    Ok(a.derived(&a.matrix * &b.matrix - &b.matrix * &a.matrix, None))
}

/// `1 ⊗ … ⊗ a ⊗ … ⊗ 1` with `a` in position `slot` of `n_factors`.
pub fn embed_single(a: &Operator, slot: usize, n_factors: usize) -> Result<Operator> {
    if slot >= n_factors {
        return Err(Error::Index { index: slot, len: n_factors });
    }
    let d = a.side();
    let total = d.checked_pow(n_factors as u32).unwrap_or(usize::MAX);
    check_capacity(total)?;
    let left = d.pow(slot as u32);
    let right = d.pow((n_factors - slot - 1) as u32);
    let matrix = Matrix::identity(left, left)
        .kronecker(&a.matrix)
        .kronecker(&Matrix::identity(right, right));
    Ok(Operator {
        matrix,
        dims: vec![d; n_factors],
        hermitian_hint: a.hermitian_hint,
        embedded_slot: Some(slot),
    })
}

/// `a` in slot `i` and `b` in slot `j` (`i ≠ j`), identity elsewhere; equal to
/// `embed_single(a, i, n) · embed_single(b, j, n)` but built without a matmul.
pub fn embed_pair(a: &Operator, i: usize, b: &Operator, j: usize, n_factors: usize) -> Result<Operator> {
    if i >= n_factors {
        return Err(Error::Index { index: i, len: n_factors });
    }
    if j >= n_factors {
        return Err(Error::Index { index: j, len: n_factors });
    }
    if i == j {
        return Err(Error::Contract("embed_pair requires two distinct slots".into()));
    }
    if a.side() != b.side() {
        return Err(Error::Shape("embed_pair factors must have equal dimension".into()));
    }
    let d = a.side();
    check_capacity(d.checked_pow(n_factors as u32).unwrap_or(usize::MAX))?;
    let id = Matrix::identity(d, d);
    let mut matrix = Matrix::identity(1, 1);
    for slot in 0..n_factors {
        let m = if slot == i {
            &a.matrix
        } else if slot == j {
            &b.matrix
        } else {
            &id
        };
        matrix = matrix.kronecker(m);
    }
    Ok(Operator { matrix, dims: vec![d; n_factors], hermitian_hint: None, embedded_slot: None })
}

/// Pure vector or explicit convex combination of pure vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    Pure(Vector),
    Mixed(Vec<(f64, Vector)>),
}

/// State of an assembly on `⊗ dims`, tagged with the symmetry sector it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyState {
    kind: StateKind,
    dims: Vec<usize>,
    sector: Sector,
}

/// Tolerance for the sector-membership invariant of tagged states.
pub const SECTOR_TOL: f64 = 1e-10;

fn check_unit(v: &Vector, what: &str) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::Validation {
            invariant: "unit-norm".into(),
            detail: format!("{what} has norm {norm:.17}"),
        });
    }
    Ok(())
}

impl AssemblyState {
    pub fn pure(vector: Vector, dims: Vec<usize>, sector: Sector) -> Result<Self> {
        Self::build(StateKind::Pure(vector), dims, sector)
    }

    pub fn mixed(components: Vec<(f64, Vector)>, dims: Vec<usize>, sector: Sector) -> Result<Self> {
        Self::build(StateKind::Mixed(components), dims, sector)
    }

    /// Normalizes `vector` before building a pure state.
    pub fn pure_normalized(vector: Vector, dims: Vec<usize>, sector: Sector) -> Result<Self> {
        let norm = vector.norm();
        if norm < 1e-300 {
            return Err(Error::Contract("cannot normalize the zero vector".into()));
        }
        Self::pure(vector.unscale(norm), dims, sector)
    }

    fn build(kind: StateKind, dims: Vec<usize>, sector: Sector) -> Result<Self> {
        let total = total_dim(&dims)?;
        match &kind {
            StateKind::Pure(v) => {
                if v.len() != total {
                    return Err(Error::Shape(format!(
                        "state vector has {} amplitudes, dims {:?} require {}",
                        v.len(),
                        dims,
                        total
                    )));
                }
                check_unit(v, "pure state")?;
            }
            StateKind::Mixed(components) => {
                if components.is_empty() {
                    return Err(Error::Validation {
                        invariant: "mixture-nonempty".into(),
                        detail: "mixed state needs at least one component".into(),
                    });
                }
                let mut sum = 0.0;
                for (k, (p, v)) in components.iter().enumerate() {
                    if !(*p > 0.0) || !p.is_finite() {
                        return Err(Error::Validation {
                            invariant: "positive-weights".into(),
                            detail: format!("component {k} has weight {p}"),
                        });
                    }
                    if v.len() != total {
                        return Err(Error::Shape(format!(
                            "component {k} has {} amplitudes, dims {:?} require {}",
                            v.len(),
                            dims,
                            total
                        )));
                    }
                    check_unit(v, &format!("component {k}"))?;
                    sum += p;
                }
                if (sum - 1.0).abs() > STRUCTURAL_TOL {
                    return Err(Error::Validation {
                        invariant: "weights-sum-to-one".into(),
                        detail: format!("weights sum to {sum:.17}"),
                    });
                }
            }
        }
        let state = Self { kind, dims, sector };
        if sector != Sector::Full {
            let d = homogeneous(&state.dims).ok_or_else(|| Error::Validation {
                invariant: "sector".into(),
                detail: "symmetry sectors need equal factor dimensions".into(),
            })?;
            for (_, v) in state.components() {
                let dev = symmetry::sector_deviation(v, d, state.dims.len(), sector);
                if dev > SECTOR_TOL {
                    return Err(Error::Validation {
                        invariant: "sector".into(),
                        detail: format!("state tagged {sector} deviates by {dev:e} under permutation"),
                    });
                }
            }
        }
        Ok(state)
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn homogeneous_dim(&self) -> Option<usize> {
        homogeneous(&self.dims)
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, StateKind::Pure(_))
    }

    /// `(weight, vector)` pairs; a pure state yields a single pair of weight 1.
    pub fn components(&self) -> Vec<(f64, &Vector)> {
        match &self.kind {
            StateKind::Pure(v) => vec![(1.0, v)],
            StateKind::Mixed(cs) => cs.iter().map(|(p, v)| (*p, v)).collect(),
        }
    }

    /// `ρ = Σ pᵢ |ψᵢ⟩⟨ψᵢ|`.
    pub fn density_matrix(&self) -> Matrix {
        let n = self.total_dim();
        let mut rho = Matrix::zeros(n, n);
        for (p, v) in self.components() {
            rho += (v * v.adjoint()) * c(p, 0.0);
        }
        rho
    }

    pub(crate) fn with_kind(&self, kind: StateKind, sector: Sector) -> Result<Self> {
        Self::build(kind, self.dims.clone(), sector)
    }
}

fn check_state_dims(state: &AssemblyState, o: &Operator) -> Result<()> {
    if state.dims() != o.dims() {
        return Err(Error::Shape(format!(
            "state dims {:?} do not match operator dims {:?}",
            state.dims(),
            o.dims()
        )));
    }
    Ok(())
}

/// Reduced density operator of factor `keep`.
pub fn partial_trace(state: &AssemblyState, keep: usize) -> Result<Operator> {
    let dims = state.dims();
    if dims.len() < 2 {
        return Err(Error::Contract("partial trace needs at least two factors".into()));
    }
    if keep >= dims.len() {
        return Err(Error::Index { index: keep, len: dims.len() });
    }
    let d = dims[keep];
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    let mut reduced = Matrix::zeros(d, d);
    for (p, v) in state.components() {
        for a in 0..d {
            for b in 0..d {
                let mut acc = ZERO;
                for l in 0..left {
                    for r in 0..right {
                        let ia = (l * d + a) * right + r;
                        let ib = (l * d + b) * right + r;
                        acc += v[ia] * v[ib].conj();
                    }
                }
                reduced[(a, b)] += acc * c(p, 0.0);
            }
        }
    }
    let mut op = Operator::new(reduced, vec![d])?;
    op.hermitian_hint = Some(true);
    Ok(op)
}

fn real_part_checked(z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(Error::NumericalIntegrity(format!(
            "expectation has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn require_hermitian(o: &Operator) -> Result<()> {
    if !o.hermitian_within_default() {
        return Err(Error::Contract("expectation of a non-hermitian operator".into()));
    }
    Ok(())
}

/// Born-rule expectation `Tr(ρO)`.
///
/// Pure states use `⟨ψ|O|ψ⟩`; mixtures materialize `ρ` and take the trace.
pub fn expectation(state: &AssemblyState, o: &Operator) -> Result<f64> {
    require_hermitian(o)?;
    check_state_dims(state, o)?;
    let z = match state.kind() {
        StateKind::Pure(v) => v.dotc(&(o.matrix() * v)),
        StateKind::Mixed(_) => {
            let rho = state.density_matrix();
            // Tr(ρO) = Σᵢⱼ ρᵢⱼ Oⱼᵢ
            let m = o.matrix();
            let n = rho.nrows();
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    acc += rho[(i, j)] * m[(j, i)];
                }
            }
            acc
        }
    };
    real_part_checked(z)
}

/// `Σᵢ pᵢ ⟨ψᵢ|O|ψᵢ⟩`, evaluated component by component.
pub fn expectation_componentwise(state: &AssemblyState, o: &Operator) -> Result<f64> {
    require_hermitian(o)?;
    check_state_dims(state, o)?;
    let mut acc = ZERO;
    for (p, v) in state.components() {
        acc += v.dotc(&(o.matrix() * v)) * c(p, 0.0);
    }
    real_part_checked(acc)
}

/// Largest `‖Oψ − λψ‖` over the pure components of the state.
pub fn eigen_residual(o: &Operator, state: &AssemblyState, eigenvalue: f64) -> Result<f64> {
    check_state_dims(state, o)?;
    let lambda = c(eigenvalue, 0.0);
    Ok(state
        .components()
        .into_iter()
        .map(|(_, v)| (o.matrix() * v - v * lambda).norm())
        .fold(0.0, f64::max))
}

/// Strong-property-postulate test: every pure component of the state is an
/// eigenvector of `o` with eigenvalue `eigenvalue`, residual within
/// `tol.bound(eigenvalue)`.
pub fn is_eigenstate(o: &Operator, state: &AssemblyState, eigenvalue: f64, tol: Tolerance) -> Result<bool> {
    if !o.hermitian_within_default() {
        return Err(Error::Contract("eigenstate test needs a hermitian operator".into()));
    }
    Ok(eigen_residual(o, state, eigenvalue)? <= tol.bound(eigenvalue))
}

/// Computational basis vector `|levels⟩` for the given factor dimensions.
pub fn basis_vector(dims: &[usize], levels: &[usize]) -> Result<Vector> {
    if dims.len() != levels.len() {
        return Err(Error::Shape("levels and dims differ in length".into()));
    }
    let total = total_dim(dims)?;
    let mut index = 0usize;
    for (&l, &d) in levels.iter().zip(dims) {
        if l >= d {
            return Err(Error::Index { index: l, len: d });
        }
        index = index * d + l;
    }
    let mut v = Vector::zeros(total);
    v[index] = ONE;
    Ok(v)
}

/// Multi-index of `index` over `n` factors of dimension `d` (last fastest).
pub(crate) fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in (0..n).rev() {
        out[slot] = index % d;
        index /= d;
    }
    out
}
