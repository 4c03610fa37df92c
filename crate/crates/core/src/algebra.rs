//! Finite-dimensional *-algebras realized inside d×d complex matrices with a
//! weighted trace, and their elements.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::Value;
use thiserror::Error;

use crate::linalg::{self, frobenius, CMat, HermitianEig, LinalgError};
use crate::two_box::PermutationAction;

/// Default relative threshold for numerical rank.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Relative membership tolerance for non-projected constructors.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("elements belong to different algebras ({left} vs {right})")]
    AlgebraMismatch { left: String, right: String },
    #[error("element is not self-adjoint (relative residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid exponent {0}; need p >= 1 or p = inf")]
    InvalidExponent(f64),
    #[error("matrix is not in algebra {label} (relative residual {residual:e})")]
    NotInAlgebra { label: String, residual: f64 },
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("trace scale must be positive, got {0}")]
    BadTraceScale(f64),
    #[error("non-finite entry in element data")]
    NonFinite,
    #[error("bad element literal: {0}")]
    Literal(String),
}

impl From<LinalgError> for AlgebraError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotSelfAdjoint { residual } => AlgebraError::NotSelfAdjoint { residual },
            LinalgError::NoConvergence { sweeps } => AlgebraError::NoConvergence { sweeps },
            LinalgError::NotSquare { rows, cols } => AlgebraError::DimensionMismatch { expected: rows, found: cols },
        }
    }
}

/// A basis of 0/1 matrices with pairwise disjoint supports. Coordinates of a
/// matrix are the averages of its entries over each support, which is the
/// orthogonal projection onto the span.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    supports: Vec<Vec<(usize, usize)>>,
}

impl Basis {
    pub fn new(supports: Vec<Vec<(usize, usize)>>) -> Self {
        Basis { supports }
    }

    /// Matrix units E_ij in row-major order.
    pub fn full(d: usize) -> Self {
        Basis { supports: (0..d * d).map(|k| vec![(k / d, k % d)]).collect() }
    }

    pub fn diagonal(d: usize) -> Self {
        Basis { supports: (0..d).map(|i| vec![(i, i)]).collect() }
    }

    /// Orbits of (i, j) ↦ (g·i, g·j), ordered by smallest row-major position.
    pub fn pair_orbits(action: &PermutationAction) -> Self {
        let n = action.point_count();
        let mut seen = vec![false; n * n];
        let mut supports = Vec::new();
        for start in 0..n * n {
            if seen[start] {
                continue;
            }
            let (i, j) = (start / n, start % n);
            let mut orbit: Vec<(usize, usize)> = action
                .perms()
                .iter()
                .map(|p| (p[i], p[j]))
                .collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &(a, b) in &orbit {
                seen[a * n + b] = true;
            }
            supports.push(orbit);
        }
        Basis { supports }
    }

    /// Orbits of the points of `action`, placed on the diagonal.
    pub fn point_orbits(action: &PermutationAction) -> Self {
        let supports = action
            .orbits()
            .into_iter()
            .map(|o| o.into_iter().map(|i| (i, i)).collect())
            .collect();
        Basis { supports }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn support(&self, k: usize) -> &[(usize, usize)] {
        &self.supports[k]
    }

    pub fn supports(&self) -> &[Vec<(usize, usize)>] {
        &self.supports
    }
}

#[derive(Clone)]
pub enum AlgebraKind {
    Diagonal,
    Full,
    /// Matrices commuting with every permutation matrix of the action.
    Commutant(Arc<PermutationAction>),
    /// Diagonal matrices constant on the orbits of the action.
    InvariantDiagonal(Arc<PermutationAction>),
}

impl fmt::Debug for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraKind::Diagonal => write!(f, "Diagonal"),
            AlgebraKind::Full => write!(f, "Full"),
            AlgebraKind::Commutant(a) => write!(f, "Commutant({} points)", a.point_count()),
            AlgebraKind::InvariantDiagonal(a) => write!(f, "InvariantDiagonal({} points)", a.point_count()),
        }
    }
}

pub struct StarAlgebra {
    dim: usize,
    trace_scale: f64,
    kind: AlgebraKind,
    label: String,
    basis: Basis,
}

impl fmt::Debug for StarAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarAlgebra({}, d={}, c={}, {:?})", self.label, self.dim, self.trace_scale, self.kind)
    }
}

impl StarAlgebra {
    pub fn new(
        dim: usize,
        trace_scale: f64,
        kind: AlgebraKind,
        label: impl Into<String>,
        basis: Basis,
    ) -> Result<Arc<Self>, AlgebraError> {
        if !(trace_scale > 0.0 && trace_scale.is_finite()) {
            return Err(AlgebraError::BadTraceScale(trace_scale));
        }
        Ok(Arc::new(StarAlgebra { dim, trace_scale, kind, label: label.into(), basis }))
    }

    pub fn diagonal(dim: usize, trace_scale: f64, label: impl Into<String>) -> Result<Arc<Self>, AlgebraError> {
        Self::new(dim, trace_scale, AlgebraKind::Diagonal, label, Basis::diagonal(dim))
    }

    pub fn full(dim: usize, trace_scale: f64, label: impl Into<String>) -> Result<Arc<Self>, AlgebraError> {
        Self::new(dim, trace_scale, AlgebraKind::Full, label, Basis::full(dim))
    }

    pub fn commutant(
        action: Arc<PermutationAction>,
        trace_scale: f64,
        label: impl Into<String>,
    ) -> Result<Arc<Self>, AlgebraError> {
        let basis = Basis::pair_orbits(&action);
        Self::new(action.point_count(), trace_scale, AlgebraKind::Commutant(action), label, basis)
    }

    pub fn invariant_diagonal(
        action: Arc<PermutationAction>,
        trace_scale: f64,
        label: impl Into<String>,
    ) -> Result<Arc<Self>, AlgebraError> {
        let basis = Basis::point_orbits(&action);
        Self::new(action.point_count(), trace_scale, AlgebraKind::InvariantDiagonal(action), label, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace_scale(&self) -> f64 {
        self.trace_scale
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Number of coordinates.
    pub fn coord_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, AlgebraKind::Diagonal | AlgebraKind::InvariantDiagonal(_))
    }

    /// Trace of the identity, c·d.
    pub fn identity_trace(&self) -> f64 {
        self.trace_scale * self.dim as f64
    }

    fn same(&self, other: &StarAlgebra) -> bool {
        std::ptr::eq(self, other)
            || (self.label == other.label
                && self.dim == other.dim
                && self.trace_scale == other.trace_scale
                && self.basis == other.basis)
    }
}

#[derive(Clone, PartialEq)]
enum Data {
    Diag(Vec<Complex64>),
    Dense(CMat),
}

/// An element of a [`StarAlgebra`].
#[derive(Clone)]
pub struct AlgebraElement {
    alg: Arc<StarAlgebra>,
    data: Data,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement({}, {:?})", self.alg.label, self.to_dense())
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same(&other.alg) && self.data == other.data
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Singular values, left and right frames, grouped by multiplicity.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub left: CMat,
    pub right: CMat,
    /// Runs of equal values (within 1e-9·σ_max) as (value, first, count).
    pub groups: Vec<(f64, usize, usize)>,
    pub trace_scale: f64,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let mut r = CMat::zeros(self.left.nrows(), self.right.nrows());
        for (j, &s) in self.values.iter().enumerate() {
            if s > 0.0 {
                r += self.left.column(j) * self.right.column(j).adjoint() * Complex64::new(s, 0.0);
            }
        }
        r
    }
}

impl AlgebraElement {
    pub fn zero(alg: &Arc<StarAlgebra>) -> Self {
        let d = alg.dim;
        let data = if alg.is_diagonal() { Data::Diag(vec![czero(); d]) } else { Data::Dense(CMat::zeros(d, d)) };
        AlgebraElement { alg: alg.clone(), data }
    }

    pub fn identity(alg: &Arc<StarAlgebra>) -> Self {
        let d = alg.dim;
        let one = Complex64::new(1.0, 0.0);
        let data = if alg.is_diagonal() { Data::Diag(vec![one; d]) } else { Data::Dense(CMat::identity(d, d)) };
        AlgebraElement { alg: alg.clone(), data }
    }

    pub fn from_coords(alg: &Arc<StarAlgebra>, coords: &[Complex64]) -> Result<Self, AlgebraError> {
        if coords.len() != alg.coord_dim() {
            return Err(AlgebraError::DimensionMismatch { expected: alg.coord_dim(), found: coords.len() });
        }
        let mut x = Self::zero(alg);
        for (k, support) in alg.basis.supports.iter().enumerate() {
            for &(i, j) in support {
                x.set_entry(i, j, coords[k]);
            }
        }
        Ok(x)
    }

    /// Orthogonal projection of an arbitrary d×d matrix into the algebra.
    pub fn project(alg: &Arc<StarAlgebra>, m: &CMat) -> Result<Self, AlgebraError> {
        if m.nrows() != alg.dim || m.ncols() != alg.dim {
            return Err(AlgebraError::DimensionMismatch { expected: alg.dim, found: m.nrows() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        if let AlgebraKind::Full = alg.kind {
            return Ok(AlgebraElement { alg: alg.clone(), data: Data::Dense(m.clone()) });
        }
        let coords = coords_of_matrix(alg, |i, j| m[(i, j)]);
        Self::from_coords(alg, &coords)
    }

    /// Accept a matrix that lies in the algebra within the membership tolerance.
    pub fn from_matrix(alg: &Arc<StarAlgebra>, m: &CMat) -> Result<Self, AlgebraError> {
        let x = Self::project(alg, m)?;
        let residual = frobenius(&(m - x.to_dense()));
        let scale = frobenius(m);
        if residual > MEMBERSHIP_TOL * scale {
            return Err(AlgebraError::NotInAlgebra { label: alg.label.clone(), residual: residual / scale });
        }
        Ok(x)
    }

    /// Diagonal element from its diagonal entries.
    pub fn from_diagonal(alg: &Arc<StarAlgebra>, diag: &[Complex64]) -> Result<Self, AlgebraError> {
        if diag.len() != alg.dim {
            return Err(AlgebraError::DimensionMismatch { expected: alg.dim, found: diag.len() });
        }
        let m = CMat::from_diagonal(&DVector::from_column_slice(diag));
        Self::from_matrix(alg, &m)
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.alg.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.data {
            Data::Diag(v) => {
                if i == j {
                    v[i]
                } else {
                    czero()
                }
            }
            Data::Dense(m) => m[(i, j)],
        }
    }

    fn set_entry(&mut self, i: usize, j: usize, z: Complex64) {
        match &mut self.data {
            Data::Diag(v) => {
                debug_assert_eq!(i, j);
                v[i] = z;
            }
            Data::Dense(m) => m[(i, j)] = z,
        }
    }

    /// Diagonal entries when stored diagonally.
    pub fn diagonal_entries(&self) -> Option<&[Complex64]> {
        match &self.data {
            Data::Diag(v) => Some(v),
            Data::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> CMat {
        match &self.data {
            Data::Diag(v) => CMat::from_diagonal(&DVector::from_column_slice(v)),
            Data::Dense(m) => m.clone(),
        }
    }

    pub fn coords(&self) -> Vec<Complex64> {
        coords_of_matrix(&self.alg, |i, j| self.entry(i, j))
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.alg.same(&other.alg) {
            Ok(())
        } else {
            Err(AlgebraError::AlgebraMismatch { left: self.alg.label.clone(), right: other.alg.label.clone() })
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let data = match (&self.data, &other.data) {
            (Data::Diag(a), Data::Diag(b)) => Data::Diag(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()),
            (Data::Dense(a), Data::Dense(b)) => Data::Dense(a.zip_map(b, f)),
            _ => unreachable!("same algebra implies same storage"),
        };
        Ok(AlgebraElement { alg: self.alg.clone(), data })
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let data = match (&self.data, &other.data) {
            (Data::Diag(a), Data::Diag(b)) => Data::Diag(a.iter().zip(b).map(|(&x, &y)| x * y).collect()),
            (Data::Dense(a), Data::Dense(b)) => Data::Dense(a * b),
            _ => unreachable!("same algebra implies same storage"),
        };
        Ok(AlgebraElement { alg: self.alg.clone(), data })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = match &self.data {
            Data::Diag(a) => Data::Diag(a.iter().map(|&x| x * s).collect()),
            Data::Dense(a) => Data::Dense(a * s),
        };
        AlgebraElement { alg: self.alg.clone(), data }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let data = match &self.data {
            Data::Diag(a) => Data::Diag(a.iter().map(|x| x.conj()).collect()),
            Data::Dense(a) => Data::Dense(a.adjoint()),
        };
        AlgebraElement { alg: self.alg.clone(), data }
    }

    /// Plain matrix Frobenius norm (no trace weight).
    pub fn frobenius(&self) -> f64 {
        match &self.data {
            Data::Diag(a) => a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Data::Dense(a) => frobenius(a),
        }
    }

    /// Weighted trace c·Tr(x).
    pub fn trace(&self) -> Complex64 {
        let t: Complex64 = match &self.data {
            Data::Diag(a) => a.iter().sum(),
            Data::Dense(a) => a.trace(),
        };
        t * self.alg.trace_scale
    }

    /// ‖x‖₂ computed entrywise, √(c·Σ|x_ij|²).
    pub fn norm2(&self) -> f64 {
        self.alg.trace_scale.sqrt() * self.frobenius()
    }

    pub fn is_zero(&self) -> bool {
        self.frobenius() == 0.0
    }

    /// ‖x − y‖_F / max(‖x‖_F, ‖y‖_F), zero when both vanish.
    pub fn relative_distance(&self, other: &Self) -> Result<f64, AlgebraError> {
        let d = self.sub(other)?.frobenius();
        let s = self.frobenius().max(other.frobenius());
        Ok(if s == 0.0 { 0.0 } else { d / s })
    }

    /// ‖x − x*‖_F / ‖x‖_F.
    pub fn self_adjoint_residual(&self) -> f64 {
        let s = self.frobenius();
        if s == 0.0 {
            return 0.0;
        }
        self.sub(&self.adjoint()).expect("same algebra").frobenius() / s
    }

    /// max(‖x² − x‖_F, ‖x − x*‖_F); zero for an exact projection.
    pub fn projection_residual(&self) -> f64 {
        let sq = self.mul(self).expect("same algebra");
        let a = sq.sub(self).expect("same algebra").frobenius();
        let b = self.sub(&self.adjoint()).expect("same algebra").frobenius();
        a.max(b)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>, AlgebraError> {
        match &self.data {
            Data::Diag(a) => {
                let mut s: Vec<f64> = a.iter().map(|z| z.norm()).collect();
                s.sort_by(|x, y| y.total_cmp(x));
                Ok(s)
            }
            Data::Dense(a) => Ok(linalg::singular_values(a)?),
        }
    }

    pub fn spectral_decomposition(&self) -> Result<SpectralDecomposition, AlgebraError> {
        let d = self.alg.dim;
        let (values, left, right) = match &self.data {
            Data::Diag(a) => {
                let mut order: Vec<usize> = (0..d).collect();
                order.sort_by(|&i, &j| a[j].norm().total_cmp(&a[i].norm()).then(i.cmp(&j)));
                let mut left = CMat::zeros(d, d);
                let mut right = CMat::zeros(d, d);
                let mut values = Vec::with_capacity(d);
                for (col, &i) in order.iter().enumerate() {
                    let s = a[i].norm();
                    values.push(s);
                    right[(i, col)] = Complex64::new(1.0, 0.0);
                    left[(i, col)] = if s > 0.0 { a[i] / s } else { czero() };
                }
                (values, left, right)
            }
            Data::Dense(a) => {
                let svd = linalg::svd(a)?;
                (svd.s, svd.u, svd.v)
            }
        };
        let smax = values.first().copied().unwrap_or(0.0);
        let mut groups: Vec<(f64, usize, usize)> = Vec::new();
        for (j, &s) in values.iter().enumerate() {
            match groups.last_mut() {
                Some((v, _, count)) if (*v - s).abs() <= 1e-9 * smax => *count += 1,
                _ => groups.push((s, j, 1)),
            }
        }
        Ok(SpectralDecomposition { values, left, right, groups, trace_scale: self.alg.trace_scale })
    }

    /// Eigen-decomposition of a self-adjoint element.
    pub fn hermitian_eig(&self) -> Result<HermitianEig, AlgebraError> {
        match &self.data {
            Data::Diag(a) => {
                let scale = self.frobenius();
                let skew = a.iter().map(|z| 4.0 * z.im * z.im).sum::<f64>().sqrt();
                if skew > 1e-10 * scale {
                    return Err(AlgebraError::NotSelfAdjoint { residual: skew / scale });
                }
                let d = a.len();
                let mut order: Vec<usize> = (0..d).collect();
                order.sort_by(|&i, &j| a[j].re.total_cmp(&a[i].re).then(i.cmp(&j)));
                let mut vectors = CMat::zeros(d, d);
                for (col, &i) in order.iter().enumerate() {
                    vectors[(i, col)] = Complex64::new(1.0, 0.0);
                }
                Ok(HermitianEig { values: order.iter().map(|&i| a[i].re).collect(), vectors })
            }
            Data::Dense(a) => Ok(linalg::hermitian_eig(a)?),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64, AlgebraError> {
        Ok(self.hermitian_eig()?.values.last().copied().unwrap_or(0.0))
    }

    /// f(x) for self-adjoint x, re-projected into the algebra.
    pub fn map_hermitian(&self, f: impl Fn(f64) -> f64) -> Result<Self, AlgebraError> {
        if let Data::Diag(a) = &self.data {
            self.hermitian_eig()?;
            let v = a.iter().map(|z| Complex64::new(f(z.re), 0.0)).collect();
            return Ok(AlgebraElement { alg: self.alg.clone(), data: Data::Diag(v) });
        }
        let e = self.hermitian_eig()?;
        let d = self.alg.dim;
        let mut m = CMat::zeros(d, d);
        for (k, &lam) in e.values.iter().enumerate() {
            let fl = f(lam);
            if fl != 0.0 {
                let v = e.vectors.column(k);
                m += v * v.adjoint() * Complex64::new(fl, 0.0);
            }
        }
        Self::project(&self.alg, &m)
    }

    /// ‖x‖_p = (c·Σσ^p)^{1/p}, or σ_max for p = ∞.
    pub fn p_norm(&self, p: f64) -> Result<f64, AlgebraError> {
        if p.is_nan() || p < 1.0 {
            return Err(AlgebraError::InvalidExponent(p));
        }
        let s = self.singular_values()?;
        Ok(p_norm_of(&s, self.alg.trace_scale, p))
    }

    pub fn op_norm(&self) -> Result<f64, AlgebraError> {
        self.p_norm(f64::INFINITY)
    }

    /// |x| = (x*x)^{1/2}.
    pub fn abs(&self) -> Result<Self, AlgebraError> {
        if let Data::Diag(a) = &self.data {
            let v = a.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
            return Ok(AlgebraElement { alg: self.alg.clone(), data: Data::Diag(v) });
        }
        let sd = self.spectral_decomposition()?;
        let d = self.alg.dim;
        let mut m = CMat::zeros(d, d);
        for (j, &s) in sd.values.iter().enumerate() {
            if s > 0.0 {
                let v = sd.right.column(j);
                m += v * v.adjoint() * Complex64::new(s, 0.0);
            }
        }
        Self::project(&self.alg, &m)
    }

    /// Number of singular values above rel_tol·σ_max.
    pub fn rank(&self, rel_tol: f64) -> Result<usize, AlgebraError> {
        let s = self.singular_values()?;
        Ok(numerical_rank(&s, rel_tol))
    }

    /// S(x) = tr(R(x)) = c·rank.
    pub fn support_size(&self, rel_tol: f64) -> Result<f64, AlgebraError> {
        Ok(self.alg.trace_scale * self.rank(rel_tol)? as f64)
    }

    /// Left range projection R(x), the projection onto the column space.
    pub fn range_projection(&self, rel_tol: f64) -> Result<Self, AlgebraError> {
        if let Data::Diag(a) = &self.data {
            let smax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let one = Complex64::new(1.0, 0.0);
            let v = a.iter().map(|z| if smax > 0.0 && z.norm() > rel_tol * smax { one } else { czero() }).collect();
            return Ok(AlgebraElement { alg: self.alg.clone(), data: Data::Diag(v) });
        }
        let sd = self.spectral_decomposition()?;
        let r = numerical_rank(&sd.values, rel_tol);
        let d = self.alg.dim;
        let mut m = CMat::zeros(d, d);
        for j in 0..r {
            let u = sd.left.column(j);
            m += u * u.adjoint();
        }
        Self::project(&self.alg, &m)
    }

    /// H(|x|²) = −c·Σσ²·log σ².
    pub fn entropy(&self) -> Result<f64, AlgebraError> {
        let s = self.singular_values()?;
        Ok(entropy_of(&s, self.alg.trace_scale))
    }

    /// Nested `[re, im]` arrays: 1-D for diagonal algebras, 2-D otherwise.
    pub fn to_json_data(&self) -> Value {
        let pair = |z: Complex64| Value::from(vec![z.re, z.im]);
        match &self.data {
            Data::Diag(a) => Value::Array(a.iter().map(|&z| pair(z)).collect()),
            Data::Dense(m) => Value::Array(
                (0..m.nrows())
                    .map(|i| Value::Array((0..m.ncols()).map(|j| pair(m[(i, j)])).collect()))
                    .collect(),
            ),
        }
    }

    /// Inverse of [`to_json_data`]; diagonal algebras also accept a 2-D array.
    pub fn from_json_data(alg: &Arc<StarAlgebra>, data: &Value) -> Result<Self, AlgebraError> {
        let bad = |m: &str| AlgebraError::Literal(m.to_string());
        let parse_pair = |v: &Value| -> Result<Complex64, AlgebraError> {
            let a = v.as_array().ok_or_else(|| bad("entry must be [re, im]"))?;
            if a.len() != 2 {
                return Err(bad("entry must be [re, im]"));
            }
            let re = a[0].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
            let im = a[1].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
            Ok(Complex64::new(re, im))
        };
        let rows = data.as_array().ok_or_else(|| bad("data must be an array"))?;
        let d = alg.dim;
        let is_flat = rows.first().map(|r| r.as_array().is_some_and(|a| a.first().is_some_and(|x| x.is_number()))).unwrap_or(false);
        if is_flat {
            if !alg.is_diagonal() {
                return Err(bad("1-D data is only valid for diagonal algebras"));
            }
            let v: Vec<Complex64> = rows.iter().map(parse_pair).collect::<Result<_, _>>()?;
            return Self::from_diagonal(alg, &v);
        }
        if rows.len() != d {
            return Err(AlgebraError::DimensionMismatch { expected: d, found: rows.len() });
        }
        let mut m = CMat::zeros(d, d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| bad("row must be an array"))?;
            if row.len() != d {
                return Err(AlgebraError::DimensionMismatch { expected: d, found: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = parse_pair(v)?;
            }
        }
        Self::from_matrix(alg, &m)
    }
}

fn coords_of_matrix(alg: &StarAlgebra, entry: impl Fn(usize, usize) -> Complex64) -> Vec<Complex64> {
    alg.basis
        .supports
        .iter()
        .map(|s| {
            // Constant supports are copied so literals round-trip bit for bit.
            let first = entry(s[0].0, s[0].1);
            if s.iter().all(|&(i, j)| entry(i, j) == first) {
                return first;
            }
            let sum: Complex64 = s.iter().map(|&(i, j)| entry(i, j)).sum();
            sum / s.len() as f64
        })
        .collect()
}

pub fn numerical_rank(values: &[f64], rel_tol: f64) -> usize {
    let smax = values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn p_norm_of(values: &[f64], trace_scale: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let smax = values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0.0;
    }
    // Factor out σ_max so large p does not overflow.
    let sum: f64 = values.iter().map(|&s| (s / smax).powf(p)).sum();
    smax * (trace_scale * sum).powf(1.0 / p)
}

pub fn entropy_of(values: &[f64], trace_scale: f64) -> f64 {
    -trace_scale
        * values
            .iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| {
                let t = s * s;
                t * t.ln()
            })
            .sum::<f64>()
}
