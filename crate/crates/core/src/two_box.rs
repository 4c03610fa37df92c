//! Paired 2-box spaces with Fourier transform, coproduct and Jones
//! projections: group model, spin model and fixed-point models.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, AlgebraKind, Basis, StarAlgebra};
use crate::group::{group_from_spec, CayleyFile, FiniteGroup, GroupError, DEFAULT_MAX_ORDER};
use crate::linalg::CMat;

/// Default bound on n for the spin model.
pub const DEFAULT_MAX_SPIN: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoBoxError {
    #[error("element does not belong to either side of {pair}")]
    SideMismatch { pair: String },
    #[error("elements lie on different sides")]
    DifferentSides,
    #[error("group of order {order} exceeds the bound {bound}")]
    GroupTooLarge { order: usize, bound: usize },
    #[error("spin model size {n} exceeds the bound {bound}")]
    SizeTooLarge { n: usize, bound: usize },
    #[error("operation not supported for model {0}")]
    UnsupportedModel(String),
    #[error("invalid permutation action: {0}")]
    BadAction(String),
    #[error("cannot parse model spec `{0}`")]
    BadSpec(String),
    #[error("bad element literal: {0}")]
    Literal(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A left action g·i = perms[g][i].
#[derive(Clone, PartialEq)]
pub struct PermutationAction {
    group: Arc<FiniteGroup>,
    point_count: usize,
    perms: Vec<Vec<usize>>,
}

impl fmt::Debug for PermutationAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PermutationAction({} on {} points)", self.group.name(), self.point_count)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionFile {
    /// Builtin group string or an inline Cayley table.
    pub group: Value,
    pub points: usize,
    pub perms: Vec<Vec<usize>>,
}

impl PermutationAction {
    pub fn new(group: Arc<FiniteGroup>, perms: Vec<Vec<usize>>) -> Result<Self, TwoBoxError> {
        let bad = |m: String| TwoBoxError::BadAction(m);
        if perms.len() != group.order() {
            return Err(bad(format!("{} permutations for a group of order {}", perms.len(), group.order())));
        }
        let n = perms.first().map(|p| p.len()).unwrap_or(0);
        if n == 0 {
            return Err(bad("action on zero points".into()));
        }
        for (g, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(bad(format!("permutation {g} has length {}", p.len())));
            }
            let mut seen = vec![false; n];
            for &v in p {
                if v >= n || seen[v] {
                    return Err(bad(format!("entry list {g} is not a permutation")));
                }
                seen[v] = true;
            }
        }
        let e = group.identity();
        if perms[e].iter().enumerate().any(|(i, &v)| i != v) {
            return Err(bad("identity does not act trivially".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if (0..n).any(|i| perms[g][perms[h][i]] != perms[gh][i]) {
                    return Err(bad(format!("perm[{g}]∘perm[{h}] != perm[{gh}]")));
                }
            }
        }
        Ok(PermutationAction { group, point_count: n, perms })
    }

    /// g·i = g i (left multiplication).
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let perms = group.elements().map(|g| group.elements().map(|i| group.mul(g, i)).collect()).collect();
        PermutationAction { point_count: group.order(), group, perms }
    }

    /// g·i = i g⁻¹; its commutant is the left regular representation.
    pub fn right_regular(group: Arc<FiniteGroup>) -> Self {
        let perms = group
            .elements()
            .map(|g| group.elements().map(|i| group.mul(i, group.inv(g))).collect())
            .collect();
        PermutationAction { point_count: group.order(), group, perms }
    }

    /// The trivial group on n points.
    pub fn trivial(n: usize) -> Self {
        PermutationAction {
            group: Arc::new(FiniteGroup::trivial().with_name("trivial")),
            point_count: n,
            perms: vec![(0..n).collect()],
        }
    }

    pub fn from_file(file: &ActionFile) -> Result<Self, TwoBoxError> {
        let group = match &file.group {
            Value::String(s) => group_from_spec(s)?,
            v => {
                let cf: CayleyFile = serde_json::from_value(v.clone()).map_err(|e| TwoBoxError::BadAction(e.to_string()))?;
                FiniteGroup::from_file(&cf)?
            }
        };
        let act = Self::new(Arc::new(group), file.perms.clone())?;
        if act.point_count != file.points {
            return Err(TwoBoxError::BadAction(format!("declared {} points, perms act on {}", file.points, act.point_count)));
        }
        Ok(act)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Orbits, each sorted, ordered by smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.point_count];
        let mut out = Vec::new();
        for i in 0..self.point_count {
            if seen[i] {
                continue;
            }
            let mut o: Vec<usize> = self.perms.iter().map(|p| p[i]).collect();
            o.sort_unstable();
            o.dedup();
            for &j in &o {
                seen[j] = true;
            }
            out.push(o);
        }
        out
    }

    pub fn min_orbit_size(&self) -> usize {
        self.orbits().iter().map(|o| o.len()).min().unwrap_or(0)
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// Diagonal action on S×S, point (i, j) indexed i·n + j.
    pub fn on_pairs(&self) -> Self {
        let n = self.point_count;
        let perms = self
            .perms
            .iter()
            .map(|p| (0..n * n).map(|k| p[k / n] * n + p[k % n]).collect())
            .collect();
        PermutationAction { group: self.group.clone(), point_count: n * n, perms }
    }

    /// P_g with P_g e_i = e_{g·i}.
    pub fn permutation_matrix(&self, g: usize) -> CMat {
        let n = self.point_count;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(self.perms[g][i], i)] = Complex64::new(1.0, 0.0);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Group(Arc<FiniteGroup>),
    Spin(usize),
    FixedPoint(Arc<PermutationAction>),
}

/// A coordinate map with exactly one nonzero per column: source k goes to
/// target[k] with weight coeff[k].
#[derive(Debug, Clone)]
struct Monomial {
    target: Vec<usize>,
    coeff: Vec<Complex64>,
}

impl Monomial {
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.target.len()];
        for (k, &z) in x.iter().enumerate() {
            out[self.target[k]] += self.coeff[k] * z;
        }
        out
    }

    fn inverse(&self) -> Monomial {
        let n = self.target.len();
        let mut target = vec![0; n];
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            target[self.target[k]] = k;
            coeff[self.target[k]] = self.coeff[k].inv();
        }
        Monomial { target, coeff }
    }

    fn dense(&self) -> CMat {
        let n = self.target.len();
        let mut m = CMat::zeros(n, n);
        for k in 0..n {
            m[(self.target[k], k)] = self.coeff[k];
        }
        m
    }

    /// Build from images of basis vectors given as target coordinate vectors.
    fn from_images(images: Vec<Vec<Complex64>>) -> Result<Self, TwoBoxError> {
        let n = images.len();
        let mut target = Vec::with_capacity(n);
        let mut coeff = Vec::with_capacity(n);
        let mut hit = vec![false; n];
        for (k, img) in images.iter().enumerate() {
            if img.len() != n {
                return Err(TwoBoxError::BadAction("fourier map is not square on coordinates".into()));
            }
            let nz: Vec<usize> = (0..n).filter(|&i| img[i].norm() > 1e-12).collect();
            if nz.len() != 1 || hit[nz[0]] {
                return Err(TwoBoxError::BadAction(format!("fourier image of basis element {k} is not a basis multiple")));
            }
            hit[nz[0]] = true;
            target.push(nz[0]);
            coeff.push(img[nz[0]]);
        }
        Ok(Monomial { target, coeff })
    }
}

/// The pair (plus, minus) with Fourier transform between them.
#[derive(Clone)]
pub struct TwoBoxPair {
    model: Model,
    label: String,
    plus: Arc<StarAlgebra>,
    minus: Arc<StarAlgebra>,
    delta: f64,
    delta0: f64,
    f_pm: Monomial,
    f_mp: Monomial,
    inv_pm: Monomial,
    inv_mp: Monomial,
}

impl fmt::Debug for TwoBoxPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoBoxPair({}, δ={}, δ₀={})", self.label, self.delta, self.delta0)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn group_model(group: Arc<FiniteGroup>) -> Result<TwoBoxPair, TwoBoxError> {
    group_model_bounded(group, DEFAULT_MAX_ORDER)
}

pub fn group_model_bounded(group: Arc<FiniteGroup>, bound: usize) -> Result<TwoBoxPair, TwoBoxError> {
    let n = group.order();
    if n > bound {
        return Err(TwoBoxError::GroupTooLarge { order: n, bound });
    }
    let label = format!("group:{}", group.name());
    let plus = StarAlgebra::diagonal(n, 1.0, format!("{label}/plus"))?;
    // λ(g) has ones at (g·h, h).
    let basis = Basis::new(
        group.elements().map(|g| group.elements().map(|h| (group.mul(g, h), h)).collect()).collect(),
    );
    let action = Arc::new(PermutationAction::right_regular(group.clone()));
    let minus = StarAlgebra::new(n, 1.0, AlgebraKind::Commutant(action), format!("{label}/minus"), basis)?;
    let rt = (n as f64).sqrt();
    // δ_g ↦ λ(g⁻¹)/√n and λ(g) ↦ √n δ_g.
    let f_pm = Monomial { target: group.elements().map(|g| group.inv(g)).collect(), coeff: vec![c(1.0 / rt); n] };
    let f_mp = Monomial { target: group.elements().collect(), coeff: vec![c(rt); n] };
    Ok(TwoBoxPair::assemble(Model::Group(group), label, plus, minus, rt, rt, f_pm, f_mp))
}

pub fn spin_model(n: usize) -> Result<TwoBoxPair, TwoBoxError> {
    spin_model_bounded(n, DEFAULT_MAX_SPIN)
}

pub fn spin_model_bounded(n: usize, bound: usize) -> Result<TwoBoxPair, TwoBoxError> {
    if n == 0 || n > bound {
        return Err(TwoBoxError::SizeTooLarge { n, bound });
    }
    let label = format!("spin:{n}");
    let plus = StarAlgebra::full(n, 1.0, format!("{label}/plus"))?;
    let minus = StarAlgebra::diagonal(n * n, 1.0 / n as f64, format!("{label}/minus"))?;
    let (f_pm, f_mp) = spin_rules(&plus, &minus, n)?;
    let rt = (n as f64).sqrt();
    Ok(TwoBoxPair::assemble(Model::Spin(n), label, plus, minus, rt, 1.0 / rt, f_pm, f_mp))
}

pub fn fixed_point_model(action: Arc<PermutationAction>) -> Result<TwoBoxPair, TwoBoxError> {
    let n = action.point_count();
    let label = format!("fixedpoint:{}@{}", action.group().name(), n);
    let plus = StarAlgebra::commutant(action.clone(), 1.0, format!("{label}/plus"))?;
    let minus = StarAlgebra::invariant_diagonal(Arc::new(action.on_pairs()), 1.0 / n as f64, format!("{label}/minus"))?;
    let (f_pm, f_mp) = spin_rules(&plus, &minus, n)?;
    let rt = (n as f64).sqrt();
    let n0 = action.min_orbit_size() as f64;
    Ok(TwoBoxPair::assemble(Model::FixedPoint(action), label, plus, minus, rt, n0 / rt, f_pm, f_mp))
}

/// F(A)(i,j) = √n·a_ij and F(f) = (f_ji/√n), restricted to the given bases.
fn spin_rules(
    plus: &Arc<StarAlgebra>,
    minus: &Arc<StarAlgebra>,
    n: usize,
) -> Result<(Monomial, Monomial), TwoBoxError> {
    let rt = (n as f64).sqrt();
    let pm = plus
        .basis()
        .supports()
        .iter()
        .map(|s| {
            let mut diag = vec![c(0.0); n * n];
            for &(i, j) in s {
                diag[i * n + j] = c(rt);
            }
            let f = AlgebraElement::from_diagonal(minus, &diag)?;
            Ok(f.coords())
        })
        .collect::<Result<Vec<_>, TwoBoxError>>()?;
    let mp = minus
        .basis()
        .supports()
        .iter()
        .map(|s| {
            let mut m = CMat::zeros(n, n);
            for &(p, _) in s {
                let (i, j) = (p / n, p % n);
                m[(j, i)] = c(1.0 / rt);
            }
            let a = AlgebraElement::from_matrix(plus, &m)?;
            Ok(a.coords())
        })
        .collect::<Result<Vec<_>, TwoBoxError>>()?;
    Ok((Monomial::from_images(pm)?, Monomial::from_images(mp)?))
}

impl TwoBoxPair {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        model: Model,
        label: String,
        plus: Arc<StarAlgebra>,
        minus: Arc<StarAlgebra>,
        delta: f64,
        delta0: f64,
        f_pm: Monomial,
        f_mp: Monomial,
    ) -> Self {
        let inv_pm = f_pm.inverse();
        let inv_mp = f_mp.inverse();
        TwoBoxPair { model, label, plus, minus, delta, delta0, f_pm, f_mp, inv_pm, inv_mp }
    }

    /// Parse "group:cyclic:6", "spin:4", "fixedpoint:cyclic:3-regular",
    /// "fixedpoint:trivial:3" or "fixedpoint:action.json" (a space may
    /// replace the first colon).
    pub fn from_spec(spec: &str) -> Result<Self, TwoBoxError> {
        let spec = spec.trim();
        let bad = || TwoBoxError::BadSpec(spec.to_string());
        let cut = spec.find([':', ' ']).ok_or_else(bad)?;
        let (kind, rest) = (spec[..cut].trim(), spec[cut + 1..].trim());
        let mut pair = match kind {
            "group" => group_model(Arc::new(group_from_spec(rest)?))?,
            "spin" => spin_model(rest.parse().map_err(|_| bad())?)?,
            "fixedpoint" => {
                let action = if rest.ends_with(".json") {
                    let text = std::fs::read_to_string(Path::new(rest)).map_err(|e| TwoBoxError::Io(format!("{rest}: {e}")))?;
                    let file: ActionFile = serde_json::from_str(&text).map_err(|e| TwoBoxError::BadAction(e.to_string()))?;
                    PermutationAction::from_file(&file)?
                } else if let Some(g) = rest.strip_suffix("-regular") {
                    PermutationAction::regular(Arc::new(group_from_spec(g)?))
                } else if let Some(n) = rest.strip_prefix("trivial:") {
                    PermutationAction::trivial(n.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                };
                fixed_point_model(Arc::new(action))?
            }
            _ => return Err(bad()),
        };
        pair.label = format!("{kind}:{rest}");
        Ok(pair)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn plus(&self) -> &Arc<StarAlgebra> {
        &self.plus
    }

    pub fn minus(&self) -> &Arc<StarAlgebra> {
        &self.minus
    }

    pub fn algebra(&self, side: Side) -> &Arc<StarAlgebra> {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The constant of the uncertainty principles (δ for group models,
    /// n₀/√n for fixed-point models).
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn group(&self) -> Option<&Arc<FiniteGroup>> {
        match &self.model {
            Model::Group(g) => Some(g),
            _ => None,
        }
    }

    /// Minimal orbit size for spin and fixed-point models.
    pub fn n0(&self) -> Option<usize> {
        match &self.model {
            Model::Group(_) => None,
            Model::Spin(_) => Some(1),
            Model::FixedPoint(a) => Some(a.min_orbit_size()),
        }
    }

    /// Whether the plus and minus algebras have trivial center overlap
    /// (δ₀ = δ): group models and transitive actions.
    pub fn is_irreducible(&self) -> bool {
        match &self.model {
            Model::Group(_) => true,
            Model::Spin(n) => *n == 1,
            Model::FixedPoint(a) => a.is_transitive(),
        }
    }

    pub fn side_of(&self, x: &AlgebraElement) -> Result<Side, TwoBoxError> {
        let a = x.algebra();
        if Arc::ptr_eq(a, &self.plus) || a.label() == self.plus.label() {
            Ok(Side::Plus)
        } else if Arc::ptr_eq(a, &self.minus) || a.label() == self.minus.label() {
            Ok(Side::Minus)
        } else {
            Err(TwoBoxError::SideMismatch { pair: self.label.clone() })
        }
    }

    pub fn fourier(&self, x: &AlgebraElement) -> Result<AlgebraElement, TwoBoxError> {
        let side = self.side_of(x)?;
        let map = match side {
            Side::Plus => &self.f_pm,
            Side::Minus => &self.f_mp,
        };
        Ok(AlgebraElement::from_coords(self.algebra(side.opposite()), &map.apply(&x.coords()))?)
    }

    pub fn fourier_inv(&self, x: &AlgebraElement) -> Result<AlgebraElement, TwoBoxError> {
        let side = self.side_of(x)?;
        let map = match side {
            Side::Minus => &self.inv_pm,
            Side::Plus => &self.inv_mp,
        };
        Ok(AlgebraElement::from_coords(self.algebra(side.opposite()), &map.apply(&x.coords()))?)
    }

    /// Dense coordinate matrix of ℱ from `from` to the opposite side.
    pub fn fourier_matrix(&self, from: Side) -> CMat {
        match from {
            Side::Plus => self.f_pm.dense(),
            Side::Minus => self.f_mp.dense(),
        }
    }

    /// x̄ = ℱ(ℱ(x)).
    pub fn contragredient(&self, x: &AlgebraElement) -> Result<AlgebraElement, TwoBoxError> {
        self.fourier(&self.fourier(x)?)
    }

    /// x * y = ℱ(ℱ⁻¹(x)·ℱ⁻¹(y)).
    pub fn coproduct(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, TwoBoxError> {
        if self.side_of(x)? != self.side_of(y)? {
            return Err(TwoBoxError::DifferentSides);
        }
        let prod = self.fourier_inv(x)?.mul(&self.fourier_inv(y)?)?;
        self.fourier(&prod)
    }

    /// Closed forms of the coproduct where one is known: convolution on the
    /// group plus side, coefficientwise product on the group minus side,
    /// √n·Hadamard product on the spin plus side. Fixed-point plus sides are
    /// computed in the ambient matrix algebra and projected back.
    pub fn coproduct_closed_form(
        &self,
        x: &AlgebraElement,
        y: &AlgebraElement,
    ) -> Result<Option<AlgebraElement>, TwoBoxError> {
        let side = self.side_of(x)?;
        if side != self.side_of(y)? {
            return Err(TwoBoxError::DifferentSides);
        }
        let alg = self.algebra(side);
        match (&self.model, side) {
            (Model::Group(g), Side::Plus) => {
                let n = g.order();
                let s = 1.0 / (n as f64).sqrt();
                let out: Vec<Complex64> = g
                    .elements()
                    .map(|g0| g.elements().map(|h| x.entry(g.mul(g0, g.inv(h)), g.mul(g0, g.inv(h))) * y.entry(h, h)).sum::<Complex64>() * s)
                    .collect();
                Ok(Some(AlgebraElement::from_diagonal(alg, &out)?))
            }
            (Model::Group(g), Side::Minus) => {
                let s = (g.order() as f64).sqrt();
                let a = x.coords();
                let b = y.coords();
                let out: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p * q * s).collect();
                Ok(Some(AlgebraElement::from_coords(alg, &out)?))
            }
            (Model::Spin(_), Side::Plus) | (Model::FixedPoint(_), Side::Plus) => {
                let n = alg.dim();
                let m = x.to_dense().component_mul(&y.to_dense()) * c((n as f64).sqrt());
                Ok(Some(AlgebraElement::from_matrix(alg, &m)?))
            }
            _ => Ok(None),
        }
    }

    /// The honest Jones projection e = ℱ⁻¹(1)/δ on `side`.
    pub fn jones_projection(&self, side: Side) -> Result<AlgebraElement, TwoBoxError> {
        let one = AlgebraElement::identity(self.algebra(side.opposite()));
        Ok(self.fourier_inv(&one)?.scale_real(1.0 / self.delta))
    }

    /// δ·e, the element with trace δ and Fourier transform 1.
    pub fn jones_scaled(&self, side: Side) -> Result<AlgebraElement, TwoBoxError> {
        Ok(self.jones_projection(side)?.scale_real(self.delta))
    }

    pub fn identity(&self, side: Side) -> AlgebraElement {
        AlgebraElement::identity(self.algebra(side))
    }

    /// Basis element k of `side` (δ_g / λ(g) for group models).
    pub fn basis_element(&self, side: Side, k: usize) -> Result<AlgebraElement, TwoBoxError> {
        let alg = self.algebra(side);
        let mut coords = vec![c(0.0); alg.coord_dim()];
        coords[k] = c(1.0);
        Ok(AlgebraElement::from_coords(alg, &coords)?)
    }

    pub fn to_literal(&self, x: &AlgebraElement) -> Result<ElementLiteral, TwoBoxError> {
        let side = self.side_of(x)?;
        Ok(ElementLiteral {
            algebra: self.algebra(side).label().to_string(),
            side,
            data: Some(x.to_json_data()),
            coeffs: None,
        })
    }

    pub fn from_literal(&self, lit: &ElementLiteral) -> Result<AlgebraElement, TwoBoxError> {
        let alg = self.algebra(lit.side);
        if lit.algebra != alg.label() {
            return Err(TwoBoxError::Literal(format!("algebra `{}` is not the {} side of {}", lit.algebra, lit.side, self.label)));
        }
        match (&lit.data, &lit.coeffs) {
            (Some(d), None) => Ok(AlgebraElement::from_json_data(alg, d)?),
            (None, Some(coeffs)) => {
                if !(matches!(self.model, Model::Group(_)) && lit.side == Side::Minus) {
                    return Err(TwoBoxError::Literal("coefficient maps are only valid on the group minus side".into()));
                }
                let mut v = vec![c(0.0); alg.coord_dim()];
                for (k, z) in coeffs {
                    let g: usize = k.parse().map_err(|_| TwoBoxError::Literal(format!("bad group index `{k}`")))?;
                    if g >= v.len() {
                        return Err(TwoBoxError::Literal(format!("group index {g} out of range")));
                    }
                    v[g] = Complex64::new(z[0], z[1]);
                }
                Ok(AlgebraElement::from_coords(alg, &v)?)
            }
            _ => Err(TwoBoxError::Literal("exactly one of `data` and `coeffs` is required".into())),
        }
    }
}

/// JSON form of an element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementLiteral {
    pub algebra: String,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<BTreeMap<String, [f64; 2]>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, symmetric};

    fn gm(n: usize) -> TwoBoxPair {
        group_model(Arc::new(cyclic(n).unwrap())).unwrap()
    }

    fn close(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> bool {
        a.sub(b).unwrap().frobenius() <= tol
    }

    #[test]
    fn group_fourier_rules() {
        let p = gm(2);
        let lam1 = p.basis_element(Side::Minus, 1).unwrap();
        let f = p.fourier(&lam1).unwrap();
        let expect = p.basis_element(Side::Plus, 1).unwrap().scale_real(2f64.sqrt());
        assert!(close(&f, &expect, 1e-15));
        let d0 = p.basis_element(Side::Plus, 0).unwrap();
        let expect = p.basis_element(Side::Minus, 0).unwrap().scale_real(1.0 / 2f64.sqrt());
        assert!(close(&p.fourier(&d0).unwrap(), &expect, 1e-15));
        assert_eq!(p.minus().identity_trace(), 2.0);
    }

    #[test]
    fn lambda_is_regular_representation() {
        let g = Arc::new(symmetric(3).unwrap());
        let p = group_model(g.clone()).unwrap();
        for a in g.elements() {
            for b in g.elements() {
                let la = p.basis_element(Side::Minus, a).unwrap();
                let lb = p.basis_element(Side::Minus, b).unwrap();
                let lab = p.basis_element(Side::Minus, g.mul(a, b)).unwrap();
                assert_eq!(la.mul(&lb).unwrap(), lab);
            }
        }
    }

    #[test]
    fn spin_rules_with_transpose() {
        let p = spin_model(2).unwrap();
        let e11 = p.basis_element(Side::Plus, 0).unwrap();
        let f = p.fourier(&e11).unwrap();
        assert!((f.entry(0, 0).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.frobenius(), 2f64.sqrt());
        let one = p.identity(Side::Minus);
        let a = p.fourier(&one).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.entry(i, j).re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
            }
        }
        // E_12 goes to the function at (1,2); its image comes back transposed.
        let e12 = p.basis_element(Side::Plus, 1).unwrap();
        let back = p.fourier(&p.fourier(&e12).unwrap()).unwrap();
        assert!((back.entry(1, 0).re - 1.0).abs() < 1e-15);
        assert_eq!(p.minus().identity_trace(), 2.0);
    }

    #[test]
    fn fixed_point_orbits() {
        let g = Arc::new(cyclic(2).unwrap());
        let act = PermutationAction::new(g, vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        assert_eq!(act.min_orbit_size(), 1);
        let p = fixed_point_model(Arc::new(act)).unwrap();
        assert!((p.delta0() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let reg = TwoBoxPair::from_spec("fixedpoint:cyclic:4-regular").unwrap();
        assert_eq!(reg.plus().coord_dim(), 4);
        assert!((reg.delta0() - 2.0).abs() < 1e-15);
        let triv = TwoBoxPair::from_spec("fixedpoint:trivial:3").unwrap();
        assert_eq!(triv.plus().coord_dim(), 9);
        assert!((triv.delta0() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_actions() {
        let g = Arc::new(cyclic(3).unwrap());
        assert!(PermutationAction::new(g.clone(), vec![vec![0, 1], vec![1, 0], vec![0, 1]]).is_err());
        assert!(PermutationAction::new(g, vec![vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn coproduct_examples() {
        let p = gm(3);
        let d1 = p.basis_element(Side::Plus, 1).unwrap();
        let d2 = p.basis_element(Side::Plus, 2).unwrap();
        let expect = p.basis_element(Side::Plus, 0).unwrap().scale_real(1.0 / 3f64.sqrt());
        assert!(close(&p.coproduct(&d1, &d2).unwrap(), &expect, 1e-15));
        let q = gm(2);
        let l0 = q.basis_element(Side::Minus, 0).unwrap();
        let l1 = q.basis_element(Side::Minus, 1).unwrap();
        assert!(close(&q.coproduct(&l1, &l1).unwrap(), &l1.scale_real(2f64.sqrt()), 1e-15));
        assert!(q.coproduct(&l0, &l1).unwrap().frobenius() < 1e-15);
        assert!(matches!(q.coproduct(&l0, &q.identity(Side::Plus)), Err(TwoBoxError::DifferentSides)));
    }

    #[test]
    fn jones() {
        let p = gm(4);
        let e = p.jones_projection(Side::Plus).unwrap();
        assert!(close(&e, &p.basis_element(Side::Plus, 0).unwrap(), 1e-15));
        assert!(close(&p.fourier(&e.scale_real(2.0)).unwrap(), &p.identity(Side::Minus), 1e-12));
        let q = gm(2);
        let em = q.jones_projection(Side::Minus).unwrap();
        let s = em.singular_values().unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1].abs() < 1e-15);
        let r = TwoBoxPair::from_spec("fixedpoint:cyclic:3-regular").unwrap();
        let ep = r.jones_projection(Side::Plus).unwrap();
        assert!(ep.projection_residual() < 1e-14);
    }

    #[test]
    fn spec_parsing() {
        assert!(TwoBoxPair::from_spec("group cyclic:6").is_ok());
        assert!(TwoBoxPair::from_spec("spin 3").is_ok());
        assert!(TwoBoxPair::from_spec("spin:40").is_err());
        assert!(TwoBoxPair::from_spec("group:cyclic:25").is_err());
        assert!(TwoBoxPair::from_spec("torus:3").is_err());
        assert!(TwoBoxPair::from_spec("fixedpoint:nothing").is_err());
        assert_eq!(TwoBoxPair::from_spec("group cyclic:6").unwrap().label(), "group:cyclic:6");
    }

    #[test]
    fn literals() {
        let p = gm(3);
        let x = p.basis_element(Side::Minus, 2).unwrap().scale(Complex64::new(0.5, -1.0));
        let lit = p.to_literal(&x).unwrap();
        let json = serde_json::to_string(&lit).unwrap();
        let back: ElementLiteral = serde_json::from_str(&json).unwrap();
        assert_eq!(p.from_literal(&back).unwrap(), x);
        let coeffs = ElementLiteral {
            algebra: p.minus().label().into(),
            side: Side::Minus,
            data: None,
            coeffs: Some(BTreeMap::from([("2".to_string(), [0.5, -1.0])])),
        };
        assert_eq!(p.from_literal(&coeffs).unwrap(), x);
    }
}
