//! Minimizers of the uncertainty principles: biprojections, shifts,
//! bi-shifts, the extremality predicates, the square relation and the
//! uniqueness null space.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, RANK_REL_TOL};
use crate::group::{left_cosets, one_dim_characters, right_cosets, Character, GroupError, Subgroup};
use crate::linalg::{null_space, CMat};
use crate::two_box::{Model, Side, TwoBoxError, TwoBoxPair};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const SHIFT_TOL: f64 = 1e-9;
pub const DS_ROUND_TOL: f64 = 1e-6;
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremizerError {
    #[error("operation needs a group model, got {0}")]
    ModelMismatch(String),
    #[error("character does not belong to the subgroup")]
    InvalidCharacter,
    #[error("element is not a projection (residual {residual:e})")]
    NotAProjection { residual: f64 },
    #[error("element is zero")]
    ZeroElement,
    #[error("shift sides do not match: {0}")]
    ShiftSideMismatch(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("shifts come from different biprojections (distance {distance:e})")]
    MismatchedBiprojection { distance: f64 },
    #[error("constructed shift failed certification: {0}")]
    ShiftCertificationFailed(String),
    #[error(transparent)]
    TwoBox(#[from] TwoBoxError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

type Result<T> = std::result::Result<T, ExtremizerError>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A biprojection B with B̃ = R(ℱ(B)).
#[derive(Debug, Clone)]
pub struct Biprojection {
    pub element: AlgebraElement,
    pub side: Side,
    pub subgroup: Option<Subgroup>,
    pub tilde: AlgebraElement,
}

fn group_of(pair: &TwoBoxPair) -> Result<&std::sync::Arc<crate::group::FiniteGroup>> {
    pair.group().ok_or_else(|| ExtremizerError::ModelMismatch(pair.label().to_string()))
}

/// B = Σ_{h∈H} δ_h with B̃ = (1/|H|)·Σ_{h∈H} λ(h).
pub fn biprojection_from_subgroup(pair: &TwoBoxPair, h: &Subgroup) -> Result<Biprojection> {
    let g = group_of(pair)?;
    if **h.parent() != **g {
        return Err(ExtremizerError::ModelMismatch("subgroup of a different group".into()));
    }
    let n = g.order();
    let mut b = vec![c(0.0); n];
    let mut t = vec![c(0.0); n];
    for &x in h.members() {
        b[x] = c(1.0);
        t[x] = c(1.0 / h.order() as f64);
    }
    Ok(Biprojection {
        element: AlgebraElement::from_coords(pair.plus(), &b)?,
        side: Side::Plus,
        subgroup: Some(h.clone()),
        tilde: AlgebraElement::from_coords(pair.minus(), &t)?,
    })
}

/// Wrap an arbitrary element that passes [`is_biprojection`].
pub fn biprojection_from_element(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<Biprojection> {
    let v = is_biprojection(pair, x, DEFAULT_TOL)?;
    if !v.is_biprojection {
        return Err(ExtremizerError::PreconditionFailed("element is not a biprojection".into()));
    }
    let side = pair.side_of(x)?;
    let tilde = pair.fourier(x)?.range_projection(RANK_REL_TOL)?;
    Ok(Biprojection { element: x.clone(), side, subgroup: None, tilde })
}

#[derive(Debug, Clone, Serialize)]
pub struct BiprojectionVerdict {
    pub projection_residual: f64,
    /// The scalar s with ℱ(x) ≈ s·P.
    pub fourier_scalar: [f64; 2],
    pub fourier_projection_residual: f64,
    pub fourier_flatness: f64,
    pub is_biprojection: bool,
}

/// x is a nonzero projection and ℱ(x) is a scalar multiple of a
/// self-adjoint idempotent.
pub fn is_biprojection(pair: &TwoBoxPair, x: &AlgebraElement, tol: f64) -> Result<BiprojectionVerdict> {
    let nx = x.frobenius();
    if nx == 0.0 {
        return Err(ExtremizerError::ZeroElement);
    }
    let projection_residual = x.projection_residual() / nx;
    let y = pair.fourier(x)?;
    let (s, fourier_projection_residual) = scalar_projection_residual(&y)?;
    let fourier_flatness = flatness(&y.singular_values()?);
    let is_biprojection = projection_residual <= tol && fourier_projection_residual <= tol;
    Ok(BiprojectionVerdict {
        projection_residual,
        fourier_scalar: [s.re, s.im],
        fourier_projection_residual,
        fourier_flatness,
        is_biprojection,
    })
}

/// Best s with y ≈ s·P for a projection P, and the relative residual of
/// y² = s·y together with self-adjointness of y/s.
fn scalar_projection_residual(y: &AlgebraElement) -> Result<(Complex64, f64)> {
    let ny = y.frobenius();
    if ny == 0.0 {
        return Ok((c(0.0), f64::INFINITY));
    }
    let y2 = y.mul(y)?;
    let ys = y.adjoint();
    let num = ys.mul(&y2)?.trace();
    let den = ys.mul(y)?.trace();
    let s = num / den;
    if s.norm() == 0.0 {
        return Ok((s, f64::INFINITY));
    }
    let idem = y2.sub(&y.scale(s))?.frobenius() / (s.norm() * ny);
    let p = y.scale(s.inv());
    let sa = p.self_adjoint_residual();
    Ok((s, idem.max(sa)))
}

/// (max − min)/max over the singular values above the rank threshold.
pub fn flatness(values: &[f64]) -> f64 {
    let smax = values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0.0;
    }
    let smin = values.iter().copied().filter(|&s| s > RANK_REL_TOL * smax).fold(f64::INFINITY, f64::min);
    (smax - smin) / smax
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShiftLabel {
    Coset { rep: usize, members: Vec<usize> },
    Character { index: usize },
    Generic,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftResiduals {
    pub trace_residual: f64,
    pub identity_residual: f64,
}

/// A certified shift of a biprojection (or of its B̃).
#[derive(Debug, Clone)]
pub struct ShiftCertificate {
    pub shift: AlgebraElement,
    /// The projection being shifted: B, or B̃ when `of_tilde`.
    pub base: AlgebraElement,
    pub biprojection: Biprojection,
    pub of_tilde: bool,
    pub side: Side,
    pub handedness: Handedness,
    pub residuals: ShiftResiduals,
    pub label: ShiftLabel,
}

/// Checks x*B = (tr B/δ)·x (left) or B*x = (tr B/δ)·x (right) and tr x = tr B.
/// `Ok(None)` means x is a projection but not a shift.
pub fn is_shift(
    pair: &TwoBoxPair,
    x: &AlgebraElement,
    base: &AlgebraElement,
    handedness: Handedness,
) -> Result<Option<ShiftResiduals>> {
    let nx = x.frobenius();
    if nx == 0.0 {
        return Err(ExtremizerError::ZeroElement);
    }
    let pres = x.projection_residual() / nx;
    if pres > SHIFT_TOL {
        return Err(ExtremizerError::NotAProjection { residual: pres });
    }
    let (sx, sb) = (pair.side_of(x)?, pair.side_of(base)?);
    if sx != sb {
        return Err(ExtremizerError::ShiftSideMismatch("shift and base on different sides".into()));
    }
    let tb = base.trace();
    let trace_residual = (x.trace() - tb).norm() / tb.norm().max(f64::MIN_POSITIVE);
    let lhs = match handedness {
        Handedness::Left => pair.coproduct(x, base)?,
        Handedness::Right => pair.coproduct(base, x)?,
    };
    let rhs = x.scale(tb / pair.delta());
    let identity_residual = lhs.sub(&rhs)?.frobenius() / nx;
    let r = ShiftResiduals { trace_residual, identity_residual };
    Ok((trace_residual <= SHIFT_TOL && identity_residual <= SHIFT_TOL).then_some(r))
}

#[derive(Debug, Clone)]
pub struct ShiftFamily {
    /// Shifts of B: coset indicators.
    pub of_base: Vec<ShiftCertificate>,
    /// Shifts of B̃: Q_χ = (1/|H|)·Σ χ(h)λ(h), one per character.
    pub of_tilde: Vec<ShiftCertificate>,
    pub characters: Vec<Character>,
}

/// Q_χ = (1/|H|)·Σ_h χ(h)λ(h).
pub fn character_projection(pair: &TwoBoxPair, chi: &Character) -> Result<AlgebraElement> {
    let g = group_of(pair)?;
    let h = chi.subgroup();
    let mut v = vec![c(0.0); g.order()];
    for &x in h.members() {
        v[x] = chi.value(x) / h.order() as f64;
    }
    Ok(AlgebraElement::from_coords(pair.minus(), &v)?)
}

pub fn enumerate_shifts(pair: &TwoBoxPair, b: &Biprojection, handedness: Handedness) -> Result<ShiftFamily> {
    let g = group_of(pair)?;
    let h = b
        .subgroup
        .as_ref()
        .ok_or_else(|| ExtremizerError::ModelMismatch("biprojection without subgroup witness".into()))?;
    let cosets = match handedness {
        Handedness::Right => right_cosets(h),
        Handedness::Left => left_cosets(h),
    };
    let mut of_base = Vec::with_capacity(cosets.len());
    for coset in cosets {
        let mut v = vec![c(0.0); g.order()];
        for &x in &coset {
            v[x] = c(1.0);
        }
        let x = AlgebraElement::from_coords(pair.plus(), &v)?;
        let rep = coset[0];
        let residuals = is_shift(pair, &x, &b.element, handedness)?
            .ok_or_else(|| ExtremizerError::ShiftCertificationFailed(format!("coset {coset:?}")))?;
        of_base.push(ShiftCertificate {
            shift: x,
            base: b.element.clone(),
            biprojection: b.clone(),
            of_tilde: false,
            side: Side::Plus,
            handedness,
            residuals,
            label: ShiftLabel::Coset { rep, members: coset },
        });
    }
    let characters = one_dim_characters(h);
    let mut of_tilde = Vec::with_capacity(characters.len());
    for (index, chi) in characters.iter().enumerate() {
        let q = character_projection(pair, chi)?;
        let residuals = is_shift(pair, &q, &b.tilde, handedness)?
            .ok_or_else(|| ExtremizerError::ShiftCertificationFailed(format!("character {index}")))?;
        of_tilde.push(ShiftCertificate {
            shift: q,
            base: b.tilde.clone(),
            biprojection: b.clone(),
            of_tilde: true,
            side: Side::Minus,
            handedness,
            residuals,
            label: ShiftLabel::Character { index },
        });
    }
    Ok(ShiftFamily { of_base, of_tilde, characters })
}

#[derive(Debug, Clone)]
pub enum Construction {
    Group { subgroup: Subgroup, character: Character, coset_rep: usize, constant: Complex64 },
    Generic { right_shift: AlgebraElement, tilde_shift: AlgebraElement, auxiliary: AlgebraElement },
}

#[derive(Debug, Clone)]
pub struct BiShift {
    pub element: AlgebraElement,
    pub biprojection: Biprojection,
    pub construction: Construction,
}

/// x = c·Σ_{h∈H} χ(h)·λ(hg) on the minus side.
pub fn bishift_group(pair: &TwoBoxPair, h: &Subgroup, chi: &Character, g: usize, constant: Complex64) -> Result<BiShift> {
    let grp = group_of(pair)?;
    if chi.subgroup() != h {
        return Err(ExtremizerError::InvalidCharacter);
    }
    if g >= grp.order() {
        return Err(ExtremizerError::Group(GroupError::NoSuchElement { element: g, order: grp.order() }));
    }
    if constant.norm() == 0.0 {
        return Err(ExtremizerError::ZeroElement);
    }
    let mut v = vec![c(0.0); grp.order()];
    for &x in h.members() {
        v[grp.mul(x, g)] = constant * chi.value(x);
    }
    Ok(BiShift {
        element: AlgebraElement::from_coords(pair.minus(), &v)?,
        biprojection: biprojection_from_subgroup(pair, h)?,
        construction: Construction::Group { subgroup: h.clone(), character: chi.clone(), coset_rep: g, constant },
    })
}

#[derive(Debug, Clone)]
pub enum GenericBishift {
    Bishift(BiShift),
    Degenerate,
}

/// x = ℱ(B̃h) * (y·Bg), normalized to ‖x‖₂ = ‖Bg‖₂.
pub fn bishift_generic(
    pair: &TwoBoxPair,
    bg: &ShiftCertificate,
    bth: &ShiftCertificate,
    y: &AlgebraElement,
) -> Result<GenericBishift> {
    if bg.of_tilde || bg.handedness != Handedness::Right {
        return Err(ExtremizerError::ShiftSideMismatch("Bg must be a right shift of B".into()));
    }
    if !bth.of_tilde || bth.handedness != Handedness::Right {
        return Err(ExtremizerError::ShiftSideMismatch("B̃h must be a right shift of B̃".into()));
    }
    if bth.side != bg.side.opposite() || pair.side_of(y)? != bg.side {
        return Err(ExtremizerError::ShiftSideMismatch("Bg, y and B̃h sides are inconsistent".into()));
    }
    let yb = y.mul(&bg.shift)?;
    let x = pair.coproduct(&pair.fourier(&bth.shift)?, &yb)?;
    let nbg = bg.shift.norm2();
    if x.norm2() <= DEGENERATE_TOL * y.norm2() * nbg {
        return Ok(GenericBishift::Degenerate);
    }
    let x = x.scale_real(nbg / x.norm2());
    Ok(GenericBishift::Bishift(BiShift {
        element: x,
        biprojection: bg.biprojection.clone(),
        construction: Construction::Generic {
            right_shift: bg.shift.clone(),
            tilde_shift: bth.shift.clone(),
            auxiliary: y.clone(),
        },
    }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremalVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_residual: f64,
    pub extremal: bool,
}

/// ‖ℱ(x)‖_∞ = ‖x‖₁/δ₀ within tol.
pub fn is_extremal(pair: &TwoBoxPair, x: &AlgebraElement, tol: f64) -> Result<ExtremalVerdict> {
    if x.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let lhs = pair.fourier(x)?.op_norm()?;
    let rhs = x.p_norm(1.0)? / pair.delta0();
    let relative_residual = (lhs - rhs).abs() / rhs;
    Ok(ExtremalVerdict { lhs, rhs, relative_residual, extremal: relative_residual <= tol })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BipartialVerdict {
    pub x_flatness: f64,
    pub fourier_flatness: f64,
    pub bipartial: bool,
}

/// Both x and ℱ(x) have a single nonzero singular value level.
pub fn is_bipartial_isometry(pair: &TwoBoxPair, x: &AlgebraElement, tol: f64) -> Result<BipartialVerdict> {
    if x.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let x_flatness = flatness(&x.singular_values()?);
    let fourier_flatness = flatness(&pair.fourier(x)?.singular_values()?);
    Ok(BipartialVerdict { x_flatness, fourier_flatness, bipartial: x_flatness <= tol && fourier_flatness <= tol })
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct MinimizerVerdicts {
    pub donoho_stark_equality: bool,
    pub hirschman_beckner_equality: bool,
    pub extremal_bipartial_isometry: bool,
    pub partial_isometry_extremal_preimage: bool,
    pub bishift_of_biprojection: bool,
}

impl MinimizerVerdicts {
    pub fn as_array(&self) -> [bool; 5] {
        [
            self.donoho_stark_equality,
            self.hirschman_beckner_equality,
            self.extremal_bipartial_isometry,
            self.partial_isometry_extremal_preimage,
            self.bishift_of_biprojection,
        ]
    }

    pub fn all(&self) -> bool {
        self.as_array().iter().all(|&b| b)
    }

    pub fn none(&self) -> bool {
        self.as_array().iter().all(|&b| !b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerReport {
    pub support: f64,
    pub fourier_support: f64,
    pub ds_product: f64,
    /// S(x)·S(ℱ(x)) − δ₀².
    pub ds_margin: f64,
    /// H(|y|²) + H(|ℱ(y)|²) − 2 log δ₀ with y = x/‖x‖₂.
    pub hb_margin: f64,
    /// The same quantity before normalization, with prefactor ‖x‖₂².
    pub hb_margin_unnormalized: f64,
    pub extremal: ExtremalVerdict,
    pub bipartial: BipartialVerdict,
    pub preimage_extremal: ExtremalVerdict,
    pub verdicts: MinimizerVerdicts,
    pub consistent: bool,
}

pub fn minimizer_report(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<MinimizerReport> {
    if x.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let fx = pair.fourier(x)?;
    let support = x.support_size(RANK_REL_TOL)?;
    let fourier_support = fx.support_size(RANK_REL_TOL)?;
    let d0 = pair.delta0();
    let ds_product = round_support_product(pair, x, &fx, support * fourier_support)?;
    let ds_margin = ds_product - d0 * d0;

    let nx = x.norm2();
    let y = x.scale_real(1.0 / nx);
    let fy = fx.scale_real(1.0 / nx);
    let hb_margin = y.entropy()? + fy.entropy()? - 2.0 * d0.ln();
    let hb_margin_unnormalized =
        x.entropy()? + fx.entropy()? - nx * nx * (2.0 * d0.ln() - 4.0 * nx.ln());

    let extremal = is_extremal(pair, x, DEFAULT_TOL)?;
    let bipartial = is_bipartial_isometry(pair, x, DEFAULT_TOL)?;
    let preimage_extremal = is_extremal(pair, &pair.fourier_inv(x)?, DEFAULT_TOL)?;
    let verdicts = MinimizerVerdicts {
        donoho_stark_equality: ds_margin.abs() <= DS_ROUND_TOL,
        hirschman_beckner_equality: hb_margin.abs() <= DEFAULT_TOL,
        extremal_bipartial_isometry: extremal.extremal && bipartial.bipartial,
        partial_isometry_extremal_preimage: bipartial.x_flatness <= DEFAULT_TOL && preimage_extremal.extremal,
        bishift_of_biprojection: detect_bishift(pair, x)?,
    };
    let consistent = verdicts.all() || verdicts.none();
    Ok(MinimizerReport {
        support,
        fourier_support,
        ds_product,
        ds_margin,
        hb_margin,
        hb_margin_unnormalized,
        extremal,
        bipartial,
        preimage_extremal,
        verdicts,
        consistent,
    })
}

/// Group-model support products are integers; snap them when within the
/// rounding tolerance.
fn round_support_product(pair: &TwoBoxPair, _x: &AlgebraElement, _fx: &AlgebraElement, product: f64) -> Result<f64> {
    if matches!(pair.model(), Model::Group(_)) {
        let r = product.round();
        if (product - r).abs() <= DS_ROUND_TOL {
            return Ok(r);
        }
    }
    Ok(product)
}

/// Recognize x as a bi-shift: with P = R(x*) and B = (δ/tr P)·(P * P̄),
/// B must be a biprojection, P a right shift of B, and R(ℱ⁻¹(x)) a right
/// shift of R(ℱ(B)).
pub fn detect_bishift(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<bool> {
    if x.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let p = x.adjoint().range_projection(RANK_REL_TOL)?;
    let pbar = pair.contragredient(&p)?;
    let tp = p.trace().re;
    let b = pair.coproduct(&p, &pbar)?.scale_real(pair.delta() / tp);
    if b.is_zero() || !is_biprojection(pair, &b, DEFAULT_TOL)?.is_biprojection {
        return Ok(false);
    }
    if is_shift(pair, &p, &b, Handedness::Right)?.is_none() {
        return Ok(false);
    }
    let bt = pair.fourier(&b)?.range_projection(RANK_REL_TOL)?;
    let q = pair.fourier_inv(x)?.range_projection(RANK_REL_TOL)?;
    Ok(is_shift(pair, &q, &bt, Handedness::Right)?.is_some())
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareRelation {
    pub identity_residual: f64,
    pub flatness_residual: f64,
    /// max |σ − 1| over the nonzero singular values of (δ/‖w‖₂²)·w*w̄*.
    pub unit_residual: f64,
    pub norm1_residual: f64,
}

/// Square relation for a partial isometry w (normalized by ‖w‖_∞) whose
/// ℱ⁻¹ is extremal.
pub fn square_relation_check(pair: &TwoBoxPair, w: &AlgebraElement, tol: f64) -> Result<SquareRelation> {
    if w.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let w = w.scale_real(1.0 / w.op_norm()?);
    let fl = flatness(&w.singular_values()?);
    if fl > tol {
        return Err(ExtremizerError::PreconditionFailed(format!("not a partial isometry (flatness {fl:e})")));
    }
    let pre = is_extremal(pair, &pair.fourier_inv(&w)?, tol)?;
    if !pre.extremal {
        return Err(ExtremizerError::PreconditionFailed(format!(
            "inverse Fourier transform not extremal (residual {:e})",
            pre.relative_residual
        )));
    }
    let delta = pair.delta();
    let wbar = pair.contragredient(&w)?;
    let ws = w.adjoint();
    let wbs = wbar.adjoint();
    let left = pair.coproduct(&ws, &wbar)?.mul(&pair.coproduct(&w, &wbs)?)?;
    let n2 = w.norm2().powi(2);
    let right = pair.coproduct(&ws.mul(&w)?, &wbar.mul(&wbs)?)?.scale_real(n2 / delta);
    let identity_residual = left.sub(&right)?.frobenius() / left.frobenius().max(right.frobenius()).max(f64::MIN_POSITIVE);
    let t = pair.coproduct(&w, &wbs)?.scale_real(delta / n2);
    let s = t.singular_values()?;
    let flatness_residual = flatness(&s);
    let smax = s.first().copied().unwrap_or(0.0);
    let unit_residual = s.iter().filter(|&&v| v > RANK_REL_TOL * smax).map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
    let w1 = w.p_norm(1.0)?;
    let norm1_residual = (w1 - t.p_norm(1.0)?).abs() / w1;
    Ok(SquareRelation { identity_residual, flatness_residual, unit_residual, norm1_residual })
}

#[derive(Debug, Clone)]
pub struct UniquenessSpace {
    pub dimension: usize,
    pub basis: Vec<AlgebraElement>,
    pub singular_values: Vec<f64>,
}

/// Solutions of x·(1 − Bg) = 0 and (1 − B̃h)·ℱ⁻¹(x) = 0.
pub fn uniqueness_space(pair: &TwoBoxPair, bg: &ShiftCertificate, bth: &ShiftCertificate) -> Result<UniquenessSpace> {
    if bg.of_tilde || bg.handedness != Handedness::Right {
        return Err(ExtremizerError::ShiftSideMismatch("Bg must be a right shift of B".into()));
    }
    if !bth.of_tilde || bth.handedness != Handedness::Right || bth.side != bg.side.opposite() {
        return Err(ExtremizerError::ShiftSideMismatch("B̃h must be a right shift of B̃ on the opposite side".into()));
    }
    let distance = bth.base.relative_distance(&bg.biprojection.tilde).unwrap_or(f64::INFINITY);
    if distance > SHIFT_TOL {
        return Err(ExtremizerError::MismatchedBiprojection { distance });
    }
    let side = bg.side;
    let alg = pair.algebra(side);
    let other = pair.algebra(side.opposite());
    let one_minus_bg = AlgebraElement::identity(alg).sub(&bg.shift)?;
    let one_minus_bt = AlgebraElement::identity(other).sub(&bth.shift)?;
    let k = alg.coord_dim();
    let (d, e) = (alg.dim(), other.dim());
    let mut m = CMat::zeros(d * d + e * e, k);
    for col in 0..k {
        let x = pair.basis_element(side, col)?;
        let c1 = x.mul(&one_minus_bg)?;
        let c2 = one_minus_bt.mul(&pair.fourier_inv(&x)?)?;
        for i in 0..d {
            for j in 0..d {
                m[(i * d + j, col)] = c1.entry(i, j);
            }
        }
        for i in 0..e {
            for j in 0..e {
                m[(d * d + i * e + j, col)] = c2.entry(i, j);
            }
        }
    }
    let (ns, singular_values) = null_space(&m, RANK_REL_TOL).map_err(AlgebraError::from)?;
    let basis = (0..ns.ncols())
        .map(|j| {
            let coords: Vec<Complex64> = ns.column(j).iter().copied().collect();
            AlgebraElement::from_coords(alg, &coords).map_err(ExtremizerError::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniquenessSpace { dimension: basis.len(), basis, singular_values })
}

/// ‖b − proj_a(b)‖_F / ‖b‖_F with the Frobenius inner product.
pub fn collinearity_residual(a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    let (ma, mb) = (a.to_dense(), b.to_dense());
    let aa: f64 = ma.iter().map(|z| z.norm_sqr()).sum();
    let nb = mb.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if aa == 0.0 || nb == 0.0 {
        return Err(ExtremizerError::ZeroElement);
    }
    let ab: Complex64 = ma.iter().zip(mb.iter()).map(|(x, y)| x.conj() * y).sum();
    let r = &mb - &ma * (ab / aa);
    Ok(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / nb)
}

#[derive(Debug, Clone)]
pub struct PositiveBiprojection {
    pub normalized: AlgebraElement,
    pub verdict: BiprojectionVerdict,
}

/// x ≥ 0, ℱ(x) ≥ 0 and S(x)S(ℱ(x)) = δ₀² force x/‖x‖_∞ to be a biprojection.
pub fn positive_biprojection_check(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<PositiveBiprojection> {
    if x.is_zero() {
        return Err(ExtremizerError::ZeroElement);
    }
    let fx = pair.fourier(x)?;
    for (name, e) in [("x", x), ("F(x)", &fx)] {
        if e.self_adjoint_residual() > 1e-9 {
            return Err(ExtremizerError::PreconditionFailed(format!("{name} is not self-adjoint")));
        }
        let lam = e.min_eigenvalue()?;
        if lam < -1e-9 * e.op_norm()? {
            return Err(ExtremizerError::PreconditionFailed(format!("{name} is not positive (min eigenvalue {lam:e})")));
        }
    }
    let prod = x.support_size(RANK_REL_TOL)? * fx.support_size(RANK_REL_TOL)?;
    let d0 = pair.delta0();
    if (prod - d0 * d0).abs() > DS_ROUND_TOL {
        return Err(ExtremizerError::PreconditionFailed(format!(
            "support product {prod} differs from {}",
            d0 * d0
        )));
    }
    let normalized = x.scale_real(1.0 / x.op_norm()?);
    let verdict = is_biprojection(pair, &normalized, DEFAULT_TOL)?;
    Ok(PositiveBiprojection { normalized, verdict })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnimodularSum {
    pub is_coset: bool,
    pub is_subgroup: bool,
    pub extremal: bool,
    pub trace_norm: f64,
    pub bishift: bool,
    pub positive: bool,
}

/// x = Σ_{g∈S} ω_g λ(g) with |ω_g| = 1 on the group minus side.
pub fn unimodular_sum(pair: &TwoBoxPair, support: &[usize], phases: &[Complex64]) -> Result<(AlgebraElement, UnimodularSum)> {
    let g = group_of(pair)?;
    if support.is_empty() || support.len() != phases.len() {
        return Err(ExtremizerError::PreconditionFailed("support and phases must be nonempty and aligned".into()));
    }
    let mut v = vec![c(0.0); g.order()];
    let mut mask = vec![false; g.order()];
    for (&s, &w) in support.iter().zip(phases) {
        v[s] = w;
        mask[s] = true;
    }
    let x = AlgebraElement::from_coords(pair.minus(), &v)?;
    let s0 = support[0];
    let shifted: Vec<usize> = support.iter().map(|&s| g.mul(s, g.inv(s0))).collect();
    let is_coset = Subgroup::new(g.clone(), &shifted).is_ok();
    let is_subgroup = Subgroup::new(g.clone(), support).is_ok();
    let ext = is_extremal(pair, &x, DEFAULT_TOL)?;
    let positive = x.self_adjoint_residual() <= 1e-12 && x.min_eigenvalue()? >= -1e-9 * x.op_norm()?;
    let summary = UnimodularSum {
        is_coset,
        is_subgroup,
        extremal: ext.extremal,
        trace_norm: x.p_norm(1.0)?,
        bishift: detect_bishift(pair, &x)?,
        positive,
    };
    Ok((x, summary))
}

/// JSON certificate for a group bi-shift.
pub fn bishift_certificate(pair: &TwoBoxPair, b: &BiShift, report: &MinimizerReport) -> Value {
    let mut checks = BTreeMap::new();
    checks.insert("donoho_stark_margin".to_string(), report.ds_margin);
    checks.insert("hirschman_beckner_margin".to_string(), report.hb_margin);
    checks.insert("extremal_residual".to_string(), report.extremal.relative_residual);
    checks.insert("x_flatness".to_string(), report.bipartial.x_flatness);
    checks.insert("fourier_flatness".to_string(), report.bipartial.fourier_flatness);
    checks.insert("preimage_extremal_residual".to_string(), report.preimage_extremal.relative_residual);
    match &b.construction {
        Construction::Group { subgroup, character, coset_rep, constant } => {
            let exps: BTreeMap<String, [usize; 2]> = subgroup
                .members()
                .iter()
                .map(|&h| {
                    let (k, n) = character.exponent(h);
                    (h.to_string(), [k, n])
                })
                .collect();
            json!({
                "kind": "bishift",
                "group": pair.label(),
                "subgroup": subgroup.members(),
                "character": { "exponents": exps },
                "coset_rep": coset_rep,
                "constant": [constant.re, constant.im],
                "verdicts": report.verdicts,
                "checks": checks,
            })
        }
        Construction::Generic { .. } => json!({
            "kind": "bishift",
            "group": pair.label(),
            "construction": "generic",
            "verdicts": report.verdicts,
            "checks": checks,
        }),
    }
}

/// All (H, χ, g) bi-shifts with g ranging over right-coset representatives.
pub fn enumerate_group_bishifts(pair: &TwoBoxPair) -> Result<Vec<BiShift>> {
    let g = group_of(pair)?;
    let subs = crate::group::enumerate_subgroups(g)?;
    let mut out = Vec::new();
    for h in &subs {
        for chi in one_dim_characters(h) {
            for coset in right_cosets(h) {
                out.push(bishift_group(pair, h, &chi, coset[0], c(1.0))?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, enumerate_subgroups, symmetric};
    use std::sync::Arc;

    fn gm(n: usize) -> TwoBoxPair {
        crate::two_box::group_model(Arc::new(cyclic(n).unwrap())).unwrap()
    }

    fn sub(p: &TwoBoxPair, m: &[usize]) -> Subgroup {
        Subgroup::new(p.group().unwrap().clone(), m).unwrap()
    }

    #[test]
    fn subgroup_biprojections() {
        let p = gm(4);
        let b = biprojection_from_subgroup(&p, &sub(&p, &[0, 2])).unwrap();
        let fb = p.fourier(&b.element).unwrap();
        assert!(fb.relative_distance(&b.tilde).unwrap() < 1e-15);
        assert!(is_biprojection(&p, &b.element, DEFAULT_TOL).unwrap().is_biprojection);
        let r = p.fourier(&b.element).unwrap().range_projection(RANK_REL_TOL).unwrap();
        assert!(r.relative_distance(&b.tilde).unwrap() < 1e-12);
        let triv = biprojection_from_subgroup(&p, &sub(&p, &[0])).unwrap();
        assert!(triv.tilde.relative_distance(&p.identity(Side::Minus)).unwrap() < 1e-15);
    }

    #[test]
    fn literal_biprojection_definition() {
        let p = gm(4);
        let d1 = p.basis_element(Side::Plus, 1).unwrap();
        let v = is_biprojection(&p, &d1, DEFAULT_TOL).unwrap();
        assert!(!v.is_biprojection);
        assert!(v.fourier_flatness < 1e-15);
        let x = p.basis_element(Side::Plus, 0).unwrap().add(&d1).unwrap();
        let v = is_biprojection(&p, &x, DEFAULT_TOL).unwrap();
        assert!(!v.is_biprojection && v.fourier_flatness > 0.1);
    }

    #[test]
    fn shifts_in_cyclic6() {
        let p = gm(6);
        let b = biprojection_from_subgroup(&p, &sub(&p, &[0, 3])).unwrap();
        let ind = |m: &[usize]| {
            let mut v = vec![c(0.0); 6];
            for &i in m {
                v[i] = c(1.0);
            }
            AlgebraElement::from_coords(p.plus(), &v).unwrap()
        };
        assert!(is_shift(&p, &ind(&[1, 4]), &b.element, Handedness::Right).unwrap().is_some());
        assert!(is_shift(&p, &ind(&[1, 2]), &b.element, Handedness::Right).unwrap().is_none());
        assert!(is_shift(&p, &b.element, &b.element, Handedness::Left).unwrap().is_some());
        let notproj = ind(&[1]).scale_real(2.0);
        assert!(matches!(
            is_shift(&p, &notproj, &b.element, Handedness::Right),
            Err(ExtremizerError::NotAProjection { .. })
        ));
    }

    #[test]
    fn enumerate_shift_counts() {
        let p = gm(4);
        let b = biprojection_from_subgroup(&p, &sub(&p, &[0, 2])).unwrap();
        let f = enumerate_shifts(&p, &b, Handedness::Right).unwrap();
        assert_eq!(f.of_base.len(), 2);
        assert_eq!(f.of_tilde.len(), 2);
        let s3 = Arc::new(symmetric(3).unwrap());
        let q = crate::two_box::group_model(s3.clone()).unwrap();
        let a3 = enumerate_subgroups(&s3).unwrap().into_iter().find(|h| h.order() == 3).unwrap();
        let b = biprojection_from_subgroup(&q, &a3).unwrap();
        assert_eq!(enumerate_shifts(&q, &b, Handedness::Right).unwrap().of_base.len(), 2);
        let spin = crate::two_box::spin_model(2).unwrap();
        assert!(matches!(biprojection_from_subgroup(&spin, &a3), Err(ExtremizerError::ModelMismatch(_))));
    }

    #[test]
    fn cyclic4_bishift() {
        let p = gm(4);
        let h = sub(&p, &[0, 2]);
        let chars = one_dim_characters(&h);
        let chi = chars.iter().find(|ch| !ch.is_trivial()).unwrap();
        let x = bishift_group(&p, &h, chi, 1, c(1.0)).unwrap();
        let expect = p.basis_element(Side::Minus, 1).unwrap().sub(&p.basis_element(Side::Minus, 3).unwrap()).unwrap();
        assert!(x.element.relative_distance(&expect).unwrap() < 1e-15);
        let r = minimizer_report(&p, &x.element).unwrap();
        assert_eq!(r.support, 2.0);
        assert_eq!(r.fourier_support, 2.0);
        assert_eq!(r.ds_margin, 0.0);
        assert!(r.verdicts.all(), "{r:?}");
        let sq = square_relation_check(&p, &x.element, DEFAULT_TOL).unwrap();
        assert!(sq.identity_residual < 1e-10 && sq.flatness_residual < 1e-10 && sq.norm1_residual < 1e-10, "{sq:?}");
    }

    #[test]
    fn generic_bishift_matches_group_form() {
        let p = gm(4);
        let h = sub(&p, &[0, 2]);
        let b = biprojection_from_subgroup(&p, &h).unwrap();
        let fam = enumerate_shifts(&p, &b, Handedness::Right).unwrap();
        let one = p.identity(Side::Plus);
        match bishift_generic(&p, &fam.of_base[0], &fam.of_tilde[0], &one).unwrap() {
            GenericBishift::Bishift(x) => {
                assert!(collinearity_residual(&b.element, &x.element).unwrap() < 1e-12);
            }
            GenericBishift::Degenerate => panic!("degenerate"),
        }
        let coords: Vec<Complex64> = (0..4).map(|k| Complex64::new(1.0 + k as f64, 0.5 - k as f64 * 0.3)).collect();
        let y = AlgebraElement::from_coords(p.plus(), &coords).unwrap();
        for (gi, bg) in fam.of_base.iter().enumerate() {
            for (ci, bt) in fam.of_tilde.iter().enumerate() {
                let GenericBishift::Bishift(x) = bishift_generic(&p, bg, bt, &y).unwrap() else { panic!() };
                let rep = match &bg.label {
                    ShiftLabel::Coset { rep, .. } => *rep,
                    _ => unreachable!(),
                };
                let y = bishift_group(&p, &h, &fam.characters[ci], rep, c(1.0)).unwrap();
                let fy = p.fourier(&y.element).unwrap();
                assert!(collinearity_residual(&fy, &x.element).unwrap() < 1e-12, "{gi} {ci}");
            }
        }
        let zero = AlgebraElement::zero(p.plus());
        assert!(matches!(bishift_generic(&p, &fam.of_base[0], &fam.of_tilde[0], &zero).unwrap(), GenericBishift::Degenerate));
        assert!(matches!(
            bishift_generic(&p, &fam.of_tilde[0], &fam.of_base[0], &one),
            Err(ExtremizerError::ShiftSideMismatch(_))
        ));
    }

    #[test]
    fn extremality_examples() {
        let p = gm(2);
        let x = p.basis_element(Side::Plus, 0).unwrap().add(&p.basis_element(Side::Plus, 1).unwrap().scale_real(2.0)).unwrap();
        let v = is_extremal(&p, &x, DEFAULT_TOL).unwrap();
        assert!(v.extremal && (v.rhs - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!(!is_bipartial_isometry(&p, &x, DEFAULT_TOL).unwrap().bipartial);
        let y = p.basis_element(Side::Plus, 0).unwrap().add(&p.basis_element(Side::Plus, 1).unwrap().scale(Complex64::new(0.0, 1.01))).unwrap();
        let v = is_extremal(&p, &y, DEFAULT_TOL).unwrap();
        assert!(v.rhs - v.lhs > 0.0 && !v.extremal);
        assert!(matches!(is_extremal(&p, &AlgebraElement::zero(p.plus()), 1e-8), Err(ExtremizerError::ZeroElement)));
    }

    #[test]
    fn uniqueness_cyclic4() {
        let p = gm(4);
        let h = sub(&p, &[0, 2]);
        let b = biprojection_from_subgroup(&p, &h).unwrap();
        let fam = enumerate_shifts(&p, &b, Handedness::Right).unwrap();
        for bg in &fam.of_base {
            for bt in &fam.of_tilde {
                assert_eq!(uniqueness_space(&p, bg, bt).unwrap().dimension, 1);
            }
        }
        let b2 = biprojection_from_subgroup(&p, &sub(&p, &[0])).unwrap();
        let fam2 = enumerate_shifts(&p, &b2, Handedness::Right).unwrap();
        assert!(matches!(
            uniqueness_space(&p, &fam.of_base[0], &fam2.of_tilde[0]),
            Err(ExtremizerError::MismatchedBiprojection { .. })
        ));
    }

    #[test]
    fn positive_biprojection() {
        let p = gm(6);
        let b = biprojection_from_subgroup(&p, &sub(&p, &[0, 2, 4])).unwrap();
        assert!(positive_biprojection_check(&p, &b.element).unwrap().verdict.is_biprojection);
        assert!(positive_biprojection_check(&p, &b.element.scale_real(2.0)).unwrap().verdict.is_biprojection);
        let mut v = b.element.coords();
        v[1] = c(0.1);
        let x = AlgebraElement::from_coords(p.plus(), &v).unwrap();
        assert!(matches!(positive_biprojection_check(&p, &x), Err(ExtremizerError::PreconditionFailed(_))));
    }

    #[test]
    fn group_bishift_count() {
        assert_eq!(enumerate_group_bishifts(&gm(4)).unwrap().len(), 12);
        assert_eq!(enumerate_group_bishifts(&gm(1)).unwrap().len(), 1);
    }
}
