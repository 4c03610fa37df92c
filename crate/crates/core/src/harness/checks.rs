//! Single-instance margins for each inequality and structure identity.
//!
//! Inequality margins are relative, (RHS − LHS)/RHS, so a violation shows
//! up as a negative number. Residuals are nonnegative.

use serde::Serialize;

use super::Exponent;
use crate::algebra::{p_norm_of, AlgebraElement, RANK_REL_TOL};
use crate::two_box::{TwoBoxError, TwoBoxPair};

type Result<T> = std::result::Result<T, TwoBoxError>;

/// Singular values with trace weight, so several norms share one SVD.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub trace_scale: f64,
}

impl Spectrum {
    pub fn of(x: &AlgebraElement) -> Result<Self> {
        Ok(Spectrum { values: x.singular_values()?, trace_scale: x.algebra().trace_scale() })
    }

    pub fn norm(&self, p: Exponent) -> f64 {
        p_norm_of(&self.values, self.trace_scale, p.value())
    }
}

fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        (rhs - lhs) / rhs
    } else {
        -lhs
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HausdorffYoungMargin {
    pub p: Exponent,
    pub q: Exponent,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// ‖ℱ(x)‖_p ≤ (1/δ₀)^{1−2/p}·‖x‖_q over the grid.
pub fn check_hausdorff_young(pair: &TwoBoxPair, x: &AlgebraElement, grid: &[Exponent]) -> Result<Vec<HausdorffYoungMargin>> {
    let sx = Spectrum::of(x)?;
    let sf = Spectrum::of(&pair.fourier(x)?)?;
    let d0 = pair.delta0();
    Ok(grid
        .iter()
        .map(|&p| {
            let q = p.conjugate();
            let pv = p.value();
            let expo = 1.0 - 2.0 / pv;
            let lhs = sf.norm(p);
            let rhs = d0.powf(-expo) * sx.norm(q);
            HausdorffYoungMargin { p, q, lhs, rhs, margin: relative_margin(lhs, rhs) }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct YoungMargin {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// ‖x*y‖_r ≤ ‖x‖_p‖y‖_q/δ₀ over the exponent triples.
pub fn check_young(pair: &TwoBoxPair, x: &AlgebraElement, y: &AlgebraElement, triples: &[[Exponent; 3]]) -> Result<Vec<YoungMargin>> {
    check_young_with(pair, x, y, triples, pair.delta0())
}

/// As [`check_young`] with an explicit constant 1/`delta`.
pub fn check_young_with(
    pair: &TwoBoxPair,
    x: &AlgebraElement,
    y: &AlgebraElement,
    triples: &[[Exponent; 3]],
    delta: f64,
) -> Result<Vec<YoungMargin>> {
    let sx = Spectrum::of(x)?;
    let sy = Spectrum::of(y)?;
    let sxy = Spectrum::of(&pair.coproduct(x, y)?)?;
    Ok(triples
        .iter()
        .map(|&[p, q, r]| {
            let lhs = sxy.norm(r);
            let rhs = sx.norm(p) * sy.norm(q) / delta;
            YoungMargin { p, q, r, lhs, rhs, margin: relative_margin(lhs, rhs) }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DonohoStark {
    pub support: f64,
    pub fourier_support: f64,
    pub product: f64,
    pub margin: f64,
}

/// S(x)·S(ℱ(x)) − δ₀².
pub fn check_donoho_stark(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<DonohoStark> {
    let support = x.support_size(RANK_REL_TOL)?;
    let fourier_support = pair.fourier(x)?.support_size(RANK_REL_TOL)?;
    let product = support * fourier_support;
    let d0 = pair.delta0();
    Ok(DonohoStark { support, fourier_support, product, margin: product - d0 * d0 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HirschmanBeckner {
    pub entropy: f64,
    pub fourier_entropy: f64,
    pub margin: f64,
    /// log S(y) − H(|y|²) and the same for ℱ(y).
    pub support_gap: f64,
    pub fourier_support_gap: f64,
    /// log S(y) + log S(ℱ(y)) − 2 log δ₀ minus the entropy margin.
    pub bound_gap: f64,
}

/// H(|y|²) + H(|ℱ(y)|²) − 2 log δ₀ with y = x/‖x‖₂.
pub fn check_hirschman_beckner(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<HirschmanBeckner> {
    let y = x.scale_real(1.0 / x.norm2());
    let fy = pair.fourier(&y)?;
    let entropy = y.entropy()?;
    let fourier_entropy = fy.entropy()?;
    let ld = pair.delta0().ln();
    let margin = entropy + fourier_entropy - 2.0 * ld;
    let ls = y.support_size(RANK_REL_TOL)?.ln();
    let lfs = fy.support_size(RANK_REL_TOL)?.ln();
    Ok(HirschmanBeckner {
        entropy,
        fourier_entropy,
        margin,
        support_gap: ls - entropy,
        fourier_support_gap: lfs - fourier_entropy,
        bound_gap: ls + lfs - 2.0 * ld - margin,
    })
}

/// |‖ℱ(x)‖₂ − ‖x‖₂| / ‖x‖₂.
pub fn plancherel_residual(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<f64> {
    let n = x.norm2();
    Ok((pair.fourier(x)?.norm2() - n).abs() / n)
}

/// ‖ℱ⁴(x) − x‖_F / ‖x‖_F.
pub fn period_residual(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<f64> {
    let x4 = pair.contragredient(&pair.contragredient(x)?)?;
    Ok(x4.sub(x)?.frobenius() / x.frobenius())
}

/// ‖ℱ⁻¹(x*) − ℱ(x)*‖_F / ‖ℱ(x)‖_F.
pub fn fourier_adjoint_residual(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<f64> {
    let a = pair.fourier_inv(&x.adjoint())?;
    let b = pair.fourier(x)?.adjoint();
    Ok(a.sub(&b)?.frobenius() / b.frobenius())
}

/// Distance between the pullback coproduct and its closed form, if any.
pub fn closed_form_residual(pair: &TwoBoxPair, x: &AlgebraElement, y: &AlgebraElement) -> Result<Option<f64>> {
    let Some(cf) = pair.coproduct_closed_form(x, y)? else { return Ok(None) };
    Ok(Some(pair.coproduct(x, y)?.relative_distance(&cf)?))
}

/// min eig(a*b)/‖a*b‖_∞ for positive a, b.
pub fn schur_margin(pair: &TwoBoxPair, a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    let ab = pair.coproduct(a, b)?;
    let ab = ab.add(&ab.adjoint())?.scale_real(0.5);
    let n = ab.op_norm()?;
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(ab.min_eigenvalue()? / n)
}

/// The six trace expressions tr((a*b)c̄), tr((b*c)ā), tr((c*a)b̄),
/// tr((c̄*b̄)a), tr((ā*c̄)b), tr((b̄*ā)c).
pub fn trace_exchange_values(
    pair: &TwoBoxPair,
    a: &AlgebraElement,
    b: &AlgebraElement,
    c: &AlgebraElement,
) -> Result<[num_complex::Complex64; 6]> {
    let (ab, bb, cb) = (pair.contragredient(a)?, pair.contragredient(b)?, pair.contragredient(c)?);
    let t = |x: &AlgebraElement, y: &AlgebraElement, z: &AlgebraElement| -> Result<num_complex::Complex64> {
        Ok(pair.coproduct(x, y)?.mul(z)?.trace())
    };
    Ok([t(a, b, &cb)?, t(b, c, &ab)?, t(c, a, &bb)?, t(&cb, &bb, a)?, t(&ab, &cb, b)?, t(&bb, &ab, c)?])
}

/// Largest pairwise distance among the six values, relative to the largest.
pub fn trace_exchange_residual(pair: &TwoBoxPair, a: &AlgebraElement, b: &AlgebraElement, c: &AlgebraElement) -> Result<f64> {
    let v = trace_exchange_values(pair, a, b, c)?;
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut spread = 0.0f64;
    for i in 0..6 {
        for j in i + 1..6 {
            spread = spread.max((v[i] - v[j]).norm());
        }
    }
    Ok(spread / scale)
}

/// ‖PQ − P‖_F/‖P‖_F with P = R(x*y), Q = R(R(x)*R(y)).
pub fn range_domination_residual(pair: &TwoBoxPair, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    let p = pair.coproduct(x, y)?.range_projection(RANK_REL_TOL)?;
    let rx = x.range_projection(RANK_REL_TOL)?;
    let ry = y.range_projection(RANK_REL_TOL)?;
    let q = pair.coproduct(&rx, &ry)?.range_projection(RANK_REL_TOL)?;
    let np = p.frobenius();
    if np == 0.0 {
        return Ok(0.0);
    }
    Ok(p.mul(&q)?.sub(&p)?.frobenius() / np)
}

/// (‖x‖₁/δ₀ − ‖ℱ(x)‖_∞)/(‖x‖₁/δ₀).
pub fn tr1_margin(pair: &TwoBoxPair, x: &AlgebraElement) -> Result<f64> {
    let rhs = x.p_norm(1.0)? / pair.delta0();
    let lhs = pair.fourier(x)?.op_norm()?;
    Ok(relative_margin(lhs, rhs))
}

/// max over the triples of |margin| for x = y = 1 with the constant 1/δ.
pub fn young_identity_residual(pair: &TwoBoxPair, side: crate::two_box::Side, triples: &[[Exponent; 3]]) -> Result<f64> {
    let one = pair.identity(side);
    let m = check_young_with(pair, &one, &one, triples, pair.delta())?;
    Ok(m.iter().map(|v| v.margin.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_box::Side;

    fn pair(s: &str) -> TwoBoxPair {
        TwoBoxPair::from_spec(s).unwrap()
    }

    #[test]
    fn hausdorff_young_two_by_two_circulant() {
        let p = pair("group:cyclic:2");
        let x = p.basis_element(Side::Plus, 0).unwrap().sub(&p.basis_element(Side::Plus, 1).unwrap()).unwrap();
        let m = check_hausdorff_young(&p, &x, &[Exponent::INF]).unwrap();
        assert!((m[0].lhs - 2f64.sqrt()).abs() < 1e-14);
        assert!((m[0].rhs - 2f64.sqrt()).abs() < 1e-14);
        assert!(m[0].margin.abs() < 1e-14);
    }

    #[test]
    fn young_convolution_example() {
        let p = pair("group:cyclic:3");
        let x = p.basis_element(Side::Plus, 1).unwrap();
        let y = p.basis_element(Side::Plus, 2).unwrap();
        let one = Exponent::new(1.0).unwrap();
        let m = check_young(&p, &x, &y, &[[one, one, one]]).unwrap();
        assert!((m[0].lhs - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(m[0].margin.abs() < 1e-14);
    }

    #[test]
    fn donoho_stark_examples() {
        let p = pair("group:cyclic:3");
        let x = p.basis_element(Side::Plus, 0).unwrap().add(&p.basis_element(Side::Plus, 1).unwrap()).unwrap();
        let d = check_donoho_stark(&p, &x).unwrap();
        assert_eq!((d.support, d.fourier_support), (2.0, 3.0));
        assert!((d.margin - 3.0).abs() < 1e-12);
        let s = pair("spin:2");
        let e11 = s.basis_element(Side::Plus, 0).unwrap();
        let d = check_donoho_stark(&s, &e11).unwrap();
        assert!((d.fourier_support - 0.5).abs() < 1e-15);
        assert!(d.margin.abs() < 1e-15);
    }

    #[test]
    fn entropy_equality_witnesses() {
        let p = pair("group:cyclic:6");
        let d = p.basis_element(Side::Plus, 2).unwrap();
        assert!(check_hirschman_beckner(&p, &d).unwrap().margin.abs() < 1e-12);
        let ones = p.identity(Side::Plus);
        assert!(check_hirschman_beckner(&p, &ones).unwrap().margin.abs() < 1e-12);
    }

    #[test]
    fn identity_sharpness_every_model() {
        let grid = super::super::default_young_grid();
        for s in ["group:cyclic:4", "spin:3", "fixedpoint:cyclic:3-regular", "fixedpoint:trivial:2"] {
            let p = pair(s);
            for side in [Side::Plus, Side::Minus] {
                assert!(young_identity_residual(&p, side, &grid).unwrap() < 1e-12, "{s}");
            }
        }
    }
}
