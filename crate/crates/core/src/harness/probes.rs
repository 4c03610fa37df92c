//! Report-only probes. They never fail a suite.

use rayon::prelude::*;
use serde::Serialize;

use super::checks::Spectrum;
use super::sampling::{sample_element, stream_seed, ElementClass};
use super::Exponent;
use crate::algebra::{AlgebraElement, RANK_REL_TOL};
use crate::two_box::{Model, Side, TwoBoxError, TwoBoxPair};

type Result<T> = std::result::Result<T, TwoBoxError>;

#[derive(Debug, Clone, Serialize)]
pub struct TaoReport {
    pub p: usize,
    pub budget: usize,
    pub observed_min: f64,
    pub predicted_min: f64,
    /// Minimum of S(x) + S(ℱ(x)) per support size 1..=p.
    pub per_support_min: Vec<f64>,
    pub matches_prediction: bool,
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Whether the pair is a group model of prime order (necessarily cyclic).
pub fn tao_applicable(pair: &TwoBoxPair) -> bool {
    pair.group().is_some_and(|g| is_prime(g.order()))
}

/// Minimum of S(x) + S(ℱ(x)) over `budget` sparse plus-side samples, with
/// support sizes cycling through 1..=p.
pub fn probe_tao_sum(pair: &TwoBoxPair, budget: usize, master_seed: u64) -> Result<TaoReport> {
    let p = match pair.model() {
        Model::Group(g) if is_prime(g.order()) => g.order(),
        _ => return Err(TwoBoxError::UnsupportedModel(format!("{} is not a prime-order group model", pair.label()))),
    };
    let stream = stream_seed(master_seed, "probe/tao_sum");
    let sums: Vec<(usize, f64)> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let k = 1 + i % p;
            let x = sample_element(pair, Side::Plus, ElementClass::Sparse(k), stream, i as u64);
            let s = x.support_size(RANK_REL_TOL).unwrap_or(f64::NAN);
            let fs = pair.fourier(&x).and_then(|f| Ok(f.support_size(RANK_REL_TOL)?)).unwrap_or(f64::NAN);
            (k, s + fs)
        })
        .collect();
    let mut per_support_min = vec![f64::INFINITY; p];
    for &(k, s) in &sums {
        per_support_min[k - 1] = per_support_min[k - 1].min(s);
    }
    let observed_min = per_support_min.iter().copied().fold(f64::INFINITY, f64::min);
    let predicted_min = (p + 1) as f64;
    Ok(TaoReport {
        p,
        budget,
        observed_min,
        predicted_min,
        per_support_min,
        matches_prediction: observed_min == predicted_min,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantMargins {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub lhs: f64,
    pub rhs_inv_n0: f64,
    pub rhs_inv_n0_squared: f64,
    pub margin_inv_n0: f64,
    pub margin_inv_n0_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpinYoungReport {
    pub n: usize,
    pub n0: usize,
    pub identity: Vec<ConstantMargins>,
    /// Largest LHS/RHS ratio for the 1/n₀² constant at the identity.
    pub identity_violation_factor: f64,
    pub samples: usize,
    pub min_margin_inv_n0: f64,
    pub min_margin_inv_n0_squared: f64,
    pub inv_n0_holds: bool,
    pub inv_n0_squared_holds: bool,
}

/// ‖A∘B‖_r against C·‖A‖_p‖B‖_q for C = 1/n₀ and C = 1/n₀², with
/// matrix-trace norms on the commutant.
pub fn constant_margins(
    a: &AlgebraElement,
    b: &AlgebraElement,
    n0: usize,
    triples: &[[Exponent; 3]],
) -> Result<Vec<ConstantMargins>> {
    let h = AlgebraElement::from_matrix(a.algebra(), &a.to_dense().component_mul(&b.to_dense()))?;
    let (sa, sb, sh) = (Spectrum::of(a)?, Spectrum::of(b)?, Spectrum::of(&h)?);
    let n0 = n0 as f64;
    Ok(triples
        .iter()
        .map(|&[p, q, r]| {
            let lhs = sh.norm(r);
            let base = sa.norm(p) * sb.norm(q);
            let (r1, r2) = (base / n0, base / (n0 * n0));
            ConstantMargins {
                p,
                q,
                r,
                lhs,
                rhs_inv_n0: r1,
                rhs_inv_n0_squared: r2,
                margin_inv_n0: (r1 - lhs) / r1,
                margin_inv_n0_squared: (r2 - lhs) / r2,
            }
        })
        .collect())
}

pub fn probe_spin_young_constant(
    pair: &TwoBoxPair,
    samples: usize,
    triples: &[[Exponent; 3]],
    master_seed: u64,
    slack: f64,
) -> Result<SpinYoungReport> {
    let (n, n0) = match pair.model() {
        Model::FixedPoint(a) => (a.point_count(), a.min_orbit_size()),
        Model::Spin(n) => (*n, 1),
        Model::Group(_) => return Err(TwoBoxError::UnsupportedModel(format!("{} is not a spin-type model", pair.label()))),
    };
    let one = pair.identity(Side::Plus);
    let identity = constant_margins(&one, &one, n0, triples)?;
    let identity_violation_factor = identity.iter().map(|m| m.lhs / m.rhs_inv_n0_squared).fold(0.0, f64::max);
    let sa = stream_seed(master_seed, "probe/spin_young/a");
    let sb = stream_seed(master_seed, "probe/spin_young/b");
    let per: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let a = sample_element(pair, Side::Plus, ElementClass::Generic, sa, i as u64);
            let b = sample_element(pair, Side::Plus, ElementClass::Generic, sb, i as u64);
            match constant_margins(&a, &b, n0, triples) {
                Ok(m) => m.iter().fold((f64::INFINITY, f64::INFINITY), |(x, y), v| {
                    (x.min(v.margin_inv_n0), y.min(v.margin_inv_n0_squared))
                }),
                Err(_) => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            }
        })
        .collect();
    let mut min1 = identity.iter().map(|m| m.margin_inv_n0).fold(f64::INFINITY, f64::min);
    let mut min2 = identity.iter().map(|m| m.margin_inv_n0_squared).fold(f64::INFINITY, f64::min);
    for (a, b) in per {
        min1 = min1.min(a);
        min2 = min2.min(b);
    }
    Ok(SpinYoungReport {
        n,
        n0,
        identity,
        identity_violation_factor,
        samples,
        min_margin_inv_n0: min1,
        min_margin_inv_n0_squared: min2,
        inv_n0_holds: min1 >= -slack,
        inv_n0_squared_holds: min2 >= -slack,
    })
}
