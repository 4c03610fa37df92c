//! Deterministic element sampling.
//!
//! Sample `index` of a stream with seed `s` is drawn from a `ChaCha8Rng`
//! seeded with `sample_seed(s, index) = splitmix64(splitmix64(s) ^ index)`,
//! so any sample can be regenerated on its own and parallel runs agree with
//! serial ones.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::AlgebraElement;
use crate::two_box::{Model, Side, TwoBoxPair};

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a, used to derive independent streams from check names.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

pub fn sample_seed(stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(stream) ^ index)
}

pub fn stream_seed(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ fnv1a(tag))
}

pub fn sample_rng(stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sample_seed(stream, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Generic,
    Positive,
    SelfAdjoint,
    Projection,
    PartialIsometry,
    Unitary,
    Sparse(usize),
    BiunitaryCandidate,
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementClass::Generic => f.write_str("generic"),
            ElementClass::Positive => f.write_str("positive"),
            ElementClass::SelfAdjoint => f.write_str("self_adjoint"),
            ElementClass::Projection => f.write_str("projection"),
            ElementClass::PartialIsometry => f.write_str("partial_isometry"),
            ElementClass::Unitary => f.write_str("unitary"),
            ElementClass::Sparse(k) => write!(f, "sparse({k})"),
            ElementClass::BiunitaryCandidate => f.write_str("biunitary_candidate"),
        }
    }
}

impl FromStr for ElementClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Ok(match s {
            "generic" => ElementClass::Generic,
            "positive" => ElementClass::Positive,
            "self_adjoint" => ElementClass::SelfAdjoint,
            "projection" => ElementClass::Projection,
            "partial_isometry" => ElementClass::PartialIsometry,
            "unitary" => ElementClass::Unitary,
            "biunitary_candidate" => ElementClass::BiunitaryCandidate,
            _ => {
                let k = s
                    .strip_prefix("sparse(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("sparse:"))
                    .ok_or_else(|| format!("unknown element class `{s}`"))?;
                let k: usize = k.parse().map_err(|_| format!("bad sparsity in `{s}`"))?;
                if k == 0 {
                    return Err("sparse(k) needs k ≥ 1".into());
                }
                ElementClass::Sparse(k)
            }
        })
    }
}

impl Serialize for ElementClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Standard complex Gaussian matrix projected into the algebra.
fn generic(pair: &TwoBoxPair, side: Side, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let alg = pair.algebra(side);
    let coords: Vec<Complex64> = alg
        .basis()
        .supports()
        .iter()
        .map(|s| gaussian(rng) / (s.len() as f64).sqrt())
        .collect();
    AlgebraElement::from_coords(alg, &coords).expect("coordinate count matches basis")
}

/// Indices of distinct eigenvalue clusters' gaps, usable as spectral cut
/// points (values sorted descending).
fn gaps(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    values
        .windows(2)
        .filter(|w| w[0] - w[1] > 1e-6 * scale)
        .map(|w| 0.5 * (w[0] + w[1]))
        .collect()
}

fn projection(pair: &TwoBoxPair, side: Side, rng: &mut ChaCha8Rng) -> Option<AlgebraElement> {
    let z = generic(pair, side, rng);
    let h = z.add(&z.adjoint()).ok()?.scale_real(0.5);
    let eig = h.hermitian_eig().ok()?;
    let cuts = gaps(&eig.values);
    if cuts.is_empty() {
        return Some(pair.identity(side));
    }
    let t = cuts[rng.random_range(0..cuts.len())];
    h.map_hermitian(|v| if v > t { 1.0 } else { 0.0 }).ok()
}

fn partial_isometry(pair: &TwoBoxPair, side: Side, rng: &mut ChaCha8Rng) -> Option<AlgebraElement> {
    let z = generic(pair, side, rng);
    let g = z.adjoint().mul(&z).ok()?;
    let eig = g.hermitian_eig().ok()?;
    let cuts = gaps(&eig.values);
    let t = if cuts.is_empty() { 0.0 } else { cuts[rng.random_range(0..cuts.len())] };
    let f = g.map_hermitian(|v| if v > t && v > 0.0 { v.powf(-0.5) } else { 0.0 }).ok()?;
    z.mul(&f).ok()
}

fn unitary(pair: &TwoBoxPair, side: Side, rng: &mut ChaCha8Rng) -> Option<AlgebraElement> {
    let z = generic(pair, side, rng);
    let g = z.adjoint().mul(&z).ok()?;
    let f = g.map_hermitian(|v| if v > 0.0 { v.powf(-0.5) } else { 0.0 }).ok()?;
    z.mul(&f).ok()
}

fn sparse(pair: &TwoBoxPair, side: Side, k: usize, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let alg = pair.algebra(side);
    let d = alg.coord_dim();
    let k = k.clamp(1, d);
    let mut coords = vec![Complex64::new(0.0, 0.0); d];
    for i in sample_indices(rng, d, k) {
        coords[i] = gaussian(rng);
    }
    AlgebraElement::from_coords(alg, &coords).expect("coordinate count matches basis")
}

/// Whether g·h = g + h mod n in the given labelling.
fn is_literal_cyclic(pair: &TwoBoxPair) -> Option<usize> {
    let g = pair.group()?;
    let n = g.order();
    (0..n).all(|a| (0..n).all(|b| g.mul(a, b) == (a + b) % n)).then_some(n)
}

/// A known biunitary when one is available: the chirp on a cyclic group's
/// plus side, the unitary DFT on the spin plus side. Other cases, and the
/// cyclic minus side, fall back to a generic unitary.
pub fn biunitary_witness(pair: &TwoBoxPair, side: Side) -> Option<AlgebraElement> {
    use std::f64::consts::PI;
    match (pair.model(), side) {
        (Model::Group(_), Side::Plus) => {
            let n = is_literal_cyclic(pair)?;
            let v: Vec<Complex64> = (0..n)
                .map(|k| {
                    let k2 = (k * k) as f64;
                    let theta = if n % 2 == 0 { PI * k2 / n as f64 } else { 2.0 * PI * k2 / n as f64 };
                    Complex64::from_polar(1.0, theta)
                })
                .collect();
            AlgebraElement::from_coords(pair.plus(), &v).ok()
        }
        (Model::Spin(n), Side::Plus) => {
            let n = *n;
            let s = 1.0 / (n as f64).sqrt();
            let m = crate::linalg::CMat::from_fn(n, n, |i, j| {
                Complex64::from_polar(s, 2.0 * PI * ((i * j) % n) as f64 / n as f64)
            });
            AlgebraElement::from_matrix(pair.plus(), &m).ok()
        }
        (Model::Group(_), Side::Minus) | (Model::Spin(_), Side::Minus) => {
            let w = biunitary_witness(pair, Side::Plus)?;
            let f = pair.fourier(&w).ok()?;
            let s = f.op_norm().ok()?;
            Some(f.scale_real(1.0 / s))
        }
        _ => None,
    }
}

/// Sample `index` of the stream `seed`. Spectral surgery falls back to the
/// generic sample if the eigensolver fails.
pub fn sample_element(pair: &TwoBoxPair, side: Side, class: ElementClass, seed: u64, index: u64) -> AlgebraElement {
    let mut rng = sample_rng(seed, index);
    let fallback = |rng: &mut ChaCha8Rng| generic(pair, side, rng);
    match class {
        ElementClass::Generic => generic(pair, side, &mut rng),
        ElementClass::Positive => {
            let z = generic(pair, side, &mut rng);
            z.adjoint().mul(&z).expect("same algebra")
        }
        ElementClass::SelfAdjoint => {
            let z = generic(pair, side, &mut rng);
            z.add(&z.adjoint()).expect("same algebra").scale_real(0.5)
        }
        ElementClass::Projection => projection(pair, side, &mut rng).unwrap_or_else(|| fallback(&mut rng)),
        ElementClass::PartialIsometry => partial_isometry(pair, side, &mut rng).unwrap_or_else(|| fallback(&mut rng)),
        ElementClass::Unitary => unitary(pair, side, &mut rng).unwrap_or_else(|| fallback(&mut rng)),
        ElementClass::Sparse(k) => sparse(pair, side, k, &mut rng),
        ElementClass::BiunitaryCandidate => match biunitary_witness(pair, side) {
            Some(w) => {
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                w.scale(Complex64::from_polar(1.0, phase))
            }
            None => unitary(pair, side, &mut rng).unwrap_or_else(|| fallback(&mut rng)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_and_classes() {
        let p = TwoBoxPair::from_spec("group:symmetric:3").unwrap();
        for side in [Side::Plus, Side::Minus] {
            let a = sample_element(&p, side, ElementClass::Generic, 7, 3);
            let b = sample_element(&p, side, ElementClass::Generic, 7, 3);
            assert_eq!(a.coords(), b.coords());
            assert_ne!(a.coords(), sample_element(&p, side, ElementClass::Generic, 7, 4).coords());
            for i in 0..20 {
                let x = sample_element(&p, side, ElementClass::Positive, 1, i);
                assert!(x.min_eigenvalue().unwrap() >= -1e-12 * x.op_norm().unwrap());
                let q = sample_element(&p, side, ElementClass::Projection, 1, i);
                for s in q.singular_values().unwrap() {
                    assert!(s.abs() < 1e-10 || (s - 1.0).abs() < 1e-10, "{s}");
                }
                let w = sample_element(&p, side, ElementClass::PartialIsometry, 1, i);
                let ws = w.adjoint().mul(&w).unwrap();
                assert!(ws.projection_residual() < 1e-9);
                let u = sample_element(&p, side, ElementClass::Unitary, 1, i);
                assert!(u.adjoint().mul(&u).unwrap().relative_distance(&p.identity(side)).unwrap() < 1e-10);
                let s = sample_element(&p, side, ElementClass::Sparse(2), 1, i);
                assert!(s.coords().iter().filter(|z| z.norm() > 0.0).count() <= 2);
            }
        }
    }

    #[test]
    fn biunitary_witnesses() {
        for spec in ["group:cyclic:5", "group:cyclic:6", "spin:3"] {
            let p = TwoBoxPair::from_spec(spec).unwrap();
            for side in [Side::Plus, Side::Minus] {
                let w = biunitary_witness(&p, side).unwrap();
                let fw = p.fourier(&w).unwrap();
                let sv = w.singular_values().unwrap();
                assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12), "{spec} {sv:?}");
                let fs = fw.singular_values().unwrap();
                assert!(fs.iter().all(|s| (s - fs[0]).abs() < 1e-10), "{spec} {fs:?}");
            }
        }
    }

    #[test]
    fn class_names_round_trip() {
        for c in ["generic", "sparse(3)", "biunitary_candidate", "partial_isometry"] {
            assert_eq!(c.parse::<ElementClass>().unwrap().to_string(), c);
        }
        assert!("sparse(0)".parse::<ElementClass>().is_err());
    }
}
