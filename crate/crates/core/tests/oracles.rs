//! Cross-checks against small brute-force computations that share no code
//! with the library.

use std::collections::BTreeSet;

use ncup_core::extremizers::enumerate_group_bishifts;
use ncup_core::group::{dihedral, enumerate_subgroups, group_from_spec, one_dim_characters, symmetric, FiniteGroup};
use ncup_core::harness::sampling::{sample_element, ElementClass};
use ncup_core::linalg::{hermitian_eig, null_space, CMat};
use ncup_core::{Side, TwoBoxPair, C64};
use std::sync::Arc;

fn subsets_closed(g: &FiniteGroup) -> BTreeSet<Vec<usize>> {
    let n = g.order();
    assert!(n <= 12);
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let closed = set.iter().all(|&a| set.iter().all(|&b| mask & (1 << g.mul(a, b)) != 0));
        if closed {
            out.insert(set);
        }
    }
    out
}

#[test]
fn subgroups_match_subset_closure() {
    for spec in ["cyclic:6", "cyclic:8", "symmetric:3", "dihedral:4", "product:cyclic:2,cyclic:4", "dihedral:5", "product:cyclic:2,symmetric:3"] {
        let g = Arc::new(group_from_spec(spec).unwrap());
        let brute = subsets_closed(&g);
        let found: BTreeSet<Vec<usize>> = enumerate_subgroups(&g)
            .unwrap()
            .iter()
            .map(|h| {
                let mut m = h.members().to_vec();
                m.sort_unstable();
                m
            })
            .collect();
        assert_eq!(found, brute, "{spec}");
    }
    // Frozen from the closure oracle above.
    let counts: Vec<usize> = ["cyclic:6", "cyclic:8", "symmetric:3", "dihedral:4"]
        .iter()
        .map(|s| subsets_closed(&group_from_spec(s).unwrap()).len())
        .collect();
    assert_eq!(counts, [4, 4, 6, 10]);
}

#[test]
fn symmetric_four_has_thirty_subgroups() {
    let g = Arc::new(symmetric(4).unwrap());
    assert_eq!(enumerate_subgroups(&g).unwrap().len(), 30);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic(a: &FiniteGroup, b: &FiniteGroup) -> bool {
    let n = a.order();
    n == b.order()
        && permutations(n).iter().any(|f| (0..n).all(|x| (0..n).all(|y| f[a.mul(x, y)] == b.mul(f[x], f[y]))))
}

#[test]
fn dihedral_three_is_symmetric_three() {
    let d3 = dihedral(3).unwrap();
    let s3 = symmetric(3).unwrap();
    assert!(isomorphic(&d3, &s3));
    assert!(!isomorphic(&group_from_spec("cyclic:6").unwrap(), &s3));
}

fn hom_count(members: &[usize], g: &FiniteGroup) -> usize {
    // Brute force over assignments to roots of unity of order dividing |H|.
    let m = members.len();
    let root = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
    let mut count = 0;
    let total = m.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        let vals: Vec<C64> = (0..m)
            .map(|_| {
                let v = root(c % m);
                c /= m;
                v
            })
            .collect();
        let pos = |x: usize| members.iter().position(|&y| y == x).unwrap();
        let ok = members.iter().enumerate().all(|(i, &a)| {
            members.iter().enumerate().all(|(j, &b)| (vals[i] * vals[j] - vals[pos(g.mul(a, b))]).norm() < 1e-9)
        });
        count += usize::from(ok);
    }
    count
}

#[test]
fn bishift_counts_match_homomorphism_count() {
    let mut frozen = Vec::new();
    for spec in ["cyclic:4", "cyclic:6", "symmetric:3"] {
        let g = Arc::new(group_from_spec(spec).unwrap());
        let subs = enumerate_subgroups(&g).unwrap();
        let oracle: usize = subs.iter().map(|h| hom_count(h.members(), &g) * h.index()).sum();
        for h in &subs {
            assert_eq!(one_dim_characters(h).len(), hom_count(h.members(), &g));
        }
        let pair = TwoBoxPair::from_spec(&format!("group:{spec}")).unwrap();
        assert_eq!(enumerate_group_bishifts(&pair).unwrap().len(), oracle, "{spec}");
        frozen.push(oracle);
    }
    assert_eq!(frozen, [12, 24, 32]);
}

/// Rank by Gaussian elimination with partial pivoting.
fn rank_by_elimination(a: &CMat, tol: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.nrows(), m.ncols());
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, best) = (r..rows).map(|i| (i, m[(i, c)].norm())).fold((r, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if best <= tol * scale {
            continue;
        }
        m.swap_rows(r, piv);
        for i in r + 1..rows {
            let f = m[(i, c)] / m[(r, c)];
            for j in c..cols {
                let v = m[(r, j)];
                m[(i, j)] -= f * v;
            }
        }
        r += 1;
    }
    r
}

#[test]
fn null_space_dimension_matches_row_reduction() {
    let p = TwoBoxPair::from_spec("spin:5").unwrap();
    for (i, rank) in [(0u64, 1usize), (1, 2), (2, 3), (3, 5), (4, 4)] {
        // Product of a 7×rank and a rank×5 factor has rank `rank` generically.
        let a = sample_element(&p, Side::Plus, ElementClass::Generic, 11, i).to_dense();
        let b = sample_element(&p, Side::Plus, ElementClass::Generic, 12, i).to_dense();
        let left = CMat::from_fn(7, rank, |r, c| a[(r % 5, c)] + C64::new(r as f64 * 0.1, 0.0));
        let right = b.rows(0, rank).into_owned();
        let m = &left * &right;
        let (basis, _) = null_space(&m, 1e-9).unwrap();
        assert_eq!(basis.ncols(), 5 - rank_by_elimination(&m, 1e-9), "rank {rank}");
        assert_eq!(basis.ncols(), 5 - rank);
        let resid = (&m * &basis).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(resid < 1e-10, "{resid}");
    }
}

/// det by cofactor expansion along the first row.
fn det(m: &CMat) -> C64 {
    let n = m.nrows();
    if n == 1 {
        return m[(0, 0)];
    }
    (0..n)
        .map(|j| {
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            m[(0, j)] * det(&minor) * sign
        })
        .sum()
}

#[test]
fn eigenvalues_are_roots_of_characteristic_polynomial() {
    let p = TwoBoxPair::from_spec("spin:5").unwrap();
    for i in 0..20 {
        let x = sample_element(&p, Side::Plus, ElementClass::SelfAdjoint, 5, i).to_dense();
        let e = hermitian_eig(&x).unwrap();
        let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tr: C64 = (0..5).map(|k| x[(k, k)]).sum();
        assert!((e.values.iter().sum::<f64>() - tr.re).abs() < 1e-10 * scale * 5.0);
        assert!((e.values.iter().product::<f64>() - det(&x).re).abs() < 1e-9 * scale.powi(5));
        for &l in &e.values {
            let shifted = &x - CMat::identity(5, 5) * C64::new(l, 0.0);
            // det(A − λ) vanishes at an eigenvalue up to round-off.
            assert!(det(&shifted).norm() < 1e-8 * scale.powi(5), "{l}");
        }
    }
}

/// Singular values of ℱ(f) on a cyclic group are |f̂|/√n, with f̂ the naive DFT.
#[test]
fn cyclic_fourier_matches_naive_dft() {
    for n in [3usize, 4, 6, 7] {
        let p = TwoBoxPair::from_spec(&format!("group:cyclic:{n}")).unwrap();
        for i in 0..5 {
            let x = sample_element(&p, Side::Plus, ElementClass::Generic, 9, i);
            let f = x.diagonal_entries().unwrap().to_vec();
            let mut dft: Vec<f64> = (0..n)
                .map(|j| {
                    let s: C64 = (0..n)
                        .map(|g| f[g] * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * g) as f64 / n as f64))
                        .sum();
                    s.norm() / (n as f64).sqrt()
                })
                .collect();
            dft.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let sv = p.fourier(&x).unwrap().singular_values().unwrap();
            for (a, b) in sv.iter().zip(&dft) {
                assert!((a - b).abs() < 1e-12, "n = {n}: {sv:?} vs {dft:?}");
            }
        }
    }
}
