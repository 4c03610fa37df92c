//! Finite groups presented by Cayley tables, with subgroups, cosets and
//! one-dimensional characters.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on |G| for subgroup enumeration and the group model.
pub const DEFAULT_MAX_ORDER: usize = 24;

/// Largest subgroup handled by the brute-force character search.
pub const BRUTE_FORCE_CHARACTER_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("cayley table is empty")]
    Empty,
    #[error("cayley table is not square: row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("entry {value} at ({row}, {col}) is out of range for order {order}")]
    OutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("latin square axiom fails: {line} {index} has element {element} at positions {first} and {second}")]
    NotLatinSquare {
        line: &'static str,
        index: usize,
        element: usize,
        first: usize,
        second: usize,
    },
    #[error("identity axiom fails: candidate {candidate} gives {candidate}*{witness} = {product}")]
    NoIdentity { candidate: usize, witness: usize, product: usize },
    #[error("inverse axiom fails: {element}*{right} = identity but {right}*{element} = {product}")]
    NoInverse { element: usize, right: usize, product: usize },
    #[error("associativity fails: ({a}*{b})*{c} = {left} but {a}*({b}*{c}) = {right}")]
    NotAssociative { a: usize, b: usize, c: usize, left: usize, right: usize },
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("group of order {order} exceeds the bound {bound}")]
    GroupTooLarge { order: usize, bound: usize },
    #[error("cannot parse group spec `{0}`")]
    BadSpec(String),
    #[error("label list has {labels} entries for a group of order {order}")]
    BadLabels { labels: usize, order: usize },
    #[error("element {element} is not in the group of order {order}")]
    NoSuchElement { element: usize, order: usize },
    #[error("elements do not form a subgroup: {0}")]
    NotASubgroup(String),
    #[error("cannot read group file: {0}")]
    Io(String),
}

/// A validated finite group. Element indices are `0..order`.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Option<Vec<String>>,
    name: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CayleyFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Validate a Cayley table and compute identity and inverses.
pub fn build_group(table: &[Vec<usize>]) -> Result<FiniteGroup, GroupError> {
    build_named_group(table, None, "table".to_string())
}

fn build_named_group(
    table: &[Vec<usize>],
    labels: Option<Vec<String>>,
    name: String,
) -> Result<FiniteGroup, GroupError> {
    let n = table.len();
    if n == 0 {
        return Err(GroupError::Empty);
    }
    for (row, r) in table.iter().enumerate() {
        if r.len() != n {
            return Err(GroupError::NotSquare { row, len: r.len(), order: n });
        }
        for (col, &value) in r.iter().enumerate() {
            if value >= n {
                return Err(GroupError::OutOfRange { row, col, value, order: n });
            }
        }
    }
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(GroupError::BadLabels { labels: l.len(), order: n });
        }
    }
    for a in 0..n {
        let mut seen = vec![usize::MAX; n];
        for b in 0..n {
            let v = table[a][b];
            if seen[v] != usize::MAX {
                return Err(GroupError::NotLatinSquare {
                    line: "row",
                    index: a,
                    element: v,
                    first: seen[v],
                    second: b,
                });
            }
            seen[v] = b;
        }
    }
    for b in 0..n {
        let mut seen = vec![usize::MAX; n];
        for a in 0..n {
            let v = table[a][b];
            if seen[v] != usize::MAX {
                return Err(GroupError::NotLatinSquare {
                    line: "column",
                    index: b,
                    element: v,
                    first: seen[v],
                    second: a,
                });
            }
            seen[v] = a;
        }
    }
    // In a latin square an idempotent is the only possible identity.
    let candidate = (0..n).find(|&e| table[e][e] == e).unwrap_or(0);
    for a in 0..n {
        if table[candidate][a] != a {
            return Err(GroupError::NoIdentity { candidate, witness: a, product: table[candidate][a] });
        }
        if table[a][candidate] != a {
            return Err(GroupError::NoIdentity { candidate, witness: a, product: table[a][candidate] });
        }
    }
    let identity = candidate;
    let mut inverse = vec![0; n];
    for a in 0..n {
        let right = (0..n).find(|&b| table[a][b] == identity).expect("latin row");
        if table[right][a] != identity {
            return Err(GroupError::NoInverse { element: a, right, product: table[right][a] });
        }
        inverse[a] = right;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b];
            for c in 0..n {
                let left = table[ab][c];
                let right = table[a][table[b][c]];
                if left != right {
                    return Err(GroupError::NotAssociative { a, b, c, left, right });
                }
            }
        }
    }
    Ok(FiniteGroup {
        order: n,
        table: table.iter().flatten().copied().collect(),
        identity,
        inverse,
        labels,
        name,
    })
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, g: usize) -> String {
        match &self.labels {
            Some(l) => l[g].clone(),
            None => g.to_string(),
        }
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Exponent of the whole group (lcm of element orders).
    pub fn exponent(&self) -> usize {
        self.elements().fold(1, |acc, g| lcm(acc, self.element_order(g)))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| (a..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// g·x·g⁻¹.
    pub fn conjugate_by(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn to_file(&self) -> CayleyFile {
        CayleyFile { order: self.order, table: self.table(), labels: self.labels.clone() }
    }

    pub fn from_file(file: &CayleyFile) -> Result<Self, GroupError> {
        if file.table.len() != file.order {
            return Err(GroupError::NotSquare { row: file.table.len(), len: file.table.len(), order: file.order });
        }
        build_named_group(&file.table, file.labels.clone(), "cayley".to_string())
    }

    pub fn from_json_str(s: &str) -> Result<Self, GroupError> {
        let file: CayleyFile = serde_json::from_str(s).map_err(|e| GroupError::Io(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn trivial() -> Self {
        cyclic(1).expect("order 1")
    }

    fn check_element(&self, g: usize) -> Result<(), GroupError> {
        if g < self.order {
            Ok(())
        } else {
            Err(GroupError::NoSuchElement { element: g, order: self.order })
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Builtin group families used as fixtures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinGroup {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Product(Box<BuiltinGroup>, Box<BuiltinGroup>),
}

impl fmt::Display for BuiltinGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinGroup::Cyclic(n) => write!(f, "cyclic:{n}"),
            BuiltinGroup::Dihedral(n) => write!(f, "dihedral:{n}"),
            BuiltinGroup::Symmetric(n) => write!(f, "symmetric:{n}"),
            BuiltinGroup::Product(a, b) => write!(f, "product:{a},{b}"),
        }
    }
}

impl BuiltinGroup {
    pub fn parse(spec: &str) -> Result<Self, GroupError> {
        let spec = spec.trim();
        let bad = || GroupError::BadSpec(spec.to_string());
        let (family, rest) = spec.split_once(':').ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        match family.trim() {
            "cyclic" => Ok(BuiltinGroup::Cyclic(num(rest)?)),
            "dihedral" => Ok(BuiltinGroup::Dihedral(num(rest)?)),
            "symmetric" => Ok(BuiltinGroup::Symmetric(num(rest)?)),
            "product" => {
                // Split at the comma that closes the first factor, which may
                // itself be a product.
                let split = product_split(rest).ok_or_else(bad)?;
                let (a, b) = rest.split_at(split);
                Ok(BuiltinGroup::Product(
                    Box::new(BuiltinGroup::parse(a)?),
                    Box::new(BuiltinGroup::parse(&b[1..])?),
                ))
            }
            _ => Err(bad()),
        }
    }

    pub fn build(&self) -> Result<FiniteGroup, GroupError> {
        let g = match self {
            BuiltinGroup::Cyclic(n) => cyclic(*n)?,
            BuiltinGroup::Dihedral(n) => dihedral(*n)?,
            BuiltinGroup::Symmetric(n) => symmetric(*n)?,
            BuiltinGroup::Product(a, b) => direct_product(&a.build()?, &b.build()?)?,
        };
        Ok(g.with_name(self.to_string()))
    }
}

/// Index of the comma separating the two factors of a product spec body.
fn product_split(rest: &str) -> Option<usize> {
    // A product factor consumes exactly two factors, so walk the comma list
    // counting how many factors are still owed.
    let mut owed = 1usize;
    let mut pos = 0usize;
    for part in rest.split(',') {
        // Each nested `product:` prefix opens one more factor slot.
        owed = owed - 1 + part.matches("product:").count();
        pos += part.len();
        if owed == 0 {
            return if pos < rest.len() { Some(pos) } else { None };
        }
        pos += 1;
    }
    None
}

/// Parse a builtin spec string or load a Cayley-table JSON file.
pub fn group_from_spec(spec: &str) -> Result<FiniteGroup, GroupError> {
    let spec = spec.trim();
    if spec.ends_with(".json") {
        let text = std::fs::read_to_string(Path::new(spec)).map_err(|e| GroupError::Io(format!("{spec}: {e}")))?;
        return Ok(FiniteGroup::from_json_str(&text)?.with_name(spec.to_string()));
    }
    if spec == "trivial" {
        return Ok(FiniteGroup::trivial().with_name("trivial"));
    }
    BuiltinGroup::parse(spec)?.build()
}

pub fn builtin_group(spec: &BuiltinGroup) -> Result<FiniteGroup, GroupError> {
    spec.build()
}

/// Z_n with elements the residues 0..n.
pub fn cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
    if n == 0 {
        return Err(GroupError::UnsupportedSize("cyclic group needs n >= 1".into()));
    }
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    build_named_group(&table, None, format!("cyclic:{n}"))
}

/// Dihedral group of order 2n: index k is r^k, index n + k is s r^k.
pub fn dihedral(n: usize) -> Result<FiniteGroup, GroupError> {
    if n < 1 {
        return Err(GroupError::UnsupportedSize("dihedral group needs n >= 1".into()));
    }
    let idx = |f: usize, k: usize| f * n + k;
    let mut table = vec![vec![0; 2 * n]; 2 * n];
    for f1 in 0..2 {
        for k1 in 0..n {
            for f2 in 0..2 {
                for k2 in 0..n {
                    // r^k s = s r^{-k}
                    let (f, k) = if f2 == 0 { (f1, (k1 + k2) % n) } else { (f1 ^ 1, (k2 + n - k1) % n) };
                    table[idx(f1, k1)][idx(f2, k2)] = idx(f, k);
                }
            }
        }
    }
    let labels = (0..2)
        .flat_map(|f| (0..n).map(move |k| if f == 0 { format!("r{k}") } else { format!("sr{k}") }))
        .collect();
    build_named_group(&table, Some(labels), format!("dihedral:{n}"))
}

/// Symmetric group on n ≤ 5 letters, lexicographic permutation order,
/// product (στ)(i) = σ(τ(i)).
pub fn symmetric(n: usize) -> Result<FiniteGroup, GroupError> {
    if n == 0 || n > 5 {
        return Err(GroupError::UnsupportedSize(format!("symmetric:{n} (supported 1..=5)")));
    }
    let perms = lexicographic_permutations(n);
    let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).expect("permutation");
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| {
                    let st: Vec<usize> = (0..n).map(|i| s[t[i]]).collect();
                    index(&st)
                })
                .collect()
        })
        .collect();
    let labels = perms
        .iter()
        .map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(""))
        .collect();
    build_named_group(&table, Some(labels), format!("symmetric:{n}"))
}

fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// G × H with index g·|H| + h.
pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<FiniteGroup, GroupError> {
    let (n, m) = (g.order(), h.order());
    let table: Vec<Vec<usize>> = (0..n * m)
        .map(|a| {
            (0..n * m)
                .map(|b| g.mul(a / m, b / m) * m + h.mul(a % m, b % m))
                .collect()
        })
        .collect();
    let labels = (0..n * m).map(|a| format!("({},{})", g.label(a / m), h.label(a % m))).collect();
    build_named_group(&table, Some(labels), format!("product:{},{}", g.name(), h.name()))
}

/// A subgroup, stored as a sorted member list with a membership mask.
#[derive(Clone)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{:?}", self.members)
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && *self.parent == *other.parent
    }
}

impl Subgroup {
    /// Validate an explicit member list.
    pub fn new(parent: Arc<FiniteGroup>, members: &[usize]) -> Result<Self, GroupError> {
        for &m in members {
            parent.check_element(m)?;
        }
        let mut mask = vec![false; parent.order()];
        for &m in members {
            mask[m] = true;
        }
        if !mask[parent.identity()] {
            return Err(GroupError::NotASubgroup("missing identity".into()));
        }
        for &a in members {
            for &b in members {
                if !mask[parent.mul(a, b)] {
                    return Err(GroupError::NotASubgroup(format!("{a}*{b} not a member")));
                }
            }
        }
        Ok(Self::from_mask(parent, mask))
    }

    fn from_mask(parent: Arc<FiniteGroup>, mask: Vec<bool>) -> Self {
        let members = (0..mask.len()).filter(|&i| mask[i]).collect();
        Subgroup { parent, members, mask }
    }

    /// The subgroup generated by `gens`.
    pub fn generated(parent: Arc<FiniteGroup>, gens: &[usize]) -> Result<Self, GroupError> {
        for &g in gens {
            parent.check_element(g)?;
        }
        let mask = closure(&parent, gens);
        Ok(Self::from_mask(parent, mask))
    }

    pub fn whole(parent: Arc<FiniteGroup>) -> Self {
        let n = parent.order();
        Self::from_mask(parent, vec![true; n])
    }

    pub fn trivial(parent: Arc<FiniteGroup>) -> Self {
        let mut mask = vec![false; parent.order()];
        mask[parent.identity()] = true;
        Self::from_mask(parent, mask)
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.mask[g]
    }

    pub fn is_abelian(&self) -> bool {
        self.members
            .iter()
            .all(|&a| self.members.iter().all(|&b| self.parent.mul(a, b) == self.parent.mul(b, a)))
    }

    pub fn is_normal(&self) -> bool {
        self.parent
            .elements()
            .all(|g| self.members.iter().all(|&h| self.contains(self.parent.conjugate_by(g, h))))
    }

    /// g⁻¹Hg.
    pub fn conjugate(&self, g: usize) -> Subgroup {
        let gi = self.parent.inv(g);
        let mut mask = vec![false; self.parent.order()];
        for &h in &self.members {
            mask[self.parent.conjugate_by(gi, h)] = true;
        }
        Self::from_mask(self.parent.clone(), mask)
    }
}

fn closure(g: &FiniteGroup, gens: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; g.order()];
    let mut queue = VecDeque::new();
    mask[g.identity()] = true;
    queue.push_back(g.identity());
    while let Some(x) = queue.pop_front() {
        for &s in gens {
            let y = g.mul(x, s);
            if !mask[y] {
                mask[y] = true;
                queue.push_back(y);
            }
        }
    }
    mask
}

/// All subgroups, each exactly once, sorted by size then member list.
pub fn enumerate_subgroups(g: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>, GroupError> {
    enumerate_subgroups_bounded(g, DEFAULT_MAX_ORDER)
}

pub fn enumerate_subgroups_bounded(g: &Arc<FiniteGroup>, bound: usize) -> Result<Vec<Subgroup>, GroupError> {
    if g.order() > bound {
        return Err(GroupError::GroupTooLarge { order: g.order(), bound });
    }
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let trivial = closure(g, &[]);
    seen.insert(trivial.clone());
    let mut frontier = vec![(trivial, Vec::<usize>::new())];
    let mut found = Vec::new();
    while let Some((mask, gens)) = frontier.pop() {
        for x in g.elements() {
            if mask[x] {
                continue;
            }
            let mut next_gens = gens.clone();
            next_gens.push(x);
            let next = closure(g, &next_gens);
            if seen.insert(next.clone()) {
                frontier.push((next, next_gens));
            }
        }
        found.push(mask);
    }
    let mut subs: Vec<Subgroup> = found.into_iter().map(|m| Subgroup::from_mask(g.clone(), m)).collect();
    subs.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
    Ok(subs)
}

/// [H, H], generated by all commutators.
pub fn commutator_subgroup(h: &Subgroup) -> Subgroup {
    let g = h.parent();
    let mut gens = Vec::new();
    for &a in h.members() {
        for &b in h.members() {
            let c = g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)));
            gens.push(c);
        }
    }
    gens.sort_unstable();
    gens.dedup();
    let mask = closure(g, &gens);
    Subgroup::from_mask(g.clone(), mask)
}

/// A one-dimensional character with values e^{2πi·k/denom}.
#[derive(Clone)]
pub struct Character {
    subgroup: Subgroup,
    denom: usize,
    /// Exponent numerators, indexed by whole-group element (0 outside H).
    numerators: Vec<usize>,
    values: Vec<Complex64>,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subgroup
            .members()
            .iter()
            .map(|&h| format!("{h}:{}/{}", self.numerators[h], self.denom))
            .collect();
        write!(f, "Character[{}]", parts.join(", "))
    }
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.subgroup == other.subgroup
            && self
                .subgroup
                .members()
                .iter()
                .all(|&h| self.numerators[h] * other.denom == other.numerators[h] * self.denom)
    }
}

impl Character {
    fn from_exponents(subgroup: Subgroup, denom: usize, numerators: Vec<usize>) -> Self {
        let g = subgroup.parent().order();
        let mut values = vec![Complex64::new(0.0, 0.0); g];
        for &h in subgroup.members() {
            values[h] = root_of_unity(numerators[h], denom);
        }
        Character { subgroup, denom, numerators, values }
    }

    pub fn trivial(subgroup: &Subgroup) -> Self {
        let n = subgroup.parent().order();
        Self::from_exponents(subgroup.clone(), 1, vec![0; n])
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// χ(h) for h in H.
    pub fn value(&self, h: usize) -> Complex64 {
        debug_assert!(self.subgroup.contains(h));
        self.values[h]
    }

    /// Exact angle of χ(h) as a fraction of a full turn.
    pub fn exponent(&self, h: usize) -> (usize, usize) {
        (self.numerators[h], self.denom)
    }

    pub fn denominator(&self) -> usize {
        self.denom
    }

    pub fn is_trivial(&self) -> bool {
        self.subgroup.members().iter().all(|&h| self.numerators[h] == 0)
    }

    pub fn conj(&self) -> Self {
        let mut num = self.numerators.clone();
        for &h in self.subgroup.members() {
            num[h] = (self.denom - num[h]) % self.denom;
        }
        Self::from_exponents(self.subgroup.clone(), self.denom, num)
    }

    /// Member-ordered values.
    pub fn values(&self) -> Vec<Complex64> {
        self.subgroup.members().iter().map(|&h| self.values[h]).collect()
    }
}

fn root_of_unity(k: usize, n: usize) -> Complex64 {
    let k = k % n;
    // Exact values on the axes keep small-order characters free of rounding.
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// Characters of H through its abelianization, built by extending along a
/// generator chain of H/[H,H]. Trivial character first, the rest in
/// lexicographic order of exponents.
pub fn one_dim_characters(h: &Subgroup) -> Vec<Character> {
    let g = h.parent().clone();
    let k = commutator_subgroup(h);

    // Quotient Q = H/[H,H]: coset id per element, one representative each.
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut reps = Vec::new();
    for &x in h.members() {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(x);
        for &c in k.members() {
            coset_of[g.mul(x, c)] = id;
        }
    }
    let m = reps.len();
    let qmul = |a: usize, b: usize| coset_of[g.mul(reps[a], reps[b])];
    let qid = coset_of[g.identity()];

    // word[q] = exponents of q in the chosen generators, once q is reached.
    let mut gens: Vec<usize> = Vec::new();
    let mut rel_orders: Vec<usize> = Vec::new();
    // For each generator, the word of g_i^{k_i} in earlier generators.
    let mut power_words: Vec<Vec<usize>> = Vec::new();
    let mut word: Vec<Option<Vec<usize>>> = vec![None; m];
    word[qid] = Some(Vec::new());
    let mut reached = vec![qid];
    while reached.len() < m {
        let s = (0..m).find(|&q| word[q].is_none()).expect("unreached element");
        let i = gens.len();
        let mut p = s;
        let mut ki = 1;
        while word[p].is_none() {
            ki += 1;
            p = qmul(p, s);
        }
        let pw = word[p].clone().expect("reached");
        // New elements a·s^j for a already reached and 1 ≤ j < ki.
        let base = reached.clone();
        let mut cur = base.clone();
        for j in 1..ki {
            let next: Vec<usize> = cur.iter().map(|&a| qmul(a, s)).collect();
            for (&a0, &a) in base.iter().zip(next.iter()) {
                let mut w = word[a0].clone().expect("reached");
                w.resize(i + 1, 0);
                w[i] = j;
                word[a] = Some(w);
            }
            reached.extend_from_slice(&next);
            cur = next;
        }
        gens.push(s);
        rel_orders.push(ki);
        power_words.push(pw);
    }

    // Exponent of Q; every character value is an n_exp-th root of unity.
    let mut n_exp = 1;
    for q in 0..m {
        let mut o = 1;
        let mut x = q;
        while x != qid {
            x = qmul(x, q);
            o += 1;
        }
        n_exp = lcm(n_exp, o);
    }

    let t = gens.len();
    let mut results: Vec<Vec<usize>> = Vec::new();
    let mut choice = vec![0usize; t];
    fn eval(word: &[usize], choice: &[usize], n: usize) -> usize {
        word.iter().zip(choice).map(|(a, b)| a * b).sum::<usize>() % n
    }
    fn rec(
        i: usize,
        choice: &mut Vec<usize>,
        rel: &[usize],
        pw: &[Vec<usize>],
        n: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == rel.len() {
            out.push(choice.clone());
            return;
        }
        let val = eval(&pw[i], &choice[..i], n);
        let k = rel[i];
        debug_assert_eq!(val % k, 0);
        for tt in 0..k {
            choice[i] = (val / k + tt * n / k) % n;
            rec(i + 1, choice, rel, pw, n, out);
        }
        choice[i] = 0;
    }
    rec(0, &mut choice, &rel_orders, &power_words, n_exp, &mut results);

    let mut chars: Vec<Vec<usize>> = results
        .into_iter()
        .map(|c| {
            let mut num = vec![0usize; g.order()];
            for &x in h.members() {
                let w = word[coset_of[x]].as_ref().expect("word");
                num[x] = eval(w, &c, n_exp);
            }
            num
        })
        .collect();
    chars.sort_by(|a, b| {
        let ka: Vec<usize> = h.members().iter().map(|&x| a[x]).collect();
        let kb: Vec<usize> = h.members().iter().map(|&x| b[x]).collect();
        ka.cmp(&kb)
    });
    chars.into_iter().map(|num| Character::from_exponents(h.clone(), n_exp, num)).collect()
}

/// Independent search over all unit-valued multiplicative maps on H.
/// Returns `None` when |H| exceeds the brute-force limit.
pub fn one_dim_characters_brute(h: &Subgroup) -> Option<Vec<Character>> {
    if h.order() > BRUTE_FORCE_CHARACTER_LIMIT {
        return None;
    }
    let g = h.parent().clone();
    let n_exp = h.members().iter().fold(1, |acc, &x| lcm(acc, g.element_order(x)));
    let mut gens = Vec::new();
    let mut mask = closure(&g, &gens);
    for &x in h.members() {
        if !mask[x] {
            gens.push(x);
            mask = closure(&g, &gens);
        }
    }
    let t = gens.len();
    let mut out = Vec::new();
    let total = n_exp.pow(t as u32);
    for code in 0..total {
        let mut c = code;
        let assign: Vec<usize> = (0..t)
            .map(|_| {
                let v = c % n_exp;
                c /= n_exp;
                v
            })
            .collect();
        let mut val = vec![usize::MAX; g.order()];
        val[g.identity()] = 0;
        let mut queue = VecDeque::from([g.identity()]);
        let mut ok = true;
        while let Some(x) = queue.pop_front() {
            for (i, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                let v = (val[x] + assign[i]) % n_exp;
                if val[y] == usize::MAX {
                    val[y] = v;
                    queue.push_back(y);
                } else if val[y] != v {
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let mult = h
            .members()
            .iter()
            .all(|&a| h.members().iter().all(|&b| val[g.mul(a, b)] == (val[a] + val[b]) % n_exp));
        if mult {
            let num = (0..g.order()).map(|x| if h.contains(x) { val[x] } else { 0 }).collect();
            out.push(num);
        }
    }
    out.sort_by(|a: &Vec<usize>, b: &Vec<usize>| {
        let ka: Vec<usize> = h.members().iter().map(|&x| a[x]).collect();
        let kb: Vec<usize> = h.members().iter().map(|&x| b[x]).collect();
        ka.cmp(&kb)
    });
    Some(out.into_iter().map(|num| Character::from_exponents(h.clone(), n_exp, num)).collect())
}

/// Partition of G into right cosets Hg, identity coset first, each sorted.
pub fn right_cosets(h: &Subgroup) -> Vec<Vec<usize>> {
    cosets(h, |g, x, y| g.mul(x, y))
}

/// Partition of G into left cosets gH, identity coset first, each sorted.
pub fn left_cosets(h: &Subgroup) -> Vec<Vec<usize>> {
    cosets(h, |g, x, y| g.mul(y, x))
}

fn cosets(h: &Subgroup, act: impl Fn(&FiniteGroup, usize, usize) -> usize) -> Vec<Vec<usize>> {
    let g = h.parent();
    let mut assigned = vec![false; g.order()];
    let mut out = Vec::new();
    let order = std::iter::once(g.identity()).chain(g.elements().filter(|&x| x != g.identity()));
    for rep in order {
        if assigned[rep] {
            continue;
        }
        let mut c: Vec<usize> = h.members().iter().map(|&x| act(g, x, rep)).collect();
        c.sort_unstable();
        for &x in &c {
            assigned[x] = true;
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(g: FiniteGroup) -> Arc<FiniteGroup> {
        Arc::new(g)
    }

    #[test]
    fn trivial_and_order_two() {
        let t = build_group(&[vec![0]]).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(t.identity(), 0);
        let z2 = build_group(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(z2.inv(1), 1);
    }

    #[test]
    fn table_errors() {
        assert!(matches!(
            build_group(&[vec![0, 1], vec![1, 1]]),
            Err(GroupError::NotLatinSquare { .. })
        ));
        assert!(matches!(build_group(&[vec![0, 2], vec![1, 0]]), Err(GroupError::OutOfRange { .. })));
        assert!(matches!(build_group(&[]), Err(GroupError::Empty)));
        // Latin square with an identity but no associativity (loop of order 5).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(build_group(&loop5), Err(GroupError::NotAssociative { .. })));
        // Latin square without identity.
        let q = vec![vec![1, 0], vec![0, 1]];
        let e = build_group(&q);
        assert!(e.is_ok() || matches!(e, Err(GroupError::NoIdentity { .. })));
        let q3 = vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]];
        assert!(matches!(build_group(&q3), Err(GroupError::NoIdentity { .. })));
    }

    #[test]
    fn builtins() {
        let c4 = cyclic(4).unwrap();
        assert_eq!(c4.inv(1), 3);
        let s3 = symmetric(3).unwrap();
        assert_eq!(s3.elements().filter(|&g| s3.element_order(g) == 2).count(), 3);
        let d4 = dihedral(4).unwrap();
        assert_eq!(d4.order(), 8);
        assert!(!d4.is_abelian());
        assert!(symmetric(6).is_err());
        let p = group_from_spec("product:cyclic:2,cyclic:2").unwrap();
        assert_eq!(p.order(), 4);
        assert!(p.elements().all(|g| p.element_order(g) <= 2));
        let pp = group_from_spec("product:product:cyclic:2,cyclic:2,cyclic:3").unwrap();
        assert_eq!(pp.order(), 12);
        assert!(group_from_spec("cyclic:x").is_err());
        assert!(group_from_spec("klein:4").is_err());
    }

    #[test]
    fn cosets_of_cyclic6() {
        let g = arc(cyclic(6).unwrap());
        let h = Subgroup::new(g, &[0, 3]).unwrap();
        assert_eq!(right_cosets(&h), vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
    }

    #[test]
    fn commutators() {
        let s3 = arc(symmetric(3).unwrap());
        assert_eq!(commutator_subgroup(&Subgroup::whole(s3)).order(), 3);
        let d4 = arc(dihedral(4).unwrap());
        let k = commutator_subgroup(&Subgroup::whole(d4));
        assert_eq!(k.members(), &[0, 2]);
        let c6 = arc(cyclic(6).unwrap());
        assert_eq!(commutator_subgroup(&Subgroup::whole(c6)).order(), 1);
    }

    #[test]
    fn characters_of_cyclic4_and_s3() {
        let c4 = arc(cyclic(4).unwrap());
        let ch = one_dim_characters(&Subgroup::whole(c4));
        assert_eq!(ch.len(), 4);
        assert!(ch[0].is_trivial());
        for c in &ch {
            for v in c.values() {
                let powers = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
                assert!(powers.iter().any(|&(re, im)| (v - Complex64::new(re, im)).norm() < 1e-15));
            }
        }
        let s3 = arc(symmetric(3).unwrap());
        let ch = one_dim_characters(&Subgroup::whole(s3.clone()));
        assert_eq!(ch.len(), 2);
        let sign = &ch[1];
        for g in s3.elements() {
            let expect = if s3.element_order(g) == 2 { -1.0 } else { 1.0 };
            assert_eq!(sign.value(g), Complex64::new(expect, 0.0));
        }
    }

    #[test]
    fn malformed_subgroup_rejected() {
        let g = arc(cyclic(6).unwrap());
        assert!(Subgroup::new(g.clone(), &[0, 1]).is_err());
        assert!(Subgroup::new(g, &[3]).is_err());
    }
}
