//! Order complexes of finite posets and their reduced integer homology.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::limits::Limits;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("open interval posets need n ≥ 2 (got {0})")]
    TooSmall(usize),
    #[error("n = {0} is too large")]
    TooLarge(usize),
    #[error("relation is not a strict order: {0}")]
    NotAnOrder(String),
    #[error("simplex guard exceeded: more than {limit} simplices")]
    Guard { limit: usize },
    #[error("bad simplex {0:?}")]
    BadSimplex(Vec<usize>),
}

/// A finite strict order on `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    pub names: Vec<String>,
    less: Vec<Vec<bool>>,
}

impl FinitePoset {
    /// Builds the poset from a relation, which must be irreflexive and
    /// transitive.
    pub fn new(names: Vec<String>, less: Vec<Vec<bool>>) -> Result<FinitePoset, HomologyError> {
        let n = names.len();
        if less.len() != n || less.iter().any(|r| r.len() != n) {
            return Err(HomologyError::NotAnOrder("matrix shape".into()));
        }
        for i in 0..n {
            if less[i][i] {
                return Err(HomologyError::NotAnOrder(format!("{} < {}", names[i], names[i])));
            }
            for j in 0..n {
                for k in 0..n {
                    if less[i][j] && less[j][k] && !less[i][k] {
                        return Err(HomologyError::NotAnOrder(format!(
                            "{} < {} < {} but not {} < {}",
                            names[i], names[j], names[k], names[i], names[k]
                        )));
                    }
                }
            }
        }
        Ok(FinitePoset { names, less })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less[a][b]
    }
}

/// `{0<1}^n` without its bottom and top, with the product order. Elements
/// are named by their coordinate words.
pub fn open_interval_poset(n: usize) -> Result<FinitePoset, HomologyError> {
    if n < 2 {
        return Err(HomologyError::TooSmall(n));
    }
    if n > 10 {
        return Err(HomologyError::TooLarge(n));
    }
    let elems: Vec<u32> = (1..(1u32 << n) - 1).collect();
    let names = elems
        .iter()
        .map(|&w| (0..n).map(|i| if w >> i & 1 == 1 { '1' } else { '0' }).collect())
        .collect();
    let less = elems
        .iter()
        .map(|&a| elems.iter().map(|&b| a != b && a & b == a).collect())
        .collect();
    FinitePoset::new(names, less)
}

/// Simplices graded by dimension, each a sorted vertex list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimplicialComplex {
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// The closure under faces of the given simplices.
    pub fn from_simplices(list: &[Vec<usize>], limits: &Limits) -> Result<SimplicialComplex, HomologyError> {
        let mut all: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        for s in list {
            let mut v = s.clone();
            v.sort();
            v.dedup();
            if v.len() != s.len() || v.is_empty() || v.len() > 24 {
                return Err(HomologyError::BadSimplex(s.clone()));
            }
            for mask in 1u32..(1 << v.len()) {
                all.insert((0..v.len()).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect());
                if all.len() > limits.simplices {
                    return Err(HomologyError::Guard { limit: limits.simplices });
                }
            }
        }
        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
        for s in all {
            let d = s.len() - 1;
            if simplices.len() <= d {
                simplices.resize(d + 1, Vec::new());
            }
            simplices[d].push(s);
        }
        Ok(SimplicialComplex { simplices })
    }

    /// Top dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, Vec::len)
    }

    /// The matrix of `∂_d : C_d → C_{d-1}` (rows index `(d-1)`-simplices).
    /// For `d = 0` this is the augmentation onto a single row.
    pub fn boundary_matrix(&self, d: usize) -> Vec<Vec<BigInt>> {
        let cols = self.count(d);
        if d == 0 {
            return vec![vec![BigInt::one(); cols]];
        }
        let rows = &self.simplices[d - 1];
        let pos: std::collections::HashMap<&[usize], usize> = rows.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut m = vec![vec![BigInt::zero(); cols]; rows.len()];
        for (j, s) in self.simplices[d].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                m[pos[face.as_slice()]][j] += sign;
            }
        }
        m
    }

    /// `∂_{d-1} ∘ ∂_d = 0` in every degree, including the augmentation.
    pub fn boundary_squares_to_zero(&self) -> bool {
        (1..self.simplices.len()).all(|d| {
            let a = self.boundary_matrix(d - 1);
            let b = self.boundary_matrix(d);
            a.iter().all(|row| {
                (0..self.count(d)).all(|j| {
                    row.iter()
                        .enumerate()
                        .fold(BigInt::zero(), |acc, (k, x)| acc + x * &b[k][j])
                        .is_zero()
                })
            })
        })
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, s)| if d % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }
}

/// `Δ(P)`: one simplex per nonempty chain.
pub fn order_complex(p: &FinitePoset, limits: &Limits) -> Result<SimplicialComplex, HomologyError> {
    let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut total = 0usize;
    let mut stack: Vec<Vec<usize>> = (0..p.len()).rev().map(|i| vec![i]).collect();
    while let Some(chain) = stack.pop() {
        total += 1;
        if total > limits.simplices {
            return Err(HomologyError::Guard { limit: limits.simplices });
        }
        let last = *chain.last().expect("nonempty");
        for next in (0..p.len()).rev() {
            if p.less(last, next) {
                let mut c = chain.clone();
                c.push(next);
                stack.push(c);
            }
        }
        let d = chain.len() - 1;
        if simplices.len() <= d {
            simplices.resize(d + 1, Vec::new());
        }
        // vertices listed in increasing element order
        let mut sorted = chain;
        sorted.sort();
        simplices[d].push(sorted);
    }
    for level in &mut simplices {
        level.sort();
    }
    Ok(SimplicialComplex { simplices })
}

/// Invariant factors of an integer matrix (nonzero diagonal of its Smith
/// normal form, as positive integers).
pub fn smith_diagonal(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: least absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && pivot.is_none_or(|(a, b)| m[i][j].abs() < m[a][b].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !m[i][t].is_zero() {
                    let q = &m[i][t] / &m[t][t];
                    for j in t..cols {
                        let v = &q * &m[t][j];
                        m[i][j] -= v;
                    }
                    dirty |= !m[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !m[t][j].is_zero() {
                    let q = &m[t][j] / &m[t][t];
                    for i in t..rows {
                        let v = &q * &m[i][t];
                        m[i][j] -= v;
                    }
                    dirty |= !m[t][j].is_zero();
                }
            }
            if !dirty {
                // the pivot must divide the rest of the block
                let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&m[i][j] % &m[t][t]).is_zero()));
                match bad {
                    Some(i) => {
                        for j in t..cols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                    }
                    None => break,
                }
            }
            // move the smallest entry of row/column t onto the diagonal
            let mut best = (t, t);
            for i in t..rows {
                if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                m.swap(t, best.0);
            }
            if best.1 != t {
                for row in m.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: isize,
    pub rank: usize,
    #[serde(serialize_with = "ser_torsion")]
    pub torsion: Vec<BigInt>,
}

fn ser_torsion<S: serde::Serializer>(t: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(|x| x.to_string()))
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "H~{} = {}", self.degree, parts.join(" + "))
    }
}

/// Reduced integer homology in degrees `-1 ..= dim`.
pub fn integer_homology(c: &SimplicialComplex) -> Vec<HomologyGroup> {
    let top = c.simplices.len();
    // chain groups C_{-1} .. C_{top-1}; index i holds degree i-1
    let sizes: Vec<usize> = std::iter::once(1).chain((0..top).map(|d| c.count(d))).collect();
    // factors[i]: invariant factors of the map C_{i} → C_{i-1} (degrees)
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 1];
    for d in 0..top {
        factors[d + 1] = smith_diagonal(c.boundary_matrix(d));
    }
    (0..=top)
        .map(|i| {
            let out_rank = factors[i].len();
            let in_factors: &[BigInt] = factors.get(i + 1).map_or(&[], Vec::as_slice);
            HomologyGroup {
                degree: i as isize - 1,
                rank: sizes[i] - out_rank - in_factors.len(),
                torsion: in_factors.iter().filter(|x| !x.is_one()).cloned().collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn nonzero(h: &[HomologyGroup]) -> Vec<String> {
        h.iter().filter(|g| !g.is_zero()).map(|g| g.to_string()).collect()
    }

    #[test]
    fn open_intervals() {
        let p2 = open_interval_poset(2).unwrap();
        assert_eq!(p2.len(), 2);
        assert!(!p2.less(0, 1) && !p2.less(1, 0));
        assert_eq!(open_interval_poset(3).unwrap().len(), 6);
        assert_eq!(open_interval_poset(4).unwrap().len(), 14);
        assert_eq!(open_interval_poset(1), Err(HomologyError::TooSmall(1)));
    }

    #[test]
    fn hexagon() {
        let c = order_complex(&open_interval_poset(3).unwrap(), &lim()).unwrap();
        assert_eq!((c.count(0), c.count(1), c.count(2)), (6, 6, 0));
        // every vertex has degree two
        for v in 0..6 {
            assert_eq!(c.simplices[1].iter().filter(|e| e.contains(&v)).count(), 2);
        }
        assert!(c.boundary_squares_to_zero());
        assert_eq!(nonzero(&integer_homology(&c)), vec!["H~1 = Z"]);
    }

    #[test]
    fn two_points() {
        let c = order_complex(&open_interval_poset(2).unwrap(), &lim()).unwrap();
        assert_eq!(c.count(1), 0);
        assert_eq!(nonzero(&integer_homology(&c)), vec!["H~0 = Z"]);
    }

    #[test]
    fn chain_gives_a_full_simplex() {
        let names = vec!["x".into(), "y".into(), "z".into()];
        let less = vec![vec![false, true, true], vec![false, false, true], vec![false, false, false]];
        let c = order_complex(&FinitePoset::new(names, less).unwrap(), &lim()).unwrap();
        assert_eq!((c.count(0), c.count(1), c.count(2)), (3, 3, 1));
        assert!(nonzero(&integer_homology(&c)).is_empty());
    }

    #[test]
    fn spheres() {
        for n in 3..=5 {
            let c = order_complex(&open_interval_poset(n).unwrap(), &lim()).unwrap();
            assert!(c.boundary_squares_to_zero());
            assert_eq!(nonzero(&integer_homology(&c)), vec![format!("H~{} = Z", n - 2)]);
        }
    }

    #[test]
    fn cones_and_empty() {
        let simplex = SimplicialComplex::from_simplices(&[vec![0, 1, 2, 3]], &lim()).unwrap();
        assert!(nonzero(&integer_homology(&simplex)).is_empty());
        let empty = SimplicialComplex { simplices: Vec::new() };
        assert_eq!(nonzero(&integer_homology(&empty)), vec!["H~-1 = Z"]);
    }

    #[test]
    fn torsion_of_the_projective_plane() {
        // the 6-vertex triangulation of RP^2
        let faces = vec![
            vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 5], vec![0, 1, 5],
            vec![1, 2, 4], vec![2, 3, 5], vec![1, 3, 4], vec![1, 3, 5], vec![2, 4, 5],
        ];
        let c = SimplicialComplex::from_simplices(&faces, &lim()).unwrap();
        assert!(c.boundary_squares_to_zero());
        assert_eq!(nonzero(&integer_homology(&c)), vec!["H~1 = Z/2"]);
    }

    #[test]
    fn euler_characteristic_matches_betti_numbers() {
        for n in 2..=5 {
            let c = order_complex(&open_interval_poset(n).unwrap(), &lim()).unwrap();
            let betti: i64 = integer_homology(&c)
                .iter()
                .map(|g| if g.degree.rem_euclid(2) == 0 { g.rank as i64 } else { -(g.rank as i64) })
                .sum();
            // reduced: χ - 1 = Σ (-1)^d b̃_d
            assert_eq!(c.euler_characteristic() - 1, betti);
        }
    }

    #[test]
    fn smith_form() {
        let m = |rows: Vec<Vec<i64>>| rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        assert_eq!(smith_diagonal(m(vec![vec![2, 4], vec![6, 8]])), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(smith_diagonal(m(vec![vec![2, 0], vec![0, 3]])), vec![BigInt::from(1), BigInt::from(6)]);
        assert!(smith_diagonal(m(vec![vec![0, 0]])).is_empty());
    }

    #[test]
    fn bad_orders_are_rejected() {
        let names = vec!["x".into(), "y".into()];
        assert!(FinitePoset::new(names.clone(), vec![vec![true, false], vec![false, false]]).is_err());
        let names3 = vec!["x".into(), "y".into(), "z".into()];
        let less = vec![vec![false, true, false], vec![false, false, true], vec![false, false, false]];
        assert!(FinitePoset::new(names3, less).is_err());
        let _ = names;
    }
}
