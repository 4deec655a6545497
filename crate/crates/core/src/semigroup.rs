//! Finite *-semigroups given by multiplication tables, and their (possibly
//! partial) left actions on finite point sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named failure of one of the table laws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotAssociative { a: usize, b: usize, c: usize },
    StarNotInvolutive { a: usize },
    StarNotAntiMultiplicative { a: usize, b: usize },
    UnitNotNeutral { a: usize },
    UnitNotSelfadjoint,
    ActionNotCompatible { alpha: usize, beta: usize, x: usize },
    UnitMovesPoint { x: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAssociative { a, b, c } => write!(f, "(a b) c != a (b c) for triple ({a}, {b}, {c})"),
            Violation::StarNotInvolutive { a } => write!(f, "a** != a for a = {a}"),
            Violation::StarNotAntiMultiplicative { a, b } => write!(f, "(a b)* != b* a* for ({a}, {b})"),
            Violation::UnitNotNeutral { a } => write!(f, "unit is not neutral for {a}"),
            Violation::UnitNotSelfadjoint => write!(f, "unit is not selfadjoint"),
            Violation::ActionNotCompatible { alpha, beta, x } => {
                write!(f, "alpha.(beta.x) != (alpha beta).x for ({alpha}, {beta}, {x})")
            }
            Violation::UnitMovesPoint { x } => write!(f, "unit moves point {x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarSemigroup {
    mult: Vec<Vec<usize>>,
    star: Vec<usize>,
    unit: Option<usize>,
}

impl StarSemigroup {
    /// Checks that the tables are well formed; the algebraic laws are checked
    /// by [`StarSemigroup::validate`].
    pub fn new(mult: Vec<Vec<usize>>, star: Vec<usize>, unit: Option<usize>) -> Result<Self> {
        let g = mult.len();
        if g == 0 {
            return Err(Error::MalformedTable("empty multiplication table".into()));
        }
        if let Some(row) = mult.iter().position(|r| r.len() != g) {
            return Err(Error::MalformedTable(format!("row {row} of the multiplication table has wrong length")));
        }
        if mult.iter().flatten().any(|&v| v >= g) {
            return Err(Error::MalformedTable("multiplication entry out of range".into()));
        }
        if star.len() != g || star.iter().any(|&v| v >= g) {
            return Err(Error::MalformedTable("star table has wrong length or entries".into()));
        }
        if unit.is_some_and(|u| u >= g) {
            return Err(Error::MalformedTable("unit index out of range".into()));
        }
        Ok(Self { mult, star, unit })
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn star(&self, a: usize) -> usize {
        self.star[a]
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn mult_table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn star_table(&self) -> &[usize] {
        &self.star
    }

    /// Exhaustive check of associativity, involutivity and
    /// anti-multiplicativity of the star, and of the unit laws.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let g = self.order();
        for a in 0..g {
            for b in 0..g {
                let ab = self.mul(a, b);
                for c in 0..g {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Violation::NotAssociative { a, b, c });
                    }
                }
            }
        }
        for a in 0..g {
            if self.star(self.star(a)) != a {
                return Err(Violation::StarNotInvolutive { a });
            }
            for b in 0..g {
                if self.star(self.mul(a, b)) != self.mul(self.star(b), self.star(a)) {
                    return Err(Violation::StarNotAntiMultiplicative { a, b });
                }
            }
        }
        if let Some(e) = self.unit {
            if let Some(a) = (0..g).find(|&a| self.mul(e, a) != a || self.mul(a, e) != a) {
                return Err(Violation::UnitNotNeutral { a });
            }
            if self.star(e) != e {
                return Err(Violation::UnitNotSelfadjoint);
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// A group whose star is the inverse: `a a* = e = a* a` for every `a`.
    pub fn is_group_with_inverse_star(&self) -> bool {
        let Some(e) = self.unit else { return false };
        (0..self.order()).all(|a| self.mul(a, self.star(a)) == e && self.mul(self.star(a), a) == e)
    }

    pub fn trivial() -> Self {
        Self { mult: vec![vec![0]], star: vec![0], unit: Some(0) }
    }

    /// `Z_q` under addition with `a* = -a`.
    pub fn cyclic(q: usize) -> Self {
        assert!(q > 0);
        let mult = (0..q).map(|a| (0..q).map(|b| (a + b) % q).collect()).collect();
        let star = (0..q).map(|a| (q - a) % q).collect();
        Self { mult, star, unit: Some(0) }
    }

    /// `Z_2 x Z_2`, every element its own inverse.
    pub fn klein() -> Self {
        let mult = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self { mult, star: (0..4).collect(), unit: Some(0) }
    }

    /// The symmetric group on three letters with inverse as star.
    pub fn symmetric3() -> Self {
        let perms = symmetric3_perms();
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let mult = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let star = perms
            .iter()
            .map(|a| {
                let mut inv = [0; 3];
                for (i, &ai) in a.iter().enumerate() {
                    inv[ai] = i;
                }
                index(inv)
            })
            .collect();
        Self { mult, star, unit: Some(0) }
    }

    /// `{e, z}` with `z z = z` and trivial star.
    pub fn two_element_semilattice() -> Self {
        Self { mult: vec![vec![0, 1], vec![1, 1]], star: vec![0, 1], unit: Some(0) }
    }

    /// Subsets of a two-element set under union, encoded as bit masks.
    pub fn union_semilattice() -> Self {
        let mult = (0..4).map(|a| (0..4).map(|b| a | b).collect()).collect();
        Self { mult, star: (0..4).collect(), unit: Some(0) }
    }

    /// `{0, ..., len}` under addition saturated at `len`, trivial star; the
    /// top element absorbs everything except the unit.
    pub fn saturating_shift(len: usize) -> Self {
        let g = len + 1;
        let mult = (0..g).map(|a| (0..g).map(|b| (a + b).min(len)).collect()).collect();
        Self { mult, star: (0..g).collect(), unit: Some(0) }
    }

    /// The free *-monoid on one generator `s` (with `s* = t`), keeping words of
    /// length below `max_len` and collapsing longer ones into an absorbing
    /// element, which is the last index.
    pub fn truncated_free_star_monoid(max_len: usize) -> Self {
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 1..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for letter in [0u8, 1u8] {
                    let mut v: Vec<u8> = w.clone();
                    v.push(letter);
                    next.push(v);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let zero = words.len();
        let index = |w: &[u8]| -> usize {
            if w.len() >= max_len {
                zero
            } else {
                words.iter().position(|v| v == w).expect("enumerated")
            }
        };
        let g = zero + 1;
        let mut mult = vec![vec![zero; g]; g];
        let mut star = vec![zero; g];
        for (a, wa) in words.iter().enumerate() {
            for (b, wb) in words.iter().enumerate() {
                let cat: Vec<u8> = wa.iter().chain(wb).copied().collect();
                mult[a][b] = index(&cat);
            }
            let rev: Vec<u8> = wa.iter().rev().map(|l| 1 - l).collect();
            star[a] = index(&rev);
        }
        Self { mult, star, unit: Some(0) }
    }

    /// Matrix units `e_jk` of `M_2` together with a zero and an adjoined
    /// unit: index 0 is the unit, 1 the zero, `2 + 2 j + k` is `e_jk`.
    pub fn matrix_units2() -> Self {
        let elem = |j: usize, k: usize| 2 + 2 * j + k;
        let mut mult = vec![vec![1; 6]; 6];
        for a in 0..6 {
            mult[0][a] = a;
            mult[a][0] = a;
        }
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    for m in 0..2 {
                        mult[elem(j, k)][elem(l, m)] = if k == l { elem(j, m) } else { 1 };
                    }
                }
            }
        }
        let mut star = vec![0, 1, 0, 0, 0, 0];
        for j in 0..2 {
            for k in 0..2 {
                star[elem(j, k)] = elem(k, j);
            }
        }
        Self { mult, star, unit: Some(0) }
    }
}

fn symmetric3_perms() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]]
}

/// A left action `xi . x`; `None` marks a product that leaves the window of a
/// partial action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    table: Vec<Vec<Option<usize>>>,
    points: usize,
    #[serde(default)]
    unital: bool,
}

impl Action {
    pub fn new(table: Vec<Vec<Option<usize>>>, points: usize, unital: bool) -> Result<Self> {
        if table.iter().any(|row| row.len() != points) {
            return Err(Error::MalformedTable("action row length differs from point count".into()));
        }
        if table.iter().flatten().flatten().any(|&y| y >= points) {
            return Err(Error::MalformedTable("action entry out of range".into()));
        }
        Ok(Self { table, points, unital })
    }

    /// Action of a semigroup on itself by left multiplication.
    pub fn left_regular(sg: &StarSemigroup) -> Self {
        let table = sg.mult.iter().map(|row| row.iter().map(|&v| Some(v)).collect()).collect();
        Self { table, points: sg.order(), unital: sg.unit.is_some() }
    }

    /// Every element fixes every point.
    pub fn trivial(sg: &StarSemigroup, points: usize) -> Self {
        let table = (0..sg.order()).map(|_| (0..points).map(Some).collect()).collect();
        Self { table, points, unital: true }
    }

    /// Translation of the window `{0, ..., n-1}` of the integers by `Z_{2n}`,
    /// whose element `xi` is the shift by its representative in `(-n, n]`.
    /// Shifts leaving the window are undefined.
    pub fn integer_window(n: usize) -> (StarSemigroup, Self) {
        assert!(n > 0);
        let q = 2 * n;
        let sg = StarSemigroup::cyclic(q);
        let table = (0..q)
            .map(|xi| {
                let shift = if xi <= n { xi as i64 } else { xi as i64 - q as i64 };
                (0..n)
                    .map(|x| {
                        let y = x as i64 + shift;
                        (0..n as i64).contains(&y).then_some(y as usize)
                    })
                    .collect()
            })
            .collect();
        (sg, Self { table, points: n, unital: true })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn table(&self) -> &[Vec<Option<usize>>] {
        &self.table
    }

    pub fn apply(&self, xi: usize, x: usize) -> Option<usize> {
        self.table[xi][x]
    }

    /// `true` when `xi . x` is defined for every point.
    pub fn is_total_for(&self, xi: usize) -> bool {
        self.table[xi].iter().all(Option::is_some)
    }

    pub fn is_total(&self) -> bool {
        (0..self.table.len()).all(|xi| self.is_total_for(xi))
    }
}

/// Exhaustive check of `alpha . (beta . x) = (alpha beta) . x` wherever the
/// left side is defined, and of `e . x = x` for unital actions.
pub fn validate_action(sg: &StarSemigroup, act: &Action) -> Result<()> {
    if act.table.len() != sg.order() {
        return Err(Error::MalformedTable(format!(
            "action has {} rows for a semigroup of order {}",
            act.table.len(),
            sg.order()
        )));
    }
    for alpha in 0..sg.order() {
        for beta in 0..sg.order() {
            let ab = sg.mul(alpha, beta);
            for x in 0..act.points {
                let Some(y) = act.apply(beta, x) else { continue };
                let Some(z) = act.apply(alpha, y) else { continue };
                if act.apply(ab, x) != Some(z) {
                    return Err(Error::InvalidSemigroup(Violation::ActionNotCompatible { alpha, beta, x }));
                }
            }
        }
    }
    if act.unital {
        if let Some(e) = sg.unit {
            if let Some(x) = (0..act.points).find(|&x| act.apply(e, x) != Some(x)) {
                return Err(Error::InvalidSemigroup(Violation::UnitMovesPoint { x }));
            }
        }
    }
    Ok(())
}

/// `true` when every table law holds; see [`StarSemigroup::validate`] for
/// the name of the failing law.
pub fn validate(sg: &StarSemigroup) -> bool {
    sg.is_valid()
}

pub fn group_with_inverse_star(sg: &StarSemigroup) -> bool {
    sg.is_group_with_inverse_star()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_families_are_valid() {
        for sg in [
            StarSemigroup::trivial(),
            StarSemigroup::cyclic(4),
            StarSemigroup::cyclic(7),
            StarSemigroup::klein(),
            StarSemigroup::symmetric3(),
            StarSemigroup::two_element_semilattice(),
            StarSemigroup::union_semilattice(),
            StarSemigroup::saturating_shift(4),
            StarSemigroup::truncated_free_star_monoid(3),
            StarSemigroup::matrix_units2(),
        ] {
            assert_eq!(sg.validate(), Ok(()), "{sg:?}");
            validate_action(&sg, &Action::left_regular(&sg)).unwrap();
            validate_action(&sg, &Action::trivial(&sg, 3)).unwrap();
        }
    }

    #[test]
    fn trivial_group_on_any_set() {
        let sg = StarSemigroup::trivial();
        assert!(validate(&sg));
        validate_action(&sg, &Action::trivial(&sg, 5)).unwrap();
    }

    #[test]
    fn z4_translation() {
        let sg = StarSemigroup::cyclic(4);
        assert!(validate(&sg));
        validate_action(&sg, &Action::left_regular(&sg)).unwrap();
        assert!(group_with_inverse_star(&sg));
    }

    #[test]
    fn corrupted_free_star_monoid_names_a_triple() {
        let sg = StarSemigroup::truncated_free_star_monoid(3);
        assert_eq!(sg.order(), 8);
        let mut mult = sg.mult_table().to_vec();
        // s * s := t  (should be the word "ss")
        mult[1][1] = 2;
        let bad = StarSemigroup::new(mult.clone(), sg.star_table().to_vec(), sg.unit()).unwrap();
        let violation = bad.validate().unwrap_err();
        // Oracle: brute-force scan for any non-associative triple in the
        // corrupted table, independently of `validate`.
        let g = mult.len();
        let mut found = Vec::new();
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        found.push((a, b, c));
                    }
                }
            }
        }
        match violation {
            Violation::NotAssociative { a, b, c } => assert!(found.contains(&(a, b, c))),
            other => panic!("expected associativity failure, got {other}"),
        }
    }

    #[test]
    fn group_with_inverse_star_examples() {
        assert!(!group_with_inverse_star(&StarSemigroup::two_element_semilattice()));
        assert!(!group_with_inverse_star(&StarSemigroup::saturating_shift(3)));
        assert!(!group_with_inverse_star(&StarSemigroup::truncated_free_star_monoid(3)));
        assert!(group_with_inverse_star(&StarSemigroup::symmetric3()));
        assert!(group_with_inverse_star(&StarSemigroup::klein()));
    }

    #[test]
    fn integer_window_is_a_partial_action() {
        let (sg, act) = Action::integer_window(6);
        validate_action(&sg, &act).unwrap();
        assert!(!act.is_total());
        assert_eq!(act.apply(1, 5), None);
        assert_eq!(act.apply(1, 2), Some(3));
        assert_eq!(act.apply(11, 2), Some(1));
        assert!(act.is_total_for(0));
    }

    #[test]
    fn malformed_tables() {
        assert!(matches!(StarSemigroup::new(vec![vec![0, 1]], vec![0], None), Err(Error::MalformedTable(_))));
        assert!(matches!(StarSemigroup::new(vec![vec![2]], vec![0], None), Err(Error::MalformedTable(_))));
        let sg = StarSemigroup::cyclic(3);
        let act = Action::new(vec![vec![Some(0)]], 1, false).unwrap();
        assert!(matches!(validate_action(&sg, &act), Err(Error::MalformedTable(_))));
    }

    #[test]
    fn broken_action_is_detected() {
        let sg = StarSemigroup::cyclic(3);
        let mut table: Vec<Vec<Option<usize>>> = Action::left_regular(&sg).table().to_vec();
        table[1][0] = Some(2);
        let act = Action::new(table, 3, true).unwrap();
        assert!(matches!(
            validate_action(&sg, &act),
            Err(Error::InvalidSemigroup(Violation::ActionNotCompatible { .. }))
        ));
    }
}
