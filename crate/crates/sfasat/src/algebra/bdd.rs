//! Reduced ordered decision diagrams over fixed-width bitvectors.
//!
//! Variable index `i` tests bit `w - 1 - i` of the value, so index 0 is the
//! most significant bit and indices strictly increase along every path.
//! Diagrams are plain `Arc` trees; `mk` suppresses nodes with identical
//! children, which keeps every diagram reduced. Structural equality of two
//! reduced ordered diagrams coincides with equality of the denoted sets.

use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bdd {
    Zero,
    One,
    Node { var: u32, lo: Arc<Bdd>, hi: Arc<Bdd> },
}

impl Bdd {
    fn var(&self) -> u32 {
        match self {
            Bdd::Node { var, .. } => *var,
            // leaves sort below every real variable
            _ => u32::MAX,
        }
    }
}

/// invariant: root is reduced and ordered, all vars < width, width in 1..=63
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BvSet {
    width: u32,
    root: Arc<Bdd>,
}

fn mk(var: u32, lo: Arc<Bdd>, hi: Arc<Bdd>) -> Arc<Bdd> {
    if lo == hi {
        lo
    } else {
        Arc::new(Bdd::Node { var, lo, hi })
    }
}

fn leaf(b: bool) -> Arc<Bdd> {
    Arc::new(if b { Bdd::One } else { Bdd::Zero })
}

type Memo = HashMap<(usize, usize), Arc<Bdd>>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    And,
    Or,
}

fn apply(op: Op, a: &Arc<Bdd>, b: &Arc<Bdd>, memo: &mut Memo) -> Arc<Bdd> {
    match op {
        Op::And => {
            if matches!(a.as_ref(), Bdd::Zero) || matches!(b.as_ref(), Bdd::Zero) {
                return leaf(false);
            }
            if matches!(a.as_ref(), Bdd::One) {
                return b.clone();
            }
            if matches!(b.as_ref(), Bdd::One) {
                return a.clone();
            }
        }
        Op::Or => {
            if matches!(a.as_ref(), Bdd::One) || matches!(b.as_ref(), Bdd::One) {
                return leaf(true);
            }
            if matches!(a.as_ref(), Bdd::Zero) {
                return b.clone();
            }
            if matches!(b.as_ref(), Bdd::Zero) {
                return a.clone();
            }
        }
    }
    let key = (Arc::as_ptr(a) as usize, Arc::as_ptr(b) as usize);
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let v = a.var().min(b.var());
    let (alo, ahi) = cofactors(a, v);
    let (blo, bhi) = cofactors(b, v);
    let lo = apply(op, &alo, &blo, memo);
    let hi = apply(op, &ahi, &bhi, memo);
    let out = mk(v, lo, hi);
    memo.insert(key, out.clone());
    out
}

fn cofactors(n: &Arc<Bdd>, v: u32) -> (Arc<Bdd>, Arc<Bdd>) {
    match n.as_ref() {
        Bdd::Node { var, lo, hi } if *var == v => (lo.clone(), hi.clone()),
        _ => (n.clone(), n.clone()),
    }
}

fn negate(n: &Arc<Bdd>, memo: &mut HashMap<usize, Arc<Bdd>>) -> Arc<Bdd> {
    match n.as_ref() {
        Bdd::Zero => leaf(true),
        Bdd::One => leaf(false),
        Bdd::Node { var, lo, hi } => {
            let key = Arc::as_ptr(n) as usize;
            if let Some(hit) = memo.get(&key) {
                return hit.clone();
            }
            let out = mk(*var, negate(lo, memo), negate(hi, memo));
            memo.insert(key, out.clone());
            out
        }
    }
}

impl BvSet {
    pub fn empty(width: u32) -> Self {
        BvSet { width, root: leaf(false) }
    }

    pub fn full(width: u32) -> Self {
        BvSet { width, root: leaf(true) }
    }

    /// Builds the diagram denoting exactly `values`. Values must fit in `width` bits.
    pub fn from_values(width: u32, values: &[u64]) -> Self {
        assert!((1..=63).contains(&width), "width out of range");
        let mut vals: Vec<u64> = values.to_vec();
        vals.sort_unstable();
        vals.dedup();
        for &v in &vals {
            assert!(v < 1u64 << width, "value {v} does not fit in {width} bits");
        }
        let root = build(&vals, 0, width);
        BvSet { width, root }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn contains(&self, value: u64) -> bool {
        let mut node = &self.root;
        loop {
            match node.as_ref() {
                Bdd::Zero => return false,
                Bdd::One => return true,
                Bdd::Node { var, lo, hi } => {
                    let bit = (value >> (self.width - 1 - var)) & 1;
                    node = if bit == 1 { hi } else { lo };
                }
            }
        }
    }

    pub fn and(&self, other: &BvSet) -> BvSet {
        assert_eq!(self.width, other.width);
        let mut memo = Memo::new();
        BvSet { width: self.width, root: apply(Op::And, &self.root, &other.root, &mut memo) }
    }

    pub fn or(&self, other: &BvSet) -> BvSet {
        assert_eq!(self.width, other.width);
        let mut memo = Memo::new();
        BvSet { width: self.width, root: apply(Op::Or, &self.root, &other.root, &mut memo) }
    }

    pub fn not(&self) -> BvSet {
        let mut memo = HashMap::new();
        BvSet { width: self.width, root: negate(&self.root, &mut memo) }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.root.as_ref(), Bdd::Zero)
    }

    pub fn is_full(&self) -> bool {
        matches!(self.root.as_ref(), Bdd::One)
    }

    /// Smallest member, following the 0-branch first; skipped variables read as 0.
    pub fn min_value(&self) -> Option<u64> {
        fn rec(node: &Arc<Bdd>, width: u32) -> Option<u64> {
            match node.as_ref() {
                Bdd::Zero => None,
                Bdd::One => Some(0),
                Bdd::Node { var, lo, hi } => rec(lo, width)
                    .or_else(|| rec(hi, width).map(|v| v | 1u64 << (width - 1 - var))),
            }
        }
        rec(&self.root, self.width)
    }

    /// Member count, counting don't-care levels at full weight.
    pub fn count_values(&self) -> u128 {
        fn rec(node: &Arc<Bdd>, level: u32, width: u32) -> u128 {
            match node.as_ref() {
                Bdd::Zero => 0,
                Bdd::One => 1u128 << (width - level),
                Bdd::Node { var, lo, hi } => {
                    let skipped = var - level;
                    (rec(lo, var + 1, width) + rec(hi, var + 1, width)) << skipped
                }
            }
        }
        rec(&self.root, 0, self.width)
    }

    /// All members in ascending order, or None once more than `cap` accumulate.
    pub fn values(&self, cap: usize) -> Option<Vec<u64>> {
        fn rec(node: &Arc<Bdd>, level: u32, acc: u64, width: u32, cap: usize, out: &mut Vec<u64>) -> bool {
            if level == width {
                return match node.as_ref() {
                    Bdd::One => {
                        if out.len() >= cap {
                            return false;
                        }
                        out.push(acc);
                        true
                    }
                    _ => true,
                };
            }
            match node.as_ref() {
                Bdd::Zero => true,
                n => {
                    let (lo, hi) = match n {
                        Bdd::Node { var, lo, hi } if *var == level => (lo.clone(), hi.clone()),
                        _ => (node.clone(), node.clone()),
                    };
                    rec(&lo, level + 1, acc, width, cap, out)
                        && rec(&hi, level + 1, acc | 1u64 << (width - 1 - level), width, cap, out)
                }
            }
        }
        let mut out = Vec::new();
        if rec(&self.root, 0, 0, self.width, cap, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    /// Structural invariant check used by tests: ordered vars, no redundant node.
    pub fn well_formed(&self) -> bool {
        fn rec(node: &Arc<Bdd>, min_var: u32, width: u32) -> bool {
            match node.as_ref() {
                Bdd::Zero | Bdd::One => true,
                Bdd::Node { var, lo, hi } => {
                    *var >= min_var
                        && *var < width
                        && lo != hi
                        && rec(lo, var + 1, width)
                        && rec(hi, var + 1, width)
                }
            }
        }
        rec(&self.root, 0, self.width)
    }
}

fn build(sorted: &[u64], level: u32, width: u32) -> Arc<Bdd> {
    if sorted.is_empty() {
        return leaf(false);
    }
    if level == width {
        return leaf(true);
    }
    let bit = 1u64 << (width - 1 - level);
    let split = sorted.partition_point(|v| v & bit == 0);
    let lo = build(&sorted[..split], level + 1, width);
    let hi = build(&sorted[split..], level + 1, width);
    mk(level, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_matches_listed_values() {
        let s = BvSet::from_values(6, &[6, 14, 22, 38, 54]);
        for v in 0..64u64 {
            assert_eq!(s.contains(v), [6, 14, 22, 38, 54].contains(&v), "value {v}");
        }
        assert!(s.well_formed());
    }

    #[test]
    fn boolean_ops_match_set_ops() {
        let a = BvSet::from_values(4, &[1, 2, 3, 9]);
        let b = BvSet::from_values(4, &[2, 3, 4]);
        let and = a.and(&b);
        let or = a.or(&b);
        let not = a.not();
        for v in 0..16u64 {
            assert_eq!(and.contains(v), a.contains(v) && b.contains(v));
            assert_eq!(or.contains(v), a.contains(v) || b.contains(v));
            assert_eq!(not.contains(v), !a.contains(v));
        }
        assert!(and.well_formed() && or.well_formed() && not.well_formed());
    }

    #[test]
    fn reduction_collapses_dont_care_levels() {
        // all of {0,1} over width 1 is the constant-true diagram
        let s = BvSet::from_values(1, &[0, 1]);
        assert!(s.is_full());
        // complement of the empty set is full
        assert!(BvSet::empty(5).not().is_full());
    }

    #[test]
    fn min_value_is_smallest_member() {
        let s = BvSet::from_values(6, &[54, 38, 6, 22, 14]);
        assert_eq!(s.min_value(), Some(6));
        assert_eq!(BvSet::empty(6).min_value(), None);
        assert_eq!(BvSet::full(6).min_value(), Some(0));
        let odd_high = BvSet::from_values(3, &[5, 7]);
        assert_eq!(odd_high.min_value(), Some(5));
    }

    #[test]
    fn count_and_values_agree() {
        let s = BvSet::from_values(5, &[0, 3, 17, 30, 31]);
        assert_eq!(s.count_values(), 5);
        assert_eq!(s.values(10), Some(vec![0, 3, 17, 30, 31]));
        assert_eq!(s.values(3), None);
        assert_eq!(BvSet::full(5).count_values(), 32);
    }

    #[test]
    fn intersection_of_disjoint_sets_is_empty() {
        let a = BvSet::from_values(4, &[1, 2]);
        let b = BvSet::from_values(4, &[3, 4]);
        assert!(a.and(&b).is_empty());
    }
}
