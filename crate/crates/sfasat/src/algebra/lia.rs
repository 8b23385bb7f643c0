//! Single-variable integer linear-arithmetic atoms and their satisfiability.
//!
//! Atoms are `coeff*x + offset CMP rhs` and `x % modulus == residue`. A
//! Boolean combination is decided by lazy DNF enumeration; each conjunct
//! intersects its comparison atoms into one integer interval and then scans
//! one full period of the congruence atoms inside that interval. `!=` and
//! negated `==` split into two strict conjuncts so every interval is convex,
//! which together with periodicity makes the scan exact.

use std::fmt;

use super::Node;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CmpOp {
    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Ne => "!=",
        };
        f.write_str(s)
    }
}

/// `coeff*x + offset CMP rhs`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub coeff: i64,
    pub offset: i64,
    pub cmp: CmpOp,
    pub rhs: i64,
}

/// `x % modulus == residue`; invariant: modulus >= 1, 0 <= residue < modulus
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModAtom {
    pub modulus: i64,
    pub residue: i64,
}

impl ModAtom {
    pub fn new(modulus: i64, residue: i64) -> ModAtom {
        assert!(modulus >= 1, "modulus must be positive");
        ModAtom { modulus, residue: residue.rem_euclid(modulus) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiaAtom {
    Linear(LinearAtom),
    Mod(ModAtom),
}

impl LiaAtom {
    pub fn eval(&self, x: i64) -> bool {
        match self {
            LiaAtom::Linear(a) => {
                let lhs = a.coeff as i128 * x as i128 + a.offset as i128;
                a.cmp.holds(lhs, a.rhs as i128)
            }
            LiaAtom::Mod(a) => (x as i128).rem_euclid(a.modulus as i128) == a.residue as i128,
        }
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != 1 {
            write!(f, "{}*", self.coeff)?;
        }
        write!(f, "x")?;
        if self.offset > 0 {
            write!(f, " + {}", self.offset)?;
        } else if self.offset < 0 {
            write!(f, " - {}", -(self.offset as i128))?;
        }
        write!(f, " {} {}", self.cmp, self.rhs)
    }
}

impl fmt::Display for ModAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x % {} == {}", self.modulus, self.residue)
    }
}

impl fmt::Display for LiaAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiaAtom::Linear(a) => a.fmt(f),
            LiaAtom::Mod(a) => a.fmt(f),
        }
    }
}

// ====== satisfiability ======

/// Conjunct literal after polarity folding: comparisons always positive,
/// congruences keep a sign.
#[derive(Clone, Copy)]
enum Lit {
    Lin(LinearAtom),
    Mod(ModAtom, bool),
}

/// First witness in deterministic DNF order, or None when unsatisfiable.
pub(crate) fn satisfiable(node: &Node) -> Option<i64> {
    let mut found = None;
    let mut acc = Vec::new();
    walk(&[(node, true)], &mut acc, &mut |conjunct| match solve_conjunct(conjunct) {
        Some(x) => {
            found = Some(x);
            false
        }
        None => true,
    });
    found
}

/// Left-to-right DNF enumeration; `visit` returns false to stop early.
fn walk(pending: &[(&Node, bool)], acc: &mut Vec<Lit>, visit: &mut impl FnMut(&[Lit]) -> bool) -> bool {
    let Some(&(node, pos)) = pending.first() else {
        return visit(acc);
    };
    let rest = &pending[1..];
    match (node, pos) {
        (Node::True, true) | (Node::False, false) => walk(rest, acc, visit),
        (Node::True, false) | (Node::False, true) => true,
        (Node::Not(inner), _) => {
            let mut next = vec![(inner.as_ref(), !pos)];
            next.extend_from_slice(rest);
            walk(&next, acc, visit)
        }
        (Node::And(a, b), true) | (Node::Or(a, b), false) => {
            let mut next = vec![(a.as_ref(), pos), (b.as_ref(), pos)];
            next.extend_from_slice(rest);
            walk(&next, acc, visit)
        }
        (Node::Or(a, b), true) | (Node::And(a, b), false) => {
            for child in [a.as_ref(), b.as_ref()] {
                let mut next = vec![(child, pos)];
                next.extend_from_slice(rest);
                if !walk(&next, acc, visit) {
                    return false;
                }
            }
            true
        }
        (Node::Lia(atom), _) => {
            let lits: Vec<Lit> = match atom {
                LiaAtom::Linear(a) => {
                    let cmp = if pos { a.cmp } else { a.cmp.negated() };
                    match cmp {
                        // a != b splits so conjunct intervals stay convex
                        CmpOp::Ne => vec![
                            Lit::Lin(LinearAtom { cmp: CmpOp::Lt, ..*a }),
                            Lit::Lin(LinearAtom { cmp: CmpOp::Gt, ..*a }),
                        ],
                        _ => vec![Lit::Lin(LinearAtom { cmp, ..*a })],
                    }
                }
                LiaAtom::Mod(m) => vec![Lit::Mod(*m, pos)],
            };
            if lits.len() == 1 {
                acc.push(lits[0]);
                let ok = walk(rest, acc, visit);
                acc.pop();
                ok
            } else {
                for lit in lits {
                    acc.push(lit);
                    let ok = walk(rest, acc, visit);
                    acc.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
        }
        (Node::Bv(_), _) => unreachable!("bitvector atom in integer predicate"),
    }
}

fn solve_conjunct(lits: &[Lit]) -> Option<i64> {
    let mut lo: Option<i128> = None;
    let mut hi: Option<i128> = None;
    let mut mods: Vec<(i64, i64, bool)> = Vec::new();

    for lit in lits {
        match lit {
            Lit::Mod(m, pos) => mods.push((m.modulus, m.residue, *pos)),
            Lit::Lin(a) => {
                let c = a.coeff as i128;
                let t = a.rhs as i128 - a.offset as i128;
                // normalize strict comparisons to inclusive integer bounds
                let (cmp, t) = match a.cmp {
                    CmpOp::Lt => (CmpOp::Le, t - 1),
                    CmpOp::Gt => (CmpOp::Ge, t + 1),
                    other => (other, t),
                };
                if c == 0 {
                    if !cmp.holds(0, t) {
                        return None;
                    }
                    continue;
                }
                match cmp {
                    CmpOp::Le => {
                        if c > 0 {
                            tighten_hi(&mut hi, div_floor(t, c));
                        } else {
                            tighten_lo(&mut lo, div_ceil(t, c));
                        }
                    }
                    CmpOp::Ge => {
                        if c > 0 {
                            tighten_lo(&mut lo, div_ceil(t, c));
                        } else {
                            tighten_hi(&mut hi, div_floor(t, c));
                        }
                    }
                    CmpOp::Eq => {
                        if t % c != 0 {
                            return None;
                        }
                        let v = t / c;
                        tighten_lo(&mut lo, v);
                        tighten_hi(&mut hi, v);
                    }
                    CmpOp::Lt | CmpOp::Gt | CmpOp::Ne => unreachable!(),
                }
            }
        }
    }

    if let (Some(l), Some(h)) = (lo, hi) {
        if l > h {
            return None;
        }
    }

    let period: i128 = mods.iter().fold(1i128, |acc, &(m, _, _)| {
        let m = m as i128;
        acc / gcd(acc, m) * m
    });

    let (start, end) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h.min(l + period - 1)),
        (Some(l), None) => (l, l + period - 1),
        (None, Some(h)) => (h - period + 1, h),
        (None, None) => (0, period - 1),
    };

    let mut x = start;
    while x <= end {
        let ok = mods
            .iter()
            .all(|&(m, r, pos)| (x.rem_euclid(m as i128) == r as i128) == pos);
        if ok {
            return Some(i64::try_from(x).expect("witness exceeds i64 range"));
        }
        x += 1;
    }
    None
}

fn tighten_lo(lo: &mut Option<i128>, v: i128) {
    *lo = Some(lo.map_or(v, |cur| cur.max(v)));
}

fn tighten_hi(hi: &mut Option<i128>, v: i128) {
    *hi = Some(hi.map_or(v, |cur| cur.min(v)));
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && (a < 0) != (b < 0) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && (a < 0) == (b < 0) {
        q + 1
    } else {
        q
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_eval() {
        let odd = LiaAtom::Mod(ModAtom::new(2, 1));
        assert!(odd.eval(3) && odd.eval(-3) && !odd.eval(0));
        let a = LiaAtom::Linear(LinearAtom { coeff: 3, offset: 1, cmp: CmpOp::Le, rhs: 7 });
        assert!(a.eval(2) && !a.eval(3));
    }

    #[test]
    fn negative_modulus_normalizes() {
        assert_eq!(ModAtom::new(3, -1).residue, 2);
        assert_eq!(ModAtom::new(3, 7).residue, 1);
    }

    #[test]
    fn display_round_shape() {
        let a = LinearAtom { coeff: -2, offset: -3, cmp: CmpOp::Ge, rhs: 4 };
        assert_eq!(a.to_string(), "-2*x - 3 >= 4");
        let b = LinearAtom { coeff: 1, offset: 0, cmp: CmpOp::Gt, rhs: 0 };
        assert_eq!(b.to_string(), "x > 0");
        assert_eq!(ModAtom::new(2, 1).to_string(), "x % 2 == 1");
    }
}
