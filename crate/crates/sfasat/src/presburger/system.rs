//! Solves one conjunct of linear integer literals.
//!
//! Divisibilities become equations with fresh quotient variables. Rows are
//! normalized by their gcd, single-variable rows turn into interval bounds,
//! and unit-coefficient equations are substituted away. Whatever multi-row
//! system remains goes to branch & bound over the exact rational
//! relaxation, with a small-model cutoff keeping the search finite.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, Integer, One, Signed, Zero};

use super::simplex::{feasible_point, LpRow, RowKind};

/// invariant: no zero coefficients stored
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct LinExpr {
    pub coeffs: BTreeMap<String, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn add_var(&mut self, name: &str, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(name.to_string()).or_default();
        *slot += k;
        if slot.is_zero() {
            self.coeffs.remove(name);
        }
    }

    pub fn add_const(&mut self, k: &BigInt) {
        self.constant += k;
    }

    pub fn negated(&self) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(),
            constant: -&self.constant,
        }
    }

    fn eval(&self, a: &BTreeMap<String, BigInt>) -> BigInt {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * a.get(v).expect("assignment covers expression");
        }
        acc
    }
}

/// Conjunct literal. `Eq(e)` means e = 0, `Le(e)` means e <= 0,
/// `Dvd(k, e)` means k divides e; moduli are >= 2 by construction.
#[derive(Debug, Clone)]
pub(crate) enum Lit {
    Eq(LinExpr),
    Le(LinExpr),
    Dvd(BigInt, LinExpr),
    NegDvd(BigInt, LinExpr),
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: BTreeMap<String, BigInt>,
    rhs: BigInt,
    eq: bool,
}

impl Row {
    fn from_expr(e: &LinExpr, eq: bool) -> Row {
        Row { coeffs: e.coeffs.clone(), rhs: -&e.constant, eq }
    }
}

fn rows_of(lits: &[Lit]) -> (Vec<Row>, BTreeSet<String>) {
    let mut rows = Vec::new();
    let mut vars = BTreeSet::new();
    let mut fresh = 0usize;
    for lit in lits {
        let expr = match lit {
            Lit::Eq(e) | Lit::Le(e) | Lit::Dvd(_, e) | Lit::NegDvd(_, e) => e,
        };
        vars.extend(expr.coeffs.keys().cloned());
        match lit {
            Lit::Eq(e) => rows.push(Row::from_expr(e, true)),
            Lit::Le(e) => rows.push(Row::from_expr(e, false)),
            Lit::Dvd(k, e) => {
                debug_assert!(k.abs() >= BigInt::from(2));
                let q = format!("$dq{fresh}");
                fresh += 1;
                let mut row = Row::from_expr(e, true);
                row.coeffs.insert(q.clone(), -k);
                rows.push(row);
                vars.insert(q);
            }
            Lit::NegDvd(k, e) => {
                debug_assert!(k.abs() >= BigInt::from(2));
                // e = k*q + r with 1 <= r <= |k|-1 exactly refutes k | e
                let q = format!("$dq{fresh}");
                let r = format!("$dr{fresh}");
                fresh += 1;
                let mut row = Row::from_expr(e, true);
                row.coeffs.insert(q.clone(), -k);
                row.coeffs.insert(r.clone(), -BigInt::one());
                rows.push(row);
                rows.push(Row {
                    coeffs: BTreeMap::from([(r.clone(), -BigInt::one())]),
                    rhs: -BigInt::one(),
                    eq: false,
                });
                rows.push(Row {
                    coeffs: BTreeMap::from([(r.clone(), BigInt::one())]),
                    rhs: k.abs() - 1,
                    eq: false,
                });
                vars.insert(q);
                vars.insert(r);
            }
        }
    }
    (rows, vars)
}

#[derive(Debug, Clone, Default)]
struct Bound {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
}

impl Bound {
    fn raise_lo(&mut self, v: BigInt) {
        if self.lo.as_ref().is_none_or(|cur| *cur < v) {
            self.lo = Some(v);
        }
    }

    fn lower_hi(&mut self, v: BigInt) {
        if self.hi.as_ref().is_none_or(|cur| *cur > v) {
            self.hi = Some(v);
        }
    }

    fn empty(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(l), Some(h)) if l > h)
    }

    fn pinned(&self) -> Option<&BigInt> {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) if l == h => Some(l),
            _ => None,
        }
    }
}

struct Simplified {
    rows: Vec<Row>,
    bounds: BTreeMap<String, Bound>,
    subs: Vec<(String, LinExpr)>,
}

fn simplify(mut rows: Vec<Row>) -> Option<Simplified> {
    let mut bounds: BTreeMap<String, Bound> = BTreeMap::new();
    let mut subs: Vec<(String, LinExpr)> = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;

        // fold pinned variables into rows
        let pinned: Vec<(String, BigInt)> = bounds
            .iter()
            .filter_map(|(v, b)| b.pinned().map(|p| (v.clone(), p.clone())))
            .collect();
        for row in &mut rows {
            for (v, val) in &pinned {
                if let Some(c) = row.coeffs.remove(v) {
                    row.rhs -= c * val;
                    changed = true;
                }
            }
        }

        // normalize rows; move single-variable facts into bounds
        let mut kept = Vec::with_capacity(rows.len());
        for mut row in rows.drain(..) {
            if row.coeffs.is_empty() {
                let ok = if row.eq { row.rhs.is_zero() } else { !row.rhs.is_negative() };
                if !ok {
                    return None;
                }
                continue;
            }
            let g = row.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
            if g > BigInt::one() {
                if row.eq {
                    if !(&row.rhs % &g).is_zero() {
                        return None;
                    }
                    row.rhs /= &g;
                } else {
                    row.rhs = row.rhs.div_floor(&g);
                }
                for c in row.coeffs.values_mut() {
                    *c /= &g;
                }
            }
            if row.coeffs.len() == 1 {
                let (v, c) = row.coeffs.iter().next().expect("one entry");
                let b = bounds.entry(v.clone()).or_default();
                // after gcd division the coefficient is 1 or -1
                match (c.is_one(), row.eq) {
                    (true, true) => {
                        b.raise_lo(row.rhs.clone());
                        b.lower_hi(row.rhs.clone());
                    }
                    (true, false) => b.lower_hi(row.rhs.clone()),
                    (false, true) => {
                        b.raise_lo(-&row.rhs);
                        b.lower_hi(-&row.rhs);
                    }
                    (false, false) => b.raise_lo(-&row.rhs),
                }
                changed = true;
                continue;
            }
            kept.push(row);
        }
        rows = kept;

        if bounds.values().any(Bound::empty) {
            return None;
        }

        // substitute one unit-coefficient equality per pass
        let unit = rows
            .iter()
            .position(|r| r.eq && r.coeffs.values().any(|c| c.abs().is_one()));
        if let Some(ri) = unit {
            let row = rows.remove(ri);
            let (v, c) = row
                .coeffs
                .iter()
                .find(|(_, c)| c.abs().is_one())
                .map(|(v, c)| (v.clone(), c.clone()))
                .expect("unit entry");
            let positive = c.is_one();
            let mut expr = LinExpr::default();
            for (u, cu) in &row.coeffs {
                if *u != v {
                    expr.add_var(u, &if positive { -cu } else { cu.clone() });
                }
            }
            expr.constant = if positive { row.rhs.clone() } else { -&row.rhs };
            for r in &mut rows {
                if let Some(cv) = r.coeffs.remove(&v) {
                    for (u, cu) in &expr.coeffs {
                        let add = &cv * cu;
                        let slot = r.coeffs.entry(u.clone()).or_default();
                        *slot += add;
                        if slot.is_zero() {
                            r.coeffs.remove(u);
                        }
                    }
                    r.rhs -= &cv * &expr.constant;
                }
            }
            if let Some(b) = bounds.remove(&v) {
                if let Some(lo) = b.lo {
                    rows.push(Row {
                        coeffs: expr.negated().coeffs,
                        rhs: &expr.constant - lo,
                        eq: false,
                    });
                }
                if let Some(hi) = b.hi {
                    rows.push(Row { coeffs: expr.coeffs.clone(), rhs: hi - &expr.constant, eq: false });
                }
            }
            subs.push((v, expr));
            changed = true;
        }
    }
    Some(Simplified { rows, bounds, subs })
}

/// Cheap infeasibility test used to prune partial conjuncts: gcd checks,
/// bound intersection and substitution, no relaxation solving.
pub(crate) fn bounds_feasible(lits: &[Lit]) -> bool {
    let (rows, _) = rows_of(lits);
    simplify(rows).is_some()
}

fn pick_in(b: Option<&Bound>) -> BigInt {
    // any value in range, preferring 0
    match b {
        None => BigInt::zero(),
        Some(b) => match (&b.lo, &b.hi) {
            (Some(l), _) if l.is_positive() => l.clone(),
            (_, Some(h)) if h.is_negative() => h.clone(),
            _ => BigInt::zero(),
        },
    }
}

/// Full decision for one conjunct. The returned assignment covers every
/// variable of `lits` plus the fresh quotient variables.
pub(crate) fn solve_conjunct(lits: &[Lit]) -> Option<BTreeMap<String, BigInt>> {
    let (rows, all_vars) = rows_of(lits);
    let s = simplify(rows)?;

    let mut assign: BTreeMap<String, BigInt> = BTreeMap::new();
    if !s.rows.is_empty() {
        let ilp_vars: Vec<String> = s
            .rows
            .iter()
            .flat_map(|r| r.coeffs.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = branch_and_bound(&s.rows, &ilp_vars, &s.bounds)?;
        assign.extend(ilp_vars.into_iter().zip(values));
    }
    let substituted: BTreeSet<&String> = s.subs.iter().map(|(v, _)| v).collect();
    for v in &all_vars {
        if !assign.contains_key(v) && !substituted.contains(v) {
            assign.insert(v.clone(), pick_in(s.bounds.get(v)));
        }
    }
    for (v, expr) in s.subs.iter().rev() {
        let val = expr.eval(&assign);
        assign.insert(v.clone(), val);
    }
    Some(assign)
}

fn branch_and_bound(
    rows: &[Row],
    vars: &[String],
    bounds: &BTreeMap<String, Bound>,
) -> Option<Vec<BigInt>> {
    let n = vars.len();
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let dense: Vec<(Vec<BigInt>, bool, BigInt)> = rows
        .iter()
        .map(|r| {
            let mut cs = vec![BigInt::zero(); n];
            for (v, c) in &r.coeffs {
                cs[index[v.as_str()]] = c.clone();
            }
            (cs, r.eq, r.rhs.clone())
        })
        .collect();

    // small-model cutoff n*(m*a)^(2m+1) over the system together with its
    // interval bounds: a feasible system has an integer point inside it
    let var_bounds: Vec<&Bound> = {
        static FREE: Bound = Bound { lo: None, hi: None };
        vars.iter().map(|v| bounds.get(v).unwrap_or(&FREE)).collect()
    };
    let mut a = BigInt::one();
    let mut m = rows.len();
    for (cs, _, rhs) in &dense {
        for c in cs {
            a = a.max(c.abs());
        }
        a = a.max(rhs.abs());
    }
    for b in &var_bounds {
        for side in [&b.lo, &b.hi].into_iter().flatten() {
            a = a.max(side.abs());
            m += 1;
        }
    }
    let exp = u32::try_from(2 * m + 1).expect("row count fits");
    let cutoff = BigInt::from(n) * (BigInt::from(m) * a).pow(exp);

    // widen the box geometrically so the first hit is a small model; the
    // final round at the cutoff preserves completeness
    let mut cap = BigInt::from(4);
    loop {
        let cap_now = cap.clone().min(cutoff.clone());
        let lo0: Vec<BigInt> = var_bounds
            .iter()
            .map(|b| b.lo.clone().unwrap_or_else(|| -&cap_now).max(-&cap_now))
            .collect();
        let hi0: Vec<BigInt> = var_bounds
            .iter()
            .map(|b| b.hi.clone().unwrap_or_else(|| cap_now.clone()).min(cap_now.clone()))
            .collect();
        if let Some(point) = search_box(&dense, n, lo0, hi0) {
            return Some(point);
        }
        if cap >= cutoff {
            return None;
        }
        cap = &cap * &cap;
    }
}

fn search_box(
    dense: &[(Vec<BigInt>, bool, BigInt)],
    n: usize,
    lo0: Vec<BigInt>,
    hi0: Vec<BigInt>,
) -> Option<Vec<BigInt>> {
    let mut stack = vec![(lo0, hi0)];
    while let Some((lo, hi)) = stack.pop() {
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            continue;
        }
        // shift to y = x - lo >= 0 and cap with y <= hi - lo
        let mut lp_rows: Vec<LpRow> = dense
            .iter()
            .map(|(cs, eq, rhs)| LpRow {
                coeffs: cs.clone(),
                kind: if *eq { RowKind::Eq } else { RowKind::Le },
                rhs: rhs - cs.iter().zip(&lo).map(|(c, l)| c * l).sum::<BigInt>(),
            })
            .collect();
        for i in 0..n {
            let mut cs = vec![BigInt::zero(); n];
            cs[i] = BigInt::one();
            lp_rows.push(LpRow { coeffs: cs, kind: RowKind::Le, rhs: &hi[i] - &lo[i] });
        }
        let Some(point) = feasible_point(n, &lp_rows) else {
            continue;
        };
        match point.iter().position(|p| !p.is_integer()) {
            None => {
                return Some(
                    point.iter().zip(&lo).map(|(p, l)| p.to_integer() + l).collect(),
                );
            }
            Some(j) => {
                let split = point[j].floor().to_integer() + &lo[j];
                let mut lo_hi = lo.clone();
                lo_hi[j] = &split + 1;
                let mut hi_lo = hi.clone();
                hi_lo[j] = split;
                // floor branch explored first
                stack.push((lo_hi, hi));
                stack.push((lo, hi_lo));
            }
        }
    }
    None
}
