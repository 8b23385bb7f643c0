//! Exact rational feasibility via phase-1 simplex.
//!
//! Input is a system of rows `sum(a_j * y_j) (<=|=) b` over variables
//! `y_j >= 0` with integer data. The return value is a rational point
//! satisfying every row, or `None` when the system is infeasible over the
//! rationals. Bland's pivoting rule is used throughout, so the procedure
//! terminates and is deterministic.

use num::{BigInt, BigRational, One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowKind {
    Le,
    Eq,
}

pub(crate) struct LpRow {
    pub coeffs: Vec<BigInt>,
    pub kind: RowKind,
    pub rhs: BigInt,
}

/// invariant: rhs column stays nonnegative between pivots
struct Tableau {
    cols: usize,
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    // objective in canonical form: w = w0 - sum(d[j] * col_j)
    d: Vec<BigRational>,
    w0: BigRational,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for j in 0..self.cols {
                let t = &self.rows[row][j] * &f;
                self.rows[i][j] -= t;
            }
            let t = &self.rhs[row] * &f;
            self.rhs[i] -= t;
        }
        if !self.d[col].is_zero() {
            let f = self.d[col].clone();
            for j in 0..self.cols {
                let t = &self.rows[row][j] * &f;
                self.d[j] -= t;
            }
            let t = &self.rhs[row] * &f;
            self.w0 -= t;
        }
        self.basis[row] = col;
    }
}

/// Some rational solution of `rows` with all `n` variables nonnegative.
pub(crate) fn feasible_point(n: usize, rows: &[LpRow]) -> Option<Vec<BigRational>> {
    let rat = |b: &BigInt| BigRational::from_integer(b.clone());

    // count extra columns: slack or surplus per Le row, artificial where the
    // canonical start needs one
    let mut cols = n;
    let mut layout = Vec::with_capacity(rows.len());
    for r in rows {
        let flip = r.rhs.is_negative();
        let needs_surplus = r.kind == RowKind::Le;
        let needs_artificial = r.kind == RowKind::Eq || flip;
        let surplus_col = needs_surplus.then(|| {
            cols += 1;
            cols - 1
        });
        let artificial_col = needs_artificial.then(|| {
            cols += 1;
            cols - 1
        });
        layout.push((flip, surplus_col, artificial_col));
    }

    let mut t = Tableau {
        cols,
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: vec![0; rows.len()],
        d: vec![BigRational::zero(); cols],
        w0: BigRational::zero(),
    };

    for (i, r) in rows.iter().enumerate() {
        let (flip, surplus_col, artificial_col) = layout[i];
        let mut row = vec![BigRational::zero(); cols];
        for (j, c) in r.coeffs.iter().enumerate() {
            row[j] = if flip { -rat(c) } else { rat(c) };
        }
        let rhs = if flip { -rat(&r.rhs) } else { rat(&r.rhs) };
        if let Some(s) = surplus_col {
            // a Le row becomes `.. + s = b` (slack) or, when flipped to
            // keep b nonnegative, `.. - s = b` (surplus)
            row[s] = if flip { -BigRational::one() } else { BigRational::one() };
        }
        match artificial_col {
            Some(a) => {
                row[a] = BigRational::one();
                t.basis[i] = a;
                // objective w includes this artificial: fold the row into d
                for (j, v) in row.iter().enumerate() {
                    if j != a {
                        t.d[j] += v.clone();
                    }
                }
                t.w0 += rhs.clone();
            }
            None => t.basis[i] = surplus_col.expect("row has slack or artificial"),
        }
        t.rows.push(row);
        t.rhs.push(rhs);
    }

    // Bland: entering column = lowest index that improves w
    while let Some(col) = (0..t.cols).find(|&j| t.d[j].is_positive()) {
        // leaving row: minimum ratio, ties to the lowest basic column
        let mut best: Option<(usize, BigRational)> = None;
        for i in 0..t.rows.len() {
            if !t.rows[i][col].is_positive() {
                continue;
            }
            let ratio = &t.rhs[i] / &t.rows[i][col];
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && t.basis[i] < t.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        // improving column unbounded: w decreases without limit, yet w >= 0
        // on the feasible set of the phase-1 system, so this cannot happen
        let (row, _) = best.expect("phase-1 objective is bounded below");
        t.pivot(row, col);
    }

    if !t.w0.is_zero() {
        return None;
    }
    let mut point = vec![BigRational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            point[b] = t.rhs[i].clone();
        }
    }
    Some(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn row(coeffs: &[i64], kind: RowKind, rhs: i64) -> LpRow {
        LpRow { coeffs: coeffs.iter().map(|&c| int(c)).collect(), kind, rhs: int(rhs) }
    }

    fn check(n: usize, rows: &[LpRow], point: &[BigRational]) {
        for r in rows {
            let lhs: BigRational = r
                .coeffs
                .iter()
                .zip(point)
                .map(|(c, x)| BigRational::from_integer(c.clone()) * x)
                .sum();
            let rhs = BigRational::from_integer(r.rhs.clone());
            match r.kind {
                RowKind::Le => assert!(lhs <= rhs),
                RowKind::Eq => assert_eq!(lhs, rhs),
            }
        }
        assert_eq!(point.len(), n);
        assert!(point.iter().all(|x| !x.is_negative()));
    }

    #[test]
    fn equality_with_fractional_solution() {
        let rows = vec![row(&[2], RowKind::Eq, 3)];
        let p = feasible_point(1, &rows).unwrap();
        assert_eq!(p[0], BigRational::new(int(3), int(2)));
    }

    #[test]
    fn negative_upper_bound_is_infeasible() {
        let rows = vec![row(&[1], RowKind::Le, -1)];
        assert!(feasible_point(1, &rows).is_none());
    }

    #[test]
    fn conflicting_equalities_are_infeasible() {
        let rows = vec![row(&[1, 1], RowKind::Eq, 1), row(&[1, 1], RowKind::Eq, 2)];
        assert!(feasible_point(2, &rows).is_none());
    }

    #[test]
    fn feasible_system_with_lower_bounds() {
        // x + y = 5, x >= 2 (as -x <= -2), y >= 1
        let rows = vec![
            row(&[1, 1], RowKind::Eq, 5),
            row(&[-1, 0], RowKind::Le, -2),
            row(&[0, -1], RowKind::Le, -1),
        ];
        let p = feasible_point(2, &rows).unwrap();
        check(2, &rows, &p);
    }

    #[test]
    fn zero_rows_trivially_feasible() {
        let p = feasible_point(3, &[]).unwrap();
        assert!(p.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn redundant_rows_stay_feasible() {
        let rows = vec![
            row(&[1, 2, 1], RowKind::Le, 10),
            row(&[1, 2, 1], RowKind::Le, 12),
            row(&[-1, 0, 0], RowKind::Le, -3),
            row(&[1, 1, 1], RowKind::Eq, 4),
        ];
        let p = feasible_point(3, &rows).unwrap();
        check(3, &rows, &p);
    }
}
