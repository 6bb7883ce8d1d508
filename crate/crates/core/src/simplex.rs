//! Exact phase-one simplex for `A x = b, x ≥ 0` with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A non-negative solution.
    Feasible(Vec<Rational>),
    /// A Farkas certificate `y` with `Aᵀy ≤ 0` and `bᵀy > 0`.
    Infeasible(Vec<Rational>),
}

/// Decides whether `A x = b` has a solution with `x ≥ 0`. `a` is given by rows.
pub fn find_feasible(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    assert_eq!(a.len(), b.len());
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m;

    let signs: Vec<bool> = b.iter().map(Signed::is_negative).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rational> = if signs[i] {
            a[i].iter().map(|x| -x).collect()
        } else {
            a[i].clone()
        };
        row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        rows.push(row);
        rhs.push(b[i].abs());
    }
    let mut basis: Vec<usize> = (n..width).collect();

    // Reduced costs of the phase-one objective Σ artificials, and its negated value.
    let mut cost: Vec<Rational> = (0..width)
        .map(|j| {
            if j < n {
                -rows.iter().fold(Rational::zero(), |acc, r| acc + &r[j])
            } else {
                Rational::zero()
            }
        })
        .collect();
    let mut neg_obj = -rhs.iter().fold(Rational::zero(), |acc, x| acc + x);

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !rows[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][enter];
            let better = match &leave {
                None => true,
                Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (r, _) = leave.expect("phase-one objective is bounded below");

        let inv = rows[r][enter].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        rhs[r] *= &inv;
        let pivot_row = rows[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..m {
            if i == r || rows[i][enter].is_zero() {
                continue;
            }
            let f = rows[i][enter].clone();
            for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            rhs[i] -= &f * &pivot_rhs;
        }
        let f = cost[enter].clone();
        for (x, p) in cost.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
        neg_obj -= &f * &pivot_rhs;
        basis[r] = enter;
    }

    if neg_obj.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = rhs[i].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        let y = (0..m)
            .map(|i| {
                let yi = Rational::one() - &cost[n + i];
                if signs[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        Feasibility::Infeasible(y)
    }
}

/// Checks a Farkas certificate: `Aᵀy ≤ 0` and `bᵀy > 0`.
pub fn is_farkas_certificate(a: &[Vec<Rational>], b: &[Rational], y: &[Rational]) -> bool {
    let n = a.first().map_or(0, Vec::len);
    let columns_ok = (0..n).all(|j| {
        let s = a
            .iter()
            .zip(y)
            .fold(Rational::zero(), |acc, (row, yi)| acc + &row[j] * yi);
        !s.is_positive()
    });
    let by = b.iter().zip(y).fold(Rational::zero(), |acc, (bi, yi)| acc + bi * yi);
    columns_ok && by.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_cases() {
        let a = vec![v(&[1, 1]), v(&[1, -1])];
        match find_feasible(&a, &v(&[2, 0])) {
            Feasibility::Feasible(x) => assert_eq!(x, v(&[1, 1])),
            other => panic!("{other:?}"),
        }
        let a = vec![v(&[1, 1])];
        match find_feasible(&a, &v(&[-1])) {
            Feasibility::Infeasible(y) => assert!(is_farkas_certificate(&a, &v(&[-1]), &y)),
            other => panic!("{other:?}"),
        }
        // x = 1 and x = 0 at once
        let a = vec![v(&[1]), v(&[1])];
        match find_feasible(&a, &v(&[1, 0])) {
            Feasibility::Infeasible(y) => assert!(is_farkas_certificate(&a, &v(&[1, 0]), &y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance, equality form with slacks.
        let a = vec![
            vec![
                crate::rational::ratio(1, 4),
                int(-8),
                int(-1),
                int(9),
                int(1),
                int(0),
                int(0),
            ],
            vec![
                crate::rational::ratio(1, 2),
                int(-12),
                crate::rational::ratio(-1, 2),
                int(3),
                int(0),
                int(1),
                int(0),
            ],
            vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
        ];
        let b = v(&[0, 0, 1]);
        assert!(matches!(find_feasible(&a, &b), Feasibility::Feasible(_)));
    }

    proptest! {
        #[test]
        fn answers_are_verifiable(
            entries in prop::collection::vec(-3i64..4, 12),
            rhs in prop::collection::vec(-3i64..4, 3),
        ) {
            let a: Vec<Vec<Rational>> = entries.chunks(4).map(v).collect();
            let b = v(&rhs);
            match find_feasible(&a, &b) {
                Feasibility::Feasible(x) => {
                    prop_assert!(x.iter().all(|xi| !xi.is_negative()));
                    for (row, bi) in a.iter().zip(&b) {
                        let lhs = row.iter().zip(&x).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
                        prop_assert_eq!(&lhs, bi);
                    }
                }
                Feasibility::Infeasible(y) => prop_assert!(is_farkas_certificate(&a, &b, &y)),
            }
        }
    }
}
