//! Exact linear algebra over the rationals for the small dense systems
//! that appear in the constructions.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Brings `rows` to reduced row echelon form and returns the pivot columns.
pub fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row[c..ncols].iter_mut().zip(&pivot_row[c..ncols]) {
                *x -= &f * p;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a set of vectors.
pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut rows = vectors.to_vec();
    rref(&mut rows).len()
}

/// One solution of `A x = b` (free variables set to zero), or `None` if the
/// system is inconsistent. `a` is given by rows.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(a.len(), b.len());
    let n = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rows[r][n].clone();
    }
    Some(x)
}

/// Coefficients `c` with `Σ c_i points[i] = target` and `Σ c_i = 1`, if any.
pub fn affine_coefficients(points: &[&[Rational]], target: &[Rational]) -> Option<Vec<Rational>> {
    let dim = target.len();
    let mut a: Vec<Vec<Rational>> = (0..dim)
        .map(|k| points.iter().map(|p| p[k].clone()).collect())
        .collect();
    a.push(vec![Rational::one(); points.len()]);
    let mut b = target.to_vec();
    b.push(Rational::one());
    solve(&a, &b)
}

/// An affine hull in coordinates: `origin + Σ β_i directions[i]` with
/// linearly independent directions.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBasis {
    origin: Vec<Rational>,
    directions: Vec<Vec<Rational>>,
}

impl AffineBasis {
    /// The affine hull of `points`, taking `points[0]` as origin and the
    /// differences `points[j] − points[0]` that raise the rank, in order.
    pub fn from_points(points: &[Vec<Rational>]) -> Option<Self> {
        let origin = points.first()?.clone();
        let mut directions: Vec<Vec<Rational>> = Vec::new();
        for p in &points[1..] {
            let d: Vec<Rational> = p.iter().zip(&origin).map(|(x, o)| x - o).collect();
            let mut trial = directions.clone();
            trial.push(d.clone());
            if rank(&trial) == trial.len() {
                directions.push(d);
            }
        }
        Some(AffineBasis { origin, directions })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }

    pub fn directions(&self) -> &[Vec<Rational>] {
        &self.directions
    }

    /// Unique `β` with `p = origin + Σ β_i directions[i]`, if `p` is in the hull.
    pub fn coordinates(&self, p: &[Rational]) -> Option<Vec<Rational>> {
        if p.len() != self.origin.len() {
            return None;
        }
        let rhs: Vec<Rational> = p.iter().zip(&self.origin).map(|(x, o)| x - o).collect();
        self.linear_coordinates(&rhs)
    }

    /// Unique `β` with `v = Σ β_i directions[i]`, if `v` is in the span.
    pub fn linear_coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        if v.len() != self.origin.len() {
            return None;
        }
        let a: Vec<Vec<Rational>> = (0..v.len())
            .map(|k| self.directions.iter().map(|d| d[k].clone()).collect())
            .collect();
        if self.directions.is_empty() {
            return v.iter().all(Zero::is_zero).then(Vec::new);
        }
        solve(&a, v)
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.coordinates(p).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn solve_and_rank() {
        let a = vec![v(&[1, 2]), v(&[3, 4])];
        assert_eq!(solve(&a, &v(&[5, 6])).unwrap(), vec![int(-4), ratio(9, 2)]);
        let singular = vec![v(&[1, 2]), v(&[2, 4])];
        assert_eq!(rank(&singular), 1);
        assert!(solve(&singular, &v(&[1, 3])).is_none());
        assert!(solve(&singular, &v(&[1, 2])).is_some());
    }

    #[test]
    fn affine_hull_membership() {
        let r = v(&[1, 2, 3, 4]);
        let r2 = v(&[4, 3, 2, 1]);
        let target: Vec<Rational> = r
            .iter()
            .zip(&r2)
            .map(|(a, b)| ratio(3, 2) * a - ratio(1, 2) * b)
            .collect();
        let c = affine_coefficients(&[&r, &r2], &target).unwrap();
        assert_eq!(c, vec![ratio(3, 2), ratio(-1, 2)]);
        assert!(affine_coefficients(&[&r, &r2], &v(&[0, 0, 0, 1])).is_none());

        let basis = AffineBasis::from_points(&[r.clone(), r2.clone(), r.clone()]).unwrap();
        assert_eq!(basis.dim(), 1);
        assert_eq!(basis.coordinates(&target).unwrap(), vec![ratio(-1, 2)]);
        assert!(!basis.contains(&v(&[0, 0, 0, 1])));
    }

    proptest! {
        #[test]
        fn solutions_satisfy_the_system(
            entries in prop::collection::vec(-4i64..5, 12),
            rhs in prop::collection::vec(-4i64..5, 3),
        ) {
            let a: Vec<Vec<Rational>> = entries.chunks(4).map(v).collect();
            let b = v(&rhs);
            if let Some(x) = solve(&a, &b) {
                for (row, bi) in a.iter().zip(&b) {
                    let lhs = row.iter().zip(&x).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
                    prop_assert_eq!(&lhs, bi);
                }
            } else {
                prop_assert!(rank(&a) < 3);
            }
        }
    }
}
