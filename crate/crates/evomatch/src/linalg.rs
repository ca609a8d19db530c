//! Exact linear-system solving and small-polytope vertex enumeration.
//!
//! Gaussian elimination over rationals with a full description of the solution
//! set (particular solution plus null-space basis), and a vertex enumerator for
//! bounded polytopes given in the form `{ z0 + N·t : A·z <= b }`. Both are the
//! workhorses behind support enumeration of equilibria.

use crate::rational::Rational;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Inconsistent,
    /// `particular + span(nullspace)`; an empty basis means the solution is unique.
    Affine {
        particular: Vec<Rational>,
        nullspace: Vec<Vec<Rational>>,
    },
}

/// Solve `A z = b` exactly.
pub fn solve_linear(a: &[Vec<Rational>], b: &[Rational]) -> LinearSolution {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    debug_assert!(a.iter().all(|r| r.len() == cols));
    debug_assert_eq!(b.len(), rows);

    // Augmented matrix, reduced to row echelon form in place.
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let pivot_row = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot_row else { continue };
        m.swap(rank, pr);
        let inv = m[rank][col].recip();
        for v in m[rank].iter_mut() {
            *v *= &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot_row = m[rank].clone();
                for (cell, pv) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *cell -= &factor * pv;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }

    for row in m.iter().skip(rank) {
        if !row[cols].is_zero() {
            return LinearSolution::Inconsistent;
        }
    }

    let mut particular = vec![Rational::zero(); cols];
    for (i, &pc) in pivot_cols.iter().enumerate() {
        particular[pc] = m[i][cols].clone();
    }

    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut nullspace = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![Rational::zero(); cols];
        v[fc] = Rational::from_integer(1.into());
        for (i, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[i][fc].clone();
        }
        nullspace.push(v);
    }

    LinearSolution::Affine {
        particular,
        nullspace,
    }
}

/// A linear inequality `coeffs · z <= rhs`.
#[derive(Debug, Clone)]
pub struct Inequality {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Inequality {
    pub fn holds_at(&self, z: &[Rational]) -> bool {
        dot(&self.coeffs, z) <= self.rhs
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vertices of the bounded polytope `{ z = z0 + N t : ineqs hold }`.
///
/// Returns `None` when the free dimension exceeds `dim_cap` (caller flags the
/// case instead of attempting it). The result is deduplicated and sorted, so
/// callers get a deterministic vertex list.
pub fn affine_polytope_vertices(
    z0: &[Rational],
    nullspace: &[Vec<Rational>],
    ineqs: &[Inequality],
    dim_cap: usize,
) -> Option<Vec<Vec<Rational>>> {
    let d = nullspace.len();
    if d == 0 {
        let ok = ineqs.iter().all(|iq| iq.holds_at(z0));
        return Some(if ok { vec![z0.to_vec()] } else { vec![] });
    }
    if d > dim_cap {
        return None;
    }

    // Rewrite each inequality in t-coordinates: (a·N) t <= b - a·z0.
    let reduced: Vec<(Vec<Rational>, Rational)> = ineqs
        .iter()
        .map(|iq| {
            let g: Vec<Rational> = nullspace.iter().map(|n| dot(&iq.coeffs, n)).collect();
            let h = &iq.rhs - dot(&iq.coeffs, z0);
            (g, h)
        })
        .collect();

    let mut out: std::collections::BTreeSet<Vec<Rational>> = Default::default();
    let m = reduced.len();
    let mut combo: Vec<usize> = (0..d).collect();
    if m < d {
        return Some(vec![]);
    }
    loop {
        // Solve the d active constraints as equalities.
        let a: Vec<Vec<Rational>> = combo.iter().map(|&i| reduced[i].0.clone()).collect();
        let b: Vec<Rational> = combo.iter().map(|&i| reduced[i].1.clone()).collect();
        if let LinearSolution::Affine {
            particular,
            nullspace: ns,
        } = solve_linear(&a, &b)
        {
            if ns.is_empty() {
                let feasible = reduced.iter().all(|(g, h)| dot(g, &particular) <= *h);
                if feasible {
                    let mut z = z0.to_vec();
                    for (nvec, t) in nullspace.iter().zip(&particular) {
                        for (zi, ni) in z.iter_mut().zip(nvec) {
                            *zi += ni * t;
                        }
                    }
                    out.insert(z);
                }
            }
        }
        // next d-combination of 0..m
        let mut i = d;
        loop {
            if i == 0 {
                return Some(out.into_iter().collect());
            }
            i -= 1;
            if combo[i] != i + m - d {
                combo[i] += 1;
                for j in i + 1..d {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rat};

    #[test]
    fn unique_solution() {
        // x + y = 3, x - y = 1  =>  (2, 1)
        let a = vec![vec![rat(1), rat(1)], vec![rat(1), rat(-1)]];
        let b = vec![rat(3), rat(1)];
        match solve_linear(&a, &b) {
            LinearSolution::Affine {
                particular,
                nullspace,
            } => {
                assert_eq!(particular, vec![rat(2), rat(1)]);
                assert!(nullspace.is_empty());
            }
            _ => panic!("expected unique solution"),
        }
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![rat(1), rat(1)], vec![rat(2), rat(2)]];
        let b = vec![rat(1), rat(3)];
        assert_eq!(solve_linear(&a, &b), LinearSolution::Inconsistent);
    }

    #[test]
    fn underdetermined_nullspace() {
        // x + y + z = 1
        let a = vec![vec![rat(1), rat(1), rat(1)]];
        let b = vec![rat(1)];
        match solve_linear(&a, &b) {
            LinearSolution::Affine { nullspace, .. } => assert_eq!(nullspace.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn segment_vertices() {
        // z in R^2 with z0=(0,0), free direction (1,-1), constraints 0<=z_i<=1:
        // the segment from (0,0) to ... along (t,-t) with z>=0 forces t=0 only.
        // Use z0=(1/2,1/2) instead: vertices (0,1) and (1,0).
        let z0 = vec![frac(1, 2), frac(1, 2)];
        let ns = vec![vec![rat(1), rat(-1)]];
        let ineqs = vec![
            Inequality {
                coeffs: vec![rat(-1), rat(0)],
                rhs: rat(0),
            },
            Inequality {
                coeffs: vec![rat(0), rat(-1)],
                rhs: rat(0),
            },
            Inequality {
                coeffs: vec![rat(1), rat(0)],
                rhs: rat(1),
            },
            Inequality {
                coeffs: vec![rat(0), rat(1)],
                rhs: rat(1),
            },
        ];
        let verts = affine_polytope_vertices(&z0, &ns, &ineqs, 4).unwrap();
        assert_eq!(verts.len(), 2);
        assert!(verts.contains(&vec![rat(0), rat(1)]));
        assert!(verts.contains(&vec![rat(1), rat(0)]));
    }

    #[test]
    fn square_vertices() {
        // Full-dimensional unit square via identity embedding.
        let z0 = vec![rat(0), rat(0)];
        let ns = vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]];
        let mut ineqs = Vec::new();
        for i in 0..2 {
            let mut lo = vec![rat(0), rat(0)];
            lo[i] = rat(-1);
            ineqs.push(Inequality {
                coeffs: lo,
                rhs: rat(0),
            });
            let mut hi = vec![rat(0), rat(0)];
            hi[i] = rat(1);
            ineqs.push(Inequality {
                coeffs: hi,
                rhs: rat(1),
            });
        }
        let verts = affine_polytope_vertices(&z0, &ns, &ineqs, 4).unwrap();
        assert_eq!(verts.len(), 4);
    }
}
