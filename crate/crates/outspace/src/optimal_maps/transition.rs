use super::{GateStructure, GraphMorphism, OptimalMapError};
use crate::free_group::Letter;
use crate::marked_graph::edge_of;
use crate::scalar::{Scalar, Q};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Crossing counts of a self-map: entry `(e, e')` counts how often the image of `e` crosses
/// `e'` in either direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub entries: Vec<Vec<u64>>,
}

fn is_self_map<S: Scalar>(phi: &GraphMorphism<S>) -> bool {
    phi.source().num_vertices() == phi.target().num_vertices() && phi.source().edges() == phi.target().edges()
}

pub fn transition_matrix<S: Scalar>(phi: &GraphMorphism<S>) -> Result<TransitionMatrix, OptimalMapError> {
    if !is_self_map(phi) {
        return Err(OptimalMapError::NotSelfMap);
    }
    let n = phi.source().num_edges();
    let entries = (0..n)
        .map(|e| {
            let mut row = vec![0u64; n];
            for &l in phi.image(e).letters() {
                row[edge_of(l)] += 1;
            }
            row
        })
        .collect();
    Ok(TransitionMatrix { entries })
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Whether the directed graph with an arrow `e → e'` for each positive entry is strongly
    /// connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.size();
        let reach = |transpose: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let a = if transpose { self.entries[j][i] } else { self.entries[i][j] };
                    if a > 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|&b| b)
        };
        n > 0 && reach(false) && reach(true)
    }
}

/// Coefficients of `det(xI − M)`, leading coefficient first, by Faddeev–LeVerrier.
pub fn characteristic_polynomial(m: &TransitionMatrix) -> Vec<BigInt> {
    let n = m.size();
    let a: Vec<Vec<BigRational>> =
        m.entries.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()).collect();
    let mul = |x: &Vec<Vec<BigRational>>, y: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(BigRational::zero(), |acc, k| acc + &x[i][k] * &y[k][j])).collect())
            .collect()
    };
    let mut coeffs = vec![BigRational::from_integer(BigInt::from(1))];
    let mut mk: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k
        let mut next = mul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[k - 1].clone();
        }
        mk = next;
        let am = mul(&a, &mk);
        let tr = (0..n).fold(BigRational::zero(), |acc, i| acc + &am[i][i]);
        coeffs.push(-tr / BigRational::from_integer(BigInt::from(k as i64)));
    }
    coeffs.into_iter().map(|c| c.to_integer()).collect()
}

/// Perron–Frobenius value with a certified enclosing interval and the normalized positive
/// eigenvector estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilatation {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub eigenvector: Vec<f64>,
}

/// Power iteration on `M + I` for the spectral radius of `M`. The bounds are the
/// Collatz–Wielandt quotients of the final positive vector, evaluated exactly.
pub fn dilatation(m: &TransitionMatrix) -> Dilatation {
    let n = m.size();
    let mut x = vec![1.0f64; n];
    for _ in 0..10_000 {
        let mut y: Vec<f64> =
            (0..n).map(|i| x[i] + (0..n).map(|j| m.entries[i][j] as f64 * x[j]).sum::<f64>()).collect();
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if diff < 1e-15 {
            break;
        }
    }
    let xq: Vec<BigRational> = x.iter().map(|&v| BigRational::from_float(v).expect("finite")).collect();
    let quot: Vec<BigRational> = (0..n)
        .map(|i| {
            let mx = (0..n).fold(BigRational::zero(), |acc, j| {
                acc + BigRational::from_integer(BigInt::from(m.entries[i][j])) * &xq[j]
            });
            mx / &xq[i]
        })
        .collect();
    let lo = quot.iter().min().cloned().unwrap_or_else(BigRational::zero);
    let hi = quot.iter().max().cloned().unwrap_or_else(BigRational::zero);
    let down = |q: &BigRational| {
        let f = q.to_f64().unwrap();
        if BigRational::from_float(f).unwrap() > *q {
            f.next_down()
        } else {
            f
        }
    };
    let up = |q: &BigRational| {
        let f = q.to_f64().unwrap();
        if BigRational::from_float(f).unwrap() < *q {
            f.next_up()
        } else {
            f
        }
    };
    let lower = down(&lo);
    let upper = up(&hi);
    Dilatation { estimate: (lower + upper) / 2.0, lower, upper, eigenvector: x }
}

/// Positive eigenvector of `M` for the exact eigenvalue `lambda`, scaled so its first entry is
/// 1. Requires an irreducible matrix and a one-dimensional eigenspace.
pub fn eigenvector_exact<S: Scalar>(m: &TransitionMatrix, lambda: &S) -> Result<Vec<S>, OptimalMapError> {
    if !m.is_irreducible() {
        return Err(OptimalMapError::Reducible);
    }
    let n = m.size();
    let mut a: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = S::from_q(&Q::int(m.entries[i][j] as i64));
                    if i == j {
                        v - lambda.clone()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = S::one() / a[row][col].clone();
        for j in 0..n {
            a[row][j] = a[row][j].clone() * inv.clone();
        }
        for r in 0..n {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = a[r][j].clone() - f.clone() * a[row][j].clone();
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return Err(OptimalMapError::Reducible);
    }
    let f = free[0];
    let mut v = vec![S::zero(); n];
    v[f] = S::one();
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = -a[r][f].clone();
    }
    let first = v[0].clone();
    if first.is_zero() {
        return Err(OptimalMapError::Reducible);
    }
    Ok(v.into_iter().map(|x| x / first.clone()).collect())
}

/// Gates of the train track structure of a self-map: `d ~ d'` when some iterate of the
/// derivative identifies them.
pub fn train_track_gates<S: Scalar>(phi: &GraphMorphism<S>) -> Result<GateStructure, OptimalMapError> {
    if !is_self_map(phi) {
        return Err(OptimalMapError::NotSelfMap);
    }
    let g = phi.source();
    let steps = 4 * g.num_edges() + 2;
    let iterate = |d: Letter| -> Option<Letter> {
        let mut x = d;
        for _ in 0..steps {
            x = phi.germ(x)?;
        }
        Some(x)
    };
    let dirs = (0..g.num_vertices()).map(|v| g.directions(v)).collect();
    Ok(GateStructure::from_germs(dirs, iterate))
}

/// Optimal self-map whose edge images take only legal turns for the train track structure.
/// Legal turns then map to legal turns because the structure is invariant by construction.
pub fn is_train_track_map<S: Scalar>(phi: &GraphMorphism<S>) -> Result<bool, OptimalMapError> {
    let gates = train_track_gates(phi)?;
    if !phi.is_optimal() || gates.min_gates() < 2 {
        return Ok(false);
    }
    let g = phi.source();
    for e in 0..g.num_edges() {
        let w = phi.image(e).letters();
        for pair in w.windows(2) {
            let v = g.end(pair[0]);
            if gates.illegal(v, -pair[0], pair[1]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_graph::MarkedGraph;
    use crate::optimal_maps::difference_of_markings;
    use crate::scalar::QL;

    #[test]
    fn example_dilatation() {
        let m = super::super::tests::example_map();
        let t = transition_matrix(&m).unwrap();
        assert_eq!(t.entries, vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 1]]);
        let p: Vec<i64> = characteristic_polynomial(&t).iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p, vec![1, -1, 0, -1]);
        let d = dilatation(&t);
        assert!(d.lower <= 1.465571231876768 && 1.465571231876768 <= d.upper);
        assert!(d.upper - d.lower < 1e-9);
        let l = QL::lambda();
        let v = eigenvector_exact(&t, &l).unwrap();
        assert_eq!(v, vec![QL::one(), l.clone(), l.clone() * l]);
        let gates = train_track_gates(&m).unwrap();
        assert_eq!(gates.gates[0], vec![vec![-3], vec![-2], vec![-1], vec![1, 2, 3]]);
        assert!(is_train_track_map(&m).unwrap());
    }

    #[test]
    fn identity_dilatation() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        let m = difference_of_markings(&g, &g).unwrap();
        let d = dilatation(&transition_matrix(&m).unwrap());
        assert!(d.lower <= 1.0 && d.upper >= 1.0 && d.upper - d.lower < 1e-12);
    }
}
