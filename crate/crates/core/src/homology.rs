//! Integer homology of finite simplicial complexes.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{boundary, sparse_boundary, Chain, Complex};
use crate::error::{Error, Result};
use crate::snf::{reduce, Reduction};

/// `H_k = Z^rank ⊕ Z/t1 ⊕ Z/t2 ⊕ ...` with `t1 | t2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub k: usize,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
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
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "H_{} = {}", self.k, parts.join(" + "))
    }
}

/// Per-complex memo of boundary-matrix reductions and homology groups.
/// Entries are written at most once and are safe to fill concurrently.
pub(crate) struct HomologyCache {
    boundaries: Vec<OnceLock<Reduction>>,
    groups: Vec<OnceLock<HomologyGroup>>,
}

impl HomologyCache {
    pub fn new(top: usize) -> Self {
        HomologyCache {
            boundaries: (0..top + 2).map(|_| OnceLock::new()).collect(),
            groups: (0..top + 1).map(|_| OnceLock::new()).collect(),
        }
    }
}

/// Reduction of the boundary matrix from k-chains to (k-1)-chains.
fn boundary_reduction(complex: &Complex, k: usize) -> &Reduction {
    complex.homology_cache.boundaries[k].get_or_init(|| reduce(&sparse_boundary(complex, k), None))
}

/// Rank of the boundary map from k-chains (0 for k = 0 or above the top dimension).
pub fn boundary_rank(complex: &Complex, k: usize) -> usize {
    if k == 0 || k > complex.top_dim() {
        return 0;
    }
    boundary_reduction(complex, k).rank()
}

/// `H_k(K; Z)`: rank is `dim ker ∂_k - rank ∂_{k+1}`, torsion the invariant
/// factors of `∂_{k+1}` greater than one.
pub fn homology_group(complex: &Complex, k: usize) -> Result<HomologyGroup> {
    let top = complex.top_dim();
    if k > top {
        return Err(Error::DimensionOutOfRange { k, max: top });
    }
    Ok(complex.homology_cache.groups[k]
        .get_or_init(|| {
            let kernel = complex.count(k) - boundary_rank(complex, k);
            let (image, torsion) = if k < top {
                let red = boundary_reduction(complex, k + 1);
                let torsion = red
                    .invariant_factors()
                    .into_iter()
                    .filter(|f| !f.is_one())
                    .collect();
                (red.rank(), torsion)
            } else {
                (0, Vec::new())
            };
            HomologyGroup { k, rank: kernel - image, torsion }
        })
        .clone())
}

/// All homology groups up to the top dimension.
pub fn homology(complex: &Complex) -> Vec<HomologyGroup> {
    (0..=complex.top_dim())
        .map(|k| homology_group(complex, k).expect("k within range"))
        .collect()
}

pub fn is_cycle(complex: &Complex, z: &Chain) -> Result<bool> {
    Ok(boundary(complex, z)?.is_zero())
}

/// Decides whether the cycle `z` bounds. When it does, the returned witness
/// `x` satisfies `∂x = z` exactly.
pub fn is_null_homologous(complex: &Complex, z: &Chain) -> Result<(bool, Option<Chain>)> {
    if !is_cycle(complex, z)? {
        return Err(Error::Precondition("chain is not a cycle".into()));
    }
    let k = z.dim();
    if z.is_zero() {
        return Ok((true, Some(Chain::zero(k + 1))));
    }
    if k >= complex.top_dim() {
        return Ok((false, None));
    }
    let rows = complex.count(k);
    let mut b = vec![BigInt::zero(); rows];
    for (i, c) in z.terms() {
        b[i] = c.clone();
    }
    let red = reduce(&sparse_boundary(complex, k + 1), Some(&b));
    match red.solution.flatten() {
        Some(x) => {
            let witness = Chain::from_terms(k + 1, x.into_iter().enumerate());
            debug_assert_eq!(&boundary(complex, &witness)?, z);
            Ok((true, Some(witness)))
        }
        None => Ok((false, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_grid_complex;
    use num_rational::Rational64;

    fn abstract_complex(nv: usize, tops: Vec<Vec<usize>>) -> Complex {
        let coords = (0..nv).map(|v| vec![Rational64::from_integer(v as i64)]).collect();
        Complex::from_simplices(coords, 1.0, tops).unwrap()
    }

    fn ranks(c: &Complex) -> Vec<usize> {
        homology(c).iter().map(|h| h.rank).collect()
    }

    #[test]
    fn hollow_triangle() {
        let c = abstract_complex(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(ranks(&c), vec![1, 1]);
    }

    #[test]
    fn tetrahedron_boundary() {
        let c = abstract_complex(
            4,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        );
        assert_eq!(ranks(&c), vec![1, 0, 1]);
        assert!(homology(&c).iter().all(|h| h.torsion.is_empty()));
    }

    #[test]
    fn projective_plane_has_torsion() {
        // 6-vertex minimal triangulation of RP^2.
        let tris = vec![
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 4],
            vec![0, 4, 5],
            vec![0, 5, 1],
            vec![1, 2, 4],
            vec![2, 3, 5],
            vec![3, 4, 1],
            vec![4, 5, 2],
            vec![5, 1, 3],
        ];
        let c = abstract_complex(6, tris);
        let h = homology(&c);
        assert_eq!(h[0].rank, 1);
        assert_eq!(h[1].rank, 0);
        assert_eq!(h[1].torsion, vec![BigInt::from(2)]);
        assert!(h[2].is_trivial());
    }

    #[test]
    fn grid_is_acyclic() {
        let c = build_grid_complex(3, &[2, 1, 2], 1.0).unwrap();
        assert_eq!(ranks(&c), vec![1, 0, 0, 0]);
    }

    #[test]
    fn out_of_range() {
        let c = abstract_complex(2, vec![vec![0, 1]]);
        assert!(matches!(homology_group(&c, 2), Err(Error::DimensionOutOfRange { .. })));
    }

    #[test]
    fn null_homology_in_filled_and_hollow_triangle() {
        let filled = abstract_complex(3, vec![vec![0, 1, 2]]);
        let hollow = abstract_complex(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        for (c, expect) in [(&filled, true), (&hollow, false)] {
            // edges [0,1],[0,2],[1,2]: cycle 01 + 12 - 02
            let e = |a, b| c.find(&[a, b]).unwrap().0;
            let z = Chain::from_terms(1, [(e(0, 1), 1), (e(1, 2), 1), (e(0, 2), -1)]);
            let (null, witness) = is_null_homologous(c, &z).unwrap();
            assert_eq!(null, expect);
            if let Some(w) = witness {
                assert_eq!(boundary(c, &w).unwrap(), z);
                assert_eq!(w.len(), 1);
            }
            let (null2, _) = is_null_homologous(c, &z.scaled(&BigInt::from(2))).unwrap();
            assert_eq!(null2, expect);
        }
    }

    #[test]
    fn single_edge_is_not_a_cycle() {
        let c = abstract_complex(2, vec![vec![0, 1]]);
        let z = Chain::elementary(1, 0, 1);
        assert!(!is_cycle(&c, &z).unwrap());
        assert!(is_cycle(&c, &Chain::zero(1)).unwrap());
        assert!(matches!(is_null_homologous(&c, &z), Err(Error::Precondition(_))));
    }
}
