//! Exact Gaussian elimination.

use crate::rational::Rat;
use crate::vector::Vector;

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vector], dim: usize) -> (Vec<Vector>, Vec<usize>) {
    let mut m: Vec<Vector> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        m[r] = m[r].scale(&inv);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                m[i] = m[i].sub(&m[r].scale(&f));
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vector], dim: usize) -> usize {
    rref(rows, dim).1.len()
}

/// A basis of `{v : row·v = 0 for every row}`.
pub fn nullspace(rows: &[Vector], dim: usize) -> Vec<Vector> {
    let (m, pivots) = rref(rows, dim);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = Vector::zeros(dim);
            v[f] = Rat::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -&row[f];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_plane() {
        let rows = vec![Vector::from_ints(&[1, 1, 1])];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(rows[0].dot(v).is_zero());
        }
        assert_eq!(rank(&[Vector::from_ints(&[1, 2]), Vector::from_ints(&[2, 4])], 2), 1);
    }
}
