//! Row-streamed Gauss–Jordan elimination modulo a word prime.

use crate::arith::PrimeField;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModNullspace {
    /// Pivot columns of the reduced row echelon form, ascending.
    pub pivots: Vec<usize>,
    pub dim: usize,
    /// Basis vector for the first free column (that entry is 1), canonical residues.
    pub vector: Option<Vec<u64>>,
    /// Free columns, ascending; `basis[i]` is 1 at `free[i]` and 0 at the other free columns.
    pub free: Vec<usize>,
    pub basis: Vec<Vec<u64>>,
}

/// Nullspace of the matrix whose rows (Montgomery form) are yielded by `rows`.
///
/// Each new row is reduced against the stored rows and, if nonzero, stored
/// with its first nonzero column as pivot, so stored rows stay in echelon
/// shape. Stops reading once the rank reaches `ncols`.
pub fn nullspace_mod(f: &PrimeField, ncols: usize, rows: impl Iterator<Item = Vec<u64>>) -> ModNullspace {
    let mut stored: Vec<(usize, Vec<u64>)> = Vec::new();
    for mut row in rows {
        debug_assert_eq!(row.len(), ncols);
        for (pc, r) in &stored {
            let c = row[*pc];
            if c == 0 {
                continue;
            }
            for j in *pc..ncols {
                if r[j] != 0 {
                    row[j] = f.sub(row[j], f.mul(c, r[j]));
                }
            }
        }
        if let Some(pc) = row.iter().position(|&x| x != 0) {
            let inv = f.inv(row[pc]);
            for x in row[pc..].iter_mut() {
                *x = f.mul(*x, inv);
            }
            stored.push((pc, row));
            if stored.len() == ncols {
                break;
            }
        }
    }
    stored.sort_by_key(|(pc, _)| *pc);
    // back substitution to reduced form
    for i in (0..stored.len()).rev() {
        let (pc, ri) = stored[i].clone();
        for (_, rj) in stored[..i].iter_mut() {
            let c = rj[pc];
            if c == 0 {
                continue;
            }
            for j in pc..ncols {
                if ri[j] != 0 {
                    rj[j] = f.sub(rj[j], f.mul(c, ri[j]));
                }
            }
        }
    }
    let pivots: Vec<usize> = stored.iter().map(|(pc, _)| *pc).collect();
    let dim = ncols - pivots.len();
    let free: Vec<usize> = (0..ncols).filter(|c| pivots.binary_search(c).is_err()).collect();
    let basis: Vec<Vec<u64>> = free
        .iter()
        .map(|&fc| {
            let mut v = vec![0u64; ncols];
            v[fc] = 1;
            for (pc, r) in &stored {
                v[*pc] = f.leave(f.neg(r[fc]));
            }
            v
        })
        .collect();
    let vector = basis.first().cloned();
    ModNullspace { pivots, dim, vector, free, basis }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_kernel() {
        let f = PrimeField::new(1_000_003);
        // x + 2y + 3z = 0, 2x + 4y + 6z = 0 (dependent), y + z = 0
        let rows = [[1i64, 2, 3], [2, 4, 6], [0, 1, 1]];
        let ns = nullspace_mod(&f, 3, rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()));
        assert_eq!(ns.dim, 1);
        assert_eq!(ns.pivots, vec![0, 1]);
        // z = 1, y = −1, x = −1
        let p = 1_000_003u64;
        assert_eq!(ns.vector.unwrap(), vec![p - 1, p - 1, 1]);
    }

    #[test]
    fn full_rank_has_no_kernel() {
        let f = PrimeField::new(97);
        let rows = [[1i64, 0], [1, 1]];
        let ns = nullspace_mod(&f, 2, rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()));
        assert_eq!(ns.dim, 0);
        assert!(ns.vector.is_none());
    }
}
