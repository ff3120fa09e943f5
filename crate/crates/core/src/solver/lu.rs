//! Sparse LU factorization of the simplex basis (Gilbert–Peierls, partial
//! pivoting) with product-form eta updates between refactorizations.

use super::sparse::ScatterVec;

const PIVOT_ABS_TOL: f64 = 1e-11;

/// One basis change: at basis position `pos` the FTRAN'd entering column was
/// `alpha`; `B_new = B_old * E` with `E` identity except column `pos`.
#[derive(Debug, Clone)]
pub struct Eta {
    pub pos: u32,
    pub diag: f64,
    /// Off-diagonal entries of the replaced column, in basis-position space.
    pub col: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct LuFactors {
    m: usize,
    /// L columns per elimination step: off-diagonal multipliers on original rows.
    l_cols: Vec<Vec<(u32, f64)>>,
    /// U columns per elimination step: entries at earlier pivot positions.
    u_cols: Vec<Vec<(u32, f64)>>,
    u_diag: Vec<f64>,
    /// Original row chosen as pivot for each elimination step.
    pivot_row: Vec<u32>,
    /// Elimination step of each original row.
    row_pos: Vec<u32>,
    pub etas: Vec<Eta>,
}

/// Raised when basis columns are linearly dependent; `failed_positions` lists
/// the basis slots that found no pivot and `free_rows` the rows never chosen
/// as pivots. Replacing each failed slot with the logical of a free row
/// repairs the basis.
#[derive(Debug, Clone)]
pub struct Singular {
    pub failed_positions: Vec<usize>,
    pub free_rows: Vec<usize>,
}

impl LuFactors {
    pub fn factorize(
        m: usize,
        cols: &[Vec<(u32, f64)>],
        work: &mut ScatterVec,
    ) -> Result<LuFactors, Singular> {
        assert_eq!(cols.len(), m);
        if work.values.len() != m {
            work.resize(m);
        }
        let mut lu = LuFactors {
            m,
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            pivot_row: Vec::with_capacity(m),
            row_pos: vec![u32::MAX; m],
            etas: Vec::new(),
        };
        let mut failed = Vec::new();

        for col in cols.iter() {
            work.clear();
            for &(r, v) in col {
                work.add(r, v);
            }
            // Eliminate with existing pivots, following positions in order.
            // The pattern grows during elimination; iterate by index.
            let mut k = 0;
            let mut touched: Vec<(u32, u32)> = Vec::new(); // (position, row)
            while k < work.pattern.len() {
                let r = work.pattern[k];
                let pos = lu.row_pos[r as usize];
                if pos != u32::MAX {
                    touched.push((pos, r));
                }
                k += 1;
            }
            touched.sort_unstable();
            let mut idx = 0;
            while idx < touched.len() {
                let (_, r) = touched[idx];
                idx += 1;
                let f = work.get(r);
                if f == 0.0 {
                    continue;
                }
                let pos = lu.row_pos[r as usize] as usize;
                for ei in 0..lu.l_cols[pos].len() {
                    let (rr, lv) = lu.l_cols[pos][ei];
                    let before = work.mark[rr as usize];
                    work.add(rr, -lv * f);
                    if !before {
                        let p2 = lu.row_pos[rr as usize];
                        if p2 != u32::MAX {
                            // keep elimination order: insert in sorted position
                            let item = (p2, rr);
                            let at = touched[idx..]
                                .binary_search(&item)
                                .unwrap_or_else(|e| e);
                            touched.insert(idx + at, item);
                        }
                    }
                }
            }

            // Split into U entries (pivotal rows) and pivot candidates.
            let mut u_col = Vec::new();
            let mut best: Option<(u32, f64)> = None;
            for (r, v) in work.iter() {
                let pos = lu.row_pos[r as usize];
                if pos != u32::MAX {
                    if v != 0.0 {
                        u_col.push((pos, v));
                    }
                } else if v.abs() > PIVOT_ABS_TOL {
                    match best {
                        Some((br, bv)) if v.abs() < bv.abs() || (v.abs() == bv.abs() && r > br) => {}
                        _ => best = Some((r, v)),
                    }
                }
            }
            u_col.sort_unstable_by_key(|&(p, _)| p);

            let Some((prow, pval)) = best else {
                failed.push(lu.pivot_row.len() + failed.len());
                continue;
            };
            let mut l_col = Vec::new();
            for (r, v) in work.iter() {
                if r != prow && lu.row_pos[r as usize] == u32::MAX && v != 0.0 {
                    l_col.push((r, v / pval));
                }
            }
            l_col.sort_unstable_by_key(|&(r, _)| r);

            lu.row_pos[prow as usize] = lu.pivot_row.len() as u32;
            lu.pivot_row.push(prow);
            lu.l_cols.push(l_col);
            lu.u_cols.push(u_col);
            lu.u_diag.push(pval);
        }

        if !failed.is_empty() {
            let free_rows = (0..m).filter(|&r| lu.row_pos[r] == u32::MAX).collect();
            return Err(Singular { failed_positions: failed, free_rows });
        }
        Ok(lu)
    }

    /// Solve `B z = b`; input on original rows, output in basis-position space.
    pub fn ftran(&self, x: &mut ScatterVec) {
        // L forward pass in elimination order.
        for j in 0..self.m {
            let r = self.pivot_row[j];
            if !x.mark[r as usize] {
                continue;
            }
            let f = x.get(r);
            if f == 0.0 {
                continue;
            }
            for &(rr, lv) in &self.l_cols[j] {
                x.add(rr, -lv * f);
            }
        }
        // Map original rows to positions, then back-substitute through U.
        let mut pos_vals = vec![0.0; self.m];
        for (r, v) in x.iter() {
            pos_vals[self.row_pos[r as usize] as usize] = v;
        }
        for j in (0..self.m).rev() {
            let v = pos_vals[j];
            if v == 0.0 {
                continue;
            }
            let z = v / self.u_diag[j];
            pos_vals[j] = z;
            for &(p, uv) in &self.u_cols[j] {
                pos_vals[p as usize] -= uv * z;
            }
        }
        x.clear();
        for (j, &v) in pos_vals.iter().enumerate() {
            if v != 0.0 {
                x.set(j as u32, v);
            }
        }
        // Product-form corrections, in append order.
        for eta in &self.etas {
            let zr = x.get(eta.pos);
            if zr == 0.0 {
                continue;
            }
            let zr = zr / eta.diag;
            x.set(eta.pos, zr);
            for &(i, v) in &eta.col {
                x.add(i, -v * zr);
            }
        }
    }

    /// Solve `Bᵀ y = c`; input in basis-position space, output on original rows.
    pub fn btran(&self, x: &mut ScatterVec) {
        // Eta corrections, in reverse append order.
        for eta in self.etas.iter().rev() {
            let mut acc = x.get(eta.pos);
            for &(i, v) in &eta.col {
                acc -= v * x.get(i);
            }
            x.set(eta.pos, acc / eta.diag);
        }
        // Uᵀ forward pass over positions.
        let mut pos_vals = vec![0.0; self.m];
        for (p, v) in x.iter() {
            pos_vals[p as usize] = v;
        }
        let mut w = vec![0.0; self.m];
        for j in 0..self.m {
            let mut acc = pos_vals[j];
            for &(p, uv) in &self.u_cols[j] {
                acc -= uv * w[p as usize];
            }
            w[j] = acc / self.u_diag[j];
        }
        // Lᵀ back pass onto original rows.
        x.clear();
        for j in (0..self.m).rev() {
            let mut acc = w[j];
            for &(rr, lv) in &self.l_cols[j] {
                acc -= lv * x.get(rr);
            }
            if acc != 0.0 {
                x.set(self.pivot_row[j] as u32, acc);
            }
        }
    }

    pub fn push_eta(&mut self, pos: u32, alpha: &ScatterVec) {
        let diag = alpha.get(pos);
        let col: Vec<(u32, f64)> = alpha
            .iter()
            .filter(|&(i, v)| i != pos && v != 0.0)
            .collect();
        self.etas.push(Eta { pos, diag, col });
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(cols: &[Vec<f64>]) -> Vec<Vec<(u32, f64)>> {
        cols.iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i as u32, v))
                    .collect()
            })
            .collect()
    }

    fn solve_check(cols: &[Vec<f64>], b: &[f64]) {
        let m = b.len();
        let mut work = ScatterVec::new(m);
        let lu = LuFactors::factorize(m, &dense_cols(cols), &mut work).unwrap();
        let mut x = ScatterVec::new(m);
        for (i, &v) in b.iter().enumerate() {
            if v != 0.0 {
                x.set(i as u32, v);
            }
        }
        lu.ftran(&mut x);
        // residual: sum_j B_j * z_j == b
        let mut r = vec![0.0; m];
        for (j, v) in x.iter() {
            for (i, bij) in cols[j as usize].iter().enumerate() {
                r[i] += bij * v;
            }
        }
        for i in 0..m {
            assert!((r[i] - b[i]).abs() < 1e-9, "ftran residual at {}", i);
        }

        // btran: y such that B' y = c
        let c: Vec<f64> = (0..m).map(|i| (i as f64) - 1.5).collect();
        let mut y = ScatterVec::new(m);
        for (i, &v) in c.iter().enumerate() {
            if v != 0.0 {
                y.set(i as u32, v);
            }
        }
        lu.btran(&mut y);
        for (j, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().enumerate().map(|(i, &v)| v * y.get(i as u32)).sum();
            assert!((dot - c[j]).abs() < 1e-9, "btran residual at {}", j);
        }
    }

    #[test]
    fn factorize_and_solve_small() {
        solve_check(
            &[vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 1.0], vec![1.0, 0.0, 4.0]],
            &[5.0, -1.0, 2.0],
        );
    }

    #[test]
    fn requires_pivoting() {
        // zero on the natural diagonal
        solve_check(
            &[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
            &[1.0, 2.0, 3.0],
        );
    }

    #[test]
    fn singular_reports_repair_data() {
        let cols = dense_cols(&[vec![1.0, 0.0], vec![2.0, 0.0]]);
        let mut work = ScatterVec::new(2);
        let err = LuFactors::factorize(2, &cols, &mut work).unwrap_err();
        assert_eq!(err.failed_positions, vec![1]);
        assert_eq!(err.free_rows, vec![1]);
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let base = [vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 1.0], vec![1.0, 0.0, 4.0]];
        let mut work = ScatterVec::new(3);
        let mut lu = LuFactors::factorize(3, &dense_cols(&base), &mut work).unwrap();

        // Replace basis column 1 with a_q = [1, 1, 1].
        let mut alpha = ScatterVec::new(3);
        alpha.set(0, 1.0);
        alpha.set(1, 1.0);
        alpha.set(2, 1.0);
        lu.ftran(&mut alpha);
        lu.push_eta(1, &alpha);

        let newcols = [base[0].clone(), vec![1.0, 1.0, 1.0], base[2].clone()];
        let b = [4.0, 5.0, 6.0];
        let mut x = ScatterVec::new(3);
        for (i, &v) in b.iter().enumerate() {
            x.set(i as u32, v);
        }
        lu.ftran(&mut x);
        let mut r = vec![0.0; 3];
        for (j, v) in x.iter() {
            for (i, bij) in newcols[j as usize].iter().enumerate() {
                r[i] += bij * v;
            }
        }
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-9);
        }

        let c = [1.0, -2.0, 0.5];
        let mut y = ScatterVec::new(3);
        for (i, &v) in c.iter().enumerate() {
            y.set(i as u32, v);
        }
        lu.btran(&mut y);
        for (j, col) in newcols.iter().enumerate() {
            let dot: f64 = col.iter().enumerate().map(|(i, &v)| v * y.get(i as u32)).sum();
            assert!((dot - c[j]).abs() < 1e-9, "col {}", j);
        }
    }
}
