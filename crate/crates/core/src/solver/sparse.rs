//! Compressed sparse columns and scatter workspaces for the simplex kernel.

/// Column-major sparse matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseMat {
    pub nrows: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseMat {
    pub fn new(nrows: usize) -> Self {
        SparseMat { nrows, col_ptr: vec![0], row_idx: Vec::new(), values: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn push_col(&mut self, entries: impl IntoIterator<Item = (u32, f64)>) {
        for (r, v) in entries {
            debug_assert!((r as usize) < self.nrows);
            if v != 0.0 {
                self.row_idx.push(r);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.row_idx.len());
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Row-major copy for pivot-row products.
    pub fn to_csr(&self) -> CsrMat {
        let ncols = self.ncols();
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.row_idx {
            counts[r as usize + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut row_ptr = counts.clone();
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..ncols {
            for (r, v) in self.col(j) {
                let slot = row_ptr[r as usize];
                col_idx[slot] = j as u32;
                values[slot] = v;
                row_ptr[r as usize] += 1;
            }
        }
        CsrMat { row_ptr: counts, col_idx, values }
    }
}

/// Row-major companion used only for pricing products.
#[derive(Debug, Clone, Default)]
pub struct CsrMat {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl CsrMat {
    pub fn row(&self, i: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }
}

/// Dense vector with an explicit nonzero pattern.
#[derive(Debug, Clone, Default)]
pub struct ScatterVec {
    pub values: Vec<f64>,
    pub pattern: Vec<u32>,
    pub mark: Vec<bool>,
}

impl ScatterVec {
    pub fn new(n: usize) -> Self {
        ScatterVec { values: vec![0.0; n], pattern: Vec::new(), mark: vec![false; n] }
    }

    pub fn resize(&mut self, n: usize) {
        self.values = vec![0.0; n];
        self.mark = vec![false; n];
        self.pattern.clear();
    }

    pub fn clear(&mut self) {
        for &i in &self.pattern {
            self.values[i as usize] = 0.0;
            self.mark[i as usize] = false;
        }
        self.pattern.clear();
    }

    pub fn add(&mut self, i: u32, v: f64) {
        if !self.mark[i as usize] {
            self.mark[i as usize] = true;
            self.pattern.push(i);
        }
        self.values[i as usize] += v;
    }

    pub fn set(&mut self, i: u32, v: f64) {
        if !self.mark[i as usize] {
            self.mark[i as usize] = true;
            self.pattern.push(i);
        }
        self.values[i as usize] = v;
    }

    pub fn get(&self, i: u32) -> f64 {
        self.values[i as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.pattern.iter().map(move |&i| (i, self.values[i as usize]))
    }
}
