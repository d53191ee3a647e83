//! Banded complex matrices and direct solvers.
//!
//! Hamiltonians here couple each node to at most two neighbours on either
//! side. On periodic grids the band wraps around; the wrapped corner entries
//! are handled by a low-rank Woodbury correction on top of the plain band LU.
//!
//! The systems solved are `I + i·c·H` (Crank-Nicolson) and `I + c·(H − s)`
//! with `H − s ⪰ 0` (imaginary time). Both have a positive-definite Hermitian
//! part, so LU without pivoting exists and is stable.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square matrix with half-bandwidth `p`. Entry `(i, k)` for `k ∈ [−p, p]`
/// sits in column `i + k`, or `(i + k) mod n` when `periodic`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    p: usize,
    periodic: bool,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, p: usize, periodic: bool) -> Self {
        assert!(n > 2 * p + 1, "band matrix too small for bandwidth {p}");
        Self { n, p, periodic, data: vec![ZERO; n * (2 * p + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.p
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    #[inline]
    fn slot(&self, i: usize, k: isize) -> usize {
        i * (2 * self.p + 1) + (k + self.p as isize) as usize
    }

    /// Entry in row `i` at offset `k`.
    #[inline]
    pub fn get(&self, i: usize, k: isize) -> Complex64 {
        self.data[self.slot(i, k)]
    }

    #[inline]
    pub fn add(&mut self, i: usize, k: isize, v: Complex64) {
        let s = self.slot(i, k);
        self.data[s] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: isize, v: Complex64) {
        let s = self.slot(i, k);
        self.data[s] = v;
    }

    #[inline]
    fn column(&self, i: usize, k: isize) -> Option<usize> {
        let c = i as isize + k;
        if (0..self.n as isize).contains(&c) {
            Some(c as usize)
        } else if self.periodic {
            Some(c.rem_euclid(self.n as isize) as usize)
        } else {
            None
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let p = self.p as isize;
        (0..self.n)
            .map(|i| {
                let mut acc = ZERO;
                for k in -p..=p {
                    if let Some(c) = self.column(i, k) {
                        acc += self.get(i, k) * x[c];
                    }
                }
                acc
            })
            .collect()
    }

    /// `alpha·I + beta·self`.
    pub fn shifted(&self, alpha: Complex64, beta: Complex64) -> BandMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= beta;
        }
        for i in 0..self.n {
            out.add(i, 0, alpha);
        }
        out
    }

    /// Expand to a dense row-major matrix.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut m = vec![vec![ZERO; self.n]; self.n];
        let p = self.p as isize;
        for (i, row) in m.iter_mut().enumerate() {
            for k in -p..=p {
                if let Some(c) = self.column(i, k) {
                    row[c] += self.get(i, k);
                }
            }
        }
        m
    }

    /// Factor for repeated solves.
    pub fn factor(&self) -> Result<Factorization> {
        if !self.periodic {
            return Ok(Factorization::Band(BandLu::new(self)?));
        }
        Ok(Factorization::Cyclic(CyclicLu::new(self)?))
    }
}

/// Doolittle LU of a non-wrapping band, stored in band layout.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    p: usize,
    lu: Vec<Complex64>,
}

impl BandLu {
    fn new(m: &BandMatrix) -> Result<Self> {
        let (n, p) = (m.n, m.p);
        let w = 2 * p + 1;
        let mut lu = m.data.clone();
        // Drop wrapped entries: they belong to the corner correction.
        for i in 0..n {
            for k in -(p as isize)..=(p as isize) {
                let c = i as isize + k;
                if c < 0 || c >= n as isize {
                    lu[i * w + (k + p as isize) as usize] = ZERO;
                }
            }
        }
        let idx = |i: usize, j: usize| i * w + (j + p - i);
        let scale = lu.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for k in 0..n {
            let pivot = lu[idx(k, k)];
            if pivot.norm() <= 1e-300 * scale || !pivot.re.is_finite() {
                return Err(Error::Singular(k));
            }
            let end = (k + p + 1).min(n);
            for i in k + 1..end {
                let l = lu[idx(i, k)] / pivot;
                lu[idx(i, k)] = l;
                for j in k + 1..end {
                    let ukj = lu[idx(k, j)];
                    lu[idx(i, j)] -= l * ukj;
                }
            }
        }
        Ok(Self { n, p, lu })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let (n, p) = (self.n, self.p);
        let w = 2 * p + 1;
        let idx = |i: usize, j: usize| i * w + (j + p - i);
        for i in 0..n {
            let mut acc = b[i];
            for j in i.saturating_sub(p)..i {
                acc -= self.lu[idx(i, j)] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..(i + p + 1).min(n) {
                acc -= self.lu[idx(i, j)] * b[j];
            }
            b[i] = acc / self.lu[idx(i, i)];
        }
    }
}

/// Band LU plus a Woodbury correction for the wrapped corners.
#[derive(Debug, Clone)]
pub struct CyclicLu {
    band: BandLu,
    /// Rows carrying wrapped entries, with their (column, value) lists.
    rows: Vec<(usize, Vec<(usize, Complex64)>)>,
    /// B⁻¹ e_r for each corner row r.
    z: Vec<Vec<Complex64>>,
    /// LU (with row pivots) of the small capacitance matrix I + Vᵀ Z.
    cap: SmallLu,
}

impl CyclicLu {
    fn new(m: &BandMatrix) -> Result<Self> {
        let band = BandLu::new(m)?;
        let (n, p) = (m.n as isize, m.p as isize);
        let mut rows = Vec::new();
        for i in 0..m.n {
            let mut entries = Vec::new();
            for k in -p..=p {
                let c = i as isize + k;
                if c < 0 || c >= n {
                    let v = m.get(i, k);
                    if v != ZERO {
                        entries.push((c.rem_euclid(n) as usize, v));
                    }
                }
            }
            if !entries.is_empty() {
                rows.push((i, entries));
            }
        }
        let z: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|(r, _)| {
                let mut e = vec![ZERO; m.n];
                e[*r] = Complex64::new(1.0, 0.0);
                band.solve_in_place(&mut e);
                e
            })
            .collect();
        let k = rows.len();
        let mut s = vec![vec![ZERO; k]; k];
        for (a, (_, entries)) in rows.iter().enumerate() {
            for (c, zc) in z.iter().enumerate() {
                let mut acc = if a == c { Complex64::new(1.0, 0.0) } else { ZERO };
                for (col, v) in entries {
                    acc += v * zc[*col];
                }
                s[a][c] = acc;
            }
        }
        let cap = SmallLu::new(s)?;
        Ok(Self { band, rows, z, cap })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        self.band.solve_in_place(b);
        if self.rows.is_empty() {
            return;
        }
        let mut s: Vec<Complex64> = self
            .rows
            .iter()
            .map(|(_, entries)| entries.iter().map(|(c, v)| v * b[*c]).sum())
            .collect();
        self.cap.solve_in_place(&mut s);
        for (zc, wc) in self.z.iter().zip(&s) {
            for (bi, zi) in b.iter_mut().zip(zc) {
                *bi -= zi * wc;
            }
        }
    }
}

/// Dense LU with partial pivoting for the small capacitance system.
#[derive(Debug, Clone)]
struct SmallLu {
    a: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

impl SmallLu {
    fn new(mut a: Vec<Vec<Complex64>>) -> Result<Self> {
        let k = a.len();
        let mut perm: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
                .unwrap();
            if a[piv][col].norm() == 0.0 {
                return Err(Error::Singular(col));
            }
            a.swap(col, piv);
            perm.swap(col, piv);
            for r in col + 1..k {
                let l = a[r][col] / a[col][col];
                a[r][col] = l;
                for c in col + 1..k {
                    let v = a[col][c];
                    a[r][c] -= l * v;
                }
            }
        }
        Ok(Self { a, perm })
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let k = b.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..k {
            for j in 0..i {
                let v = self.a[i][j] * x[j];
                x[i] -= v;
            }
        }
        for i in (0..k).rev() {
            for j in i + 1..k {
                let v = self.a[i][j] * x[j];
                x[i] -= v;
            }
            x[i] /= self.a[i][i];
        }
        b.copy_from_slice(&x);
    }
}

/// A factored band matrix.
#[derive(Debug, Clone)]
pub enum Factorization {
    Band(BandLu),
    Cyclic(CyclicLu),
}

impl Factorization {
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        match self {
            Factorization::Band(lu) => lu.solve_in_place(b),
            Factorization::Cyclic(lu) => lu.solve_in_place(b),
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
