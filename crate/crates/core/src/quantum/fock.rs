//! Truncated two-mode Fock basis and sparse operators on it.
//!
//! Basis kets `|n1, n2>` with `0 <= nj < nmax` are stored row-major,
//! `index = n1 * nmax + n2`. Quadratures are `q = (a + a^dag)/sqrt(2)` and
//! `p = (a - a^dag)/(i sqrt(2))`.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::TrapConfig;
use crate::scalar::Real;

/// Index bookkeeping for the truncated product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    nmax: usize,
}

impl FockBasis {
    pub fn new(nmax: usize) -> Self {
        Self { nmax }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn dim(&self) -> usize {
        self.nmax * self.nmax
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 < self.nmax && n2 < self.nmax);
        n1 * self.nmax + n2
    }

    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / self.nmax, index % self.nmax)
    }

    /// Whether the ket sits on the outermost shell of either mode.
    pub fn is_top_shell(&self, index: usize) -> bool {
        let (n1, n2) = self.levels(index);
        n1 + 1 == self.nmax || n2 + 1 == self.nmax
    }
}

/// Square sparse matrix in compressed-row form with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> CsrMatrix<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex<T>)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                let top = vals.len() - 1;
                vals[top] += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let zero = Complex::new(T::zero(), T::zero());
        let (mut cols_out, mut vals_out) = (Vec::with_capacity(cols.len()), Vec::with_capacity(vals.len()));
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != zero {
                row_ptr[r + 1] += 1;
                cols_out.push(c);
                vals_out.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: cols_out,
            vals: vals_out,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.row(r)
            .find(|(col, _)| *col == c)
            .map(|(_, v)| v)
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// `y = M x`.
    pub fn matvec_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut y = DVector::from_element(self.dim, Complex::new(T::zero(), T::zero()));
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// `M X` for a dense block of columns.
    pub fn apply_columns(&self, x: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let mut y = DMatrix::from_element(self.dim, x.ncols(), Complex::new(T::zero(), T::zero()));
        for c in 0..x.ncols() {
            let col: Vec<Complex<T>> = x.column(c).iter().copied().collect();
            let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
            self.matvec_into(&col, &mut out);
            y.column_mut(c).copy_from_slice(&out);
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex::new(T::zero(), T::zero()));
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Largest `|M_rc - conj(M_cr)|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).modulus());
            }
        }
        worst
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum of a Hermitian matrix.
    pub fn gershgorin_bounds(&self) -> (T, T) {
        let mut lo = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
        let mut hi = -lo;
        for r in 0..self.dim {
            let mut centre = T::zero();
            let mut radius = T::zero();
            for (c, v) in self.row(r) {
                if c == r {
                    centre = v.re;
                } else {
                    radius += v.modulus();
                }
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        if self.dim == 0 {
            (T::zero(), T::zero())
        } else {
            (lo, hi)
        }
    }
}

/// Single-mode `q` and `p` as dense `m x m` matrices.
pub(crate) fn single_mode_quadratures<T: Real>(m: usize) -> (DMatrix<Complex<T>>, DMatrix<Complex<T>>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut q = DMatrix::from_element(m, m, zero);
    let mut p = DMatrix::from_element(m, m, zero);
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    for n in 1..m {
        let e = T::from_int(n).sqrt() * inv_sqrt2;
        // a |n> = sqrt(n) |n-1>, so a_{n-1,n} = sqrt(n).
        q[(n - 1, n)] = Complex::new(e, T::zero());
        q[(n, n - 1)] = Complex::new(e, T::zero());
        p[(n - 1, n)] = Complex::new(T::zero(), -e);
        p[(n, n - 1)] = Complex::new(T::zero(), e);
    }
    (q, p)
}

/// Kronecker product `A (x) B` of two dense single-mode operators.
pub(crate) fn kron_triplets<T: Real>(
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
    scale: Complex<T>,
    out: &mut Vec<(usize, usize, Complex<T>)>,
) {
    let n = b.nrows();
    let zero = Complex::new(T::zero(), T::zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let av = a[(i, j)];
            if av == zero {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let bv = b[(k, l)];
                    if bv != zero {
                        out.push((i * n + k, j * n + l, scale * av * bv));
                    }
                }
            }
        }
    }
}

/// Truncated quadrature operators `(q1, q2, p1, p2)` on the two-mode basis.
pub fn quadrature_operators<T: Real>(nmax: usize) -> [CsrMatrix<T>; 4] {
    let (q, p) = single_mode_quadratures::<T>(nmax);
    let id = DMatrix::<Complex<T>>::identity(nmax, nmax);
    let one = Complex::new(T::one(), T::zero());
    let build = |a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>| {
        let mut t = Vec::new();
        kron_triplets(a, b, one, &mut t);
        CsrMatrix::from_triplets(nmax * nmax, t)
    };
    [build(&q, &id), build(&id, &q), build(&p, &id), build(&id, &p)]
}

/// The operator `v^T G v` (with `v = (q1, q2, p1, p2)`) on the truncated basis.
///
/// Products of two quadratures of the same mode are formed in a space one
/// level larger and then cut back, so every retained matrix element is exact.
pub fn quadratic_operator<T: Real>(g: &nalgebra::Matrix4<T>, nmax: usize) -> CsrMatrix<T> {
    let (q, p) = single_mode_quadratures::<T>(nmax + 1);
    let single = [&q, &p];
    let cut = |m: DMatrix<Complex<T>>| m.view((0, 0), (nmax, nmax)).into_owned();
    let small = |m: &DMatrix<Complex<T>>| m.view((0, 0), (nmax, nmax)).into_owned();
    let id = DMatrix::<Complex<T>>::identity(nmax, nmax);
    // Component j of v lives on mode `j % 2` and is a position for j < 2.
    let mode = |j: usize| j % 2;
    let kind = |j: usize| usize::from(j >= 2);
    let mut triplets = Vec::new();
    for j in 0..4 {
        for k in 0..4 {
            let gjk = g[(j, k)];
            if gjk == T::zero() {
                continue;
            }
            let scale = Complex::new(gjk, T::zero());
            let (oj, ok) = (single[kind(j)], single[kind(k)]);
            if mode(j) == mode(k) {
                let prod = cut(oj * ok);
                if mode(j) == 0 {
                    kron_triplets(&prod, &id, scale, &mut triplets);
                } else {
                    kron_triplets(&id, &prod, scale, &mut triplets);
                }
            } else if mode(j) == 0 {
                kron_triplets(&small(oj), &small(ok), scale, &mut triplets);
            } else {
                kron_triplets(&small(ok), &small(oj), scale, &mut triplets);
            }
        }
    }
    CsrMatrix::from_triplets(nmax * nmax, triplets)
}

/// The rotating-frame Hamiltonian on the truncated two-mode Fock basis.
#[derive(Debug, Clone)]
pub struct FockHamiltonian<T: Real> {
    config: TrapConfig<T>,
    basis: FockBasis,
    matrix: CsrMatrix<T>,
}

/// `H = w1 (n1 + 1/2) + w2 (n2 + 1/2) - theta_dot (q1 p2 / eta - eta q2 p1)`.
///
/// In ladder operators the coupling is
/// `(i theta_dot / 2) [d a1 a2 - s a1 a2^dag + s a1^dag a2 - d a1^dag a2^dag]`
/// with `s = 1/eta + eta` and `d = 1/eta - eta`.
pub fn build_fock_hamiltonian<T: Real>(config: &TrapConfig<T>, nmax: usize) -> Result<FockHamiltonian<T>> {
    if nmax < 2 {
        return Err(Error::InvalidConfig(format!("nmax must be at least 2 (got {nmax})")));
    }
    let basis = FockBasis::new(nmax);
    let (w1, w2, td, eta) = (config.omega1(), config.omega2(), config.theta_dot(), config.eta());
    let half = T::lit(0.5);
    let s = T::one() / eta + eta;
    let d = T::one() / eta - eta;
    let c = |x: T| Complex::new(T::zero(), half * td * x);
    let sq = |n: usize| T::from_int(n).sqrt();
    let mut triplets = Vec::with_capacity(5 * basis.dim());
    for n1 in 0..nmax {
        for n2 in 0..nmax {
            let col = basis.index(n1, n2);
            let e = w1 * (T::from_int(n1) + half) + w2 * (T::from_int(n2) + half);
            triplets.push((col, col, Complex::new(e, T::zero())));
            if td == T::zero() {
                continue;
            }
            // a1 a2
            if n1 > 0 && n2 > 0 {
                triplets.push((basis.index(n1 - 1, n2 - 1), col, c(d * sq(n1) * sq(n2))));
            }
            // - a1 a2^dag
            if n1 > 0 && n2 + 1 < nmax {
                triplets.push((basis.index(n1 - 1, n2 + 1), col, -c(s * sq(n1) * sq(n2 + 1))));
            }
            // a1^dag a2
            if n1 + 1 < nmax && n2 > 0 {
                triplets.push((basis.index(n1 + 1, n2 - 1), col, c(s * sq(n1 + 1) * sq(n2))));
            }
            // - a1^dag a2^dag
            if n1 + 1 < nmax && n2 + 1 < nmax {
                triplets.push((basis.index(n1 + 1, n2 + 1), col, -c(d * sq(n1 + 1) * sq(n2 + 1))));
            }
        }
    }
    Ok(FockHamiltonian {
        config: *config,
        basis,
        matrix: CsrMatrix::from_triplets(basis.dim(), triplets),
    })
}

/// Gauge phase `i^n2` that turns the Hamiltonian into a real symmetric matrix.
pub(crate) fn gauge_phase<T: Real>(basis: &FockBasis, index: usize) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match basis.levels(index).1 % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, -o),
    }
}

impl<T: Real> FockHamiltonian<T> {
    pub fn config(&self) -> &TrapConfig<T> {
        &self.config
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn nmax(&self) -> usize {
        self.basis.nmax()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        self.matrix.to_dense()
    }

    pub fn hermiticity_defect(&self) -> T {
        self.matrix.hermiticity_defect()
    }

    pub fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        self.matrix.apply(x)
    }

    /// Basis indices of the block with `(n1 + n2) % 2 == parity`; the
    /// Hamiltonian never couples the two parities.
    pub fn parity_indices(&self, parity: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (n1, n2) = self.basis.levels(i);
                (n1 + n2) % 2 == parity
            })
            .collect()
    }

    /// Real symmetric matrix of one parity block in the basis `i^n2 |n1, n2>`.
    pub fn real_block(&self, indices: &[usize]) -> DMatrix<T> {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (k, &r) in indices.iter().enumerate() {
            let gr = gauge_phase::<T>(&self.basis, r).conj();
            for (c, v) in self.matrix.row(r) {
                let l = pos[c];
                assert!(l != usize::MAX, "Hamiltonian couples different parity blocks");
                let w = gr * v * gauge_phase::<T>(&self.basis, c);
                m[(k, l)] = w.re;
            }
        }
        m
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim());
        for parity in 0..2 {
            let idx = self.parity_indices(parity);
            if idx.is_empty() {
                continue;
            }
            out.extend(self.real_block(&idx).symmetric_eigenvalues().iter().copied());
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out
    }
}
