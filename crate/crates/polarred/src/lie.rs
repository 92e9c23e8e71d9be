//! Compact matrix Lie algebras and groups.
//!
//! An algebra is a finite basis of anti-hermitian traceless matrices
//! together with the invariant pairing B(X, Y) = -2 tr(XY); su(n) with
//! this normalization has orthonormal generators T_a = -(i/2) sigma_a for
//! n = 2. Product algebras (two-sided actions) are realized block
//! diagonally, so brackets, exponentials and the pairing are the plain
//! matrix operations throughout. Elements are passed around as coordinate
//! vectors in the model basis; group elements as unitary matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::Result;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Frobenius norm of the anti-hermitian defect of `m`.
pub fn antihermitian_residual(m: &CMat) -> f64 {
    (m + m.adjoint()).norm()
}

/// Frobenius norm of the unitarity defect of `m`.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - CMat::identity(n, n)).norm()
}

/// Invariant pairing B(X, Y) = -2 tr(XY) on anti-hermitian matrices.
///
/// Real for anti-hermitian arguments; positive definite on su(n).
pub fn pairing_mat(x: &CMat, y: &CMat) -> f64 {
    let mut tr = C0;
    for i in 0..x.nrows() {
        for k in 0..x.ncols() {
            tr += x[(i, k)] * y[(k, i)];
        }
    }
    -2.0 * tr.re
}

/// exp(t M) for anti-hermitian M, through the unitary diagonalization of
/// the hermitian matrix -iM. No series truncation; the result is unitary
/// by construction.
pub fn exp_antihermitian(m: &CMat, t: f64) -> Result<CMat> {
    let res = antihermitian_residual(m);
    if res > 1e-10 * (1.0 + m.norm()) {
        return Err(Error::NotAntiHermitian { residual: res });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let h = m.map(|z| minus_i * z);
    // Symmetrize to wash out roundoff before the eigensolve.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let se = nalgebra::linalg::SymmetricEigen::new(h);
    let q = se.eigenvectors;
    let phases = se.eigenvalues.map(|lam| Complex64::from_polar(1.0, t * lam));
    Ok(&q * CMat::from_diagonal(&phases) * q.adjoint())
}

/// Principal logarithm of a unitary matrix: anti-hermitian L with
/// exp(L) = u and eigenphases in (-pi, pi].
pub fn log_unitary(u: &CMat) -> Result<CMat> {
    let res = unitarity_residual(u);
    if res > 1e-8 {
        return Err(Error::NotUnitary { residual: res });
    }
    let (q, t) = nalgebra::linalg::Schur::new(u.clone()).unpack();
    let n = u.nrows();
    let mut d = CMat::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = Complex64::new(0.0, t[(j, j)].arg());
    }
    let l = &q * d * q.adjoint();
    // Anti-hermitian up to the Schur roundoff.
    Ok((&l - l.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Element of a unitary matrix group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub m: CMat,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n) }
    }

    /// Wraps `m`, rejecting non-unitary input.
    pub fn new(m: CMat) -> Result<Self> {
        let res = unitarity_residual(&m);
        if res > 1e-8 {
            return Err(Error::NotUnitary { residual: res });
        }
        Ok(Self { m })
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

/// A compact Lie algebra presented by an anti-hermitian matrix basis.
#[derive(Debug, Clone)]
pub struct LieAlgebraModel {
    pub name: String,
    pub dim: usize,
    /// Matrix dimension of the realization.
    pub mat_dim: usize,
    pub basis: Vec<CMat>,
    /// Gram matrix of the basis under B.
    pub bform: RMat,
    bform_inv: RMat,
    /// ad matrices: `ad[i] * y` are the coordinates of [X_i, Y].
    ad: Vec<RMat>,
}

impl LieAlgebraModel {
    /// Builds a model from a basis, computing the pairing Gram matrix and
    /// structure constants. The basis must be anti-hermitian, traceless,
    /// linearly independent and closed under the commutator.
    pub fn new(name: &str, basis: Vec<CMat>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Dimension("empty basis".into()));
        }
        let mat_dim = basis[0].nrows();
        for (i, x) in basis.iter().enumerate() {
            if x.nrows() != mat_dim || x.ncols() != mat_dim {
                return Err(Error::Dimension(format!("basis element {i} has wrong shape")));
            }
            let res = antihermitian_residual(x);
            if res > 1e-12 * (1.0 + x.norm()) {
                return Err(Error::NotAntiHermitian { residual: res });
            }
            let tr: Complex64 = x.diagonal().iter().sum();
            if tr.norm() > 1e-12 * (1.0 + x.norm()) {
                return Err(Error::Dimension(format!("basis element {i} has nonzero trace")));
            }
        }
        let dim = basis.len();
        let mut bform = RMat::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = pairing_mat(&basis[i], &basis[j]);
                bform[(i, j)] = v;
                bform[(j, i)] = v;
            }
        }
        let bform_inv = bform
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Dimension("basis is not linearly independent under B".into()))?;

        let mut model = Self {
            name: name.into(),
            dim,
            mat_dim,
            basis,
            bform,
            bform_inv,
            ad: Vec::new(),
        };
        // Structure constants column by column; fails if the bracket leaves
        // the span.
        let mut ad = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut m = RMat::zeros(dim, dim);
            for j in 0..dim {
                let comm = &model.basis[i] * &model.basis[j] - &model.basis[j] * &model.basis[i];
                let c = model.coords(&comm)?;
                m.set_column(j, &c);
            }
            ad.push(m);
        }
        model.ad = ad;
        Ok(model)
    }

    /// Matrix realization of a coordinate vector.
    pub fn mat(&self, x: &RVec) -> CMat {
        assert_eq!(x.len(), self.dim, "coordinate length");
        let mut m = CMat::zeros(self.mat_dim, self.mat_dim);
        for (i, b) in self.basis.iter().enumerate() {
            if x[i] != 0.0 {
                m += b * Complex64::new(x[i], 0.0);
            }
        }
        m
    }

    /// Coordinates of a matrix known to lie in the span of the basis.
    pub fn coords(&self, m: &CMat) -> Result<RVec> {
        let v = RVec::from_fn(self.dim, |i, _| pairing_mat(&self.basis[i], m));
        let c = &self.bform_inv * v;
        let residual = (self.mat(&c) - m).norm();
        if residual > 1e-9 * (1.0 + m.norm()) {
            return Err(Error::Dimension(format!(
                "matrix lies outside the algebra span (residual {residual:.3e})"
            )));
        }
        Ok(c)
    }

    /// B-pairing of coordinate vectors.
    pub fn pairing(&self, x: &RVec, y: &RVec) -> f64 {
        (x.transpose() * &self.bform * y)[(0, 0)]
    }

    pub fn norm(&self, x: &RVec) -> f64 {
        self.pairing(x, x).max(0.0).sqrt()
    }

    /// Lie bracket in coordinates.
    pub fn bracket(&self, x: &RVec, y: &RVec) -> RVec {
        let mut out = RVec::zeros(self.dim);
        for i in 0..self.dim {
            if x[i] != 0.0 {
                out.axpy(x[i], &(&self.ad[i] * y), 1.0);
            }
        }
        out
    }

    /// Matrix of ad_x acting on coordinates.
    pub fn ad_matrix(&self, x: &RVec) -> RMat {
        let mut m = RMat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if x[i] != 0.0 {
                m += &self.ad[i] * x[i];
            }
        }
        m
    }

    /// exp(t X) as a group element.
    pub fn exp(&self, x: &RVec, t: f64) -> Result<GroupElement> {
        Ok(GroupElement { m: exp_antihermitian(&self.mat(x), t)? })
    }

    /// Adjoint action g X g^{-1} in coordinates.
    pub fn adjoint(&self, g: &GroupElement, x: &RVec) -> Result<RVec> {
        let m = &g.m * self.mat(x) * g.m.adjoint();
        self.coords(&m)
    }

    /// Matrix of Ad_g on the whole algebra in the model basis.
    pub fn adjoint_matrix(&self, g: &GroupElement) -> Result<RMat> {
        let mut m = RMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.coords(&(&g.m * &self.basis[j] * g.m.adjoint()))?;
            m.set_column(j, &col);
        }
        Ok(m)
    }
}

/// Orthonormal su(n) model: Cartan directions first (stairstep diagonal
/// basis), then for each pair j < k in lexicographic order the real and
/// imaginary off-diagonal plane generators.
pub fn su_n(n: usize) -> LieAlgebraModel {
    assert!(n >= 2);
    let mut basis: Vec<CMat> = Vec::with_capacity(n * n - 1);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..n {
        let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
        let mut m = CMat::zeros(n, n);
        for j in 0..k {
            m[(j, j)] = Complex64::new(0.0, inv_sqrt2 / norm);
        }
        m[(k, k)] = Complex64::new(0.0, -inv_sqrt2 * k as f64 / norm);
        basis.push(m);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut x = CMat::zeros(n, n);
            x[(j, k)] = Complex64::new(0.5, 0.0);
            x[(k, j)] = Complex64::new(-0.5, 0.0);
            basis.push(x);
            let mut y = CMat::zeros(n, n);
            y[(j, k)] = Complex64::new(0.0, 0.5);
            y[(k, j)] = Complex64::new(0.0, 0.5);
            basis.push(y);
        }
    }
    LieAlgebraModel::new(&format!("su({n})"), basis).expect("su(n) basis is valid")
}

/// Eigenphase map of the su(n) Cartan coordinates: theta = D q, where
/// theta are the n diagonal phases of exp(sum q_k A_k).
pub fn su_phase_matrix(n: usize) -> RMat {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    RMat::from_fn(n, n - 1, |j, kk| {
        let k = kk + 1;
        let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
        if j < k {
            inv_sqrt2 / norm
        } else if j == k {
            -inv_sqrt2 * k as f64 / norm
        } else {
            0.0
        }
    })
}

/// Positions of the su(n) plane generators (X_jk, Y_jk) in the `su_n`
/// basis, pairs ordered lexicographically.
pub fn su_plane_indices(n: usize) -> Vec<((usize, usize), (usize, usize))> {
    let mut out = Vec::new();
    let mut p = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            out.push(((j, k), (n - 1 + 2 * p, n - 1 + 2 * p + 1)));
            p += 1;
        }
    }
    out
}

/// Orthonormal so(n) model embedded in su(n): generators (E_jk - E_kj)/2.
pub fn so_n(n: usize) -> LieAlgebraModel {
    assert!(n >= 2);
    let mut basis = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let mut x = CMat::zeros(n, n);
            x[(j, k)] = Complex64::new(0.5, 0.0);
            x[(k, j)] = Complex64::new(-0.5, 0.0);
            basis.push(x);
        }
    }
    LieAlgebraModel::new(&format!("so({n})"), basis).expect("so(n) basis is valid")
}

/// so(n) + so(n) realized block diagonally in 2n x 2n matrices; the first
/// summand occupies the upper block.
pub fn so_so_block(n: usize) -> LieAlgebraModel {
    let single = so_n(n);
    let mut basis = Vec::new();
    for slot in 0..2 {
        for b in &single.basis {
            let mut m = CMat::zeros(2 * n, 2 * n);
            let off = slot * n;
            for j in 0..n {
                for k in 0..n {
                    m[(off + j, off + k)] = b[(j, k)];
                }
            }
            basis.push(m);
        }
    }
    LieAlgebraModel::new(&format!("so({n})+so({n})"), basis).expect("block basis is valid")
}

/// Haar-distributed element of SU(n): QR of a complex Ginibre matrix with
/// the phase correction, then the determinant pushed into the first column.
pub fn haar_su<R: Rng>(n: usize, rng: &mut R) -> GroupElement {
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    for i in 0..n {
        q[(i, 0)] /= det;
    }
    GroupElement { m: q }
}

/// Haar-distributed element of SO(n).
pub fn haar_so<R: Rng>(n: usize, rng: &mut R) -> GroupElement {
    let z = RMat::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    GroupElement { m: q.map(|x| Complex64::new(x, 0.0)) }
}

/// Deterministic Haar sample of SU(n) from a seed.
pub fn haar_sample(n: usize, seed: u64) -> GroupElement {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    haar_su(n, &mut rng)
}
