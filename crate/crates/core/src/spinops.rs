//! Small dense complex linear algebra and angular-momentum operators.
//!
//! Everything here is dimensionless or in rad/ms depending on the caller's
//! role for the matrix. Matrix exponentials go through a Hermitian
//! eigendecomposition: the matrices are small and reused across a whole time
//! grid, so one decomposition amortizes over all evolution times.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{CoreError, Result};

pub type Cx = Complex<f64>;
pub type CMat = DMatrix<Cx>;
pub type CVec = DVector<Cx>;

pub const I: Cx = Cx::new(0.0, 1.0);

/// e^{i phi} without going through `Complex::exp`.
#[inline]
pub fn cis(phi: f64) -> Cx {
    Cx::new(libm::cos(phi), libm::sin(phi))
}

/// Spin operators for a single spin-s, dimension 2s+1, basis ordered
/// |s>, |s-1>, ..., |-s>.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    /// Twice the spin quantum number.
    pub spin_2x: u32,
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

/// Ladder-operator construction of sx, sy, sz for half-integer or integer s.
pub fn spin_operators(spin_2x: u32) -> Result<SpinOperators> {
    if spin_2x == 0 {
        return Err(CoreError::InvalidArgument(
            "spin quantum number must be positive".into(),
        ));
    }
    let dim = spin_2x as usize + 1;
    let s = spin_2x as f64 / 2.0;
    let mut sp = CMat::zeros(dim, dim);
    let mut sz = CMat::zeros(dim, dim);
    for k in 0..dim {
        let m = s - k as f64;
        sz[(k, k)] = Cx::new(m, 0.0);
        if k > 0 {
            // <m+1| S+ |m> with m = s - k
            let amp = libm::sqrt(s * (s + 1.0) - m * (m + 1.0));
            sp[(k - 1, k)] = Cx::new(amp, 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).scale(0.5);
    let sy = (&sp - &sm) * Cx::new(0.0, -0.5);
    Ok(SpinOperators {
        spin_2x,
        sx,
        sy,
        sz,
    })
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Kronecker product ordered so that index 0 is the most significant factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Embed a single-site operator into the product space of `local_dims`,
/// i.e. 1 x ... x op x ... x 1 with `op` at `site_index`.
pub fn embed(op: &CMat, site_index: usize, local_dims: &[usize]) -> Result<CMat> {
    if site_index >= local_dims.len() {
        return Err(CoreError::InvalidArgument("site index out of range".into()));
    }
    if op.nrows() != local_dims[site_index] || op.ncols() != local_dims[site_index] {
        return Err(CoreError::InvalidArgument(
            "operator dimension does not match the local dimension".into(),
        ));
    }
    let total: usize = local_dims.iter().product();
    if total > crate::exact::DIM_CAP {
        return Err(CoreError::DimensionCap {
            dim: total,
            cap: crate::exact::DIM_CAP,
        });
    }
    let mut out = identity(1);
    for (k, &d) in local_dims.iter().enumerate() {
        out = if k == site_index {
            kron(&out, op)
        } else {
            kron(&out, &identity(d))
        };
    }
    Ok(out)
}

/// Embed a two-site operator given on dims (d_i, d_j) at positions i < j.
pub fn embed_pair(op: &CMat, i: usize, j: usize, local_dims: &[usize]) -> Result<CMat> {
    if i >= j || j >= local_dims.len() {
        return Err(CoreError::InvalidArgument("bad pair indices".into()));
    }
    let (di, dj) = (local_dims[i], local_dims[j]);
    if op.nrows() != di * dj {
        return Err(CoreError::InvalidArgument(
            "pair operator dimension mismatch".into(),
        ));
    }
    // Left identity x op(i,j 2-site space) x interleaved identities: build by
    // iterating basis products. Dims here are tiny, the O(d^2) fill is fine.
    let total: usize = local_dims.iter().product();
    let mut out = CMat::zeros(total, total);
    let n = local_dims.len();
    let strides: Vec<usize> = (0..n)
        .map(|k| local_dims[k + 1..].iter().product::<usize>())
        .collect();
    for row in 0..total {
        let ri = row / strides[i] % di;
        let rj = row / strides[j] % dj;
        let rest = row - ri * strides[i] - rj * strides[j];
        for ci in 0..di {
            for cj in 0..dj {
                let v = op[(ri * dj + rj, ci * dj + cj)];
                if v != Cx::new(0.0, 0.0) {
                    let col = rest + ci * strides[i] + cj * strides[j];
                    out[(row, col)] += v;
                }
            }
        }
    }
    Ok(out)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, c| f64::max(acc, c.norm()))
}

/// Max deviation from Hermiticity, relative check left to callers.
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix, cached for repeated propagator
/// evaluation over a time grid.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, same unit as the input matrix (rad/ms for Hamiltonians).
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
    adjoint: CMat,
}

impl HermitianEigen {
    /// Relative Hermiticity tolerance accepted on input matrices.
    pub const HERMITICITY_TOL: f64 = 1e-9;

    pub fn new(h: &CMat) -> Result<Self> {
        let scale = max_abs(h).max(1.0);
        let dev = hermiticity_deviation(h);
        if dev > Self::HERMITICITY_TOL * scale {
            return Err(CoreError::NonHermitian { deviation: dev });
        }
        // Symmetrize so roundoff asymmetry cannot leak into the decomposition.
        let hs = (h + h.adjoint()).scale(0.5);
        let se = hs.symmetric_eigen();
        let adjoint = se.eigenvectors.adjoint();
        Ok(HermitianEigen {
            eigenvalues: se.eigenvalues,
            eigenvectors: se.eigenvectors,
            adjoint,
        })
    }

    /// exp(sign * i * H * t) as a dense matrix.
    pub fn propagator(&self, t: f64, sign: f64) -> CMat {
        let d = self.eigenvalues.len();
        let mut phases = CMat::zeros(d, d);
        for k in 0..d {
            phases[(k, k)] = cis(sign * self.eigenvalues[k] * t);
        }
        &self.eigenvectors * phases * &self.adjoint
    }

    /// exp(sign * i * H * t) |v>, two matrix-vector products.
    pub fn evolve(&self, t: f64, sign: f64, v: &CVec) -> CVec {
        let mut c = &self.adjoint * v;
        for k in 0..c.len() {
            c[k] *= cis(sign * self.eigenvalues[k] * t);
        }
        &self.eigenvectors * c
    }

    /// Coefficients of basis vector `idx` in the eigenbasis (column of V†).
    pub fn basis_coeffs(&self, idx: usize) -> CVec {
        self.adjoint.column(idx).into_owned()
    }
}

/// exp(sign * i * H * t) for Hermitian H via eigendecomposition.
pub fn expm_i(h: &CMat, t: f64, sign: f64) -> Result<CMat> {
    Ok(HermitianEigen::new(h)?.propagator(t, sign))
}

/// Max-norm deviation of U from unitarity.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let p = u.adjoint() * u;
    let mut dev = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((p[(i, j)] - Cx::new(target, 0.0)).norm());
        }
    }
    dev
}
