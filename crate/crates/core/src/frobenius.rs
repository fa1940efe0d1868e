//! Finite-dimensional commutative Hermitian Frobenius algebras.
//!
//! An algebra is stored in an explicit ordered basis `e_0, ..., e_{n-1}`:
//!
//! * `mult[(i * n + j) * n + k]` is the coefficient of `e_k` in `e_i · e_j`,
//! * `trace[i] = θ(e_i)`,
//! * the antilinear real structure acts as `x ↦ C · conj(x)`.
//!
//! The unit, coproduct and handle operator are derived from this data and
//! never stored, so an algebra cannot carry an inconsistent unit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{from_pair, to_pair, Pair};
use crate::linalg::{max_abs, pivoted_cholesky, CMat, ONE, ZERO};
use crate::report::ValidationReport;

/// Default relative tolerance on axiom residuals.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative pivot threshold (times `trace(G)`) for the positivity test of the Gram matrix.
pub const PIVOT_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusAlgebra {
    dim: usize,
    mult: Vec<Complex64>,
    trace: Vec<Complex64>,
    conj: CMat,
}

/// Gram matrix `G[i][j] = θ(c(e_i)·e_j)` together with its positivity verdict.
#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: CMat,
    pub hermitian_residual: f64,
    pub positive: bool,
}

impl FrobeniusAlgebra {
    pub fn new(dim: usize, mult: Vec<Complex64>, trace: Vec<Complex64>, conj: CMat) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be at least 1".into()));
        }
        if mult.len() != dim * dim * dim {
            return Err(Error::Shape(format!(
                "multiplication has {} coefficients, expected {}",
                mult.len(),
                dim * dim * dim
            )));
        }
        if trace.len() != dim {
            return Err(Error::Shape(format!("trace has length {}, expected {dim}", trace.len())));
        }
        if conj.shape() != (dim, dim) {
            return Err(Error::Shape(format!("real structure has shape {:?}, expected ({dim}, {dim})", conj.shape())));
        }
        Ok(FrobeniusAlgebra { dim, mult, trace, conj })
    }

    /// The one-dimensional algebra with `e·e = m e`, `θ(e) = theta` and `c = conjugation`.
    pub fn scalar(m: Complex64, theta: Complex64) -> Self {
        FrobeniusAlgebra {
            dim: 1,
            mult: vec![m],
            trace: vec![theta],
            conj: CMat::identity(1, 1),
        }
    }

    /// The ground field ℂ.
    pub fn trivial() -> Self {
        Self::scalar(ONE, ONE)
    }

    /// Character block of an irreducible representation of dimension `d`:
    /// `χ·χ = χ/d`, `θ(χ) = d`.
    pub fn character_block(d: u64) -> Self {
        let d = d as f64;
        Self::scalar(Complex64::new(1.0 / d, 0.0), Complex64::new(d, 0.0))
    }

    /// Group algebra of ℤ/2 in the basis `{e, g}` with the given trace.
    pub fn z2_group_algebra(trace: [Complex64; 2]) -> Self {
        let mut mult = vec![ZERO; 8];
        for i in 0..2 {
            for j in 0..2 {
                mult[(i * 2 + j) * 2 + ((i + j) % 2)] = ONE;
            }
        }
        FrobeniusAlgebra {
            dim: 2,
            mult,
            trace: trace.to_vec(),
            conj: CMat::identity(2, 2),
        }
    }

    /// Orthogonal direct sum; summand bases are concatenated in order.
    pub fn direct_sum(blocks: &[FrobeniusAlgebra]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Shape("direct sum of no blocks".into()));
        }
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        let mut mult = vec![ZERO; dim * dim * dim];
        let mut trace = vec![ZERO; dim];
        let mut conj = CMat::zeros(dim, dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                trace[off + i] = b.trace[i];
                for j in 0..b.dim {
                    conj[(off + i, off + j)] = b.conj[(i, j)];
                    for k in 0..b.dim {
                        mult[((off + i) * dim + off + j) * dim + off + k] = b.m(i, j, k);
                    }
                }
            }
            off += b.dim;
        }
        Ok(FrobeniusAlgebra { dim, mult, trace, conj })
    }

    /// The same algebra in the basis `f_a = Σ_i s[i][a] e_i`.
    pub fn change_basis(&self, s: &CMat) -> Result<Self> {
        let n = self.dim;
        if s.shape() != (n, n) {
            return Err(Error::Shape("basis change must be square of the algebra dimension".into()));
        }
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Shape("basis change is singular".into()))?;
        let mut mult = vec![ZERO; n * n * n];
        for a in 0..n {
            for b in 0..n {
                // coordinates of f_a f_b in the old basis
                let mut old = vec![ZERO; n];
                for i in 0..n {
                    for j in 0..n {
                        let coeff = s[(i, a)] * s[(j, b)];
                        if coeff == ZERO {
                            continue;
                        }
                        for (k, o) in old.iter_mut().enumerate() {
                            *o += coeff * self.m(i, j, k);
                        }
                    }
                }
                for cc in 0..n {
                    mult[(a * n + b) * n + cc] = (0..n).map(|k| s_inv[(cc, k)] * old[k]).sum();
                }
            }
        }
        let trace = (0..n)
            .map(|a| (0..n).map(|i| s[(i, a)] * self.trace[i]).sum())
            .collect();
        let conj = &s_inv * &self.conj * s.map(|z| z.conj());
        Ok(FrobeniusAlgebra { dim: n, mult, trace, conj })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `e_k` in `e_i · e_j`.
    pub fn m(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.mult[(i * self.dim + j) * self.dim + k]
    }

    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    pub fn real_structure(&self) -> &CMat {
        &self.conj
    }

    /// Multiplication as a `dim × dim²` matrix acting on `A ⊗ A` (left factor slower).
    pub fn mult_matrix(&self) -> CMat {
        let n = self.dim;
        CMat::from_fn(n, n * n, |k, ij| self.m(ij / n, ij % n, k))
    }

    /// Trace as a `1 × dim` row.
    pub fn trace_row(&self) -> CMat {
        CMat::from_row_slice(1, self.dim, &self.trace)
    }

    pub fn product(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            if x[i] == ZERO {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == ZERO {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += xy * self.m(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ x·y`.
    pub fn left_mult(&self, x: &[Complex64]) -> CMat {
        let n = self.dim;
        CMat::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.m(i, j, k)).sum())
    }

    /// `c(x) = C · conj(x)`.
    pub fn apply_real_structure(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.conj[(i, j)] * x[j].conj()).sum())
            .collect()
    }

    /// Frobenius pairing `P[i][j] = θ(e_i e_j)`.
    pub fn pairing(&self) -> CMat {
        let n = self.dim;
        CMat::from_fn(n, n, |i, j| (0..n).map(|k| self.m(i, j, k) * self.trace[k]).sum())
    }

    fn basis(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim];
        v[i] = ONE;
        v
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.dim;
        let mut report = ValidationReport::new();
        let mscale = self.mult.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        let mut assoc: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs: Complex64 = (0..n).map(|p| self.m(i, j, p) * self.m(p, k, l)).sum();
                        let rhs: Complex64 = (0..n).map(|p| self.m(j, k, p) * self.m(i, p, l)).sum();
                        assoc = assoc.max((lhs - rhs).norm());
                    }
                }
            }
        }
        let assoc = assoc / (mscale * mscale);
        report.push("associativity", assoc <= tol, Some(assoc), None);

        let mut comm: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    comm = comm.max((self.m(i, j, k) - self.m(j, i, k)).norm());
                }
            }
        }
        let comm = comm / mscale;
        report.push("commutativity", comm <= tol, Some(comm), None);

        let sv = self.pairing().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel = if smax > 0.0 { smin / smax } else { 0.0 };
        report.push("pairing_nondegenerate", rel > tol, Some(rel), None);

        let inv = self.conj.map(|z| z.conj()) * &self.conj - CMat::identity(n, n);
        let inv = max_abs(&inv);
        report.push("involution", inv <= tol, Some(inv), None);

        let cscale = max_abs(&self.conj).max(f64::MIN_POSITIVE);
        let mut hom: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.apply_real_structure(&self.product(&self.basis(i), &self.basis(j)));
                let rhs = self.product(
                    &self.apply_real_structure(&self.basis(i)),
                    &self.apply_real_structure(&self.basis(j)),
                );
                for (a, b) in lhs.iter().zip(&rhs) {
                    hom = hom.max((a - b).norm());
                }
            }
        }
        let hom = hom / (mscale * cscale * cscale.max(1.0));
        report.push("real_structure_algebra_map", hom <= tol, Some(hom), None);

        let gram = self.hermitian_gram();
        let gscale = max_abs(&gram.matrix).max(f64::MIN_POSITIVE);
        let herm = gram.hermitian_residual / gscale;
        report.push("gram_hermitian", herm <= tol, Some(herm), None);
        report.push("gram_positive", gram.positive, None, None);
        report
    }

    /// The unique `u` with `u·x = x`, found by solving `Σ_i u_i m[i][j][k] = δ_jk`.
    pub fn unit(&self) -> Result<Vec<Complex64>> {
        let n = self.dim;
        // rows indexed by (j, k), columns by i
        let a = CMat::from_fn(n * n, n, |jk, i| self.m(i, jk / n, jk % n));
        let b = CMat::from_fn(n * n, 1, |jk, _| if jk / n == jk % n { ONE } else { ZERO });
        let svd = a.clone().svd(true, true);
        let u = svd
            .solve(&b, 1e-13)
            .map_err(|_| Error::NoUnit { residual: f64::INFINITY })?;
        let residual = max_abs(&(&a * &u - &b));
        let scale = max_abs(&a).max(1.0) * max_abs(&u).max(1.0);
        if !(residual <= DEFAULT_TOL * scale) {
            return Err(Error::NoUnit { residual });
        }
        Ok(u.iter().cloned().collect())
    }

    fn pairing_inverse(&self) -> Result<CMat> {
        let p = self.pairing();
        let sv = p.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel = if smax > 0.0 { smin / smax } else { 0.0 };
        if rel <= DEFAULT_TOL {
            return Err(Error::DegeneratePairing(rel));
        }
        p.try_inverse().ok_or(Error::DegeneratePairing(rel))
    }

    /// Coproduct `w(x) = Σ_{i,j} P⁻¹[i][j] (x·e_i) ⊗ e_j` as a `dim² × dim` matrix
    /// (row `a·dim + b` is the coefficient of `e_a ⊗ e_b`).
    pub fn coproduct(&self) -> Result<CMat> {
        let n = self.dim;
        let pinv = self.pairing_inverse()?;
        Ok(CMat::from_fn(n * n, n, |ab, k| {
            let (a, b) = (ab / n, ab % n);
            (0..n).map(|i| pinv[(i, b)] * self.m(k, i, a)).sum()
        }))
    }

    /// Handle operator `h = m ∘ w`.
    pub fn handle(&self) -> Result<CMat> {
        Ok(self.mult_matrix() * self.coproduct()?)
    }

    pub fn hermitian_gram(&self) -> Gram {
        let n = self.dim;
        let pairing = self.pairing();
        // c(e_i) = C[:, i]
        let g = CMat::from_fn(n, n, |i, j| (0..n).map(|p| self.conj[(p, i)] * pairing[(p, j)]).sum());
        let hermitian_residual = max_abs(&(&g - g.adjoint()));
        let sym = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let positive = pivoted_cholesky(&sym, PIVOT_REL).factor.is_some();
        Gram {
            matrix: g,
            hermitian_residual,
            positive,
        }
    }

    /// Upper factor `R` with `G = Rᴴ R`; coordinates `R x` are orthonormal coordinates.
    pub fn orthonormalizer(&self) -> Result<CMat> {
        let g = self.hermitian_gram();
        let sym = (&g.matrix + g.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        pivoted_cholesky(&sym, PIVOT_REL)
            .factor
            .ok_or_else(|| Error::InvalidBlock {
                lambda: f64::NAN,
                reason: "Gram matrix is not positive definite".into(),
            })
    }
}

/// JSON mirror: `{"dim", "mult", "trace", "conj"}` with `[re, im]` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobeniusJson {
    pub dim: usize,
    pub mult: Vec<Vec<Vec<Pair>>>,
    pub trace: Vec<Pair>,
    pub conj: Vec<Vec<Pair>>,
}

impl From<&FrobeniusAlgebra> for FrobeniusJson {
    fn from(a: &FrobeniusAlgebra) -> Self {
        let n = a.dim;
        FrobeniusJson {
            dim: n,
            mult: (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| to_pair(a.m(i, j, k))).collect()).collect())
                .collect(),
            trace: a.trace.iter().map(|z| to_pair(*z)).collect(),
            conj: crate::json::matrix_to_wire(&a.conj),
        }
    }
}

impl TryFrom<FrobeniusJson> for FrobeniusAlgebra {
    type Error = Error;

    fn try_from(j: FrobeniusJson) -> Result<Self> {
        let n = j.dim;
        if j.mult.len() != n || j.mult.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n)) {
            return Err(Error::Shape(format!("mult must be {n}×{n}×{n}")));
        }
        let mult = j.mult.into_iter().flatten().flatten().map(from_pair).collect();
        let trace = j.trace.into_iter().map(from_pair).collect();
        if j.conj.len() != n || j.conj.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("conj must be {n}×{n}")));
        }
        let conj = DMatrix::from_fn(n, n, |r, c| from_pair(j.conj[r][c]));
        FrobeniusAlgebra::new(n, mult, trace, conj)
    }
}

impl Serialize for FrobeniusAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrobeniusJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrobeniusAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FrobeniusJson::deserialize(d)?;
        FrobeniusAlgebra::try_from(j).map_err(serde::de::Error::custom)
    }
}
