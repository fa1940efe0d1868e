//! Small dense complex linear algebra helpers shared by the modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Kronecker product with `a` as the slower (left) tensor factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `a ⊗ a ⊗ ... ⊗ a` (`k` factors); the empty power is the 1×1 identity.
pub fn kron_power(a: &CMat, k: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..k {
        out = kron(&out, a);
    }
    out
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Outcome of a diagonally pivoted Cholesky factorization.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Upper factor `R` with `G = Rᴴ R`, present only when every pivot cleared the threshold.
    pub factor: Option<CMat>,
    /// Smallest pivot encountered (may be negative or complex-ish when `G` is not PD).
    pub min_pivot: f64,
}

/// Pivoted Cholesky of a Hermitian matrix with pivot threshold `rel * trace(G)`.
pub fn pivoted_cholesky(g: &CMat, rel: f64) -> PivotedCholesky {
    let n = g.nrows();
    let trace: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    let threshold = rel * trace.abs().max(f64::MIN_POSITIVE);
    let mut a = g.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = CMat::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        // choose the largest remaining diagonal entry
        let mut best = k;
        for i in k..n {
            if a[(i, i)].re > a[(best, best)].re {
                best = i;
            }
        }
        if best != k {
            a.swap_rows(k, best);
            a.swap_columns(k, best);
            l.swap_rows(k, best);
            perm.swap(k, best);
        }
        let pivot = a[(k, k)].re;
        min_pivot = min_pivot.min(pivot);
        if !(pivot > threshold) || trace <= 0.0 {
            return PivotedCholesky {
                factor: None,
                min_pivot,
            };
        }
        let d = pivot.sqrt();
        l[(k, k)] = c(d, 0.0);
        for i in k + 1..n {
            l[(i, k)] = a[(i, k)] / d;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = l[(i, k)] * l[(j, k)].conj();
                a[(i, j)] -= v;
            }
        }
    }
    // G = P L Lᴴ Pᵀ  =>  R = Lᴴ Pᵀ
    let mut pl = CMat::zeros(n, n);
    for (row, &p) in perm.iter().enumerate() {
        for j in 0..n {
            pl[(p, j)] = l[(row, j)];
        }
    }
    PivotedCholesky {
        factor: Some(pl.adjoint()),
        min_pivot,
    }
}

/// Mixed-radix digits of `index`, most significant first.
pub fn digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in radices.iter().enumerate().rev() {
        out[slot] = index % r;
        index /= r;
    }
    out
}

pub fn undigits(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}
