//! Allowable complex metrics, `√det`, and total-volume labels.
//!
//! A complex symmetric `g` is allowable when some real basis diagonalizes it
//! with eigenvalues `λ_i` off the negative real axis and `Σ|arg λ_i| < π`.
//! That basis is searched for through the real pencil `(Re g, Im g)`. For
//! `n ≤ 2` the definition itself (positivity of `Re Q_g` on the exterior
//! algebra) is available as a second, independent decision procedure.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bordism::Label;
use crate::error::{Error, Result};
use crate::json::Pair;
use crate::linalg::{c, CMat};

/// Largest dimension accepted by [`ComplexMetric::new`].
pub const MAX_DIM: usize = 4;
/// Width of the excluded band around `Σ|arg λ| = π` and the negative axis.
pub const ARG_TOL: f64 = 1e-12;
const PENCIL_ANGLES: usize = 32;
const CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMetric {
    g: CMat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Allowability {
    Allowable(Vec<Pair>),
    NotAllowable(String),
    Undetermined,
}

impl Allowability {
    pub fn is_allowable(&self) -> bool {
        matches!(self, Allowability::Allowable(_))
    }

    pub fn decided(&self) -> Option<bool> {
        match self {
            Allowability::Allowable(_) => Some(true),
            Allowability::NotAllowable(_) => Some(false),
            Allowability::Undetermined => None,
        }
    }

    pub fn eigenvalues(&self) -> Option<Vec<Complex64>> {
        match self {
            Allowability::Allowable(ls) => Some(ls.iter().map(|p| c(p[0], p[1])).collect()),
            _ => None,
        }
    }
}

impl ComplexMetric {
    pub fn new(g: CMat) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || n > MAX_DIM || g.ncols() != n {
            return Err(Error::Shape(format!("metric must be square of size 1..={MAX_DIM}, got {:?}", g.shape())));
        }
        let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (0..n).any(|i| (0..i).any(|j| (g[(i, j)] - g[(j, i)]).norm() > 1e-14 * scale)) {
            return Err(Error::Shape("metric must be symmetric".into()));
        }
        Ok(ComplexMetric { g })
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        ComplexMetric {
            g: CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries)),
        }
    }

    pub fn real(h: &DMatrix<f64>) -> Result<Self> {
        Self::new(h.map(|x| c(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.g
    }

    pub fn det(&self) -> Complex64 {
        self.g.clone().determinant()
    }

    /// `AᵀgA` for a real `A`.
    pub fn congruence(&self, a: &DMatrix<f64>) -> Self {
        let ac = a.map(|x| c(x, 0.0));
        ComplexMetric {
            g: ac.transpose() * &self.g * ac,
        }
    }

    fn is_singular(&self) -> bool {
        let n = self.dim() as i32;
        let scale = self.g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.det().norm() <= 1e-13 * scale.powi(n)
    }

    /// Real symmetric with exactly one negative eigenvalue.
    pub fn is_lorentzian(&self) -> bool {
        if self.g.iter().any(|z| z.im != 0.0) || self.is_singular() {
            return false;
        }
        let ev = self.g.map(|z| z.re).symmetric_eigenvalues();
        ev.iter().filter(|&&x| x < 0.0).count() == 1 && ev.iter().all(|&x| x != 0.0)
    }
}

/// Diagonal entries in a real basis that diagonalizes `g`, if the pencil finds one.
pub fn pencil_diagonalization(g: &ComplexMetric) -> Option<Vec<Complex64>> {
    let a = g.g.map(|z| z.re);
    let b = g.g.map(|z| z.im);
    for k in 0..PENCIL_ANGLES {
        let phi = PI * k as f64 / PENCIL_ANGLES as f64;
        let m = &a * phi.cos() + &b * phi.sin();
        let n = &b * phi.cos() - &a * phi.sin();
        let ev = m.clone().symmetric_eigenvalues();
        let lo = ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let hi = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if lo <= 1e-8 * hi {
            continue;
        }
        let Some(m_inv) = m.clone().try_inverse() else { continue };
        let Some(p) = common_basis(&m, &(m_inv * &n)) else { continue };
        let pc = p.map(|x| c(x, 0.0));
        let d = pc.transpose() * &g.g * &pc;
        let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let off = (0..d.nrows())
            .flat_map(|i| (0..d.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|ij| d[ij].norm())
            .fold(0.0, f64::max);
        if off <= 1e-9 * scale {
            return Some(d.diagonal().iter().cloned().collect());
        }
    }
    None
}

/// Unit real eigenvectors of `s = M⁻¹N`, `M`-orthogonal within each eigenspace.
fn common_basis(m: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = s.nrows();
    let scale = s.iter().map(|x| x.abs()).fold(0.0, f64::max) + 1.0;
    let eig = s.clone().complex_eigenvalues();
    if eig.iter().any(|z| z.im.abs() > CLUSTER_TOL * scale) {
        return None;
    }
    let mut mus: Vec<f64> = eig.iter().map(|z| z.re).collect();
    mus.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for mu in mus {
        match clusters.last_mut() {
            Some((c0, k)) if (mu - *c0 / *k as f64).abs() <= CLUSTER_TOL * scale => {
                *c0 += mu;
                *k += 1;
            }
            _ => clusters.push((mu, 1)),
        }
    }
    let mut cols = Vec::with_capacity(n);
    for (sum, k) in clusters {
        let mu = sum / k as f64;
        let shifted = s - DMatrix::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let null: Vec<usize> = (0..n)
            .filter(|&i| svd.singular_values[i] <= CLUSTER_TOL * scale)
            .collect();
        if null.len() != k {
            return None;
        }
        let v = DMatrix::from_fn(n, k, |r, j| v_t[(null[j], r)]);
        let restricted = v.transpose() * m * &v;
        let w = restricted.symmetric_eigen().eigenvectors;
        let basis = &v * w;
        for j in 0..k {
            let col = basis.column(j);
            cols.push(col / col.norm());
        }
    }
    Some(DMatrix::from_columns(&cols))
}

/// Decides allowability from the definition: `Re Q_g` positive definite on
/// `Λ•V*`, where `Q_g` restricted to `Λ^k` is `√det g · C_k(g⁻¹)`. Only `n ≤ 2`.
pub fn allowability_by_forms(g: &ComplexMetric) -> Option<bool> {
    let n = g.dim();
    if n > 2 || g.is_singular() {
        return None;
    }
    let det = g.det();
    let root = det.sqrt();
    let inv = g.g.clone().try_inverse()?;
    let mut blocks = vec![CMat::from_element(1, 1, root)];
    blocks.push(inv.clone() * root);
    if n == 2 {
        blocks.push(CMat::from_element(1, 1, root / det));
    }
    Some(blocks.iter().all(|b| {
        let re = b.map(|z| z.re);
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        re.symmetric_eigenvalues().iter().all(|&x| x > 1e-13 * scale)
    }))
}

fn judge(lambdas: Vec<Complex64>) -> Allowability {
    if let Some(l) = lambdas.iter().find(|l| l.arg().abs() >= PI - ARG_TOL) {
        return Allowability::NotAllowable(format!("eigenvalue {l} lies on the negative real axis"));
    }
    let total: f64 = lambdas.iter().map(|l| l.arg().abs()).sum();
    if total >= PI - ARG_TOL {
        return Allowability::NotAllowable(format!("sum of |arg| is {total}, not below pi"));
    }
    Allowability::Allowable(lambdas.iter().map(|l| [l.re, l.im]).collect())
}

pub fn allowability(g: &ComplexMetric) -> Result<Allowability> {
    if g.is_singular() {
        return Err(Error::SingularMetric);
    }
    if let Some(lambdas) = pencil_diagonalization(g) {
        return Ok(judge(lambdas));
    }
    Ok(match allowability_by_forms(g) {
        Some(true) => Allowability::Allowable(Vec::new()),
        Some(false) => Allowability::NotAllowable("Re Q_g is not positive definite".into()),
        None => Allowability::Undetermined,
    })
}

/// The volume density of `g` relative to the coordinate density.
///
/// Allowable metrics give the square root of `det g` with positive real part.
/// Real Lorentzian metrics give `i·√|det g|`, the limit from allowable metrics
/// whose negative eigenvalue is approached through the upper half plane.
pub fn sqrt_det(g: &ComplexMetric) -> Result<Complex64> {
    if g.is_lorentzian() {
        return Ok(c(0.0, g.det().norm().sqrt()));
    }
    match allowability(g)? {
        Allowability::Allowable(_) => Ok(g.det().sqrt()),
        _ => Err(Error::NotAllowable),
    }
}

/// `(ω/vol_h)^{2/n}·h`, a metric whose `√det` is `ω`.
pub fn right_inverse(omega: Complex64, h: &DMatrix<f64>) -> Result<ComplexMetric> {
    let n = h.nrows();
    let hm = ComplexMetric::real(h)?;
    let ev = h.clone().symmetric_eigenvalues();
    if ev.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Precondition("reference metric must be positive definite".into()));
    }
    let ratio = omega / hm.det().re.sqrt();
    if !(ratio.re > 0.0) {
        return Err(Error::Precondition(format!("volume {omega} must have positive real part")));
    }
    let scale = (ratio.ln() * (2.0 / n as f64)).exp();
    Ok(ComplexMetric { g: hm.g * scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub area: f64,
    #[serde(with = "crate::json::complex")]
    pub density: Complex64,
}

/// Piecewise constant density on a triangulated surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDensity {
    pub triangles: Vec<Triangle>,
    /// Triangle indices per connected component; absent means one component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<usize>>>,
}

/// One label per component: `Σ area · density`.
pub fn total_volume(d: &SampledDensity) -> Result<Vec<Label>> {
    let all: Vec<Vec<usize>> = vec![(0..d.triangles.len()).collect()];
    let comps = d.components.as_ref().unwrap_or(&all);
    let mut seen = vec![false; d.triangles.len()];
    for &i in comps.iter().flatten() {
        if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Density(format!("triangle {i} is missing or listed twice")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Density("every triangle must belong to a component".into()));
    }
    if let Some(t) = d.triangles.iter().find(|t| !(t.area > 0.0 && t.area.is_finite())) {
        return Err(Error::Density(format!("triangle area {} must be positive", t.area)));
    }
    comps
        .iter()
        .map(|comp| {
            if comp.is_empty() {
                return Err(Error::Density("empty component".into()));
            }
            let ts: Vec<&Triangle> = comp.iter().map(|&i| &d.triangles[i]).collect();
            let total: Complex64 = ts.iter().map(|t| t.density * t.area).sum();
            if ts.iter().all(|t| t.density.re > 0.0) {
                Ok(Label::Volume(total))
            } else if ts.iter().all(|t| t.density.re == 0.0) {
                Ok(Label::Imaginary(total.im))
            } else {
                Err(Error::Density("real parts must be all positive or all zero".into()))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(entries: &[Complex64]) -> ComplexMetric {
        ComplexMetric::diagonal(entries)
    }

    #[test]
    fn diagonal_examples() {
        let a = allowability(&diag(&[c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        let ls = a.eigenvalues().unwrap();
        assert!((ls[0] - c(1.0, 0.0)).norm() < 1e-14 && (ls[1] - c(0.0, 1.0)).norm() < 1e-14);
        assert!(matches!(allowability(&diag(&[c(-1.0, 0.0), c(1.0, 0.0)])).unwrap(), Allowability::NotAllowable(_)));
        assert!(matches!(allowability(&diag(&[c(0.0, 1.0), c(0.0, 1.0)])).unwrap(), Allowability::NotAllowable(_)));
        assert!(allowability(&ComplexMetric::real(&DMatrix::identity(3, 3)).unwrap()).unwrap().is_allowable());
        assert!(matches!(allowability(&diag(&[c(1.0, 0.0), c(0.0, 0.0)])), Err(Error::SingularMetric)));
    }

    #[test]
    fn forms_match_arg_criterion_on_diagonals() {
        for (t1, t2) in [(0.3, 0.4), (1.5, -1.5), (2.0, 1.0), (-0.2, 3.0)] {
            let g = diag(&[Complex64::from_polar(1.3, t1), Complex64::from_polar(0.7, t2)]);
            let expect = f64::abs(t1) + f64::abs(t2) < PI;
            assert_eq!(allowability_by_forms(&g), Some(expect), "{t1} {t2}");
        }
    }

    #[test]
    fn pencil_handles_congruent_metrics() {
        let g = diag(&[c(2.0, 1.0), c(1.0, -0.5)]);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 1.0]);
        let h = g.congruence(&a);
        assert!(allowability(&h).unwrap().is_allowable());
        let r = sqrt_det(&h).unwrap() / (sqrt_det(&g).unwrap() * a.determinant().abs());
        assert!((r - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn non_diagonalizable_pencil_falls_back() {
        // Re g and Im g share no real eigenbasis and the pencil has complex eigenvalues.
        let g = ComplexMetric::new(CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 2.0), c(-1.0, 0.0)]))
            .unwrap();
        assert!(pencil_diagonalization(&g).is_none());
        assert_eq!(allowability(&g).unwrap(), Allowability::NotAllowable("Re Q_g is not positive definite".into()));
    }

    #[test]
    fn random_cross_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut both = 0;
        for _ in 0..300 {
            let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (p, q, r) = (z(), z(), z());
            let g = ComplexMetric::new(CMat::from_row_slice(2, 2, &[p, q, q, r])).unwrap();
            let pencil = pencil_diagonalization(&g).map(|ls| judge(ls).is_allowable());
            if let (Some(a), Some(b)) = (pencil, allowability_by_forms(&g)) {
                assert_eq!(a, b, "{g:?}");
                both += 1;
            }
        }
        assert!(both >= 200);
    }

    #[test]
    fn sqrt_det_values() {
        let z = sqrt_det(&diag(&[c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        assert!((z - Complex64::from_polar(1.0, PI / 4.0)).norm() <= 1e-15);
        assert_eq!(sqrt_det(&ComplexMetric::real(&DMatrix::identity(2, 2)).unwrap()).unwrap(), c(1.0, 0.0));
        let lor = sqrt_det(&diag(&[c(-1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(lor, c(0.0, 1.0));
        assert!(matches!(sqrt_det(&diag(&[c(-1.0, 0.0), c(-1.0, 0.0)])), Err(Error::NotAllowable)));
    }

    #[test]
    fn lorentzian_value_is_upper_limit() {
        let lor = sqrt_det(&diag(&[c(-4.0, 0.0), c(1.0, 0.0)])).unwrap();
        for eps in [1e-2, 1e-4, 1e-6] {
            let near = sqrt_det(&diag(&[Complex64::from_polar(4.0, PI - eps), c(1.0, 0.0)])).unwrap();
            assert!((near - lor).norm() < 2.0 * eps);
        }
    }

    #[test]
    fn holomorphy_along_a_line() {
        let f = |tau: f64| sqrt_det(&diag(&[c(1.0, 0.0), Complex64::from_polar(1.0, tau)])).unwrap();
        let h = 1e-5;
        for k in -9..=9 {
            let tau = k as f64 * 0.15;
            assert!((f(tau) - Complex64::from_polar(1.0, tau / 2.0)).norm() < 1e-14);
            let deriv = (f(tau + h) - f(tau - h)) / (2.0 * h);
            let expect = Complex64::from_polar(0.5, tau / 2.0 + PI / 2.0);
            assert!((deriv - expect).norm() < 1e-8);
        }
    }

    #[test]
    fn right_inverse_examples() {
        let h = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let vol = h.determinant().sqrt();
        let g = right_inverse(c(vol, 0.0), &h).unwrap();
        assert!(g.matrix().iter().zip(h.iter()).all(|(a, b)| (a - c(*b, 0.0)).norm() < 1e-14));
        let id = DMatrix::identity(2, 2);
        let g2 = right_inverse(c(2.0, 0.0), &id).unwrap();
        assert!((sqrt_det(&g2).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(right_inverse(c(0.0, 1.0), &id), Err(Error::Precondition(_))));
        for w in [c(0.3, 5.0), c(2.0, -1.0), c(1e-3, 0.0)] {
            let g = right_inverse(w, &h).unwrap();
            assert!((sqrt_det(&g).unwrap() - w).norm() < 1e-13 * w.norm());
        }
    }

    #[test]
    fn mesh_volumes() {
        let tri = |a: f64, d: Complex64| Triangle { area: a, density: d };
        let torus = SampledDensity {
            triangles: vec![tri(0.5, c(1.0, 1.0)), tri(0.5, c(1.0, 1.0))],
            components: None,
        };
        assert_eq!(total_volume(&torus).unwrap(), vec![Label::volume(1.0, 1.0)]);
        let imag = SampledDensity {
            triangles: vec![tri(1.0, c(0.0, 1.0))],
            components: None,
        };
        assert_eq!(total_volume(&imag).unwrap(), vec![Label::Imaginary(1.0)]);
        let two = SampledDensity {
            triangles: vec![tri(1.0, c(1.0, 0.0)), tri(1.0, c(2.0, 0.0))],
            components: Some(vec![vec![0], vec![1]]),
        };
        assert_eq!(total_volume(&two).unwrap(), vec![Label::volume(1.0, 0.0), Label::volume(2.0, 0.0)]);
        let mixed = SampledDensity {
            triangles: vec![tri(1.0, c(1.0, 0.0)), tri(1.0, c(0.0, 2.0))],
            components: None,
        };
        assert!(matches!(total_volume(&mixed), Err(Error::Density(_))));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sqrt_det_is_equivariant(
            t1 in -1.4f64..1.4,
            t2 in -1.4f64..1.4,
            r1 in 0.3f64..3.0,
            r2 in 0.3f64..3.0,
            entries in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let g = ComplexMetric::diagonal(&[Complex64::from_polar(r1, t1), Complex64::from_polar(r2, t2)]);
            let a = DMatrix::from_row_slice(2, 2, &entries);
            prop_assume!(a.determinant().abs() > 0.05);
            let lhs = sqrt_det(&g.congruence(&a)).unwrap();
            let rhs = sqrt_det(&g).unwrap() * a.determinant().abs();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }

        #[test]
        fn right_inverse_is_a_section(
            re in 0.05f64..5.0,
            im in -5.0f64..5.0,
            h in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let h = DMatrix::from_row_slice(2, 2, &[2.0 + h[0], h[1], h[1], 2.0 + h[2]]);
            let omega = Complex64::new(re, im);
            let g = right_inverse(omega, &h).unwrap();
            prop_assert!((sqrt_det(&g).unwrap() - omega).norm() <= 1e-12 * omega.norm());
        }
    }
}
