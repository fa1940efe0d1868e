//! Purely imaginary volumes and the topological limits.
//!
//! With label `iζ` a component contributes `Σ_λ e^{-iζλ} F_λ`. Only cylinders
//! stay bounded; everything else is a family of blocks whose norms grow
//! sub-exponentially, so results carry a per-level growth report instead of a
//! tail bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bordism::{Bordism, Label};
use crate::error::{Error, Result};
use crate::evaluator::{
    assemble, check_bordism, component_terms, eval_with_cutoff, max_block_diff, term_norm, Block, BlockOperator, BlockOperatorJson,
};
use crate::linalg::{op_norm, CMat, ONE};
use crate::spectral::{Level, SpectralVft};

/// Values of `t` probed by every growth report.
pub const GROWTH_RATES: [f64; 3] = [0.05, 0.1, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Bounded on the whole Hilbert space.
    Hilbert,
    /// Defined on the exponentially decaying sequences only.
    CheckSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelNorm {
    pub lambda: f64,
    pub norm: f64,
}

/// `C` with `blocknorm(λ) < C e^{tλ}` over the reported levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub t: f64,
    pub c: f64,
    pub argmax_lambda: f64,
    /// The maximizer is not the last reported level.
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub levels: Vec<LevelNorm>,
    pub bounds: Vec<GrowthBound>,
}

impl GrowthReport {
    pub fn from_norms(levels: Vec<LevelNorm>) -> Self {
        let bounds = GROWTH_RATES.iter().map(|&t| growth_bound(&levels, t)).collect();
        GrowthReport { levels, bounds }
    }

    pub fn bound(&self, t: f64) -> Option<&GrowthBound> {
        self.bounds.iter().find(|b| b.t == t)
    }

    /// Checks `norm < c e^{tλ}` at every reported level.
    pub fn holds(&self, bound: &GrowthBound) -> bool {
        self.levels.iter().all(|l| l.norm < bound.c * (bound.t * l.lambda).exp())
    }
}

fn growth_bound(levels: &[LevelNorm], t: f64) -> GrowthBound {
    let mut best = (f64::NEG_INFINITY, f64::NAN, 0);
    for (i, l) in levels.iter().enumerate() {
        let v = l.norm * (-t * l.lambda).exp();
        if v > best.0 {
            best = (v, l.lambda, i);
        }
    }
    GrowthBound {
        t,
        c: best.0.max(0.0) * (1.0 + 1e-9) + f64::MIN_POSITIVE,
        argmax_lambda: best.1,
        interior: best.2 + 1 < levels.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedBlockOperator {
    pub operator: BlockOperator,
    pub domain: Domain,
    pub growth: GrowthReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnboundedBlockOperatorJson {
    #[serde(flatten)]
    pub operator: BlockOperatorJson,
    pub domain: Domain,
    pub growth: GrowthReport,
}

impl From<&UnboundedBlockOperator> for UnboundedBlockOperatorJson {
    fn from(u: &UnboundedBlockOperator) -> Self {
        UnboundedBlockOperatorJson {
            operator: (&u.operator).into(),
            domain: u.domain,
            growth: u.growth.clone(),
        }
    }
}

fn lorentz_weight(label: Label) -> Result<impl Fn(&Level) -> Complex64> {
    let zeta = match label {
        Label::Imaginary(z) => z,
        Label::Zero => 0.0,
        Label::Volume(s) => return Err(Error::VolumeLabel(format!("label {s} has positive real part; use eval"))),
    };
    Ok(move |l: &Level| if zeta == 0.0 { ONE } else { Complex64::new(0.0, -zeta * l.lambda).exp() })
}

/// Evaluates a bordism with imaginary or zero labels on every level up to `lambda_max`.
pub fn eval_lorentzian(vft: &SpectralVft, x: &Bordism, lambda_max: f64) -> Result<UnboundedBlockOperator> {
    check_bordism(x)?;
    if x.components.iter().any(|c| c.is_closed()) {
        return Err(Error::ClosedLorentzian);
    }
    let mut terms = Vec::with_capacity(x.components.len());
    for comp in &x.components {
        terms.push(component_terms(vft, comp, lambda_max, lorentz_weight(comp.label)?));
    }
    let kept = vft.count_upto(lambda_max);
    let mut norms = vec![0.0f64; kept];
    for (comp, t) in x.components.iter().zip(&terms) {
        for (level, m) in t {
            norms[*level] = norms[*level].max(term_norm(vft, comp, *level, m));
        }
    }
    let (blocks, scalar) = assemble(vft, x, &terms)?;
    let bounded = x.components.iter().all(|c| c.is_cylinder());
    let complete = vft.is_complete() && kept == vft.len();
    let operator = BlockOperator {
        n_in: x.n_in,
        n_out: x.n_out,
        lambdas: vft.levels().iter().map(|l| l.lambda).collect(),
        dims: vft.levels().iter().map(Level::dim).collect(),
        blocks,
        scalar,
        lambda_max,
        tail_bound: if complete { 0.0 } else { f64::INFINITY },
        bounded,
    };
    let growth = GrowthReport::from_norms(
        norms
            .into_iter()
            .enumerate()
            .map(|(i, norm)| LevelNorm {
                lambda: vft.level(i).lambda,
                norm,
            })
            .collect(),
    );
    Ok(UnboundedBlockOperator {
        operator,
        domain: if bounded { Domain::Hilbert } else { Domain::CheckSpace },
        growth,
    })
}

/// `max_λ ‖B_λ† B_λ − 1‖` for the cylinder with label `iζ`.
pub fn unitarity_defect(vft: &SpectralVft, zeta: f64, lambda_max: f64) -> Result<f64> {
    let op = eval_lorentzian(vft, &Bordism::cylinder(Label::Imaginary(zeta)), lambda_max)?.operator;
    let gram_square = op.adjoint(vft).then(&op, vft)?;
    Ok(gram_square
        .blocks
        .iter()
        .map(|b| op_norm(&(&b.matrix - CMat::identity(b.matrix.nrows(), b.matrix.ncols()))))
        .fold(0.0, f64::max))
}

/// The restriction to zero labels: blocks are the bare `F_λ`.
pub fn short_distance_l0(vft: &SpectralVft, x: &Bordism) -> Result<UnboundedBlockOperator> {
    eval_lorentzian(vft, &x.relabeled(|_| Label::Zero), vft.max_lambda())
}

/// All eigenvalues moved down by `shift`.
pub fn shift_spectrum(vft: &SpectralVft, shift: f64) -> SpectralVft {
    vft.shifted(shift)
}

/// The ground-level topological theory: `X` evaluated on the kernel block only.
/// Closed components are allowed here.
pub fn long_distance_linf(vft: &SpectralVft, x: &Bordism) -> Result<BlockOperator> {
    check_bordism(x)?;
    if vft.ground() != 0.0 {
        return Err(Error::GroundNotZero(vft.ground()));
    }
    eval_with_cutoff(&vft.truncated(1), &x.relabeled(|_| Label::Zero), 0.0)
}

/// Residual between `X` with collars `s_in`, `s_out` glued on and
/// `e^{-s_out H} ∘ L₀(X) ∘ e^{-s_in H}` assembled blockwise.
pub fn factorization_check(vft: &SpectralVft, x: &Bordism, s_in: &[Complex64], s_out: &[Complex64]) -> Result<f64> {
    if s_in.len() != x.n_in || s_out.len() != x.n_out {
        return Err(Error::Precondition(format!(
            "need {} incoming and {} outgoing collars, got {} and {}",
            x.n_in,
            x.n_out,
            s_in.len(),
            s_out.len()
        )));
    }
    if s_in.iter().chain(s_out).any(|s| !(s.re > 0.0)) {
        return Err(Error::Precondition("collar volumes need positive real part".into()));
    }
    let collars = |ss: &[Complex64]| {
        ss.iter()
            .fold(Bordism::empty(), |acc, &s| acc.monoidal(&Bordism::cylinder(Label::Volume(s))))
    };
    let glued = collars(s_in)
        .compose(&x.relabeled(|_| Label::Zero))?
        .compose(&collars(s_out))?;
    let direct = eval_with_cutoff(vft, &glued, vft.max_lambda())?;
    let bare = short_distance_l0(vft, x)?.operator;
    let lambdas = &bare.lambdas;
    let blocks = bare
        .blocks
        .iter()
        .map(|b| {
            let damp_in: Complex64 = b.in_levels.iter().zip(s_in).map(|(&l, s)| (-s * lambdas[l]).exp()).product();
            let damp_out: Complex64 = b.out_levels.iter().zip(s_out).map(|(&l, s)| (-s * lambdas[l]).exp()).product();
            Block {
                in_levels: b.in_levels.clone(),
                out_levels: b.out_levels.clone(),
                matrix: &b.matrix * (damp_in * damp_out),
            }
        })
        .collect();
    let factored = BlockOperator { blocks, ..bare };
    Ok(max_block_diff(&direct, &factored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{FrobeniusAlgebra, DEFAULT_TOL};
    use crate::linalg::{c, max_abs_diff, ZERO};

    fn su2(levels: usize) -> SpectralVft {
        let entries = (0..levels)
            .map(|m| {
                let j = m as f64 / 2.0;
                (j * (j + 1.0), FrobeniusAlgebra::character_block(m as u64 + 1))
            })
            .collect();
        SpectralVft::new(entries, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn zero_cylinder_is_identity() {
        let v = su2(5);
        let u = eval_lorentzian(&v, &Bordism::cylinder(Label::Imaginary(0.0)), 100.0).unwrap();
        for b in &u.operator.blocks {
            assert_eq!(b.matrix, CMat::identity(1, 1));
        }
        assert_eq!(u.domain, Domain::Hilbert);
    }

    #[test]
    fn cylinder_phases_are_unitary() {
        let v = su2(12);
        let u = eval_lorentzian(&v, &Bordism::cylinder(Label::Imaginary(3.7)), 100.0).unwrap();
        for (k, l) in v.levels().iter().enumerate() {
            let z = u.operator.uniform_block(k).unwrap()[(0, 0)];
            assert!((z - Complex64::new(0.0, -3.7 * l.lambda).exp()).norm() < 1e-15);
        }
        assert!(unitarity_defect(&v, 3.7, 100.0).unwrap() < 1e-12);
        assert_eq!(unitarity_defect(&v, 0.0, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn phase_group_law() {
        let v = su2(10);
        let a = eval_lorentzian(&v, &Bordism::cylinder(Label::Imaginary(1.3)), 100.0).unwrap().operator;
        let b = eval_lorentzian(&v, &Bordism::cylinder(Label::Imaginary(-0.4)), 100.0).unwrap().operator;
        let ab = eval_lorentzian(&v, &Bordism::cylinder(Label::Imaginary(0.9)), 100.0).unwrap().operator;
        assert!(max_block_diff(&a.then(&b, &v).unwrap(), &ab) < 1e-12);
    }

    #[test]
    fn pants_growth_report() {
        let v = su2(30);
        let u = eval_lorentzian(&v, &Bordism::pants(Label::Imaginary(0.5)), 1000.0).unwrap();
        assert_eq!(u.domain, Domain::CheckSpace);
        assert!(!u.operator.bounded);
        // ‖m_λ‖ in the Gram norm is 1/d for a character block
        for (k, l) in u.growth.levels.iter().enumerate() {
            assert!((l.norm - 1.0 / (k as f64 + 1.0)).abs() < 1e-12);
        }
        let b = u.growth.bound(0.1).unwrap();
        assert!(u.growth.holds(b));
    }

    #[test]
    fn closed_and_volume_rejected() {
        let v = su2(3);
        assert!(matches!(
            eval_lorentzian(&v, &Bordism::closed(1, Label::Imaginary(1.0)), 10.0),
            Err(Error::ClosedLorentzian)
        ));
        assert!(matches!(
            eval_lorentzian(&v, &Bordism::cylinder(Label::volume(1.0, 0.0)), 10.0),
            Err(Error::VolumeLabel(_))
        ));
    }

    #[test]
    fn short_distance_values() {
        let v = su2(4);
        let id = short_distance_l0(&v, &Bordism::cylinder(Label::Imaginary(2.0))).unwrap();
        assert!(id.operator.blocks.iter().all(|b| b.matrix == CMat::identity(1, 1)));
        let disk = short_distance_l0(&v, &Bordism::disk(Label::Zero)).unwrap();
        for k in 0..4 {
            let theta = disk.operator.block(&[k], &[]).unwrap().matrix[(0, 0)];
            assert!((theta.re - (k as f64 + 1.0)).abs() < 1e-12);
        }
        let t = short_distance_l0(&SpectralVft::trivial(), &Bordism::pants(Label::Zero)).unwrap();
        assert!((t.operator.blocks[0].matrix[(0, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn long_distance() {
        let v = su2(6);
        for g in 0..4 {
            let z = long_distance_linf(&v, &Bordism::closed(g, Label::volume(1.0, 0.0))).unwrap();
            assert!((z.as_scalar().unwrap() - ONE).norm() < 1e-12);
        }
        assert!(matches!(
            long_distance_linf(&v.shifted(-1.0), &Bordism::pants(Label::Zero)),
            Err(Error::GroundNotZero(_))
        ));
        // two 1-dim blocks at the kernel: blockwise multiplication
        let kernel = FrobeniusAlgebra::direct_sum(&[FrobeniusAlgebra::trivial(), FrobeniusAlgebra::character_block(2)]).unwrap();
        let w = SpectralVft::new(vec![(0.0, kernel), (1.0, FrobeniusAlgebra::trivial())], DEFAULT_TOL).unwrap();
        let p = long_distance_linf(&w, &Bordism::pants(Label::Zero)).unwrap();
        assert_eq!(p.blocks.len(), 1);
        let expect = CMat::from_row_slice(2, 4, &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, c(0.5, 0.0)]);
        assert!(max_abs_diff(&p.blocks[0].matrix, &expect) < 1e-14);
    }

    #[test]
    fn factorization() {
        let v = su2(8);
        let s = c(0.7, 0.2);
        assert!(factorization_check(&v, &Bordism::cylinder(Label::Zero), &[s], &[c(0.3, -0.2)]).unwrap() < 1e-12);
        let r = factorization_check(&v, &Bordism::pants(Label::Zero), &[c(0.5, 0.0), c(0.5, 0.0)], &[c(0.5, 0.0)]);
        assert!(r.unwrap() < 1e-10);
        assert!(factorization_check(&v, &Bordism::codisk(Label::Zero), &[], &[s]).unwrap() < 1e-12);
        assert!(factorization_check(&v, &Bordism::disk(Label::Zero), &[s], &[]).unwrap() < 1e-12);
    }

    #[test]
    fn shift_composes() {
        let v = su2(3);
        assert_eq!(shift_spectrum(&v, 0.0).ground(), 0.0);
        let w = shift_spectrum(&shift_spectrum(&v, 0.25), 0.5);
        assert_eq!(w.ground(), -0.75);
        assert_eq!(shift_spectrum(&w, w.ground()).ground(), 0.0);
    }
}
