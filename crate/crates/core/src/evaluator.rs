//! Evaluation of labeled bordisms on a spectral theory.
//!
//! Each connected component with label `s` contributes `Σ_λ e^{-sλ} F_λ`,
//! where `F_λ` is the topological value on the level-λ Frobenius block. A
//! component forces all of its circles onto one level, so the operator splits
//! into blocks keyed by one level per boundary circle; off-level couplings are
//! identically zero and never stored. Closed components contribute scalars.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bordism::{Bordism, Component, Label};
use crate::error::{Error, Result};
use crate::frobenius::FrobeniusAlgebra;
use crate::json::{self, Pair};
use crate::linalg::{digits, kron, kron_power, op_norm, undigits, CMat, ONE, ZERO};
use crate::spectral::{Level, MapCounts, SpectralVft};

/// Hard cap on stored block count; larger operators are refused.
pub const MAX_BLOCKS: usize = 1 << 20;

/// One level assignment: `matrix` maps `⊗ A_{in_levels}` to `⊗ A_{out_levels}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub in_levels: Vec<usize>,
    pub out_levels: Vec<usize>,
    pub matrix: CMat,
}

impl Block {
    /// The common level when every circle sits on it.
    pub fn uniform_level(&self) -> Option<usize> {
        let mut it = self.in_levels.iter().chain(&self.out_levels);
        let first = *it.next()?;
        it.all(|&l| l == first).then_some(first)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub n_in: usize,
    pub n_out: usize,
    /// Eigenvalue of every level of the source theory, indexed like `Block` levels.
    pub lambdas: Vec<f64>,
    pub dims: Vec<usize>,
    pub blocks: Vec<Block>,
    /// Product of the closed-component values, already folded into `blocks`.
    pub scalar: Complex64,
    pub lambda_max: f64,
    /// Operator-norm bound on everything the truncation discards; infinite when
    /// no certificate exists (zero labels on an incomplete spectrum).
    pub tail_bound: f64,
    pub bounded: bool,
}

impl BlockOperator {
    pub fn block(&self, in_levels: &[usize], out_levels: &[usize]) -> Option<&Block> {
        self.blocks
            .iter()
            .find(|b| b.in_levels == in_levels && b.out_levels == out_levels)
    }

    /// Block with every circle on `level`.
    pub fn uniform_block(&self, level: usize) -> Option<&CMat> {
        self.block(&vec![level; self.n_in], &vec![level; self.n_out])
            .map(|b| &b.matrix)
    }

    /// The 1×1 value of an operator between empty boundaries.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.n_in == 0 && self.n_out == 0).then(|| self.blocks.first().map_or(ZERO, |b| b.matrix[(0, 0)]))
    }

    fn keyed(&self) -> BTreeMap<(Vec<usize>, Vec<usize>), &CMat> {
        self.blocks
            .iter()
            .map(|b| ((b.in_levels.clone(), b.out_levels.clone()), &b.matrix))
            .collect()
    }

    /// Sum of block operator norms in Gram-orthonormal coordinates.
    pub fn norm_sum(&self, vft: &SpectralVft) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let r_out = slot_kron(vft, &b.out_levels, |l| l.orthonormalizer.clone());
                let r_in_inv = slot_kron(vft, &b.in_levels, |l| {
                    l.orthonormalizer.clone().try_inverse().expect("orthonormalizer is invertible")
                });
                op_norm(&(r_out * &b.matrix * r_in_inv))
            })
            .sum()
    }

    /// `next ∘ self`, matching intermediate level assignments.
    pub fn then(&self, next: &BlockOperator, vft: &SpectralVft) -> Result<BlockOperator> {
        if self.n_out != next.n_in {
            return Err(Error::Arity {
                left: self.n_out,
                right: next.n_in,
            });
        }
        if self.lambdas != next.lambdas {
            return Err(Error::Precondition("operators come from different theories".into()));
        }
        let mut acc: BTreeMap<(Vec<usize>, Vec<usize>), CMat> = BTreeMap::new();
        for a in &self.blocks {
            for b in next.blocks.iter().filter(|b| b.in_levels == a.out_levels) {
                let prod = &b.matrix * &a.matrix;
                acc.entry((a.in_levels.clone(), b.out_levels.clone()))
                    .and_modify(|m| *m += &prod)
                    .or_insert(prod);
            }
        }
        let (nx, ny) = (self.norm_sum(vft), next.norm_sum(vft));
        let tail = if self.tail_bound == 0.0 && next.tail_bound == 0.0 {
            0.0
        } else {
            next.tail_bound * (nx + self.tail_bound) + ny * self.tail_bound
        };
        Ok(BlockOperator {
            n_in: self.n_in,
            n_out: next.n_out,
            lambdas: self.lambdas.clone(),
            dims: self.dims.clone(),
            blocks: acc
                .into_iter()
                .map(|((i, o), matrix)| Block {
                    in_levels: i,
                    out_levels: o,
                    matrix,
                })
                .collect(),
            scalar: self.scalar * next.scalar,
            lambda_max: self.lambda_max.min(next.lambda_max),
            tail_bound: tail,
            bounded: self.bounded && next.bounded,
        })
    }

    /// Tensor product; `other`'s circles follow `self`'s.
    pub fn tensor(&self, other: &BlockOperator) -> BlockOperator {
        let mut blocks = Vec::with_capacity(self.blocks.len() * other.blocks.len());
        for a in &self.blocks {
            for b in &other.blocks {
                blocks.push(Block {
                    in_levels: [a.in_levels.clone(), b.in_levels.clone()].concat(),
                    out_levels: [a.out_levels.clone(), b.out_levels.clone()].concat(),
                    matrix: kron(&a.matrix, &b.matrix),
                });
            }
        }
        blocks.sort_by(|x, y| (&x.in_levels, &x.out_levels).cmp(&(&y.in_levels, &y.out_levels)));
        BlockOperator {
            n_in: self.n_in + other.n_in,
            n_out: self.n_out + other.n_out,
            lambdas: self.lambdas.clone(),
            dims: self.dims.clone(),
            blocks,
            scalar: self.scalar * other.scalar,
            lambda_max: self.lambda_max.min(other.lambda_max),
            // exact only when neither side discards anything
            tail_bound: if self.tail_bound == 0.0 && other.tail_bound == 0.0 { 0.0 } else { f64::INFINITY },
            bounded: self.bounded && other.bounded,
        }
    }

    /// Hermitian adjoint with respect to the Gram inner products of the blocks.
    pub fn adjoint(&self, vft: &SpectralVft) -> BlockOperator {
        let mut blocks: Vec<Block> = self
            .blocks
            .iter()
            .map(|b| {
                let g_in_inv = slot_kron(vft, &b.in_levels, |l| {
                    gram(l).try_inverse().expect("Gram matrix is invertible")
                });
                let g_out = slot_kron(vft, &b.out_levels, gram);
                Block {
                    in_levels: b.out_levels.clone(),
                    out_levels: b.in_levels.clone(),
                    matrix: g_in_inv * b.matrix.adjoint() * g_out,
                }
            })
            .collect();
        blocks.sort_by(|x, y| (&x.in_levels, &x.out_levels).cmp(&(&y.in_levels, &y.out_levels)));
        BlockOperator {
            n_in: self.n_out,
            n_out: self.n_in,
            lambdas: self.lambdas.clone(),
            dims: self.dims.clone(),
            blocks,
            scalar: self.scalar.conj(),
            lambda_max: self.lambda_max,
            tail_bound: self.tail_bound,
            bounded: self.bounded,
        }
    }
}

fn gram(l: &Level) -> CMat {
    l.orthonormalizer.adjoint() * &l.orthonormalizer
}

fn slot_kron(vft: &SpectralVft, levels: &[usize], f: impl Fn(&Level) -> CMat) -> CMat {
    levels
        .iter()
        .fold(CMat::identity(1, 1), |acc, &l| kron(&acc, &f(vft.level(l))))
}

/// Largest blockwise operator-norm difference; missing blocks count as zero.
pub fn max_block_diff(a: &BlockOperator, b: &BlockOperator) -> f64 {
    let (ka, kb) = (a.keyed(), b.keyed());
    let mut worst = 0.0f64;
    for (key, ma) in &ka {
        worst = worst.max(match kb.get(key) {
            Some(mb) if ma.shape() == mb.shape() => op_norm(&(*ma - *mb)),
            Some(_) => f64::INFINITY,
            None => op_norm(ma),
        });
    }
    for (key, mb) in &kb {
        if !ka.contains_key(key) {
            worst = worst.max(op_norm(mb));
        }
    }
    worst
}

/// `W_{n_out} ∘ h^g ∘ M_{n_in}` from precomputed structure maps.
fn tqft_matrix(
    unit: &CMat,
    mult: &CMat,
    coproduct: &CMat,
    handle: &CMat,
    trace: &CMat,
    genus: u32,
    n_in: usize,
    n_out: usize,
) -> CMat {
    let d = unit.nrows();
    let id = CMat::identity(d, d);
    let merge = match n_in {
        0 => unit.clone(),
        _ => (1..n_in).fold(id.clone(), |acc, _| mult * kron(&acc, &id)),
    };
    let split = match n_out {
        0 => trace.clone(),
        _ => (1..n_out).fold(id.clone(), |acc, _| kron(&acc, &id) * coproduct),
    };
    let mut body = merge;
    for _ in 0..genus {
        body = handle * body;
    }
    split * body
}

/// The topological value of a connected genus-`genus` surface with the given boundary.
pub fn eval_component_tqft(a: &FrobeniusAlgebra, genus: u32, n_in: usize, n_out: usize) -> Result<CMat> {
    let unit = CMat::from_column_slice(a.dim(), 1, &a.unit()?);
    Ok(tqft_matrix(
        &unit,
        &a.mult_matrix(),
        &a.coproduct()?,
        &a.handle()?,
        &a.trace_row(),
        genus,
        n_in,
        n_out,
    ))
}

pub(crate) fn level_tqft(level: &Level, genus: u32, n_in: usize, n_out: usize) -> CMat {
    tqft_matrix(
        &level.unit,
        &level.mult,
        &level.coproduct,
        &level.handle,
        &level.trace,
        genus,
        n_in,
        n_out,
    )
}

/// Weighted per-level values of one component: `(level index, factor · F_λ)`.
pub(crate) type ComponentTerms = Vec<(usize, CMat)>;

pub(crate) fn component_terms(
    vft: &SpectralVft,
    comp: &Component,
    lambda_max: f64,
    weight: impl Fn(&Level) -> Complex64,
) -> ComponentTerms {
    let genus = comp.genus as u32;
    vft.levels()
        .iter()
        .enumerate()
        .take_while(|(_, l)| l.lambda <= lambda_max)
        .map(|(i, l)| (i, level_tqft(l, genus, comp.inputs.len(), comp.outputs.len()) * weight(l)))
        .collect()
}

/// Gram-orthonormal operator norm of one component term.
pub(crate) fn term_norm(vft: &SpectralVft, comp: &Component, level: usize, m: &CMat) -> f64 {
    let r = &vft.level(level).orthonormalizer;
    let r_inv = r.clone().try_inverse().expect("orthonormalizer is invertible");
    op_norm(&(kron_power(r, comp.outputs.len()) * m * kron_power(&r_inv, comp.inputs.len())))
}

/// Wires per-component terms into blocks. Closed components are summed into a scalar.
pub(crate) fn assemble(vft: &SpectralVft, x: &Bordism, terms: &[ComponentTerms]) -> Result<(Vec<Block>, Complex64)> {
    let dims: Vec<usize> = vft.levels().iter().map(Level::dim).collect();
    let mut scalar = ONE;
    let mut open = Vec::new();
    for (comp, t) in x.components.iter().zip(terms) {
        if comp.is_closed() {
            scalar *= t.iter().map(|(_, m)| m[(0, 0)]).sum::<Complex64>();
        } else {
            open.push((comp, t));
        }
    }
    let count = open
        .iter()
        .try_fold(1usize, |acc, (_, t)| acc.checked_mul(t.len()))
        .unwrap_or(usize::MAX);
    if count > MAX_BLOCKS {
        return Err(Error::Precondition(format!("operator would need {count} blocks")));
    }
    if count == 0 {
        return Ok((Vec::new(), scalar));
    }
    let mut blocks = Vec::with_capacity(count);
    let mut choice = vec![0usize; open.len()];
    loop {
        let mut in_levels = vec![0; x.n_in];
        let mut out_levels = vec![0; x.n_out];
        for ((comp, t), &k) in open.iter().zip(&choice) {
            let level = t[k].0;
            comp.inputs.iter().for_each(|&s| in_levels[s] = level);
            comp.outputs.iter().for_each(|&s| out_levels[s] = level);
        }
        let in_radix: Vec<usize> = in_levels.iter().map(|&l| dims[l]).collect();
        let out_radix: Vec<usize> = out_levels.iter().map(|&l| dims[l]).collect();
        let rows: usize = out_radix.iter().product();
        let cols: usize = in_radix.iter().product();
        let row_digits: Vec<Vec<usize>> = (0..rows).map(|r| digits(r, &out_radix)).collect();
        let col_digits: Vec<Vec<usize>> = (0..cols).map(|c| digits(c, &in_radix)).collect();
        let mut matrix = CMat::zeros(rows, cols);
        for (r, rd) in row_digits.iter().enumerate() {
            for (c, cd) in col_digits.iter().enumerate() {
                let mut v = scalar;
                for ((comp, t), &k) in open.iter().zip(&choice) {
                    let (level, m) = &t[k];
                    let d = dims[*level];
                    let oi: Vec<usize> = comp.outputs.iter().map(|&s| rd[s]).collect();
                    let ii: Vec<usize> = comp.inputs.iter().map(|&s| cd[s]).collect();
                    v *= m[(undigits(&oi, &vec![d; oi.len()]), undigits(&ii, &vec![d; ii.len()]))];
                    if v == ZERO {
                        break;
                    }
                }
                matrix[(r, c)] = v;
            }
        }
        blocks.push(Block {
            in_levels,
            out_levels,
            matrix,
        });
        // odometer, last component fastest
        let mut pos = open.len();
        loop {
            if pos == 0 {
                blocks.sort_by(|a, b| (&a.in_levels, &a.out_levels).cmp(&(&b.in_levels, &b.out_levels)));
                return Ok((blocks, scalar));
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < open[pos].1.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Best available tail bound for one component truncated at `cut`.
pub(crate) fn component_tail(vft: &SpectralVft, comp: &Component, cut: f64) -> f64 {
    if cut >= vft.max_lambda() && vft.is_complete() {
        return 0.0;
    }
    let Label::Volume(s) = comp.label else {
        return f64::INFINITY;
    };
    let Some(bound) = vft.spectrum_bound() else {
        // complete spectrum, levels above `cut` are known
        return vft
            .levels()
            .iter()
            .filter(|l| l.lambda > cut)
            .map(|l| (-s * l.lambda).exp().norm() * level_norm_bound(l, comp))
            .sum();
    };
    let cut = cut.min(bound);
    let counts = MapCounts::for_surface(comp.genus as u32, comp.inputs.len(), comp.outputs.len());
    let depth = counts.depth();
    if depth == 0 {
        let cert = vft.check_growth(1.0);
        return vft.tail_majorant_split(&cert, counts, s.re, cut);
    }
    (1..48)
        .map(|k| s.re / depth as f64 * k as f64 / 48.0)
        .map(|t| vft.tail_majorant_split(&vft.check_growth(t), counts, s.re, cut))
        .fold(f64::INFINITY, f64::min)
}

fn level_norm_bound(l: &Level, comp: &Component) -> f64 {
    let counts = MapCounts::for_surface(comp.genus as u32, comp.inputs.len(), comp.outputs.len());
    let m = l.norms.mult.max(l.norms.coproduct);
    let t = l.norms.trace.max(l.norms.unit);
    m.powi(counts.mult as i32) * t.powi(counts.trace as i32)
}

fn combine_tails(norms: &[f64], tails: &[f64]) -> f64 {
    if tails.iter().all(|&t| t == 0.0) {
        return 0.0;
    }
    if tails.iter().any(|t| !t.is_finite()) {
        return f64::INFINITY;
    }
    let full: f64 = norms.iter().zip(tails).map(|(n, t)| n + t).product();
    let kept: f64 = norms.iter().product();
    (full - kept).max(tails.iter().cloned().fold(0.0, f64::max))
}

fn weight_for(label: Label) -> Result<impl Fn(&Level) -> Complex64> {
    let s = match label {
        Label::Volume(s) => s,
        Label::Zero => ZERO,
        Label::Imaginary(_) => return Err(Error::ImaginaryLabel),
    };
    Ok(move |l: &Level| if s == ZERO { ONE } else { (-s * l.lambda).exp() })
}

pub(crate) fn check_bordism(x: &Bordism) -> Result<()> {
    let report = x.validate();
    if !report.passed {
        let msgs: Vec<String> = report
            .failures()
            .map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default()))
            .collect();
        return Err(Error::InvalidBordism(msgs.join("; ")));
    }
    Ok(())
}

fn build(vft: &SpectralVft, x: &Bordism, cutoffs: &[f64]) -> Result<BlockOperator> {
    check_bordism(x)?;
    let mut terms = Vec::with_capacity(x.components.len());
    for (comp, &cut) in x.components.iter().zip(cutoffs) {
        terms.push(component_terms(vft, comp, cut, weight_for(comp.label)?));
    }
    let norms: Vec<f64> = x
        .components
        .iter()
        .zip(&terms)
        .map(|(comp, t)| t.iter().map(|(l, m)| term_norm(vft, comp, *l, m)).sum())
        .collect();
    let tails: Vec<f64> = x
        .components
        .iter()
        .zip(cutoffs)
        .map(|(comp, &cut)| component_tail(vft, comp, cut))
        .collect();
    let (blocks, scalar) = assemble(vft, x, &terms)?;
    let tail_bound = combine_tails(&norms, &tails);
    Ok(BlockOperator {
        n_in: x.n_in,
        n_out: x.n_out,
        lambdas: vft.levels().iter().map(|l| l.lambda).collect(),
        dims: vft.levels().iter().map(Level::dim).collect(),
        blocks,
        scalar,
        lambda_max: cutoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(vft.ground()),
        tail_bound,
        bounded: tail_bound.is_finite(),
    })
}

/// Evaluates on every stored level with `λ ≤ lambda_max`; the tail bound is
/// whatever can be certified there (possibly infinite).
pub fn eval_with_cutoff(vft: &SpectralVft, x: &Bordism, lambda_max: f64) -> Result<BlockOperator> {
    build(vft, x, &vec![lambda_max; x.components.len()])
}

/// Evaluates with a truncation whose discarded part is certified below `eps`.
///
/// Zero-labeled components are kept over the whole stored spectrum; on an
/// incomplete spectrum they make the tail uncertifiable, reported as infinity.
pub fn eval(vft: &SpectralVft, x: &Bordism, eps: f64) -> Result<BlockOperator> {
    check_bordism(x)?;
    if x.components.iter().any(|c| matches!(c.label, Label::Imaginary(_))) {
        return Err(Error::ImaginaryLabel);
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    let volume: Vec<usize> = (0..x.components.len())
        .filter(|&i| matches!(x.components[i].label, Label::Volume(_)))
        .collect();
    let mut cutoffs = vec![vft.max_lambda(); x.components.len()];
    let mut share = eps / volume.len().max(1) as f64;
    for _ in 0..12 {
        for &i in &volume {
            let comp = &x.components[i];
            let Label::Volume(s) = comp.label else { unreachable!() };
            let counts = MapCounts::for_surface(comp.genus as u32, comp.inputs.len(), comp.outputs.len());
            cutoffs[i] = vft.certify_split(counts, s.re, share)?.1.lambda_max;
        }
        let op = build(vft, x, &cutoffs)?;
        if op.tail_bound <= eps || !op.tail_bound.is_finite() {
            return Ok(op);
        }
        share *= 0.5 * eps / op.tail_bound;
    }
    Err(Error::Certification(format!("could not split tolerance {eps:e} across components")))
}

/// Closed genus-`genus` surface with volume `s`.
pub fn partition_function(vft: &SpectralVft, genus: u32, s: Complex64, eps: f64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::Precondition(format!("Re(s) = {} must be positive", s.re)));
    }
    Ok(partition_function_certified(vft, genus, s, eps)?.0)
}

/// Value together with its certified tail bound.
pub fn partition_function_certified(vft: &SpectralVft, genus: u32, s: Complex64, eps: f64) -> Result<(Complex64, f64)> {
    let op = eval(vft, &Bordism::closed(genus as i64, Label::Volume(s)), eps)?;
    Ok((op.as_scalar().unwrap_or(ZERO), op.tail_bound))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupReport {
    pub residual: f64,
    /// `‖V V† − V† V‖` when `s' = conj(s)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normality: Option<f64>,
    pub tail_bound: f64,
}

/// `max_λ ‖V(s)V(s') − V(s+s')‖` over the stored spectrum.
pub fn check_semigroup(vft: &SpectralVft, s: Complex64, s2: Complex64) -> Result<SemigroupReport> {
    if !(s.re > 0.0 && s2.re > 0.0) {
        return Err(Error::Precondition("semigroup check needs Re(s), Re(s') > 0".into()));
    }
    let top = vft.max_lambda();
    let a = eval_with_cutoff(vft, &Bordism::cylinder(Label::Volume(s)), top)?;
    let b = eval_with_cutoff(vft, &Bordism::cylinder(Label::Volume(s2)), top)?;
    let ab = eval_with_cutoff(vft, &Bordism::cylinder(Label::Volume(s + s2)), top)?;
    let residual = max_block_diff(&a.then(&b, vft)?, &ab);
    let normality = (s2 == s.conj()).then(|| {
        let adj = a.adjoint(vft);
        let left = adj.then(&a, vft).expect("same theory");
        let right = a.then(&adj, vft).expect("same theory");
        max_block_diff(&left, &right)
    });
    Ok(SemigroupReport {
        residual,
        normality,
        tail_bound: a.tail_bound + b.tail_bound + ab.tail_bound,
    })
}

/// Residual between `V(dual X, conj s)` and the Gram adjoint of `V(X, s)` on the stored spectrum.
pub fn check_adjoint(vft: &SpectralVft, x: &Bordism) -> Result<f64> {
    if x.components.iter().any(|c| matches!(c.label, Label::Imaginary(_))) {
        return Err(Error::ImaginaryLabel);
    }
    let top = vft.max_lambda();
    let forward = eval_with_cutoff(vft, x, top)?;
    let reversed = eval_with_cutoff(vft, &x.dual().relabeled(|c| c.label.conj()), top)?;
    Ok(max_block_diff(&reversed, &forward.adjoint(vft)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    pub lambda: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    /// Shared eigenvalue when every circle sits on one level.
    pub lambda: Option<f64>,
    #[serde(rename = "in")]
    pub in_lambdas: Vec<f64>,
    #[serde(rename = "out")]
    pub out_lambdas: Vec<f64>,
    pub matrix: Vec<Vec<Pair>>,
}

/// Wire form: `{"n_in", "n_out", "levels", "blocks": [{"lambda", "in", "out", "matrix"}], ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockOperatorJson {
    pub n_in: usize,
    pub n_out: usize,
    pub levels: Vec<LevelJson>,
    pub blocks: Vec<BlockJson>,
    pub scalar: Pair,
    pub lambda_max: f64,
    /// `null` when no finite bound is certified.
    pub tail_bound: Option<f64>,
    pub bounded: bool,
}

impl From<&BlockOperator> for BlockOperatorJson {
    fn from(op: &BlockOperator) -> Self {
        let lam = |ls: &[usize]| ls.iter().map(|&l| op.lambdas[l]).collect();
        BlockOperatorJson {
            n_in: op.n_in,
            n_out: op.n_out,
            levels: op
                .lambdas
                .iter()
                .zip(&op.dims)
                .map(|(&lambda, &dim)| LevelJson { lambda, dim })
                .collect(),
            blocks: op
                .blocks
                .iter()
                .map(|b| BlockJson {
                    lambda: b.uniform_level().map(|l| op.lambdas[l]),
                    in_lambdas: lam(&b.in_levels),
                    out_lambdas: lam(&b.out_levels),
                    matrix: json::matrix_to_wire(&b.matrix),
                })
                .collect(),
            scalar: json::to_pair(op.scalar),
            lambda_max: op.lambda_max,
            tail_bound: op.tail_bound.is_finite().then_some(op.tail_bound),
            bounded: op.bounded,
        }
    }
}

impl TryFrom<BlockOperatorJson> for BlockOperator {
    type Error = Error;

    fn try_from(j: BlockOperatorJson) -> Result<Self> {
        let index = |x: f64| {
            j.levels
                .iter()
                .position(|l| l.lambda == x)
                .ok_or_else(|| Error::Json(format!("eigenvalue {x} not among the levels")))
        };
        let mut blocks = Vec::with_capacity(j.blocks.len());
        for b in &j.blocks {
            let in_levels = b.in_lambdas.iter().map(|&x| index(x)).collect::<Result<Vec<_>>>()?;
            let out_levels = b.out_lambdas.iter().map(|&x| index(x)).collect::<Result<Vec<_>>>()?;
            let cols: usize = in_levels.iter().map(|&l| j.levels[l].dim).product();
            let matrix =
                json::matrix_from_wire(&b.matrix, cols).ok_or_else(|| Error::Json("ragged block matrix".into()))?;
            blocks.push(Block {
                in_levels,
                out_levels,
                matrix,
            });
        }
        Ok(BlockOperator {
            n_in: j.n_in,
            n_out: j.n_out,
            lambdas: j.levels.iter().map(|l| l.lambda).collect(),
            dims: j.levels.iter().map(|l| l.dim).collect(),
            blocks,
            scalar: json::from_pair(j.scalar),
            lambda_max: j.lambda_max,
            tail_bound: j.tail_bound.unwrap_or(f64::INFINITY),
            bounded: j.bounded,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::DEFAULT_TOL;
    use crate::linalg::{c, max_abs_diff};

    fn su2(levels: usize) -> SpectralVft {
        let entries = (0..levels)
            .map(|m| {
                let j = m as f64 / 2.0;
                (j * (j + 1.0), FrobeniusAlgebra::character_block(m as u64 + 1))
            })
            .collect();
        SpectralVft::new(entries, DEFAULT_TOL).unwrap()
    }

    fn vol(re: f64, im: f64) -> Label {
        Label::volume(re, im)
    }

    #[test]
    fn trivial_algebra_gives_ones() {
        let a = FrobeniusAlgebra::trivial();
        for g in 0..3 {
            for (i, o) in [(0, 0), (1, 0), (0, 2), (2, 3)] {
                let f = eval_component_tqft(&a, g, i, o).unwrap();
                assert_eq!(f.shape(), (1, 1));
                assert!((f[(0, 0)] - ONE).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn character_block_closed_values() {
        for d in 1..6u64 {
            let a = FrobeniusAlgebra::character_block(d);
            for g in 0..4u32 {
                let v = eval_component_tqft(&a, g, 0, 0).unwrap()[(0, 0)];
                let expect = (d as f64).powi(2 - 2 * g as i32);
                assert!((v.re - expect).abs() < 1e-12 * expect, "d={d} g={g}");
            }
        }
    }

    #[test]
    fn z2_pants_is_group_multiplication() {
        let a = FrobeniusAlgebra::z2_group_algebra([ONE, ZERO]);
        let f = eval_component_tqft(&a, 0, 2, 1).unwrap();
        // columns e⊗e, e⊗g, g⊗e, g⊗g
        let expect = CMat::from_row_slice(2, 4, &[ONE, ZERO, ZERO, ONE, ZERO, ONE, ONE, ZERO]);
        assert!(max_abs_diff(&f, &expect) < 1e-14);
    }

    #[test]
    fn trivial_theory_is_one_everywhere() {
        let v = SpectralVft::trivial();
        let x = Bordism::general(1, 2, 1, vol(0.7, 0.3)).monoidal(&Bordism::closed(2, vol(1.0, 0.0)));
        let op = eval(&v, &x, 1e-12).unwrap();
        assert_eq!(op.blocks.len(), 1);
        assert!((op.blocks[0].matrix[(0, 0)] - ONE).norm() < 1e-15);
        assert_eq!(op.tail_bound, 0.0);
        assert!((partition_function(&v, 3, c(2.0, 1.0), 1e-12).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn cylinder_is_diagonal_heat_kernel() {
        let v = su2(6);
        let s = c(0.4, 0.3);
        let op = eval_with_cutoff(&v, &Bordism::cylinder(Label::Volume(s)), 100.0).unwrap();
        assert_eq!(op.blocks.len(), 6);
        for (k, l) in v.levels().iter().enumerate() {
            let b = op.uniform_block(k).unwrap();
            assert!((b[(0, 0)] - (-s * l.lambda).exp()).norm() < 1e-15);
        }
    }

    #[test]
    fn torus_series() {
        // independent double-cutoff summation of Σ_j e^{-j(j+1)}
        let direct: f64 = (0..60).map(|m| (-(m * (m + 2)) as f64 / 4.0).exp()).sum();
        let v = su2(13);
        let z = eval_with_cutoff(&v, &Bordism::closed(1, vol(1.0, 0.0)), 100.0).unwrap();
        assert!((z.as_scalar().unwrap().re - direct).abs() < 1e-12);
        assert!((direct - 1.633_863_1).abs() < 1e-7);
    }

    #[test]
    fn imaginary_labels_rejected() {
        let v = SpectralVft::trivial();
        assert!(matches!(
            eval(&v, &Bordism::cylinder(Label::Imaginary(1.0)), 1e-9),
            Err(Error::ImaginaryLabel)
        ));
    }

    #[test]
    fn semigroup_and_normality() {
        let v = su2(10);
        let r = check_semigroup(&v, c(0.3, 0.2), c(0.7, -0.1)).unwrap();
        assert!(r.residual < 1e-10);
        assert!(r.normality.is_none());
        let r = check_semigroup(&v, c(0.3, 0.2), c(0.3, -0.2)).unwrap();
        assert!(r.normality.unwrap() < 1e-14);
        let t = check_semigroup(&SpectralVft::trivial(), c(1.0, 0.0), c(2.0, 3.0)).unwrap();
        assert_eq!(t.residual, 0.0);
    }

    #[test]
    fn adjoint_relations() {
        let v = su2(8);
        assert!(check_adjoint(&v, &Bordism::cylinder(vol(0.8, 0.0))).unwrap() < 1e-15);
        assert!(check_adjoint(&v, &Bordism::pants(vol(1.0, 1.0))).unwrap() < 1e-10);
        assert!(check_adjoint(&v, &Bordism::disk(vol(0.5, 0.5))).unwrap() < 1e-12);
        // non-orthonormal Gram
        let z2 = SpectralVft::new(
            vec![(0.0, FrobeniusAlgebra::z2_group_algebra([c(2.0, 0.0), c(0.5, 0.0)]))],
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(check_adjoint(&z2, &Bordism::general(1, 2, 1, vol(1.0, 0.3))).unwrap() < 1e-12);
    }

    #[test]
    fn disconnected_codisk_spans_all_levels() {
        let v = su2(4);
        let x = Bordism::cylinder(vol(1.0, 0.0)).monoidal(&Bordism::codisk(vol(1.0, 0.0)));
        let op = eval_with_cutoff(&v, &x, 100.0).unwrap();
        assert_eq!(op.blocks.len(), 16);
        let b = op.block(&[1], &[1, 3]).unwrap();
        let expect = (-0.75f64).exp() * (-3.75f64).exp() * 4.0;
        assert!((b.matrix[(0, 0)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn functoriality_simple() {
        let v = su2(6);
        let x = Bordism::copants(vol(0.3, 0.1));
        let y = Bordism::pants(vol(0.4, -0.2));
        let xy = x.compose(&y).unwrap();
        let lhs = eval_with_cutoff(&v, &xy, 100.0).unwrap();
        let rhs = eval_with_cutoff(&v, &x, 100.0)
            .unwrap()
            .then(&eval_with_cutoff(&v, &y, 100.0).unwrap(), &v)
            .unwrap();
        assert!(max_block_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn certified_cutoff_on_incomplete_spectrum() {
        let v = su2(40).with_spectrum_bound(Some(su2(40).max_lambda()));
        let op = eval(&v, &Bordism::closed(1, vol(1.0, 0.0)), 1e-9).unwrap();
        assert!(op.tail_bound < 1e-9);
        assert!(op.lambda_max < v.max_lambda());
        let zero = eval(&v, &Bordism::cylinder(Label::Zero), 1e-9).unwrap();
        assert!(!zero.bounded);
        assert!(zero.tail_bound.is_infinite());
    }

    #[test]
    fn json_roundtrip() {
        let v = su2(3);
        let op = eval_with_cutoff(&v, &Bordism::copants(vol(0.5, 0.25)), 10.0).unwrap();
        let j = BlockOperatorJson::from(&op);
        let text = serde_json::to_string(&j).unwrap();
        let back = BlockOperator::try_from(serde_json::from_str::<BlockOperatorJson>(&text).unwrap()).unwrap();
        assert_eq!(back, op);
    }
}
