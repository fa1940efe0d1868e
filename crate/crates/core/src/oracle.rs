//! Slow reference implementations used to cross-check the evaluator.
//!
//! Nothing here shares contraction code with `evaluator`: decompositions are
//! contracted piece by piece on explicit tensor-product states, and closed
//! surfaces are summed straight from the algebra data.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bordism::{Bordism, Component, Decomposition, Elementary, Label, Step};
use crate::error::{Error, Result};
use crate::evaluator::{Block, BlockOperator};
use crate::frobenius::FrobeniusAlgebra;
use crate::linalg::{digits, kron, undigits, CMat, ONE, ZERO};
use crate::spectral::{Level, SpectralVft};

fn weight(label: Label, lambda: f64) -> Complex64 {
    match label {
        Label::Volume(s) => (-s * lambda).exp(),
        Label::Imaginary(z) => Complex64::new(0.0, -z * lambda).exp(),
        Label::Zero => ONE,
    }
}

/// `(incoming levels, current levels)` → map from the incoming space to the current one.
type State = BTreeMap<(Vec<usize>, Vec<usize>), CMat>;

fn radices(vft: &SpectralVft, levels: &[usize]) -> Vec<usize> {
    levels.iter().map(|&l| vft.level(l).dim()).collect()
}

fn leg_permutation(vft: &SpectralVft, levels: &[usize], sigma: &[usize]) -> CMat {
    let from = radices(vft, levels);
    let to: Vec<usize> = sigma.iter().map(|&s| from[s]).collect();
    let n: usize = from.iter().product();
    let mut p = CMat::zeros(n, n);
    for x in 0..n {
        let xd = digits(x, &from);
        let yd: Vec<usize> = sigma.iter().map(|&s| xd[s]).collect();
        p[(undigits(&yd, &to), x)] = ONE;
    }
    p
}

fn local_map(a: &FrobeniusAlgebra, piece: &Elementary, lambda: f64) -> Result<CMat> {
    let d = a.dim();
    Ok(match piece {
        Elementary::Pants => a.mult_matrix(),
        Elementary::Copants => a.coproduct()?,
        Elementary::Disk => a.trace_row(),
        Elementary::Codisk => CMat::from_column_slice(d, 1, &a.unit()?),
        Elementary::Cylinder(l) => CMat::identity(d, d) * weight(*l, lambda),
        Elementary::Permutation(_) => unreachable!("handled by the caller"),
    })
}

fn apply_step(vft: &SpectralVft, state: State, step: &Step, kept: usize) -> Result<State> {
    let mut next = State::new();
    let mut add = |key: (Vec<usize>, Vec<usize>), m: CMat| {
        next.entry(key)
            .and_modify(|acc: &mut CMat| *acc += &m)
            .or_insert(m);
    };
    let (a, _) = step.piece.arity();
    for ((ins, cur), m) in state {
        if step.at + a > cur.len() {
            return Err(Error::InvalidBordism(format!("step {step:?} does not fit {} circles", cur.len())));
        }
        if let Elementary::Permutation(sigma) = &step.piece {
            if sigma.len() != cur.len() {
                return Err(Error::InvalidBordism(format!("permutation {sigma:?} on {} circles", cur.len())));
            }
            let p = leg_permutation(vft, &cur, sigma);
            let new: Vec<usize> = sigma.iter().map(|&s| cur[s]).collect();
            add((ins, new), p * m);
            continue;
        }
        let touched = &cur[step.at..step.at + a];
        let choices: Vec<usize> = match touched.first() {
            None => (0..kept).collect(),
            Some(&l) if touched.iter().all(|&t| t == l) => vec![l],
            Some(_) => continue,
        };
        let before: usize = radices(vft, &cur[..step.at]).iter().product();
        let after: usize = radices(vft, &cur[step.at + a..]).iter().product();
        for l in choices {
            let level: &Level = vft.level(l);
            let local = local_map(&level.block, &step.piece, level.lambda)?;
            let full = kron(&kron(&CMat::identity(before, before), &local), &CMat::identity(after, after));
            let (_, b) = step.piece.arity();
            let mut new = cur[..step.at].to_vec();
            new.extend(std::iter::repeat_n(l, b));
            new.extend_from_slice(&cur[step.at + a..]);
            add((ins.clone(), new), full * &m);
        }
    }
    Ok(next)
}

/// Contracts the pieces of `d` left to right on every level with `λ ≤ lambda_max`.
///
/// The result has no tail bound (reported as infinite) and `scalar` is only
/// meaningful for closed bordisms.
pub fn brute_contract(vft: &SpectralVft, d: &Decomposition, lambda_max: f64) -> Result<BlockOperator> {
    let widths = d.widths()?;
    let kept = vft.count_upto(lambda_max);
    let mut state = State::new();
    let mut odometer = vec![0usize; d.n_in];
    if kept > 0 || d.n_in == 0 {
        loop {
            let n: usize = radices(vft, &odometer).iter().product();
            state.insert((odometer.clone(), odometer.clone()), CMat::identity(n, n));
            let Some(pos) = (0..d.n_in).rev().find(|&i| odometer[i] + 1 < kept) else { break };
            odometer[pos] += 1;
            odometer[pos + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    for step in &d.steps {
        state = apply_step(vft, state, step, kept)?;
    }
    let n_out = *widths.last().unwrap();
    let blocks: Vec<Block> = state
        .into_iter()
        .map(|((in_levels, out_levels), matrix)| Block {
            in_levels,
            out_levels,
            matrix,
        })
        .collect();
    let scalar = if d.n_in == 0 && n_out == 0 {
        blocks.first().map_or(ZERO, |b| b.matrix[(0, 0)])
    } else {
        ONE
    };
    Ok(BlockOperator {
        n_in: d.n_in,
        n_out,
        lambdas: vft.levels().iter().map(|l| l.lambda).collect(),
        dims: vft.levels().iter().map(Level::dim).collect(),
        blocks,
        scalar,
        lambda_max,
        tail_bound: f64::INFINITY,
        bounded: false,
    })
}

/// `Σ_λ e^{-sλ} θ_λ(H_λ^g)` with `H = m(Δ(1))` the handle element.
pub fn closed_form_genus(vft: &SpectralVft, genus: u32, s: Complex64) -> Result<Complex64> {
    let mut total = ZERO;
    for level in vft.levels() {
        let a = &level.block;
        let unit = a.unit()?;
        let split = a.coproduct()? * CMat::from_column_slice(unit.len(), 1, &unit);
        let handle: Vec<Complex64> = (a.mult_matrix() * split).iter().copied().collect();
        let mut x = unit;
        for _ in 0..genus {
            x = a.product(&handle, &x);
        }
        let theta: Complex64 = a.trace().iter().zip(&x).map(|(t, v)| t * v).sum();
        total += (-s * level.lambda).exp() * theta;
    }
    Ok(total)
}

fn split_label(rng: &mut impl Rng, label: Label) -> Vec<Label> {
    let t: f64 = rng.random_range(0.2..0.8);
    match label {
        Label::Zero => Vec::new(),
        _ if rng.random_bool(0.5) => vec![label],
        Label::Volume(s) => vec![Label::Volume(s * t), Label::Volume(s * (1.0 - t))],
        Label::Imaginary(z) => vec![Label::Imaginary(z * t), Label::Imaginary(z * (1.0 - t))],
    }
}

/// Full-width permutation exchanging positions `i` and `j`.
fn swap(width: usize, i: usize, j: usize) -> Step {
    let mut sigma: Vec<usize> = (0..width).collect();
    sigma.swap(i, j);
    Step::new(Elementary::Permutation(sigma), 0)
}

/// Emits the pieces of one component living on circles `off .. off + count`.
///
/// Circles start in separate classes; pants between classes merges them and
/// pants inside a class adds a handle. Budgets keep the final genus and
/// boundary exact.
fn component_steps(rng: &mut impl Rng, comp: &Component, off: usize, others: usize, steps: &mut Vec<Step>) {
    let k_in = comp.inputs.len().max(1);
    let k_out = comp.outputs.len().max(1);
    let g = comp.genus as usize;
    let mut pants = g + k_in - 1;
    let mut copants = g + k_out - 1;
    let mut class: Vec<usize> = (0..k_in).collect();
    if comp.inputs.is_empty() {
        steps.push(Step::new(Elementary::Codisk, off));
    }
    let labels = split_label(rng, comp.label);
    let events = pants + copants;
    let label_times: Vec<usize> = labels.iter().map(|_| rng.random_range(0..=events)).collect();
    for time in 0..=events {
        for (_, &l) in label_times.iter().zip(&labels).filter(|(&t, _)| t == time) {
            let at = off + rng.random_range(0..class.len());
            steps.push(Step::new(Elementary::Cylinder(l), at));
        }
        if time == events {
            break;
        }
        let width = others + class.len();
        let classes = {
            let mut c = class.clone();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        let can_pants = class.len() >= 2 && pants >= 1;
        if can_pants && (copants == 0 || rng.random_bool(0.5)) {
            let i = rng.random_range(0..class.len());
            let cross: Vec<usize> = (0..class.len()).filter(|&j| j != i && class[j] != class[i]).collect();
            let same: Vec<usize> = (0..class.len()).filter(|&j| j != i && class[j] == class[i]).collect();
            let must_merge = pants - 1 < classes - 1;
            let j = if must_merge || same.is_empty() || (!cross.is_empty() && rng.random_bool(0.5)) {
                *cross.choose(rng).expect("a class to merge with")
            } else {
                *same.choose(rng).expect("a circle of the same class")
            };
            let (lo, hi) = (i.min(j), i.max(j));
            if hi != lo + 1 {
                steps.push(swap(width, off + lo + 1, off + hi));
                class.swap(lo + 1, hi);
            }
            steps.push(Step::new(Elementary::Pants, off + lo));
            let (keep, gone) = (class[lo], class[lo + 1]);
            class.remove(lo + 1);
            class.iter_mut().filter(|c| **c == gone).for_each(|c| *c = keep);
            pants -= 1;
        } else {
            let i = rng.random_range(0..class.len());
            steps.push(Step::new(Elementary::Copants, off + i));
            class.insert(i, class[i]);
            copants -= 1;
        }
    }
    if comp.outputs.is_empty() {
        steps.push(Step::new(Elementary::Disk, off));
    }
}

/// A seeded Morse decomposition of `x`, generally different from `x.decompose()`.
pub fn random_decomposition(x: &Bordism, seed: u64) -> Decomposition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..x.components.len()).collect();
    order.shuffle(&mut rng);
    let mut steps = Vec::new();
    let mut in_order = Vec::with_capacity(x.n_in);
    for &c in &order {
        let mut ins = x.components[c].inputs.clone();
        ins.shuffle(&mut rng);
        in_order.extend(ins);
    }
    if in_order.iter().enumerate().any(|(i, &s)| i != s) {
        steps.push(Step::new(Elementary::Permutation(in_order), 0));
    }
    let mut done = 0;
    let mut pending = x.n_in;
    for &c in &order {
        let comp = &x.components[c];
        pending -= comp.inputs.len();
        let off = if comp.is_closed() { rng.random_range(0..=done + pending) } else { done };
        component_steps(&mut rng, comp, off, done + pending, &mut steps);
        done += comp.outputs.len();
    }
    let mut sigma = vec![0; x.n_out];
    let mut pos = 0;
    for &c in &order {
        let mut outs = x.components[c].outputs.clone();
        outs.shuffle(&mut rng);
        for slot in outs {
            sigma[slot] = pos;
            pos += 1;
        }
    }
    if sigma.iter().enumerate().any(|(i, &s)| i != s) {
        steps.push(Step::new(Elementary::Permutation(sigma), 0));
    }
    Decomposition { n_in: x.n_in, steps }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBordismParams {
    pub max_boundary: usize,
    pub max_genus: i64,
    pub max_components: usize,
    pub allow_closed: bool,
    /// Lower bound for the real part of volume labels.
    pub min_re: f64,
}

impl Default for RandomBordismParams {
    fn default() -> Self {
        RandomBordismParams {
            max_boundary: 3,
            max_genus: 1,
            max_components: 2,
            allow_closed: true,
            min_re: 0.5,
        }
    }
}

pub fn random_volume(rng: &mut impl Rng, min_re: f64) -> Label {
    Label::volume(rng.random_range(min_re..min_re + 1.5), rng.random_range(-2.0..2.0))
}

/// A random valid bordism with volume labels on every component.
pub fn random_bordism(rng: &mut impl Rng, p: &RandomBordismParams) -> Bordism {
    loop {
        let n_in = rng.random_range(0..=p.max_boundary);
        let n_out = rng.random_range(0..=p.max_boundary);
        let n_comp = rng.random_range(1..=p.max_components);
        let mut comps: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); n_comp];
        for s in 0..n_in {
            comps[rng.random_range(0..n_comp)].0.push(s);
        }
        for s in 0..n_out {
            comps[rng.random_range(0..n_comp)].1.push(s);
        }
        if !p.allow_closed && comps.iter().any(|(i, o)| i.is_empty() && o.is_empty()) {
            continue;
        }
        let components = comps
            .into_iter()
            .map(|(i, o)| Component::new(rng.random_range(0..=p.max_genus), i, o, random_volume(rng, p.min_re)))
            .collect();
        return Bordism::new(n_in, n_out, components).expect("generated bordism is valid");
    }
}
