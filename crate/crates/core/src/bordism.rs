//! Labeled surface bordisms between ordered lists of circles.
//!
//! A bordism `n_in → n_out` is a list of connected components. Each component
//! records its genus, which incoming and outgoing circle slots it touches, and
//! one semigroup label: a complex volume with positive real part, a purely
//! imaginary volume, or zero. Up to diffeomorphism this is all the data a
//! surface has, so composition reduces to union-find over the glued slots plus
//! Euler characteristic arithmetic.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::Pair;
use crate::report::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    /// Complex volume, `Re > 0`.
    Volume(Complex64),
    /// Purely imaginary volume `iζ`, stored as `ζ`.
    Imaginary(f64),
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Volume,
    Imaginary,
    Zero,
}

impl Label {
    pub fn volume(re: f64, im: f64) -> Label {
        Label::Volume(Complex64::new(re, im))
    }

    pub fn kind(&self) -> LabelKind {
        match self {
            Label::Volume(_) => LabelKind::Volume,
            Label::Imaginary(_) => LabelKind::Imaginary,
            Label::Zero => LabelKind::Zero,
        }
    }

    /// The complex number this label stands for.
    pub fn value(&self) -> Complex64 {
        match *self {
            Label::Volume(s) => s,
            Label::Imaginary(z) => Complex64::new(0.0, z),
            Label::Zero => Complex64::new(0.0, 0.0),
        }
    }

    pub fn conj(&self) -> Label {
        match *self {
            Label::Volume(s) => Label::Volume(s.conj()),
            Label::Imaginary(z) => Label::Imaginary(-z),
            Label::Zero => Label::Zero,
        }
    }

    pub fn is_coherent(&self) -> bool {
        match *self {
            Label::Volume(s) => s.re > 0.0 && s.im.is_finite() && s.re.is_finite(),
            Label::Imaginary(z) => z.is_finite(),
            Label::Zero => true,
        }
    }

    fn sort_key(&self) -> (u8, f64, f64) {
        let v = self.value();
        (self.kind() as u8, v.re, v.im)
    }
}

impl Add for Label {
    type Output = Label;

    fn add(self, other: Label) -> Label {
        use Label::*;
        match (self, other) {
            (Zero, x) | (x, Zero) => x,
            (Imaginary(a), Imaginary(b)) => Imaginary(a + b),
            (a, b) => Volume(a.value() + b.value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub genus: i64,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub label: Label,
}

impl Component {
    pub fn new(genus: i64, inputs: Vec<usize>, outputs: Vec<usize>, label: Label) -> Self {
        Component {
            genus,
            inputs,
            outputs,
            label,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus - (self.inputs.len() + self.outputs.len()) as i64
    }

    pub fn is_closed(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }

    pub fn is_cylinder(&self) -> bool {
        self.genus == 0 && self.inputs.len() == 1 && self.outputs.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bordism {
    pub n_in: usize,
    pub n_out: usize,
    pub components: Vec<Component>,
}

impl Bordism {
    /// Builds and validates.
    pub fn new(n_in: usize, n_out: usize, components: Vec<Component>) -> Result<Self> {
        let b = Bordism {
            n_in,
            n_out,
            components,
        };
        let report = b.validate();
        if !report.passed {
            let msgs: Vec<String> = report
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default()))
                .collect();
            return Err(Error::InvalidBordism(msgs.join("; ")));
        }
        Ok(b)
    }

    pub fn empty() -> Self {
        Bordism {
            n_in: 0,
            n_out: 0,
            components: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    /// Output circle `i` is connected to input circle `sigma[i]` by a zero-labeled cylinder.
    pub fn permutation(sigma: &[usize]) -> Self {
        Bordism {
            n_in: sigma.len(),
            n_out: sigma.len(),
            components: sigma
                .iter()
                .enumerate()
                .map(|(i, &j)| Component::new(0, vec![j], vec![i], Label::Zero))
                .collect(),
        }
    }

    fn connected(genus: i64, n_in: usize, n_out: usize, label: Label) -> Self {
        Bordism {
            n_in,
            n_out,
            components: vec![Component::new(genus, (0..n_in).collect(), (0..n_out).collect(), label)],
        }
    }

    pub fn cylinder(label: Label) -> Self {
        Self::connected(0, 1, 1, label)
    }

    pub fn pants(label: Label) -> Self {
        Self::connected(0, 2, 1, label)
    }

    pub fn copants(label: Label) -> Self {
        Self::connected(0, 1, 2, label)
    }

    /// One incoming circle capped off.
    pub fn disk(label: Label) -> Self {
        Self::connected(0, 1, 0, label)
    }

    /// One outgoing circle created from nothing.
    pub fn codisk(label: Label) -> Self {
        Self::connected(0, 0, 1, label)
    }

    pub fn closed(genus: i64, label: Label) -> Self {
        Self::connected(genus, 0, 0, label)
    }

    pub fn general(genus: i64, n_in: usize, n_out: usize, label: Label) -> Self {
        Self::connected(genus, n_in, n_out, label)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components.iter().map(Component::euler_characteristic).sum()
    }

    pub fn total_label(&self) -> Label {
        self.components.iter().fold(Label::Zero, |acc, c| acc + c.label)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for (name, n, pick) in [
            ("in_partition", self.n_in, true),
            ("out_partition", self.n_out, false),
        ] {
            let mut seen = vec![false; n];
            let mut problem = None;
            for (ci, comp) in self.components.iter().enumerate() {
                let slots = if pick { &comp.inputs } else { &comp.outputs };
                for &s in slots {
                    if s >= n {
                        problem.get_or_insert(format!("slot {s} out of range in component {ci}"));
                    } else if seen[s] {
                        problem.get_or_insert(format!("slot {s} used twice (component {ci})"));
                    } else {
                        seen[s] = true;
                    }
                }
            }
            if problem.is_none() {
                if let Some(s) = seen.iter().position(|x| !x) {
                    problem = Some(format!("slot {s} not covered"));
                }
            }
            match problem {
                Some(p) => report.fail(name, p),
                None => report.push(name, true, None, None),
            }
        }
        match self.components.iter().position(|c| c.genus < 0) {
            Some(ci) => report.fail("genus", format!("component {ci} has genus {}", self.components[ci].genus)),
            None => report.push("genus", true, None, None),
        }
        match self.components.iter().position(|c| !c.label.is_coherent()) {
            Some(ci) => report.fail("labels", format!("component {ci} label {:?} is not of its declared kind", self.components[ci].label)),
            None => report.push("labels", true, None, None),
        }
        report
    }

    /// Glues the outgoing circles of `self` to the incoming circles of `next`.
    pub fn compose(&self, next: &Bordism) -> Result<Bordism> {
        if self.n_out != next.n_in {
            return Err(Error::Arity {
                left: self.n_out,
                right: next.n_in,
            });
        }
        let nx = self.components.len();
        let total = nx + next.components.len();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut owner_out = vec![0; self.n_out];
        for (ci, c) in self.components.iter().enumerate() {
            for &s in &c.outputs {
                owner_out[s] = ci;
            }
        }
        for (cj, c) in next.components.iter().enumerate() {
            for &s in &c.inputs {
                let a = find(&mut parent, owner_out[s]);
                let b = find(&mut parent, nx + cj);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for idx in 0..total {
            let r = find(&mut parent, idx);
            match groups.iter_mut().find(|(root, _)| *root == r) {
                Some((_, g)) => g.push(idx),
                None => groups.push((r, vec![idx])),
            }
        }
        let mut components = Vec::with_capacity(groups.len());
        for (_, members) in groups {
            let mut chi = 0;
            let mut label = Label::Zero;
            let mut inputs = Vec::new();
            let mut outputs = Vec::new();
            for &m in &members {
                let c = if m < nx { &self.components[m] } else { &next.components[m - nx] };
                chi += c.euler_characteristic();
                label = label + c.label;
                if m < nx {
                    inputs.extend(&c.inputs);
                } else {
                    outputs.extend(&c.outputs);
                }
            }
            let b = (inputs.len() + outputs.len()) as i64;
            let twice_genus = 2 - chi - b;
            assert!(
                twice_genus >= 0 && twice_genus % 2 == 0,
                "gluing produced non-integral genus"
            );
            inputs.sort_unstable();
            outputs.sort_unstable();
            components.push(Component::new(twice_genus / 2, inputs, outputs, label));
        }
        Ok(Bordism {
            n_in: self.n_in,
            n_out: next.n_out,
            components,
        })
    }

    /// Disjoint union; `other`'s slots come after `self`'s.
    pub fn monoidal(&self, other: &Bordism) -> Bordism {
        let mut components = self.components.clone();
        components.extend(other.components.iter().map(|c| {
            Component::new(
                c.genus,
                c.inputs.iter().map(|s| s + self.n_in).collect(),
                c.outputs.iter().map(|s| s + self.n_out).collect(),
                c.label,
            )
        }));
        Bordism {
            n_in: self.n_in + other.n_in,
            n_out: self.n_out + other.n_out,
            components,
        }
    }

    /// Incoming and outgoing boundaries swapped; labels untouched.
    pub fn dual(&self) -> Bordism {
        Bordism {
            n_in: self.n_out,
            n_out: self.n_in,
            components: self
                .components
                .iter()
                .map(|c| Component::new(c.genus, c.outputs.clone(), c.inputs.clone(), c.label))
                .collect(),
        }
    }

    /// The same bordism with every label replaced.
    pub fn relabeled(&self, f: impl Fn(&Component) -> Label) -> Bordism {
        let mut out = self.clone();
        for c in &mut out.components {
            c.label = f(c);
        }
        out
    }

    /// Sorted slot lists; open components ordered by their first slot, closed ones last.
    pub fn canonical(&self) -> Bordism {
        let mut components: Vec<Component> = self
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.inputs.sort_unstable();
                c.outputs.sort_unstable();
                c
            })
            .collect();
        let n_in = self.n_in;
        let key = |c: &Component| -> Option<usize> {
            c.inputs.first().copied().or_else(|| c.outputs.first().map(|o| n_in + o))
        };
        components.sort_by(|a, b| match (key(a), key(b)) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => a
                .genus
                .cmp(&b.genus)
                .then_with(|| a.label.sort_key().partial_cmp(&b.label.sort_key()).unwrap_or(Ordering::Equal)),
        });
        Bordism {
            n_in: self.n_in,
            n_out: self.n_out,
            components,
        }
    }

    /// Canonical Morse decomposition. Per component (open components in order,
    /// closed ones last): inputs are merged left to right, the whole label sits on
    /// one cylinder, `g` handle pairs follow, then the outputs are split off.
    pub fn decompose(&self) -> Decomposition {
        let canon = self.canonical();
        let mut steps = Vec::new();
        let in_order: Vec<usize> = canon.components.iter().flat_map(|c| c.inputs.iter().copied()).collect();
        if !is_identity(&in_order) {
            steps.push(Step::new(Elementary::Permutation(in_order), 0));
        }
        let mut off = 0;
        for comp in &canon.components {
            let k_in = comp.inputs.len();
            let k_out = comp.outputs.len();
            if k_in == 0 {
                steps.push(Step::new(Elementary::Codisk, off));
            }
            if comp.label != Label::Zero {
                steps.push(Step::new(Elementary::Cylinder(comp.label), off));
            }
            for _ in 1..k_in.max(1) {
                steps.push(Step::new(Elementary::Pants, off));
            }
            for _ in 0..comp.genus {
                steps.push(Step::new(Elementary::Copants, off));
                steps.push(Step::new(Elementary::Pants, off));
            }
            if k_out == 0 {
                steps.push(Step::new(Elementary::Disk, off));
            } else {
                for _ in 1..k_out {
                    steps.push(Step::new(Elementary::Copants, off));
                }
            }
            off += k_out;
        }
        let out_order: Vec<usize> = canon.components.iter().flat_map(|c| c.outputs.iter().copied()).collect();
        let mut sigma = vec![0; out_order.len()];
        for (pos, &slot) in out_order.iter().enumerate() {
            sigma[slot] = pos;
        }
        if !is_identity(&sigma) {
            steps.push(Step::new(Elementary::Permutation(sigma), 0));
        }
        Decomposition {
            n_in: self.n_in,
            steps,
        }
    }
}

fn is_identity(sigma: &[usize]) -> bool {
    sigma.iter().enumerate().all(|(i, &s)| i == s)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Elementary {
    Pants,
    Copants,
    Disk,
    Codisk,
    Cylinder(Label),
    /// Output position `i` receives input circle `sigma[i]`.
    Permutation(Vec<usize>),
}

impl Elementary {
    /// `(incoming, outgoing)` circle counts consumed and produced.
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Elementary::Pants => (2, 1),
            Elementary::Copants => (1, 2),
            Elementary::Disk => (1, 0),
            Elementary::Codisk => (0, 1),
            Elementary::Cylinder(_) => (1, 1),
            Elementary::Permutation(s) => (s.len(), s.len()),
        }
    }

    pub fn bordism(&self) -> Bordism {
        match self {
            Elementary::Pants => Bordism::pants(Label::Zero),
            Elementary::Copants => Bordism::copants(Label::Zero),
            Elementary::Disk => Bordism::disk(Label::Zero),
            Elementary::Codisk => Bordism::codisk(Label::Zero),
            Elementary::Cylinder(l) => Bordism::cylinder(*l),
            Elementary::Permutation(s) => Bordism::permutation(s),
        }
    }
}

/// An elementary piece acting on circles `at .. at + arity.0`; the others pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub piece: Elementary,
    pub at: usize,
}

impl Step {
    pub fn new(piece: Elementary, at: usize) -> Self {
        Step { piece, at }
    }

    /// The full-width bordism of this step on `width` incoming circles.
    pub fn bordism(&self, width: usize) -> Result<Bordism> {
        let (a, _) = self.piece.arity();
        if self.at + a > width {
            return Err(Error::InvalidBordism(format!(
                "step {:?} at {} does not fit {width} circles",
                self.piece, self.at
            )));
        }
        if let Elementary::Permutation(s) = &self.piece {
            let distinct: BTreeSet<_> = s.iter().collect();
            if self.at != 0 || s.len() != width || distinct.len() != width || s.iter().any(|&x| x >= width) {
                return Err(Error::InvalidBordism(format!("bad permutation {s:?} on {width} circles")));
            }
        }
        Ok(Bordism::identity(self.at)
            .monoidal(&self.piece.bordism())
            .monoidal(&Bordism::identity(width - self.at - a)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub n_in: usize,
    pub steps: Vec<Step>,
}

impl Decomposition {
    /// Circle counts before each step and after the last one.
    pub fn widths(&self) -> Result<Vec<usize>> {
        let mut w = vec![self.n_in];
        for s in &self.steps {
            let cur = *w.last().unwrap();
            let (a, b) = s.piece.arity();
            if s.at + a > cur {
                return Err(Error::InvalidBordism(format!("step {s:?} does not fit {cur} circles")));
            }
            w.push(cur - a + b);
        }
        Ok(w)
    }

    pub fn recompose(&self) -> Result<Bordism> {
        let mut acc = Bordism::identity(self.n_in);
        for s in &self.steps {
            acc = acc.compose(&s.bordism(acc.n_out)?)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelJson {
    pub kind: LabelKind,
    #[serde(default)]
    pub value: Pair,
}

impl From<Label> for LabelJson {
    fn from(l: Label) -> Self {
        let v = l.value();
        LabelJson {
            kind: l.kind(),
            value: [v.re, v.im],
        }
    }
}

impl TryFrom<LabelJson> for Label {
    type Error = Error;

    fn try_from(j: LabelJson) -> Result<Label> {
        match j.kind {
            LabelKind::Volume => Ok(Label::Volume(Complex64::new(j.value[0], j.value[1]))),
            LabelKind::Imaginary if j.value[0] == 0.0 => Ok(Label::Imaginary(j.value[1])),
            LabelKind::Imaginary => Err(Error::InvalidBordism(format!(
                "imaginary label with real part {}",
                j.value[0]
            ))),
            LabelKind::Zero if j.value == [0.0, 0.0] => Ok(Label::Zero),
            LabelKind::Zero => Err(Error::InvalidBordism("zero label with nonzero value".into())),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LabelJson::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Label::try_from(LabelJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComponentJson {
    genus: i64,
    #[serde(rename = "in")]
    inputs: Vec<usize>,
    #[serde(rename = "out")]
    outputs: Vec<usize>,
    label: Label,
}

/// JSON mirror: `{"n_in", "n_out", "components": [{"genus", "in", "out", "label"}]}`.
/// Slots are 0-based. Deserialization does not validate; call [`Bordism::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BordismJson {
    n_in: usize,
    n_out: usize,
    components: Vec<ComponentJson>,
}

impl Serialize for Bordism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BordismJson {
            n_in: self.n_in,
            n_out: self.n_out,
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    genus: c.genus,
                    inputs: c.inputs.clone(),
                    outputs: c.outputs.clone(),
                    label: c.label,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bordism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BordismJson::deserialize(d)?;
        Ok(Bordism {
            n_in: j.n_in,
            n_out: j.n_out,
            components: j
                .components
                .into_iter()
                .map(|c| Component::new(c.genus, c.inputs, c.outputs, c.label))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Label {
        Label::volume(x, 0.0)
    }

    #[test]
    fn label_arithmetic() {
        assert_eq!(s(1.0) + Label::Zero, s(1.0));
        assert_eq!(Label::Imaginary(1.0) + Label::Imaginary(2.0), Label::Imaginary(3.0));
        assert_eq!(Label::Imaginary(1.0) + s(2.0), Label::volume(2.0, 1.0));
        assert_eq!(Label::Zero + Label::Zero, Label::Zero);
    }

    #[test]
    fn copants_then_pants_is_torus_with_two_holes() {
        let x = Bordism::copants(Label::Zero).compose(&Bordism::pants(Label::Zero)).unwrap();
        assert_eq!(x.components.len(), 1);
        let c = &x.components[0];
        assert_eq!((c.genus, c.inputs.len(), c.outputs.len()), (1, 1, 1));
        assert_eq!(x.euler_characteristic(), -2);
    }

    #[test]
    fn cylinders_add_labels() {
        let x = Bordism::cylinder(Label::volume(0.5, 0.25))
            .compose(&Bordism::cylinder(Label::volume(1.0, -0.5)))
            .unwrap();
        assert_eq!(x, Bordism::cylinder(Label::volume(1.5, -0.25)));
    }

    #[test]
    fn disk_after_codisk_is_sphere() {
        let x = Bordism::codisk(s(2.0)).compose(&Bordism::disk(s(1.0))).unwrap();
        assert_eq!(x, Bordism::closed(0, s(3.0)));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            Bordism::pants(Label::Zero).compose(&Bordism::pants(Label::Zero)),
            Err(Error::Arity { left: 1, right: 2 })
        ));
    }

    #[test]
    fn monoidal_examples() {
        let cc = Bordism::cylinder(s(1.0)).monoidal(&Bordism::cylinder(s(1.0)));
        assert_eq!((cc.n_in, cc.n_out, cc.components.len()), (2, 2, 2));
        assert!(cc.validate().passed);
        let p = Bordism::pants(s(1.0));
        assert_eq!(p.monoidal(&Bordism::empty()), p);
        let pd = p.monoidal(&Bordism::disk(s(1.0)));
        assert_eq!((pd.n_in, pd.n_out, pd.components.len()), (3, 1, 2));
        assert_eq!(pd.components[1].inputs, vec![2]);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(Bordism::pants(s(1.0)).dual(), Bordism::copants(s(1.0)));
        let g2 = Bordism::closed(2, s(1.0));
        assert_eq!(g2.dual(), g2);
        let x = Bordism::general(1, 2, 3, s(0.5)).monoidal(&Bordism::disk(Label::Zero));
        assert_eq!(x.dual().dual(), x);
    }

    #[test]
    fn validation_failures() {
        assert!(Bordism::pants(s(1.0)).validate().passed);
        let overlap = Bordism {
            n_in: 2,
            n_out: 1,
            components: vec![
                Component::new(0, vec![0, 1], vec![0], Label::Zero),
                Component::new(0, vec![1], vec![], Label::Zero),
            ],
        };
        let r = overlap.validate();
        assert!(!r.passed);
        assert!(r.get("in_partition").unwrap().detail.as_ref().unwrap().contains("slot 1"));
        let neg = Bordism {
            n_in: 0,
            n_out: 0,
            components: vec![Component::new(-1, vec![], vec![], Label::Zero)],
        };
        assert!(!neg.validate().get("genus").unwrap().passed);
        let bad_label = Bordism::cylinder(Label::volume(-1.0, 0.0));
        assert!(!bad_label.validate().get("labels").unwrap().passed);
        let uncovered = Bordism {
            n_in: 2,
            n_out: 0,
            components: vec![Component::new(0, vec![0], vec![], Label::Zero)],
        };
        assert!(!uncovered.validate().passed);
    }

    #[test]
    fn decompose_examples() {
        let cyl = Bordism::cylinder(s(1.0)).decompose();
        assert_eq!(cyl.steps, vec![Step::new(Elementary::Cylinder(s(1.0)), 0)]);

        let torus = Bordism::closed(1, s(1.0)).decompose();
        let pieces: Vec<_> = torus.steps.iter().map(|st| st.piece.clone()).collect();
        assert_eq!(
            pieces,
            vec![
                Elementary::Codisk,
                Elementary::Cylinder(s(1.0)),
                Elementary::Copants,
                Elementary::Pants,
                Elementary::Disk
            ]
        );
        assert_eq!(torus.recompose().unwrap(), Bordism::closed(1, s(1.0)));

        let pants = Bordism::pants(s(1.0)).decompose();
        assert_eq!(
            pants.steps,
            vec![Step::new(Elementary::Cylinder(s(1.0)), 0), Step::new(Elementary::Pants, 0)]
        );
    }

    #[test]
    fn decompose_routes_permuted_slots() {
        let x = Bordism {
            n_in: 3,
            n_out: 3,
            components: vec![
                Component::new(1, vec![2, 0], vec![1], s(0.5)),
                Component::new(0, vec![1], vec![2, 0], Label::Imaginary(2.0)),
                Component::new(2, vec![], vec![], s(1.0)),
            ],
        };
        assert!(x.validate().passed);
        let d = x.decompose();
        assert_eq!(d.recompose().unwrap().canonical(), x.canonical());
        assert!(d.steps.len() >= 6);
    }

    #[test]
    fn json_roundtrip_and_schema() {
        let x = Bordism::general(2, 1, 2, Label::volume(1.0, 0.5)).monoidal(&Bordism::codisk(Label::Imaginary(-1.5)));
        let txt = serde_json::to_string(&x).unwrap();
        assert!(txt.contains("\"kind\":\"volume\""));
        assert!(txt.contains("\"in\":[0]"));
        let back: Bordism = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, x);
        let bad = r#"{"n_in":1,"n_out":1,"components":[{"genus":0,"in":[0],"out":[0],"label":{"kind":"imaginary","value":[1,2]}}]}"#;
        assert!(serde_json::from_str::<Bordism>(bad).is_err());
    }
}
