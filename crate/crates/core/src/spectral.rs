//! Spectral data of a reflection-positive 2d theory: a finite, strictly increasing
//! list of eigenvalues, one Hermitian Frobenius block per eigenvalue, and the
//! bookkeeping needed to bound what a finite list leaves out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusAlgebra;
use crate::linalg::{kron, op_norm, CMat};
use crate::report::ValidationReport;

/// Polynomial upper bound (ascending coefficients) on the number of eigenvalues
/// in any window `[λ, λ + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DensityMajorant(pub Vec<f64>);

impl Default for DensityMajorant {
    fn default() -> Self {
        DensityMajorant(vec![1.0, 1.0])
    }
}

impl DensityMajorant {
    pub fn constant(c: f64) -> Self {
        DensityMajorant(vec![c])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.0.iter().rev().fold(0.0, |acc, &a| acc * x + a).max(0.0)
    }
}

/// Operator norms of the structure maps in the Gram-orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNorms {
    pub mult: f64,
    pub trace: f64,
    pub coproduct: f64,
    pub unit: f64,
}

impl BlockNorms {
    pub fn max(&self) -> f64 {
        self.mult.max(self.trace).max(self.coproduct).max(self.unit)
    }
}

/// One eigenvalue with its block and the structure maps derived from it.
#[derive(Debug, Clone)]
pub struct Level {
    pub lambda: f64,
    pub block: FrobeniusAlgebra,
    pub unit: CMat,
    pub coproduct: CMat,
    pub handle: CMat,
    pub mult: CMat,
    pub trace: CMat,
    /// Upper factor of the Gram matrix, `G = Rᴴ R`.
    pub orthonormalizer: CMat,
    pub norms: BlockNorms,
}

impl Level {
    fn new(lambda: f64, block: FrobeniusAlgebra) -> Result<Self> {
        let wrap = |e: Error| Error::InvalidBlock {
            lambda,
            reason: e.to_string(),
        };
        let unit = block.unit().map_err(wrap)?;
        let unit = CMat::from_column_slice(block.dim(), 1, &unit);
        let coproduct = block.coproduct().map_err(wrap)?;
        let handle = block.handle().map_err(wrap)?;
        let mult = block.mult_matrix();
        let trace = block.trace_row();
        let r = block.orthonormalizer().map_err(wrap)?;
        let r_inv = r.clone().try_inverse().ok_or_else(|| wrap(Error::Shape("singular Gram factor".into())))?;
        let r2 = kron(&r, &r);
        let r2_inv = kron(&r_inv, &r_inv);
        let norms = BlockNorms {
            mult: op_norm(&(&r * &mult * &r2_inv)),
            trace: op_norm(&(&trace * &r_inv)),
            coproduct: op_norm(&(&r2 * &coproduct * &r_inv)),
            unit: op_norm(&(&r * &unit)),
        };
        Ok(Level {
            lambda,
            block,
            unit,
            coproduct,
            handle,
            mult,
            trace,
            orthonormalizer: r,
            norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    /// `e^{-sλ}` on the principal exponential.
    pub fn damping(&self, s: Complex64) -> Complex64 {
        (-s * self.lambda).exp()
    }
}

/// A truncated spectral theory.
///
/// `spectrum_bound = None` declares the stored list to be the whole spectrum.
/// `Some(b)` declares it complete up to `b`, with every omitted eigenvalue above `b`
/// and counted by `density`.
#[derive(Debug, Clone)]
pub struct SpectralVft {
    levels: Vec<Level>,
    spectrum_bound: Option<f64>,
    density: DensityMajorant,
}

/// Certificate that every stored block has structure-map norms below `c · e^{tλ}`.
///
/// `c_mult` bounds the product and coproduct alone, `c_trace` the trace and
/// unit alone; `c` is the larger of the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub t: f64,
    pub c: f64,
    pub c_mult: f64,
    pub c_trace: f64,
    /// Eigenvalue at which `max_norm(λ) e^{-tλ}` is largest.
    pub argmax_lambda: f64,
}

/// How many structure maps of each kind compose into one evaluated piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MapCounts {
    /// Products and coproducts (a handle counts twice).
    pub mult: u32,
    /// Traces and units.
    pub trace: u32,
}

impl MapCounts {
    pub fn depth(&self) -> u32 {
        self.mult + self.trace
    }

    /// Maps used by a connected surface of genus `genus` with the given boundary.
    pub fn for_surface(genus: u32, n_in: usize, n_out: usize) -> Self {
        let side = |k: usize| if k == 0 { (0, 1) } else { (k as u32 - 1, 0) };
        let (mi, ti) = side(n_in);
        let (mo, to) = side(n_out);
        MapCounts {
            mult: mi + mo + 2 * genus,
            trace: ti + to,
        }
    }
}

impl GrowthCertificate {
    /// `c^depth`, the uniform majorant scale.
    pub fn uniform_scale(&self, depth: u32) -> f64 {
        self.c.powi(depth as i32)
    }

    pub fn scale(&self, counts: MapCounts) -> f64 {
        self.c_mult.powi(counts.mult as i32) * self.c_trace.powi(counts.trace as i32)
    }
}

/// Truncation level together with a bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub lambda_max: f64,
    pub tail_bound: f64,
}

pub fn build_spectral_vft(entries: Vec<(f64, FrobeniusAlgebra)>, validate_tol: f64) -> Result<SpectralVft> {
    SpectralVft::new(entries, validate_tol)
}

impl SpectralVft {
    pub fn new(mut entries: Vec<(f64, FrobeniusAlgebra)>, validate_tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if let Some((l, _)) = entries.iter().find(|(l, _)| !l.is_finite()) {
            return Err(Error::InvalidBlock {
                lambda: *l,
                reason: "eigenvalue is not finite".into(),
            });
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateEigenvalue(pair[0].0));
            }
        }
        let mut levels = Vec::with_capacity(entries.len());
        for (lambda, block) in entries {
            let report = block.validate(validate_tol);
            if !report.passed {
                let failed: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
                return Err(Error::InvalidBlock {
                    lambda,
                    reason: format!("failed axioms: {}", failed.join(", ")),
                });
            }
            levels.push(Level::new(lambda, block)?);
        }
        Ok(SpectralVft {
            levels,
            spectrum_bound: None,
            density: DensityMajorant::default(),
        })
    }

    /// Single-level theory `(0, ℂ)`.
    pub fn trivial() -> Self {
        Self::new(vec![(0.0, FrobeniusAlgebra::trivial())], crate::frobenius::DEFAULT_TOL)
            .expect("trivial theory is valid")
    }

    pub fn with_spectrum_bound(mut self, bound: Option<f64>) -> Self {
        self.spectrum_bound = bound;
        self
    }

    pub fn with_density(mut self, density: DensityMajorant) -> Self {
        self.density = density;
        self
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground(&self) -> f64 {
        self.levels[0].lambda
    }

    pub fn max_lambda(&self) -> f64 {
        self.levels[self.levels.len() - 1].lambda
    }

    pub fn spectrum_bound(&self) -> Option<f64> {
        self.spectrum_bound
    }

    pub fn density(&self) -> &DensityMajorant {
        &self.density
    }

    pub fn is_complete(&self) -> bool {
        self.spectrum_bound.is_none()
    }

    /// Number of stored levels with `λ ≤ lambda_max`.
    pub fn count_upto(&self, lambda_max: f64) -> usize {
        self.levels.partition_point(|l| l.lambda <= lambda_max)
    }

    /// All eigenvalues moved by `-shift`; blocks unchanged.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for l in &mut out.levels {
            l.lambda -= shift;
        }
        out.spectrum_bound = self.spectrum_bound.map(|b| b - shift);
        out
    }

    /// The theory with only the first `n` levels, declared complete.
    pub fn truncated(&self, n: usize) -> Self {
        SpectralVft {
            levels: self.levels[..n.min(self.levels.len()).max(1)].to_vec(),
            spectrum_bound: None,
            density: self.density.clone(),
        }
    }

    pub fn check_growth(&self, t: f64) -> GrowthCertificate {
        let mut best = (f64::NEG_INFINITY, self.levels[0].lambda);
        let mut c_mult = 0.0f64;
        let mut c_trace = 0.0f64;
        for l in &self.levels {
            let damp = (-t * l.lambda).exp();
            let v = l.norms.max() * damp;
            if v > best.0 {
                best = (v, l.lambda);
            }
            c_mult = c_mult.max(l.norms.mult.max(l.norms.coproduct) * damp);
            c_trace = c_trace.max(l.norms.trace.max(l.norms.unit) * damp);
        }
        const INFLATE: f64 = 1.0 + 1e-9;
        GrowthCertificate {
            t,
            c: best.0 * INFLATE,
            c_mult: c_mult * INFLATE,
            c_trace: c_trace * INFLATE,
            argmax_lambda: best.1,
        }
    }

    /// Majorant of `Σ_{λ > cut} c^depth e^{(depth·t - re_s_min) λ}` summed over unit windows.
    pub fn tail_majorant(&self, cert: &GrowthCertificate, depth: u32, re_s_min: f64, cut: f64) -> f64 {
        self.window_sum(cert.uniform_scale(depth), depth as f64 * cert.t, re_s_min, cut)
    }

    /// As [`Self::tail_majorant`] with separate constants per map kind.
    pub fn tail_majorant_split(&self, cert: &GrowthCertificate, counts: MapCounts, re_s_min: f64, cut: f64) -> f64 {
        self.window_sum(cert.scale(counts), counts.depth() as f64 * cert.t, re_s_min, cut)
    }

    fn window_sum(&self, scale: f64, rate: f64, re_s_min: f64, cut: f64) -> f64 {
        let kappa = re_s_min - rate;
        let mut total = 0.0;
        for k in 0..1_000_000u64 {
            let start = cut + k as f64;
            let term = self.density.eval(start + 1.0) * scale * (-kappa * start).exp();
            total += term;
            if k > 8 && term <= total * 1e-18 {
                break;
            }
        }
        total
    }

    pub fn truncation_cutoff(
        &self,
        cert: &GrowthCertificate,
        depth: u32,
        re_s_min: f64,
        eps: f64,
    ) -> Result<Truncation> {
        self.cutoff_with(cert.t * depth as f64, re_s_min, eps, |cut| {
            self.tail_majorant(cert, depth, re_s_min, cut)
        })
    }

    pub fn truncation_cutoff_split(
        &self,
        cert: &GrowthCertificate,
        counts: MapCounts,
        re_s_min: f64,
        eps: f64,
    ) -> Result<Truncation> {
        self.cutoff_with(cert.t * counts.depth() as f64, re_s_min, eps, |cut| {
            self.tail_majorant_split(cert, counts, re_s_min, cut)
        })
    }

    fn cutoff_with(&self, rate: f64, re_s_min: f64, eps: f64, tail: impl Fn(f64) -> f64) -> Result<Truncation> {
        if !(re_s_min > rate) {
            return Err(Error::Certification(format!(
                "Re(s) = {re_s_min} does not exceed depth·t = {rate}"
            )));
        }
        let Some(bound) = self.spectrum_bound else {
            return Ok(Truncation {
                lambda_max: self.max_lambda(),
                tail_bound: 0.0,
            });
        };
        let mut candidates: Vec<f64> = self.levels.iter().map(|l| l.lambda).filter(|&l| l <= bound).collect();
        candidates.push(bound);
        let mut last = f64::INFINITY;
        for cut in candidates {
            last = tail(cut);
            if last < eps {
                return Ok(Truncation {
                    lambda_max: cut,
                    tail_bound: last,
                });
            }
        }
        Err(Error::Certification(format!(
            "tail above {bound} is at best {last:e}, not below {eps:e}; extend the spectrum"
        )))
    }

    /// Chooses `t` from a grid in `(0, re_s_min / depth)` to reach `eps` with the smallest cutoff.
    pub fn certify(&self, depth: u32, re_s_min: f64, eps: f64) -> Result<(GrowthCertificate, Truncation)> {
        self.certify_with(depth, re_s_min, |cert| self.truncation_cutoff(cert, depth, re_s_min, eps))
    }

    pub fn certify_split(&self, counts: MapCounts, re_s_min: f64, eps: f64) -> Result<(GrowthCertificate, Truncation)> {
        self.certify_with(counts.depth(), re_s_min, |cert| {
            self.truncation_cutoff_split(cert, counts, re_s_min, eps)
        })
    }

    fn certify_with(
        &self,
        depth: u32,
        re_s_min: f64,
        cutoff: impl Fn(&GrowthCertificate) -> Result<Truncation>,
    ) -> Result<(GrowthCertificate, Truncation)> {
        if !(re_s_min > 0.0) {
            return Err(Error::Certification(format!("Re(s) = {re_s_min} is not positive")));
        }
        if self.is_complete() {
            let t = if depth == 0 { 1.0 } else { re_s_min / (2.0 * depth as f64) };
            let cert = self.check_growth(t);
            return Ok((cert, cutoff(&cert)?));
        }
        const GRID: usize = 48;
        let mut best: Option<(GrowthCertificate, Truncation)> = None;
        let mut last_err = None;
        for k in 1..GRID {
            let t = if depth == 0 {
                0.05 * k as f64
            } else {
                re_s_min / depth as f64 * k as f64 / GRID as f64
            };
            let cert = self.check_growth(t);
            match cutoff(&cert) {
                Ok(tr) => {
                    let better = match &best {
                        None => true,
                        Some((_, b)) => {
                            tr.lambda_max < b.lambda_max
                                || (tr.lambda_max == b.lambda_max && tr.tail_bound < b.tail_bound)
                        }
                    };
                    if better {
                        best = Some((cert, tr));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Certification("no admissible t".into())))
    }
}

/// Growth type `v_λ = q(λ) e^{-αλ}` with `deg q = degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayDescriptor {
    pub rate: f64,
    pub degree: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiggedClass {
    /// Some exponential weight `e^{τλ}`, `τ > 0`, keeps the sequence square-summable.
    CheckSpace,
    /// Square-summable after every damping `e^{-τλ}`, but no growing weight.
    HatOnly,
    Neither,
}

pub fn classify_rigged(desc: DecayDescriptor) -> RiggedClass {
    // polynomial factors never decide: only the sign of the exponential rate does
    if desc.rate > 0.0 {
        RiggedClass::CheckSpace
    } else if desc.rate == 0.0 {
        RiggedClass::HatOnly
    } else {
        RiggedClass::Neither
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    pub lambda: f64,
    pub block: FrobeniusAlgebra,
}

/// JSON mirror: `{"entries": [{"lambda", "block"}], ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralVftJson {
    pub entries: Vec<LevelJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_bound: Option<f64>,
    #[serde(default)]
    pub density_majorant: DensityMajorant,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub growth: Vec<GrowthCertificate>,
}

impl SpectralVftJson {
    pub fn from_vft(vft: &SpectralVft, growth: Vec<GrowthCertificate>) -> Self {
        SpectralVftJson {
            entries: vft
                .levels
                .iter()
                .map(|l| LevelJson {
                    lambda: l.lambda,
                    block: l.block.clone(),
                })
                .collect(),
            spectrum_bound: vft.spectrum_bound,
            density_majorant: vft.density.clone(),
            growth,
        }
    }

    /// Per-level algebra checks plus ordering and bound consistency, without building.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.push("nonempty", !self.entries.is_empty(), None, None);
        let ordered = self
            .entries
            .windows(2)
            .all(|w| w[0].lambda < w[1].lambda)
            && self.entries.iter().all(|e| e.lambda.is_finite());
        report.push("eigenvalues_increasing", ordered, None, None);
        if let (Some(b), Some(last)) = (self.spectrum_bound, self.entries.last()) {
            report.push("spectrum_bound", b >= last.lambda, Some(b), None);
        }
        for (i, e) in self.entries.iter().enumerate() {
            for c in e.block.validate(tol).checks {
                report.push(format!("level[{i}].{}", c.name), c.passed, c.value, c.detail);
            }
        }
        report
    }

    pub fn into_vft(self, validate_tol: f64) -> Result<SpectralVft> {
        let entries = self.entries.into_iter().map(|e| (e.lambda, e.block)).collect();
        Ok(SpectralVft::new(entries, validate_tol)?
            .with_spectrum_bound(self.spectrum_bound)
            .with_density(self.density_majorant))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::DEFAULT_TOL;

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
    fn builds_and_sorts() {
        let t = SpectralVft::trivial();
        assert_eq!(t.len(), 1);
        let v = SpectralVft::new(
            vec![
                (2.0, FrobeniusAlgebra::character_block(3)),
                (0.0, FrobeniusAlgebra::trivial()),
                (0.75, FrobeniusAlgebra::character_block(2)),
            ],
            DEFAULT_TOL,
        )
        .unwrap();
        let ls: Vec<f64> = v.levels().iter().map(|l| l.lambda).collect();
        assert_eq!(ls, vec![0.0, 0.75, 2.0]);
    }

    #[test]
    fn duplicate_and_invalid_blocks_rejected() {
        let dup = SpectralVft::new(
            vec![(1.0, FrobeniusAlgebra::trivial()), (1.0, FrobeniusAlgebra::character_block(2))],
            DEFAULT_TOL,
        );
        assert!(matches!(dup, Err(Error::DuplicateEigenvalue(_))));
        let bad = SpectralVft::new(
            vec![(3.0, FrobeniusAlgebra::scalar(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)))],
            DEFAULT_TOL,
        );
        match bad {
            Err(Error::InvalidBlock { lambda, .. }) => assert_eq!(lambda, 3.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(SpectralVft::new(vec![], DEFAULT_TOL), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn growth_trivial_and_scan() {
        let c = SpectralVft::trivial().check_growth(1.0);
        assert!(c.c > 1.0 && c.c < 1.0 + 1e-6);
        // SU(2), j <= 10: block norms are max(d, 1/d) = d for character blocks
        let v = su2(21);
        let cert = v.check_growth(0.1);
        let direct = (0..21)
            .map(|m| {
                let j = m as f64 / 2.0;
                (m as f64 + 1.0) * (-0.1 * j * (j + 1.0)).exp()
            })
            .fold(0.0, f64::max);
        assert!((cert.c / direct - 1.0).abs() < 1e-8);
        assert!(cert.argmax_lambda < 10.0);
        for l in v.levels() {
            assert!(l.norms.mult < cert.c * (0.1 * l.lambda).exp());
            assert!(l.norms.trace < cert.c * (0.1 * l.lambda).exp());
        }
    }

    #[test]
    fn big_trace_dominates_certificate() {
        let v = SpectralVft::new(
            vec![(0.0, FrobeniusAlgebra::scalar(Complex64::new(1e-6, 0.0), Complex64::new(1e6, 0.0)))],
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(v.check_growth(0.3).c >= 1e6);
    }

    #[test]
    fn cutoff_rules() {
        let t = SpectralVft::trivial();
        let cert = t.check_growth(0.1);
        let tr = t.truncation_cutoff(&cert, 2, 1.0, 1e-12).unwrap();
        assert_eq!(tr.lambda_max, 0.0);
        assert_eq!(tr.tail_bound, 0.0);

        let v = su2(80).with_spectrum_bound(Some(1600.0));
        let cert = v.check_growth(1.0);
        assert!(matches!(v.truncation_cutoff(&cert, 2, 1.0, 1e-3), Err(Error::Certification(_))));

        let cert = v.check_growth(0.1);
        let tr = v.truncation_cutoff(&cert, 2, 1.0, 1e-12).unwrap();
        // independent evaluation of the same majorant, summed over the exact window sequence
        let kappa = 1.0 - 0.2;
        let mut direct = 0.0;
        for k in 0..20000 {
            let x = tr.lambda_max + k as f64;
            direct += (2.0 + x) * cert.c * cert.c * (-kappa * x).exp();
        }
        assert!((tr.tail_bound - direct).abs() <= 1e-9 * direct);
        assert!(tr.tail_bound < 1e-12);
        assert!(tr.lambda_max < 60.0);
    }

    #[test]
    fn shift_moves_ground() {
        let v = su2(3).shifted(0.75);
        assert_eq!(v.ground(), -0.75);
        let w = v.shifted(-0.75);
        assert_eq!(w.ground(), 0.0);
        let z = su2(3).shifted(0.0);
        assert_eq!(z.levels()[2].lambda, 2.0);
    }

    #[test]
    fn rigged_table() {
        let d = |rate, degree| classify_rigged(DecayDescriptor { rate, degree });
        assert_eq!(d(1.0, 0), RiggedClass::CheckSpace);
        assert_eq!(d(0.0, 3), RiggedClass::HatOnly);
        assert_eq!(d(-0.5, 0), RiggedClass::Neither);
    }

    #[test]
    fn json_roundtrip() {
        let v = su2(4).with_spectrum_bound(Some(4.0)).with_density(DensityMajorant::constant(5.0));
        let j = SpectralVftJson::from_vft(&v, vec![v.check_growth(0.1)]);
        let s = serde_json::to_string(&j).unwrap();
        let back: SpectralVftJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.growth, j.growth);
        let w = back.into_vft(DEFAULT_TOL).unwrap();
        assert_eq!(w.spectrum_bound(), Some(4.0));
        assert_eq!(w.density(), &DensityMajorant::constant(5.0));
        for (a, b) in v.levels().iter().zip(w.levels()) {
            assert_eq!(a.lambda, b.lambda);
            assert_eq!(a.block, b.block);
        }
    }
}
