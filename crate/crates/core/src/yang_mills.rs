//! 2d Yang-Mills theories from compact-group root data.
//!
//! Weights are written in the fundamental-weight basis. All root data,
//! dimensions and Casimir values are exact rationals; floating point only
//! appears when the spectral theory is assembled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{FrobeniusAlgebra, DEFAULT_TOL};
use crate::spectral::{DensityMajorant, SpectralVft};

pub type Q = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupType {
    Trivial,
    U1,
    A1,
    A2,
}

impl FromStr for GroupType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trivial" => Ok(GroupType::Trivial),
            "u1" => Ok(GroupType::U1),
            "a1" | "su2" => Ok(GroupType::A1),
            "a2" | "su3" => Ok(GroupType::A2),
            other => Err(Error::UnsupportedGroup(other.to_string())),
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupType::Trivial => "trivial",
            GroupType::U1 => "u1",
            GroupType::A1 => "a1",
            GroupType::A2 => "a2",
        })
    }
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::Precondition(format!("not a rational number: {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Q::new(p, q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum {
    pub group: GroupType,
    pub rank: usize,
    /// Simple roots in the weight basis.
    pub simple_roots: Vec<Vec<Q>>,
    pub positive_roots: Vec<Vec<Q>>,
    /// Half-sum of the positive roots.
    pub weyl_vector: Vec<Q>,
    /// Inner products of the weight basis vectors (long roots have length² 2).
    pub inner: Vec<Vec<Q>>,
    /// User normalization of the Casimir.
    pub kappa: Q,
    /// Per-type factor making `kappa = 1` the conventional physics normalization
    /// (`j(j+1)` for A1, `n²` for U1).
    pub reference: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DominantWeight(pub Vec<i64>);

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn qv(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| q(x)).collect()
}

pub fn build_datum(group: GroupType, kappa: Q) -> Result<RootDatum> {
    if !kappa.is_positive() {
        return Err(Error::Precondition(format!("normalization {kappa} is not positive")));
    }
    let (rank, simple, positive, inner, reference) = match group {
        GroupType::Trivial => (0, vec![], vec![], vec![], Q::one()),
        GroupType::U1 => (1, vec![], vec![], vec![vec![Q::one()]], Q::one()),
        GroupType::A1 => (1, vec![qv(&[2])], vec![qv(&[2])], vec![vec![Q::new(1, 2)]], Q::new(1, 2)),
        GroupType::A2 => {
            // rows of the Cartan matrix; the weight-basis Gram is its inverse
            let a1 = qv(&[2, -1]);
            let a2 = qv(&[-1, 2]);
            let inner = vec![vec![Q::new(2, 3), Q::new(1, 3)], vec![Q::new(1, 3), Q::new(2, 3)]];
            (2, vec![a1.clone(), a2.clone()], vec![a1, a2, qv(&[1, 1])], inner, Q::new(1, 2))
        }
    };
    let mut weyl_vector = vec![Q::zero(); rank];
    for root in &positive {
        for (w, r) in weyl_vector.iter_mut().zip(root) {
            *w += r / q(2);
        }
    }
    let datum = RootDatum {
        group,
        rank,
        simple_roots: simple,
        positive_roots: positive,
        weyl_vector,
        inner,
        kappa,
        reference,
    };
    debug_assert!(datum.positive_roots.iter().all(|a| datum.dot(a, a).is_positive()));
    Ok(datum)
}

impl RootDatum {
    pub fn dot(&self, x: &[Q], y: &[Q]) -> Q {
        let mut acc = Q::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += x[i] * self.inner[i][j] * y[j];
            }
        }
        acc
    }

    /// The same datum with weight coordinates reordered: new coordinate `i` is old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> RootDatum {
        let re = |v: &Vec<Q>| perm.iter().map(|&p| v[p]).collect::<Vec<_>>();
        let simple_order: Vec<usize> = if self.simple_roots.len() == self.rank { perm.to_vec() } else { (0..self.simple_roots.len()).collect() };
        RootDatum {
            group: self.group,
            rank: self.rank,
            simple_roots: simple_order.iter().map(|&p| re(&self.simple_roots[p])).collect(),
            positive_roots: self.positive_roots.iter().map(re).collect(),
            weyl_vector: re(&self.weyl_vector),
            inner: perm.iter().map(|&a| perm.iter().map(|&b| self.inner[a][b]).collect()).collect(),
            kappa: self.kappa,
            reference: self.reference,
        }
    }

    fn as_q(&self, mu: &DominantWeight) -> Result<Vec<Q>> {
        if mu.0.len() != self.rank {
            return Err(Error::Precondition(format!(
                "weight {:?} has {} coordinates, rank is {}",
                mu.0,
                mu.0.len(),
                self.rank
            )));
        }
        let v = qv(&mu.0);
        if self.simple_roots.iter().any(|a| self.dot(a, &v).is_negative()) {
            return Err(Error::NotDominant(mu.0.clone()));
        }
        Ok(v)
    }

    pub fn is_dominant(&self, mu: &DominantWeight) -> bool {
        self.as_q(mu).is_ok()
    }

    fn shifted(&self, v: &[Q]) -> Vec<Q> {
        v.iter().zip(&self.weyl_vector).map(|(a, b)| a + b).collect()
    }

    pub fn weyl_dim(&self, mu: &DominantWeight) -> Result<u64> {
        let v = self.as_q(mu)?;
        let shifted = self.shifted(&v);
        let mut num = Q::one();
        let mut den = Q::one();
        for a in &self.positive_roots {
            num *= self.dot(a, &shifted);
            den *= self.dot(a, &self.weyl_vector);
        }
        let d = num / den;
        assert!(d.is_integer() && d.is_positive(), "Weyl dimension {d} is not a positive integer");
        Ok(d.to_integer() as u64)
    }

    pub fn casimir(&self, mu: &DominantWeight) -> Result<Q> {
        let v = self.as_q(mu)?;
        Ok(self.casimir_unchecked(&v))
    }

    fn casimir_unchecked(&self, v: &[Q]) -> Q {
        let s = self.shifted(v);
        (self.dot(&s, &s) - self.dot(&self.weyl_vector, &self.weyl_vector)) * self.kappa * self.reference
    }

    /// Largest `g` with every Casimir value in `g·ℤ`.
    pub fn casimir_granularity(&self) -> Option<Q> {
        let scale = self.kappa * self.reference;
        let mut gens = Vec::new();
        for i in 0..self.rank {
            gens.push(self.inner[i][i]);
            for j in i + 1..self.rank {
                gens.push(self.inner[i][j] * q(2));
            }
            let e: Vec<Q> = (0..self.rank).map(|k| if k == i { Q::one() } else { Q::zero() }).collect();
            gens.push(self.dot(&e, &self.weyl_vector) * q(2));
        }
        gens.into_iter()
            .filter(|g| !g.is_zero())
            .map(|g| (g * scale).abs())
            .reduce(|a, b| {
                let l = a.denom().lcm(b.denom());
                Q::new((a.numer() * (l / a.denom())).gcd(&(b.numer() * (l / b.denom()))), l)
            })
    }

    /// Every dominant weight with `c(μ) ≤ c_max`, sorted by Casimir then coordinates.
    pub fn enumerate_dominant(&self, c_max: f64) -> Vec<DominantWeight> {
        let mut out: Vec<(Q, DominantWeight)> = Vec::new();
        if self.rank == 0 {
            return if c_max >= 0.0 { vec![DominantWeight(vec![])] } else { vec![] };
        }
        // c(μ) ≥ κ⟨μ,μ⟩ on the dominant cone since ⟨μ,δ⟩ ≥ 0 there
        let gram = DMatrix::from_fn(self.rank, self.rank, |i, j| self.inner[i][j].to_f64().unwrap());
        let low = SymmetricEigen::new(gram).eigenvalues.min();
        let scale = (self.kappa * self.reference).to_f64().unwrap();
        let bound = (c_max.max(0.0) / (scale * low)).sqrt().ceil() as i64 + 1;
        let lo = if self.simple_roots.is_empty() { -bound } else { 0 };
        let mut coords = vec![lo; self.rank];
        loop {
            let v = qv(&coords);
            if self.simple_roots.iter().all(|a| !self.dot(a, &v).is_negative()) {
                let c = self.casimir_unchecked(&v);
                if (*c.numer() as f64) <= c_max * *c.denom() as f64 {
                    out.push((c, DominantWeight(coords.clone())));
                }
            }
            let mut k = 0;
            loop {
                if k == self.rank {
                    out.sort();
                    return out.into_iter().map(|(_, w)| w).collect();
                }
                coords[k] += 1;
                if coords[k] <= bound {
                    break;
                }
                coords[k] = lo;
                k += 1;
            }
        }
    }
}

/// Weights sharing one Casimir value.
#[derive(Debug, Clone, PartialEq)]
pub struct YmLevel {
    pub casimir: Q,
    pub weights: Vec<DominantWeight>,
    pub dims: Vec<u64>,
}

pub fn ym_levels(datum: &RootDatum, c_max: f64) -> Vec<YmLevel> {
    let mut grouped: BTreeMap<Q, Vec<DominantWeight>> = BTreeMap::new();
    for w in datum.enumerate_dominant(c_max) {
        let c = datum.casimir(&w).expect("enumerated weights are dominant");
        grouped.entry(c).or_default().push(w);
    }
    grouped
        .into_iter()
        .map(|(casimir, weights)| {
            let dims = weights.iter().map(|w| datum.weyl_dim(w).unwrap()).collect();
            YmLevel { casimir, weights, dims }
        })
        .collect()
}

/// The Yang-Mills spectral theory truncated at `c_max`.
///
/// Equal Casimir values are merged into one block, a direct sum of character
/// blocks. The spectrum is declared complete up to `c_max`; the density
/// majorant counts the possible Casimir values in a unit window.
pub fn ym_vft(datum: &RootDatum, c_max: f64) -> Result<SpectralVft> {
    let levels = ym_levels(datum, c_max);
    let entries = levels
        .iter()
        .map(|l| {
            let blocks: Vec<_> = l.dims.iter().map(|&d| FrobeniusAlgebra::character_block(d)).collect();
            Ok((l.casimir.to_f64().unwrap(), FrobeniusAlgebra::direct_sum(&blocks)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let vft = SpectralVft::new(entries, DEFAULT_TOL)?;
    Ok(match datum.casimir_granularity() {
        None => vft,
        Some(g) => {
            let per_window = (Q::one() / g).floor().to_f64().unwrap() + 1.0;
            vft.with_spectrum_bound(Some(c_max)).with_density(DensityMajorant::constant(per_window))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcBound {
    pub t: f64,
    /// Smallest constant (slightly inflated) with `d(μ) < C e^{t c(μ)}` over the enumeration.
    pub c: f64,
    pub argmax: DominantWeight,
    pub argmax_casimir: f64,
    pub max_casimir: f64,
    pub interior: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

pub fn verify_dc_bound(datum: &RootDatum, t: f64, c_max: f64) -> Result<DcBound> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("t = {t} must be positive")));
    }
    let weights = datum.enumerate_dominant(c_max);
    let mut best: Option<(f64, DominantWeight, f64)> = None;
    let mut max_c = 0.0f64;
    for w in weights {
        let c = datum.casimir(&w)?.to_f64().unwrap();
        let d = datum.weyl_dim(&w)? as f64;
        max_c = max_c.max(c);
        let v = d * (-t * c).exp();
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, w, c));
        }
    }
    let (v, argmax, argmax_casimir) = best.ok_or(Error::EmptySpectrum)?;
    let interior = argmax_casimir < max_c;
    Ok(DcBound {
        t,
        c: v * (1.0 + 1e-9),
        argmax,
        argmax_casimir,
        max_casimir: max_c,
        interior,
        warning: (!interior).then(|| "maximizer sits at the enumeration boundary; increase c_max".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(xs: &[i64]) -> DominantWeight {
        DominantWeight(xs.to_vec())
    }

    #[test]
    fn root_data() {
        let u1 = build_datum(GroupType::U1, Q::one()).unwrap();
        assert_eq!(u1.rank, 1);
        assert!(u1.positive_roots.is_empty());
        assert_eq!(u1.weyl_vector, vec![Q::zero()]);

        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        let alpha = &a1.positive_roots[0];
        assert_eq!(a1.dot(alpha, alpha), q(2));
        assert_eq!(a1.weyl_vector, vec![alpha[0] / q(2)]);
        assert_eq!(a1.dot(&a1.weyl_vector, &a1.weyl_vector), Q::new(1, 2));

        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        assert_eq!(a2.positive_roots.len(), 3);
        let sum: Vec<Q> = (0..2).map(|i| a2.simple_roots[0][i] + a2.simple_roots[1][i]).collect();
        assert_eq!(a2.weyl_vector, sum);
        for a in &a2.positive_roots {
            assert!(a2.dot(a, a).is_positive());
        }
        assert!(matches!("g2".parse::<GroupType>(), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn dimensions() {
        for g in [GroupType::Trivial, GroupType::U1, GroupType::A1, GroupType::A2] {
            let d = build_datum(g, Q::one()).unwrap();
            let zero = DominantWeight(vec![0; d.rank]);
            assert_eq!(d.weyl_dim(&zero).unwrap(), 1);
            assert_eq!(d.casimir(&zero).unwrap(), Q::zero());
        }
        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        for m in 0..10 {
            assert_eq!(a1.weyl_dim(&w(&[m])).unwrap(), m as u64 + 1);
        }
        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        assert_eq!(a2.weyl_dim(&w(&[1, 0])).unwrap(), 3);
        assert_eq!(a2.weyl_dim(&w(&[1, 1])).unwrap(), 8);
        assert_eq!(a2.weyl_dim(&w(&[2, 0])).unwrap(), 6);
        assert!(matches!(a2.weyl_dim(&w(&[-1, 2])), Err(Error::NotDominant(_))));
    }

    #[test]
    fn casimir_normalizations() {
        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        for m in 0..12 {
            // j(j+1) with j = m/2
            assert_eq!(a1.casimir(&w(&[m])).unwrap(), Q::new(m * (m + 2), 4));
        }
        let u1 = build_datum(GroupType::U1, Q::new(3, 2)).unwrap();
        for n in -4..=4 {
            assert_eq!(u1.casimir(&w(&[n])).unwrap(), Q::new(3, 2) * q(n * n));
        }
        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        assert_eq!(a2.casimir(&w(&[1, 0])).unwrap(), Q::new(4, 3));
        assert_eq!(a2.casimir(&w(&[1, 1])).unwrap(), q(3));
    }

    #[test]
    fn enumeration() {
        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        assert_eq!(a1.enumerate_dominant(0.0), vec![w(&[0])]);
        assert_eq!(a1.enumerate_dominant(2.0), vec![w(&[0]), w(&[1]), w(&[2])]);
        let u1 = build_datum(GroupType::U1, Q::one()).unwrap();
        let ns: Vec<i64> = u1.enumerate_dominant(4.0).into_iter().map(|x| x.0[0]).collect();
        assert_eq!(ns, vec![0, -1, 1, -2, 2]);
        // brute-force cross-check of the cone enumeration
        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        let got = a2.enumerate_dominant(20.0);
        let mut expect = 0;
        for p in 0..40i64 {
            for r in 0..40i64 {
                if (p * p + r * r + p * r + 3 * p + 3 * r) as f64 / 3.0 <= 20.0 {
                    expect += 1;
                }
            }
        }
        assert_eq!(got.len(), expect);
    }

    #[test]
    fn permuted_roots_give_same_values() {
        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        let p = a2.permuted(&[1, 0]);
        for mu in a2.enumerate_dominant(30.0) {
            let nu = w(&[mu.0[1], mu.0[0]]);
            assert_eq!(a2.weyl_dim(&mu).unwrap(), p.weyl_dim(&nu).unwrap());
            assert_eq!(a2.casimir(&mu).unwrap(), p.casimir(&nu).unwrap());
        }
    }

    #[test]
    fn theories() {
        let u1 = build_datum(GroupType::U1, Q::one()).unwrap();
        let v = ym_vft(&u1, 1.0).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.level(1).lambda, 1.0);
        assert_eq!(v.level(1).dim(), 2);

        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        let v = ym_vft(&a1, 2.0).unwrap();
        let dims: Vec<usize> = v.levels().iter().map(|l| l.dim()).collect();
        assert_eq!(dims, vec![1, 1, 1]);
        for (k, l) in v.levels().iter().enumerate() {
            assert!((l.block.m(0, 0, 0).re - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
            assert!((l.block.trace()[0].re - (k as f64 + 1.0)).abs() < 1e-15);
        }
        assert_eq!(v.spectrum_bound(), Some(2.0));
        assert_eq!(a1.casimir_granularity(), Some(Q::new(1, 4)));
        assert_eq!(v.density(), &DensityMajorant::constant(5.0));

        let t = build_datum(GroupType::Trivial, Q::one()).unwrap();
        let v = ym_vft(&t, 10.0).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v.is_complete());
    }

    #[test]
    fn dc_bounds() {
        let t = build_datum(GroupType::Trivial, Q::one()).unwrap();
        let b = verify_dc_bound(&t, 0.1, 10.0).unwrap();
        assert!(b.c > 1.0 && b.c < 1.0 + 1e-6);

        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        let b = verify_dc_bound(&a1, 0.1, 400.0).unwrap();
        let scan = (0..200)
            .map(|m| (m as f64 + 1.0) * (-0.1 * (m * (m + 2)) as f64 / 4.0).exp())
            .fold(0.0, f64::max);
        assert!((b.c / scan - 1.0).abs() < 1e-8);
        assert!(b.interior);

        let a2 = build_datum(GroupType::A2, Q::one()).unwrap();
        let b = verify_dc_bound(&a2, 0.05, 400.0).unwrap();
        assert!(b.c.is_finite() && b.interior && b.warning.is_none());
        assert!(verify_dc_bound(&a2, 0.0, 10.0).is_err());
    }

    #[test]
    fn split_constants_certify_higher_genus() {
        use crate::spectral::MapCounts;
        let a1 = build_datum(GroupType::A1, Q::one()).unwrap();
        let v = ym_vft(&a1, 40.0).unwrap();
        let counts = MapCounts::for_surface(2, 0, 0);
        assert_eq!(counts, MapCounts { mult: 4, trace: 2 });
        let (cert, tr) = v.certify_split(counts, 1.0, 1e-12).unwrap();
        assert!(tr.tail_bound < 1e-12);
        // character blocks: ‖m‖ = 1/d peaks at the trivial representation
        assert!((cert.c_mult - 1.0).abs() < 1e-6);
        assert!(v.certify(counts.depth(), 1.0, 1e-12).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), Q::new(1, 2));
        assert_eq!(parse_rational("3").unwrap(), q(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
