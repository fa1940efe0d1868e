//! Seeded property checks run against a user-supplied theory.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluator::{check_adjoint, check_semigroup, eval_with_cutoff, max_block_diff};
use crate::linalg::op_norm;
use crate::oracle::{brute_contract, random_bordism, random_decomposition, RandomBordismParams};
use crate::report::ValidationReport;
use crate::spectral::SpectralVft;

pub const SEMIGROUP_TOL: f64 = 1e-10;
pub const ADJOINT_TOL: f64 = 1e-9;
pub const GLUING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Semigroup,
    Adjoint,
    Gluing,
    Growth,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semigroup" => Ok(Suite::Semigroup),
            "adjoint" => Ok(Suite::Adjoint),
            "gluing" => Ok(Suite::Gluing),
            "growth" => Ok(Suite::Growth),
            other => Err(Error::Precondition(format!("unknown suite {other:?}"))),
        }
    }
}

fn random_s(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(0.2..2.0), rng.random_range(-3.0..3.0))
}

fn small_params() -> RandomBordismParams {
    RandomBordismParams {
        max_boundary: 2,
        max_genus: 1,
        max_components: 2,
        allow_closed: true,
        min_re: 0.2,
    }
}

pub fn run_suite(vft: &SpectralVft, suite: Suite, seed: u64) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport::new();
    match suite {
        Suite::Semigroup => {
            for i in 0..20 {
                let (s, t) = (random_s(&mut rng), random_s(&mut rng));
                let r = check_semigroup(vft, s, t)?;
                report.push(format!("semigroup[{i}]"), r.residual < SEMIGROUP_TOL, Some(r.residual), Some(format!("s={s}, s'={t}")));
            }
            let s = random_s(&mut rng);
            let r = check_semigroup(vft, s, s.conj())?;
            let n = r.normality.unwrap_or(0.0);
            report.push("normality", n < SEMIGROUP_TOL, Some(n), Some(format!("s={s}")));
        }
        Suite::Adjoint => {
            for i in 0..10 {
                let x = random_bordism(&mut rng, &small_params());
                let r = check_adjoint(vft, &x)?;
                report.push(format!("adjoint[{i}]"), r < ADJOINT_TOL, Some(r), None);
            }
        }
        Suite::Gluing => {
            let top = vft.max_lambda();
            for i in 0..10 {
                let x = random_bordism(&mut rng, &small_params());
                let direct = eval_with_cutoff(vft, &x, top)?;
                let scale = direct.blocks.iter().map(|b| op_norm(&b.matrix)).fold(1.0, f64::max);
                for k in 0..2 {
                    let brute = brute_contract(vft, &random_decomposition(&x, rng.random()), top)?;
                    let r = max_block_diff(&direct, &brute);
                    report.push(format!("gluing[{i}.{k}]"), r < GLUING_TOL * scale, Some(r), None);
                }
            }
        }
        Suite::Growth => {
            let top = vft.max_lambda();
            for t in [0.05, 0.1, 0.5] {
                let cert = vft.check_growth(t);
                let holds = vft
                    .levels()
                    .iter()
                    .all(|l| l.norms.max() <= cert.c * (t * l.lambda).exp());
                report.push(format!("growth[t={t}]"), holds && cert.c.is_finite(), Some(cert.c), None);
                report.push(
                    format!("interior[t={t}]"),
                    vft.len() == 1 || cert.argmax_lambda < top,
                    Some(cert.argmax_lambda),
                    None,
                );
            }
            let windows_ok = vft.levels().iter().all(|l| {
                let n = vft.levels().iter().filter(|m| m.lambda >= l.lambda && m.lambda <= l.lambda + 1.0).count();
                n as f64 <= vft.density().eval(l.lambda + 1.0)
            });
            report.push("density", windows_ok, None, None);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yang_mills::{build_datum, ym_vft, GroupType};

    #[test]
    fn suites_pass_on_su2() {
        let datum = build_datum(GroupType::A1, num_rational::Rational64::new(1, 1)).unwrap();
        let v = ym_vft(&datum, 12.0).unwrap();
        for suite in [Suite::Semigroup, Suite::Adjoint, Suite::Gluing, Suite::Growth] {
            let r = run_suite(&v, suite, 3).unwrap();
            assert!(r.passed, "{suite:?}: {:?}", r.failures().collect::<Vec<_>>());
        }
        assert_eq!(run_suite(&v, Suite::Adjoint, 9).unwrap(), run_suite(&v, Suite::Adjoint, 9).unwrap());
    }

    #[test]
    fn unknown_suite() {
        assert!("nope".parse::<Suite>().is_err());
    }
}
