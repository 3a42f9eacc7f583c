//! Seeded synthetic datasets: a deterministic relation plus Gaussian noise.
//!
//! | relation        | base draw          | `a`            | `b`                  |
//! |-----------------|--------------------|----------------|----------------------|
//! | `linear`        | `x ~ U[-1, 1]`     | `x`            | `x + e`              |
//! | `quadratic`     | `x ~ U[-1, 1]`     | `x`            | `x^2 + e`            |
//! | `cubic`         | `x ~ U[-1, 1]`     | `x`            | `x^3 + e`            |
//! | `circular`      | `t ~ U[0, 2 pi)`   | `cos t + e1`   | `sin t + e2`         |
//! | `sin_of_square` | `x ~ U[0, 1]`      | `x`            | `sin(4 pi x^2) + e`  |

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HgrError, Result};
use crate::sample::SampleVector;
use crate::stats;

/// A scalar transformation applied before measuring linear correlation.
pub type Copula = fn(f64) -> f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Linear,
    Quadratic,
    Cubic,
    Circular,
    SinOfSquare,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Linear,
        Relation::Quadratic,
        Relation::Cubic,
        Relation::Circular,
        Relation::SinOfSquare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Linear => "linear",
            Relation::Quadratic => "quadratic",
            Relation::Cubic => "cubic",
            Relation::Circular => "circular",
            Relation::SinOfSquare => "sin_of_square",
        }
    }

    /// Optimal copula pair `(f, g)` for the noiseless relation, so that
    /// `rho(f(a), g(b)) = 1` at zero noise.
    pub fn oracle_copulas(self) -> Option<(Copula, Copula)> {
        fn id(x: f64) -> f64 {
            x
        }
        fn square(x: f64) -> f64 {
            x * x
        }
        fn neg_square(x: f64) -> f64 {
            -(x * x)
        }
        fn cube(x: f64) -> f64 {
            x * x * x
        }
        fn sin_sq(x: f64) -> f64 {
            libm::sin(4.0 * core::f64::consts::PI * x * x)
        }
        Some(match self {
            Relation::Linear => (id, id),
            Relation::Quadratic => (square, id),
            Relation::Cubic => (cube, id),
            Relation::Circular => (square, neg_square),
            Relation::SinOfSquare => (sin_sq, id),
        })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = HgrError;
    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| HgrError::InvalidSpec(format!("unknown relation {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub relation: Relation,
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub const MIN_SYNTHETIC_N: usize = 8;

impl SyntheticSpec {
    pub fn new(relation: Relation, n: usize, noise_sigma: f64, seed: u64) -> Result<Self> {
        let spec = SyntheticSpec {
            relation,
            n,
            noise_sigma,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SYNTHETIC_N {
            return Err(HgrError::InvalidSpec(format!(
                "n must be >= {MIN_SYNTHETIC_N}"
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(HgrError::InvalidSpec(
                "noise sigma must be finite and >= 0".to_string(),
            ));
        }
        Ok(())
    }

    /// Parses `relation:n=..:sigma=..[:seed=..]`. Missing `n` defaults to
    /// 1000, missing `sigma` and `seed` to 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(':');
        let relation: Relation = parts.next().unwrap_or("").trim().parse()?;
        let mut n = 1000usize;
        let mut sigma = 0.0f64;
        let mut seed = 0u64;
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                HgrError::InvalidSpec(format!("expected key=value, got {part:?}"))
            })?;
            let bad = || HgrError::InvalidSpec(format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "n" => n = value.trim().parse().map_err(|_| bad())?,
                "sigma" => sigma = value.trim().parse().map_err(|_| bad())?,
                "seed" => seed = value.trim().parse().map_err(|_| bad())?,
                other => return Err(HgrError::InvalidSpec(format!("unknown key {other:?}"))),
            }
        }
        SyntheticSpec::new(relation, n, sigma, seed)
    }

    pub fn label(&self) -> String {
        format!(
            "{}:n={}:sigma={}:seed={}",
            self.relation, self.n, self.noise_sigma, self.seed
        )
    }
}

/// Draws the `(a, b)` pair described by `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<(SampleVector, SampleVector)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.noise_sigma;
    let mut a = Vec::with_capacity(spec.n);
    let mut b = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        match spec.relation {
            Relation::Circular => {
                let t = rng.random_range(0.0..2.0 * core::f64::consts::PI);
                let e1: f64 = StandardNormal.sample(&mut rng);
                let e2: f64 = StandardNormal.sample(&mut rng);
                a.push(libm::cos(t) + sigma * e1);
                b.push(libm::sin(t) + sigma * e2);
            }
            rel => {
                let x = match rel {
                    Relation::SinOfSquare => rng.random_range(0.0..1.0),
                    _ => rng.random_range(-1.0..1.0),
                };
                let y = match rel {
                    Relation::Linear => x,
                    Relation::Quadratic => x * x,
                    Relation::Cubic => x * x * x,
                    _ => libm::sin(4.0 * core::f64::consts::PI * x * x),
                };
                let e: f64 = StandardNormal.sample(&mut rng);
                a.push(x);
                b.push(y + sigma * e);
            }
        }
    }
    Ok((
        SampleVector::new(a)?.with_name("a"),
        SampleVector::new(b)?.with_name("b"),
    ))
}

/// Pearson correlation after applying the relation's optimal copulas.
pub fn oracle_correlation(spec: &SyntheticSpec, a: &SampleVector, b: &SampleVector) -> Result<f64> {
    let (f, g) = spec
        .relation
        .oracle_copulas()
        .ok_or_else(|| HgrError::NoOracle(spec.relation.to_string()))?;
    let fa: Vec<f64> = a.values().iter().map(|&x| f(x)).collect();
    let gb: Vec<f64> = b.values().iter().map(|&x| g(x)).collect();
    if fa.len() != gb.len() {
        return Err(HgrError::LengthMismatch {
            left: fa.len(),
            right: gb.len(),
        });
    }
    stats::correlation(&fa, &gb).ok_or(HgrError::ZeroVariance)
}

/// Renders a pair as CSV with header `a,b`, using the shortest decimal
/// representation that round-trips each value.
pub fn to_csv(a: &SampleVector, b: &SampleVector) -> String {
    use core::fmt::Write;
    let mut out = String::from("a,b\n");
    for (x, y) in a.values().iter().zip(b.values()) {
        let _ = writeln!(out, "{x:?},{y:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_quadratic_is_exact() {
        let spec = SyntheticSpec::new(Relation::Quadratic, 50, 0.0, 4).unwrap();
        let (a, b) = generate(&spec).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*y, x * x);
            assert!((-1.0..=1.0).contains(x));
        }
    }

    #[test]
    fn noiseless_circle_on_unit_circle() {
        let spec = SyntheticSpec::new(Relation::Circular, 100, 0.0, 9).unwrap();
        let (a, b) = generate(&spec).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x * x + y * y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_generation_repeats() {
        let spec = SyntheticSpec::new(Relation::SinOfSquare, 64, 0.2, 77).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn noiseless_oracle_is_one_for_every_relation() {
        for rel in Relation::ALL {
            let spec = SyntheticSpec::new(rel, 200, 0.0, 1).unwrap();
            let (a, b) = generate(&spec).unwrap();
            let r = oracle_correlation(&spec, &a, &b).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "{rel}: {r}");
        }
    }

    #[test]
    fn linear_oracle_is_pearson() {
        let spec = SyntheticSpec::new(Relation::Linear, 100, 0.4, 2).unwrap();
        let (a, b) = generate(&spec).unwrap();
        let r = oracle_correlation(&spec, &a, &b).unwrap();
        assert_eq!(r, crate::correlation::pearson(&a, &b).unwrap());
    }

    #[test]
    fn parse_spec() {
        let s = SyntheticSpec::parse("quadratic:n=500:sigma=0.1:seed=3").unwrap();
        assert_eq!(
            s,
            SyntheticSpec::new(Relation::Quadratic, 500, 0.1, 3).unwrap()
        );
        assert_eq!(SyntheticSpec::parse("circular").unwrap().n, 1000);
        assert!(SyntheticSpec::parse("spiral:n=10").is_err());
        assert!(SyntheticSpec::parse("linear:n=4").is_err());
        assert!(SyntheticSpec::parse("linear:sigma=-1").is_err());
        assert!(SyntheticSpec::parse("linear:k=3").is_err());
    }

    #[test]
    fn csv_round_trips() {
        let spec = SyntheticSpec::new(Relation::Cubic, 10, 0.3, 5).unwrap();
        let (a, b) = generate(&spec).unwrap();
        let text = to_csv(&a, &b);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b"));
        for (line, (x, y)) in lines.zip(a.values().iter().zip(b.values())) {
            let (l, r) = line.split_once(',').unwrap();
            assert_eq!(l.parse::<f64>().unwrap(), *x);
            assert_eq!(r.parse::<f64>().unwrap(), *y);
        }
    }
}
