//! Seeded synthetic problems: a K-sparse Gaussian signal observed through
//! i.i.d. standard normal measurement rows, delivered one row at a time.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). The signal is drawn from
//! stream 0 of the seeded generator and the rows from stream 1, so the row
//! sequence does not depend on how many draws the signal consumed. Normals
//! use the ziggurat sampler of `rand_distr::StandardNormal`.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

const SIGNAL_STREAM: u64 = 0;
const ROW_STREAM: u64 = 1;
const FIXTURE_MAGIC: &str = "seqzap-problem v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    /// Scale every row to unit l2 norm. Off by default.
    pub unit_norm_rows: bool,
}

impl ProblemSpec {
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            seed,
            unit_norm_rows: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("signal length must be at least 1"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(invalid(format!(
                "sparsity must lie in [1, {}], got {}",
                self.n, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparseProblem {
    spec: ProblemSpec,
    x_true: DVector<f64>,
    /// Sorted, 0-based.
    support: Vec<usize>,
    rows: ChaCha8Rng,
    rows_drawn: usize,
}

pub fn generate_problem(spec: ProblemSpec) -> Result<SparseProblem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(SIGNAL_STREAM);
    let mut support = index::sample(&mut rng, spec.n, spec.k).into_vec();
    support.sort_unstable();
    let mut x_true = DVector::zeros(spec.n);
    for &i in &support {
        x_true[i] = rng.sample(StandardNormal);
    }
    Ok(SparseProblem::assemble(spec, x_true, support))
}

impl SparseProblem {
    fn assemble(spec: ProblemSpec, x_true: DVector<f64>, support: Vec<usize>) -> Self {
        let mut rows = ChaCha8Rng::seed_from_u64(spec.seed);
        rows.set_stream(ROW_STREAM);
        Self {
            spec,
            x_true,
            support,
            rows,
            rows_drawn: 0,
        }
    }

    /// Replaces the ground truth with an arbitrary signal while keeping the
    /// seeded row stream. Intended for test fixtures.
    pub fn with_signal(spec: ProblemSpec, x_true: DVector<f64>) -> Result<Self> {
        if spec.n == 0 || x_true.len() != spec.n {
            return Err(invalid(format!(
                "signal has length {}, expected {}",
                x_true.len(),
                spec.n
            )));
        }
        let support = x_true
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        let spec = ProblemSpec {
            k: support.len(),
            ..spec
        };
        Ok(Self::assemble(spec, x_true, support))
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn x_true(&self) -> &DVector<f64> {
        &self.x_true
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn rows_drawn(&self) -> usize {
        self.rows_drawn
    }

    /// Draws the next row `a` and its noiseless observation `aᵀ x_true`.
    pub fn next_measurement(&mut self) -> (DVector<f64>, f64) {
        let n = self.spec.n;
        let rng = &mut self.rows;
        let mut a = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        if self.spec.unit_norm_rows {
            let norm = a.norm();
            if norm > 0.0 {
                a /= norm;
            }
        }
        let y = a.dot(&self.x_true);
        self.rows_drawn += 1;
        (a, y)
    }

    /// Text fixture: header, dimensions, seed, support and nonzero values.
    /// Values are written in shortest round-trip form so parsing is exact.
    pub fn to_fixture(&self) -> String {
        let mut out = String::new();
        let s = &self.spec;
        let _ = writeln!(out, "{FIXTURE_MAGIC}");
        let _ = writeln!(out, "n {}", s.n);
        let _ = writeln!(out, "k {}", self.support.len());
        let _ = writeln!(out, "seed {}", s.seed);
        let _ = writeln!(out, "unit_norm_rows {}", u8::from(s.unit_norm_rows));
        let support: Vec<String> = self.support.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "support {}", support.join(" "));
        let values: Vec<String> = self
            .support
            .iter()
            .map(|&i| format!("{:e}", self.x_true[i]))
            .collect();
        let _ = writeln!(out, "values {}", values.join(" "));
        out
    }

    pub fn from_fixture(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(FIXTURE_MAGIC) {
            return Err(invalid("fixture is missing the problem header"));
        }
        let (mut n, mut k, mut seed, mut unit, mut support, mut values) =
            (None, None, None, None, None, None);
        for line in lines {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "n" => n = Some(parse_one::<usize>(key, rest)?),
                "k" => k = Some(parse_one::<usize>(key, rest)?),
                "seed" => seed = Some(parse_one::<u64>(key, rest)?),
                "unit_norm_rows" => unit = Some(parse_one::<u8>(key, rest)? != 0),
                "support" => support = Some(parse_list::<usize>(key, rest)?),
                "values" => values = Some(parse_list::<f64>(key, rest)?),
                other => return Err(invalid(format!("unknown fixture field `{other}`"))),
            }
        }
        let missing = |f: &str| invalid(format!("fixture is missing `{f}`"));
        let spec = ProblemSpec {
            n: n.ok_or_else(|| missing("n"))?,
            k: k.ok_or_else(|| missing("k"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            unit_norm_rows: unit.unwrap_or(false),
        };
        let support = support.ok_or_else(|| missing("support"))?;
        let values = values.ok_or_else(|| missing("values"))?;
        spec.validate()?;
        if support.len() != spec.k || values.len() != spec.k {
            return Err(invalid("support and values must both have k entries"));
        }
        let mut x_true = DVector::zeros(spec.n);
        for (&i, &v) in support.iter().zip(&values) {
            if i >= spec.n {
                return Err(invalid(format!("support index {i} out of range")));
            }
            x_true[i] = v;
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(invalid("support indices must be distinct"));
        }
        Ok(Self::assemble(spec, x_true, sorted))
    }
}

impl Iterator for SparseProblem {
    type Item = (DVector<f64>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_measurement())
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("bad value for `{key}`: {s}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split_whitespace().map(|t| parse_one(key, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = ProblemSpec::new(256, 20, 7);
        let mut a = generate_problem(spec).unwrap();
        let mut b = generate_problem(spec).unwrap();
        assert_eq!(a.x_true(), b.x_true());
        assert_eq!(a.support().len(), 20);
        assert_eq!(a.x_true().iter().filter(|v| **v != 0.0).count(), 20);
        for _ in 0..5 {
            assert_eq!(a.next_measurement(), b.next_measurement());
        }
    }

    #[test]
    fn dense_boundary_and_bad_specs() {
        let p = generate_problem(ProblemSpec::new(8, 8, 1)).unwrap();
        assert_eq!(p.support(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(generate_problem(ProblemSpec::new(8, 9, 1)).is_err());
        assert!(generate_problem(ProblemSpec::new(8, 0, 1)).is_err());
        assert!(generate_problem(ProblemSpec::new(0, 0, 1)).is_err());
    }

    #[test]
    fn zero_and_unit_signals() {
        let spec = ProblemSpec::new(16, 3, 5);
        let mut zero = SparseProblem::with_signal(spec, DVector::zeros(16)).unwrap();
        for _ in 0..10 {
            assert_eq!(zero.next_measurement().1, 0.0);
        }
        let mut e = DVector::zeros(16);
        e[4] = 1.0;
        let mut unit = SparseProblem::with_signal(spec, e).unwrap();
        for _ in 0..10 {
            let (a, y) = unit.next_measurement();
            assert_eq!(y, a[4]);
        }
    }

    #[test]
    fn assembled_residual_is_tiny() {
        let mut p = generate_problem(ProblemSpec::new(64, 6, 11)).unwrap();
        let x = p.x_true().clone();
        for _ in 0..64 {
            let (a, y) = p.next_measurement();
            assert!((a.dot(&x) - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn unit_norm_flag() {
        let spec = ProblemSpec {
            unit_norm_rows: true,
            ..ProblemSpec::new(32, 4, 2)
        };
        let mut p = generate_problem(spec).unwrap();
        let (a, _) = p.next_measurement();
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fixture_round_trip() {
        let mut p = generate_problem(ProblemSpec::new(40, 5, 99)).unwrap();
        let text = p.to_fixture();
        let mut q = SparseProblem::from_fixture(&text).unwrap();
        assert_eq!(p.x_true(), q.x_true());
        assert_eq!(p.spec(), q.spec());
        assert_eq!(p.next_measurement(), q.next_measurement());
        assert_eq!(q.to_fixture(), text);
    }

    #[test]
    fn fixture_rejects_garbage() {
        assert!(SparseProblem::from_fixture("nope").is_err());
        let text = "seqzap-problem v1\nn 4\nk 1\nseed 1\nsupport 9\nvalues 1.0\n";
        assert!(SparseProblem::from_fixture(text).is_err());
        let text = "seqzap-problem v1\nn 4\nk 2\nseed 1\nsupport 1 1\nvalues 1.0 2.0\n";
        assert!(SparseProblem::from_fixture(text).is_err());
        let text = "seqzap-problem v1\nn 4\nk 1\nseed 1\nvalues 1.0\n";
        assert!(SparseProblem::from_fixture(text).is_err());
    }
}
