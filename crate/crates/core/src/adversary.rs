//! Instance generators: the adaptive phase adversary against deterministic
//! algorithms, the greedy trap, and seeded random streams.
//!
//! The adversary issues up to `n` copies of `s(i)` in phase `i` and moves on
//! as soon as one is accepted. The first phase with no acceptance ends the
//! run; an optimal offline packing then takes all `n` rejected copies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::OnlineAlgorithm;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::math::{phi, raw};

/// Offset that makes the phase sizes track the threshold just ahead of the
/// algorithm: `1/(8n)`.
pub fn default_alpha(n: usize) -> f64 {
    1.0 / (8.0 * n as f64)
}

/// `1/(64 n^2)`: keeps every phase size strictly above 1/2 while moving the
/// ratio bound by far less than `1/(52 n)`.
pub fn default_epsilon(n: usize) -> f64 {
    1.0 / (64.0 * (n * n) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarySequence {
    pub n: usize,
    pub alpha: f64,
    pub epsilon: f64,
    /// `n + 1` phase sizes; the last is 1.
    pub s: Vec<f64>,
    /// The same sizes without the `epsilon` perturbation.
    pub unperturbed: Vec<f64>,
}

pub fn build_sequence(n: usize, alpha: f64, epsilon: f64) -> Result<AdversarySequence> {
    if n == 0 {
        return Err(Error::Parameter("adversary needs n >= 1".into()));
    }
    let nf = n as f64;
    if !(0.0..=1.0 / nf).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha {alpha} outside [0, 1/n]")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    let mut unperturbed: Vec<f64> = (0..n)
        .map(|i| raw::threshold((i as f64 / nf + alpha).min(1.0)))
        .collect();
    let mut s: Vec<f64> = unperturbed.iter().map(|&v| v + epsilon).collect();
    if s[n - 1] > 1.0 {
        return Err(Error::Parameter(format!(
            "epsilon {epsilon} pushes the last phase size above 1"
        )));
    }
    unperturbed.push(1.0);
    s.push(1.0);
    Ok(AdversarySequence {
        n,
        alpha,
        epsilon,
        s,
        unperturbed,
    })
}

/// `build_sequence(n, 1/(8n), 1/(64 n^2))`.
pub fn default_sequence(n: usize) -> Result<AdversarySequence> {
    build_sequence(n, default_alpha(n), default_epsilon(n))
}

fn ratio_bound(n: usize, s: &[f64]) -> (f64, usize) {
    let nf = n as f64;
    let mut prefix = 0.0;
    let mut best = (0.0, 0);
    for j in 0..=n {
        if j > 0 {
            prefix += s[j - 1];
        }
        let u = prefix / nf / s[j];
        if u > best.0 {
            best = (u, j);
        }
    }
    best
}

impl AdversarySequence {
    /// Largest ratio any deterministic algorithm can be held to, and the
    /// number of accepting phases attaining it.
    pub fn theoretical_u(&self) -> (f64, usize) {
        ratio_bound(self.n, &self.s)
    }

    pub fn theoretical_u_unperturbed(&self) -> (f64, usize) {
        ratio_bound(self.n, &self.unperturbed)
    }

    /// `sum_{i <= j} s(i) / n` on the unperturbed sizes, for `j = 0..=n`.
    pub fn prefix_gains(&self) -> Vec<f64> {
        let nf = self.n as f64;
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for &v in &self.unperturbed[..self.n] {
            acc += v;
            out.push(acc / nf);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    /// 1-based phase number.
    pub phase: usize,
    pub size: f64,
    pub issued: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryTranscript {
    pub n: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub phases: Vec<Phase>,
    /// Number of accepting phases.
    pub j: usize,
    pub det_gain: f64,
    pub opt_value: f64,
    pub ratio: f64,
    /// Every issued size in order.
    pub stream: Vec<f64>,
}

impl AdversaryTranscript {
    /// The issued stream as an instance whose certificate packs the final,
    /// fully rejected phase one item per bin.
    pub fn to_instance(&self, against: &str) -> Instance {
        let mut inst = Instance::new(self.n, self.stream.clone())
            .with_meta("generator", "adversary")
            .with_meta("against", against)
            .with_meta("alpha", self.alpha)
            .with_meta("epsilon", self.epsilon)
            .with_meta("accepting_phases", self.j);
        inst.opt_certificate = Some(self.opt_value);
        inst
    }

    /// Assignment realizing `opt_value`: the last `n` stream items, one per bin.
    pub fn certificate_assignment(&self) -> Vec<Option<usize>> {
        let start = self.stream.len() - self.n;
        (0..self.stream.len())
            .map(|k| k.checked_sub(start))
            .collect()
    }
}

/// Plays the phase adversary against `alg`, which must be fresh. A terminated
/// algorithm is treated as rejecting everything.
pub fn run_adversary(seq: &AdversarySequence, alg: &mut dyn OnlineAlgorithm) -> Result<AdversaryTranscript> {
    let n = seq.n;
    let mut phases = Vec::new();
    let mut stream = Vec::new();
    let mut det_gain = 0.0;
    let mut j = 0;
    for (i, &size) in seq.s.iter().enumerate() {
        let mut accepted = false;
        let mut issued = 0;
        while issued < n && !accepted {
            issued += 1;
            stream.push(size);
            if !alg.is_terminated() {
                accepted = alg.offer(size)?.accepted();
            }
        }
        phases.push(Phase {
            phase: i + 1,
            size,
            issued,
            accepted,
        });
        if !accepted {
            break;
        }
        j += 1;
        det_gain += size;
    }
    if j > n {
        return Err(Error::Transcript {
            index: stream.len() - 1,
            reason: format!("{} accepted more than n items above 1/2", alg.name()),
        });
    }
    let opt_value = n as f64 * seq.s[j];
    Ok(AdversaryTranscript {
        n,
        alpha: seq.alpha,
        epsilon: seq.epsilon,
        phases,
        j,
        det_gain,
        opt_value,
        ratio: det_gain / opt_value,
        stream,
    })
}

/// `n` items of size `1/2 + epsilon` followed by `n` items of size 1.
pub fn greedy_trap(n: usize, epsilon: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Parameter("greedy trap needs n >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Parameter(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    let mut items = vec![0.5 + epsilon; n];
    items.extend(std::iter::repeat_n(1.0, n));
    let mut inst = Instance::new(n, items)
        .with_meta("generator", "greedy-trap")
        .with_meta("epsilon", epsilon);
    inst.opt_certificate = Some(n as f64);
    Ok(inst)
}

/// Seeded random stream. `mix` weighs the small, medium and large bands;
/// sizes are uniform within the chosen band.
pub fn fuzz_instance(n: usize, length: usize, mix: [f64; 3], seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Parameter("fuzz needs n >= 1".into()));
    }
    let bands = WeightedIndex::new(mix)
        .map_err(|e| Error::Parameter(format!("class weights {mix:?}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ph = phi();
    let items = (0..length)
        .map(|_| match bands.sample(&mut rng) {
            0 => loop {
                let s = rng.random_range(0.0..ph);
                if s > 0.0 {
                    break s;
                }
            },
            1 => rng.random_range(ph..=0.5),
            _ => 1.0 - 0.5 * rng.random::<f64>(),
        })
        .collect();
    Ok(Instance::new(n, items)
        .with_meta("generator", "fuzz")
        .with_meta("seed", seed)
        .with_meta("mix", mix.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{FirstFit, Rta};
    use crate::math::ratio;

    #[test]
    fn tiny_sequences() {
        let s1 = build_sequence(1, 1.0 / 8.0, 1e-9).unwrap();
        assert_eq!(s1.unperturbed, vec![0.5, 1.0]);
        assert_eq!(s1.theoretical_u_unperturbed(), (0.5, 1));
        let s2 = build_sequence(2, 1.0 / 16.0, 1e-9).unwrap();
        assert_eq!(s2.unperturbed, vec![0.5, 0.5, 1.0]);
        assert_eq!(s2.theoretical_u_unperturbed().0, 0.5);
    }

    #[test]
    fn eight_bins() {
        let eps = default_epsilon(8);
        let seq = build_sequence(8, 1.0 / 64.0, eps).unwrap();
        let want = (2.0 * std::f64::consts::E).powf(5.0 / 8.0 + 1.0 / 64.0 - 1.0) + eps;
        assert!((seq.s[5] - want).abs() < 1e-15);
        assert!(seq.s.windows(2).all(|w| w[0] <= w[1]));
        assert!(seq.s[0] > 0.5);
    }

    #[test]
    fn parameter_errors() {
        assert!(build_sequence(0, 0.0, 1e-3).is_err());
        assert!(build_sequence(4, 0.5, 1e-3).is_err());
        assert!(build_sequence(4, 0.1, 0.0).is_err());
        assert!(build_sequence(4, 0.25, 0.01).is_err());
    }

    #[test]
    fn bound_for_thousand_bins() {
        let (u, _) = default_sequence(1000).unwrap().theoretical_u();
        assert!(u <= ratio() - 1.0 / 52_000.0);
    }

    struct Refuser;

    impl OnlineAlgorithm for Refuser {
        fn name(&self) -> &'static str {
            "refuser"
        }
        fn bin_count(&self) -> usize {
            3
        }
        fn offer(&mut self, _size: f64) -> Result<crate::engine::Decision> {
            Ok(crate::engine::Decision::reject())
        }
        fn is_terminated(&self) -> bool {
            false
        }
        fn snapshot(&self) -> crate::engine::Snapshot {
            unimplemented!()
        }
    }

    #[test]
    fn refuser_gets_nothing() {
        let t = run_adversary(&default_sequence(3).unwrap(), &mut Refuser).unwrap();
        assert_eq!(t.j, 0);
        assert_eq!(t.ratio, 0.0);
        assert_eq!(t.stream.len(), 3);
    }

    #[test]
    fn greedy_accepts_every_phase() {
        let seq = default_sequence(2).unwrap();
        let t = run_adversary(&seq, &mut FirstFit::new(2).unwrap()).unwrap();
        assert_eq!(t.j, 2);
        assert!((t.det_gain - (1.0 + 2.0 * seq.epsilon)).abs() < 1e-15);
        assert_eq!(t.opt_value, 2.0);
        assert!((t.ratio - (0.5 + seq.epsilon)).abs() < 1e-15);
        assert_eq!(t.phases.len(), 3);
        assert_eq!(t.phases[2].issued, 2);
    }

    #[test]
    fn rta_ratio_within_bound() {
        let n = 100;
        let seq = default_sequence(n).unwrap();
        let t = run_adversary(&seq, &mut Rta::new(n).unwrap()).unwrap();
        assert!(t.ratio <= seq.theoretical_u().0 + 1e-12);
        assert!(t.ratio > 0.58);
        let inst = t.to_instance("rta");
        inst.validate().unwrap();
        let assign = t.certificate_assignment();
        assert!(crate::opt::check_certificate(&inst.items, n, t.opt_value, Some(&assign)).unwrap());
    }

    #[test]
    fn trap_shape() {
        let inst = greedy_trap(2, 0.01).unwrap();
        assert_eq!(inst.items, vec![0.51, 0.51, 1.0, 1.0]);
        assert_eq!(inst.opt_certificate, Some(2.0));
        assert!(greedy_trap(2, 0.5).is_err());
    }

    #[test]
    fn fuzz_bands_and_reproducibility() {
        let large = fuzz_instance(2, 5, [0.0, 0.0, 1.0], 7).unwrap();
        assert!(large.items.iter().all(|&s| s > 0.5 && s <= 1.0));
        let medium = fuzz_instance(2, 20, [0.0, 1.0, 0.0], 7).unwrap();
        assert!(medium.items.iter().all(|&s| s >= phi() && s <= 0.5));
        let small = fuzz_instance(2, 20, [1.0, 0.0, 0.0], 7).unwrap();
        assert!(small.items.iter().all(|&s| s > 0.0 && s < phi()));
        assert_eq!(fuzz_instance(5, 50, [1.0, 1.0, 1.0], 9), fuzz_instance(5, 50, [1.0, 1.0, 1.0], 9));
        assert!(fuzz_instance(2, 5, [0.0, 0.0, 0.0], 1).is_err());
        assert!(fuzz_instance(2, 5, [-1.0, 1.0, 0.0], 1).is_err());
    }
}
