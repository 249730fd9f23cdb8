//! Cross-checks of the closed-form rates against independent oracles:
//! Monte-Carlo and log-det mutual information over the explicit signal
//! model, and the information identities on finite alphabets.

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrete::{self, JointPmf};
use crate::error::Result;
use crate::gaussian::{self, capacity};
use crate::montecarlo::{gaussian_mi_exact, gaussian_mi_mc};
use crate::network::{Channel, Ordering, PowerAllocation, Topology};
use crate::protocol::{PresetName, ProtocolPreset};
use crate::signal::{rate_terms, SignalModel, Symbol, TermKind};

/// Samples per Monte-Carlo estimate.
pub const MC_SAMPLES: usize = 100_000;
/// Agreement radius in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Relative tolerance of exact comparisons.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Smallest distance between two nodes of a random instance.
const MIN_SEPARATION: f64 = 0.05;

/// A random network with a feasible allocation and its quantization noise.
#[derive(Debug, Clone)]
pub struct Instance {
    pub topology: Topology,
    pub ordering: Ordering,
    pub allocation: PowerAllocation,
}

impl Instance {
    pub fn channel(&self) -> Result<Channel> {
        Channel::new(&self.topology, &self.ordering)
    }
}

/// Draws an instance with `N <= max_relays`: relays scattered around the
/// unit source-destination segment, path-loss exponent in `[2, 4]`, SNR in
/// `[0, 15]` dB, random coherence, ordering and full-mixed allocation with
/// the smallest admissible quantization noise.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_relays: usize) -> Result<Instance> {
    loop {
        let n = rng.random_range(1..=max_relays.max(1));
        let destination = [1.0f64, 0.0];
        let mut positions: Vec<[f64; 2]> = vec![[0.0, 0.0]];
        while positions.len() < n + 1 {
            let p: [f64; 2] = [rng.random_range(-0.5..1.5), rng.random_range(-0.75..0.75)];
            let apart = |q: &[f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() > MIN_SEPARATION;
            if positions.iter().all(apart) && apart(&destination) {
                positions.push(p);
            }
        }
        positions.push(destination);
        let theta = rng.random_range(2.0..4.0);
        let snr = crate::network::db_to_linear(rng.random_range(0.0..15.0));
        let coherent = rng.random_bool(0.5);
        let topology = Topology::from_positions(&positions, theta, vec![snr; n + 1], vec![1.0; n + 1], coherent)?;
        let ordering = Ordering::all(n).choose(rng).expect("at least one ordering").clone();
        let preset = ProtocolPreset::new(PresetName::FullMixed, n, coherent)?;
        let values: Vec<f64> = (0..preset.free().len()).map(|_| rng.random::<f64>()).collect();
        let raw = preset.project(&values)?;
        let ch = Channel::new(&topology, &ordering)?;
        let allocation = gaussian::with_minimal_quantization(&ch, &raw)?;
        if gaussian::evaluate(&ch, &allocation)?.feasible {
            return Ok(Instance { topology, ordering, allocation });
        }
    }
}

/// One mutual information compared three ways.
#[derive(Debug, Clone)]
pub struct TermCheck {
    pub instance: usize,
    pub kind: TermKind,
    pub closed_form: f64,
    /// Log-det value over the explicit signal model.
    pub exact: f64,
    pub estimate: f64,
    pub stderr: f64,
}

impl TermCheck {
    pub fn exact_deviation(&self) -> f64 {
        (self.exact - self.closed_form).abs() / self.closed_form.abs().max(1e-3)
    }

    /// Distance from the closed form in standard errors (0 for degenerate
    /// terms whose estimate is exact).
    pub fn sigmas(&self) -> f64 {
        let d = (self.estimate - self.closed_form).abs();
        if d <= 1e-9 {
            0.0
        } else {
            d / self.stderr
        }
    }

    pub fn exact_ok(&self) -> bool {
        self.exact_deviation() <= EXACT_TOLERANCE
    }

    pub fn mc_ok(&self) -> bool {
        (self.estimate - self.closed_form).abs() <= MC_SIGMAS * self.stderr + 1e-9
    }
}

/// Perturbation applied to every covariance before estimation; the
/// negative control of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation(pub f64);

fn perturb(cov: &DMatrix<f64>, a: &[usize], b: &[usize], eps: f64) -> DMatrix<f64> {
    // inflate the A-B cross covariance and the diagonal so the matrix stays PSD
    let mut m = cov.clone();
    let (i, j) = (a[0], b[0]);
    let s = eps * (m[(i, i)] * m[(j, j)]).sqrt();
    m[(i, j)] += s;
    m[(j, i)] += s;
    m[(i, i)] *= 1.0 + eps;
    m[(j, j)] *= 1.0 + eps;
    m
}

/// Every rate term of `instances` random instances against log-det and
/// Monte-Carlo oracles. Instance `i` and its terms use streams derived from
/// `seed`, so the run is reproducible and independent of thread count.
pub fn oracle_equivalence(
    instances: usize,
    samples: usize,
    seed: u64,
    perturbation: Option<Perturbation>,
) -> Result<Vec<TermCheck>> {
    let per_instance: Vec<Result<Vec<TermCheck>>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let inst = random_instance(&mut rng, 2)?;
            let ch = inst.channel()?;
            let terms = rate_terms(&ch, &inst.allocation)?;
            terms
                .iter()
                .enumerate()
                .map(|(t, term)| {
                    let cov = match perturbation {
                        Some(Perturbation(eps)) => perturb(&term.covariance, &term.a, &term.b, eps),
                        None => term.covariance.clone(),
                    };
                    let exact = gaussian_mi_exact(&cov, &term.a, &term.b, &term.c)?;
                    let mc_seed = seed ^ ((i as u64) << 32) ^ (t as u64 + 1);
                    let est = gaussian_mi_mc(&cov, &term.a, &term.b, &term.c, samples, mc_seed)?;
                    Ok(TermCheck {
                        instance: i,
                        kind: term.kind,
                        closed_form: term.closed_form,
                        exact,
                        estimate: est.estimate,
                        stderr: est.stderr,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_instance {
        out.extend(r?);
    }
    Ok(out)
}

/// For the first message layer no descriptions enter the determinant
/// ratio; it must reduce to `C(signal / interference)` with the signal read
/// off the explicit model. Returns the largest relative deviation.
pub fn first_layer_log_det_deviation(instances: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let inst = random_instance(&mut rng, 2)?;
        let ch = inst.channel()?;
        let model = SignalModel::new(&ch, &inst.allocation)?;
        let col = model.column(Symbol::Own(1)).expect("first layer");
        for l in 1..=ch.n() + 1 {
            let with = gaussian::covariance_matrix(&ch, &inst.allocation, l, 1, 0)?;
            let without = gaussian::covariance_matrix(&ch, &inst.allocation, l, 1, 1)?;
            let ratio = (with.determinant() / without.determinant()).log2();
            let g = model.output(l)?[col];
            let closed = capacity(g * g / without[(0, 0)])?;
            worst = worst.max((ratio - closed).abs() / closed.abs().max(1e-3));
        }
    }
    Ok(worst)
}

/// Outcome of the finite-alphabet identity suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteSummary {
    /// Largest `|I(X;W|U) + I(X;Y|WU) - I(X;YW|U)|` over random pmfs.
    pub chain_rule: f64,
    /// Largest `|I(X;YW|U) - I(X;Y|WU)|` over pmfs with `X - U - W`.
    pub markov_equality: f64,
    /// Largest quantization-chain deviation of factored pmfs.
    pub quantization_chain: f64,
}

fn names(v: &[&str], sizes: &[usize]) -> Vec<(String, usize)> {
    v.iter().zip(sizes).map(|(n, s)| (n.to_string(), *s)).collect()
}

/// Pmf of `(X, Y, U, W)` built as `p(u) p(x|u) p(w|u) p(y|x,u,w)`.
fn markov_pmf<R: Rng + ?Sized>(rng: &mut R, sizes: [usize; 4]) -> Result<JointPmf> {
    let [sx, sy, su, sw] = sizes;
    let mut draw = |k: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    let pu = draw(su);
    let px: Vec<Vec<f64>> = (0..su).map(|_| draw(sx)).collect();
    let pw: Vec<Vec<f64>> = (0..su).map(|_| draw(sw)).collect();
    let py: Vec<Vec<f64>> = (0..sx * su * sw).map(|_| draw(sy)).collect();
    let mut probs = Vec::with_capacity(sx * sy * su * sw);
    for x in 0..sx {
        for y in 0..sy {
            for u in 0..su {
                for w in 0..sw {
                    probs.push(pu[u] * px[u][x] * pw[u][w] * py[(x * su + u) * sw + w][y]);
                }
            }
        }
    }
    JointPmf::from_weights(names(&["X", "Y", "U", "W"], &sizes), probs)
}

/// Chain rule on `pmfs` random tables, the Markov equality on as many Markov
/// tables and the quantization chain on factored pmfs for one and two relays.
pub fn discrete_suite(pmfs: usize, seed: u64) -> Result<DiscreteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain_rule = 0.0f64;
    let mut markov_equality = 0.0f64;
    for _ in 0..pmfs {
        let sizes = [0; 4].map(|_| rng.random_range(2..=3));
        let p = JointPmf::random(names(&["X", "Y", "U", "W"], &sizes), &mut rng)?;
        let c = discrete::packing_identity_check(&p, "X", "Y", "U", "W")?;
        chain_rule = chain_rule.max(c.chain_rule_residual.abs());
        let m = markov_pmf(&mut rng, sizes)?;
        let c = discrete::packing_identity_check(&m, "X", "Y", "U", "W")?;
        markov_equality = markov_equality.max(c.markov_equality_deviation);
    }
    let mut quantization_chain = 0.0f64;
    for n in 1..=2 {
        let p = discrete::factored_pmf(n, 2, &mut rng)?;
        quantization_chain = quantization_chain.max(discrete::quantization_chain_deviation(&p, n)?);
    }
    Ok(DiscreteSummary { chain_rule, markov_equality, quantization_chain })
}

/// One named line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every suite. `instances` random Gaussian instances go through the
/// oracle comparison; a perturbed copy of the first one must be caught.
pub fn run_all(instances: usize, seed: u64, perturbation: Option<Perturbation>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let s = 10f64.sqrt();
    let scalar = DMatrix::from_row_slice(2, 2, &[1.0, s, s, 11.0]);
    let est = gaussian_mi_mc(&scalar, &[0], &[1], &[], MC_SAMPLES, seed)?;
    checks.push(Check {
        name: "scalar snr 10 monte-carlo".into(),
        passed: est.agrees_with(3.4594, MC_SIGMAS) && est.agrees_with(11f64.log2(), MC_SIGMAS),
        detail: format!("estimate {:.6} stderr {:.2e} target 3.4594", est.estimate, est.stderr),
    });

    let terms = oracle_equivalence(instances, MC_SAMPLES, seed, perturbation)?;
    let exact_worst = terms.iter().map(TermCheck::exact_deviation).fold(0.0, f64::max);
    checks.push(Check {
        name: "log-det vs closed form".into(),
        passed: terms.iter().all(TermCheck::exact_ok),
        detail: format!("{} terms, worst relative deviation {exact_worst:.3e}", terms.len()),
    });
    let misses: Vec<&TermCheck> = terms.iter().filter(|t| !t.mc_ok()).collect();
    let worst_sigma = terms.iter().map(TermCheck::sigmas).fold(0.0, f64::max);
    let mut detail = format!(
        "{} terms at {MC_SAMPLES} samples, {} outside {MC_SIGMAS} sigma, worst {worst_sigma:.2} sigma",
        terms.len(),
        misses.len()
    );
    for m in misses.iter().take(5) {
        detail.push_str(&format!(
            "\n    instance {} {}: closed {:.6} estimate {:.6} stderr {:.2e}",
            m.instance, m.kind, m.closed_form, m.estimate, m.stderr
        ));
    }
    checks.push(Check { name: "monte-carlo vs closed form".into(), passed: misses.is_empty(), detail });

    let first = first_layer_log_det_deviation(instances, seed)?;
    checks.push(Check {
        name: "first-layer log-det vs C(.)".into(),
        passed: first <= EXACT_TOLERANCE,
        detail: format!("worst relative deviation {first:.3e}"),
    });

    let control = oracle_equivalence(1, MC_SAMPLES, seed, Some(Perturbation(0.2)))?;
    let caught = control.iter().filter(|t| !t.exact_ok()).count();
    checks.push(Check {
        name: "negative control (perturbed covariance)".into(),
        passed: caught > 0,
        detail: format!("{caught} of {} perturbed terms flagged", control.len()),
    });

    let d = discrete_suite(1000, seed)?;
    checks.push(Check {
        name: "discrete chain rule".into(),
        passed: d.chain_rule < 1e-12,
        detail: format!("worst residual {:.3e}", d.chain_rule),
    });
    checks.push(Check {
        name: "discrete markov equality".into(),
        passed: d.markov_equality < 1e-10,
        detail: format!("worst deviation {:.3e}", d.markov_equality),
    });
    checks.push(Check {
        name: "factored pmf quantization chain".into(),
        passed: d.quantization_chain < discrete::MARKOV_TOLERANCE,
        detail: format!("worst deviation {:.3e}", d.quantization_chain),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_feasible_and_reproducible() {
        for i in 0..10 {
            let mut a = ChaCha8Rng::seed_from_u64(i);
            let mut b = ChaCha8Rng::seed_from_u64(i);
            let x = random_instance(&mut a, 2).unwrap();
            let y = random_instance(&mut b, 2).unwrap();
            assert_eq!(x.allocation, y.allocation);
            assert!(x.topology.n_relays() <= 2);
            let ch = x.channel().unwrap();
            assert!(gaussian::evaluate(&ch, &x.allocation).unwrap().feasible);
        }
    }

    #[test]
    fn small_oracle_run_and_negative_control() {
        let clean = oracle_equivalence(2, 20_000, 11, None).unwrap();
        assert!(clean.iter().all(TermCheck::exact_ok));
        let dirty = oracle_equivalence(2, 20_000, 11, Some(Perturbation(0.2))).unwrap();
        assert!(dirty.iter().any(|t| !t.exact_ok()));
        assert!(first_layer_log_det_deviation(5, 3).unwrap() < EXACT_TOLERANCE);
    }

    #[test]
    fn discrete_suite_small() {
        let d = discrete_suite(20, 1).unwrap();
        assert!(d.chain_rule < 1e-12 && d.markov_equality < 1e-10 && d.quantization_chain < 1e-10);
    }
}
