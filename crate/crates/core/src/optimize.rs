//! Derivative-free maximization of the total rate over allocations and
//! orderings, and parameter sweeps over the two-relay line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{evaluate, optimal_total, with_minimal_quantization};
use crate::network::{Channel, Ordering, Owner, Param, PowerAllocation, Topology};
use crate::protocol::{PresetName, ProtocolPreset};

pub const DEFAULT_RESTARTS: usize = 32;
pub const STEP_SHRINK: f64 = 0.5;
pub const MIN_STEP: f64 = 1e-5;
const INITIAL_STEP: f64 = 0.25;
const RANDOM_DIRECTIONS: usize = 2;
const IMPROVEMENT: f64 = 1e-12;
/// The search runs on `y` with fractions `x = y^SEARCH_POWER`, which
/// resolves small fractions (a faint broadcast to a close neighbour can
/// matter) without shrinking the step everywhere.
const SEARCH_POWER: i32 = 3;

fn to_fraction(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v.powi(SEARCH_POWER)).collect()
}

fn to_search(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.powf(1.0 / SEARCH_POWER as f64)).collect()
}

/// Search effort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Starting points per ordering, deterministic seeds included.
    pub restarts: usize,
    /// Objective evaluations allowed for one pattern search.
    pub max_evaluations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, max_evaluations: 20_000 }
    }
}

impl Budget {
    pub fn with_restarts(restarts: usize) -> Result<Self> {
        if restarts == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(Self { restarts, ..Self::default() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub preset: PresetName,
    /// Best allocation, quantization noises included.
    pub allocation: PowerAllocation,
    pub ordering: Ordering,
    pub rate: f64,
    pub restarts: usize,
    pub evaluations: usize,
    /// Searches that ended because the step fell below [`MIN_STEP`].
    pub converged: usize,
    /// True when no start produced a valid allocation and the direct link
    /// was reported instead.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

struct Search {
    x: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Pattern search on the unit box. Polls the coordinate directions,
/// power transfers between two parameters of the same node and a few
/// random directions; halves the step after an unsuccessful poll.
fn pattern_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: Vec<f64>,
    groups: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
    max_evaluations: usize,
) -> Search {
    let d = x0.len();
    let mut x = x0;
    let mut value = f(&x);
    let mut evaluations = 1;
    if d == 0 {
        return Search { x, value, evaluations, converged: true };
    }
    let mut directions: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..d {
        directions.push(vec![(i, 1.0)]);
        directions.push(vec![(i, -1.0)]);
    }
    for g in groups {
        for &i in g {
            for &j in g {
                if i != j {
                    directions.push(vec![(i, 1.0), (j, -1.0)]);
                }
            }
        }
    }
    let mut step = INITIAL_STEP;
    let mut trial = x.clone();
    let mut last_success: Option<usize> = None;
    while step >= MIN_STEP {
        let mut polls: Vec<Vec<(usize, f64)>> = Vec::with_capacity(directions.len() + RANDOM_DIRECTIONS + 1);
        if let Some(k) = last_success {
            polls.push(directions[k].clone());
        }
        polls.extend(directions.iter().cloned());
        for _ in 0..RANDOM_DIRECTIONS {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
            polls.push(v.into_iter().enumerate().map(|(i, c)| (i, c / norm)).collect());
        }
        let mut improved = false;
        for (idx, dir) in polls.iter().enumerate() {
            trial.copy_from_slice(&x);
            let mut moved = false;
            for &(i, c) in dir {
                let v = (x[i] + step * c).clamp(0.0, 1.0);
                moved |= v != x[i];
                trial[i] = v;
            }
            if !moved {
                continue;
            }
            if evaluations >= max_evaluations {
                return Search { x, value, evaluations, converged: false };
            }
            let fv = f(&trial);
            evaluations += 1;
            if fv > value + IMPROVEMENT {
                x.copy_from_slice(&trial);
                value = fv;
                improved = true;
                let offset = usize::from(last_success.is_some());
                last_success = match idx.checked_sub(offset) {
                    Some(k) if k < directions.len() => Some(k),
                    None => last_success,
                    _ => None,
                };
                break;
            }
        }
        if !improved {
            step *= STEP_SHRINK;
            last_success = None;
        }
    }
    Search { x, value, evaluations, converged: true }
}

/// Preset parameters grouped by the node paying for them.
fn node_groups(preset: &ProtocolPreset) -> Vec<Vec<usize>> {
    let mut owners: Vec<Owner> = preset.free().iter().map(|p| p.owner()).collect();
    owners.sort();
    owners.dedup();
    owners
        .into_iter()
        .map(|o| (0..preset.free().len()).filter(|&i| preset.free()[i].owner() == o).collect())
        .collect()
}

/// Level that mostly hears a parameter's signal.
fn receiver_of(p: &Param, ordering: &Ordering) -> (usize, usize) {
    match *p {
        Param::Own { level } => (0, level),
        Param::SourceSupport { target, .. } => (0, target + 1),
        Param::RelaySupport { relay, target, .. } => (relay, target + 1),
        Param::Broadcast { relay, refinement } => (relay, ordering.refinement_target(relay, refinement)),
    }
}

/// Uniform split, decode-and-forward style split of the single-message
/// parameters, and all power of each node on its strongest link.
fn deterministic_starts(preset: &ProtocolPreset, ch: &Channel) -> Vec<Vec<f64>> {
    let groups = node_groups(preset);
    let free = preset.free();
    let d = free.len();
    let mut starts = Vec::new();

    let mut uniform = vec![0.0; d];
    for g in &groups {
        for &i in g {
            uniform[i] = 1.0 / g.len() as f64;
        }
    }
    starts.push(uniform);

    let mut df = vec![0.0; d];
    for g in &groups {
        let members: Vec<usize> = g
            .iter()
            .copied()
            .filter(|&i| match free[i] {
                Param::Own { level } | Param::SourceSupport { level, .. } | Param::RelaySupport { level, .. } => level == 1,
                Param::Broadcast { .. } => false,
            })
            .collect();
        for &i in &members {
            df[i] = 1.0 / members.len() as f64;
        }
    }
    if df.iter().any(|&v| v > 0.0) {
        starts.push(df);
    }

    let mut strongest = vec![0.0; d];
    for g in &groups {
        let best = g
            .iter()
            .copied()
            .max_by(|&i, &j| {
                let (ti, ri) = receiver_of(&free[i], ch.ordering());
                let (tj, rj) = receiver_of(&free[j], ch.ordering());
                ch.gain(ti, ri).total_cmp(&ch.gain(tj, rj)).then(j.cmp(&i))
            })
            .expect("groups are non-empty");
        strongest[best] = 1.0;
    }
    starts.push(strongest);
    starts
}

fn objective(preset: &ProtocolPreset, ch: &Channel, y: &[f64]) -> f64 {
    preset
        .project(&to_fraction(y))
        .and_then(|a| optimal_total(ch, &a))
        .unwrap_or(f64::NEG_INFINITY)
}

struct Candidate {
    rate: f64,
    ordering: usize,
    x: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

/// Maximizes the total rate of `preset` on `topo`. With `search_orderings`
/// every ordering of [`ProtocolPreset::orderings`] is tried, otherwise only
/// the first. `seeds` are extra starting allocations (for instance the
/// optimum of a more restricted preset); each is tried with every ordering
/// and with its own when given.
pub fn optimize(
    topo: &Topology,
    preset: &ProtocolPreset,
    search_orderings: bool,
    budget: Budget,
    seed: u64,
    seeds: &[(PowerAllocation, Option<Ordering>)],
) -> Result<OptimizationResult> {
    if budget.restarts == 0 || budget.max_evaluations == 0 {
        return Err(Error::Config("budget must be positive".into()));
    }
    if topo.n_relays() != preset.n || topo.coherent() != preset.coherent {
        return Err(Error::Preset("preset does not match the topology".into()));
    }
    let mut warnings = Vec::new();
    if preset.n > 3 {
        warnings.push(format!("{} relays: ordering search limited to the identity source order", preset.n));
    }
    let mut orderings = preset.orderings();
    if !search_orderings {
        orderings.truncate(1);
    }
    let mut seed_points: Vec<(Vec<f64>, Option<Ordering>)> = Vec::new();
    for (a, o) in seeds {
        let mut a = a.clone();
        for l in 1..=a.n() {
            for i in 1..=a.refinements(l) {
                a.set_quant_noise(l, i, f64::INFINITY)?;
            }
        }
        seed_points.push((preset.coordinates(&a)?, o.clone()));
    }
    for (_, o) in &seed_points {
        if let Some(o) = o {
            if !orderings.contains(o) {
                orderings.push(o.clone());
            }
        }
    }

    let channels: Vec<Channel> = orderings.iter().map(|o| Channel::new(topo, o)).collect::<Result<_>>()?;
    let groups = node_groups(preset);
    // (ordering index, start index, explicit start)
    let mut jobs: Vec<(usize, usize, Option<Vec<f64>>)> = Vec::new();
    for (oi, ch) in channels.iter().enumerate() {
        let mut fixed = deterministic_starts(preset, ch);
        for (x, o) in &seed_points {
            if o.as_ref().is_none_or(|o| o == ch.ordering()) || search_orderings {
                fixed.push(x.clone());
            }
        }
        let total = budget.restarts.max(fixed.len());
        for s in 0..total {
            jobs.push((oi, s, fixed.get(s).cloned()));
        }
    }
    let candidates: Vec<Candidate> = jobs
        .par_iter()
        .map(|(oi, s, start)| {
            let ch = &channels[*oi];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((*oi as u64) << 32) | *s as u64);
            let x0 = start.clone().unwrap_or_else(|| random_start(&groups, preset.free().len(), &mut rng));
            let y0 = to_search(&x0);
            let f = |x: &[f64]| objective(preset, ch, x);
            let r = pattern_search(&f, y0, &groups, &mut rng, budget.max_evaluations);
            Candidate { rate: r.value, ordering: *oi, x: to_fraction(&r.x), evaluations: r.evaluations, converged: r.converged }
        })
        .collect();

    let evaluations = candidates.iter().map(|c| c.evaluations).sum();
    let converged = candidates.iter().filter(|c| c.converged).count();
    // first best in job order, independent of completion order
    let best = candidates
        .iter()
        .filter(|c| c.rate.is_finite())
        .fold(None::<&Candidate>, |acc, c| match acc {
            Some(b) if b.rate >= c.rate => Some(b),
            _ => Some(c),
        });
    let Some(best) = best else {
        warnings.push("no start produced a valid allocation; reporting the direct link".into());
        let ch = &channels[0];
        let allocation = PowerAllocation::direct(preset.n);
        let rate = evaluate(ch, &allocation)?.total;
        return Ok(OptimizationResult {
            preset: preset.name,
            allocation,
            ordering: ch.ordering().clone(),
            rate,
            restarts: candidates.len(),
            evaluations,
            converged,
            fallback: true,
            warnings,
        });
    };
    let ch = &channels[best.ordering];
    let allocation = with_minimal_quantization(ch, &preset.project(&best.x)?)?;
    let report = evaluate(ch, &allocation)?;
    if !report.feasible {
        return Err(Error::Numerical("optimized allocation fails its quantization constraints".into()));
    }
    Ok(OptimizationResult {
        preset: preset.name,
        allocation,
        ordering: ch.ordering().clone(),
        rate: report.total,
        restarts: candidates.len(),
        evaluations,
        converged,
        fallback: false,
        warnings,
    })
}

/// Random point of the per-node simplices.
fn random_start(groups: &[Vec<usize>], d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for g in groups {
        // uniform on the simplex including the slack coordinate
        let e: Vec<f64> = (0..=g.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        for (k, &i) in g.iter().enumerate() {
            x[i] = e[k] / total;
        }
    }
    x
}

/// Optimizes `name`; `full_mixed` is seeded with the optimum of every
/// other applicable preset so that it dominates them.
pub fn optimize_preset(topo: &Topology, name: PresetName, budget: Budget, seed: u64) -> Result<OptimizationResult> {
    let n = topo.n_relays();
    let coherent = topo.coherent();
    let preset = ProtocolPreset::new(name, n, coherent)?;
    if name != PresetName::FullMixed {
        return optimize(topo, &preset, true, budget, seed, &[]);
    }
    let mut seeds = Vec::new();
    for other in PresetName::ALL {
        if other == PresetName::FullMixed || (other == PresetName::MixedCfDf && n != 2) {
            continue;
        }
        let r = optimize_preset(topo, other, budget, seed)?;
        seeds.push((r.allocation, Some(r.ordering)));
    }
    optimize(topo, &preset, true, budget, seed, &seeds)
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub preset: PresetName,
    pub coherent: bool,
    pub seed: u64,
    pub outcome: std::result::Result<OptimizationResult, Error>,
}

impl SweepRow {
    pub fn rate(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.rate)
    }
}

/// Optimizes every preset at every offset of the two-relay line. Cells are
/// independent; failures are kept per cell and the sweep continues. Rows
/// come out in grid-major, preset-minor order.
pub fn sweep(
    grid: &[f64],
    presets: &[PresetName],
    coherent: bool,
    snr: f64,
    pathloss_exponent: f64,
    budget: Budget,
    seed: u64,
) -> Vec<SweepRow> {
    let cells: Vec<(f64, PresetName)> = grid.iter().flat_map(|&r| presets.iter().map(move |&p| (r, p))).collect();
    cells
        .par_iter()
        .map(|&(r, preset)| {
            let outcome = Topology::two_relay_line(r, snr, pathloss_exponent, coherent)
                .and_then(|t| optimize_preset(&t, preset, budget, seed));
            SweepRow { r, preset, coherent, seed, outcome }
        })
        .collect()
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Budget {
        Budget { restarts: 4, max_evaluations: 5_000 }
    }

    #[test]
    fn pattern_search_finds_simplex_maximum() {
        // maximize -(x0-0.3)^2-(x1-0.5)^2 on one node
        let f = |x: &[f64]| -(x[0] - 0.3).powi(2) - (x[1] - 0.5).powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = pattern_search(&f, vec![0.0, 0.0], &[vec![0, 1]], &mut rng, 100_000);
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-4 && (r.x[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn one_hop_optimum_is_direct_capacity() {
        let t = Topology::two_relay_line(0.2, 10.0, 4.0, true).unwrap();
        let r = optimize_preset(&t, PresetName::OneHop, quick(), 0).unwrap();
        assert!((r.rate - 11f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn result_reevaluates_to_reported_rate() {
        let t = Topology::two_relay_line(0.3, 10.0, 4.0, true).unwrap();
        let r = optimize_preset(&t, PresetName::Cf, quick(), 3).unwrap();
        let ch = Channel::new(&t, &r.ordering).unwrap();
        let rep = evaluate(&ch, &r.allocation).unwrap();
        assert!(rep.feasible);
        assert!((rep.total - r.rate).abs() < 1e-9);
        assert!(r.allocation.check_power(true).is_ok());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let t = Topology::two_relay_line(-0.2, 10.0, 4.0, false).unwrap();
        let a = optimize_preset(&t, PresetName::Df, quick(), 9).unwrap();
        let b = optimize_preset(&t, PresetName::Df, quick(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_budget_and_mismatched_preset() {
        let t = Topology::two_relay_line(0.2, 10.0, 4.0, true).unwrap();
        let p = ProtocolPreset::new(PresetName::Df, 2, true).unwrap();
        assert!(optimize(&t, &p, true, Budget { restarts: 0, max_evaluations: 1 }, 0, &[]).is_err());
        let p = ProtocolPreset::new(PresetName::Df, 2, false).unwrap();
        assert!(optimize(&t, &p, true, quick(), 0, &[]).is_err());
    }

    #[test]
    fn empty_sweep() {
        assert!(sweep(&[0.1, 0.2], &[], true, 10.0, 4.0, quick(), 0).is_empty());
        let rows = sweep(&[0.5], &[PresetName::OneHop], true, 10.0, 4.0, quick(), 0);
        assert!(rows[0].outcome.is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-0.49, 0.49, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], -0.49);
        assert!((g[9] - 0.49).abs() < 1e-15);
        assert!((g[7] - 0.27222).abs() < 1e-5);
    }
}
