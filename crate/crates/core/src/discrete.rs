//! Finite-alphabet oracle: joint pmfs over named variables, conditional
//! mutual information, the rate expressions of the mixed strategy for
//! discrete memoryless networks and the identities used in its proof.
//!
//! Variable names follow one convention throughout: `U{k}`, `V{l}_{k}`,
//! `W{l}_{k}`, `Yhat{l}_{k}` and `Y{l}`, with `Y{N+1}` the destination.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::Ordering;

/// Largest product alphabet a table may have.
pub const MAX_TABLE: usize = 10_000_000;
/// Normalization tolerance of a joint table.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// `I(A; C | B)` below this counts as a Markov chain.
pub const MARKOV_TOLERANCE: f64 = 1e-10;

/// Joint probability table, last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    names: Vec<String>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

fn table_size(sizes: &[usize]) -> Result<usize> {
    sizes.iter().try_fold(1usize, |acc, &s| {
        if s == 0 {
            return Err(Error::Pmf("empty alphabet".into()));
        }
        acc.checked_mul(s)
            .filter(|&t| t <= MAX_TABLE)
            .ok_or_else(|| Error::Pmf(format!("product alphabet exceeds {MAX_TABLE} entries")))
    })
}

impl JointPmf {
    pub fn new(variables: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        let (names, sizes): (Vec<String>, Vec<usize>) = variables.into_iter().unzip();
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() || n.contains(char::is_whitespace) {
                return Err(Error::Pmf(format!("invalid variable name `{n}`")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Pmf(format!("variable `{n}` declared twice")));
            }
        }
        let size = table_size(&sizes)?;
        if probs.len() != size {
            return Err(Error::Pmf(format!("table has {} entries, alphabets need {size}", probs.len())));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Pmf("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Pmf(format!("probabilities sum to {total}")));
        }
        Ok(Self { names, sizes, probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(variables: Vec<(String, usize)>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Pmf("weights must have a positive finite sum".into()));
        }
        Self::new(variables, weights.into_iter().map(|w| w / total).collect())
    }

    /// Random table with independent exponential weights.
    pub fn random<R: Rng + ?Sized>(variables: Vec<(String, usize)>, rng: &mut R) -> Result<Self> {
        let size = table_size(&variables.iter().map(|v| v.1).collect::<Vec<_>>())?;
        let weights = (0..size).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        Self::from_weights(variables, weights)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn alphabet(&self, name: &str) -> Result<usize> {
        Ok(self.sizes[self.index(name)?])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    fn indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index(n.as_ref())).collect()
    }

    /// Table over `keep` (in that order).
    fn project(&self, keep: &[usize]) -> Vec<f64> {
        let out_sizes: Vec<usize> = keep.iter().map(|&i| self.sizes[i]).collect();
        let mut out = vec![0.0; out_sizes.iter().product()];
        let dims = self.sizes.len();
        let mut digits = vec![0usize; dims];
        for &p in &self.probs {
            if p > 0.0 {
                let mut idx = 0;
                for (&k, &s) in keep.iter().zip(&out_sizes) {
                    idx = idx * s + digits[k];
                }
                out[idx] += p;
            }
            for d in (0..dims).rev() {
                digits[d] += 1;
                if digits[d] < self.sizes[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        out
    }

    /// Marginal over `names`, in that order, renormalized.
    pub fn marginal<S: AsRef<str>>(&self, names: &[S]) -> Result<JointPmf> {
        let idx = self.indices(names)?;
        check_distinct(&idx)?;
        let table = self.project(&idx);
        let vars = idx.iter().map(|&i| (self.names[i].clone(), self.sizes[i])).collect();
        JointPmf::from_weights(vars, table)
    }

    /// `H(names)` in bits.
    pub fn entropy<S: AsRef<str>>(&self, names: &[S]) -> Result<f64> {
        let idx = self.indices(names)?;
        check_distinct(&idx)?;
        Ok(self.project(&idx).iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum())
    }

    /// Structured text: `var <name> <size>` lines, then `p <digits..> <prob>`
    /// for every nonzero entry.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# joint pmf\n");
        for (n, k) in self.names.iter().zip(&self.sizes) {
            let _ = writeln!(s, "var {n} {k}");
        }
        let dims = self.sizes.len();
        let mut digits = vec![0usize; dims];
        for &p in &self.probs {
            if p > 0.0 {
                s.push('p');
                for d in &digits {
                    let _ = write!(s, " {d}");
                }
                let _ = writeln!(s, " {p:?}");
            }
            for d in (0..dims).rev() {
                digits[d] += 1;
                if digits[d] < self.sizes[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut vars: Vec<(String, usize)> = Vec::new();
        let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Pmf(format!("line {}: {m}", no + 1));
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("var") => {
                    if !entries.is_empty() {
                        return Err(err("variables must be declared before entries"));
                    }
                    let name = tok.next().ok_or_else(|| err("missing variable name"))?;
                    let size = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err("missing or invalid alphabet size"))?;
                    if tok.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    vars.push((name.to_string(), size));
                }
                Some("p") => {
                    let rest: Vec<&str> = tok.collect();
                    if rest.len() != vars.len() + 1 {
                        return Err(err("entry needs one value per variable and a probability"));
                    }
                    let digits = rest[..vars.len()]
                        .iter()
                        .zip(&vars)
                        .map(|(t, (_, size))| t.parse::<usize>().ok().filter(|d| d < size))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| err("symbol outside its alphabet"))?;
                    let p = rest[vars.len()].parse::<f64>().map_err(|_| err("invalid probability"))?;
                    entries.push((digits, p));
                }
                _ => return Err(err("expected `var` or `p`")),
            }
        }
        let size = table_size(&vars.iter().map(|v| v.1).collect::<Vec<_>>())?;
        let mut probs = vec![0.0; size];
        for (digits, p) in entries {
            let idx = digits.iter().zip(&vars).fold(0, |acc, (d, (_, s))| acc * s + d);
            if probs[idx] != 0.0 {
                return Err(Error::Pmf("entry listed twice".into()));
            }
            probs[idx] = p;
        }
        Self::new(vars, probs)
    }
}

fn check_distinct(idx: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &i in idx {
        if !seen.insert(i) {
            return Err(Error::VariableSet("a variable appears more than once".into()));
        }
    }
    Ok(())
}

/// `I(X; Y | Z)` in bits, as `sum p log2(p(xyz) p(z) / (p(xz) p(yz)))`.
pub fn cond_mutual_info<S: AsRef<str>>(pmf: &JointPmf, x: &[S], y: &[S], z: &[S]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::VariableSet("both sides of the mutual information must be non-empty".into()));
    }
    let xi = pmf.indices(x)?;
    let yi = pmf.indices(y)?;
    let zi = pmf.indices(z)?;
    let all: Vec<usize> = xi.iter().chain(&yi).chain(&zi).copied().collect();
    if check_distinct(&all).is_err() {
        return Err(Error::VariableSet("conditioning sets must be disjoint".into()));
    }
    let sizes: Vec<usize> = all.iter().map(|&i| pmf.sizes[i]).collect();
    let joint = pmf.project(&all);
    let (nx, ny) = (xi.len(), yi.len());
    let dims = all.len();
    let keep_xz: Vec<usize> = (0..nx).chain(nx + ny..dims).collect();
    let keep_yz: Vec<usize> = (nx..dims).collect();
    let keep_z: Vec<usize> = (nx + ny..dims).collect();
    let sub = |keep: &[usize]| -> Vec<f64> {
        let mut out = vec![0.0; keep.iter().map(|&k| sizes[k]).product()];
        let mut digits = vec![0usize; dims];
        for &p in &joint {
            out[linear(&digits, &sizes, keep)] += p;
            advance(&mut digits, &sizes);
        }
        out
    };
    let (pxz, pyz, pz) = (sub(&keep_xz), sub(&keep_yz), sub(&keep_z));
    let mut digits = vec![0usize; dims];
    let mut total = 0.0;
    for &p in &joint {
        if p > 0.0 {
            let num = p * pz[linear(&digits, &sizes, &keep_z)];
            let den = pxz[linear(&digits, &sizes, &keep_xz)] * pyz[linear(&digits, &sizes, &keep_yz)];
            total += p * (num / den).log2();
        }
        advance(&mut digits, &sizes);
    }
    Ok(total.max(0.0))
}

fn linear(digits: &[usize], sizes: &[usize], keep: &[usize]) -> usize {
    keep.iter().fold(0, |acc, &k| acc * sizes[k] + digits[k])
}

fn advance(digits: &mut [usize], sizes: &[usize]) {
    for d in (0..digits.len()).rev() {
        digits[d] += 1;
        if digits[d] < sizes[d] {
            return;
        }
        digits[d] = 0;
    }
}

/// Markov chain test `A - B - C`; returns the verdict and `I(A; C | B)`.
pub fn verify_markov<S: AsRef<str>>(pmf: &JointPmf, a: &[S], b: &[S], c: &[S]) -> Result<(bool, f64)> {
    let dev = cond_mutual_info(pmf, a, c, b)?;
    Ok((dev < MARKOV_TOLERANCE, dev))
}

/// Chain-rule and Markov identities used when packing codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingIdentities {
    /// `|I(X; Y,W | U) - I(X; Y | W,U)|`; vanishes when `X - U - W`.
    pub markov_equality_deviation: f64,
    /// `I(X;W|U) + I(X;Y|W,U) - I(X;Y,W|U)`; zero by the chain rule.
    pub chain_rule_residual: f64,
    /// `I(X; W | U)`.
    pub markov_deviation: f64,
}

pub fn packing_identity_check(pmf: &JointPmf, x: &str, y: &str, u: &str, w: &str) -> Result<PackingIdentities> {
    let joint = cond_mutual_info(pmf, &[x], &[y, w], &[u])?;
    let given_w = cond_mutual_info(pmf, &[x], &[y], &[w, u])?;
    let xw = cond_mutual_info(pmf, &[x], &[w], &[u])?;
    Ok(PackingIdentities {
        markov_equality_deviation: (joint - given_w).abs(),
        chain_rule_residual: xw + given_w - joint,
        markov_deviation: xw,
    })
}

pub fn u_name(k: usize) -> String {
    format!("U{k}")
}
pub fn v_name(l: usize, k: usize) -> String {
    format!("V{l}_{k}")
}
pub fn w_name(l: usize, k: usize) -> String {
    format!("W{l}_{k}")
}
pub fn yhat_name(l: usize, k: usize) -> String {
    format!("Yhat{l}_{k}")
}
pub fn y_name(l: usize) -> String {
    format!("Y{l}")
}

/// One bound of the discrete rate region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundId {
    Source { k: usize },
    Broadcast { l: usize, j: usize },
    Quantization { l: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub id: BoundId,
    /// Bits; an upper bound on the rate for source and broadcast entries,
    /// a lower bound on the cumulative broadcast rate for quantization.
    pub value: f64,
    /// Minimizing decoding level, minimizing receiver or maximizing
    /// side-information receiver.
    pub index: usize,
    /// `(index, value)` for every candidate.
    pub candidates: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub n: usize,
    pub bounds: Vec<Bound>,
}

impl ConstraintReport {
    pub fn get(&self, id: BoundId) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.id == id)
    }

    /// `sum_k` of the source bounds.
    pub fn source_total(&self) -> f64 {
        self.bounds.iter().filter(|b| matches!(b.id, BoundId::Source { .. })).map(|b| b.value).sum()
    }
}

/// Broadcast refinements `[1; pos]` of level `i` known at level `at`; a
/// level knows all of its own.
fn known_broadcasts(n: usize, ordering: &Ordering, i: usize, at: usize, out: &mut Vec<String>) {
    if i > n {
        return;
    }
    let upto = if i == at { n - i + 1 } else { ordering.inverse(i, at).unwrap_or(0) };
    out.extend((1..=upto).map(|x| w_name(i, x)));
}

/// `V_{[i;N]}^i`.
fn support_column(n: usize, i: usize, out: &mut Vec<String>) {
    out.extend((i..=n).map(|m| v_name(m, i)));
}

fn dedup(mut v: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    v.retain(|s| seen.insert(s.clone()));
    v
}

/// Evaluates every source, broadcast and quantization bound on `pmf` for
/// `n` relays under `ordering` (level space).
pub fn rate_bounds(pmf: &JointPmf, n: usize, ordering: &Ordering) -> Result<ConstraintReport> {
    if ordering.n() != n {
        return Err(Error::Ordering(format!("ordering is for {} relays, expected {n}", ordering.n())));
    }
    let mut bounds = Vec::new();

    for k in 1..=n + 1 {
        let mut candidates = Vec::new();
        for l in k..=n + 1 {
            let mut obs = vec![y_name(l)];
            for lp in 1..k {
                let pos = ordering.inverse(lp, l).expect("lower levels serve higher ones");
                obs.push(yhat_name(lp, pos));
            }
            let mut cond: Vec<String> = (1..k).map(u_name).collect();
            for i in 1..=l.min(n) {
                support_column(n, i, &mut cond);
                known_broadcasts(n, ordering, i, l, &mut cond);
            }
            let mut value = cond_mutual_info(pmf, &[u_name(k)], &obs, &dedup(cond))?;
            for j in k..l {
                let mut cond: Vec<String> = (1..k).map(|k2| v_name(j, k2)).collect();
                for i in j + 1..=l.min(n) {
                    cond.extend((1..=i).map(|k2| v_name(i, k2)));
                    known_broadcasts(n, ordering, i, l, &mut cond);
                }
                for m in l..=n {
                    cond.extend((1..=l).map(|k2| v_name(m, k2)));
                }
                value += cond_mutual_info(pmf, &[v_name(j, k)], &[y_name(l)], &dedup(cond))?;
            }
            candidates.push((l, value));
        }
        bounds.push(pick(BoundId::Source { k }, candidates, false));
    }

    for l in 1..=n {
        for j in 1..=n - l + 1 {
            let mut candidates = Vec::new();
            for x in j..=n - l + 1 {
                let rx = ordering.refinement_target(l, x);
                let mut cond: Vec<String> = (1..=l).map(|k| v_name(l, k)).collect();
                cond.extend((1..j).map(|i| w_name(l, i)));
                for i in l + 1..=rx.min(n) {
                    cond.extend((1..=i).map(|k| v_name(i, k)));
                    known_broadcasts(n, ordering, i, rx, &mut cond);
                }
                for m in rx + 1..=n {
                    cond.extend((1..=rx).map(|k| v_name(m, k)));
                }
                let v = cond_mutual_info(pmf, &[w_name(l, j)], &[y_name(rx)], &dedup(cond))?;
                candidates.push((rx, v));
            }
            bounds.push(pick(BoundId::Broadcast { l, j }, candidates, false));
        }
    }

    for l in 1..=n {
        for m in 1..=n - l + 1 {
            let mut candidates = Vec::new();
            for x in m..=n - l + 1 {
                let jp = ordering.refinement_target(l, x);
                let mut cond = vec![y_name(jp)];
                for i in 1..l {
                    cond.push(yhat_name(i, ordering.inverse(i, jp).expect("downstream level")));
                }
                cond.extend((1..=l).map(u_name));
                for i in 1..=jp.min(n) {
                    support_column(n, i, &mut cond);
                    known_broadcasts(n, ordering, i, jp, &mut cond);
                }
                let v = cond_mutual_info(pmf, &[yhat_name(l, m)], &[y_name(l)], &dedup(cond))?;
                candidates.push((jp, v));
            }
            bounds.push(pick(BoundId::Quantization { l, m }, candidates, true));
        }
    }
    Ok(ConstraintReport { n, bounds })
}

fn pick(id: BoundId, candidates: Vec<(usize, f64)>, maximize: bool) -> Bound {
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if (maximize && c.1 > best.1) || (!maximize && c.1 < best.1) {
            best = c;
        }
    }
    Bound { id, value: best.1, index: best.0, candidates }
}

/// Names of every variable of the `n`-relay network.
pub fn network_variables(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n + 1).map(u_name).collect();
    for l in 1..=n {
        v.extend((1..=l).map(|k| v_name(l, k)));
    }
    for l in 1..=n {
        v.extend((1..=n - l + 1).map(|k| w_name(l, k)));
    }
    for l in 1..=n {
        v.extend((1..=n - l + 1).map(|k| yhat_name(l, k)));
    }
    v.extend((1..=n + 1).map(y_name));
    v
}

/// Random pmf of the factored form the rate region is taken over, with
/// every variable on `alphabet` symbols: support messages first, then the
/// source layers, broadcast codewords, channel outputs and finally the
/// quantizations from the finest to the coarsest.
pub fn factored_pmf<R: Rng + ?Sized>(n: usize, alphabet: usize, rng: &mut R) -> Result<JointPmf> {
    let names = network_variables(n);
    let index = |s: &str| names.iter().position(|x| x == s).expect("listed");
    // (child, parents) in generation order
    let mut factors: Vec<(String, Vec<String>)> = Vec::new();
    for k in 1..=n {
        for l in (k..=n).rev() {
            let mut parents: Vec<String> = (1..k).map(|k2| v_name(l, k2)).collect();
            parents.extend((l + 1..=n).map(|m| v_name(m, k)));
            factors.push((v_name(l, k), parents));
        }
    }
    for k in 1..=n + 1 {
        let mut parents: Vec<String> = (1..k).map(u_name).collect();
        parents.extend((k..=n).map(|i| v_name(i, k)));
        factors.push((u_name(k), parents));
    }
    for l in 1..=n {
        for k in 1..=n - l + 1 {
            let mut parents: Vec<String> = (1..k).map(|i| w_name(l, i)).collect();
            parents.extend((1..=l).map(|i| v_name(l, i)));
            factors.push((w_name(l, k), parents));
        }
    }
    let mut inputs: Vec<String> = (1..=n + 1).map(u_name).collect();
    for l in 1..=n {
        inputs.extend((1..=n - l + 1).map(|k| w_name(l, k)));
        inputs.extend((1..=l).map(|k| v_name(l, k)));
    }
    // the outputs share one channel; chain them so the channel law is general
    for r in 1..=n + 1 {
        let mut parents = inputs.clone();
        parents.extend((1..r).map(y_name));
        factors.push((y_name(r), parents));
    }
    for l in 1..=n {
        let m_l = n - l + 1;
        let mut common: Vec<String> = (1..=l).map(u_name).collect();
        for m in 1..=l {
            common.extend((1..=m).map(|k| v_name(m, k)));
        }
        for m in l + 1..=n {
            common.extend((1..=l).map(|k| v_name(m, k)));
        }
        common.extend((1..=l).map(|i| w_name(i, 1)));
        let mut parents = vec![y_name(l)];
        parents.extend(common.iter().cloned());
        factors.push((yhat_name(l, m_l), parents));
        for k in (1..m_l).rev() {
            let mut parents = vec![yhat_name(l, k + 1)];
            parents.extend(common.iter().cloned());
            factors.push((yhat_name(l, k), parents));
        }
    }

    let sizes = vec![alphabet; names.len()];
    let size = table_size(&sizes)?;
    // conditional tables: one row per parent configuration
    let tables: Vec<(usize, Vec<usize>, Vec<f64>)> = factors
        .iter()
        .map(|(child, parents)| {
            let pidx: Vec<usize> = parents.iter().map(|p| index(p)).collect();
            let rows = alphabet.pow(pidx.len() as u32);
            let mut t = Vec::with_capacity(rows * alphabet);
            for _ in 0..rows {
                let w: Vec<f64> = (0..alphabet).map(|_| 0.05 - (1.0 - rng.random::<f64>()).ln()).collect();
                let s: f64 = w.iter().sum();
                t.extend(w.into_iter().map(|x| x / s));
            }
            (index(child), pidx, t)
        })
        .collect();
    let mut probs = vec![0.0; size];
    let mut digits = vec![0usize; names.len()];
    for p in probs.iter_mut() {
        let mut v = 1.0;
        for (child, parents, t) in &tables {
            let row = parents.iter().fold(0, |acc, &i| acc * alphabet + digits[i]);
            v *= t[row * alphabet + digits[*child]];
        }
        *p = v;
        advance(&mut digits, &sizes);
    }
    JointPmf::from_weights(names.into_iter().map(|s| (s, alphabet)).collect(), probs)
}

/// Conditioning set under which the quantizations of level `l` form a
/// Markov chain: the parents shared by every refinement of `l`.
pub fn quantization_context(n: usize, l: usize) -> Vec<String> {
    let mut common: Vec<String> = (1..=l).map(u_name).collect();
    for m in 1..=l {
        common.extend((1..=m).map(|k| v_name(m, k)));
    }
    for m in l + 1..=n {
        common.extend((1..=l).map(|k| v_name(m, k)));
    }
    common.extend((1..=l).map(|i| w_name(i, 1)));
    common
}

/// Checks `Y_l - (Yhat_l^{k+1}, context) - Yhat_l^k` for every level and
/// refinement; returns the largest deviation.
pub fn quantization_chain_deviation(pmf: &JointPmf, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for l in 1..=n {
        let ctx = quantization_context(n, l);
        for k in 1..n - l + 1 {
            let mut b = vec![yhat_name(l, k + 1)];
            b.extend(ctx.iter().cloned());
            let (_, dev) = verify_markov(pmf, &[y_name(l)], &b, &[yhat_name(l, k)])?;
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// `1 - H2(p)`.
pub fn bsc_capacity(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 || x >= 1.0 { 0.0 } else { -x * x.log2() - (1.0 - x) * (1.0 - x).log2() };
    1.0 - h(p)
}

/// Uniform binary `U1` through a binary symmetric channel with crossover
/// `p` to `Y1`: the relay-free network.
pub fn bsc_pmf(p: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("crossover {p} outside [0, 1]")));
    }
    JointPmf::new(
        vec![(u_name(1), 2), (y_name(1), 2)],
        vec![0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vars(spec: &[(&str, usize)]) -> Vec<(String, usize)> {
        spec.iter().map(|(n, s)| (n.to_string(), *s)).collect()
    }

    #[test]
    fn basic_mutual_informations() {
        let indep = JointPmf::new(vars(&[("X", 2), ("Y", 2)]), vec![0.25; 4]).unwrap();
        assert!(cond_mutual_info(&indep, &["X"], &["Y"], &[] as &[&str]).unwrap().abs() < 1e-15);
        let equal = JointPmf::new(vars(&[("X", 2), ("Y", 2)]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((cond_mutual_info(&equal, &["X"], &["Y"], &[] as &[&str]).unwrap() - 1.0).abs() < 1e-15);
        let bsc = bsc_pmf(0.11).unwrap();
        let i = cond_mutual_info(&bsc, &["U1"], &["Y1"], &[] as &[&str]).unwrap();
        assert!((i - bsc_capacity(0.11)).abs() < 1e-12);
        assert!((i - 0.5).abs() < 0.001);
    }

    #[test]
    fn rejects_overlap_and_missing() {
        let p = JointPmf::new(vars(&[("X", 2), ("Y", 2)]), vec![0.25; 4]).unwrap();
        assert!(matches!(cond_mutual_info(&p, &["X"], &["X"], &[] as &[&str]), Err(Error::VariableSet(_))));
        assert!(matches!(cond_mutual_info(&p, &["X"], &["Z"], &[] as &[&str]), Err(Error::MissingVariable(_))));
        assert!(JointPmf::new(vars(&[("X", 2)]), vec![0.5, 0.6]).is_err());
        assert!(JointPmf::new(vars(&[("X", 2), ("X", 2)]), vec![0.25; 4]).is_err());
        assert!(JointPmf::new(vars(&[("A", 10_000), ("B", 10_000)]), Vec::new()).is_err());
    }

    #[test]
    fn symmetry_and_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = JointPmf::random(vars(&[("A", 3), ("B", 2), ("C", 2)]), &mut rng).unwrap();
        let ab = cond_mutual_info(&p, &["A"], &["B"], &["C"]).unwrap();
        let ba = cond_mutual_info(&p, &["B"], &["A"], &["C"]).unwrap();
        assert!((ab - ba).abs() < 1e-14);
        let q = JointPmf::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
        assert!(JointPmf::from_text("var X 2\np 2 1.0\n").is_err());
        assert!(JointPmf::from_text("var X 2\np 0 0.5\n").is_err());
        assert!(JointPmf::from_text("bogus\n").is_err());
    }

    #[test]
    fn markov_examples() {
        // C is a function of B
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ab = JointPmf::random(vars(&[("A", 2), ("B", 3)]), &mut rng).unwrap();
        let mut probs = vec![0.0; 12];
        for a in 0..2 {
            for b in 0..3 {
                probs[(a * 3 + b) * 2 + (b % 2)] = ab.probs()[a * 3 + b];
            }
        }
        let p = JointPmf::new(vars(&[("A", 2), ("B", 3), ("C", 2)]), probs).unwrap();
        assert!(verify_markov(&p, &["A"], &["B"], &["C"]).unwrap().0);
        // C copies A
        let mut probs = vec![0.0; 12];
        for a in 0..2 {
            for b in 0..3 {
                probs[(a * 3 + b) * 2 + a] = ab.probs()[a * 3 + b];
            }
        }
        let p = JointPmf::new(vars(&[("A", 2), ("B", 3), ("C", 2)]), probs).unwrap();
        let (ok, dev) = verify_markov(&p, &["A"], &["B"], &["C"]).unwrap();
        assert!(!ok && dev > 0.1);
    }

    #[test]
    fn packing_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = JointPmf::random(vars(&[("X", 2), ("Y", 3), ("U", 2), ("W", 2)]), &mut rng).unwrap();
        let c = packing_identity_check(&p, "X", "Y", "U", "W").unwrap();
        assert!(c.chain_rule_residual.abs() < 1e-12);
        assert!(c.markov_equality_deviation > 1e-6);
        assert!((c.markov_equality_deviation - c.markov_deviation).abs() < 1e-12);
    }

    #[test]
    fn relay_free_network_reduces_to_point_to_point() {
        let p = bsc_pmf(0.2).unwrap();
        let r = rate_bounds(&p, 0, &Ordering::identity(0)).unwrap();
        assert_eq!(r.bounds.len(), 1);
        assert!((r.source_total() - bsc_capacity(0.2)).abs() < 1e-12);
    }

    #[test]
    fn factored_pmf_has_quantization_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = factored_pmf(2, 2, &mut rng).unwrap();
        assert_eq!(p.names().len(), 15);
        assert!(quantization_chain_deviation(&p, 2).unwrap() < MARKOV_TOLERANCE);
        // without the shared context the chain is generally broken
        let (ok, _) = verify_markov(&p, &["Y1"], &["Yhat1_2"], &["Yhat1_1"]).unwrap();
        assert!(!ok);
    }

    #[test]
    fn missing_variables_are_reported() {
        let p = bsc_pmf(0.1).unwrap();
        assert!(matches!(rate_bounds(&p, 1, &Ordering::identity(1)), Err(Error::MissingVariable(_))));
    }
}
