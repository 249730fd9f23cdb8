//! Explicit linear signal model of the mixed strategy, built transmitter by
//! transmitter from unit-power codeword symbols. Used as an independent
//! oracle for the closed-form rates: every rate term becomes a conditional
//! mutual information between linear functions of the symbols.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian;
use crate::network::{Channel, PowerAllocation};

/// Independent unit-variance symbol of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// `U^k`.
    Own(usize),
    /// `V_l^k`.
    Support { level: usize, k: usize },
    /// `W_l^x`.
    Broadcast { level: usize, refinement: usize },
    /// Receiver noise at a level.
    Noise(usize),
    /// Quantization noise `Zq_l^i`.
    Quant { level: usize, refinement: usize },
}

/// Linear map from the symbols to every channel output and description.
#[derive(Debug, Clone)]
pub struct SignalModel {
    n: usize,
    symbols: Vec<Symbol>,
    /// `outputs[r]` for levels `1..=N+1` (index 0 unused).
    outputs: Vec<Vec<f64>>,
    /// `descriptions[l][x]`, `None` when not conveyed.
    descriptions: Vec<Vec<Option<Vec<f64>>>>,
}

impl SignalModel {
    pub fn new(ch: &Channel, a: &PowerAllocation) -> Result<Self> {
        let n = ch.n();
        let mut symbols = Vec::new();
        symbols.extend((1..=n + 1).map(Symbol::Own));
        for level in 1..=n {
            symbols.extend((1..=level).map(|k| Symbol::Support { level, k }));
        }
        for level in 1..=n {
            symbols.extend((1..=ch.refinements(level)).map(|refinement| Symbol::Broadcast { level, refinement }));
        }
        symbols.extend((1..=n + 1).map(Symbol::Noise));
        for level in 1..=n {
            symbols.extend((1..=ch.refinements(level)).map(|refinement| Symbol::Quant { level, refinement }));
        }
        let dim = symbols.len();
        let col = |s: Symbol| symbols.iter().position(|&t| t == s).expect("symbol is listed");

        // transmitted signal of every level
        let mut tx = vec![vec![0.0; dim]; n + 1];
        let ps = ch.power(0);
        for k in 1..=n + 1 {
            tx[0][col(Symbol::Own(k))] = (a.own(k) * ps).sqrt();
        }
        for target in 1..=n {
            for k in 1..=target {
                tx[0][col(Symbol::Support { level: target, k })] = (a.support(0, target, k) * ps).sqrt();
            }
        }
        for l in 1..=n {
            let pl = ch.power(l);
            for target in l..=n {
                for k in 1..=l {
                    tx[l][col(Symbol::Support { level: target, k })] = (a.support(l, target, k) * pl).sqrt();
                }
            }
            for x in 1..=ch.refinements(l) {
                tx[l][col(Symbol::Broadcast { level: l, refinement: x })] = (a.broadcast(l, x) * pl).sqrt();
            }
        }

        let mut outputs = vec![Vec::new(); n + 2];
        for (r, out) in outputs.iter_mut().enumerate().skip(1) {
            let mut y = vec![0.0; dim];
            for (t, signal) in tx.iter().enumerate() {
                if t == r {
                    continue;
                }
                let h = ch.gain(t, r);
                for (yi, si) in y.iter_mut().zip(signal) {
                    *yi += h * si;
                }
            }
            y[col(Symbol::Noise(r))] = ch.noise(r).sqrt();
            *out = y;
        }

        let mut descriptions = vec![Vec::new(); n + 1];
        for l in 1..=n {
            let m = ch.refinements(l);
            descriptions[l] = vec![None; m + 1];
            for x in 1..=m {
                let tail = a.quant_noise_tail(l, x);
                if !tail.is_finite() {
                    continue;
                }
                let mut d = outputs[l].clone();
                for i in x..=m {
                    d[col(Symbol::Quant { level: l, refinement: i })] = a.quant_noise(l, i).sqrt();
                }
                descriptions[l][x] = Some(d);
            }
        }
        Ok(Self { n, symbols, outputs, descriptions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn column(&self, s: Symbol) -> Option<usize> {
        self.symbols.iter().position(|&t| t == s)
    }

    /// Coefficients of `Y_r`.
    pub fn output(&self, r: usize) -> Result<&[f64]> {
        self.outputs
            .get(r)
            .filter(|_| r >= 1)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Index(format!("no channel output at level {r}")))
    }

    /// Coefficients of `Yhat_l^x`, if conveyed.
    pub fn description(&self, l: usize, x: usize) -> Option<&[f64]> {
        self.descriptions.get(l)?.get(x)?.as_deref()
    }

    fn unit(&self, s: Symbol) -> Vec<f64> {
        let mut v = vec![0.0; self.symbols.len()];
        v[self.column(s).expect("symbol is listed")] = 1.0;
        v
    }

    /// Joint covariance of `rows` over the symbols for which `known` is false.
    pub fn covariance(&self, rows: &[&[f64]], known: &dyn Fn(Symbol) -> bool) -> DMatrix<f64> {
        let free: Vec<usize> = (0..self.symbols.len()).filter(|&i| !known(self.symbols[i])).collect();
        DMatrix::from_fn(rows.len(), rows.len(), |p, q| free.iter().map(|&i| rows[p][i] * rows[q][i]).sum())
    }
}

/// Which rate term of the closed form a mutual information reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// Determinant ratio of the `R_s^k` bound at decoding level `l`.
    SourceDirect { k: usize, l: usize },
    /// `C(..)` term of the support message `V_j^k` decoded at level `l`.
    Support { k: usize, l: usize, j: usize },
    /// Broadcast refinement `j` of level `l` at `receiver`.
    Broadcast { l: usize, j: usize, receiver: usize },
    /// Description `Yhat_l^m` with side information at `receiver`.
    Quantization { l: usize, m: usize, receiver: usize },
}

impl std::fmt::Display for TermKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TermKind::SourceDirect { k, l } => write!(f, "source k={k} l={l}"),
            TermKind::Support { k, l, j } => write!(f, "support k={k} l={l} j={j}"),
            TermKind::Broadcast { l, j, receiver } => write!(f, "broadcast l={l} j={j} rx={receiver}"),
            TermKind::Quantization { l, m, receiver } => write!(f, "quantization l={l} m={m} rx={receiver}"),
        }
    }
}

/// `I(A; B | C)` over the signal model, next to the closed-form value.
#[derive(Debug, Clone)]
pub struct MiTerm {
    pub kind: TermKind,
    /// Joint covariance of the stacked rows `A, B, C`.
    pub covariance: DMatrix<f64>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub closed_form: f64,
}

fn term(
    model: &SignalModel,
    kind: TermKind,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    known: &dyn Fn(Symbol) -> bool,
    closed_form: f64,
) -> MiTerm {
    let (na, nb, nc) = (a.len(), b.len(), c.len());
    let rows: Vec<Vec<f64>> = a.into_iter().chain(b).chain(c).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    MiTerm {
        kind,
        covariance: model.covariance(&refs, known),
        a: (0..na).collect(),
        b: (na..na + nb).collect(),
        c: (na + nb..na + nb + nc).collect(),
        closed_form,
    }
}

/// Whether refinement `x` of level `m` is known to a node that has decoded
/// the broadcasts of levels `[lo; hi]`, mirroring the decoding schedule.
fn broadcast_known(ch: &Channel, m: usize, x: usize, lo: usize, hi: usize) -> bool {
    if m < lo || m > hi {
        false
    } else if m < hi {
        ch.ordering().inverse(m, hi).is_some_and(|pos| x <= pos)
    } else {
        true
    }
}

/// Every mutual information behind the closed-form rate terms of `a`,
/// with the knowledge state of the decoder spelled out symbol by symbol.
pub fn rate_terms(ch: &Channel, a: &PowerAllocation) -> Result<Vec<MiTerm>> {
    let model = SignalModel::new(ch, a)?;
    let n = ch.n();
    let ordering = ch.ordering();
    let mut out = Vec::new();

    for k in 1..=n + 1 {
        for l in k..=n + 1 {
            let terms = gaussian::source_rate_terms(ch, a, k, l)?;
            // U^k against Y_l and the received descriptions of lower levels
            let known = |s: Symbol| match s {
                Symbol::Own(k2) => k2 < k,
                Symbol::Support { k: k2, .. } => k2 <= l,
                Symbol::Broadcast { level, refinement } => broadcast_known(ch, level, refinement, 1, l),
                Symbol::Noise(_) | Symbol::Quant { .. } => false,
            };
            let mut obs = vec![model.output(l)?.to_vec()];
            for i in 1..k {
                let pos = ordering.inverse(i, l).expect("lower level serves higher levels");
                if let Some(d) = model.description(i, pos) {
                    obs.push(d.to_vec());
                }
            }
            out.push(term(
                &model,
                TermKind::SourceDirect { k, l },
                vec![model.unit(Symbol::Own(k))],
                obs,
                Vec::new(),
                &known,
                terms.direct,
            ));
            for &(j, value) in &terms.support {
                let target = Symbol::Support { level: j, k };
                let known = |s: Symbol| match s {
                    Symbol::Own(_) | Symbol::Noise(_) | Symbol::Quant { .. } => false,
                    Symbol::Support { level, k: k2 } => {
                        !(level < j || (level == j && k2 > k) || (level > l && k2 > l))
                    }
                    Symbol::Broadcast { level, refinement } => broadcast_known(ch, level, refinement, j + 1, l),
                };
                let known = |s: Symbol| s != target && known(s);
                out.push(term(
                    &model,
                    TermKind::Support { k, l, j },
                    vec![model.unit(target)],
                    vec![model.output(l)?.to_vec()],
                    Vec::new(),
                    &known,
                    value,
                ));
            }
        }
    }

    for l in 1..=n {
        for j in 1..=ch.refinements(l) {
            let bound = gaussian::broadcast_rate_bound(ch, a, l, j)?;
            for &(rx, value) in &bound.per_receiver {
                let target = Symbol::Broadcast { level: l, refinement: j };
                let known = |s: Symbol| match s {
                    Symbol::Own(_) | Symbol::Noise(_) | Symbol::Quant { .. } => false,
                    Symbol::Support { level, k } => !(level < l || (level > rx && k > rx)),
                    Symbol::Broadcast { level, refinement } if level == l => refinement < j,
                    Symbol::Broadcast { level, refinement } => broadcast_known(ch, level, refinement, l + 1, rx),
                };
                out.push(term(
                    &model,
                    TermKind::Broadcast { l, j, receiver: rx },
                    vec![model.unit(target)],
                    vec![model.output(rx)?.to_vec()],
                    Vec::new(),
                    &known,
                    value,
                ));
            }
        }
    }

    for l in 1..=n {
        for m in 1..=ch.refinements(l) {
            let Some(desc) = model.description(l, m) else { continue };
            let tail = a.quant_noise_tail(l, m);
            for x in m..=ch.refinements(l) {
                let jp = ordering.refinement_target(l, x);
                let variance = gaussian::wyner_ziv_variance(ch, a, l, jp)?;
                let known = |s: Symbol| match s {
                    Symbol::Own(k) => k <= l,
                    Symbol::Support { level, k } => !(level > jp && k > jp),
                    Symbol::Broadcast { level, refinement } => broadcast_known(ch, level, refinement, 1, jp),
                    Symbol::Noise(_) | Symbol::Quant { .. } => false,
                };
                out.push(term(
                    &model,
                    TermKind::Quantization { l, m, receiver: jp },
                    vec![model.output(l)?.to_vec()],
                    vec![desc.to_vec()],
                    vec![model.output(jp)?.to_vec()],
                    &known,
                    gaussian::capacity(variance / tail)?,
                ));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::gaussian_mi_exact;
    use crate::network::{Ordering, Param, Topology};

    fn instance() -> (Channel, PowerAllocation) {
        let t = Topology::two_relay_line(0.3, 10.0, 4.0, true).unwrap();
        let o = Ordering::new(vec![2, 1, 3], vec![vec![3, 2], vec![3]]).unwrap();
        let ch = Channel::new(&t, &o).unwrap();
        let mut a = PowerAllocation::zeros(2);
        for (p, v) in [
            (Param::Own { level: 1 }, 0.2),
            (Param::Own { level: 2 }, 0.2),
            (Param::Own { level: 3 }, 0.2),
            (Param::SourceSupport { target: 2, level: 1 }, 0.2),
            (Param::SourceSupport { target: 1, level: 1 }, 0.1),
            (Param::RelaySupport { relay: 1, target: 1, level: 1 }, 0.2),
            (Param::RelaySupport { relay: 1, target: 2, level: 1 }, 0.2),
            (Param::Broadcast { relay: 1, refinement: 1 }, 0.3),
            (Param::Broadcast { relay: 1, refinement: 2 }, 0.2),
            (Param::RelaySupport { relay: 2, target: 2, level: 2 }, 0.5),
            (Param::Broadcast { relay: 2, refinement: 1 }, 0.4),
        ] {
            a.set(p, v).unwrap();
        }
        let a = gaussian::with_minimal_quantization(&ch, &a).unwrap();
        (ch, a)
    }

    #[test]
    fn physical_covariance_equals_assembled_matrix() {
        let (ch, a) = instance();
        let model = SignalModel::new(&ch, &a).unwrap();
        for l in 1..=3 {
            for j in 1..=l {
                let k = gaussian::covariance_matrix(&ch, &a, l, j, j).unwrap();
                let known = |s: Symbol| match s {
                    Symbol::Own(k2) => k2 <= j,
                    Symbol::Support { k: k2, .. } => k2 <= l,
                    Symbol::Broadcast { level, refinement } => broadcast_known(&ch, level, refinement, 1, l),
                    _ => false,
                };
                let mut rows = vec![model.output(l).unwrap()];
                for i in 1..j {
                    if let Some(d) = model.description(i, ch.ordering().inverse(i, l).unwrap()) {
                        rows.push(d);
                    }
                }
                let p = model.covariance(&rows, &known);
                assert_eq!(p.shape(), k.shape());
                for (x, y) in p.iter().zip(k.iter()) {
                    assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "l={l} j={j}\n{p}\n{k}");
                }
            }
        }
    }

    #[test]
    fn every_term_matches_its_closed_form() {
        let (ch, a) = instance();
        let terms = rate_terms(&ch, &a).unwrap();
        assert!(terms.iter().any(|t| matches!(t.kind, TermKind::Quantization { .. })));
        for t in &terms {
            let exact = gaussian_mi_exact(&t.covariance, &t.a, &t.b, &t.c).unwrap();
            assert!(
                (exact - t.closed_form).abs() <= 1e-9 * t.closed_form.abs().max(1e-3),
                "{}: physical {exact} closed form {}",
                t.kind,
                t.closed_form
            );
        }
    }

    #[test]
    fn outputs_exclude_own_transmission() {
        let (ch, a) = instance();
        let model = SignalModel::new(&ch, &a).unwrap();
        let w = model.column(Symbol::Broadcast { level: 1, refinement: 1 }).unwrap();
        assert_eq!(model.output(1).unwrap()[w], 0.0);
        assert!(model.output(2).unwrap()[w] > 0.0);
        assert!(model.output(0).is_err());
    }
}
