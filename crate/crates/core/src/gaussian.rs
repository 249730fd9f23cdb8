//! Closed-form achievable rates of the mixed strategy in Gaussian networks.
//!
//! Everything here is evaluated in level space (see [`Channel`]). Powers
//! are linear, rates are in bits per channel use. Notation in comments:
//!
//! * `G_{l,r}^k`: received power at `r` of the support message `V_l^k`
//!   (coherent sum of every transmitter carrying it); `G_{s,r}^k` is the
//!   received power of the fresh source message `U^k`.
//! * `L_{l,m,m'}^k`: cross-correlation of the same message at two receivers.
//! * `F_r^{k,k'}`: residual broadcast power at `r` once the broadcast
//!   messages of levels `[k; k']` have been decoded.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::{Channel, PowerAllocation};

/// Relative tolerance under which small negative values are treated as
/// floating-point cancellation.
pub const CANCELLATION_TOLERANCE: f64 = 1e-9;

/// Slack margin applied by the minimal quantization noise solver.
pub const QUANT_MARGIN: f64 = 1e-6;

/// Slack a feasible report may carry on any constraint.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// `log2(1 + x)`.
pub fn capacity(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("capacity of negative SNR {x}")));
    }
    Ok((1.0 + x).log2())
}

#[inline]
fn cap(x: f64) -> f64 {
    (1.0 + x.max(0.0)).log2()
}

/// Clamps tiny negatives produced by cancellation; rejects real negatives.
fn clamp_cancellation(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if -value <= CANCELLATION_TOLERANCE * scale.abs().max(f64::MIN_POSITIVE) {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("{what} is negative ({value:e}, scale {scale:e})")))
    }
}

/// Transmitter of a message whose received power is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sender {
    /// The source's own partial message `U^k`.
    Source,
    /// The support message `V_l^k` of relay level `l`.
    Level(usize),
}

/// Received amplitudes of every message, computed once per allocation.
struct Amplitudes {
    n: usize,
    /// `support[l][k][r]`, amplitude of `V_l^k` at `r` (`l` in 1..=N, `k` in 1..=l).
    support: Vec<Vec<Vec<f64>>>,
    /// `own[k][r]`, amplitude of `U^k` at `r`.
    own: Vec<Vec<f64>>,
    /// `bcast[m][x] = beta_m^x P_m` (`x` in 1..=M_m).
    bcast: Vec<Vec<f64>>,
    gain: Vec<Vec<f64>>,
    noise: Vec<f64>,
}

impl Amplitudes {
    fn new(ch: &Channel, a: &PowerAllocation) -> Self {
        let n = ch.n();
        let nodes = n + 2;
        let mut support = vec![Vec::new(); n + 1];
        for l in 1..=n {
            let mut per_level = vec![Vec::new(); l + 1];
            for k in 1..=l {
                per_level[k] = (0..nodes)
                    .map(|r| {
                        let relays: f64 =
                            (k..=l).map(|j| ch.gain(j, r) * (a.support(j, l, k) * ch.power(j)).sqrt()).sum();
                        relays + ch.gain(0, r) * (a.support(0, l, k) * ch.power(0)).sqrt()
                    })
                    .collect();
            }
            support[l] = per_level;
        }
        let mut own = vec![Vec::new(); n + 2];
        for k in 1..=n + 1 {
            own[k] = (0..nodes).map(|r| ch.gain(0, r) * (a.own(k) * ch.power(0)).sqrt()).collect();
        }
        let mut bcast = vec![Vec::new(); n + 1];
        for m in 1..=n {
            bcast[m] = (0..=ch.refinements(m))
                .map(|x| if x == 0 { 0.0 } else { a.broadcast(m, x) * ch.power(m) })
                .collect();
        }
        let gain = (0..nodes).map(|x| (0..nodes).map(|y| ch.gain(x, y)).collect()).collect();
        let noise = (0..nodes).map(|x| ch.noise(x)).collect();
        Self { n, support, own, bcast, gain, noise }
    }

    /// `G_{l,r}^k`.
    #[inline]
    fn support_power(&self, l: usize, r: usize, k: usize) -> f64 {
        let v = self.support[l][k][r];
        v * v
    }

    /// `L_{l,x,y}^k`.
    #[inline]
    fn support_cross(&self, l: usize, x: usize, y: usize, k: usize) -> f64 {
        self.support[l][k][x] * self.support[l][k][y]
    }

    /// `sum_{l'=lo}^{N} sum_{k=lo}^{l'} L_{l',x,y}^k` (power when `x == y`):
    /// support messages of levels above `lo - 1`, still unknown below them.
    fn upper_cross(&self, x: usize, y: usize, lo: usize) -> f64 {
        let mut s = 0.0;
        for lp in lo..=self.n {
            for k in lo..=lp {
                s += self.support_cross(lp, x, y, k);
            }
        }
        s
    }

    /// `sum_{l'=1}^{hi} sum_{k=1}^{l'} G_{l',r}^k`.
    fn lower_power(&self, r: usize, hi: usize) -> f64 {
        let mut s = 0.0;
        for lp in 1..=hi.min(self.n) {
            for k in 1..=lp {
                s += self.support_power(lp, r, k);
            }
        }
        s
    }

    /// `sum_{k=lo}^{N+1} L_{s,x,y}^k`.
    fn own_cross(&self, x: usize, y: usize, lo: usize) -> f64 {
        (lo.max(1)..=self.n + 1).map(|k| self.own[k][x] * self.own[k][y]).sum()
    }

    /// Broadcast power of `m` that is still unknown after the broadcast
    /// messages of levels `[k; k']` have been decoded.
    fn residual_broadcast(&self, ordering: &crate::network::Ordering, m: usize, k: usize, kp: usize) -> f64 {
        let levels = self.bcast[m].len() - 1;
        if m < k || m > kp {
            self.bcast[m][1..].iter().sum()
        } else if m < kp {
            // an inverse lookup outside o_m means nothing of m was decoded
            let decoded = ordering.inverse(m, kp).unwrap_or(0);
            self.bcast[m][(decoded + 1).min(levels + 1)..].iter().sum()
        } else {
            0.0
        }
    }

    /// Residual broadcast cross-power between receivers `x` and `y`; with
    /// `x == y` this is `F_x^{k,k'}`. Transmitters never hear themselves.
    fn broadcast_cross(&self, ordering: &crate::network::Ordering, x: usize, y: usize, k: usize, kp: usize) -> f64 {
        let mut s = 0.0;
        for m in 1..=self.n {
            if m == x || m == y {
                continue;
            }
            let g = self.gain[m][x] * self.gain[m][y];
            if g != 0.0 {
                s += g * self.residual_broadcast(ordering, m, k, kp);
            }
        }
        s
    }
}

fn check_receiver(ch: &Channel, r: usize) -> Result<()> {
    if r == 0 || r > ch.n() + 1 {
        Err(Error::Index(format!("receiver level {r} outside [1; {}]", ch.n() + 1)))
    } else {
        Ok(())
    }
}

fn check_message(ch: &Channel, sender: Sender, k: usize) -> Result<()> {
    match sender {
        Sender::Source if k >= 1 && k <= ch.n() + 1 => Ok(()),
        Sender::Level(l) if l >= 1 && l <= ch.n() && k >= 1 && k <= l => Ok(()),
        _ => Err(Error::Index(format!("message level {k} does not exist for sender {sender:?}"))),
    }
}

/// Received power at `receiver` of message level `k` sent by `sender`.
pub fn aggregate_power(ch: &Channel, a: &PowerAllocation, sender: Sender, receiver: usize, k: usize) -> Result<f64> {
    check_receiver(ch, receiver)?;
    check_message(ch, sender, k)?;
    let amp = Amplitudes::new(ch, a);
    Ok(match sender {
        Sender::Source => amp.own[k][receiver].powi(2),
        Sender::Level(l) => amp.support_power(l, receiver, k),
    })
}

/// Cross-correlation of message level `k` sent by `sender` at receivers
/// `m` and `m2` (`m != m2`).
pub fn cross_correlation(
    ch: &Channel,
    a: &PowerAllocation,
    sender: Sender,
    m: usize,
    m2: usize,
    k: usize,
) -> Result<f64> {
    check_receiver(ch, m)?;
    check_receiver(ch, m2)?;
    check_message(ch, sender, k)?;
    if m == m2 {
        return Err(Error::Index("cross-correlation needs two distinct receivers; use aggregate_power".into()));
    }
    let amp = Amplitudes::new(ch, a);
    Ok(match sender {
        Sender::Source => amp.own[k][m] * amp.own[k][m2],
        Sender::Level(l) => amp.support_cross(l, m, m2, k),
    })
}

/// Broadcast power received at `receiver` after decoding the broadcast
/// messages of levels `[k; kp]`.
pub fn broadcast_residual_power(
    ch: &Channel,
    a: &PowerAllocation,
    receiver: usize,
    k: usize,
    kp: usize,
) -> Result<f64> {
    check_receiver(ch, receiver)?;
    if k == 0 || k > kp || kp > ch.n() + 1 {
        return Err(Error::Index(format!("malformed decoded range [{k}; {kp}]")));
    }
    let amp = Amplitudes::new(ch, a);
    Ok(amp.broadcast_cross(ch.ordering(), receiver, receiver, k, kp))
}

/// Rows of the source-decoding covariance: the decoder's own output plus
/// the descriptions of lower levels it has received.
fn covariance_rows(ch: &Channel, a: &PowerAllocation, l: usize, j: usize) -> Vec<usize> {
    let ordering = ch.ordering();
    let mut rows = vec![l];
    for i in 1..j {
        let pos = ordering.inverse(i, l).expect("lower level serves every higher level");
        if a.quant_noise_tail(i, pos).is_finite() {
            rows.push(i);
        }
    }
    rows
}

fn covariance_entries(ch: &Channel, a: &PowerAllocation, amp: &Amplitudes, l: usize, j: usize, known: usize) -> (Vec<usize>, Vec<f64>) {
    let ordering = ch.ordering();
    let rows = covariance_rows(ch, a, l, j);
    let dim = rows.len();
    let mut k = vec![0.0; dim * dim];
    for (p, &x) in rows.iter().enumerate() {
        for (q, &y) in rows.iter().enumerate().skip(p) {
            let mut v = amp.upper_cross(x, y, l + 1)
                + amp.own_cross(x, y, known + 1)
                + amp.broadcast_cross(ordering, x, y, 1, l);
            if p == q {
                v += amp.noise[x];
                if p > 0 {
                    let pos = ordering.inverse(x, l).expect("checked in covariance_rows");
                    v += a.quant_noise_tail(x, pos);
                }
            }
            k[p * dim + q] = v;
            k[q * dim + p] = v;
        }
    }
    (rows, k)
}

/// Covariance of `Y_l` and the descriptions `Yhat_i^{o~_i(l)}`, `i < j`, seen
/// by level `l` while decoding `U^j` with `U^{[1; known]}` already known.
///
/// Descriptions with infinite noise are never conveyed and have no row.
/// Off-diagonal entries include the broadcast power of third nodes heard
/// at both receivers.
pub fn covariance_matrix(ch: &Channel, a: &PowerAllocation, l: usize, j: usize, known: usize) -> Result<DMatrix<f64>> {
    check_receiver(ch, l)?;
    if j == 0 || j > l {
        return Err(Error::Index(format!("message level {j} cannot be decoded at level {l}")));
    }
    if known + 1 < j || known > j {
        return Err(Error::Index(format!("known prefix {known} must be {} or {j}", j - 1)));
    }
    let amp = Amplitudes::new(ch, a);
    let (rows, k) = covariance_entries(ch, a, &amp, l, j, known);
    let m = DMatrix::from_row_slice(rows.len(), rows.len(), &k);
    check_psd(&m)?;
    Ok(m)
}

/// Minimum eigenvalue must stay above `-1e-9 * trace`.
pub fn check_psd(m: &DMatrix<f64>) -> Result<()> {
    let trace = m.trace().abs();
    let min = m.clone().symmetric_eigen().eigenvalues.min();
    if min < -1e-9 * trace.max(f64::MIN_POSITIVE) {
        Err(Error::NotPsd { min_eigenvalue: min })
    } else {
        Ok(())
    }
}

/// `log2 det` of a small symmetric positive definite matrix in row-major order.
pub(crate) fn log2_det(k: &[f64], dim: usize) -> Result<f64> {
    let mut l = k.to_vec();
    let mut acc = 0.0;
    for c in 0..dim {
        let mut d = l[c * dim + c];
        for p in 0..c {
            d -= l[c * dim + p] * l[c * dim + p];
        }
        if !(d > 0.0) {
            let m = DMatrix::from_row_slice(dim, dim, k);
            check_psd(&m)?;
            return Err(Error::Numerical("singular covariance matrix".into()));
        }
        let d = d.sqrt();
        l[c * dim + c] = d;
        acc += d.log2();
        for r in c + 1..dim {
            let mut v = l[r * dim + c];
            for p in 0..c {
                v -= l[r * dim + p] * l[c * dim + p];
            }
            l[r * dim + c] = v / d;
        }
    }
    Ok(2.0 * acc)
}

/// Identifies one inequality of the rate region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintId {
    /// Rate of `U^k` as decoded at level `l`.
    Source { k: usize, l: usize },
    /// Broadcast refinement `j` of level `l` decoded at level `receiver`.
    Broadcast { l: usize, j: usize, receiver: usize },
    /// Quantization of refinement `m` of level `l`.
    Quantization { l: usize, m: usize },
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintId::Source { k, l } => write!(f, "source[k={k},l={l}]"),
            ConstraintId::Broadcast { l, j, receiver } => write!(f, "broadcast[l={l},j={j},rx={receiver}]"),
            ConstraintId::Quantization { l, m } => write!(f, "quantization[l={l},m={m}]"),
        }
    }
}

/// Bound on `R_s^k` with the value contributed by every decoding level.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBound {
    pub rate: f64,
    pub limiting_level: usize,
    /// `(l, bound at l)` for every `l` in `[k; N+1]`.
    pub per_level: Vec<(usize, f64)>,
}

/// Pieces of the source-rate bound at one decoding level.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerms {
    /// `log2(det K^{k-1,k-1} / det K^{k-1,k})`.
    pub direct: f64,
    /// `(j, C(..))` for the support messages `V_j^k`, `j` in `[k; l-1]`.
    pub support: Vec<(usize, f64)>,
}

impl SourceTerms {
    pub fn total(&self) -> f64 {
        self.direct + self.support.iter().map(|(_, v)| v).sum::<f64>()
    }
}

fn source_terms_with(ch: &Channel, a: &PowerAllocation, amp: &Amplitudes, k: usize, l: usize) -> Result<SourceTerms> {
    let ordering = ch.ordering();
    let (rows, num) = covariance_entries(ch, a, amp, l, k, k - 1);
    let (_, den) = covariance_entries(ch, a, amp, l, k, k);
    let dim = rows.len();
    let direct = log2_det(&num, dim)? - log2_det(&den, dim)?;
    let direct = clamp_cancellation(direct, 1.0, "determinant ratio")?;
    let mut support = Vec::with_capacity(l.saturating_sub(k));
    for j in k..l {
        let signal = amp.support_power(j, l, k);
        let interference = amp.lower_power(l, j - 1)
            + (k + 1..=j).map(|kk| amp.support_power(j, l, kk)).sum::<f64>()
            + amp.upper_cross(l, l, l + 1)
            + amp.broadcast_cross(ordering, l, l, j + 1, l)
            + amp.own_cross(l, l, 1)
            + amp.noise[l];
        support.push((j, cap(signal / interference)));
    }
    Ok(SourceTerms { direct, support })
}

/// The two pieces of the `R_s^k` bound at decoding level `l`.
pub fn source_rate_terms(ch: &Channel, a: &PowerAllocation, k: usize, l: usize) -> Result<SourceTerms> {
    let n = ch.n();
    if k == 0 || k > n + 1 || l < k || l > n + 1 {
        return Err(Error::Index(format!("no source constraint for k={k}, l={l}")));
    }
    let amp = Amplitudes::new(ch, a);
    source_terms_with(ch, a, &amp, k, l)
}

fn source_bound_with(ch: &Channel, a: &PowerAllocation, amp: &Amplitudes, k: usize) -> Result<SourceBound> {
    let mut per_level = Vec::with_capacity(ch.n() + 2 - k);
    let mut best = (f64::INFINITY, k);
    for l in k..=ch.n() + 1 {
        let v = source_terms_with(ch, a, amp, k, l)?.total();
        per_level.push((l, v));
        if v < best.0 {
            best = (v, l);
        }
    }
    Ok(SourceBound { rate: best.0, limiting_level: best.1, per_level })
}

/// Upper bound on `R_s^k`: minimum over the decoding levels `l` in `[k; N+1]`.
pub fn source_rate_bound(ch: &Channel, a: &PowerAllocation, k: usize) -> Result<SourceBound> {
    if k == 0 || k > ch.n() + 1 {
        return Err(Error::Index(format!("message level {k} outside [1; {}]", ch.n() + 1)));
    }
    let amp = Amplitudes::new(ch, a);
    source_bound_with(ch, a, &amp, k)
}

/// Bound on the broadcast rate of one refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastBound {
    pub rate: f64,
    pub limiting_receiver: usize,
    /// `(receiver level, bound)` for every receiver of the refinement.
    pub per_receiver: Vec<(usize, f64)>,
}

fn broadcast_bound_with(ch: &Channel, amp: &Amplitudes, l: usize, j: usize) -> Result<BroadcastBound> {
    let ordering = ch.ordering();
    let mut per_receiver = Vec::new();
    let mut best = (f64::INFINITY, 0);
    let own_decoded: f64 = amp.bcast[l][1..=j].iter().sum();
    for x in j..=ch.refinements(l) {
        let rx = ordering.refinement_target(l, x);
        let g2 = amp.gain[l][rx].powi(2);
        let raw = amp.lower_power(rx, l - 1)
            + amp.upper_cross(rx, rx, rx + 1)
            + amp.broadcast_cross(ordering, rx, rx, l + 1, rx)
            - g2 * own_decoded
            + amp.own_cross(rx, rx, 1)
            + amp.noise[rx];
        let den = clamp_cancellation(raw, amp.noise[rx] + g2 * own_decoded, "broadcast interference")?;
        if den <= 0.0 {
            return Err(Error::Numerical(format!("broadcast denominator vanished for l={l}, j={j}")));
        }
        let v = cap(g2 * amp.bcast[l][j] / den);
        per_receiver.push((rx, v));
        if v < best.0 {
            best = (v, rx);
        }
    }
    Ok(BroadcastBound { rate: best.0, limiting_receiver: best.1, per_receiver })
}

/// Upper bound on `R^_l^j`: minimum over the receivers `o_l(k)`, `k` in `[j; M_l]`.
pub fn broadcast_rate_bound(ch: &Channel, a: &PowerAllocation, l: usize, j: usize) -> Result<BroadcastBound> {
    if l == 0 || l > ch.n() || j == 0 || j > ch.refinements(l) {
        return Err(Error::Index(format!("no broadcast refinement {j} at level {l}")));
    }
    let amp = Amplitudes::new(ch, a);
    broadcast_bound_with(ch, &amp, l, j)
}

/// Conditional variance of `Y_l` given `Y_j'` and everything `j'` knows:
/// the numerator of the quantization-noise constraint.
fn wyner_ziv_numerator(ch: &Channel, amp: &Amplitudes, l: usize, jp: usize) -> Result<f64> {
    let ordering = ch.ordering();
    let var_l = amp.upper_cross(l, l, jp + 1)
        + amp.own_cross(l, l, l + 1)
        + amp.broadcast_cross(ordering, l, l, 1, jp)
        + amp.noise[l];
    let cov = amp.upper_cross(jp, l, jp + 1) + amp.own_cross(jp, l, l + 1) + amp.broadcast_cross(ordering, jp, l, 1, jp);
    let var_j = amp.upper_cross(jp, jp, jp + 1)
        + amp.own_cross(jp, jp, l + 1)
        + amp.broadcast_cross(ordering, jp, jp, 1, jp)
        + amp.noise[jp];
    clamp_cancellation(var_l - cov * cov / var_j, var_l, "conditional variance")
}

/// `Var(Y_l | Y_j', known messages)`, the numerator of the quantization
/// constraint for side-information receiver `jp`.
pub fn wyner_ziv_variance(ch: &Channel, a: &PowerAllocation, l: usize, jp: usize) -> Result<f64> {
    if l == 0 || l > ch.n() || jp <= l || jp > ch.n() + 1 {
        return Err(Error::Index(format!("no side-information receiver {jp} for level {l}")));
    }
    let amp = Amplitudes::new(ch, a);
    wyner_ziv_numerator(ch, &amp, l, jp)
}

/// Smallest total noise `sum_{i=m}^{M_l} N_l^i` admissible at cumulative
/// broadcast rate `rate_sum`, with the limiting side-information receiver.
/// Infinite when nothing is conveyed.
pub fn quantization_threshold(ch: &Channel, a: &PowerAllocation, l: usize, m: usize, rate_sum: f64) -> Result<(f64, usize)> {
    if l == 0 || l > ch.n() || m == 0 || m > ch.refinements(l) {
        return Err(Error::Index(format!("no quantization refinement {m} at level {l}")));
    }
    let amp = Amplitudes::new(ch, a);
    threshold_with(ch, &amp, l, m, rate_sum)
}

fn threshold_with(ch: &Channel, amp: &Amplitudes, l: usize, m: usize, rate_sum: f64) -> Result<(f64, usize)> {
    let ordering = ch.ordering();
    let mut best = (0.0f64, ordering.refinement_target(l, m));
    for x in m..=ch.refinements(l) {
        let jp = ordering.refinement_target(l, x);
        let numerator = wyner_ziv_numerator(ch, amp, l, jp)?;
        let t = if rate_sum > 0.0 {
            numerator / (rate_sum.exp2() - 1.0)
        } else if numerator > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if x == m || t > best.0 {
            best = (t, jp);
        }
    }
    Ok(best)
}

/// One quantization-noise constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationCheck {
    pub l: usize,
    pub m: usize,
    /// Noise the description carries, `sum_{i=m}^{M_l} N_l^i`.
    pub provided: f64,
    /// Strict lower bound on `provided`.
    pub required: f64,
    pub limiting_receiver: usize,
    /// `provided - required`; `+inf` for descriptions that are not conveyed.
    pub slack: f64,
    pub feasible: bool,
}

/// Checks every quantization constraint against the given broadcast rates
/// (`rates[l-1][i-1] = R^_l^i`).
pub fn quantization_feasible(ch: &Channel, a: &PowerAllocation, rates: &[Vec<f64>]) -> Result<Vec<QuantizationCheck>> {
    let n = ch.n();
    if rates.len() != n || (1..=n).any(|l| rates[l - 1].len() != ch.refinements(l)) {
        return Err(Error::Index("broadcast rate table does not match the network".into()));
    }
    if rates.iter().flatten().any(|r| !(*r >= 0.0)) {
        return Err(Error::Domain("broadcast rates must be non-negative".into()));
    }
    let amp = Amplitudes::new(ch, a);
    let mut out = Vec::new();
    for l in 1..=n {
        let mut cumulative = 0.0;
        for m in 1..=ch.refinements(l) {
            cumulative += rates[l - 1][m - 1];
            let provided = a.quant_noise_tail(l, m);
            let (required, rx) = threshold_with(ch, &amp, l, m, cumulative)?;
            let (slack, feasible) = if provided.is_infinite() {
                (f64::INFINITY, true)
            } else if required.is_infinite() {
                (f64::NEG_INFINITY, false)
            } else {
                // strict inequality, enforced with a small relative margin
                (provided - required, provided > required * (1.0 + FEASIBILITY_SLACK) && provided > 0.0)
            };
            out.push(QuantizationCheck { l, m, provided, required, limiting_receiver: rx, slack, feasible });
        }
    }
    Ok(out)
}

/// Broadcast bounds for every relay level and refinement.
pub fn broadcast_bounds(ch: &Channel, a: &PowerAllocation) -> Result<Vec<Vec<BroadcastBound>>> {
    let amp = Amplitudes::new(ch, a);
    (1..=ch.n())
        .map(|l| (1..=ch.refinements(l)).map(|j| broadcast_bound_with(ch, &amp, l, j)).collect())
        .collect()
}

/// Returns a copy of `a` whose quantization noises are the smallest the
/// broadcast bounds admit: each tail sum sits `QUANT_MARGIN` above its
/// threshold, solved from the finest refinement down with non-negative
/// increments. Refinements with zero cumulative broadcast rate get
/// infinite noise, i.e. they are not conveyed.
pub fn with_minimal_quantization(ch: &Channel, a: &PowerAllocation) -> Result<PowerAllocation> {
    let amp = Amplitudes::new(ch, a);
    let mut out = a.clone();
    for l in 1..=ch.n() {
        let levels = ch.refinements(l);
        let mut thresholds = Vec::with_capacity(levels);
        let mut rates = Vec::with_capacity(levels);
        let mut cumulative = 0.0;
        for m in 1..=levels {
            cumulative += broadcast_bound_with(ch, &amp, l, m)?.rate;
            rates.push(cumulative);
            thresholds.push(threshold_with(ch, &amp, l, m, cumulative)?.0);
        }
        let mut tail = 0.0;
        for m in (1..=levels).rev() {
            let t = thresholds[m - 1];
            if t.is_infinite() || rates[m - 1] == 0.0 {
                out.set_quant_noise(l, m, f64::INFINITY)?;
                continue;
            }
            let target = (t * (1.0 + QUANT_MARGIN)).max(tail).max(f64::MIN_POSITIVE);
            out.set_quant_noise(l, m, target - tail)?;
            tail = target;
        }
    }
    Ok(out)
}

/// Rates achieved by one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `R_s^k` for `k` in `[1; N+1]` (all zero when infeasible).
    pub source_rates: Vec<f64>,
    /// Source bounds ignoring the quantization constraints.
    pub unconstrained_rates: Vec<f64>,
    /// Level limiting each source rate.
    pub limiting_levels: Vec<usize>,
    /// `R^_l^j`, set to its bound.
    pub broadcast_rates: Vec<Vec<f64>>,
    pub quantization: Vec<QuantizationCheck>,
    pub feasible: bool,
    /// Every inequality with its slack.
    pub constraints: Vec<(ConstraintId, f64)>,
    pub total: f64,
}

/// Evaluates every constraint for an allocation whose quantization noises
/// are given. Broadcast rates are set to their bounds. If any quantization
/// constraint fails, the allocation is infeasible and its total is zero.
pub fn evaluate(ch: &Channel, a: &PowerAllocation) -> Result<RateReport> {
    if a.n() != ch.n() {
        return Err(Error::Allocation(format!("allocation is for {} relays, network has {}", a.n(), ch.n())));
    }
    a.check_power(ch.coherent())?;
    let amp = Amplitudes::new(ch, a);
    let n = ch.n();
    let mut constraints = Vec::new();

    let mut broadcast_rates = Vec::with_capacity(n);
    for l in 1..=n {
        let mut row = Vec::new();
        for j in 1..=ch.refinements(l) {
            let b = broadcast_bound_with(ch, &amp, l, j)?;
            for &(receiver, v) in &b.per_receiver {
                constraints.push((ConstraintId::Broadcast { l, j, receiver }, v - b.rate));
            }
            row.push(b.rate);
        }
        broadcast_rates.push(row);
    }

    let quantization = quantization_feasible(ch, a, &broadcast_rates)?;
    let feasible = quantization.iter().all(|q| q.feasible);
    for q in &quantization {
        constraints.push((ConstraintId::Quantization { l: q.l, m: q.m }, q.slack));
    }

    let mut unconstrained_rates = Vec::with_capacity(n + 1);
    let mut limiting_levels = Vec::with_capacity(n + 1);
    for k in 1..=n + 1 {
        let b = source_bound_with(ch, a, &amp, k)?;
        for &(l, v) in &b.per_level {
            constraints.push((ConstraintId::Source { k, l }, v - b.rate));
        }
        unconstrained_rates.push(b.rate);
        limiting_levels.push(b.limiting_level);
    }
    let source_rates = if feasible { unconstrained_rates.clone() } else { vec![0.0; n + 1] };
    let total = source_rates.iter().sum();
    Ok(RateReport {
        source_rates,
        unconstrained_rates,
        limiting_levels,
        broadcast_rates,
        quantization,
        feasible,
        constraints,
        total,
    })
}

/// Total rate of an allocation with the minimal admissible quantization
/// noise; the objective of the optimizer.
pub fn optimal_total(ch: &Channel, a: &PowerAllocation) -> Result<f64> {
    let q = with_minimal_quantization(ch, a)?;
    let amp = Amplitudes::new(ch, &q);
    let mut total = 0.0;
    for k in 1..=ch.n() + 1 {
        total += source_bound_with(ch, &q, &amp, k)?.rate;
    }
    Ok(total)
}
