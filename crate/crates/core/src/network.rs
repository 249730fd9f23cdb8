//! Network geometry, decoding orders and power allocations.
//!
//! Physical nodes are indexed `0` (source), `1..=N` (relays) and `N + 1`
//! (destination). Rate formulas work in *level* space instead: level `l`
//! is the relay `o_s(l)` that decodes the first `l` partial source
//! messages, and level `N + 1` is always the destination. [`Channel`]
//! performs the translation once so the formulas never touch physical
//! indices.

use crate::error::{Error, Result};

/// Distances below this are treated as coincident nodes.
pub const MIN_DISTANCE: f64 = 1e-6;

/// Slack accepted on per-node power sums.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Amplitude gain of the log-distance path loss model, `d^(-theta/2)`.
pub fn gain(distance: f64, pathloss_exponent: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    if !(pathloss_exponent > 0.0) || !pathloss_exponent.is_finite() {
        return Err(Error::Domain(format!(
            "path loss exponent must be positive, got {pathloss_exponent}"
        )));
    }
    Ok(distance.powf(-pathloss_exponent / 2.0))
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n_relays: usize,
    distances: Vec<Vec<f64>>,
    pathloss_exponent: f64,
    tx_powers: Vec<f64>,
    noise_powers: Vec<f64>,
    coherent: bool,
}

impl Topology {
    /// Builds a topology from an explicit `(N+2) x (N+2)` distance matrix.
    ///
    /// `tx_powers` holds `P_s, P_1, .., P_N` and `noise_powers` holds
    /// `N_1, .., N_N, N_d`.
    pub fn new(
        distances: Vec<Vec<f64>>,
        pathloss_exponent: f64,
        tx_powers: Vec<f64>,
        noise_powers: Vec<f64>,
        coherent: bool,
    ) -> Result<Self> {
        let nodes = distances.len();
        if nodes < 2 {
            return Err(Error::Topology("need at least a source and a destination".into()));
        }
        let n_relays = nodes - 2;
        for (i, row) in distances.iter().enumerate() {
            if row.len() != nodes {
                return Err(Error::Topology(format!("distance row {i} has {} entries, expected {nodes}", row.len())));
            }
            for (j, &d) in row.iter().enumerate() {
                if i == j {
                    if d != 0.0 {
                        return Err(Error::Topology(format!("diagonal distance ({i},{i}) must be zero")));
                    }
                    continue;
                }
                if !d.is_finite() || d < MIN_DISTANCE {
                    return Err(Error::Topology(format!("distance ({i},{j}) = {d} is not positive")));
                }
                if (d - distances[j][i]).abs() > 1e-12 * d.max(1.0) {
                    return Err(Error::Topology(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        if !(pathloss_exponent > 0.0) || !pathloss_exponent.is_finite() {
            return Err(Error::Topology(format!("path loss exponent must be positive, got {pathloss_exponent}")));
        }
        if tx_powers.len() != n_relays + 1 {
            return Err(Error::Topology(format!("expected {} transmit powers, got {}", n_relays + 1, tx_powers.len())));
        }
        if noise_powers.len() != n_relays + 1 {
            return Err(Error::Topology(format!("expected {} noise powers, got {}", n_relays + 1, noise_powers.len())));
        }
        if let Some(p) = tx_powers.iter().chain(&noise_powers).find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::Topology(format!("powers and noise variances must be positive, got {p}")));
        }
        Ok(Self { n_relays, distances, pathloss_exponent, tx_powers, noise_powers, coherent })
    }

    /// Builds a topology from node coordinates (`source, relays.., destination`).
    pub fn from_positions(
        positions: &[[f64; 2]],
        pathloss_exponent: f64,
        tx_powers: Vec<f64>,
        noise_powers: Vec<f64>,
        coherent: bool,
    ) -> Result<Self> {
        let distances = positions
            .iter()
            .map(|a| positions.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
            .collect();
        Self::new(distances, pathloss_exponent, tx_powers, noise_powers, coherent)
    }

    /// Two relays on the source-destination line: source at 0, relay 1 at
    /// `r`, relay 2 at `1 - r`, destination at 1. All nodes transmit at
    /// `snr` and every receiver has unit noise, so `P_s / N_d = snr`.
    pub fn two_relay_line(r: f64, snr: f64, pathloss_exponent: f64, coherent: bool) -> Result<Self> {
        if !r.is_finite() || !(-0.5..=0.5).contains(&r) {
            return Err(Error::Topology(format!("offset r = {r} outside [-0.5, 0.5]")));
        }
        if r.abs() < MIN_DISTANCE || (1.0 - 2.0 * r).abs() < MIN_DISTANCE {
            return Err(Error::Topology(format!("offset r = {r} places two nodes on top of each other")));
        }
        if !(snr > 0.0) {
            return Err(Error::Topology(format!("snr must be positive, got {snr}")));
        }
        let xs = [0.0, r, 1.0 - r, 1.0];
        let distances = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
        Self::new(distances, pathloss_exponent, vec![snr; 3], vec![1.0; 3], coherent)
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    pub fn destination(&self) -> usize {
        self.n_relays + 1
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distances[a][b]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn pathloss_exponent(&self) -> f64 {
        self.pathloss_exponent
    }

    /// Transmit power of physical node `node` (0 = source).
    pub fn tx_power(&self, node: usize) -> f64 {
        self.tx_powers[node]
    }

    /// Noise variance at physical receiver `node` (1..=N+1).
    pub fn noise_power(&self, node: usize) -> f64 {
        self.noise_powers[node - 1]
    }

    pub fn coherent(&self) -> bool {
        self.coherent
    }

    pub fn with_coherent(mut self, coherent: bool) -> Self {
        self.coherent = coherent;
        self
    }

    /// Amplitude gain between two physical nodes; zero for a node and itself.
    pub fn channel_gain(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.distances[a][b].powf(-self.pathloss_exponent / 2.0)
        }
    }

    /// SNR of the direct link, `h_sd^2 P_s / N_d`.
    pub fn direct_snr(&self) -> f64 {
        let d = self.destination();
        self.channel_gain(0, d).powi(2) * self.tx_power(0) / self.noise_power(d)
    }
}

/// Source decoding order `o_s` and per-level refinement orders `o_l`.
///
/// `o_l` lists the levels in `[l+1; N+1]` in the order in which they are
/// served by the successive refinements of level `l`: `o_l(1)` decodes only
/// the coarsest description, `o_l(M_l)` decodes all of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    n: usize,
    source: Vec<usize>,
    refinement: Vec<Vec<usize>>,
    inverse: Vec<Vec<usize>>,
}

impl Ordering {
    /// `source[l-1] = o_s(l)` must fix `N+1`; `refinement[l-1]` is `o_l`.
    pub fn new(source: Vec<usize>, refinement: Vec<Vec<usize>>) -> Result<Self> {
        if source.is_empty() {
            return Err(Error::Ordering("source order must contain the destination".into()));
        }
        let n = source.len() - 1;
        if source[n] != n + 1 {
            return Err(Error::Ordering(format!("o_s must fix the destination {}", n + 1)));
        }
        check_permutation(&source, 1, n + 1).map_err(|e| Error::Ordering(format!("o_s: {e}")))?;
        if refinement.len() != n {
            return Err(Error::Ordering(format!("expected {n} refinement orders, got {}", refinement.len())));
        }
        let mut inverse = Vec::with_capacity(n);
        for (idx, order) in refinement.iter().enumerate() {
            let l = idx + 1;
            check_permutation(order, l + 1, n + 1).map_err(|e| Error::Ordering(format!("o_{l}: {e}")))?;
            let mut inv = vec![0; order.len()];
            for (pos, &level) in order.iter().enumerate() {
                inv[level - l - 1] = pos + 1;
            }
            inverse.push(inv);
        }
        Ok(Self { n, source, refinement, inverse })
    }

    /// Relays decode in index order and every refinement order is ascending.
    pub fn identity(n: usize) -> Self {
        let source = (1..=n + 1).collect();
        let refinement = (1..=n).map(|l| (l + 1..=n + 1).collect()).collect();
        Self::new(source, refinement).expect("identity ordering is valid")
    }

    /// Same source order, every refinement order serves the destination first
    /// and the remaining levels from the farthest to the nearest.
    pub fn destination_first(source: Vec<usize>) -> Result<Self> {
        let n = source.len().saturating_sub(1);
        let refinement = (1..=n).map(|l| (l + 1..=n + 1).rev().collect()).collect();
        Self::new(source, refinement)
    }

    /// Every ordering for `n` relays: all `o_s` times all combinations of `o_l`.
    pub fn all(n: usize) -> Vec<Self> {
        let sources = permutations(&(1..=n).collect::<Vec<_>>());
        let refinement_sets: Vec<Vec<Vec<usize>>> =
            (1..=n).map(|l| permutations(&(l + 1..=n + 1).collect::<Vec<_>>())).collect();
        let mut out = Vec::new();
        for src in &sources {
            let mut source = src.clone();
            source.push(n + 1);
            for combo in cartesian(&refinement_sets) {
                out.push(Self::new(source.clone(), combo).expect("enumerated ordering is valid"));
            }
        }
        out
    }

    /// All source orders with the given refinement rule applied.
    pub fn all_source_orders(n: usize, destination_first: bool) -> Vec<Self> {
        permutations(&(1..=n).collect::<Vec<_>>())
            .into_iter()
            .map(|mut src| {
                src.push(n + 1);
                if destination_first {
                    Self::destination_first(src).expect("valid")
                } else {
                    let refinement = (1..=n).map(|l| (l + 1..=n + 1).collect()).collect();
                    Self::new(src, refinement).expect("valid")
                }
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `o_s(level)`: physical relay acting as `level` (destination for `N+1`).
    pub fn node_of_level(&self, level: usize) -> usize {
        if level == 0 {
            0
        } else {
            self.source[level - 1]
        }
    }

    /// `o_l(i)`, 1-based.
    pub fn refinement_target(&self, l: usize, i: usize) -> usize {
        self.refinement[l - 1][i - 1]
    }

    pub fn refinement_order(&self, l: usize) -> &[usize] {
        &self.refinement[l - 1]
    }

    /// Inverse refinement order: position of `level` in `o_l`, if it is
    /// downstream of `l`.
    pub fn inverse(&self, l: usize, level: usize) -> Option<usize> {
        if l == 0 || l > self.n || level <= l || level > self.n + 1 {
            None
        } else {
            Some(self.inverse[l - 1][level - l - 1])
        }
    }

    pub fn source_order(&self) -> &[usize] {
        &self.source
    }

    pub fn refinement_orders(&self) -> &[Vec<usize>] {
        &self.refinement
    }
}

impl std::fmt::Display for Ordering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
        write!(f, "s[{}]", join(&self.source))?;
        for (i, o) in self.refinement.iter().enumerate() {
            write!(f, " o{}[{}]", i + 1, join(o))?;
        }
        Ok(())
    }
}

fn check_permutation(values: &[usize], lo: usize, hi: usize) -> std::result::Result<(), String> {
    let len = hi + 1 - lo;
    if values.len() != len {
        return Err(format!("expected {len} entries, got {}", values.len()));
    }
    let mut seen = vec![false; len];
    for &v in values {
        if v < lo || v > hi {
            return Err(format!("entry {v} outside [{lo}; {hi}]"));
        }
        if std::mem::replace(&mut seen[v - lo], true) {
            return Err(format!("entry {v} repeated"));
        }
    }
    Ok(())
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn cartesian(sets: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    sets.iter().fold(vec![Vec::new()], |acc, set| {
        acc.iter()
            .flat_map(|prefix| {
                set.iter().map(move |item| {
                    let mut next = prefix.clone();
                    next.push(item.clone());
                    next
                })
            })
            .collect()
    })
}

/// Transmitting node that owns an allocation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Source,
    Relay(usize),
}

/// One scalar of a [`PowerAllocation`], indexed in level space with the
/// 1-based conventions of the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    /// `alpha_{s,s}^k`: source power on its own partial message `U^k`.
    Own { level: usize },
    /// `alpha_{s,l'}^k`: source power supporting `V_{l'}^k`.
    SourceSupport { target: usize, level: usize },
    /// `alpha_{l,l'}^k`: relay `l` power supporting `V_{l'}^k`.
    RelaySupport { relay: usize, target: usize, level: usize },
    /// `beta_l^k`: relay `l` power on broadcast refinement `k`.
    Broadcast { relay: usize, refinement: usize },
}

impl Param {
    pub fn owner(&self) -> Owner {
        match *self {
            Param::Own { .. } | Param::SourceSupport { .. } => Owner::Source,
            Param::RelaySupport { relay, .. } | Param::Broadcast { relay, .. } => Owner::Relay(relay),
        }
    }

    /// Cross support that requires phase-aligned transmission.
    pub fn is_coherent_only(&self) -> bool {
        match *self {
            Param::SourceSupport { .. } => true,
            Param::RelaySupport { relay, target, .. } => relay != target,
            _ => false,
        }
    }
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Param::Own { level } => write!(f, "alpha_s_s^{level}"),
            Param::SourceSupport { target, level } => write!(f, "alpha_s_{target}^{level}"),
            Param::RelaySupport { relay, target, level } => write!(f, "alpha_{relay}_{target}^{level}"),
            Param::Broadcast { relay, refinement } => write!(f, "beta_{relay}^{refinement}"),
        }
    }
}

/// Power fractions and quantization noises for `N` relays.
///
/// Quantization noise entries default to `+inf`, which stands for a
/// refinement that is never conveyed.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    n: usize,
    own: Vec<f64>,
    source_support: Vec<Vec<f64>>,
    relay_support: Vec<Vec<Vec<f64>>>,
    broadcast: Vec<Vec<f64>>,
    quant_noise: Vec<Vec<f64>>,
}

impl PowerAllocation {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            own: vec![0.0; n + 1],
            source_support: (1..=n).map(|target| vec![0.0; target]).collect(),
            relay_support: (1..=n).map(|l| (l..=n).map(|_| vec![0.0; l]).collect()).collect(),
            broadcast: (1..=n).map(|l| vec![0.0; n - l + 1]).collect(),
            quant_noise: (1..=n).map(|l| vec![f64::INFINITY; n - l + 1]).collect(),
        }
    }

    /// Only the last partial message, at full source power.
    pub fn direct(n: usize) -> Self {
        let mut a = Self::zeros(n);
        a.own[n] = 1.0;
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of refinements `M_l = N - l + 1` of relay level `l`.
    pub fn refinements(&self, l: usize) -> usize {
        self.n + 1 - l
    }

    /// Every power-fraction parameter for `n` relays in a fixed order.
    pub fn params(n: usize) -> Vec<Param> {
        let mut out = Vec::new();
        out.extend((1..=n + 1).map(|level| Param::Own { level }));
        for target in 1..=n {
            out.extend((1..=target).map(|level| Param::SourceSupport { target, level }));
        }
        for relay in 1..=n {
            for target in relay..=n {
                out.extend((1..=relay).map(|level| Param::RelaySupport { relay, target, level }));
            }
        }
        for relay in 1..=n {
            out.extend((1..=n + 1 - relay).map(|refinement| Param::Broadcast { relay, refinement }));
        }
        out
    }

    fn check(&self, p: Param) -> Result<()> {
        let n = self.n;
        let ok = match p {
            Param::Own { level } => (1..=n + 1).contains(&level),
            Param::SourceSupport { target, level } => (1..=n).contains(&target) && (1..=target).contains(&level),
            Param::RelaySupport { relay, target, level } => {
                (1..=n).contains(&relay) && (relay..=n).contains(&target) && (1..=relay).contains(&level)
            }
            Param::Broadcast { relay, refinement } => {
                (1..=n).contains(&relay) && (1..=n + 1 - relay).contains(&refinement)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Index(format!("{p} does not exist for {n} relays")))
        }
    }

    pub fn get(&self, p: Param) -> Result<f64> {
        self.check(p)?;
        Ok(self.value(p))
    }

    pub fn set(&mut self, p: Param, v: f64) -> Result<()> {
        self.check(p)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Allocation(format!("{p} = {v} is outside [0, 1]")));
        }
        *self.slot(p) = v;
        Ok(())
    }

    fn value(&self, p: Param) -> f64 {
        match p {
            Param::Own { level } => self.own[level - 1],
            Param::SourceSupport { target, level } => self.source_support[target - 1][level - 1],
            Param::RelaySupport { relay, target, level } => self.relay_support[relay - 1][target - relay][level - 1],
            Param::Broadcast { relay, refinement } => self.broadcast[relay - 1][refinement - 1],
        }
    }

    fn slot(&mut self, p: Param) -> &mut f64 {
        match p {
            Param::Own { level } => &mut self.own[level - 1],
            Param::SourceSupport { target, level } => &mut self.source_support[target - 1][level - 1],
            Param::RelaySupport { relay, target, level } => {
                &mut self.relay_support[relay - 1][target - relay][level - 1]
            }
            Param::Broadcast { relay, refinement } => &mut self.broadcast[relay - 1][refinement - 1],
        }
    }

    /// `alpha_{s,s}^k`; zero outside `[1; N+1]`.
    pub fn own(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.n + 1 {
            self.own[k - 1]
        } else {
            0.0
        }
    }

    /// `alpha_{j,l}^k` for a sender `j` (0 = source) supporting `V_l^k`;
    /// zero for index combinations the signal model does not contain.
    pub fn support(&self, sender: usize, target: usize, k: usize) -> f64 {
        let n = self.n;
        if target == 0 || target > n || k == 0 || k > target {
            return 0.0;
        }
        if sender == 0 {
            self.source_support[target - 1][k - 1]
        } else if sender <= target && k <= sender {
            self.relay_support[sender - 1][target - sender][k - 1]
        } else {
            0.0
        }
    }

    /// `beta_l^k`; zero outside `[1; M_l]`.
    pub fn broadcast(&self, l: usize, k: usize) -> f64 {
        if l >= 1 && l <= self.n && k >= 1 && k <= self.refinements(l) {
            self.broadcast[l - 1][k - 1]
        } else {
            0.0
        }
    }

    /// `sum_{k=lo}^{hi} beta_l^k` (empty when `lo > hi`).
    pub fn broadcast_sum(&self, l: usize, lo: usize, hi: usize) -> f64 {
        (lo.max(1)..=hi).map(|k| self.broadcast(l, k)).sum()
    }

    /// `N_l^i`.
    pub fn quant_noise(&self, l: usize, i: usize) -> f64 {
        self.quant_noise[l - 1][i - 1]
    }

    /// `sum_{i'=i}^{M_l} N_l^{i'}`, the noise on description `i` of relay `l`.
    pub fn quant_noise_tail(&self, l: usize, i: usize) -> f64 {
        self.quant_noise[l - 1][i - 1..].iter().sum()
    }

    pub fn set_quant_noise(&mut self, l: usize, i: usize, v: f64) -> Result<()> {
        if l == 0 || l > self.n || i == 0 || i > self.refinements(l) {
            return Err(Error::Index(format!("N_{l}^{i} does not exist for {} relays", self.n)));
        }
        if !(v >= 0.0) {
            return Err(Error::Allocation(format!("quantization noise N_{l}^{i} = {v} must be non-negative")));
        }
        self.quant_noise[l - 1][i - 1] = v;
        Ok(())
    }

    /// Total power fraction used by a transmitter.
    pub fn node_total(&self, owner: Owner) -> f64 {
        match owner {
            Owner::Source => self.own.iter().chain(self.source_support.iter().flatten()).sum(),
            Owner::Relay(l) => {
                self.relay_support[l - 1].iter().flatten().sum::<f64>() + self.broadcast[l - 1].iter().sum::<f64>()
            }
        }
    }

    /// Checks fraction ranges, per-node power sums and, without coherent
    /// transmission, that no node supports a message of another level.
    pub fn check_power(&self, coherent: bool) -> Result<()> {
        for p in Self::params(self.n) {
            let v = self.value(p);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Allocation(format!("{p} = {v} is outside [0, 1]")));
            }
            if !coherent && p.is_coherent_only() && v != 0.0 {
                return Err(Error::Allocation(format!("{p} = {v} requires coherent transmission")));
            }
        }
        let owners = std::iter::once(Owner::Source).chain((1..=self.n).map(Owner::Relay));
        for owner in owners {
            let total = self.node_total(owner);
            if total > 1.0 + POWER_TOLERANCE {
                let node = match owner {
                    Owner::Source => "source".to_string(),
                    Owner::Relay(l) => format!("relay level {l}"),
                };
                return Err(Error::PowerConstraint { node, total });
            }
        }
        // increments may be zero, the finest description must carry noise
        for row in &self.quant_noise {
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::Allocation(format!("quantization noise {v} must be non-negative")));
            }
            if let Some(last) = row.last() {
                if !(*last > 0.0) {
                    return Err(Error::Allocation("finest quantization noise must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Gains, powers and noises re-indexed by decoding level.
#[derive(Debug, Clone)]
pub struct Channel {
    n: usize,
    gain: Vec<Vec<f64>>,
    power: Vec<f64>,
    noise: Vec<f64>,
    coherent: bool,
    ordering: Ordering,
}

impl Channel {
    pub fn new(topo: &Topology, ordering: &Ordering) -> Result<Self> {
        let n = topo.n_relays();
        if ordering.n() != n {
            return Err(Error::Ordering(format!("ordering is for {} relays, topology has {n}", ordering.n())));
        }
        let node = |level: usize| ordering.node_of_level(level);
        let gain = (0..=n + 1)
            .map(|a| (0..=n + 1).map(|b| topo.channel_gain(node(a), node(b))).collect())
            .collect();
        let power = (0..=n).map(|l| topo.tx_power(node(l))).collect();
        let noise = (0..=n + 1).map(|l| if l == 0 { 0.0 } else { topo.noise_power(node(l)) }).collect();
        Ok(Self { n, gain, power, noise, coherent: topo.coherent(), ordering: ordering.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Amplitude gain between levels (0 = source, N+1 = destination).
    #[inline]
    pub fn gain(&self, from: usize, to: usize) -> f64 {
        self.gain[from][to]
    }

    #[inline]
    pub fn power(&self, level: usize) -> f64 {
        self.power[level]
    }

    #[inline]
    pub fn noise(&self, level: usize) -> f64 {
        self.noise[level]
    }

    pub fn coherent(&self) -> bool {
        self.coherent
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn refinements(&self, l: usize) -> usize {
        self.n + 1 - l
    }
}
