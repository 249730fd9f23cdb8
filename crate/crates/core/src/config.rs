//! Topology configuration files (TOML, unknown keys rejected).
//!
//! ```toml
//! n_relays = 2
//! theta = 4.0          # path-loss exponent
//! snr_db = 10.0        # P / N at unit distance, same for every node
//! coherent = true      # optional, default true
//! positions = [[0.0, 0.0], [0.25, 0.0], [0.75, 0.0], [1.0, 0.0]]
//! # or distance_matrix = [[0.0, ...], ...]   (source, relays.., destination)
//!
//! [allocation]         # optional, used by the eval command
//! source_order = [1, 2, 3]
//! refinement_orders = [[3, 2], [3]]
//! fractions = { "alpha_s_s^3" = 1.0 }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::{db_to_linear, Ordering, PowerAllocation, Topology};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub n_relays: usize,
    pub theta: f64,
    pub snr_db: f64,
    #[serde(default = "default_coherent")]
    pub coherent: bool,
    pub distance_matrix: Option<Vec<Vec<f64>>>,
    pub positions: Option<Vec<[f64; 2]>>,
    pub allocation: Option<AllocationConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationConfig {
    pub source_order: Option<Vec<usize>>,
    pub refinement_orders: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub fractions: BTreeMap<String, f64>,
}

fn default_coherent() -> bool {
    true
}

impl TopologyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn snr(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    /// Builds the topology; every problem is reported as a config error.
    pub fn topology(&self) -> Result<Topology> {
        let nodes = self.n_relays + 2;
        let p = self.snr();
        let powers = vec![p; self.n_relays + 1];
        let noises = vec![1.0; self.n_relays + 1];
        let topo = match (&self.distance_matrix, &self.positions) {
            (Some(_), Some(_)) => return Err(Error::Config("give either distance_matrix or positions, not both".into())),
            (None, None) => return Err(Error::Config("distance_matrix or positions is required".into())),
            (Some(d), None) => {
                if d.len() != nodes {
                    return Err(Error::Config(format!("distance_matrix has {} rows, {nodes} nodes expected", d.len())));
                }
                Topology::new(d.clone(), self.theta, powers, noises, self.coherent)
            }
            (None, Some(pos)) => {
                if pos.len() != nodes {
                    return Err(Error::Config(format!("{} positions given, {nodes} nodes expected", pos.len())));
                }
                Topology::from_positions(pos, self.theta, powers, noises, self.coherent)
            }
        };
        topo.map_err(|e| Error::Config(e.to_string()))
    }

    /// Ordering and allocation of the `[allocation]` table; the direct
    /// link with the destination-first identity ordering when absent.
    pub fn allocation(&self) -> Result<(Ordering, PowerAllocation)> {
        let n = self.n_relays;
        let cfg = match &self.allocation {
            None => {
                let o = Ordering::destination_first((1..=n + 1).collect()).expect("identity source order");
                return Ok((o, PowerAllocation::direct(n)));
            }
            Some(c) => c,
        };
        let source = cfg.source_order.clone().unwrap_or_else(|| (1..=n + 1).collect());
        let ordering = match &cfg.refinement_orders {
            Some(r) => Ordering::new(source, r.clone()),
            None => Ordering::destination_first(source),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        let params = PowerAllocation::params(n);
        let mut a = PowerAllocation::zeros(n);
        for (name, &v) in &cfg.fractions {
            let p = params
                .iter()
                .find(|p| p.to_string() == *name)
                .ok_or_else(|| Error::Config(format!("unknown allocation parameter `{name}`")))?;
            a.set(*p, v).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok((ordering, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"
n_relays = 2
theta = 4.0
snr_db = 10.0
positions = [[0.0, 0.0], [0.25, 0.0], [0.75, 0.0], [1.0, 0.0]]
"#;

    #[test]
    fn parses_positions_like_the_line_builder() {
        let c = TopologyConfig::parse(LINE).unwrap();
        assert!(c.coherent);
        let t = c.topology().unwrap();
        let line = Topology::two_relay_line(0.25, 10.0, 4.0, true).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((t.distance(a, b) - line.distance(a, b)).abs() < 1e-12);
            }
        }
        assert!((t.tx_power(0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn strict_parsing() {
        assert!(matches!(TopologyConfig::parse(&format!("{LINE}\nbogus = 1\n")), Err(Error::Config(_))));
        assert!(TopologyConfig::parse("n_relays = 1\ntheta = 2.0\n").is_err());
        let both = format!("{LINE}distance_matrix = [[0.0, 1.0], [1.0, 0.0]]\n");
        assert!(TopologyConfig::parse(&both).unwrap().topology().is_err());
        let wrong = LINE.replace("n_relays = 2", "n_relays = 1");
        assert!(TopologyConfig::parse(&wrong).unwrap().topology().is_err());
    }

    #[test]
    fn allocation_table() {
        let c = TopologyConfig::parse(LINE).unwrap();
        let (o, a) = c.allocation().unwrap();
        assert_eq!(o, Ordering::destination_first(vec![1, 2, 3]).unwrap());
        assert_eq!(a, PowerAllocation::direct(2));
        let text = format!(
            "{LINE}[allocation]\nsource_order = [2, 1, 3]\nfractions = {{ \"alpha_s_s^1\" = 0.5, \"beta_1^1\" = 0.25 }}\n"
        );
        let (o, a) = TopologyConfig::parse(&text).unwrap().allocation().unwrap();
        assert_eq!(o.source_order(), &[2, 1, 3]);
        assert_eq!(a.own(1), 0.5);
        assert_eq!(a.broadcast(1, 1), 0.25);
        let bad = format!("{LINE}[allocation]\nfractions = {{ \"gamma\" = 0.5 }}\n");
        assert!(TopologyConfig::parse(&bad).unwrap().allocation().is_err());
    }
}
