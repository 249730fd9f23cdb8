//! Protocol presets: restrictions of the allocation space that recover the
//! classical relaying strategies as special cases of the mixed strategy.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::network::{Ordering, Param, PowerAllocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PresetName {
    /// Direct transmission only.
    OneHop,
    /// Decode-and-forward of a single message.
    Df,
    /// Compress-and-forward: relays only send quantization bin indices.
    Cf,
    /// Partial decode-and-forward: no quantization.
    Pdf,
    /// Two relays: level 1 compresses, level 2 decodes and forwards.
    MixedCfDf,
    /// Every parameter free.
    FullMixed,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::OneHop,
        PresetName::Df,
        PresetName::Cf,
        PresetName::Pdf,
        PresetName::MixedCfDf,
        PresetName::FullMixed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::OneHop => "one_hop",
            PresetName::Df => "df",
            PresetName::Cf => "cf",
            PresetName::Pdf => "pdf",
            PresetName::MixedCfDf => "mixed_cf_df",
            PresetName::FullMixed => "full_mixed",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_hop" => Ok(PresetName::OneHop),
            "df" => Ok(PresetName::Df),
            "cf" => Ok(PresetName::Cf),
            "pdf" => Ok(PresetName::Pdf),
            "mixed_cf_df" => Ok(PresetName::MixedCfDf),
            "full_mixed" | "mixed" => Ok(PresetName::FullMixed),
            other => Err(Error::Preset(format!("unknown preset `{other}`"))),
        }
    }
}

/// Free parameters of a protocol; everything else is pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPreset {
    pub name: PresetName,
    pub n: usize,
    pub coherent: bool,
    free: Vec<Param>,
    pinned: Vec<Param>,
}

impl ProtocolPreset {
    pub fn new(name: PresetName, n: usize, coherent: bool) -> Result<Self> {
        if name == PresetName::MixedCfDf && n != 2 {
            return Err(Error::Preset(format!("mixed_cf_df needs exactly 2 relays, got {n}")));
        }
        let (free, pinned): (Vec<Param>, Vec<Param>) = PowerAllocation::params(n)
            .into_iter()
            .partition(|p| (coherent || !p.is_coherent_only()) && admits(name, n, p));
        Ok(Self { name, n, coherent, free, pinned })
    }

    pub fn free(&self) -> &[Param] {
        &self.free
    }

    pub fn pinned(&self) -> &[Param] {
        &self.pinned
    }

    pub fn is_free(&self, p: &Param) -> bool {
        self.free.contains(p)
    }

    /// Whether any broadcast fraction is free, which is when refinement
    /// orders matter at all.
    pub fn uses_broadcast(&self) -> bool {
        self.free.iter().any(|p| matches!(p, Param::Broadcast { .. }))
    }

    /// Orderings searched by the optimizer. Without broadcast messages the
    /// refinement orders are irrelevant; compress-and-forward relays send a
    /// single description aimed at the destination first. Exhaustive for
    /// `N <= 3`; beyond that only the identity source order is tried.
    pub fn orderings(&self) -> Vec<Ordering> {
        let n = self.n;
        if self.name == PresetName::OneHop {
            return vec![Ordering::destination_first((1..=n + 1).collect()).expect("valid")];
        }
        if n > 3 {
            let src: Vec<usize> = (1..=n + 1).collect();
            return vec![Ordering::destination_first(src).expect("valid")];
        }
        match self.name {
            PresetName::MixedCfDf | PresetName::FullMixed => Ordering::all(n),
            _ => Ordering::all_source_orders(n, true),
        }
    }

    /// Allocation with every pinned parameter zero, the free ones set from
    /// `values` and renormalized per node when a node's total exceeds one.
    pub fn project(&self, values: &[f64]) -> Result<PowerAllocation> {
        if values.len() != self.free.len() {
            return Err(Error::Allocation(format!(
                "{} values for {} free parameters",
                values.len(),
                self.free.len()
            )));
        }
        let mut totals: Vec<(crate::network::Owner, f64)> = Vec::new();
        for (p, &v) in self.free.iter().zip(values) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{p} = {v} outside [0, 1]")));
            }
            match totals.iter_mut().find(|(o, _)| *o == p.owner()) {
                Some((_, t)) => *t += v,
                None => totals.push((p.owner(), v)),
            }
        }
        let mut a = PowerAllocation::zeros(self.n);
        for (p, &v) in self.free.iter().zip(values) {
            let total = totals.iter().find(|(o, _)| *o == p.owner()).map(|(_, t)| *t).unwrap_or(0.0);
            a.set(*p, if total > 1.0 { v / total } else { v })?;
        }
        Ok(a)
    }

    /// Free-parameter values of an allocation; errors if a pinned
    /// parameter is nonzero.
    pub fn coordinates(&self, a: &PowerAllocation) -> Result<Vec<f64>> {
        for p in &self.pinned {
            if a.get(*p)? != 0.0 {
                return Err(Error::Preset(format!("{p} is pinned to zero by {}", self.name)));
            }
        }
        self.free.iter().map(|p| a.get(*p)).collect()
    }
}

fn admits(name: PresetName, n: usize, p: &Param) -> bool {
    match (name, *p) {
        (PresetName::OneHop, Param::Own { level }) => level == n + 1,
        (PresetName::OneHop, _) => false,
        (PresetName::Df, Param::Broadcast { .. }) => false,
        (PresetName::Df, Param::Own { level })
        | (PresetName::Df, Param::SourceSupport { level, .. })
        | (PresetName::Df, Param::RelaySupport { level, .. }) => level == 1,
        (PresetName::Cf, Param::Own { level }) => level == n + 1,
        (PresetName::Cf, Param::Broadcast { refinement, .. }) => refinement == 1,
        (PresetName::Cf, _) => false,
        (PresetName::Pdf, Param::Broadcast { .. }) => false,
        (PresetName::Pdf, _) => true,
        (PresetName::MixedCfDf, Param::Own { level }) => level == 2,
        (PresetName::MixedCfDf, Param::SourceSupport { target, level }) => target == 2 && level == 2,
        (PresetName::MixedCfDf, Param::RelaySupport { relay, target, level }) => {
            relay == 2 && target == 2 && level == 2
        }
        (PresetName::MixedCfDf, Param::Broadcast { relay, .. }) => relay == 1,
        (PresetName::FullMixed, _) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_and_pinned_partition_the_parameters() {
        for name in PresetName::ALL {
            for coherent in [true, false] {
                let n = 2;
                let p = ProtocolPreset::new(name, n, coherent).unwrap();
                let all = PowerAllocation::params(n);
                assert_eq!(p.free().len() + p.pinned().len(), all.len());
                for q in &all {
                    assert!(p.free().contains(q) != p.pinned().contains(q));
                }
            }
        }
    }

    #[test]
    fn preset_examples() {
        let one = ProtocolPreset::new(PresetName::OneHop, 3, true).unwrap();
        assert_eq!(one.free(), &[Param::Own { level: 4 }]);

        let pdf = ProtocolPreset::new(PresetName::Pdf, 2, true).unwrap();
        assert!(!pdf.uses_broadcast());
        assert!(pdf.pinned().iter().all(|p| matches!(p, Param::Broadcast { .. })));

        let cf = ProtocolPreset::new(PresetName::Cf, 2, true).unwrap();
        assert!(cf.pinned().contains(&Param::Own { level: 1 }));
        assert!(cf.pinned().contains(&Param::Own { level: 2 }));
        assert!(cf.is_free(&Param::Broadcast { relay: 1, refinement: 1 }));

        let df = ProtocolPreset::new(PresetName::Df, 2, false).unwrap();
        assert_eq!(df.free().len(), 3);
        assert!(df.free().iter().all(|p| !p.is_coherent_only()));

        assert!(ProtocolPreset::new(PresetName::MixedCfDf, 3, true).is_err());
        let m = ProtocolPreset::new(PresetName::MixedCfDf, 2, true).unwrap();
        assert_eq!(m.free().len(), 5);

        assert_eq!(ProtocolPreset::new(PresetName::FullMixed, 2, true).unwrap().free().len(), 13);
        assert_eq!(ProtocolPreset::new(PresetName::FullMixed, 2, false).unwrap().free().len(), 9);
    }

    #[test]
    fn ordering_sets() {
        let n = 2;
        assert_eq!(ProtocolPreset::new(PresetName::FullMixed, n, true).unwrap().orderings().len(), 4);
        assert_eq!(ProtocolPreset::new(PresetName::Df, n, true).unwrap().orderings().len(), 2);
        for o in ProtocolPreset::new(PresetName::Cf, n, true).unwrap().orderings() {
            for l in 1..=n {
                assert_eq!(o.refinement_target(l, 1), n + 1);
            }
        }
        assert_eq!(ProtocolPreset::new(PresetName::OneHop, n, true).unwrap().orderings().len(), 1);
    }

    #[test]
    fn projection_renormalizes_per_node() {
        let p = ProtocolPreset::new(PresetName::Cf, 2, true).unwrap();
        let a = p.project(&[0.5, 0.7, 0.2]).unwrap();
        assert_eq!(a.get(Param::Own { level: 3 }).unwrap(), 0.5);
        assert_eq!(a.get(Param::Broadcast { relay: 1, refinement: 1 }).unwrap(), 0.7);
        let p = ProtocolPreset::new(PresetName::Pdf, 1, true).unwrap();
        let a = p.project(&vec![1.0; p.free().len()]).unwrap();
        assert!(a.check_power(true).is_ok());
        assert!(p.project(&[0.1]).is_err());
        assert_eq!(p.coordinates(&p.project(&vec![0.1; p.free().len()]).unwrap()).unwrap(), vec![0.1; p.free().len()]);
        let cf = ProtocolPreset::new(PresetName::Cf, 1, true).unwrap();
        assert!(cf.coordinates(&PowerAllocation::direct(1)).is_ok());
        assert!(ProtocolPreset::new(PresetName::OneHop, 1, true)
            .unwrap()
            .coordinates(&p.project(&vec![0.1; p.free().len()]).unwrap())
            .is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in PresetName::ALL {
            assert_eq!(name.as_str().parse::<PresetName>().unwrap(), name);
        }
        assert!("bogus".parse::<PresetName>().is_err());
    }
}
