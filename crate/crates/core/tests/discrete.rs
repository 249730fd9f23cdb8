use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relaynet::discrete::{self, cond_mutual_info, BoundId, JointPmf};
use relaynet::Ordering;

/// `I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)` by brute-force summation.
fn brute_mi(p: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> f64 {
    let names = p.names();
    let sizes: Vec<usize> = names.iter().map(|n| p.alphabet(n).unwrap()).collect();
    let entropy = |set: Vec<&str>| -> f64 {
        let idx: Vec<usize> = set.iter().map(|s| names.iter().position(|n| n == s).unwrap()).collect();
        let mut m: HashMap<Vec<usize>, f64> = HashMap::new();
        for (flat, &prob) in p.probs().iter().enumerate() {
            let mut digits = vec![0; sizes.len()];
            let mut rest = flat;
            for d in (0..sizes.len()).rev() {
                digits[d] = rest % sizes[d];
                rest /= sizes[d];
            }
            *m.entry(idx.iter().map(|&i| digits[i]).collect()).or_default() += prob;
        }
        m.values().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
    };
    let ac: Vec<&str> = a.iter().chain(c).copied().collect();
    let bc: Vec<&str> = b.iter().chain(c).copied().collect();
    let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    entropy(ac) + entropy(bc) - entropy(abc) - entropy(c.to_vec())
}

#[test]
fn mutual_information_matches_entropy_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let vars = ["A", "B", "C", "D"].iter().map(|n| (n.to_string(), 3)).collect();
        let p = JointPmf::random(vars, &mut rng).unwrap();
        let fast = cond_mutual_info(&p, &["A", "D"], &["B"], &["C"]).unwrap();
        let slow = brute_mi(&p, &["A", "D"], &["B"], &["C"]);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }
}

#[test]
fn one_relay_bounds_match_hand_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = discrete::factored_pmf(1, 2, &mut rng).unwrap();
    let o = Ordering::identity(1);
    let r = discrete::rate_bounds(&p, 1, &o).unwrap();

    let s1_at_relay = brute_mi(&p, &["U1"], &["Y1"], &["V1_1", "W1_1"]);
    let s1_at_dest = brute_mi(&p, &["U1"], &["Y2"], &["V1_1", "W1_1"]) + brute_mi(&p, &["V1_1"], &["Y2"], &[]);
    let s1 = r.get(BoundId::Source { k: 1 }).unwrap();
    assert!((s1.value - s1_at_relay.min(s1_at_dest)).abs() < 1e-12);
    assert_eq!(s1.candidates.len(), 2);
    assert!((s1.candidates[0].1 - s1_at_relay).abs() < 1e-12);
    assert!((s1.candidates[1].1 - s1_at_dest).abs() < 1e-12);

    let s2 = brute_mi(&p, &["U2"], &["Y2", "Yhat1_1"], &["U1", "V1_1", "W1_1"]);
    assert!((r.get(BoundId::Source { k: 2 }).unwrap().value - s2).abs() < 1e-12);

    let bc = brute_mi(&p, &["W1_1"], &["Y2"], &["V1_1"]);
    let b = r.get(BoundId::Broadcast { l: 1, j: 1 }).unwrap();
    assert!((b.value - bc).abs() < 1e-12);
    assert_eq!(b.index, 2);

    let q = brute_mi(&p, &["Yhat1_1"], &["Y1"], &["Y2", "U1", "V1_1", "W1_1"]);
    assert!((r.get(BoundId::Quantization { l: 1, m: 1 }).unwrap().value - q).abs() < 1e-12);
    assert_eq!(r.bounds.len(), 4);
}

#[test]
fn two_relay_bounds_are_finite_and_non_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = discrete::factored_pmf(2, 2, &mut rng).unwrap();
    for o in Ordering::all(2) {
        let r = discrete::rate_bounds(&p, 2, &o).unwrap();
        // 3 source, 3 broadcast and 3 quantization entries
        assert_eq!(r.bounds.len(), 9);
        assert!(r.bounds.iter().all(|b| b.value.is_finite() && b.value >= 0.0));
    }
}

#[test]
fn vacuous_quantization_needs_no_rate() {
    // Yhat independent of everything: the description carries nothing
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = discrete::factored_pmf(1, 2, &mut rng).unwrap();
    let names: Vec<String> = base.names().to_vec();
    let yhat = names.iter().position(|n| n == "Yhat1_1").unwrap();
    let rest: Vec<&str> = names.iter().filter(|n| *n != "Yhat1_1").map(|s| s.as_str()).collect();
    let marg = base.marginal(&rest).unwrap();
    let mut probs = Vec::new();
    let mut vars: Vec<(String, usize)> = rest.iter().map(|n| (n.to_string(), 2)).collect();
    vars.push(("Yhat1_1".into(), 2));
    for &q in marg.probs() {
        probs.push(q * 0.3);
        probs.push(q * 0.7);
    }
    let p = JointPmf::new(vars, probs).unwrap();
    let r = discrete::rate_bounds(&p, 1, &Ordering::identity(1)).unwrap();
    assert!(r.get(BoundId::Quantization { l: 1, m: 1 }).unwrap().value < 1e-12);
    assert!(yhat < names.len());
}

#[test]
fn binary_symmetric_channel() {
    for p in [0.0, 0.11, 0.25, 0.5] {
        let pmf = discrete::bsc_pmf(p).unwrap();
        let r = discrete::rate_bounds(&pmf, 0, &Ordering::identity(0)).unwrap();
        assert!((r.source_total() - discrete::bsc_capacity(p)).abs() < 1e-12);
    }
    assert!((discrete::bsc_capacity(0.11) - 0.5).abs() < 1e-3);
}

#[test]
fn factored_pmf_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = discrete::factored_pmf(1, 2, &mut rng).unwrap();
    let q = JointPmf::from_text(&p.to_text()).unwrap();
    assert_eq!(p, q);
}

/// Real Gaussian `X` through additive Gaussian noise, both quantized on a
/// lattice of spacing `step`; the discrete value approaches
/// `0.5 log2(1 + snr)` as the lattice refines.
fn lattice_mi(snr: f64, step: f64) -> f64 {
    let half = (6.0 / step).round() as i64;
    let density = |v: f64, var: f64| (-v * v / (2.0 * var)).exp();
    let px: Vec<f64> = (-half..=half).map(|i| density(i as f64 * step, 1.0)).collect();
    let pz: Vec<f64> = (-half..=half).map(|i| density(i as f64 * step, 1.0 / snr)).collect();
    let (sx, sz) = (px.iter().sum::<f64>(), pz.iter().sum::<f64>());
    let ny = 4 * half as usize + 1;
    let mut probs = Vec::with_capacity(px.len() * ny);
    for x in 0..px.len() {
        for y in 0..ny {
            let z = y as i64 - x as i64;
            let pzv = if (0..pz.len() as i64).contains(&z) { pz[z as usize] / sz } else { 0.0 };
            probs.push(px[x] / sx * pzv);
        }
    }
    let p = JointPmf::from_weights(vec![("X".into(), px.len()), ("Y".into(), ny)], probs).unwrap();
    cond_mutual_info(&p, &["X"], &["Y"], &[] as &[&str]).unwrap()
}

#[test]
fn discretized_gaussian_converges() {
    let snr: f64 = 3.0;
    let exact = 0.5 * (1.0 + snr).log2();
    let errors: Vec<f64> = [1.2, 0.8, 0.4].iter().map(|&s| (lattice_mi(snr, s) - exact).abs()).collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 1e-6, "{errors:?}");
}
