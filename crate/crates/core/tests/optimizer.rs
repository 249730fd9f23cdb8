use relaynet::optimize::{self, Budget};
use relaynet::protocol::PresetName;
use relaynet::Topology;

fn line(r: f64, coherent: bool) -> Topology {
    Topology::two_relay_line(r, 10.0, 4.0, coherent).unwrap()
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want
}

#[test]
fn decode_and_forward_curve_points() {
    let b = Budget::default();
    let r = optimize::optimize_preset(&line(-0.49, true), PresetName::Df, b, 0).unwrap();
    assert!(close(r.rate, 2.5715, 1e-3), "{}", r.rate);
    let r = optimize::optimize_preset(&line(0.27222, true), PresetName::Df, b, 0).unwrap();
    assert!(close(r.rate, 8.7415, 1e-3), "{}", r.rate);
    let r = optimize::optimize_preset(&line(-0.49, false), PresetName::Df, b, 0).unwrap();
    assert!(close(r.rate, 1.8795, 1e-3), "{}", r.rate);
}

#[test]
fn compress_and_forward_and_partial_decode_points() {
    let b = Budget::default();
    let r = optimize::optimize_preset(&line(0.27222, true), PresetName::Cf, b, 0).unwrap();
    assert!(close(r.rate, 6.2837, 1e-3), "{}", r.rate);
    let r = optimize::optimize_preset(&line(-0.27222, true), PresetName::Pdf, b, 0).unwrap();
    assert!(close(r.rate, 4.7594, 1e-3), "{}", r.rate);
}

#[test]
fn mixing_beats_decode_and_forward_near_the_destination() {
    let b = Budget::default();
    let t = line(0.49, true);
    let df = optimize::optimize_preset(&t, PresetName::Df, b, 0).unwrap().rate;
    let cfdf = optimize::optimize_preset(&t, PresetName::MixedCfDf, b, 0).unwrap().rate;
    assert!(cfdf - df >= 0.2, "{cfdf} vs {df}");
    assert!(close(cfdf, 7.8201, 0.05));
}

#[test]
fn sweep_rows_are_ordered_and_reproducible() {
    let b = Budget { restarts: 4, max_evaluations: 4_000 };
    let grid = [-0.3, 0.2];
    let presets = [PresetName::OneHop, PresetName::Df];
    let a = optimize::sweep(&grid, &presets, true, 10.0, 4.0, b, 3);
    let again = optimize::sweep(&grid, &presets, true, 10.0, 4.0, b, 3);
    assert_eq!(a, again);
    let order: Vec<(f64, PresetName)> = a.iter().map(|r| (r.r, r.preset)).collect();
    assert_eq!(
        order,
        vec![(-0.3, PresetName::OneHop), (-0.3, PresetName::Df), (0.2, PresetName::OneHop), (0.2, PresetName::Df)]
    );
    assert!(optimize::sweep(&grid, &[], true, 10.0, 4.0, b, 3).is_empty());
}

#[test]
fn bad_cells_do_not_stop_a_sweep() {
    let b = Budget { restarts: 2, max_evaluations: 1_000 };
    let rows = optimize::sweep(&[0.5, 0.1], &[PresetName::OneHop], true, 10.0, 4.0, b, 0);
    assert!(rows[0].outcome.is_err());
    assert!((rows[1].rate().unwrap() - 11f64.log2()).abs() < 1e-9);
}
