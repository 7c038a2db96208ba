use dflux::experiments::{example_1, run_at, DiagnosticsMode};
use dflux::Scheme;

fn cubic(cells: usize) -> f64 {
    let mut spec = example_1();
    spec.times = vec![0.8];
    let out = run_at(&spec, Scheme::NessyahuTadmor, 2.0 / cells as f64, DiagnosticsMode::Light).unwrap();
    out.snapshots[0].cubic_accumulator.unwrap()
}

#[test]
fn cubic_accumulator_levels_off_under_refinement() {
    let values: Vec<f64> = [100, 200, 400].into_iter().map(cubic).collect();
    for w in values.windows(2) {
        assert!(w[1] / w[0] <= 2.0, "{values:?}");
    }
    let growth: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(growth[1] < growth[0], "{values:?}");
}
