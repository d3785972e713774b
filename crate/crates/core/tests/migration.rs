use quantum_market::analysis::{center_of_mass, run_migration, MigrationRates};
use quantum_market::grid::build_price_grid;
use quantum_market::potential::PotentialProfile;
use quantum_market::solver::ModelParams;

const GOLDEN: &str = include_str!("data/migration_golden.csv");

fn peak_at(at: f64, width: f64) -> PotentialProfile {
    let g = build_price_grid(0.0, 1.0, 200).unwrap();
    let raw = g.centers().iter().map(|p| (-(p - at).powi(2) / (2.0 * width * width)).exp()).collect();
    PotentialProfile::from_raw(g, raw).unwrap()
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &x)| if x > a.1 { (i, x) } else { a }).0
}

#[test]
fn off_center_peak_drifts_toward_the_middle() {
    let v = peak_at(0.3, 0.03);
    let frames = run_migration(20, &v, &ModelParams::default(), MigrationRates { build: 0.1, decay: 0.1 }).unwrap();
    let centers = v.grid.centers();
    let coms: Vec<f64> = frames.iter().map(|f| center_of_mass(centers, &f.values).unwrap()).collect();
    let peaks: Vec<usize> = frames.iter().map(|f| argmax(&f.values)).collect();

    assert!(coms.windows(2).all(|w| w[1] > w[0]), "center of mass not monotone: {coms:?}");
    assert!(peaks.windows(2).all(|w| w[1] >= w[0]), "peak moved backwards: {peaks:?}");
    assert!(coms[20] < 0.5);

    let rows: Vec<(usize, f64, usize)> = GOLDEN
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), frames.len());
    for (step, com, peak) in rows {
        assert!((coms[step] - com).abs() < 1e-9, "step {step}: {} vs golden {com}", coms[step]);
        assert_eq!(peaks[step], peak, "step {step}");
    }
}

#[test]
fn symmetric_start_keeps_its_peak() {
    let v = peak_at(0.5, 0.05);
    let start = argmax(&v.values);
    let frames = run_migration(10, &v, &ModelParams::default(), MigrationRates { build: 0.2, decay: 0.1 }).unwrap();
    for f in &frames {
        assert!(argmax(&f.values).abs_diff(start) <= 1);
        let com = center_of_mass(v.grid.centers(), &f.values).unwrap();
        assert!((com - 0.5).abs() < 1e-9);
    }
}

#[test]
fn zero_rates_leave_first_and_last_frames_equal() {
    let v = peak_at(0.7, 0.02);
    let frames = run_migration(5, &v, &ModelParams::default(), MigrationRates { build: 0.0, decay: 0.0 }).unwrap();
    assert_eq!(frames.first(), frames.last());
}

#[test]
fn runs_are_reproducible() {
    let v = peak_at(0.25, 0.04);
    let rates = MigrationRates { build: 0.3, decay: 0.05 };
    let a = run_migration(8, &v, &ModelParams::default(), rates).unwrap();
    let b = run_migration(8, &v, &ModelParams::default(), rates).unwrap();
    assert_eq!(a, b);
}
