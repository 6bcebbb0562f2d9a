mod common;

use common::{random_pattern, rel_close};
use edm_core::{
    generate, read_pattern_csv, reference_day, sample_tdm, write_pattern_csv, DemandPattern, EnergyQuantity,
    EnergyUnit, IntervalSeries, LoadSpec, Pulse,
};
use proptest::prelude::*;

fn concat(a: &DemandPattern<f64>, b: &DemandPattern<f64>) -> DemandPattern<f64> {
    let powers = a.powers_w().iter().chain(b.powers_w()).copied().collect();
    DemandPattern::new(a.tau_s(), a.start_s(), powers).unwrap()
}

#[test]
fn pattern_csv_round_trip_many_seeds() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..120u64 {
        let pattern = random_pattern(seed, 2 + (seed as usize % 150));
        let path = dir.path().join(format!("p{seed}.csv"));
        write_pattern_csv(&pattern, &path).unwrap();
        let back: DemandPattern<f64> = read_pattern_csv(&path).unwrap();
        assert_eq!(back, pattern, "seed {seed}");
        let again = dir.path().join(format!("q{seed}.csv"));
        back.write_csv(&again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn single_row_pattern_needs_explicit_tau() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = DemandPattern::new(60, 0, vec![12.5]).unwrap();
    let path = dir.path().join("one.csv");
    pattern.write_csv(&path).unwrap();
    assert!(DemandPattern::<f64>::read_csv(&path).is_err());
    assert_eq!(DemandPattern::<f64>::read_csv_with_tau(&path, 60).unwrap(), pattern);
}

#[test]
fn interval_csv_round_trip_with_partial_step() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..100u64 {
        let pattern = random_pattern(seed, 37 + seed as usize);
        let step = pattern.tau_s() * 10;
        let series = sample_tdm(&pattern, step).unwrap();
        let path = dir.path().join(format!("s{seed}.csv"));
        series.write_csv(&path).unwrap();
        let inferred = IntervalSeries::<f64>::read_csv(&path, pattern.start_s(), None).unwrap();
        assert_eq!(inferred, series, "seed {seed}");
        let explicit = IntervalSeries::<f64>::read_csv(&path, pattern.start_s(), Some(step)).unwrap();
        assert_eq!(explicit, series);
    }
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "t_s,p_w\n0,10\n1,abc\n").unwrap();
    let err = DemandPattern::<f64>::read_csv(&path).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    std::fs::write(&path, "time,p\n0,10\n").unwrap();
    assert!(DemandPattern::<f64>::read_csv(&path).is_err());
    std::fs::write(&path, "t_s,p_w\n0,10\n1,-5\n").unwrap();
    assert!(DemandPattern::<f64>::read_csv(&path).is_err());
    std::fs::write(&path, "t_s,p_w\n0,10\n1,5\n3,5\n").unwrap();
    assert!(DemandPattern::<f64>::read_csv(&path).is_err());
}

#[test]
fn total_energy_is_additive_over_concatenation() {
    for seed in 0..100u64 {
        let a = random_pattern(seed, 50);
        let b = random_pattern(seed + 1000, 70);
        let b = DemandPattern::new(a.tau_s(), a.end_s(), b.powers_w().to_vec()).unwrap();
        let joined = concat(&a, &b);
        let sum = a.total_energy_ws() + b.total_energy_ws();
        assert!(rel_close(joined.total_energy_ws(), sum, 1e-12));
        assert!(rel_close(joined.total_energy().wh() * 3600.0, sum, 1e-12));
    }
}

#[test]
fn generator_is_deterministic_and_superposes() {
    let pulses = vec![
        Pulse::rect(10, 100, 1200.0),
        Pulse::rect(50, 30, 300.0),
        Pulse::ramp(200, 40, 800.0),
    ];
    let spec = |base: f64, pulses: Vec<Pulse>| LoadSpec {
        horizon_s: 600,
        tau_s: 1,
        base_w: base,
        pulses,
        noise_w: 0.0,
        seed: 1,
    };
    let all: DemandPattern<f64> = generate(&spec(40.0, pulses.clone())).unwrap();
    assert_eq!(all, generate(&spec(40.0, pulses.clone())).unwrap());
    let mut sum = vec![40.0; 600];
    for p in &pulses {
        let single: DemandPattern<f64> = generate(&spec(0.0, vec![*p])).unwrap();
        for (s, v) in sum.iter_mut().zip(single.powers_w()) {
            *s += v;
        }
    }
    assert_eq!(all.powers_w(), &sum[..]);

    let noisy = |seed| LoadSpec {
        noise_w: 3.0,
        seed,
        ..spec(40.0, pulses.clone())
    };
    let a: DemandPattern<f64> = generate(&noisy(5)).unwrap();
    assert_eq!(a, generate(&noisy(5)).unwrap());
    assert_ne!(a, generate::<f64>(&noisy(6)).unwrap());
}

#[test]
fn load_spec_text_round_trips() {
    let spec = edm_core::reference_day_spec(9);
    let back = LoadSpec::parse(&spec.to_text(), "mem").unwrap();
    assert_eq!(back, spec);
    let err = LoadSpec::parse("[grid]\nhorizon_s = 10\ntau_s = x\n", "spec.ini")
        .unwrap_err()
        .to_string();
    assert!(err.contains("spec.ini: line 3"), "{err}");
}

#[test]
fn reference_day_is_plausible_for_many_seeds() {
    for seed in 0..40u64 {
        let day: DemandPattern<f64> = reference_day(seed);
        assert_eq!(day.len(), 86_400);
        assert!(day.powers_w().iter().all(|&p| p >= 0.0 && p.is_finite()));
        let kwh = day.total_energy().kwh();
        assert!((5.0..=10.0).contains(&kwh), "seed {seed}: {kwh} kWh");
        assert!(edm_core::peak(&day) >= 3000.0);
    }
}

#[test]
fn f32_pattern_reads_and_sums() {
    let day: DemandPattern<f32> = reference_day(3);
    let wide: DemandPattern<f64> = reference_day(3);
    let rel = (day.total_energy_ws() as f64 - wide.total_energy_ws()).abs() / wide.total_energy_ws();
    assert!(rel < 1e-4);
}

proptest! {
    #[test]
    fn unit_conversions_compose(v in 0.0f64..1e9) {
        let q = EnergyQuantity::from_ws(v);
        for a in [EnergyUnit::Ws, EnergyUnit::Wh, EnergyUnit::KWh] {
            for b in [EnergyUnit::Ws, EnergyUnit::Wh, EnergyUnit::KWh] {
                let direct = q.to(b).value;
                let via = q.to(a).to(b).value;
                prop_assert!(rel_close(direct, via, 1e-14));
            }
        }
        prop_assert!(rel_close(EnergyQuantity::from_kwh(v).ws(), v * 3.6e6, 1e-15));
    }

    #[test]
    fn pattern_csv_round_trip(
        tau in 1i64..600,
        start in -10_000i64..10_000,
        powers in prop::collection::vec(0.0f64..1e5, 2..200),
    ) {
        let pattern = DemandPattern::new(tau, start * tau, powers).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        pattern.write_csv(&path).unwrap();
        prop_assert_eq!(DemandPattern::<f64>::read_csv(&path).unwrap(), pattern);
    }
}
