use likenet::ensemble::{evaluate_record, run_ensemble, EnsembleConfig, SystemRecord};
use likenet::stats::ks_statistic;
use likenet::{classify_strategic, StrategicTail};
use proptest::prelude::*;

fn stabilities(samples: usize, seed: u64) -> Vec<f64> {
    let cfg = EnsembleConfig {
        sample_count: samples,
        master_seed: seed,
        ..Default::default()
    };
    let mut sink: Vec<SystemRecord> = Vec::new();
    run_ensemble(&cfg, &mut sink).unwrap();
    sink.iter().map(|r| r.stability).collect()
}

#[test]
fn desk_run_agrees_with_pilot_distribution() {
    let main = stabilities(10_000, 0);
    let pilot = stabilities(1_000, 99);
    let d = ks_statistic(&main, &pilot);
    eprintln!("two-sample KS statistic: {d:.4}");
    assert!(d < 0.05, "KS statistic {d}");
}

#[test]
fn records_are_pure_functions_of_seed_and_index() {
    let cfg = EnsembleConfig {
        master_seed: 8,
        ..Default::default()
    };
    for idx in [0u64, 1, 57, 9_999] {
        let a = evaluate_record(&cfg, idx).unwrap();
        let b = evaluate_record(&cfg, idx).unwrap();
        assert_eq!(a, b);
        let (g, r) = a.rebuild(&cfg).unwrap();
        assert_eq!(g.edge_count(), 17);
        r.check_compatible(&g).unwrap();
        assert_eq!(a.outgoing_rates.len(), 34);
        assert!(a.stability > 0.0 && a.stability <= 1.0);
    }
}

proptest! {
    #[test]
    fn strategic_partition_is_exact(
        values in prop::collection::vec(0.0f64..1.0, 1..400),
        fraction in 0.001f64..0.999,
        highest in any::<bool>(),
    ) {
        let tail = if highest { StrategicTail::Highest } else { StrategicTail::Lowest };
        let p = classify_strategic(&values, fraction, tail).unwrap();
        let expected = ((fraction * values.len() as f64).round() as usize).clamp(1, values.len());
        prop_assert_eq!(p.strategic.len(), expected);
        prop_assert_eq!(p.strategic.len() + p.population.len(), values.len());
        for &s in &p.strategic {
            for &q in &p.population {
                match tail {
                    StrategicTail::Highest => prop_assert!(values[s] >= values[q]),
                    StrategicTail::Lowest => prop_assert!(values[s] <= values[q]),
                }
            }
        }
    }
}
