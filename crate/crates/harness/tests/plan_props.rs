use proptest::prelude::*;
use swtest::plan::{ExperimentPlan, Method, NoiseCell};
use swtest::run_plan;
use swtest_core::{FunctionSpec, NoiseKind, NoiseSpec};

fn any_cell() -> impl Strategy<Value = NoiseCell> {
    prop_oneof![
        Just(NoiseCell::Clean),
        (0usize..4, 0.001f64..2.0)
            .prop_map(|(k, s)| NoiseCell::Noisy(NoiseSpec::new(NoiseKind::ALL[k], s).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_cell_keys_round_trip(cell in any_cell()) {
        prop_assert_eq!(NoiseCell::parse(&cell.key()).unwrap(), cell);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn detections_never_exceed_repetitions(reps in 1usize..4, seed in any::<u64>(), cell in any_cell()) {
        let mut plan = ExperimentPlan::table(3, Some(FunctionSpec::PureCosine(1.0)), seed).unwrap();
        plan.n = 120;
        plan.b = 40;
        plan.half_dim = 3;
        plan.draws = 100;
        plan.repetitions = reps;
        plan.noise = vec![cell];
        let report = run_plan(&plan).unwrap();
        prop_assert_eq!(report.cells.len(), 2);
        for c in &report.cells {
            prop_assert!(c.detections <= c.repetitions);
            prop_assert_eq!(c.repetitions, reps);
            prop_assert_eq!(c.runs.len(), reps);
            prop_assert!(c.failures <= reps);
        }
        prop_assert!(report.cell(Method::Gls, cell.kind_label(), cell.scale()).is_some());
    }
}
