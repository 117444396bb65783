mod common;

use common::{random_case, solver_error};
use gridres_core::rng;
use proptest::prelude::*;

#[test]
fn tree_solver_matches_dense_nodal_solve() {
    let mut rng = rng::stream(rng::DEFAULT_SEED, 100, 0);
    for k in 0..100 {
        let (net, fault) = random_case(&mut rng);
        let e = solver_error(&net, &fault);
        assert!(e < 1e-9, "case {k}: relative error {e}\n{net:#?}\n{fault:#?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_solver_matches_dense_for_any_seed(seed in any::<u64>()) {
        let mut rng = rng::stream(seed, 100, 1);
        let (net, fault) = random_case(&mut rng);
        prop_assert!(solver_error(&net, &fault) < 1e-9);
    }
}
