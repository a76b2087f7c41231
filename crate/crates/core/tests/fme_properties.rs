mod support;

use bcsec_core::fme::{
    eliminate, eliminate_all, project, region_equal, remove_redundant, ComparisonMode, InequalitySystem,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::vertex_oracle::{self, Agreement};

fn system(seed: u64) -> (InequalitySystem, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = 2 + (seed % 3) as usize;
    let keep = 1 + (seed / 3 % (nv as u64 - 1)) as usize;
    let rows = 12 - 2 * nv;
    (vertex_oracle::random_system(&mut rng, nv, rows, keep, 5), keep)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn elimination_matches_vertex_projection(seed in any::<u64>()) {
        let (sys, _) = system(seed);
        let out = eliminate_all(&sys, None).unwrap();
        prop_assert_eq!(vertex_oracle::check_projection(&sys, &out), Agreement::Agree);
    }

    #[test]
    fn pruned_projection_matches_plain_elimination(seed in any::<u64>()) {
        let (sys, _) = system(seed);
        let plain = eliminate_all(&sys, None).unwrap();
        let pruned = project(&sys, None).unwrap();
        prop_assert!(region_equal(&plain, &pruned, &[], ComparisonMode::Exact).unwrap().equal);
        prop_assert_eq!(vertex_oracle::check_projection(&sys, &pruned), Agreement::Agree);
    }

    #[test]
    fn feasible_points_survive_elimination(seed in any::<u64>()) {
        let (sys, _) = system(seed);
        let (rows, _) = vertex_oracle::system_rows(&sys);
        let verts = vertex_oracle::vertices(&rows, sys.variables.len());
        prop_assume!(!verts.is_empty());
        let c = vertex_oracle::centroid(&verts);
        let last = sys.variables.last().unwrap().clone();
        let out = eliminate(&sys, &last).unwrap();
        let (erows, _) = vertex_oracle::system_rows(&out);
        prop_assert!(vertex_oracle::contains(&erows, &c[..out.variables.len()]));
    }

    #[test]
    fn redundancy_removal_keeps_the_region(seed in any::<u64>()) {
        let (sys, _) = system(seed);
        let out = eliminate_all(&sys, None).unwrap();
        let reduced = remove_redundant(&out, &[]).unwrap();
        prop_assert!(reduced.rows.len() <= out.rows.len());
        prop_assert!(region_equal(&out, &reduced, &[], ComparisonMode::Exact).unwrap().equal);
    }

    #[test]
    fn strictness_follows_the_parents(seed in any::<u64>()) {
        let (mut sys, _) = system(seed);
        for r in sys.rows.iter_mut() {
            r.strict = false;
        }
        let out = eliminate_all(&sys, None).unwrap();
        prop_assert!(out.rows.iter().all(|r| !r.strict));
    }
}
