use clustersim_core::formation::{build_cluster, max_isl_distance_km, FormationKind};
use clustersim_core::fronthaul::{
    advise, feasible_splits, feasible_splits_with_margin, isl_latency_ms, split_catalog, Criterion, IslProfile,
    SplitName,
};
use clustersim_core::geometry::{BodyConstants, UnitDirection};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn catalog_is_the_golden_table() {
    let rows: Vec<_> =
        split_catalog().iter().map(|o| (o.name, o.ul_rate_gbps, o.dl_rate_gbps, o.latency_high_ms)).collect();
    assert_eq!(
        rows,
        [
            (SplitName::IntraPhy, 86.1, 86.1, 0.1),
            (SplitName::IntraMac, 3.0, 4.0, 1.0),
            (SplitName::PdcpRlc, 3.0, 4.0, 10.0),
        ]
    );
    assert_eq!(split_catalog(), split_catalog());
}

#[test]
fn one_degree_ring_rules_out_intra_phy_on_latency() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let body = BodyConstants::default();
    let c = build_cluster(UnitDirection::north_pole(), 9, FormationKind::Circular, 1f64.to_radians(), 0.0, &mut rng)
        .unwrap();
    let r = advise(&c, &body, 100.0, 100.0, 0.0, 1.0).unwrap();
    assert!((r.max_isl_distance_km - 121.7).abs() < 0.1);
    assert!((r.isl.one_way_latency_ms - 0.406).abs() < 5e-4);
    assert_eq!(r.verdicts[0].limiting, Some(Criterion::Latency));
    assert_eq!(r.feasible(), [SplitName::IntraMac, SplitName::PdcpRlc]);
}

fn names(v: &[clustersim_core::fronthaul::SplitOption]) -> Vec<SplitName> {
    v.iter().map(|o| o.name).collect()
}

proptest! {
    #[test]
    fn more_capacity_or_less_latency_never_removes_options(
        ul in 0.1f64..200.0, dl in 0.1f64..200.0, lat in 0.0f64..20.0,
        dul in 0.0f64..100.0, ddl in 0.0f64..100.0, dlat in 0.0f64..1.0,
    ) {
        let base = names(&feasible_splits(&IslProfile::new(ul, dl, lat).unwrap()));
        let better = names(&feasible_splits(&IslProfile::new(ul + dul, dl + ddl, lat * dlat).unwrap()));
        for n in base {
            prop_assert!(better.contains(&n));
        }
    }

    #[test]
    fn advise_composes_distance_latency_and_feasibility(
        theta_deg in 0.01f64..20.0,
        n_slaves in 0usize..12,
        uniform in any::<bool>(),
        ul in 1.0f64..120.0,
        dl in 1.0f64..120.0,
        processing in 0.0f64..2.0,
        margin in 1.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let kind = if uniform { FormationKind::Uniform } else { FormationKind::Circular };
        let body = BodyConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = build_cluster(UnitDirection::new(0.2, -0.4, 0.9).unwrap(), n_slaves, kind, theta_deg.to_radians(), 0.3, &mut rng).unwrap();
        let r = advise(&c, &body, ul, dl, processing, margin).unwrap();
        let latency = isl_latency_ms(max_isl_distance_km(&c, &body), processing).unwrap();
        let expected = names(&feasible_splits_with_margin(&IslProfile::new(ul, dl, latency).unwrap(), margin));
        prop_assert_eq!(r.feasible(), expected);
    }
}
