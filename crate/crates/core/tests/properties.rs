use proptest::prelude::*;

use noma_aoii::config::SystemConfig;
use noma_aoii::queueing::{self, ArrivalMode, QueueParams};
use noma_aoii::semantic::{self, LogisticParams, NomaScenario};

fn default_scenario() -> NomaScenario {
    SystemConfig::default().scenario().unwrap()
}

fn similarities(s: &NomaScenario) -> Vec<f64> {
    let lp = LogisticParams::default();
    semantic::sinr_vector(s)
        .iter()
        .map(|&g| semantic::similarity(g, &lp))
        .collect()
}

/// At equal powers every user decoded earlier is interfered with by all
/// later users, so similarity grows along the decoding order and the last
/// decoded user, seeing only noise, is best off.
#[test]
fn similarity_along_decoding_order_at_equal_power() {
    let xi = similarities(&default_scenario());
    assert!(xi.windows(2).all(|w| w[0] < w[1]), "{xi:?}");
}

proptest! {
    #[test]
    fn own_power_never_lowers_own_similarity(
        powers in prop::collection::vec(1e-5f64..1e-2, 6),
        k in 0usize..6,
        factor in 1.0f64..50.0,
    ) {
        let mut s = default_scenario();
        for (u, p) in s.users.iter_mut().zip(&powers) {
            u.power = p.min(s.p_max);
        }
        let before = similarities(&s);
        let gamma_before = semantic::sinr_vector(&s);
        s.users[k].power = (s.users[k].power * factor).min(s.p_max);
        let after = similarities(&s);
        let gamma_after = semantic::sinr_vector(&s);
        prop_assert!(after[k] >= before[k]);
        for j in 0..k {
            prop_assert!(gamma_after[j] <= gamma_before[j]);
        }
        for j in k + 1..6 {
            prop_assert_eq!(gamma_after[j], gamma_before[j]);
        }
    }

    #[test]
    fn aoii_is_aoi_times_mean_deficit(
        mu0 in 12.0f64..30.0,
        mu1 in 10.5f64..30.0,
        mu2 in 10.5f64..30.0,
        a in 0.0f64..=1.0,
        xi in prop::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let qp = QueueParams {
            lambda0: 10.0,
            mu0,
            mu1,
            mu2,
            a,
            theta: 0.1,
            mode: ArrivalMode::FlowConservation,
        };
        let aoi = queueing::average_aoi(&qp).unwrap();
        let aoii = queueing::average_aoii(&aoi, &xi);
        let deficit = xi.iter().map(|x| 1.0 - x).sum::<f64>() / xi.len() as f64;
        prop_assert!((aoii.aoii - aoi.aoi_blended * deficit).abs() <= 1e-12 * aoi.aoi_blended);
        prop_assert!(aoii.aoii <= aoi.aoi_blended);
    }

    #[test]
    fn blended_aoi_lies_between_categories(
        mu0 in 12.0f64..30.0,
        a in 0.0f64..=1.0,
    ) {
        let qp = QueueParams {
            lambda0: 10.0,
            mu0,
            mu1: 15.0,
            mu2: 11.0,
            a,
            theta: 0.1,
            mode: ArrivalMode::FlowConservation,
        };
        let r = queueing::average_aoi(&qp).unwrap();
        let (lo, hi) = (r.aoi_cat1.min(r.aoi_cat2), r.aoi_cat1.max(r.aoi_cat2));
        prop_assert!(r.aoi_blended >= lo - 1e-15 && r.aoi_blended <= hi + 1e-15);
    }
}
