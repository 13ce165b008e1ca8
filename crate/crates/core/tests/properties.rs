use coos_core::consensus::{compromise_paths, positionality_choice, ConsensusGeometry};
use coos_core::intent::IntentGroup;
use coos_core::kenn::{self, FeatureSchema, KennModel};
use coos_core::pclm::ParticipantId;
use coos_core::service::{tier_for_ratio, Agreement, Phase, RuleConfig, SessionEvent, SessionState};
use coos_core::sim::{normalize_set, GenerationMix, Scenario};
use coos_core::ternary::{
    centroid, embed, to_ternary, unembed, Axis, BoundKind, CoordinateBound, SimplexRegion, TernaryPoint,
};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = TernaryPoint> {
    (0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0).prop_map(|(a, b, c)| to_ternary([a, b, c]).unwrap())
}

fn axis() -> impl Strategy<Value = Axis> {
    (0usize..3).prop_map(|i| Axis::from_index(i).unwrap())
}

fn bound() -> impl Strategy<Value = CoordinateBound> {
    (axis(), any::<bool>(), 0.0f64..=1.0).prop_map(|(axis, min, value)| {
        let kind = if min { BoundKind::Min } else { BoundKind::Max };
        CoordinateBound::new(axis, kind, value).unwrap()
    })
}

fn group(id: usize, size: usize, p: TernaryPoint) -> IntentGroup {
    IntentGroup {
        group_id: id,
        member_ids: (0..size as u64).map(|i| ParticipantId(id as u64 * 100 + i)).collect(),
        aggregation_point: p,
        size,
        is_majority: id == 0,
    }
}

fn on_simplex(p: &TernaryPoint, tol: f64) -> bool {
    let c = p.coords();
    c.iter().all(|v| *v >= -tol) && (c.iter().sum::<f64>() - 1.0).abs() <= tol
}

proptest! {
    #[test]
    fn projection_lands_on_simplex_and_ignores_scale(
        raw in prop::array::uniform3(0.0f64..1e6),
        scale in 1e-3f64..1e3,
    ) {
        let p = to_ternary(raw).unwrap();
        prop_assert!(on_simplex(&p, 1e-12));
        let scaled = to_ternary([raw[0] * scale, raw[1] * scale, raw[2] * scale]).unwrap();
        prop_assert!(p.approx_eq(&scaled, 1e-12));
    }

    #[test]
    fn embedding_round_trips(p in point()) {
        let (x, y) = embed(p.coords());
        let back = unembed(x, y);
        for (u, v) in back.iter().zip(p.coords()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_lies_in_hull(points in prop::collection::vec(point(), 1..12)) {
        let c = centroid(&points, None).unwrap();
        prop_assert!(on_simplex(&c, 1e-12));
        prop_assert!(SimplexRegion::convex_hull(&points).contains(&c));
    }

    #[test]
    fn clipping_only_shrinks(points in prop::collection::vec(point(), 3..10), b in bound()) {
        let region = SimplexRegion::convex_hull(&points);
        let clipped = region.clip(&b);
        prop_assert!(clipped.area() <= region.area() + 1e-12);
        for v in clipped.vertices() {
            prop_assert!(b.admits(v));
            prop_assert!(on_simplex(v, 1e-9));
            prop_assert!(region.contains(v));
        }
    }

    #[test]
    fn compromise_legs_hold_their_coordinate(p in point(), q in point()) {
        let paths = compromise_paths(&group(0, 1, p), &group(1, 1, q)).unwrap();
        let back = compromise_paths(&group(1, 1, q), &group(0, 1, p)).unwrap();
        prop_assert!(paths.len() <= 6);
        prop_assert_eq!(paths.len(), back.len());
        for path in &paths {
            prop_assert!(on_simplex(&path.via, 1e-9));
            let (first, second) = path.held_axes();
            prop_assert_ne!(first, second);
            for s in &path.segments {
                prop_assert!(s.held_residual() < 1e-9);
            }
            prop_assert!(path.total_length >= p.distance(&q) - 1e-12);
        }
        for w in paths.windows(2) {
            prop_assert!(w[0].total_length <= w[1].total_length);
        }
    }

    #[test]
    fn narrowing_never_grows_the_region(
        p in point(),
        q in point(),
        bounds in prop::collection::vec(bound(), 0..5),
    ) {
        let mut geo = ConsensusGeometry::build(&[group(0, 3, p), group(1, 2, q)], true).unwrap();
        for b in bounds {
            let next = geo.narrow(b).unwrap();
            prop_assert!(next.candidate_region.area() <= geo.candidate_region.area() + 1e-12);
            prop_assert_eq!(next.reference_point, geo.reference_point);
            geo = next;
        }
    }

    #[test]
    fn positionality_target_lies_between_the_groups(
        gm in point(),
        gn in point(),
        n_maj in 1usize..40,
        n_min in 1usize..40,
        total in 1u32..10,
        respected_frac in 0.0f64..=1.0,
    ) {
        let respected = 1 + ((total - 1) as f64 * respected_frac).round() as u32;
        let scenarios = [(0, gm), (1, gn)];
        let r = positionality_choice(&group(0, n_maj, gm), &group(1, n_min, gn), total, respected, &scenarios).unwrap();
        let t = r.target_point;
        prop_assert!(on_simplex(&t, 1e-12));
        prop_assert!((t.distance(&gm) + t.distance(&gn) - gm.distance(&gn)).abs() < 1e-9);
        // the minority carries at least the majority's weight
        prop_assert!(t.distance(&gn) <= t.distance(&gm) + 1e-12);
    }

    #[test]
    fn normalized_values_span_the_unit_interval(
        raws in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 2..20),
    ) {
        let scenarios: Vec<Scenario> = raws
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut s = coos_core::sim::evaluate_scenario(&Default::default()).unwrap();
                s.id = i as u64;
                s.raw.social = r[0];
                s.raw.environmental = r[1];
                s.raw.economic_cost = r[2];
                s
            })
            .collect();
        let normalized = normalize_set(&scenarios).unwrap();
        for s in &normalized {
            let v = s.normalized.unwrap();
            prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(on_simplex(&s.point.unwrap(), 1e-9));
        }
    }

    #[test]
    fn transitions_follow_the_rule_table(steps in prop::collection::vec(0usize..5, 1..30)) {
        let mut s = SessionState::genesis(&SessionEvent::Created {
            session_id: 1,
            name: "p".into(),
            scenario_set: "s".into(),
            seed: 0,
            default_baseline_kwh: None,
        })
        .unwrap();
        let mut applied = vec![];
        for i in steps {
            let (from, to) = (s.phase, Phase::ALL[i]);
            let agreement = (to == Phase::ConsensusAchieved).then_some(Agreement {
                scenario_id: 0,
                generation_mix: GenerationMix { solar: 0.2, hydro: 0.3, grid: 0.5 },
            });
            let event = SessionEvent::Advanced { from, to, agreement };
            let ok = s.apply(&event).is_ok();
            prop_assert_eq!(ok, from.can_transition(to));
            prop_assert_eq!(s.phase, if ok { to } else { from });
            prop_assert_eq!(s.agreement.is_some(), s.phase.has_agreement());
            if ok {
                applied.push(event);
            }
        }
        let mut events = vec![SessionEvent::Created {
            session_id: 1,
            name: "p".into(),
            scenario_set: "s".into(),
            seed: 0,
            default_baseline_kwh: None,
        }];
        events.extend(applied);
        prop_assert_eq!(SessionState::replay(&events).unwrap().snapshot_bytes(), s.snapshot_bytes());
    }

    #[test]
    fn intervention_tiers_are_monotone(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0) {
        let config = RuleConfig::default();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(tier_for_ratio(lo, &config) <= tier_for_ratio(hi, &config));
    }

    #[test]
    fn cross_point_finds_linear_roots(root in -5.0f64..5.0, slope in 0.1f64..10.0, width in 0.5f64..5.0) {
        let (lo, hi) = (root - width, root + 0.7 * width);
        let x = kenn::cross_point(|x| slope * (x - root), |_| 0.0, lo, hi).unwrap();
        prop_assert!((x - root).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kenn_predictions_are_rates_and_flat_params_round_trip(seed in any::<u64>(), scale in 0.1f64..3.0) {
        let schema = FeatureSchema::default();
        let model = KennModel::random(schema.clone(), 4, seed, scale, scale).unwrap();
        prop_assert_eq!(model.cross_group_weight_count(), 0);
        let (corpus, _) = kenn::generate_synthetic_corpus(&schema, seed, 20, 0.05).unwrap();
        for r in &corpus {
            let (rate, scores) = model.predict(r).unwrap();
            prop_assert!((0.0..=1.0).contains(&rate));
            prop_assert_eq!(scores.raw.len(), model.groups());
        }
        let mut copy = KennModel::zeros(schema, 4).unwrap();
        copy.set_flat_params(&model.flat_params()).unwrap();
        prop_assert_eq!(&copy, &model);
        let g = model.gradient(&corpus);
        for (gi, trainable) in g.iter().zip(model.trainable_mask()) {
            if !trainable {
                prop_assert_eq!(*gi, 0.0);
            }
        }
    }
}
