use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bcore::dynamics::{self, activate, is_absorbing, Outcome};
use bcore::exec::Execution;
use bcore::expanded::{
    check_copies_core, check_feasible, is_copies_core, reduce, sample_feasible_state, ExpandedState,
};
use bcore::instance::{
    generate_uniform, load_instance_str, Instance, NodeRef, RandomInstanceConfig,
};
use bcore::oracle::{
    brute_force_value, check_nodes_core, flow_max_b_matching, max_b_matching_value, Coalition,
};
use bcore::paths_transfers::{solve, SolverConfig, StepMode};
use bcore::{Money, Side};

fn instance(max_u: usize, max_v: usize, weight_max: i64) -> impl Strategy<Value = Instance> {
    (
        1..=max_u,
        1..=max_v,
        1..=3usize,
        0..=weight_max,
        any::<u64>(),
    )
        .prop_map(move |(nu, nv, b_max, w, seed)| {
            let config = RandomInstanceConfig {
                num_u: nu,
                num_v: nv,
                weight_min: 0,
                weight_max: w,
                b_min: 1,
                b_max,
            };
            generate_uniform(&config, seed).unwrap()
        })
}

fn with_state(max_u: usize, max_v: usize) -> impl Strategy<Value = (Instance, ExpandedState, u64)> {
    (instance(max_u, max_v, 20), any::<u64>()).prop_map(|(inst, seed)| {
        let state = sample_feasible_state(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        (inst, state, seed)
    })
}

fn coalition_masks(inst: &Instance, a: u64, b: u64) -> (Coalition, Coalition) {
    let mu = (1u64 << inst.num_u()) - 1;
    let mv = (1u64 << inst.num_v()) - 1;
    (
        Coalition::from_masks(a & mu, (a >> 8) & mv, inst),
        Coalition::from_masks(b & mu & !a, (b >> 8) & mv & !(a >> 8), inst),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_json_round_trip(inst in instance(6, 6, 50)) {
        let back = load_instance_str(&inst.to_json()).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(&back.instance, &inst);
        prop_assert_eq!(back.instance.digest(), inst.digest());
    }

    #[test]
    fn state_json_round_trip((inst, state, _) in with_state(4, 4)) {
        let back = ExpandedState::from_json(&state.to_json(&inst), &inst).unwrap();
        prop_assert_eq!(back, state);
    }

    #[test]
    fn flow_matches_enumeration(inst in instance(4, 3, 20)) {
        let full = Coalition::full(&inst);
        prop_assert_eq!(flow_max_b_matching(&inst, &full).value, brute_force_value(&inst, &full).unwrap());
    }

    #[test]
    fn witness_is_a_b_matching(inst in instance(5, 5, 20)) {
        let best = flow_max_b_matching(&inst, &Coalition::full(&inst));
        let total: Money = best.pairs.iter().map(|&(u, v)| inst.weight(u, v)).sum();
        prop_assert_eq!(total, best.value);
        for u in 0..inst.num_u() {
            prop_assert!(best.pairs.iter().filter(|p| p.0 == u).count() <= inst.b(NodeRef::u(u)));
        }
        for v in 0..inst.num_v() {
            prop_assert!(best.pairs.iter().filter(|p| p.1 == v).count() <= inst.b(NodeRef::v(v)));
        }
    }

    #[test]
    fn oracle_monotone_and_superadditive(inst in instance(4, 4, 20), a in any::<u64>(), b in any::<u64>()) {
        let (s, t) = coalition_masks(&inst, a, b);
        let vs = max_b_matching_value(&inst, &s).value;
        let vt = max_b_matching_value(&inst, &t).value;
        let mut union = s.clone();
        union.u.extend(&t.u);
        union.v.extend(&t.v);
        union.u.sort_unstable();
        union.v.sort_unstable();
        let vu = max_b_matching_value(&inst, &union).value;
        prop_assert!(vu >= vs + vt);
        let grand = max_b_matching_value(&inst, &Coalition::full(&inst)).value;
        prop_assert!(grand >= vu);
    }

    #[test]
    fn steps_preserve_feasibility((inst, mut state, seed) in with_state(5, 5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let opt = flow_max_b_matching(&inst, &Coalition::full(&inst)).value;
        for _ in 0..200 {
            let before = state.clone();
            let act = dynamics::step(&mut state, &inst, &mut rng);
            prop_assert!(check_feasible(&state, &inst).pass());
            prop_assert!(state.all_copies().all(|c| state.aspiration(c) >= Money::ZERO));
            prop_assert!(state.total_feasible_aspiration() <= opt);
            match act.outcome {
                Outcome::Skipped | Outcome::FailedNoOp => prop_assert_eq!(&state, &before),
                Outcome::FailedDecrement => {
                    prop_assert_eq!(state.matching(), before.matching());
                    let changed: Vec<_> = state.all_copies().filter(|&c| state.aspiration(c) != before.aspiration(c)).collect();
                    prop_assert_eq!(changed.len(), 1);
                    prop_assert_eq!(state.aspiration(changed[0]) + Money::EPS, before.aspiration(changed[0]));
                }
                Outcome::Matched => {
                    let (p, r) = (act.proposer, act.receiver);
                    prop_assert!(state.matching().nodes_connected(p, r));
                    let raised = state.all_copies().filter(|c| c.node == p)
                        .any(|c| state.aspiration(c) > before.aspiration(c));
                    prop_assert!(raised);
                }
            }
        }
    }

    #[test]
    fn solver_reaches_optimal_core(inst in instance(5, 5, 20), mode_bit in any::<bool>(), class_bit in any::<bool>()) {
        let config = SolverConfig {
            step_mode: if mode_bit { StepMode::MinDelta } else { StepMode::Epsilon },
            over_aspiration_class: if class_bit { Side::U } else { Side::V },
            check_invariants: true,
        };
        let sol = solve(&inst, &config).unwrap();
        prop_assert!(check_copies_core(&sol.state, &inst).is_core());
        let opt = flow_max_b_matching(&inst, &Coalition::full(&inst)).value;
        prop_assert_eq!(reduce(&sol.state, &inst).total(), opt);
        prop_assert_eq!(sol.state.total_feasible_aspiration(), opt);
    }

    #[test]
    fn core_states_are_nodes_core(inst in instance(4, 4, 20)) {
        let sol = solve(&inst, &SolverConfig::default()).unwrap();
        let report = check_nodes_core(&reduce(&sol.state, &inst), &inst, 8, Execution::Sequential).unwrap();
        prop_assert!(report.pass());
    }

    #[test]
    fn absorbing_iff_core((inst, state, _) in with_state(3, 3)) {
        prop_assert_eq!(is_absorbing(&state, &inst), is_copies_core(&state, &inst));
    }

    #[test]
    fn core_states_absorb(inst in instance(4, 4, 15), p in 0usize..8, r in 0usize..8) {
        let sol = solve(&inst, &SolverConfig::default()).unwrap();
        let mut state = sol.state.clone();
        let proposer = NodeRef::u(p % inst.num_u());
        let receiver = NodeRef::v(r % inst.num_v());
        activate(&mut state, &inst, proposer, receiver);
        activate(&mut state, &inst, receiver, proposer);
        prop_assert_eq!(state, sol.state);
    }
}
