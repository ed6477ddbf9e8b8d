use std::collections::BTreeMap;

use binohedge::asymptotics::{risk_neutral_second_moment, second_moment_identity};
use binohedge::exact::ExactLattice;
use binohedge::*;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

prop_compose! {
    fn lattice(max_steps: usize)(
        s0 in 0.5f64..2.0,
        u in 0.02f64..0.5,
        d in -0.4f64..-0.02,
        frac in 0.05f64..0.95,
        steps in 1..=max_steps,
    ) -> LatticeParams {
        let r = d + frac * (u - d);
        LatticeParams::new(s0, u, d, r, steps).unwrap()
    }
}

prop_compose! {
    fn recombining_lattice(max_steps: usize)(
        s0 in 0.5f64..2.0,
        u in 0.02f64..0.5,
        frac in 0.05f64..0.95,
        steps in 1..=max_steps,
    ) -> LatticeParams {
        let d = 1.0 / (1.0 + u) - 1.0;
        let r = d + frac * (u - d);
        LatticeParams::new(s0, u, d, r, steps).unwrap().recombining().unwrap()
    }
}

fn any_lattice(max_steps: usize) -> impl Strategy<Value = LatticeParams> {
    prop_oneof![lattice(max_steps), recombining_lattice(max_steps)]
}

fn trajectory(steps: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(any::<bool>(), steps).prop_map(Trajectory::new)
}

fn lattice_and_trajectory(max_steps: usize) -> impl Strategy<Value = (LatticeParams, Trajectory)> {
    any_lattice(max_steps).prop_flat_map(|p| {
        let t = trajectory(p.steps);
        (Just(p), t)
    })
}

/// Terminal-state payoffs scaled to the lattice's price range.
fn terminal_payoff(p: &LatticeParams) -> impl Strategy<Value = Payoff> {
    let s0 = p.s0;
    let nodes = p.terminal_prices();
    let n = nodes.len();
    prop_oneof![
        (0.5f64..1.5).prop_map(move |k| Payoff::Call { strike: k * s0 }),
        (0.5f64..1.5).prop_map(move |k| Payoff::Put { strike: k * s0 }),
        (0..n).prop_map({
            let nodes = nodes.clone();
            move |x| Payoff::DigitalAt { strike: nodes[x] }
        }),
        (0.5f64..1.5, 0.0f64..0.5).prop_map(move |(a, w)| Payoff::DigitalInterval { k1: a * s0, k2: (a + w) * s0 }),
        (-2.0f64..2.0).prop_map(|value| Payoff::Constant { value }),
        Just(Payoff::Underlying),
        prop::collection::vec(-1.0f64..1.0, n).prop_map({
            let nodes = nodes.clone();
            move |vals| Payoff::TableTerminal { entries: nodes.iter().copied().zip(vals).collect() }
        }),
    ]
}

fn path_payoff(p: &LatticeParams) -> impl Strategy<Value = Payoff> {
    let s0 = p.s0;
    let steps = p.steps;
    prop_oneof![
        (0.8f64..1.2).prop_map(move |k| Payoff::AsianArithmetic { strike: k * s0 }),
        Just(Payoff::Lookback),
        (1.0f64..1.5, 0.8f64..1.2, any::<bool>()).prop_map(move |(b, k, knock_in)| Payoff::Barrier {
            level: b * s0,
            direction: BarrierDirection::Up,
            knock: if knock_in { BarrierKnock::In } else { BarrierKnock::Out },
            inner: Box::new(Payoff::Call { strike: k * s0 }),
        }),
        (0.6f64..1.0, 0.8f64..1.2).prop_map(move |(b, k)| Payoff::Barrier {
            level: b * s0,
            direction: BarrierDirection::Down,
            knock: BarrierKnock::Out,
            inner: Box::new(Payoff::Put { strike: k * s0 }),
        }),
        prop::collection::vec(-1.0f64..1.0, 1usize << steps).prop_map(move |vals| Payoff::TablePath {
            values: vals
                .into_iter()
                .enumerate()
                .map(|(mask, v)| (Trajectory::from_bits(mask as u64, steps), v))
                .collect(),
        }),
    ]
}

fn with_terminal_payoff(max_steps: usize) -> impl Strategy<Value = (LatticeParams, Payoff)> {
    any_lattice(max_steps).prop_flat_map(|p| {
        let f = terminal_payoff(&p);
        (Just(p), f)
    })
}

fn with_any_payoff(max_steps: usize) -> impl Strategy<Value = (LatticeParams, Payoff)> {
    any_lattice(max_steps).prop_flat_map(|p| {
        let f = prop_oneof![terminal_payoff(&p), path_payoff(&p)];
        (Just(p), f)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn terminal_price_ignores_order((p, t) in lattice_and_trajectory(12), seed in any::<u64>()) {
        let mut moves = t.moves().to_vec();
        // deterministic shuffle by rotation and reversal
        let k = (seed as usize) % moves.len().max(1);
        moves.rotate_left(k);
        if seed & 1 == 1 {
            moves.reverse();
        }
        let a = terminal_price(&p, &t).unwrap();
        let b = terminal_price(&p, &Trajectory::new(moves)).unwrap();
        prop_assert!(close(a, b, 1e-12 * a));
        prop_assert!(close(a, p.terminal_node_price(t.up_count()), 1e-12 * a));
    }

    #[test]
    fn recombining_terminal_price((p, t) in recombining_lattice(12).prop_flat_map(|p| { let t = trajectory(p.steps); (Just(p), t) })) {
        let x = t.up_count() as i32;
        let expected = p.s0 * (1.0 + p.u).powi(2 * x - p.steps as i32);
        let got = terminal_price(&p, &t).unwrap();
        prop_assert!(close(got, expected, 1e-12 * expected));
    }

    #[test]
    fn terminal_payoff_matches_tabulation((p, f) in with_terminal_payoff(10)) {
        let table = f.tabulate_terminal(&p).unwrap();
        for t in Trajectory::all(p.steps) {
            let a = evaluate_payoff(&f, &p, &t).unwrap();
            let b = evaluate_payoff(&table, &p, &t).unwrap();
            prop_assert_eq!(a, b, "trajectory {}", t);
        }
    }

    #[test]
    fn ad_prices_sum_to_one(p in any_lattice(12)) {
        let total: f64 = Trajectory::all(p.steps)
            .map(|t| price_path_ad(&p, &t).unwrap().value)
            .sum();
        prop_assert!(close(total, 1.0, 1e-12));
    }

    #[test]
    fn pricing_routes_agree((p, f) in with_terminal_payoff(12)) {
        let enumerated = price_path_dependent(&p, &f).unwrap().value;
        let induction = backward_induction_price(&p, &f).unwrap().value;
        let crr = price_european_crr(&p, &f, 0, 0).unwrap().value;
        let mut via_digitals = 0.0;
        for x in 0..=p.steps {
            let spec = DigitalSpec::from_index(&p, x).unwrap();
            let s = p.terminal_node_price(x);
            via_digitals += f.terminal_value(s).unwrap() * digital_from_ad(&p, &spec).unwrap().value;
        }
        prop_assert!(close(enumerated, crr, 1e-12), "{enumerated} vs {crr}");
        prop_assert!(close(induction, crr, 1e-12), "{induction} vs {crr}");
        prop_assert!(close(via_digitals, crr, 1e-12), "{via_digitals} vs {crr}");
    }

    #[test]
    fn path_dependent_routes_agree((p, f) in with_any_payoff(10)) {
        let enumerated = price_path_dependent(&p, &f).unwrap().value;
        let induction = backward_induction_price(&p, &f).unwrap().value;
        prop_assert!(close(enumerated, induction, 1e-12), "{enumerated} vs {induction}");
    }

    #[test]
    fn one_step_replication_in_both_states(p in any_lattice(1)) {
        for instrument in [AdInstrument::Up, AdInstrument::Down] {
            let h = replicate_one_step(instrument, &p).unwrap();
            let up = h.value_after(&p, true);
            let down = h.value_after(&p, false);
            let (want_up, want_down) = if instrument == AdInstrument::Up { (1.0, 0.0) } else { (0.0, 1.0) };
            prop_assert!(close(up, want_up, 1e-12) && close(down, want_down, 1e-12), "{up} {down}");
        }
    }

    #[test]
    fn hedge_ledger_is_self_financing((p, t) in lattice_and_trajectory(10)) {
        let q = risk_neutral_q(&p).unwrap();
        let rows = hedge_ledger(&p, &t).unwrap();
        prop_assert_eq!(rows.len(), p.steps + 1);
        prop_assert_eq!(rows[p.steps].wealth, 1.0);
        for w in rows.windows(2) {
            let (now, next) = (&w[0], &w[1]);
            let up = t.moves()[now.time];
            prop_assert_eq!(now.instrument, Some(AdInstrument::for_move(up)));
            prop_assert!(close(now.shares, next.wealth, 1e-12));
            prop_assert!(close(now.wealth, now.shares * q.of(up), 1e-12));
        }
        prop_assert!(close(rows[0].wealth, price_path_ad(&p, &t).unwrap().value, 1e-12));
    }

    #[test]
    fn pricing_is_monotone((p, f) in with_any_payoff(8), bumps in prop::collection::vec(0.0f64..1.0, 256)) {
        let g = Payoff::TablePath {
            values: Trajectory::all(p.steps)
                .map(|t| {
                    let bump = bumps[t.moves().iter().fold(0usize, |a, &b| (a << 1 | b as usize) % 256)];
                    let v = evaluate_payoff(&f, &p, &t).unwrap() + bump;
                    (t, v)
                })
                .collect::<BTreeMap<_, _>>(),
        };
        let pf = price_path_dependent(&p, &f).unwrap().value;
        let pg = price_path_dependent(&p, &g).unwrap().value;
        prop_assert!(pf <= pg + 1e-12, "{pf} > {pg}");
    }

    #[test]
    fn call_strike_monotone(p in any_lattice(12), a in 0.5f64..1.5, b in 0.5f64..1.5) {
        let (lo, hi) = (a.min(b) * p.s0, a.max(b) * p.s0);
        let c_lo = price_european_crr(&p, &Payoff::Call { strike: lo }, 0, 0).unwrap().value;
        let c_hi = price_european_crr(&p, &Payoff::Call { strike: hi }, 0, 0).unwrap().value;
        prop_assert!(c_hi <= c_lo + 1e-12);
    }

    #[test]
    fn put_call_parity(p in any_lattice(40), k in 0.5f64..1.5) {
        let strike = k * p.s0;
        let c = price_european_crr(&p, &Payoff::Call { strike }, 0, 0).unwrap();
        let put = price_european_crr(&p, &Payoff::Put { strike }, 0, 0).unwrap();
        let lhs = to_nominal(c, &p).unwrap() - to_nominal(put, &p).unwrap();
        let rhs = p.s0 - strike * (1.0 + p.r).powi(-(p.steps as i32));
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn crr_is_linear((p, f) in with_terminal_payoff(12), g_strike in 0.5f64..1.5, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let g = Payoff::Put { strike: g_strike * p.s0 };
        let entries: Vec<(f64, f64)> = p
            .terminal_prices()
            .into_iter()
            .map(|s| (s, alpha * f.terminal_value(s).unwrap() + beta * g.terminal_value(s).unwrap()))
            .collect();
        let combo = Payoff::TableTerminal { entries };
        let lhs = price_european_crr(&p, &combo, 0, 0).unwrap().value;
        let rhs = alpha * price_european_crr(&p, &f, 0, 0).unwrap().value
            + beta * price_european_crr(&p, &g, 0, 0).unwrap().value;
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn grid_sums_are_invariant(p in any_lattice(10), picks in prop::collection::btree_set(0usize..11, 0..=5), dk in 0.0f64..0.3) {
        let nodes = p.terminal_prices();
        let strikes: Vec<f64> = picks.into_iter().filter(|&x| x <= p.steps).map(|x| nodes[x]).collect();
        let payoff = Payoff::Put { strike: p.s0 * (1.0 + dk) };
        let grid = build_value_grid(&p, &payoff, &strikes).unwrap();
        let mass: f64 = strikes.iter().map(|&k| payoff.terminal_value(k).unwrap()).sum();
        prop_assert!(close(grid.total_payoff(), mass, 1e-12));
        for t in 0..=p.steps {
            let s = invariance_sum(&grid, t).unwrap();
            prop_assert!(close(s, mass, 1e-10), "t = {t}: {s} vs {mass}");
        }
    }

    #[test]
    fn grid_support_size(p in any_lattice(10), x in 0usize..11) {
        let x = x.min(p.steps);
        let strike = p.terminal_node_price(x);
        let grid = build_value_grid(&p, &Payoff::DigitalAt { strike }, &[strike]).unwrap();
        for t in 0..=p.steps {
            prop_assert_eq!(grid.layer(t).unwrap().len(), p.steps - t + 1);
        }
    }

    #[test]
    fn walk_matches_digital(p in any_lattice(12), x in 0usize..13) {
        let x = x.min(p.steps);
        let strike = p.terminal_node_price(x);
        let config = BackwardWalkConfig::new(&p, strike, 1, 0).unwrap();
        let walk = backward_hit_probability(&config, p.s0).unwrap();
        let digital = price_digital(&p, &DigitalSpec::from_index(&p, x).unwrap()).unwrap().value;
        prop_assert!(close(walk, digital, 1e-12), "{walk} vs {digital}");
    }

    #[test]
    fn exact_walk_matches_exact_digital(p in any_lattice(12), x in 0usize..13) {
        let x = x.min(p.steps);
        let e = ExactLattice::from_params(&p).unwrap();
        prop_assert_eq!(e.backward_hit_probability(x).unwrap(), e.price_digital(x).unwrap());
    }

    #[test]
    fn step_moment_identities(mu in -0.3f64..0.3, sigma in 0.05f64..0.6, r in -0.02f64..0.1, steps in 1usize..2000) {
        let b = BsmParams::new(mu, sigma, r, 1.0, 1.0 / steps as f64);
        prop_assume!(b.is_ok());
        let b = b.unwrap();
        prop_assert!(close(risk_neutral_step_mean(&b), b.growth(), 1e-14));
        prop_assert!(close(risk_neutral_second_moment(&b), second_moment_identity(&b), 1e-13));
    }

    #[test]
    fn payoff_json_round_trip((_, f) in with_any_payoff(4)) {
        let text = serde_json::to_string(&f).unwrap();
        let back: Payoff = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn lattice_json_round_trip(p in any_lattice(30)) {
        let text = serde_json::to_string(&p).unwrap();
        let back: LatticeParams = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }
}
