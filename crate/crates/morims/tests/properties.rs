//! Property tests for the parser, the optical network, and the RF layer.

use morims::device::{extinction_ratio_db, phase_shift_deg};
use morims::netlist::NetlistAst;
use morims::optical::build_network;
use morims::rf::{SParameters, TwoPortAbcd, DEFAULT_Z0};
use num_complex::Complex64;
use proptest::prelude::*;

/// One random element appended to a growing network; the `usize` picks which
/// open net it consumes.
#[derive(Debug, Clone)]
enum Grow {
    Waveguide { net: usize, loss_db: f64 },
    YBranch { net: usize, split: f64 },
    TapThrough { net: usize, coupling: f64, open_end: bool },
    TapTapered { net: usize, coupling: f64 },
}

fn grow_strategy(lossless: bool) -> impl Strategy<Value = Grow> {
    let loss = if lossless { Just(0.0).boxed() } else { (0.0..2.0f64).boxed() };
    prop_oneof![
        (any::<usize>(), loss).prop_map(|(net, loss_db)| Grow::Waveguide { net, loss_db }),
        (any::<usize>(), 0.0..=1.0f64).prop_map(|(net, split)| Grow::YBranch { net, split }),
        (any::<usize>(), 0.0..=1.0f64, any::<bool>()).prop_map(|(net, coupling, open_end)| {
            Grow::TapThrough {
                net,
                coupling,
                open_end,
            }
        }),
        (any::<usize>(), 0.0..=1.0f64)
            .prop_map(|(net, coupling)| Grow::TapTapered { net, coupling }),
    ]
}

/// Renders a valid netlist from growth steps. Tapered taps are excluded when
/// `steps` came from a lossless strategy only if the caller filtered them;
/// here the caller controls the mix through the strategy itself.
fn render_netlist(source_mw: f64, steps: &[Grow], allow_tapered: bool) -> String {
    let mut text = format!("source src power_mw={source_mw}\n");
    let mut open = vec!["src".to_string()];
    let mut n = 0usize;
    let fresh = |n: &mut usize| {
        *n += 1;
        format!("n{n}")
    };
    for (i, step) in steps.iter().enumerate() {
        if open.is_empty() {
            break;
        }
        let pick = |net: usize, open: &mut Vec<String>| open.remove(net % open.len());
        match step {
            Grow::Waveguide { net, loss_db } => {
                let input = pick(*net, &mut open);
                let out = fresh(&mut n);
                text.push_str(&format!("waveguide w{i} in={input} out={out} loss_db={loss_db}\n"));
                open.push(out);
            }
            Grow::YBranch { net, split } => {
                let input = pick(*net, &mut open);
                let (a, b) = (fresh(&mut n), fresh(&mut n));
                text.push_str(&format!("ybranch y{i} in={input} out={a},{b} split={split}\n"));
                open.push(a);
                open.push(b);
            }
            Grow::TapThrough {
                net,
                coupling,
                open_end,
            } => {
                let input = pick(*net, &mut open);
                if *open_end {
                    let out = fresh(&mut n);
                    text.push_str(&format!(
                        "switch s{i} type=through in={input} out={out} coupling={coupling}\n"
                    ));
                    open.push(out);
                } else {
                    text.push_str(&format!(
                        "switch s{i} type=through in={input} coupling={coupling}\n"
                    ));
                }
            }
            Grow::TapTapered { net, coupling } => {
                if !allow_tapered {
                    continue;
                }
                let input = pick(*net, &mut open);
                text.push_str(&format!(
                    "switch s{i} type=tapered in={input} coupling={coupling}\n"
                ));
            }
        }
    }
    text
}

proptest! {
    /// Printing a parsed netlist and reparsing it yields the same AST, and
    /// printing is a fixed point.
    #[test]
    fn netlist_print_parse_round_trip(
        source_mw in 0.0..10.0f64,
        steps in prop::collection::vec(grow_strategy(false), 0..12),
    ) {
        let text = render_netlist(source_mw, &steps, true);
        let ast = NetlistAst::parse(&text).unwrap();
        let printed = ast.print();
        let reparsed = NetlistAst::parse(&printed).unwrap();
        prop_assert_eq!(&ast, &reparsed);
        prop_assert_eq!(printed.clone(), reparsed.print());
    }

    /// Lossless networks (no excess loss, through taps only) conserve power:
    /// everything the source emits is absorbed or terminated.
    #[test]
    fn lossless_networks_conserve_power(
        source_mw in 0.01..10.0f64,
        steps in prop::collection::vec(grow_strategy(true), 1..18),
    ) {
        let steps: Vec<Grow> = steps
            .into_iter()
            .filter(|s| !matches!(s, Grow::TapTapered { .. }))
            .collect();
        let text = render_netlist(source_mw, &steps, false);
        let graph = build_network(&NetlistAst::parse(&text).unwrap()).unwrap();
        let sol = graph.propagate();
        let total = sol.total_absorbed_mw() + sol.total_residual_mw();
        prop_assert!(
            (total - source_mw).abs() <= 1e-12 * source_mw,
            "in {} out {} for:\n{}", source_mw, total, text
        );
    }

    /// Scaling the source power scales every absorbed power by the same
    /// factor.
    #[test]
    fn absorbed_power_is_linear_in_source_power(
        scale in 0.01..100.0f64,
        steps in prop::collection::vec(grow_strategy(false), 1..12),
    ) {
        let text = render_netlist(1.0, &steps, true);
        let graph = build_network(&NetlistAst::parse(&text).unwrap()).unwrap();
        let base = graph.propagate();
        let scaled = graph.with_source_power(scale).propagate();
        for (id, p) in &base.absorbed {
            let q = scaled.absorbed[id];
            prop_assert!((q - scale * p).abs() <= 1e-12 * (scale * p).abs() + 1e-300);
        }
    }

    /// Statement order does not change propagation results.
    #[test]
    fn propagation_is_order_independent(
        steps in prop::collection::vec(grow_strategy(false), 1..12),
        seed in any::<u64>(),
    ) {
        let text = render_netlist(2.0, &steps, true);
        let lines: Vec<&str> = text.lines().collect();
        let mut shuffled: Vec<&str> = lines.clone();
        // deterministic Fisher-Yates driven by the seed
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state as usize) % (i + 1));
        }
        let a = build_network(&NetlistAst::parse(&text).unwrap()).unwrap().propagate();
        let b = build_network(&NetlistAst::parse(&shuffled.join("\n")).unwrap())
            .unwrap()
            .propagate();
        prop_assert_eq!(a.absorbed, b.absorbed);
        prop_assert_eq!(a.residual, b.residual);
    }

    /// Chains of passive series impedances stay reciprocal and passive, and
    /// the S/ABCD conversions round-trip.
    #[test]
    fn series_chains_are_reciprocal_and_passive(
        parts in prop::collection::vec((0.0..1e5f64, -1e5..1e5f64), 1..6),
        freq_ghz in 0.1..40.0f64,
    ) {
        let freq_hz = freq_ghz * 1e9;
        let mut acc = TwoPortAbcd::identity(freq_hz);
        for (re, im) in parts {
            acc = acc.cascade(&TwoPortAbcd::series(Complex64::new(re, im), freq_hz)).unwrap();
        }
        let s = acc.to_s(DEFAULT_Z0).unwrap();
        prop_assert!((s.s12 - s.s21).norm() <= 1e-9 * s.s21.norm().max(1e-300));
        prop_assert!(s.s11.norm_sqr() + s.s21.norm_sqr() <= 1.0 + 1e-9);

        let back = s.to_abcd().unwrap();
        prop_assert!((back.a - acc.a).norm() <= 1e-9 * (1.0 + acc.a.norm()));
        prop_assert!((back.b - acc.b).norm() <= 1e-9 * (1.0 + acc.b.norm()));
        prop_assert!((back.c - acc.c).norm() <= 1e-9 * (1.0 + acc.c.norm()));
        prop_assert!((back.d - acc.d).norm() <= 1e-9 * (1.0 + acc.d.norm()));
    }

    /// Extinction ratio and phase shift ignore any common complex factor on
    /// both states (cables and fixtures cancel).
    #[test]
    fn metrics_ignore_common_fixtures(
        on_mag in 1e-6..1.0f64,
        on_arg in -3.14..3.14f64,
        off_mag in 1e-6..1.0f64,
        off_arg in -3.14..3.14f64,
        k_mag in 1e-3..10.0f64,
        k_arg in -3.14..3.14f64,
    ) {
        let mk = |s21: Complex64| SParameters {
            s11: Complex64::new(0.0, 0.0),
            s12: s21,
            s21,
            s22: Complex64::new(0.0, 0.0),
            freq_hz: 1e9,
            z0: DEFAULT_Z0,
        };
        let on = mk(Complex64::from_polar(on_mag, on_arg));
        let off = mk(Complex64::from_polar(off_mag, off_arg));
        let k = Complex64::from_polar(k_mag, k_arg);
        let on_k = mk(on.s21 * k);
        let off_k = mk(off.s21 * k);

        let r = extinction_ratio_db(&on, &off).unwrap();
        let rk = extinction_ratio_db(&on_k, &off_k).unwrap();
        prop_assert!((r - rk).abs() <= 1e-9 * (1.0 + r.abs()));

        let p = phase_shift_deg(&on, &off).unwrap();
        let pk = phase_shift_deg(&on_k, &off_k).unwrap();
        // both are wrapped to (-180, 180], so compare on the circle
        let diff = (p - pk).rem_euclid(360.0).min((pk - p).rem_euclid(360.0));
        prop_assert!(diff <= 1e-9);
    }
}
