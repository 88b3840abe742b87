use std::collections::{BTreeMap, BTreeSet};

use cvchip::measurement::Clearance;
use cvchip::netlist::{
    evaluate, linspace, mzi_phase_for_ratio, parse_netlist, preset_fig1a, sweep, validate,
    Detector, Element, ElementKind, Fig1bConfig, HomodyneSpec, JointMode, JointSpec, LoPhase,
    Netlist, PortRef, Source, SourceKind, Split, Validated,
};
use cvchip::opo::{predict, EfficiencyChain, OpoParams, OpoSource};
use proptest::prelude::*;
use proptest::sample::Index;

#[derive(Debug, Clone)]
enum Op {
    Loss(f64),
    Fiber(f64),
    Phase(f64),
    Bs(f64),
    Mzi(f64),
}

fn source_kind() -> impl Strategy<Value = SourceKind> {
    prop_oneof![
        (
            100.0..300.0f64,
            0.0..0.9f64,
            0.05..0.2f64,
            0.0..0.01f64,
            0.0..0.02f64,
            5.0..20.0f64,
            0.0..3.0f64,
            0.0..180.0f64
        )
            .prop_map(|(th, frac, t, l0, a, fwhm, sb, ang)| SourceKind::Opo(OpoSource {
                pump_mw: th * frac,
                threshold_mw: th,
                t_oc: t,
                l0,
                bliira_per_w: a,
                fwhm_mhz: fwhm,
                sideband_mhz: sb,
                angle_deg: ang,
            })),
        (0.0..10.0f64).prop_map(|p| SourceKind::Coherent { power_mw: p }),
        Just(SourceKind::Vacuum),
    ]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(Op::Loss),
        (0.0..=1.0f64).prop_map(Op::Fiber),
        (-360.0..360.0f64).prop_map(Op::Phase),
        (0.0..=1.0f64).prop_map(Op::Bs),
        (-180.0..180.0f64).prop_map(Op::Mzi),
    ]
}

fn homodyne(name: String, signal: PortRef, lo: String, phase: Option<f64>, eta: f64) -> Detector {
    Detector::Homodyne(HomodyneSpec {
        name,
        signal,
        lo,
        lo_phase_deg: phase.map_or(LoPhase::Scan, LoPhase::Fixed),
        eta_pd: eta,
        visibility: 1.0,
        phase_fluct_deg: 0.0,
        clearance_db: Clearance::None,
    })
}

/// Physically valid netlists: each element consumes free ports, every
/// homodyne gets its own LO.
fn valid_netlist() -> impl Strategy<Value = Netlist> {
    (
        prop::collection::vec(source_kind(), 1..5),
        prop::collection::vec((op(), any::<Index>(), any::<Index>()), 0..10),
        prop::collection::vec((any::<Index>(), prop::option::of(0.0..360.0f64), 0.5..=1.0f64), 0..3),
    )
        .prop_map(|(kinds, ops, dets)| {
            let mut net = Netlist {
                sources: Vec::new(),
                elements: Vec::new(),
                detectors: Vec::new(),
            };
            let mut pool = Vec::new();
            for (i, kind) in kinds.into_iter().enumerate() {
                let name = format!("s{i}");
                pool.push(PortRef::bare(&name));
                net.sources.push(Source { name, kind });
            }
            for (k, (op, a, b)) in ops.into_iter().enumerate() {
                if pool.is_empty() {
                    break;
                }
                let name = format!("e{k}");
                let first = pool.remove(a.index(pool.len()));
                let two_port = matches!(op, Op::Bs(_) | Op::Mzi(_)) && !pool.is_empty();
                let (inputs, kind) = if two_port {
                    let second = pool.remove(b.index(pool.len()));
                    let split = match op {
                        Op::Bs(r) => Split::Ratio(r),
                        Op::Mzi(d) => Split::MziPhaseDeg(d),
                        _ => unreachable!(),
                    };
                    (vec![first, second], ElementKind::BeamSplitter(split))
                } else {
                    let kind = match op {
                        Op::Fiber(eta) => ElementKind::Fiber { eta },
                        Op::Phase(d) => ElementKind::Phase { phase_deg: d },
                        Op::Loss(eta) => ElementKind::Loss { eta },
                        Op::Bs(r) => ElementKind::Loss { eta: r },
                        Op::Mzi(d) => ElementKind::Phase { phase_deg: d },
                    };
                    (vec![first], kind)
                };
                let element = Element {
                    name: name.clone(),
                    inputs,
                    kind,
                };
                pool.extend(element.outputs());
                net.elements.push(element);
            }
            let mut names = Vec::new();
            for (k, (idx, phase, eta)) in dets.into_iter().enumerate() {
                if pool.is_empty() {
                    break;
                }
                let signal = pool.remove(idx.index(pool.len()));
                let lo = format!("lo{k}");
                net.sources.push(Source {
                    name: lo.clone(),
                    kind: SourceKind::Coherent { power_mw: 1.0 },
                });
                let name = format!("h{k}");
                net.detectors.push(homodyne(name.clone(), signal, lo, phase, eta));
                names.push(name);
            }
            if names.len() >= 2 {
                net.detectors.push(Detector::Joint(JointSpec {
                    name: "j".into(),
                    a: names[0].clone(),
                    b: names[1].clone(),
                    mode: JointMode::DiffXSumP,
                }));
            }
            net
        })
}

/// Kahn's algorithm taking the lexicographically largest ready element.
fn reverse_order(net: &Netlist) -> Vec<String> {
    let names: BTreeSet<&str> = net.elements.iter().map(|e| e.name.as_str()).collect();
    let mut deps: BTreeMap<&str, BTreeSet<&str>> = net
        .elements
        .iter()
        .map(|e| {
            let d = e
                .inputs
                .iter()
                .map(|p| p.node.as_str())
                .filter(|n| names.contains(n))
                .collect();
            (e.name.as_str(), d)
        })
        .collect();
    let mut order = Vec::new();
    while !deps.is_empty() {
        let next = *deps
            .iter()
            .filter(|(_, d)| d.is_empty())
            .map(|(n, _)| n)
            .last()
            .expect("acyclic");
        deps.remove(next);
        for d in deps.values_mut() {
            d.remove(next);
        }
        order.push(next.to_string());
    }
    order
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serialize_parse_round_trip(net in valid_netlist()) {
        let text = net.serialize();
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn evaluation_ignores_topological_tie_breaks(net in valid_netlist()) {
        let checked = validate(&net).unwrap();
        let alt = Validated { order: reverse_order(&net), ..checked.clone() };
        let a = evaluate(&net, &checked).unwrap();
        let b = evaluate(&net, &alt).unwrap();
        prop_assert!(a.final_state.max_abs_diff(&b.final_state) <= 1e-12);
    }

    #[test]
    fn detector_swap_keeps_criterion(a1 in 0.2..=1.0f64, a2 in 0.2..=1.0f64, f1 in 0.5..=1.0f64,
                                     f2 in 0.5..=1.0f64, eta1 in 0.5..=1.0f64, eta2 in 0.5..=1.0f64,
                                     theta in 0.0..180.0f64) {
        let mut cfg = Fig1bConfig { arm_eta: [a1, a2], fiber_eta: [f1, f2], theta12_deg: theta, ..Fig1bConfig::default() };
        cfg.detectors[0].eta_pd = eta1;
        cfg.detectors[1].eta_pd = eta2;
        let net = cfg.build();
        let mut swapped = net.clone();
        swapped.set_param("detectors.epr.a", "hd2").unwrap();
        swapped.set_param("detectors.epr.b", "hd1").unwrap();
        let d = |n: &Netlist| evaluate(n, &validate(n).unwrap()).unwrap().correlations[0].correlation.delta_sq;
        prop_assert!((d(&net) - d(&swapped)).abs() <= 1e-12);
    }

    #[test]
    fn mzi_splitter_acts_as_its_transmission(phase in -180.0..180.0f64, pump in 0.0..0.17f64) {
        let chain = EfficiencyChain { clearance_db: Clearance::None, phase_fluct_deg: 0.0, ..EfficiencyChain::perfect() };
        let text = format!(
            "source sq opo pump_mw={} threshold_mw=179 t_oc=0.113 l0=0.00254 bliira_per_w=0.00922 fwhm_mhz=11.8 sideband_mhz=1.5\n\
             source v vacuum\nsource lo coherent power_mw=1\n\
             bs tune in=sq,v mzi_phase_deg={phase}\n\
             homodyne hd signal=tune.0 lo=lo lo_phase_deg=scan",
            pump * 1e3
        );
        let net = parse_netlist(&text).unwrap();
        let res = evaluate(&net, &validate(&net).unwrap()).unwrap();
        let t = 1.0 - cvchip::netlist::mzi_reflectivity(phase.to_radians());
        prop_assume!(t > 1e-6);
        let p = predict(&OpoParams::reference(pump), &EfficiencyChain { eta_coupling: t, ..chain }).unwrap();
        let h = res.homodyne("hd").unwrap();
        let lin = |db: f64| 10f64.powf(db / 10.0);
        prop_assert!(((lin(h.db_min) - p.detected.minus) / p.detected.minus).abs() < 1e-9);
        prop_assert!(((lin(h.db_max) - p.detected.plus) / p.detected.plus).abs() < 1e-9);
    }
}

#[test]
fn fig1b_golden_structure() {
    let net = parse_netlist(include_str!("../presets/fig1b.net")).unwrap();
    let count = |pred: fn(&SourceKind) -> bool| net.sources.iter().filter(|s| pred(&s.kind)).count();
    assert_eq!(count(|k| matches!(k, SourceKind::Opo(_))), 2);
    assert_eq!(count(|k| matches!(k, SourceKind::Coherent { .. })), 2);
    for bs in ["bs1", "bs2", "bs4"] {
        assert!(matches!(net.element(bs).unwrap().kind, ElementKind::BeamSplitter(_)), "{bs}");
    }
    assert_eq!(net.element("bs3").unwrap().kind, ElementKind::Loss { eta: 0.99 });
    assert_eq!(net.element("theta12").unwrap().kind, ElementKind::Phase { phase_deg: 90.0 });
    assert_eq!(net.homodynes().count(), 2);
    assert_eq!(net.joints().count(), 1);
}

#[test]
fn tap_ratio_from_mzi_phase() {
    let phi = mzi_phase_for_ratio(0.01).unwrap();
    let split = Split::MziPhaseDeg(phi.to_degrees());
    assert!((split.reflectivity() - 0.01).abs() < 1e-15);
}

#[test]
fn pump_sweep_shape() {
    let net = preset_fig1a(0.1, &EfficiencyChain::reference());
    let rows = sweep(&net, "sources.sl1.pump_mw", &linspace(0.0, 170.0, 18)).unwrap();
    let sq: Vec<f64> = rows.iter().map(|r| r.homodynes[0].db_min).collect();
    let asq: Vec<f64> = rows.iter().map(|r| r.homodynes[0].db_max).collect();
    assert!(sq[0].abs() < 1e-12 && asq[0].abs() < 1e-12);
    assert!(sq[..=12].windows(2).all(|w| w[1] < w[0]), "falls up to 120 mW");
    assert!(sq[8..].iter().all(|v| (-4.2..-4.0).contains(v)), "saturates: {sq:?}");
    assert!(asq.windows(2).all(|w| w[1] > w[0]));
    assert!((sq[10] - -4.146_396_626_265_469).abs() < 1e-9);
}

#[test]
fn sweep_rows_follow_input_order() {
    let net = preset_fig1a(0.1, &EfficiencyChain::reference());
    let values = [150.0, 10.0, 90.0, 40.0];
    let rows = sweep(&net, "sources.sl1.pump_mw", &values).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), values);
}

#[test]
fn theta12_zero_gives_two_squeezed_beams() {
    let net = Fig1bConfig { theta12_deg: 0.0, ..Fig1bConfig::default() }.build();
    let res = evaluate(&net, &validate(&net).unwrap()).unwrap();
    for h in &res.homodynes {
        assert!(h.db_min < -3.5, "{}: {}", h.name, h.db_min);
    }
    assert!(res.correlations[0].correlation.delta_sq >= 1.0);
}
