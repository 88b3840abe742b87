//! Ready-made circuits: single-beam squeezing detection and the two-source
//! EPR network.

use super::{
    Detector, Element, ElementKind, HomodyneSpec, JointMode, JointSpec, LoPhase, Netlist, PortRef,
    Source, SourceKind, Split,
};
use crate::measurement::Clearance;
use crate::opo::{EfficiencyChain, OpoSource};

/// Settings for one homodyne detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub lo_phase: LoPhase,
    pub eta_pd: f64,
    pub visibility: f64,
    pub phase_fluct_deg: f64,
    pub clearance_db: Clearance,
}

impl DetectorConfig {
    /// Scanned LO with the chain's detector-side parameters.
    pub fn from_chain(chain: &EfficiencyChain) -> Self {
        DetectorConfig {
            lo_phase: LoPhase::Scan,
            eta_pd: chain.eta_pd,
            visibility: chain.eta_visibility,
            phase_fluct_deg: chain.phase_fluct_deg,
            clearance_db: chain.clearance_db,
        }
    }

    pub fn perfect() -> Self {
        Self::from_chain(&EfficiencyChain::perfect())
    }

    fn spec(&self, name: &str, signal: &str, lo: &str) -> Detector {
        Detector::Homodyne(HomodyneSpec {
            name: name.into(),
            signal: PortRef::bare(signal),
            lo: lo.into(),
            lo_phase_deg: self.lo_phase,
            eta_pd: self.eta_pd,
            visibility: self.visibility,
            phase_fluct_deg: self.phase_fluct_deg,
            clearance_db: self.clearance_db,
        })
    }
}

pub const DEFAULT_LO_POWER_MW: f64 = 3.5;

fn source(name: &str, kind: SourceKind) -> Source {
    Source {
        name: name.into(),
        kind,
    }
}

fn element(name: &str, inputs: &[&str], kind: ElementKind) -> Element {
    Element {
        name: name.into(),
        inputs: inputs
            .iter()
            .map(|p| match p.split_once('.') {
                Some((n, i)) => PortRef::indexed(n, i.parse().expect("preset port")),
                None => PortRef::bare(*p),
            })
            .collect(),
        kind,
    }
}

/// One OPO, propagation and coupling losses, balanced homodyne detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1aConfig {
    pub source: OpoSource,
    pub chain: EfficiencyChain,
    pub lo_power_mw: f64,
}

impl Default for Fig1aConfig {
    fn default() -> Self {
        Fig1aConfig {
            source: OpoSource::reference(100.0),
            chain: EfficiencyChain::reference(),
            lo_power_mw: DEFAULT_LO_POWER_MW,
        }
    }
}

impl Fig1aConfig {
    pub fn build(&self) -> Netlist {
        let c = &self.chain;
        Netlist {
            sources: vec![
                source("sl1", SourceKind::Opo(self.source)),
                source(
                    "lo1",
                    SourceKind::Coherent {
                        power_mw: self.lo_power_mw,
                    },
                ),
            ],
            elements: vec![
                element("prop", &["sl1"], ElementKind::Loss { eta: c.eta_prop }),
                element(
                    "coupling",
                    &["prop"],
                    ElementKind::Fiber {
                        eta: c.eta_coupling,
                    },
                ),
                element(
                    "bs1",
                    &["coupling", "lo1"],
                    ElementKind::BeamSplitter(Split::Ratio(0.5)),
                ),
            ],
            detectors: vec![DetectorConfig::from_chain(c).spec("hd", "bs1", "lo1")],
        }
    }
}

/// Reference OPO at `pump_w` watts feeding the given detection chain.
pub fn preset_fig1a(pump_w: f64, chain: &EfficiencyChain) -> Netlist {
    Fig1aConfig {
        source: OpoSource::reference(pump_w * 1e3),
        chain: *chain,
        ..Fig1aConfig::default()
    }
    .build()
}

/// Two OPOs combined on a 50:50 splitter with relative phase `theta12`,
/// each output going to its own homodyne detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1bConfig {
    pub sources: [OpoSource; 2],
    pub theta12_deg: f64,
    /// Losses between each source and the combining splitter.
    pub arm_eta: [f64; 2],
    /// Transmission of the phase-lock tap on output 1.
    pub tap_eta: f64,
    /// Interconnect fibers after the combining splitter.
    pub fiber_eta: [f64; 2],
    pub detectors: [DetectorConfig; 2],
    pub lo_power_mw: f64,
}

impl Default for Fig1bConfig {
    fn default() -> Self {
        let chain = EfficiencyChain::reference();
        let arm = chain.eta_prop * chain.eta_coupling;
        Fig1bConfig {
            sources: [OpoSource::reference(100.0); 2],
            theta12_deg: 90.0,
            arm_eta: [arm; 2],
            tap_eta: 0.99,
            fiber_eta: [1.0; 2],
            detectors: [DetectorConfig::from_chain(&chain); 2],
            lo_power_mw: DEFAULT_LO_POWER_MW,
        }
    }
}

impl Fig1bConfig {
    /// Lossless network of two pure squeezers with parameter `r`, perfect
    /// detectors.
    pub fn ideal(r: f64) -> Self {
        let src = OpoSource::ideal(r, 179.0);
        Fig1bConfig {
            sources: [src; 2],
            theta12_deg: 90.0,
            arm_eta: [1.0; 2],
            tap_eta: 1.0,
            fiber_eta: [1.0; 2],
            detectors: [DetectorConfig::perfect(); 2],
            lo_power_mw: DEFAULT_LO_POWER_MW,
        }
    }

    pub fn build(&self) -> Netlist {
        let coherent = SourceKind::Coherent {
            power_mw: self.lo_power_mw,
        };
        Netlist {
            sources: vec![
                source("sl1", SourceKind::Opo(self.sources[0])),
                source("sl2", SourceKind::Opo(self.sources[1])),
                source("lo1", coherent.clone()),
                source("lo2", coherent),
            ],
            elements: vec![
                element("arm1", &["sl1"], ElementKind::Loss { eta: self.arm_eta[0] }),
                element("arm2", &["sl2"], ElementKind::Loss { eta: self.arm_eta[1] }),
                element(
                    "theta12",
                    &["arm2"],
                    ElementKind::Phase {
                        phase_deg: self.theta12_deg,
                    },
                ),
                element(
                    "bs2",
                    &["arm1", "theta12"],
                    ElementKind::BeamSplitter(Split::Ratio(0.5)),
                ),
                element("bs3", &["bs2.0"], ElementKind::Loss { eta: self.tap_eta }),
                element("fib1", &["bs3"], ElementKind::Fiber { eta: self.fiber_eta[0] }),
                element("fib2", &["bs2.1"], ElementKind::Fiber { eta: self.fiber_eta[1] }),
                element(
                    "bs1",
                    &["fib1", "lo1"],
                    ElementKind::BeamSplitter(Split::Ratio(0.5)),
                ),
                element(
                    "bs4",
                    &["fib2", "lo2"],
                    ElementKind::BeamSplitter(Split::Ratio(0.5)),
                ),
            ],
            detectors: vec![
                self.detectors[0].spec("hd1", "bs1", "lo1"),
                self.detectors[1].spec("hd2", "bs4", "lo2"),
                Detector::Joint(JointSpec {
                    name: "epr".into(),
                    a: "hd1".into(),
                    b: "hd2".into(),
                    mode: JointMode::DiffXSumP,
                }),
            ],
        }
    }
}

/// EPR network with both sources pumped at `pump_w` watts and a relative
/// phase of `theta12_deg`; everything else from [`Fig1bConfig::default`].
pub fn preset_fig1b(pump_w: f64, theta12_deg: f64) -> Netlist {
    Fig1bConfig {
        sources: [OpoSource::reference(pump_w * 1e3); 2],
        theta12_deg,
        ..Fig1bConfig::default()
    }
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{evaluate, parse_netlist, validate};
    use crate::opo::{predicted_levels, OpoParams};

    #[test]
    fn golden_files_match() {
        assert_eq!(
            preset_fig1a(0.1, &EfficiencyChain::reference()).serialize(),
            include_str!("../../presets/fig1a.net")
        );
        assert_eq!(
            Fig1bConfig::default().build().serialize(),
            include_str!("../../presets/fig1b.net")
        );
    }

    #[test]
    fn presets_round_trip() {
        for net in [Fig1aConfig::default().build(), Fig1bConfig::default().build()] {
            assert_eq!(parse_netlist(&net.serialize()).unwrap(), net);
        }
    }

    #[test]
    fn fig1b_order_puts_combiner_first() {
        let v = validate(&Fig1bConfig::default().build()).unwrap();
        let pos = |n: &str| v.order.iter().position(|e| e == n).unwrap();
        assert!(pos("bs2") < pos("bs1") && pos("bs2") < pos("bs4"));
        assert!(v.warnings.is_empty(), "{:?}", v.warnings);
    }

    #[test]
    fn fig1a_matches_closed_form() {
        let chain = EfficiencyChain::reference();
        let net = preset_fig1a(0.1, &chain);
        let r = evaluate(&net, &validate(&net).unwrap()).unwrap();
        let (m, p) = predicted_levels(&OpoParams::reference(0.1), &chain).unwrap();
        let h = r.homodyne("hd").unwrap();
        assert!((h.db_min - m).abs() < 1e-9, "{} vs {m}", h.db_min);
        assert!((h.db_max - p).abs() < 1e-9, "{} vs {p}", h.db_max);
    }

    #[test]
    fn ideal_epr_reaches_exp_minus_two_r() {
        for r in [0.1f64, 0.5, 1.0] {
            let net = Fig1bConfig::ideal(r).build();
            let res = evaluate(&net, &validate(&net).unwrap()).unwrap();
            let d = res.joint("epr").unwrap().correlation.delta_sq;
            assert!((d - (-2.0 * r).exp()).abs() < 1e-9, "r={r}: {d}");
        }
    }
}
