use std::collections::{BTreeMap, HashMap};

use super::{ElementKind, HomodyneSpec, LoPhase, Netlist, PortRef, SourceKind, Validated};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::measurement::{
    correlation_variance, homodyne_extremes, homodyne_variance, inseparability_check,
    lo_phase_scan, Correlation, HomodyneDetector, Inseparability, LoScan, MeasurementRecord,
};
use crate::opo::opo_source_state;

/// Per-homodyne noise extremes. For a fixed LO both equal the measured value.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneSummary {
    pub name: String,
    pub scanned: bool,
    pub db_min: f64,
    pub db_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSummary {
    pub name: String,
    pub correlation: Correlation,
    pub inseparability: Inseparability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    /// State of the homodyne input modes, in detector declaration order. A
    /// netlist without homodynes keeps the whole circuit state, one mode per
    /// source.
    pub final_state: GaussianState,
    pub records: Vec<MeasurementRecord>,
    /// Homodyne name to its mode in `final_state`.
    pub mode_map: BTreeMap<String, usize>,
    pub homodynes: Vec<HomodyneSummary>,
    pub correlations: Vec<JointSummary>,
    /// Detector models acting on `final_state`, keyed like `mode_map`.
    pub detectors: BTreeMap<String, HomodyneDetector>,
}

impl EvaluationResult {
    pub fn homodyne(&self, name: &str) -> Option<&HomodyneSummary> {
        self.homodynes.iter().find(|h| h.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&JointSummary> {
        self.correlations.iter().find(|j| j.name == name)
    }

    /// Uniform LO scan of one homodyne over `[0, 2π)`, relative to its
    /// configured phase reference.
    pub fn lo_scan(&self, name: &str, n_points: usize) -> Result<LoScan> {
        let det = self
            .detectors
            .get(name)
            .ok_or_else(|| Error::invalid(format!("no homodyne named `{name}`")))?;
        let mut scan = lo_phase_scan(&self.final_state, det, n_points)?;
        for r in scan
            .records
            .iter_mut()
            .chain([&mut scan.min, &mut scan.max])
        {
            r.label = name.to_string();
        }
        Ok(scan)
    }
}

fn detector_model(spec: &HomodyneSpec, mode: usize) -> HomodyneDetector {
    HomodyneDetector {
        mode,
        lo_phase: match spec.lo_phase_deg {
            LoPhase::Scan => 0.0,
            LoPhase::Fixed(d) => d.to_radians(),
        },
        visibility: spec.visibility,
        eta_pd: spec.eta_pd,
        phase_fluct: spec.phase_fluct_deg.to_radians(),
        clearance: spec.clearance_db,
    }
}

/// Runs a validated netlist: one mode per source, elements in `checked.order`,
/// then every detector.
pub fn evaluate(net: &Netlist, checked: &Validated) -> Result<EvaluationResult> {
    let mut modes: HashMap<PortRef, usize> = HashMap::new();
    let mut parts = Vec::with_capacity(net.sources.len());
    for (i, s) in net.sources.iter().enumerate() {
        modes.insert(PortRef::bare(&s.name), i);
        parts.push(match &s.kind {
            SourceKind::Opo(o) => opo_source_state(&o.to_params())?,
            SourceKind::Coherent { power_mw } => {
                if !(*power_mw >= 0.0) {
                    return Err(Error::invalid(format!(
                        "source `{}`: negative power {power_mw} mW",
                        s.name
                    )));
                }
                GaussianState::coherent(power_mw.sqrt(), 0.0)
            }
            SourceKind::Vacuum => GaussianState::vacuum(1)?,
        });
    }
    let mut state = GaussianState::product(&parts)?;

    let mode_of = |modes: &HashMap<PortRef, usize>, port: &PortRef| -> Result<usize> {
        modes
            .get(port)
            .copied()
            .ok_or_else(|| Error::invalid(format!("port `{port}` used before it is produced")))
    };

    for name in &checked.order {
        if checked.collapsed.contains(name) {
            continue;
        }
        let e = net
            .element(name)
            .ok_or_else(|| Error::invalid(format!("order names unknown element `{name}`")))?;
        match e.kind {
            ElementKind::BeamSplitter(split) => {
                let i = mode_of(&modes, &e.inputs[0])?;
                let j = mode_of(&modes, &e.inputs[1])?;
                state = state.beam_splitter(i, j, 1.0 - split.reflectivity())?;
                modes.insert(PortRef::indexed(name, 0), i);
                modes.insert(PortRef::indexed(name, 1), j);
            }
            ElementKind::Loss { eta } | ElementKind::Fiber { eta } => {
                let i = mode_of(&modes, &e.inputs[0])?;
                state = state.loss_channel(i, eta)?;
                modes.insert(PortRef::bare(name), i);
            }
            ElementKind::Phase { phase_deg } => {
                let i = mode_of(&modes, &e.inputs[0])?;
                state = state.rotate(i, phase_deg.to_radians())?;
                modes.insert(PortRef::bare(name), i);
            }
        }
    }

    let mut signal_modes = Vec::new();
    let mut mode_map = BTreeMap::new();
    for h in net.homodynes() {
        let mode = if checked.collapsed.contains(&h.signal.node) {
            let bs = net.element(&h.signal.node).expect("validated");
            let other = bs
                .inputs
                .iter()
                .find(|p| p.index.is_some() || p.node != h.lo)
                .expect("validated: one input is the LO");
            mode_of(&modes, other)?
        } else {
            mode_of(&modes, &h.signal)?
        };
        mode_map.insert(h.name.clone(), signal_modes.len());
        signal_modes.push(mode);
    }
    let final_state = if signal_modes.is_empty() {
        state
    } else {
        state.reduce(&signal_modes)?
    };

    let mut detectors = BTreeMap::new();
    let mut records = Vec::new();
    let mut homodynes = Vec::new();
    for h in net.homodynes() {
        let det = detector_model(h, mode_map[&h.name]);
        let summary = match h.lo_phase_deg {
            LoPhase::Scan => {
                let (min, max) = homodyne_extremes(&final_state, &det)?;
                let s = HomodyneSummary {
                    name: h.name.clone(),
                    scanned: true,
                    db_min: min.db,
                    db_max: max.db,
                };
                records.push(min.with_label(format!("{}.min", h.name)));
                records.push(max.with_label(format!("{}.max", h.name)));
                s
            }
            LoPhase::Fixed(_) => {
                let rec = homodyne_variance(&final_state, &det)?.with_label(h.name.clone());
                let s = HomodyneSummary {
                    name: h.name.clone(),
                    scanned: false,
                    db_min: rec.db,
                    db_max: rec.db,
                };
                records.push(rec);
                s
            }
        };
        homodynes.push(summary);
        detectors.insert(h.name.clone(), det);
    }

    let mut correlations = Vec::new();
    for j in net.joints() {
        let (d1, d2) = (&detectors[&j.a], &detectors[&j.b]);
        let correlation = correlation_variance(&final_state, d1, d2)?;
        records.extend(correlation.records(&j.name, d1.lo_phase)?);
        correlations.push(JointSummary {
            name: j.name.clone(),
            correlation,
            inseparability: inseparability_check(correlation.delta_sq)?,
        });
    }

    Ok(EvaluationResult {
        final_state,
        records,
        mode_map,
        homodynes,
        correlations,
        detectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_netlist, validate};

    fn run(text: &str) -> EvaluationResult {
        let net = parse_netlist(text).unwrap();
        let v = validate(&net).unwrap();
        evaluate(&net, &v).unwrap()
    }

    #[test]
    fn vacuum_reads_zero_db() {
        let r = run("source v vacuum\nsource lo coherent power_mw=1\nhomodyne hd signal=v lo=lo lo_phase_deg=scan");
        let h = r.homodyne("hd").unwrap();
        assert!(h.db_min.abs() < 1e-12 && h.db_max.abs() < 1e-12);
        assert_eq!(r.records.len(), 2);
        assert_eq!(r.final_state.n_modes(), 1);
    }

    #[test]
    fn collapsed_mixer_measures_other_input() {
        let direct = run(
            "source s vacuum\nsource lo coherent power_mw=1\nloss l in=s eta=0.3\nhomodyne hd signal=l lo=lo",
        );
        let mixed = run(
            "source s vacuum\nsource lo coherent power_mw=1\nloss l in=s eta=0.3\nbs m in=lo,l ratio=0.5\nhomodyne hd signal=m lo=lo",
        );
        assert_eq!(direct.records[0].variance_shot, mixed.records[0].variance_shot);
    }

    #[test]
    fn fixed_lo_emits_single_record() {
        let r = run("source v vacuum\nsource lo coherent power_mw=1\nhomodyne hd signal=v lo=lo lo_phase_deg=30");
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].label, "hd");
        assert!((r.records[0].lo_phase - 30f64.to_radians()).abs() < 1e-15);
    }
}
