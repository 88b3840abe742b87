//! Line-oriented description of a chip circuit.
//!
//! ```text
//! source <name> opo pump_mw=<num> threshold_mw=<num> t_oc=<num> l0=<num> bliira_per_w=<num> fwhm_mhz=<num> sideband_mhz=<num> angle_deg=<num>
//! source <name> coherent power_mw=<num>
//! source <name> vacuum
//! bs <name> in=<a>,<b> (ratio=<num> | mzi_phase_deg=<num>)
//! loss <name> in=<a> eta=<num>
//! fiber <name> in=<a> eta=<num>
//! phase <name> in=<a> phase_deg=<num>
//! homodyne <name> signal=<a> lo=<lo> lo_phase_deg=<num|scan> eta_pd=<num> visibility=<num> phase_fluct_deg=<num> clearance_db=<num|none>
//! joint <name> a=<hd1> b=<hd2> mode=diff_x_sum_p
//! ```
//!
//! Beam-splitter outputs are `<name>.0` and `<name>.1`; every other node has a
//! single output referenced by its bare name. A homodyne whose `signal` is the
//! bare name of a beam splitter fed by its LO is a balanced detector on that
//! splitter's other input.

mod evaluate;
mod parse;
mod presets;
mod sweep;
mod validate;

use std::fmt;

use crate::error::{Error, Result};
use crate::measurement::Clearance;
use crate::opo::OpoSource;

pub use evaluate::{evaluate, EvaluationResult, HomodyneSummary, JointSummary};
pub use parse::parse_netlist;
pub use presets::{preset_fig1a, preset_fig1b, Fig1aConfig, Fig1bConfig, DetectorConfig};
pub use sweep::{linspace, sweep, SweepRow};
pub use validate::{validate, Validated};

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub sources: Vec<Source>,
    pub elements: Vec<Element>,
    pub detectors: Vec<Detector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub name: String,
    pub kind: SourceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Opo(OpoSource),
    Coherent { power_mw: f64 },
    Vacuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub inputs: Vec<PortRef>,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    BeamSplitter(Split),
    Loss { eta: f64 },
    Fiber { eta: f64 },
    Phase { phase_deg: f64 },
}

/// How a beam splitter's reflectivity is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Split {
    Ratio(f64),
    /// Internal phase of a two-coupler Mach-Zehnder, degrees.
    MziPhaseDeg(f64),
}

impl Split {
    pub fn reflectivity(self) -> f64 {
        match self {
            Split::Ratio(r) => r,
            Split::MziPhaseDeg(d) => mzi_reflectivity(d.to_radians()),
        }
    }
}

/// Reflectivity of an ideal Mach-Zehnder built from two 50:50 couplers with
/// internal phase `phi`: `sin²(φ/2)`.
pub fn mzi_reflectivity(phi: f64) -> f64 {
    (phi / 2.0).sin().powi(2)
}

/// Internal MZI phase in `[0, π]` giving reflectivity `ratio`.
pub fn mzi_phase_for_ratio(ratio: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::invalid(format!("ratio {ratio} outside [0, 1]")));
    }
    Ok(2.0 * ratio.sqrt().asin())
}

/// Reference to an output port: `node` or `node.index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: String,
    pub index: Option<u8>,
}

impl PortRef {
    pub fn bare(node: impl Into<String>) -> Self {
        PortRef {
            node: node.into(),
            index: None,
        }
    }

    pub fn indexed(node: impl Into<String>, index: u8) -> Self {
        PortRef {
            node: node.into(),
            index: Some(index),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}.{}", self.node, i),
            None => f.write_str(&self.node),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Homodyne(HomodyneSpec),
    Joint(JointSpec),
}

impl Detector {
    pub fn name(&self) -> &str {
        match self {
            Detector::Homodyne(h) => &h.name,
            Detector::Joint(j) => &j.name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoPhase {
    Scan,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneSpec {
    pub name: String,
    pub signal: PortRef,
    pub lo: String,
    pub lo_phase_deg: LoPhase,
    pub eta_pd: f64,
    pub visibility: f64,
    pub phase_fluct_deg: f64,
    pub clearance_db: Clearance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    DiffXSumP,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub a: String,
    pub b: String,
    pub mode: JointMode,
}

/// Why a key could not be applied to a declaration.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum KeyError {
    UnknownKey,
    UnknownUnit(String),
    Invalid(String),
}

/// Parses a decimal number with optional exponent. Trailing letters after a
/// numeric prefix are reported as a unit suffix.
pub(crate) fn parse_number(raw: &str) -> std::result::Result<f64, KeyError> {
    let numeric = |c: char| c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E');
    if !raw.is_empty() && raw.chars().all(numeric) {
        if let Ok(v) = raw.parse::<f64>() {
            if v.is_finite() {
                return Ok(v);
            }
        }
    }
    let split = raw
        .char_indices()
        .find(|&(_, c)| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .map(|(i, _)| i);
    if let Some(i) = split {
        if i > 0 && raw[..i].parse::<f64>().is_ok() {
            return Err(KeyError::UnknownUnit(raw[i..].to_string()));
        }
    }
    Err(KeyError::Invalid(format!("`{raw}` is not a number")))
}

fn unit_interval(key: &str, raw: &str) -> std::result::Result<f64, KeyError> {
    let v = parse_number(raw)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(KeyError::Invalid(format!("{key}={v} outside [0, 1]")));
    }
    Ok(v)
}

pub(crate) fn parse_port(raw: &str) -> std::result::Result<PortRef, KeyError> {
    let (node, index) = match raw.split_once('.') {
        Some((n, i)) => {
            let idx = i
                .parse::<u8>()
                .map_err(|_| KeyError::Invalid(format!("bad port index in `{raw}`")))?;
            (n, Some(idx))
        }
        None => (raw, None),
    };
    if !is_identifier(node) {
        return Err(KeyError::Invalid(format!("`{raw}` is not a port reference")));
    }
    Ok(PortRef {
        node: node.to_string(),
        index,
    })
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn identifier(raw: &str) -> std::result::Result<String, KeyError> {
    if is_identifier(raw) {
        Ok(raw.to_string())
    } else {
        Err(KeyError::Invalid(format!("`{raw}` is not a valid name")))
    }
}

impl SourceKind {
    pub(crate) fn keys(&self) -> &'static [&'static str] {
        match self {
            SourceKind::Opo(_) => &[
                "angle_deg",
                "bliira_per_w",
                "fwhm_mhz",
                "l0",
                "pump_mw",
                "sideband_mhz",
                "t_oc",
                "threshold_mw",
            ],
            SourceKind::Coherent { .. } => &["power_mw"],
            SourceKind::Vacuum => &[],
        }
    }

    pub(crate) fn required_keys(&self) -> &'static [&'static str] {
        match self {
            SourceKind::Opo(_) => &[
                "bliira_per_w",
                "fwhm_mhz",
                "l0",
                "pump_mw",
                "sideband_mhz",
                "t_oc",
                "threshold_mw",
            ],
            SourceKind::Coherent { .. } => &["power_mw"],
            SourceKind::Vacuum => &[],
        }
    }

    pub(crate) fn set_key(&mut self, key: &str, raw: &str) -> std::result::Result<(), KeyError> {
        match self {
            SourceKind::Opo(o) => {
                let slot = match key {
                    "pump_mw" => &mut o.pump_mw,
                    "threshold_mw" => &mut o.threshold_mw,
                    "t_oc" => &mut o.t_oc,
                    "l0" => &mut o.l0,
                    "bliira_per_w" => &mut o.bliira_per_w,
                    "fwhm_mhz" => &mut o.fwhm_mhz,
                    "sideband_mhz" => &mut o.sideband_mhz,
                    "angle_deg" => &mut o.angle_deg,
                    _ => return Err(KeyError::UnknownKey),
                };
                *slot = parse_number(raw)?;
            }
            SourceKind::Coherent { power_mw } => match key {
                "power_mw" => *power_mw = parse_number(raw)?,
                _ => return Err(KeyError::UnknownKey),
            },
            SourceKind::Vacuum => return Err(KeyError::UnknownKey),
        }
        Ok(())
    }

    fn get_key(&self, key: &str) -> Option<String> {
        match self {
            SourceKind::Opo(o) => {
                let v = match key {
                    "pump_mw" => o.pump_mw,
                    "threshold_mw" => o.threshold_mw,
                    "t_oc" => o.t_oc,
                    "l0" => o.l0,
                    "bliira_per_w" => o.bliira_per_w,
                    "fwhm_mhz" => o.fwhm_mhz,
                    "sideband_mhz" => o.sideband_mhz,
                    "angle_deg" => o.angle_deg,
                    _ => return None,
                };
                Some(v.to_string())
            }
            SourceKind::Coherent { power_mw } if key == "power_mw" => Some(power_mw.to_string()),
            _ => None,
        }
    }

    fn keyword(&self) -> &'static str {
        match self {
            SourceKind::Opo(_) => "opo",
            SourceKind::Coherent { .. } => "coherent",
            SourceKind::Vacuum => "vacuum",
        }
    }
}

impl Element {
    pub(crate) fn keyword(&self) -> &'static str {
        match self.kind {
            ElementKind::BeamSplitter(_) => "bs",
            ElementKind::Loss { .. } => "loss",
            ElementKind::Fiber { .. } => "fiber",
            ElementKind::Phase { .. } => "phase",
        }
    }

    pub(crate) fn input_count(&self) -> usize {
        match self.kind {
            ElementKind::BeamSplitter(_) => 2,
            _ => 1,
        }
    }

    /// Output ports in index order.
    pub fn outputs(&self) -> Vec<PortRef> {
        match self.kind {
            ElementKind::BeamSplitter(_) => vec![
                PortRef::indexed(&self.name, 0),
                PortRef::indexed(&self.name, 1),
            ],
            _ => vec![PortRef::bare(&self.name)],
        }
    }

    pub(crate) fn set_key(&mut self, key: &str, raw: &str) -> std::result::Result<(), KeyError> {
        if key == "in" {
            let ports = raw
                .split(',')
                .map(parse_port)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if ports.len() != self.input_count() {
                return Err(KeyError::Invalid(format!(
                    "`{}` takes {} input(s), got {}",
                    self.keyword(),
                    self.input_count(),
                    ports.len()
                )));
            }
            self.inputs = ports;
            return Ok(());
        }
        match (&mut self.kind, key) {
            (ElementKind::BeamSplitter(s), "ratio") => *s = Split::Ratio(unit_interval(key, raw)?),
            (ElementKind::BeamSplitter(s), "mzi_phase_deg") => {
                *s = Split::MziPhaseDeg(parse_number(raw)?)
            }
            (ElementKind::Loss { eta } | ElementKind::Fiber { eta }, "eta") => *eta = parse_number(raw)?,
            (ElementKind::Phase { phase_deg }, "phase_deg") => *phase_deg = parse_number(raw)?,
            _ => return Err(KeyError::UnknownKey),
        }
        Ok(())
    }

    fn get_key(&self, key: &str) -> Option<String> {
        match (&self.kind, key) {
            (_, "in") => Some(
                self.inputs
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (ElementKind::BeamSplitter(Split::Ratio(r)), "ratio") => Some(r.to_string()),
            (ElementKind::BeamSplitter(Split::MziPhaseDeg(d)), "mzi_phase_deg") => {
                Some(d.to_string())
            }
            (ElementKind::Loss { eta } | ElementKind::Fiber { eta }, "eta") => Some(eta.to_string()),
            (ElementKind::Phase { phase_deg }, "phase_deg") => Some(phase_deg.to_string()),
            _ => None,
        }
    }

    fn key_values(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![("in", self.get_key("in").unwrap_or_default())];
        match self.kind {
            ElementKind::BeamSplitter(Split::Ratio(r)) => kv.push(("ratio", r.to_string())),
            ElementKind::BeamSplitter(Split::MziPhaseDeg(d)) => {
                kv.push(("mzi_phase_deg", d.to_string()))
            }
            ElementKind::Loss { eta } | ElementKind::Fiber { eta } => kv.push(("eta", eta.to_string())),
            ElementKind::Phase { phase_deg } => kv.push(("phase_deg", phase_deg.to_string())),
        }
        kv
    }
}

impl Detector {
    pub(crate) fn set_key(&mut self, key: &str, raw: &str) -> std::result::Result<(), KeyError> {
        match self {
            Detector::Homodyne(h) => match key {
                "signal" => h.signal = parse_port(raw)?,
                "lo" => h.lo = identifier(raw)?,
                "lo_phase_deg" => {
                    h.lo_phase_deg = if raw == "scan" {
                        LoPhase::Scan
                    } else {
                        LoPhase::Fixed(parse_number(raw)?)
                    }
                }
                "eta_pd" => h.eta_pd = parse_number(raw)?,
                "visibility" => h.visibility = parse_number(raw)?,
                "phase_fluct_deg" => h.phase_fluct_deg = parse_number(raw)?,
                "clearance_db" => {
                    h.clearance_db = if raw == "none" {
                        Clearance::None
                    } else {
                        Clearance::Db(parse_number(raw)?)
                    }
                }
                _ => return Err(KeyError::UnknownKey),
            },
            Detector::Joint(j) => match key {
                "a" => j.a = identifier(raw)?,
                "b" => j.b = identifier(raw)?,
                "mode" => {
                    j.mode = match raw {
                        "diff_x_sum_p" => JointMode::DiffXSumP,
                        _ => return Err(KeyError::Invalid(format!("unknown joint mode `{raw}`"))),
                    }
                }
                _ => return Err(KeyError::UnknownKey),
            },
        }
        Ok(())
    }

    pub(crate) fn required_keys(&self) -> &'static [&'static str] {
        match self {
            Detector::Homodyne(_) => &["lo", "signal"],
            Detector::Joint(_) => &["a", "b"],
        }
    }

    fn key_values(&self) -> Vec<(&'static str, String)> {
        match self {
            Detector::Homodyne(h) => vec![
                ("clearance_db", match h.clearance_db {
                    Clearance::None => "none".to_string(),
                    Clearance::Db(c) => c.to_string(),
                }),
                ("eta_pd", h.eta_pd.to_string()),
                ("lo", h.lo.clone()),
                ("lo_phase_deg", match h.lo_phase_deg {
                    LoPhase::Scan => "scan".to_string(),
                    LoPhase::Fixed(d) => d.to_string(),
                }),
                ("phase_fluct_deg", h.phase_fluct_deg.to_string()),
                ("signal", h.signal.to_string()),
                ("visibility", h.visibility.to_string()),
            ],
            Detector::Joint(j) => vec![
                ("a", j.a.clone()),
                ("b", j.b.clone()),
                ("mode", "diff_x_sum_p".to_string()),
            ],
        }
    }

    fn get_key(&self, key: &str) -> Option<String> {
        self.key_values()
            .into_iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    fn keyword(&self) -> &'static str {
        match self {
            Detector::Homodyne(_) => "homodyne",
            Detector::Joint(_) => "joint",
        }
    }
}

impl Default for HomodyneSpec {
    fn default() -> Self {
        HomodyneSpec {
            name: String::new(),
            signal: PortRef::bare(""),
            lo: String::new(),
            lo_phase_deg: LoPhase::Fixed(0.0),
            eta_pd: 1.0,
            visibility: 1.0,
            phase_fluct_deg: 0.0,
            clearance_db: Clearance::None,
        }
    }
}

fn write_line(f: &mut fmt::Formatter<'_>, head: &str, mut kv: Vec<(&'static str, String)>) -> fmt::Result {
    kv.sort_by(|a, b| a.0.cmp(b.0));
    f.write_str(head)?;
    for (k, v) in kv {
        write!(f, " {k}={v}")?;
    }
    writeln!(f)
}

/// Canonical form: sources, then elements, then detectors, each in
/// declaration order, with keys sorted.
impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sources {
            let head = format!("source {} {}", s.name, s.kind.keyword());
            let kv = s
                .kind
                .keys()
                .iter()
                .map(|&k| (k, s.kind.get_key(k).unwrap_or_default()))
                .collect();
            write_line(f, &head, kv)?;
        }
        for e in &self.elements {
            write_line(f, &format!("{} {}", e.keyword(), e.name), e.key_values())?;
        }
        for d in &self.detectors {
            write_line(f, &format!("{} {}", d.keyword(), d.name()), d.key_values())?;
        }
        Ok(())
    }
}

/// A value addressed by a dotted parameter path.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl Netlist {
    /// Canonical text form.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn source(&self, name: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn detector(&self, name: &str) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.name() == name)
    }

    pub fn homodynes(&self) -> impl Iterator<Item = &HomodyneSpec> {
        self.detectors.iter().filter_map(|d| match d {
            Detector::Homodyne(h) => Some(h),
            Detector::Joint(_) => None,
        })
    }

    pub fn joints(&self) -> impl Iterator<Item = &JointSpec> {
        self.detectors.iter().filter_map(|d| match d {
            Detector::Joint(j) => Some(j),
            Detector::Homodyne(_) => None,
        })
    }

    /// Reads `sources.<name>.<key>`, `elements.<name>.<key>` or
    /// `detectors.<name>.<key>`.
    pub fn get_param(&self, path: &str) -> Result<ParamValue> {
        let (section, name, key) = split_path(path)?;
        let raw = match section {
            "sources" => self.source(name).and_then(|s| s.kind.get_key(key)),
            "elements" => self.element(name).and_then(|e| e.get_key(key)),
            "detectors" => self.detector(name).and_then(|d| d.get_key(key)),
            _ => None,
        }
        .ok_or_else(|| Error::UnknownPath(path.to_string()))?;
        Ok(match parse_number(&raw) {
            Ok(v) => ParamValue::Number(v),
            Err(_) => ParamValue::Text(raw),
        })
    }

    /// True when the addressed parameter takes a number (possibly alongside
    /// a keyword such as `scan` or `none`).
    pub fn is_numeric_param(&self, path: &str) -> Result<bool> {
        self.get_param(path)?;
        let (_, _, key) = split_path(path)?;
        Ok(!matches!(key, "in" | "signal" | "lo" | "a" | "b" | "mode"))
    }

    /// Overwrites one parameter, using the same value syntax as the text
    /// format.
    pub fn set_param(&mut self, path: &str, raw: &str) -> Result<()> {
        let (section, name, key) = split_path(path)?;
        let unknown = || Error::UnknownPath(path.to_string());
        let res = match section {
            "sources" => self
                .sources
                .iter_mut()
                .find(|s| s.name == name)
                .ok_or_else(unknown)?
                .kind
                .set_key(key, raw),
            "elements" => {
                let e = self
                    .elements
                    .iter_mut()
                    .find(|e| e.name == name)
                    .ok_or_else(unknown)?;
                // Switching between ratio and MZI phase is allowed here.
                e.set_key(key, raw)
            }
            "detectors" => self
                .detectors
                .iter_mut()
                .find(|d| d.name() == name)
                .ok_or_else(unknown)?
                .set_key(key, raw),
            _ => return Err(unknown()),
        };
        res.map_err(|e| match e {
            KeyError::UnknownKey => unknown(),
            KeyError::UnknownUnit(_) | KeyError::Invalid(_) => Error::BadParameterValue {
                path: path.to_string(),
                value: raw.to_string(),
            },
        })
    }

    pub fn set_number(&mut self, path: &str, value: f64) -> Result<()> {
        if !self.is_numeric_param(path)? {
            return Err(Error::BadParameterValue {
                path: path.to_string(),
                value: value.to_string(),
            });
        }
        self.set_param(path, &value.to_string())
    }
}

fn split_path(path: &str) -> Result<(&str, &str, &str)> {
    let mut parts = path.splitn(3, '.');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(s), Some(n), Some(k)) if !n.is_empty() && !k.is_empty() => Ok((s, n, k)),
        _ => Err(Error::UnknownPath(path.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn mzi_reflectivity_values() {
        assert!((mzi_reflectivity(PI) - 1.0).abs() < 1e-15);
        assert!((mzi_reflectivity(FRAC_PI_2) - 0.5).abs() < 1e-15);
        assert_eq!(mzi_reflectivity(0.0), 0.0);
        let phi = mzi_phase_for_ratio(0.01).unwrap();
        assert!((phi - 0.200_334_842_323).abs() < 1e-11);
        assert!((mzi_reflectivity(phi) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn mzi_periodic_and_symmetric() {
        for k in 0..50 {
            let phi = -3.0 + 0.17 * k as f64;
            let r = mzi_reflectivity(phi);
            assert!((mzi_reflectivity(phi + 2.0 * PI) - r).abs() < 1e-12);
            let d = phi - PI;
            assert!((mzi_reflectivity(PI + d) - mzi_reflectivity(PI - d)).abs() < 1e-12);
        }
    }

    #[test]
    fn number_parsing() {
        assert_eq!(parse_number("1.5e-3").unwrap(), 1.5e-3);
        assert_eq!(parse_number("-2").unwrap(), -2.0);
        assert!(matches!(parse_number("100mW"), Err(KeyError::UnknownUnit(u)) if u == "mW"));
        assert!(matches!(parse_number("inf"), Err(KeyError::Invalid(_))));
        assert!(matches!(parse_number("abc"), Err(KeyError::Invalid(_))));
        assert!(matches!(parse_number(""), Err(KeyError::Invalid(_))));
    }

    #[test]
    fn ports() {
        assert_eq!(parse_port("bs2.1").unwrap(), PortRef::indexed("bs2", 1));
        assert_eq!(parse_port("sq1").unwrap(), PortRef::bare("sq1"));
        assert!(parse_port("bs2.x").is_err());
        assert!(parse_port("1abc").is_err());
    }
}
