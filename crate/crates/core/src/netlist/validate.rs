use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Detector, ElementKind, Netlist, PortRef, SourceKind};
use crate::error::ValidationError;

/// Outcome of a successful validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validated {
    /// Element names such that every producer precedes its consumers. Ties
    /// are broken lexicographically.
    pub order: Vec<String>,
    /// Beam splitters that only mix a signal with its LO; detection absorbs
    /// them.
    pub collapsed: BTreeSet<String>,
    /// Non-fatal findings (e.g. outputs nobody consumes).
    pub warnings: Vec<String>,
}

enum Node<'a> {
    Source(&'a SourceKind),
    Element(&'a ElementKind),
}

pub fn validate(net: &Netlist) -> Result<Validated, ValidationError> {
    let mut nodes: HashMap<&str, Node<'_>> = HashMap::new();
    for s in &net.sources {
        nodes.insert(&s.name, Node::Source(&s.kind));
    }
    for e in &net.elements {
        nodes.insert(&e.name, Node::Element(&e.kind));
    }

    let check_port = |consumer: &str, port: &PortRef| -> Result<(), ValidationError> {
        let unknown = || ValidationError::UnknownReference {
            consumer: consumer.to_string(),
            port: port.to_string(),
        };
        match (nodes.get(port.node.as_str()), port.index) {
            (None, _) => Err(unknown()),
            (Some(Node::Element(ElementKind::BeamSplitter(_))), Some(0 | 1)) => Ok(()),
            (Some(Node::Element(ElementKind::BeamSplitter(_))), None) => {
                Err(ValidationError::BadWiring {
                    consumer: consumer.to_string(),
                    message: format!("beam splitter `{}` needs an output index (.0 or .1)", port.node),
                })
            }
            (Some(_), None) => Ok(()),
            (Some(_), Some(_)) => Err(unknown()),
        }
    };

    let mut consumed: BTreeMap<PortRef, String> = BTreeMap::new();
    let mut consume = |consumer: &str, port: PortRef| -> Result<(), ValidationError> {
        if let Some(first) = consumed.get(&port) {
            return Err(ValidationError::PortConsumedTwice {
                port: port.to_string(),
                first: first.clone(),
                second: consumer.to_string(),
            });
        }
        consumed.insert(port, consumer.to_string());
        Ok(())
    };

    for e in &net.elements {
        if e.inputs.len() != e.input_count() {
            return Err(ValidationError::BadWiring {
                consumer: e.name.clone(),
                message: format!("expected {} input(s)", e.input_count()),
            });
        }
        for p in &e.inputs {
            check_port(&e.name, p)?;
            consume(&e.name, p.clone())?;
        }
    }

    let mut collapsed = BTreeSet::new();
    let mut homodyne_names = BTreeSet::new();
    for d in &net.detectors {
        let Detector::Homodyne(h) = d else { continue };
        homodyne_names.insert(h.name.as_str());
        match nodes.get(h.lo.as_str()) {
            Some(Node::Source(SourceKind::Coherent { .. })) => {}
            _ => {
                return Err(ValidationError::BadWiring {
                    consumer: h.name.clone(),
                    message: format!("LO `{}` is not a coherent source", h.lo),
                })
            }
        }
        let lo_port = PortRef::bare(&h.lo);
        let signal_is_bs = h.signal.index.is_none()
            && matches!(
                nodes.get(h.signal.node.as_str()),
                Some(Node::Element(ElementKind::BeamSplitter(_)))
            );
        if signal_is_bs {
            let bs = net.element(&h.signal.node).expect("declared");
            if !bs.inputs.contains(&lo_port) {
                return Err(ValidationError::BadWiring {
                    consumer: h.name.clone(),
                    message: format!(
                        "beam splitter `{}` is not fed by LO `{}`",
                        bs.name, h.lo
                    ),
                });
            }
            if !collapsed.insert(bs.name.clone()) {
                return Err(ValidationError::BadWiring {
                    consumer: h.name.clone(),
                    message: format!("beam splitter `{}` already feeds another detector", bs.name),
                });
            }
            for out in bs.outputs() {
                consume(&h.name, out)?;
            }
        } else {
            check_port(&h.name, &h.signal)?;
            consume(&h.name, h.signal.clone())?;
            consume(&h.name, lo_port)?;
        }
    }

    for d in &net.detectors {
        let Detector::Joint(j) = d else { continue };
        for side in [&j.a, &j.b] {
            if !homodyne_names.contains(side.as_str()) {
                return Err(ValidationError::BadWiring {
                    consumer: j.name.clone(),
                    message: format!("`{side}` is not a homodyne detector"),
                });
            }
        }
        if j.a == j.b {
            return Err(ValidationError::BadWiring {
                consumer: j.name.clone(),
                message: "joint detector needs two different homodynes".into(),
            });
        }
    }

    let order = topo_order(net)?;

    let mut warnings = Vec::new();
    for s in &net.sources {
        let port = PortRef::bare(&s.name);
        if !consumed.contains_key(&port) {
            warnings.push(format!("output `{port}` is not consumed"));
        }
    }
    for e in &net.elements {
        for port in e.outputs() {
            if !consumed.contains_key(&port) {
                warnings.push(format!("output `{port}` is not consumed"));
            }
        }
    }

    Ok(Validated {
        order,
        collapsed,
        warnings,
    })
}

/// Kahn's algorithm over element dependencies, smallest ready name first.
fn topo_order(net: &Netlist) -> Result<Vec<String>, ValidationError> {
    let element_names: BTreeSet<&str> = net.elements.iter().map(|e| e.name.as_str()).collect();
    let mut deps: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut users: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in &net.elements {
        let entry = deps.entry(&e.name).or_default();
        for p in &e.inputs {
            if element_names.contains(p.node.as_str()) {
                entry.insert(p.node.as_str());
                users.entry(p.node.as_str()).or_default().insert(&e.name);
            }
        }
    }

    let mut remaining: BTreeMap<&str, usize> = deps.iter().map(|(k, v)| (*k, v.len())).collect();
    let mut ready: BTreeSet<&str> = remaining
        .iter()
        .filter(|(_, &n)| n == 0)
        .map(|(k, _)| *k)
        .collect();
    let mut order = Vec::with_capacity(net.elements.len());
    while let Some(next) = ready.pop_first() {
        remaining.remove(next);
        order.push(next.to_string());
        for user in users.get(next).into_iter().flatten() {
            if let Some(n) = remaining.get_mut(user) {
                *n -= 1;
                if *n == 0 {
                    ready.insert(user);
                }
            }
        }
    }
    if remaining.is_empty() {
        return Ok(order);
    }

    // Walk dependencies among the leftovers until a node repeats.
    let stuck: BTreeSet<&str> = remaining.keys().copied().collect();
    let mut path: Vec<&str> = vec![*stuck.first().expect("non-empty")];
    loop {
        let cur = *path.last().expect("non-empty");
        let next = deps[cur]
            .iter()
            .find(|d| stuck.contains(*d))
            .copied()
            .expect("every stuck node has a stuck dependency");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<String> = path[pos..].iter().rev().map(|s| s.to_string()).collect();
            cycle.push(cycle[0].clone());
            return Err(ValidationError::Cycle(cycle));
        }
        path.push(next);
    }
}
