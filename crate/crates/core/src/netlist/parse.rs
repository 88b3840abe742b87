use std::collections::{HashMap, HashSet};

use super::{
    is_identifier, Detector, Element, ElementKind, HomodyneSpec, JointMode, JointSpec, KeyError,
    Netlist, PortRef, Source, SourceKind, Split,
};
use crate::error::{ParseError, ParseErrorKind};
use crate::opo::OpoSource;

/// A whitespace-delimited token and its 1-based character column.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    col: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    col: c,
                    text: &line[b..byte],
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            col: c,
            text: &line[b..],
        });
    }
    out
}

struct LineCtx<'a> {
    line: usize,
    text: &'a str,
}

impl LineCtx<'_> {
    fn err(&self, kind: ParseErrorKind, col: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: self.line,
            column: col,
            message: message.into(),
            text: self.text.to_string(),
        }
    }

    fn end_col(&self) -> usize {
        self.text.trim_end().chars().count() + 1
    }
}

/// Parses netlist text. Comments start with `#`; blank lines are ignored.
/// Wiring is checked separately by [`super::validate`].
pub fn parse_netlist(text: &str) -> Result<Netlist, ParseError> {
    let mut net = Netlist {
        sources: Vec::new(),
        elements: Vec::new(),
        detectors: Vec::new(),
    };
    let mut names: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx {
            line: idx + 1,
            text: raw,
        };
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(&head) = tokens.first() else {
            continue;
        };

        let is_source = head.text == "source";
        match head.text {
            "source" | "bs" | "loss" | "fiber" | "phase" | "homodyne" | "joint" => {}
            other => {
                return Err(ctx.err(
                    ParseErrorKind::UnknownKeyword,
                    head.col,
                    format!("`{other}` is not a declaration keyword"),
                ))
            }
        }

        let name_tok = tokens.get(1).copied().ok_or_else(|| {
            ctx.err(
                ParseErrorKind::Syntax,
                ctx.end_col(),
                format!("`{}` needs a name", head.text),
            )
        })?;
        if !is_identifier(name_tok.text) {
            return Err(ctx.err(
                ParseErrorKind::Syntax,
                name_tok.col,
                format!("`{}` is not a valid name", name_tok.text),
            ));
        }
        if let Some(first) = names.get(name_tok.text) {
            return Err(ctx.err(
                ParseErrorKind::DuplicateName,
                name_tok.col,
                format!("`{}` was already declared on line {first}", name_tok.text),
            ));
        }
        let name = name_tok.text.to_string();

        let kv_start = if is_source { 3 } else { 2 };
        let pairs = split_pairs(&ctx, tokens.get(kv_start..).unwrap_or(&[]))?;

        if is_source {
            let kind_tok = tokens.get(2).copied().ok_or_else(|| {
                ctx.err(
                    ParseErrorKind::Syntax,
                    ctx.end_col(),
                    "source needs a kind (opo, coherent or vacuum)",
                )
            })?;
            let mut kind = match kind_tok.text {
                "opo" => SourceKind::Opo(OpoSource {
                    angle_deg: 0.0,
                    ..OpoSource::reference(0.0)
                }),
                "coherent" => SourceKind::Coherent { power_mw: 0.0 },
                "vacuum" => SourceKind::Vacuum,
                other => {
                    return Err(ctx.err(
                        ParseErrorKind::UnknownKeyword,
                        kind_tok.col,
                        format!("unknown source kind `{other}`"),
                    ))
                }
            };
            for p in &pairs {
                apply(&ctx, p, |k, v| kind.set_key(k, v))?;
            }
            require(&ctx, &pairs, kind.required_keys())?;
            net.sources.push(Source {
                name: name.clone(),
                kind,
            });
        } else if matches!(head.text, "homodyne" | "joint") {
            let mut det = if head.text == "homodyne" {
                Detector::Homodyne(HomodyneSpec {
                    name: name.clone(),
                    ..HomodyneSpec::default()
                })
            } else {
                Detector::Joint(JointSpec {
                    name: name.clone(),
                    a: String::new(),
                    b: String::new(),
                    mode: JointMode::DiffXSumP,
                })
            };
            for p in &pairs {
                apply(&ctx, p, |k, v| det.set_key(k, v))?;
            }
            require(&ctx, &pairs, det.required_keys())?;
            net.detectors.push(det);
        } else {
            let kind = match head.text {
                "bs" => ElementKind::BeamSplitter(Split::Ratio(0.5)),
                "loss" => ElementKind::Loss { eta: 1.0 },
                "fiber" => ElementKind::Fiber { eta: 1.0 },
                _ => ElementKind::Phase { phase_deg: 0.0 },
            };
            let mut el = Element {
                name: name.clone(),
                inputs: Vec::new(),
                kind,
            };
            for p in &pairs {
                apply(&ctx, p, |k, v| el.set_key(k, v))?;
            }
            let required: &[&str] = match el.kind {
                ElementKind::BeamSplitter(_) => &["in"],
                ElementKind::Loss { .. } | ElementKind::Fiber { .. } => &["eta", "in"],
                ElementKind::Phase { .. } => &["in", "phase_deg"],
            };
            require(&ctx, &pairs, required)?;
            if let ElementKind::BeamSplitter(_) = el.kind {
                let has = |k: &str| pairs.iter().any(|p| p.key == k);
                match (has("ratio"), has("mzi_phase_deg")) {
                    (true, true) => {
                        let p = pairs.iter().find(|p| p.key == "mzi_phase_deg").expect("present");
                        return Err(ctx.err(
                            ParseErrorKind::ConflictingKeys,
                            p.col,
                            "give either ratio or mzi_phase_deg, not both",
                        ));
                    }
                    (false, false) => {
                        return Err(ctx.err(
                            ParseErrorKind::MissingKey,
                            ctx.end_col(),
                            "bs needs ratio or mzi_phase_deg",
                        ))
                    }
                    _ => {}
                }
            }
            let mut seen: HashSet<&PortRef> = HashSet::new();
            for port in &el.inputs {
                if !seen.insert(port) {
                    let p = pairs.iter().find(|p| p.key == "in").expect("present");
                    return Err(ctx.err(
                        ParseErrorKind::DuplicateWire,
                        p.value_col,
                        format!("port `{port}` is wired twice into `{}`", el.name),
                    ));
                }
            }
            net.elements.push(el);
        }
        names.insert(name, ctx.line);
    }
    Ok(net)
}

struct Pair<'a> {
    key: &'a str,
    value: &'a str,
    col: usize,
    value_col: usize,
}

fn split_pairs<'a>(ctx: &LineCtx<'_>, tokens: &[Token<'a>]) -> Result<Vec<Pair<'a>>, ParseError> {
    let mut out: Vec<Pair<'a>> = Vec::new();
    for t in tokens {
        let Some((key, value)) = t.text.split_once('=') else {
            return Err(ctx.err(
                ParseErrorKind::MalformedKeyValue,
                t.col,
                format!("expected key=value, found `{}`", t.text),
            ));
        };
        if key.is_empty() || value.is_empty() || value.contains('=') {
            return Err(ctx.err(
                ParseErrorKind::MalformedKeyValue,
                t.col,
                format!("malformed pair `{}`", t.text),
            ));
        }
        if out.iter().any(|p| p.key == key) {
            return Err(ctx.err(
                ParseErrorKind::DuplicateKey,
                t.col,
                format!("key `{key}` given twice"),
            ));
        }
        out.push(Pair {
            key,
            value,
            col: t.col,
            value_col: t.col + key.chars().count() + 1,
        });
    }
    Ok(out)
}

fn apply(
    ctx: &LineCtx<'_>,
    p: &Pair<'_>,
    mut set: impl FnMut(&str, &str) -> Result<(), KeyError>,
) -> Result<(), ParseError> {
    set(p.key, p.value).map_err(|e| match e {
        KeyError::UnknownKey => ctx.err(
            ParseErrorKind::UnknownKey,
            p.col,
            format!("unknown key `{}`", p.key),
        ),
        KeyError::UnknownUnit(u) => ctx.err(
            ParseErrorKind::UnknownUnit,
            p.value_col,
            format!("unknown unit `{u}` in `{}`; units belong in the key name", p.value),
        ),
        KeyError::Invalid(msg) => ctx.err(ParseErrorKind::InvalidValue, p.value_col, msg),
    })
}

fn require(ctx: &LineCtx<'_>, pairs: &[Pair<'_>], keys: &[&str]) -> Result<(), ParseError> {
    for k in keys {
        if !pairs.iter().any(|p| p.key == *k) {
            return Err(ctx.err(
                ParseErrorKind::MissingKey,
                ctx.end_col(),
                format!("missing required key `{k}`"),
            ));
        }
    }
    Ok(())
}
