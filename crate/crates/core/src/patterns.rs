//! The eight flow-pattern shapes, their classification from a raw flow and
//! the ASCII rendering of a flow-pattern instance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rulepack::{Certainty, SinkCategory, SourceCategory};
use crate::stmt::{Span, StatementKind};
use crate::taint::RawFlow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowShape {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
}

impl FlowShape {
    pub const ALL: [FlowShape; 8] = [
        FlowShape::P1,
        FlowShape::P2,
        FlowShape::P3,
        FlowShape::P4,
        FlowShape::P5,
        FlowShape::P6,
        FlowShape::P7,
        FlowShape::P8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowShape::P1 => "P1",
            FlowShape::P2 => "P2",
            FlowShape::P3 => "P3",
            FlowShape::P4 => "P4",
            FlowShape::P5 => "P5",
            FlowShape::P6 => "P6",
            FlowShape::P7 => "P7",
            FlowShape::P8 => "P8",
        }
    }

    /// Abstract notation, with the canonical arrow for each shape.
    pub fn notation(self) -> &'static str {
        match self {
            FlowShape::P1 => "E[_] -m-> v",
            FlowShape::P2 => "v2 + E[_] ~m~> v1",
            FlowShape::P3 => "v2(E[_]) -m-> v1",
            FlowShape::P4 => "v ~m~> E[_]",
            FlowShape::P5 => "v -m-> E[_]",
            FlowShape::P6 => "v1 + v2 -m-> v1",
            FlowShape::P7 => "v + E[_] -m-> v",
            FlowShape::P8 => "v -m-> m(v)",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FlowShape::P1 => "A non-personal value flows via the sink into a source.",
            FlowShape::P2 => {
                "A source and non-personal data are processed by the sink; the result flows into a source."
            }
            FlowShape::P3 => "A value from a source flows via a sink it exposes into another source.",
            FlowShape::P4 => "A source is processed by the sink; the result flows into a new expression.",
            FlowShape::P5 => {
                "A source flows via the sink into a new expression, making it a new source."
            }
            FlowShape::P6 => "A source flows via a sink declared by another source into that source.",
            FlowShape::P7 => {
                "A source and non-personal data are processed by the sink; the result flows into the source itself."
            }
            FlowShape::P8 => "A source flows into the sink.",
        }
    }
}

impl fmt::Display for FlowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FlowShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FlowShape::ALL
            .into_iter()
            .find(|shape| shape.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown flow shape `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowKind {
    Solid,
    Dashed,
}

impl From<Certainty> for ArrowKind {
    fn from(c: Certainty) -> Self {
        match c {
            Certainty::Solid => ArrowKind::Solid,
            Certainty::Dashed => ArrowKind::Dashed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    Low,
}

impl Confidence {
    pub fn name(self) -> &'static str {
        match self {
            Confidence::High => "high",
            Confidence::Low => "low",
        }
    }

    /// `Low` if either side is `Low`.
    pub fn and(self, other: Confidence) -> Confidence {
        if self == Confidence::Low || other == Confidence::Low {
            Confidence::Low
        } else {
            Confidence::High
        }
    }
}

impl std::str::FromStr for Confidence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high" => Ok(Confidence::High),
            "low" => Ok(Confidence::Low),
            _ => Err(format!("unknown confidence `{s}`")),
        }
    }
}

/// Where a source sits in its statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Target,
    Receiver,
    Arg(usize),
    LiteralArg(usize),
}

impl Position {
    pub fn is_arg(self) -> bool {
        matches!(self, Position::Arg(_) | Position::LiteralArg(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SourceOrigin {
    /// Matched a variable-name rule.
    Seeded,
    /// Matched a literal-value rule inside a string literal.
    Literal,
    /// Became a source through an earlier solid flow in the same scope.
    Derived { from: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    /// Text shown to reviewers, e.g. `users.email_addr`.
    pub display: String,
    /// The identifier that matched, e.g. `email_addr` or `user.id`.
    pub matched: String,
    pub stem: String,
    pub categories: Vec<SourceCategory>,
    pub rule_id: String,
    pub origin: SourceOrigin,
    pub confidence: Confidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Participant {
    pub position: Position,
    pub source: SourceRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SinkRef {
    /// Final callee name.
    pub name: String,
    /// Callee as written, e.g. `this.usersRepository.findOne`.
    pub text: String,
    pub category: SinkCategory,
    pub rule_id: String,
    pub certainty: Certainty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowInstance {
    pub shape: FlowShape,
    pub arrow: ArrowKind,
    pub lhs_parts: Vec<String>,
    pub sink_name: String,
    pub rhs: String,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub id: String,
    pub path: String,
    pub span: Span,
    pub snippet: String,
    pub scope_id: u32,
    /// The primary source: first argument source, else the receiver, else
    /// the assignment target.
    pub source: SourceRef,
    pub participants: Vec<Participant>,
    pub sink: SinkRef,
    pub instance: FlowInstance,
    pub confidence: Confidence,
}

impl Finding {
    pub fn categories(&self) -> &[SourceCategory] {
        &self.source.categories
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("statement cannot be classified into a flow pattern")]
    Unclassifiable,
}

pub const PLACEHOLDER: &str = "_";

/// Renders `lhs ("+" lhs)* arrow rhs`.
pub fn render(lhs_parts: &[String], arrow: ArrowKind, sink: &str, rhs: &str) -> String {
    let lhs = lhs_parts.join("+");
    match arrow {
        ArrowKind::Solid => format!("{lhs} -{sink}-> {rhs}"),
        ArrowKind::Dashed => format!("{lhs} ~{sink}~> {rhs}"),
    }
}

/// Applies the A/T/R/G decision table to a raw flow.
pub fn classify(flow: &RawFlow) -> Result<FlowInstance, ClassifyError> {
    let target = match &flow.statement.kind {
        StatementKind::Assignment { target } => Some(target.join(".")),
        StatementKind::ExpressionCall => None,
        StatementKind::Other => return Err(ClassifyError::Unclassifiable),
    };
    let a = target.is_some();
    let t = flow.sources.iter().any(|p| p.position == Position::Target);
    let receiver = flow
        .sources
        .iter()
        .find(|p| p.position == Position::Receiver)
        .map(|p| p.source.display.clone());
    let r = receiver.is_some();
    let args: Vec<String> = flow
        .sources
        .iter()
        .filter(|p| p.position.is_arg())
        .map(|p| p.source.display.clone())
        .collect();
    let g = !args.is_empty();
    let arrow = ArrowKind::from(flow.sink.certainty);
    let sink = flow.sink.name.clone();
    let hole = || PLACEHOLDER.to_string();

    let (shape, lhs, rhs) = match (a, t, r, g) {
        (true, true, false, false) => (FlowShape::P1, vec![hole()], target.unwrap()),
        (true, true, false, true) => {
            let mut lhs = args;
            lhs.push(hole());
            (FlowShape::P2, lhs, target.unwrap())
        }
        (true, true, true, _) => {
            let mut lhs = vec![format!("{}({PLACEHOLDER})", receiver.unwrap())];
            lhs.extend(args);
            (FlowShape::P3, lhs, target.unwrap())
        }
        (true, false, _, _) if r || g => {
            let mut lhs: Vec<String> = receiver.into_iter().collect();
            lhs.extend(args);
            let shape = match arrow {
                ArrowKind::Dashed => FlowShape::P4,
                ArrowKind::Solid => FlowShape::P5,
            };
            (shape, lhs, target.unwrap())
        }
        (false, _, true, true) => {
            let recv = receiver.unwrap();
            let mut lhs = vec![recv.clone()];
            lhs.extend(args);
            (FlowShape::P6, lhs, recv)
        }
        (false, _, true, false) => {
            let recv = receiver.unwrap();
            (FlowShape::P7, vec![recv.clone(), hole()], recv)
        }
        (false, _, false, true) => {
            let rhs = format!("{sink}({})", args.join(","));
            (FlowShape::P8, args, rhs)
        }
        _ => return Err(ClassifyError::Unclassifiable),
    };
    let rendered = render(&lhs, arrow, &sink, &rhs);
    Ok(FlowInstance {
        shape,
        arrow,
        lhs_parts: lhs,
        sink_name: sink,
        rhs,
        rendered,
    })
}
