//! Finding constructors shared by unit tests.

use crate::patterns::{
    ArrowKind, Confidence, Finding, FlowInstance, FlowShape, Participant, Position, SinkRef, SourceOrigin, SourceRef,
};
use crate::rulepack::{Certainty, SinkCategory, SourceCategory};
use crate::stmt::Span;

pub fn finding(
    path: &str,
    start: usize,
    matched: &str,
    stem: &str,
    categories: &[SourceCategory],
    sink: SinkCategory,
) -> Finding {
    let source = SourceRef {
        display: matched.to_string(),
        matched: matched.to_string(),
        stem: stem.to_string(),
        categories: categories.to_vec(),
        rule_id: format!("test.{stem}"),
        origin: SourceOrigin::Seeded,
        confidence: Confidence::High,
    };
    let rendered = format!("{matched} -send-> send({matched})");
    Finding {
        id: format!("{path}:{start}"),
        path: path.to_string(),
        span: Span {
            start_byte: start,
            end_byte: start + 1,
            start_line: 1,
            start_col: start + 1,
            end_line: 1,
            end_col: start + 2,
        },
        snippet: format!("send({matched})"),
        scope_id: 0,
        source: source.clone(),
        participants: vec![Participant {
            position: Position::Arg(0),
            source,
        }],
        sink: SinkRef {
            name: "send".to_string(),
            text: "send".to_string(),
            category: sink,
            rule_id: "test.sink".to_string(),
            certainty: Certainty::Solid,
        },
        instance: FlowInstance {
            shape: FlowShape::P8,
            arrow: ArrowKind::Solid,
            lhs_parts: vec![matched.to_string()],
            sink_name: "send".to_string(),
            rhs: format!("send({matched})"),
            rendered,
        },
        confidence: Confidence::High,
    }
}
