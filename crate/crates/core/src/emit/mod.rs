//! Serialization of programs, figures and loci: the JSON wire format and
//! deterministic SVG.

mod json;
mod svg;

pub use json::{
    decode_program, figure_to_value, program_from_json, program_from_value, program_to_json,
    program_to_value, SchemaError, SCHEMA_VERSION,
};
pub use svg::{figure_frame, figure_to_svg, locus_frame, locus_to_svg, Frame, SvgStyle};

use crate::locus::Locus;

/// The locus as JSON, led by the schema version.
pub fn locus_to_value(locus: &Locus) -> serde_json::Value {
    let mut out = serde_json::Map::new();
    out.insert("version".into(), SCHEMA_VERSION.into());
    match serde_json::to_value(locus).expect("loci serialize") {
        serde_json::Value::Object(fields) => out.extend(fields),
        _ => unreachable!("loci serialize as objects"),
    }
    out.into()
}

pub fn locus_to_json(locus: &Locus) -> String {
    let mut s = serde_json::to_string_pretty(&locus_to_value(locus)).expect("loci serialize");
    s.push('\n');
    s
}
