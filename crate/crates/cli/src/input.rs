use std::fs;

use groupoidal::automorphism::AutomorphismDoc;
use groupoidal::bundle::BundleDoc;
use groupoidal::connection::scenario::ScenarioDoc;
use groupoidal::groupoid::GroupoidDoc;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{Abort, InputDigest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismInput {
    pub bundle: BundleDoc,
    pub automorphism: AutomorphismDoc,
}

#[derive(Debug, Clone)]
pub enum InputDoc {
    Groupoid(GroupoidDoc),
    Bundle(BundleDoc),
    Automorphism(AutomorphismInput),
    Scenario(ScenarioDoc),
}

impl InputDoc {
    pub fn kind(&self) -> &'static str {
        match self {
            InputDoc::Groupoid(_) => "groupoid",
            InputDoc::Bundle(_) => "bundle",
            InputDoc::Automorphism(_) => "automorphism",
            InputDoc::Scenario(_) => "scenario",
        }
    }

    /// Serialized with an explicit `kind` field.
    pub fn to_json(&self) -> Value {
        let (kind, mut v) = match self {
            InputDoc::Groupoid(d) => ("groupoid", serde_json::to_value(d)),
            InputDoc::Bundle(d) => ("bundle", serde_json::to_value(d)),
            InputDoc::Automorphism(d) => ("automorphism", serde_json::to_value(d)),
            InputDoc::Scenario(d) => ("scenario", serde_json::to_value(d)),
        };
        let v = v.as_mut().expect("serializable");
        v.as_object_mut().expect("object").insert("kind".into(), kind.into());
        v.clone()
    }
}

/// Reads a file, or the text itself when it starts with `{`.
pub fn read_source(source: &str) -> Result<(Vec<u8>, InputDigest), Abort> {
    let bytes = if source.trim_start().starts_with('{') {
        source.as_bytes().to_vec()
    } else {
        fs::read(source).map_err(|e| Abort::input(format!("{source}: {e}")))?
    };
    let digest = InputDigest::of(source, &bytes);
    Ok((bytes, digest))
}

fn parse<T: DeserializeOwned>(v: Value, what: &str) -> Result<T, Abort> {
    serde_json::from_value(v).map_err(|e| Abort::input(format!("not a valid {what} document: {e}")))
}

pub fn parse_value(bytes: &[u8]) -> Result<Value, Abort> {
    serde_json::from_slice(bytes).map_err(|e| Abort::input(format!("malformed JSON: {e}")))
}

/// Uses the `kind` field when present, otherwise the keys that identify each
/// document type.
pub fn parse_doc(bytes: &[u8]) -> Result<InputDoc, Abort> {
    let mut v = parse_value(bytes)?;
    let obj = v.as_object_mut().ok_or_else(|| Abort::input("document must be a JSON object"))?;
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(Abort::input("`kind` must be a string")),
        None if obj.contains_key("automorphism") => "automorphism".into(),
        None if obj.contains_key("cocycle") && obj.contains_key("groupoid") => "bundle".into(),
        None if obj.contains_key("arrows") => "groupoid".into(),
        None if obj.contains_key("charts") => "scenario".into(),
        None => return Err(Abort::input("cannot tell what kind of document this is; add a `kind` field")),
    };
    match kind.as_str() {
        "groupoid" => parse(v, "groupoid").map(InputDoc::Groupoid),
        "bundle" | "cocycle" => parse(v, "bundle").map(InputDoc::Bundle),
        "automorphism" => parse(v, "automorphism").map(InputDoc::Automorphism),
        "scenario" => parse(v, "scenario").map(InputDoc::Scenario),
        other => Err(Abort::input(format!("unknown document kind `{other}`"))),
    }
}

pub fn parse_as<T: DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, Abort> {
    let mut v = parse_value(bytes)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("kind");
    }
    parse(v, what)
}

/// Like [`parse_as`] but keeps `kind`, for internally tagged enums.
pub fn parse_tagged<T: DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, Abort> {
    parse(parse_value(bytes)?, what)
}
