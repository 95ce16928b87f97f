//! Structured outputs.
//!
//! A [`StructuredSchema`] is a flat list of typed fields. It is rendered into
//! the model request as a JSON-Schema object and the reply content is parsed
//! back with [`parse_structured_output`]. Nested objects are not supported.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldType {
    String,
    StringList,
    Boolean,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: FieldType,
    pub description: String,
    #[serde(default = "yes")]
    pub required: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredSchema {
    pub name: String,
    pub fields: Vec<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("duplicate field name {0}")]
    DuplicateField(String),
}

impl StructuredSchema {
    pub fn new(name: &str) -> Self {
        StructuredSchema {
            name: name.to_string(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, name: &str, kind: FieldType, description: &str) -> Self {
        self.fields.push(FieldSpec {
            name: name.to_string(),
            kind,
            description: description.to_string(),
            required: true,
        });
        self
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let mut seen = std::collections::HashSet::new();
        for f in &self.fields {
            if !seen.insert(f.name.as_str()) {
                return Err(SchemaError::DuplicateField(f.name.clone()));
            }
        }
        Ok(())
    }

    /// JSON-Schema rendering sent to backends.
    pub fn to_json_schema(&self) -> Value {
        let mut props = Map::new();
        for f in &self.fields {
            let mut s = match f.kind {
                FieldType::String => json!({"type": "string"}),
                FieldType::StringList => json!({"type": "array", "items": {"type": "string"}}),
                FieldType::Boolean => json!({"type": "boolean"}),
                FieldType::Integer => json!({"type": "integer"}),
            };
            s["description"] = Value::String(f.description.clone());
            props.insert(f.name.clone(), s);
        }
        let required: Vec<&str> = self
            .fields
            .iter()
            .filter(|f| f.required)
            .map(|f| f.name.as_str())
            .collect();
        json!({
            "type": "object",
            "properties": props,
            "required": required,
            "additionalProperties": false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Boolean(bool),
    Integer(i64),
    String(String),
    StringList(Vec<String>),
}

impl FieldValue {
    fn to_json(&self) -> Value {
        match self {
            FieldValue::Boolean(b) => Value::Bool(*b),
            FieldValue::Integer(i) => Value::from(*i),
            FieldValue::String(s) => Value::String(s.clone()),
            FieldValue::StringList(v) => Value::from(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("schema violation on `{field}`: {reason}")]
pub struct SchemaViolation {
    pub field: String,
    pub reason: String,
}

impl SchemaViolation {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        SchemaViolation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Parsed, type-checked structured reply.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructuredOutput(pub BTreeMap<String, FieldValue>);

impl StructuredOutput {
    pub fn get(&self, name: &str) -> Option<&FieldValue> {
        self.0.get(name)
    }

    pub fn str(&self, name: &str) -> Option<&str> {
        match self.0.get(name) {
            Some(FieldValue::String(s)) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self, name: &str) -> Option<&[String]> {
        match self.0.get(name) {
            Some(FieldValue::StringList(v)) => Some(v),
            _ => None,
        }
    }

    pub fn bool(&self, name: &str) -> Option<bool> {
        match self.0.get(name) {
            Some(FieldValue::Boolean(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        match self.0.get(name) {
            Some(FieldValue::Integer(i)) => Some(*i),
            _ => None,
        }
    }

    /// Serializes to the JSON-text wire form a backend would emit.
    pub fn to_wire(&self) -> String {
        let map: Map<String, Value> = self
            .0
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        Value::Object(map).to_string()
    }
}

/// Parses model content against `schema`.
///
/// Accepts bare JSON or JSON wrapped in a Markdown code fence. Fields not in
/// the schema are dropped.
pub fn parse_structured_output(
    schema: &StructuredSchema,
    raw: &str,
) -> Result<StructuredOutput, SchemaViolation> {
    let body = strip_fence(raw);
    let value: Value = serde_json::from_str(body)
        .map_err(|e| SchemaViolation::new("<root>", format!("not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaViolation::new("<root>", "expected a JSON object"))?;

    let mut out = BTreeMap::new();
    for f in &schema.fields {
        let v = match obj.get(&f.name) {
            None | Some(Value::Null) => {
                if f.required {
                    return Err(SchemaViolation::new(&f.name, "missing"));
                }
                continue;
            }
            Some(v) => v,
        };
        let parsed = match f.kind {
            FieldType::String => v.as_str().map(|s| FieldValue::String(s.to_string())),
            FieldType::Boolean => v.as_bool().map(FieldValue::Boolean),
            FieldType::Integer => integral(v).map(FieldValue::Integer),
            FieldType::StringList => v.as_array().and_then(|items| {
                items
                    .iter()
                    .map(|i| i.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .map(FieldValue::StringList)
            }),
        };
        let parsed = parsed
            .ok_or_else(|| SchemaViolation::new(&f.name, format!("expected {:?}", f.kind)))?;
        out.insert(f.name.clone(), parsed);
    }
    Ok(StructuredOutput(out))
}

fn integral(v: &Value) -> Option<i64> {
    if let Some(i) = v.as_i64() {
        return Some(i);
    }
    let f = v.as_f64()?;
    (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
}

fn strip_fence(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.strip_suffix("```").unwrap_or(rest).trim()
}
