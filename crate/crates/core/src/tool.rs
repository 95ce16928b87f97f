//! Tool descriptors: what a server advertises and what the model sees.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Official,
    Community,
    Custom,
}

/// Structural parameter type, checked before a handler runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    String,
    Integer,
    Number,
    Boolean,
    StringList,
}

impl ParamType {
    fn json_schema(self) -> Value {
        match self {
            ParamType::String => json!({"type": "string"}),
            ParamType::Integer => json!({"type": "integer"}),
            ParamType::Number => json!({"type": "number"}),
            ParamType::Boolean => json!({"type": "boolean"}),
            ParamType::StringList => json!({"type": "array", "items": {"type": "string"}}),
        }
    }

    fn from_json_schema(v: &Value) -> Option<Self> {
        match v.get("type")?.as_str()? {
            "string" => Some(ParamType::String),
            "integer" => Some(ParamType::Integer),
            "number" => Some(ParamType::Number),
            "boolean" => Some(ParamType::Boolean),
            "array" if v.pointer("/items/type").and_then(Value::as_str) == Some("string") => {
                Some(ParamType::StringList)
            }
            _ => None,
        }
    }

    /// Whether `v` structurally conforms to this type.
    pub fn accepts(self, v: &Value) -> bool {
        match self {
            ParamType::String => v.is_string(),
            ParamType::Integer => v.is_i64() || v.is_u64(),
            ParamType::Number => v.is_number(),
            ParamType::Boolean => v.is_boolean(),
            ParamType::StringList => v
                .as_array()
                .is_some_and(|items| items.iter().all(Value::is_string)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamType::String => "string",
            ParamType::Integer => "integer",
            ParamType::Number => "number",
            ParamType::Boolean => "boolean",
            ParamType::StringList => "string list",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ParamType,
    pub required: bool,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximum: Option<i64>,
}

impl ParamSpec {
    pub fn required(name: &str, kind: ParamType, description: &str) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind,
            required: true,
            description: description.to_string(),
            minimum: None,
            maximum: None,
        }
    }

    pub fn optional(name: &str, kind: ParamType, description: &str) -> Self {
        ParamSpec {
            required: false,
            ..ParamSpec::required(name, kind, description)
        }
    }

    /// Inclusive bounds for an integer parameter.
    pub fn range(mut self, min: i64, max: i64) -> Self {
        self.minimum = Some(min);
        self.maximum = Some(max);
        self
    }
}

/// A tool as advertised by its owning server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub server: String,
    pub name: String,
    pub description: String,
    pub params: Vec<ParamSpec>,
    pub origin: Origin,
}

impl ToolDescriptor {
    pub fn new(server: &str, name: &str, description: &str, origin: Origin) -> Self {
        ToolDescriptor {
            server: server.to_string(),
            name: name.to_string(),
            description: description.to_string(),
            params: Vec::new(),
            origin,
        }
    }

    pub fn param(mut self, p: ParamSpec) -> Self {
        self.params.push(p);
        self
    }

    /// Appends a usage hint to the description.
    pub fn with_hint(mut self, hint: &str) -> Self {
        if !hint.is_empty() {
            self.description.push(' ');
            self.description.push_str(hint);
        }
        self
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.server, self.name)
    }

    pub fn param_spec(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// JSON-Schema object describing the arguments.
    pub fn input_schema(&self) -> Value {
        let mut props = Map::new();
        for p in &self.params {
            let mut schema = p.kind.json_schema();
            schema["description"] = Value::String(p.description.clone());
            if let Some(m) = p.minimum {
                schema["minimum"] = m.into();
            }
            if let Some(m) = p.maximum {
                schema["maximum"] = m.into();
            }
            props.insert(p.name.clone(), schema);
        }
        let required: Vec<Value> = self
            .params
            .iter()
            .filter(|p| p.required)
            .map(|p| Value::String(p.name.clone()))
            .collect();
        json!({"type": "object", "properties": props, "required": required})
    }

    /// Wire form used by `tools/list`.
    pub fn to_wire(&self) -> Value {
        json!({
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema(),
            "annotations": {"server": self.server, "origin": self.origin},
        })
    }

    /// Inverse of [`ToolDescriptor::to_wire`].
    pub fn from_wire(v: &Value) -> Result<Self, String> {
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or("descriptor missing name")?;
        let description = v
            .get("description")
            .and_then(Value::as_str)
            .ok_or("descriptor missing description")?;
        let server = v
            .pointer("/annotations/server")
            .and_then(Value::as_str)
            .ok_or("descriptor missing annotations.server")?;
        let origin: Origin = v
            .pointer("/annotations/origin")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| e.to_string())?
            .ok_or("descriptor missing annotations.origin")?;
        let schema = v
            .get("inputSchema")
            .ok_or("descriptor missing inputSchema")?;
        let required: Vec<&str> = schema
            .get("required")
            .and_then(Value::as_array)
            .map(|r| r.iter().filter_map(Value::as_str).collect())
            .unwrap_or_default();
        let mut params = Vec::new();
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            for (pname, pschema) in props {
                let kind = ParamType::from_json_schema(pschema)
                    .ok_or_else(|| format!("unsupported schema for parameter {pname}"))?;
                params.push(ParamSpec {
                    name: pname.clone(),
                    kind,
                    required: required.contains(&pname.as_str()),
                    description: pschema
                        .get("description")
                        .and_then(Value::as_str)
                        .unwrap_or_default()
                        .to_string(),
                    minimum: pschema.get("minimum").and_then(Value::as_i64),
                    maximum: pschema.get("maximum").and_then(Value::as_i64),
                });
            }
        }
        Ok(ToolDescriptor {
            server: server.to_string(),
            name: name.to_string(),
            description: description.to_string(),
            params,
            origin,
        })
    }

    /// Structural validation of call arguments.
    pub fn validate_args(&self, args: &Map<String, Value>) -> Result<(), (String, String)> {
        for p in &self.params {
            match args.get(&p.name) {
                None | Some(Value::Null) if p.required => {
                    return Err((p.name.clone(), "required parameter missing".into()));
                }
                Some(v) if !v.is_null() && !p.kind.accepts(v) => {
                    return Err((p.name.clone(), format!("expected {}", p.kind.name())));
                }
                Some(v) if v.is_number() => {
                    let n = v.as_f64().unwrap_or(0.0);
                    if let Some(lo) = p.minimum.filter(|&lo| n < lo as f64) {
                        return Err((p.name.clone(), format!("must be at least {lo}")));
                    }
                    if let Some(hi) = p.maximum.filter(|&hi| n > hi as f64) {
                        return Err((p.name.clone(), format!("must be at most {hi}")));
                    }
                }
                _ => {}
            }
        }
        if let Some(unknown) = args.keys().find(|k| self.param_spec(k).is_none()) {
            return Err((unknown.clone(), "unknown parameter".into()));
        }
        Ok(())
    }
}
