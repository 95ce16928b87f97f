//! `s3` server: object access on the blob store.

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_faas::BlobUri;
use agentx_mcp::ToolResult;

use crate::{handler, str_arg, Tool, ToolError, ToolpackConfig};

fn uri(
    args: &serde_json::Map<String, serde_json::Value>,
    name: &str,
) -> Result<BlobUri, ToolError> {
    str_arg(args, name)?
        .parse()
        .map_err(|e: agentx_faas::BlobError| ToolError::InvalidArgument(e.to_string()))
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let (b1, b2, b3) = (cfg.blobs.clone(), cfg.blobs.clone(), cfg.blobs.clone());
    let put = handler(move |_ctx, args| {
        let u = uri(args, "uri")?;
        let content = str_arg(args, "content")?;
        b1.put(&u, content.as_bytes())?;
        Ok(
            ToolResult::ok(format!("Wrote {} bytes to {u}", content.len()))
                .with_uris(vec![u.to_string()]),
        )
    });
    let get = handler(move |_ctx, args| {
        let u = uri(args, "uri")?;
        Ok(ToolResult::ok(
            String::from_utf8_lossy(&b2.get(&u)?).into_owned(),
        ))
    });
    let list = handler(move |_ctx, args| {
        let u = uri(args, "prefix")?;
        let keys = b3.list(&u.bucket, &u.key)?;
        Ok(ToolResult::ok(if keys.is_empty() {
            format!("No objects under {u}")
        } else {
            keys.iter()
                .map(|k| format!("s3://{}/{k}", u.bucket))
                .collect::<Vec<_>>()
                .join("\n")
        }))
    });
    vec![
        Tool {
            descriptor: ToolDescriptor::new(
                "s3",
                "put_object",
                "Write text to an S3 object.",
                Origin::Custom,
            )
            .param(ParamSpec::required(
                "uri",
                ParamType::String,
                "Object URI, e.g. s3://bucket/key.txt.",
            ))
            .param(ParamSpec::required(
                "content",
                ParamType::String,
                "Text to store.",
            )),
            handler: put,
            exclusive: false,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "s3",
                "get_object",
                "Read an S3 object as text.",
                Origin::Custom,
            )
            .param(ParamSpec::required("uri", ParamType::String, "Object URI.")),
            handler: get,
            exclusive: false,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "s3",
                "list_objects",
                "List the object URIs under an S3 prefix.",
                Origin::Custom,
            )
            .param(ParamSpec::required(
                "prefix",
                ParamType::String,
                "Prefix URI, e.g. s3://bucket/agent/.",
            )),
            handler: list,
            exclusive: false,
        },
    ]
}
