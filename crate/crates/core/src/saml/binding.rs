//! HTTP parameter encoding: messages travel as base64 of their canonical XML
//! in `SAMLRequest` / `SAMLResponse`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::model::Message;
use super::xml::parse;
use super::SamlError;

pub const PARAM_REQUEST: &str = "SAMLRequest";
pub const PARAM_RESPONSE: &str = "SAMLResponse";

pub fn encode_param(xml: &str) -> String {
    STANDARD.encode(xml.as_bytes())
}

pub fn decode_param(value: &str) -> Result<Message, SamlError> {
    let xml = STANDARD
        .decode(value.trim())
        .map_err(|e| SamlError::Malformed(format!("base64: {e}")))?;
    parse(&xml)
}
