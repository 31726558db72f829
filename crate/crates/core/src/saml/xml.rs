//! Canonical XML for the message dialect.
//!
//! The serializer emits a fixed element and attribute order, UTF-8, no
//! insignificant whitespace and whole-second UTC timestamps. The parser
//! matches local names only and does not care about element order.

use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::model::{Assertion, AuthnRequest, EncryptedAssertion, Message, SsoResponse};
use super::SamlError;
use crate::kex::SealedPayload;
use crate::time::Timestamp;

pub const NS_ASSERTION: &str = "urn:oasis:names:tc:SAML:2.0:assertion";
pub const NS_PROTOCOL: &str = "urn:oasis:names:tc:SAML:2.0:protocol";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

impl Assertion {
    pub fn to_xml(&self) -> String {
        let mut x = String::with_capacity(768);
        write!(
            x,
            r#"<saml:Assertion xmlns:saml="{NS_ASSERTION}" ID="{}" IssueInstant="{}" Version="2.0">"#,
            escape(&self.id),
            self.issue_instant
        )
        .unwrap();
        write!(x, "<saml:Issuer>{}</saml:Issuer>", escape(&self.issuer)).unwrap();
        write!(
            x,
            "<saml:Subject><saml:NameID>{}</saml:NameID></saml:Subject>",
            escape(&self.subject)
        )
        .unwrap();
        write!(
            x,
            r#"<saml:Conditions NotBefore="{}" NotOnOrAfter="{}"><saml:AudienceRestriction><saml:Audience>{}</saml:Audience></saml:AudienceRestriction></saml:Conditions>"#,
            self.not_before,
            self.not_on_or_after,
            escape(&self.audience)
        )
        .unwrap();
        write!(
            x,
            r#"<saml:AuthnStatement AuthnInstant="{}"><saml:AuthnContext><saml:AuthnContextClassRef>{}</saml:AuthnContextClassRef></saml:AuthnContext></saml:AuthnStatement>"#,
            self.issue_instant,
            escape(&self.authn_method)
        )
        .unwrap();
        x.push_str("</saml:Assertion>");
        x
    }
}

impl AuthnRequest {
    pub fn to_xml(&self) -> String {
        format!(
            r#"<samlp:AuthnRequest xmlns:samlp="{NS_PROTOCOL}" xmlns:saml="{NS_ASSERTION}" ID="{}" Version="2.0" IssueInstant="{}" AssertionConsumerServiceURL="{}"><saml:Issuer>{}</saml:Issuer></samlp:AuthnRequest>"#,
            escape(&self.id),
            self.issue_instant,
            escape(&self.acs_url),
            escape(&self.sp_entity_id)
        )
    }
}

impl SsoResponse {
    pub fn to_xml(&self) -> String {
        format!(
            r#"<samlp:Response xmlns:samlp="{NS_PROTOCOL}" xmlns:saml="{NS_ASSERTION}" Version="2.0" InResponseTo="{}"><saml:Issuer>{}</saml:Issuer><saml:EncryptedAssertion>{}</saml:EncryptedAssertion></samlp:Response>"#,
            escape(&self.in_response_to),
            escape(&self.issuer),
            self.encrypted_assertion.sealed.to_wire()
        )
    }
}

impl Message {
    pub fn to_xml(&self) -> String {
        match self {
            Message::Assertion(a) => a.to_xml(),
            Message::AuthnRequest(r) => r.to_xml(),
            Message::Response(r) => r.to_xml(),
        }
    }
}

pub fn serialize(msg: &Message) -> Vec<u8> {
    msg.to_xml().into_bytes()
}

/// First descendant (document order) whose path of local names below
/// `node` is exactly `path`.
fn find<'a, 'i>(node: Node<'a, 'i>, path: &[&str]) -> Option<Node<'a, 'i>> {
    let Some((first, rest)) = path.split_first() else {
        return Some(node);
    };
    node.children()
        .filter(|c| c.is_element() && c.tag_name().name() == *first)
        .find_map(|c| find(c, rest))
}

fn text(root: Node, path: &[&str], field: &'static str) -> Result<String, SamlError> {
    let node = find(root, path).ok_or(SamlError::MissingField(field))?;
    Ok(node.text().unwrap_or_default().to_owned())
}

fn attr<'a>(node: Node<'a, '_>, name: &str, field: &'static str) -> Result<&'a str, SamlError> {
    node.attribute(name).ok_or(SamlError::MissingField(field))
}

fn timestamp(value: &str, field: &'static str) -> Result<Timestamp, SamlError> {
    Timestamp::parse_rfc3339(value).map_err(|_| SamlError::BadTimestamp {
        field,
        value: value.to_owned(),
    })
}

fn parse_assertion(root: Node) -> Result<Assertion, SamlError> {
    let id = attr(root, "ID", "ID")?.to_owned();
    let issue_instant = timestamp(attr(root, "IssueInstant", "IssueInstant")?, "IssueInstant")?;
    let issuer = text(root, &["Issuer"], "Issuer")?;
    let subject = text(root, &["Subject", "NameID"], "Subject/NameID")?;
    let conditions = find(root, &["Conditions"]).ok_or(SamlError::MissingField("Conditions"))?;
    let not_before = timestamp(attr(conditions, "NotBefore", "NotBefore")?, "NotBefore")?;
    let not_on_or_after = timestamp(
        attr(conditions, "NotOnOrAfter", "NotOnOrAfter")?,
        "NotOnOrAfter",
    )?;
    let audience = text(conditions, &["AudienceRestriction", "Audience"], "Audience")?;
    let authn_method = text(
        root,
        &["AuthnStatement", "AuthnContext", "AuthnContextClassRef"],
        "AuthnContextClassRef",
    )?;
    let a = Assertion {
        id,
        issuer,
        subject,
        issue_instant,
        not_before,
        not_on_or_after,
        audience,
        authn_method,
    };
    if !a.window_is_consistent() {
        return Err(SamlError::InvalidField {
            field: "Conditions",
            reason: "require NotBefore <= IssueInstant < NotOnOrAfter".into(),
        });
    }
    Ok(a)
}

fn parse_authn_request(root: Node) -> Result<AuthnRequest, SamlError> {
    Ok(AuthnRequest {
        id: attr(root, "ID", "ID")?.to_owned(),
        issue_instant: timestamp(attr(root, "IssueInstant", "IssueInstant")?, "IssueInstant")?,
        acs_url: attr(
            root,
            "AssertionConsumerServiceURL",
            "AssertionConsumerServiceURL",
        )?
        .to_owned(),
        sp_entity_id: text(root, &["Issuer"], "Issuer")?,
    })
}

fn parse_response(root: Node) -> Result<SsoResponse, SamlError> {
    let wire = text(root, &["EncryptedAssertion"], "EncryptedAssertion")?;
    let sealed = SealedPayload::from_wire(&wire).map_err(|e| SamlError::InvalidField {
        field: "EncryptedAssertion",
        reason: e.to_string(),
    })?;
    Ok(SsoResponse {
        in_response_to: attr(root, "InResponseTo", "InResponseTo")?.to_owned(),
        issuer: text(root, &["Issuer"], "Issuer")?,
        encrypted_assertion: EncryptedAssertion { sealed },
    })
}

pub fn parse(xml: &[u8]) -> Result<Message, SamlError> {
    let text = std::str::from_utf8(xml).map_err(|e| SamlError::Malformed(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| SamlError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    match root.tag_name().name() {
        "Assertion" => parse_assertion(root).map(Message::Assertion),
        "AuthnRequest" => parse_authn_request(root).map(Message::AuthnRequest),
        "Response" => parse_response(root).map(Message::Response),
        other => Err(SamlError::UnknownRoot(other.to_owned())),
    }
}

impl Assertion {
    pub fn from_xml(xml: &[u8]) -> Result<Self, SamlError> {
        match parse(xml)? {
            Message::Assertion(a) => Ok(a),
            _ => Err(SamlError::UnexpectedMessage("Assertion")),
        }
    }
}

impl AuthnRequest {
    pub fn from_xml(xml: &[u8]) -> Result<Self, SamlError> {
        match parse(xml)? {
            Message::AuthnRequest(r) => Ok(r),
            _ => Err(SamlError::UnexpectedMessage("AuthnRequest")),
        }
    }
}

impl SsoResponse {
    pub fn from_xml(xml: &[u8]) -> Result<Self, SamlError> {
        match parse(xml)? {
            Message::Response(r) => Ok(r),
            _ => Err(SamlError::UnexpectedMessage("Response")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saml::build_assertion;
    use rand::SeedableRng;

    fn assertion() -> Assertion {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        build_assertion(
            "https://idp.example",
            "alice",
            "https://sp.example",
            Timestamp(1_700_000_000),
            300,
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn audience_in_conditions() {
        let xml = assertion().to_xml();
        assert!(xml.contains(
            "<saml:AudienceRestriction><saml:Audience>https://sp.example</saml:Audience></saml:AudienceRestriction>"
        ));
        assert!(xml.contains(r#"NotOnOrAfter="2023-11-14T22:18:20Z""#));
    }

    #[test]
    fn escaping_round_trips() {
        let mut a = assertion();
        a.subject = r#"o'brien & <co> "quoted""#.into();
        assert_eq!(Assertion::from_xml(a.to_xml().as_bytes()).unwrap(), a);
    }

    #[test]
    fn reordered_elements_parse_the_same() {
        let a = assertion();
        let xml = format!(
            r#"<saml:Assertion xmlns:saml="{NS_ASSERTION}" Version="2.0" IssueInstant="{t}" ID="{id}">
                 <saml:AuthnStatement AuthnInstant="{t}"><saml:AuthnContext><saml:AuthnContextClassRef>PIN-PAD</saml:AuthnContextClassRef></saml:AuthnContext></saml:AuthnStatement>
                 <saml:Conditions NotOnOrAfter="{end}" NotBefore="{t}"><saml:AudienceRestriction><saml:Audience>https://sp.example</saml:Audience></saml:AudienceRestriction></saml:Conditions>
                 <saml:Subject><saml:NameID>alice</saml:NameID></saml:Subject>
                 <saml:Issuer>https://idp.example</saml:Issuer>
               </saml:Assertion>"#,
            t = a.issue_instant,
            end = a.not_on_or_after,
            id = a.id
        );
        assert_eq!(Assertion::from_xml(xml.as_bytes()).unwrap(), a);
    }

    #[test]
    fn truncated_is_malformed() {
        let xml = assertion().to_xml();
        for cut in [1, 10, xml.len() / 2, xml.len() - 1] {
            assert!(
                matches!(parse(&xml.as_bytes()[..cut]), Err(SamlError::Malformed(_))),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse(b"<Logout/>"),
            Err(SamlError::UnknownRoot(r)) if r == "Logout"
        ));
        let xml = assertion()
            .to_xml()
            .replace("<saml:Issuer>https://idp.example</saml:Issuer>", "");
        assert_eq!(
            parse(xml.as_bytes()),
            Err(SamlError::MissingField("Issuer"))
        );
        let xml = assertion()
            .to_xml()
            .replace(r#"NotBefore="2023-11-14T22:13:20Z""#, r#"NotBefore="soon""#);
        assert!(matches!(
            parse(xml.as_bytes()),
            Err(SamlError::BadTimestamp {
                field: "NotBefore",
                ..
            })
        ));
        assert!(matches!(parse(b"\xff\xfe"), Err(SamlError::Malformed(_))));
    }

    #[test]
    fn inconsistent_window_rejected() {
        let mut a = assertion();
        a.not_before = a.issue_instant.plus(1);
        assert!(matches!(
            parse(a.to_xml().as_bytes()),
            Err(SamlError::InvalidField {
                field: "Conditions",
                ..
            })
        ));
    }

    #[test]
    fn request_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let r = AuthnRequest::new(
            "https://sp.example",
            "http://127.0.0.1:1/acs?x=1&y=2",
            Timestamp(5),
            &mut rng,
        );
        assert_eq!(AuthnRequest::from_xml(r.to_xml().as_bytes()).unwrap(), r);
        assert_eq!(
            SsoResponse::from_xml(r.to_xml().as_bytes()),
            Err(SamlError::UnexpectedMessage("Response"))
        );
    }
}
