//! Session messages. One JSON object per text message:
//! `{"type": ..., "seq": n, "body": {...}}`. Over plain TCP each message is a
//! single line; over a web socket each message is one text frame.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use giml_core::engine::{EngineEvent, RenderFrame};
use giml_core::GimlDocument;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub seq: u64,
    #[serde(default)]
    pub body: Value,
}

impl Message {
    pub fn new(kind: &str, body: Value) -> Message {
        Message { kind: kind.to_string(), seq: 0, body }
    }

    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }

    pub fn decode(text: &str) -> Result<Message, String> {
        serde_json::from_str(text.trim()).map_err(|e| format!("undecodable message: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Stop,
    Pause,
}

/// What a client may send.
#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    Hello,
    Input { t_ms: Option<f64>, x: f64, y: f64, valid: bool, key: Option<String> },
    Key { t_ms: Option<f64>, key: String },
    Control(Control),
    Bye,
}

#[derive(Deserialize)]
struct InputBody {
    t_ms: Option<f64>,
    #[serde(default)]
    x: f64,
    #[serde(default)]
    y: f64,
    #[serde(default = "yes")]
    valid: bool,
    key: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
struct KeyBody {
    t_ms: Option<f64>,
    key: String,
}

#[derive(Deserialize)]
struct ControlBody {
    action: String,
}

fn body<T: for<'de> Deserialize<'de>>(m: &Message) -> Result<T, String> {
    let v = if m.body.is_null() { json!({}) } else { m.body.clone() };
    serde_json::from_value(v).map_err(|e| format!("bad `{}` body: {e}", m.kind))
}

impl ClientMessage {
    pub fn from_message(m: &Message) -> Result<ClientMessage, String> {
        match m.kind.as_str() {
            "hello" => Ok(ClientMessage::Hello),
            "bye" => Ok(ClientMessage::Bye),
            "input" => {
                let b: InputBody = body(m)?;
                if !(b.x.is_finite() && b.y.is_finite()) {
                    return Err("input coordinates must be finite".into());
                }
                Ok(ClientMessage::Input { t_ms: b.t_ms, x: b.x, y: b.y, valid: b.valid, key: b.key })
            }
            "key" => {
                let b: KeyBody = body(m)?;
                Ok(ClientMessage::Key { t_ms: b.t_ms, key: b.key })
            }
            "control" => {
                let b: ControlBody = body(m)?;
                match b.action.to_ascii_lowercase().as_str() {
                    "stop" => Ok(ClientMessage::Control(Control::Stop)),
                    "pause" => Ok(ClientMessage::Control(Control::Pause)),
                    other => Err(format!("unknown control action `{other}`")),
                }
            }
            other => Err(format!("unknown message type `{other}`")),
        }
    }
}

pub fn hello(screen: (u32, u32), dwell_ms: u64, tick_ms: u64, seed: u64, clock: &str) -> Message {
    Message::new(
        "hello",
        json!({
            "protocol_version": PROTOCOL_VERSION,
            "screen": { "width": screen.0, "height": screen.1 },
            "dwell_ms": dwell_ms,
            "tick_ms": tick_ms,
            "seed": seed,
            "clock": clock,
        }),
    )
}

pub fn document_summary(doc: &GimlDocument) -> Message {
    let scenes: Vec<Value> = doc
        .scenes
        .iter()
        .map(|s| json!({ "name": s.name, "regions": s.regions.iter().map(|r| r.name.as_str()).collect::<Vec<_>>() }))
        .collect();
    let images: Vec<Value> = doc.images.iter().map(|i| json!({ "name": i.name, "path": i.path })).collect();
    let sounds: Vec<Value> = doc.sounds.iter().map(|s| json!({ "name": s.name, "path": s.path })).collect();
    Message::new(
        "document_summary",
        json!({
            "language": doc.language().code(),
            "default_scene": doc.scenes_header.name_of_default_scene,
            "pause_scene": doc.scenes_header.name_of_pause_scene,
            "scenes": scenes,
            "images": images,
            "sounds": sounds,
        }),
    )
}

pub fn frame(f: &RenderFrame) -> Message {
    Message::new("frame", serde_json::to_value(f).expect("frame serializes"))
}

pub fn event(e: &EngineEvent) -> Message {
    Message::new("event", serde_json::to_value(e).expect("event serializes"))
}

pub fn error(message: impl Into<String>) -> Message {
    Message::new("error", json!({ "message": message.into() }))
}

pub fn bye(reason: &str) -> Message {
    Message::new("bye", json!({ "reason": reason }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_client_messages() {
        let m = Message::decode(r#"{"type":"input","seq":3,"body":{"t_ms":10,"x":1.5,"y":2}}"#).unwrap();
        assert_eq!(
            ClientMessage::from_message(&m).unwrap(),
            ClientMessage::Input { t_ms: Some(10.0), x: 1.5, y: 2.0, valid: true, key: None }
        );
        let m = Message::decode(r#"{"type":"control","body":{"action":"pause"}}"#).unwrap();
        assert_eq!(ClientMessage::from_message(&m).unwrap(), ClientMessage::Control(Control::Pause));
        let m = Message::decode(r#"{"type":"hello"}"#).unwrap();
        assert_eq!(ClientMessage::from_message(&m).unwrap(), ClientMessage::Hello);
    }

    #[test]
    fn rejects_unknown_types_and_bodies() {
        let m = Message::decode(r#"{"type":"teleport"}"#).unwrap();
        assert!(ClientMessage::from_message(&m).unwrap_err().contains("teleport"));
        let m = Message::decode(r#"{"type":"key","body":{}}"#).unwrap();
        assert!(ClientMessage::from_message(&m).is_err());
        assert!(Message::decode("not json").is_err());
    }

    #[test]
    fn encodes_on_one_line() {
        let text = error("a\nb").encode();
        assert!(!text.contains('\n'));
        assert_eq!(Message::decode(&text).unwrap().body["message"], "a\nb");
    }
}
