//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nl2milp::gateway::{Gateway, InstanceFixture, ProviderConfig, StubProvider};
use nl2milp::pipeline::ProblemInstance;

pub const HAUS_INSTANCE: &str = include_str!("../../data/instances/haus_toys.json");
pub const HAUS_FIXTURE: &str = include_str!("../../data/fixtures/haus_toys.json");
pub const HAUS_GOLDEN: &str = include_str!("../golden/haus_toys.model.json");

pub fn haus_instance() -> ProblemInstance<f64> {
    serde_json::from_str(HAUS_INSTANCE).unwrap()
}

pub fn haus_fixture() -> InstanceFixture {
    serde_json::from_str(HAUS_FIXTURE).unwrap()
}

pub fn stub_gateway(fixture: InstanceFixture) -> Gateway {
    Gateway::new(StubProvider::new(fixture), ProviderConfig::default()).unwrap()
}

/// An in-memory transcript sink.
#[derive(Clone, Default)]
pub struct Buffer(pub Arc<Mutex<Vec<u8>>>);

impl Buffer {
    pub fn contents(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

impl Write for Buffer {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Request {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }

    pub fn prompt(&self) -> String {
        self.json()["messages"][0]["content"].as_str().unwrap().to_string()
    }
}

type Handler = dyn Fn(&Request, usize) -> (u16, String) + Send + Sync;

/// A minimal chat-completions server on a loopback port. The handler gets
/// each request and its zero-based arrival number.
pub struct FakeServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
    pub peak: Arc<AtomicUsize>,
}

pub fn chat_body(content: &str) -> String {
    serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string()
}

fn read_request(stream: &mut TcpStream) -> Option<Request> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let mut parts = line.split_whitespace();
    let method = parts.next()?.to_string();
    let path = parts.next()?.to_string();
    let mut headers = Vec::new();
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).ok()?;
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        let (k, v) = h.split_once(':')?;
        headers.push((k.trim().to_string(), v.trim().to_string()));
    }
    let len: usize = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(0);
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some(Request {
        method,
        path,
        headers,
        body: String::from_utf8(body).ok()?,
    })
}

impl FakeServer {
    pub fn start(handler: impl Fn(&Request, usize) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let peak = Arc::new(AtomicUsize::new(0));
        let active = Arc::new(AtomicUsize::new(0));
        let handler: Arc<Handler> = Arc::new(handler);
        let (reqs, pk) = (requests.clone(), peak.clone());
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (handler, reqs, pk, active) = (handler.clone(), reqs.clone(), pk.clone(), active.clone());
                std::thread::spawn(move || {
                    let Some(req) = read_request(&mut stream) else { return };
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    pk.fetch_max(now, Ordering::SeqCst);
                    let n = {
                        let mut r = reqs.lock().unwrap();
                        r.push(req.clone());
                        r.len() - 1
                    };
                    let (status, body) = handler(&req, n);
                    active.fetch_sub(1, Ordering::SeqCst);
                    let head = format!(
                        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                        body.len()
                    );
                    let _ = stream.write_all(head.as_bytes());
                    let _ = stream.write_all(body.as_bytes());
                });
            }
        });
        FakeServer { url, requests, peak }
    }

    pub fn count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

pub const TEST_KEY_ENV: &str = "NL2MILP_TEST_API_KEY";

/// Provider settings pointing at `url` with fast retries.
pub fn http_config(url: &str) -> ProviderConfig {
    // Every test sets the same value, so concurrent writes are harmless.
    std::env::set_var(TEST_KEY_ENV, "test-secret");
    ProviderConfig {
        endpoint: url.to_string(),
        credential_env: TEST_KEY_ENV.into(),
        backoff_base_ms: 1,
        retries: 2,
        timeout_s: 5,
        ..ProviderConfig::default()
    }
}
