//! Live chat-completion backend against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use arground_core::generation::{Backend, GenerationError, GenerationRequest, HttpBackend, HttpConfig};
use serde_json::Value;

struct Server {
    url: String,
    bodies: Arc<Mutex<Vec<Value>>>,
}

/// Serves the canned `(status, body)` responses in order, one per connection.
fn serve(responses: Vec<(u16, String)>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let seen = bodies.clone();
    thread::spawn(move || {
        for (status, body) in responses {
            let Ok((mut stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut content_length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; content_length];
            reader.read_exact(&mut buf).unwrap();
            seen.lock()
                .unwrap()
                .push(serde_json::from_slice(&buf).unwrap_or(Value::Null));
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    Server { url, bodies }
}

fn completion(contents: &[&str]) -> String {
    let choices: Vec<Value> = contents
        .iter()
        .map(|c| serde_json::json!({"message": {"role": "assistant", "content": c}}))
        .collect();
    serde_json::json!({"choices": choices}).to_string()
}

fn backend(url: &str) -> HttpBackend {
    HttpBackend::new(HttpConfig {
        base_url: url.to_string(),
        api_key: Some("secret".into()),
        model: "test-model".into(),
        timeout: Duration::from_secs(5),
        max_retries: 3,
        retry_backoff: Duration::from_millis(5),
    })
    .unwrap()
}

#[test]
fn retries_transient_failures() {
    let server = serve(vec![
        (500, "{}".into()),
        (429, "{}".into()),
        (200, completion(&["{\"a\": \"1\"}", "{\"a\": \"2\"}"])),
    ]);
    let request = GenerationRequest::new("prompt").with_sampling(2, 0.8);
    let record = backend(&server.url).generate(&request).unwrap();
    assert_eq!(record.outputs, vec!["{\"a\": \"1\"}", "{\"a\": \"2\"}"]);
    let bodies = server.bodies.lock().unwrap();
    assert_eq!(bodies.len(), 3);
    assert_eq!(bodies[2]["model"], "test-model");
    assert_eq!(bodies[2]["n"], 2);
    assert_eq!(bodies[2]["temperature"], 0.8);
    assert_eq!(bodies[2]["messages"][0]["role"], "user");
    assert_eq!(bodies[2]["messages"][0]["content"], "prompt");
}

#[test]
fn auth_failure_is_not_retried() {
    let server = serve(vec![(401, "{}".into()), (200, completion(&["x"]))]);
    let err = backend(&server.url).generate(&GenerationRequest::new("p")).unwrap_err();
    assert!(matches!(err, GenerationError::Auth(_)), "{err:?}");
    assert_eq!(server.bodies.lock().unwrap().len(), 1);
}

#[test]
fn gives_up_after_retry_limit() {
    let server = serve(vec![(503, "{}".into()); 4]);
    let err = backend(&server.url).generate(&GenerationRequest::new("p")).unwrap_err();
    assert!(matches!(err, GenerationError::Backend(_)), "{err:?}");
    assert_eq!(server.bodies.lock().unwrap().len(), 4);
}

#[test]
fn tops_up_when_server_ignores_n() {
    let server = serve(vec![(200, completion(&["one"])), (200, completion(&["two", "three"]))]);
    let request = GenerationRequest::new("p").with_sampling(3, 1.0);
    let record = backend(&server.url).generate(&request).unwrap();
    assert_eq!(record.outputs, vec!["one", "two", "three"]);
    assert_eq!(server.bodies.lock().unwrap()[1]["n"], 2);
}

#[test]
fn unreachable_server_is_backend_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let err = backend(&url).generate(&GenerationRequest::new("p")).unwrap_err();
    assert!(matches!(err, GenerationError::Backend(_)), "{err:?}");
}
