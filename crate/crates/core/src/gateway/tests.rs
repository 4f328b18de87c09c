use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::*;

fn reply(text: &str) -> ChatMessage {
    ChatMessage::assistant(text)
}

#[test]
fn extracts_last_tagged_fence() {
    let m = reply("Here:\n```verilog\nmodule a; endmodule\n```\nand better:\n```systemverilog\nmodule b;\nendmodule\n```\nDone.");
    let e = extract_code(&m).unwrap();
    assert_eq!(e.code, "module b;\nendmodule\n");
    assert_eq!(e.method, ExtractionMethod::TaggedFence);
}

#[test]
fn falls_back_to_untagged_fence_with_module() {
    let m = reply("```text\nstate table\n```\n```\nmodule top_module(input a);\nendmodule\n```\n```\nnotes\n```");
    let e = extract_code(&m).unwrap();
    assert_eq!(e.method, ExtractionMethod::ModuleFence);
    assert!(e.code.starts_with("module top_module"));
}

#[test]
fn falls_back_to_bare_module_span() {
    let m = reply("Sure. module top_module(input a, output b);\n assign b = a;\nendmodule\nHope this helps.");
    let e = extract_code(&m).unwrap();
    assert_eq!(e.method, ExtractionMethod::BareModule);
    assert_eq!(e.code, "module top_module(input a, output b);\n assign b = a;\nendmodule\n");
}

#[test]
fn no_code_is_extraction_failure() {
    assert_eq!(extract_code(&reply("I cannot help with modules of that kind.")), Err(GatewayError::ExtractionFailure));
    assert_eq!(extract_code(&reply("The submodule is fine.")), Err(GatewayError::ExtractionFailure));
}

#[test]
fn unterminated_fence_is_still_extracted() {
    let e = extract_code(&reply("```systemverilog\nmodule m;\nendmodule")).unwrap();
    assert_eq!(e.code, "module m;\nendmodule\n");
}

#[test]
fn extraction_is_idempotent_when_rewrapped() {
    for text in [
        "```systemverilog\nmodule m;\nendmodule\n\n\n```",
        "x module m; endmodule y",
        "```\n  module m;\n  endmodule\n```",
    ] {
        let once = extract_code(&reply(text)).unwrap().code;
        let twice = extract_code(&reply(&format!("```systemverilog\n{once}```"))).unwrap().code;
        assert_eq!(once, twice);
    }
}

fn transcript(id: &str, replies: &[&str]) -> Transcript {
    let mut t = Transcript::new(id, "recorded", "model-x");
    for r in replies {
        t.messages.push(ChatMessage::user("q"));
        t.messages.push(reply(r));
    }
    t
}

#[test]
fn replay_round_trip_and_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript("Fsm1/base/trial-0", &["first", "second"]);
    save_transcript(&t, dir.path()).unwrap();
    assert!(dir.path().join("Fsm1__base__trial-0.json").is_file());

    let src = load_transcripts(dir.path()).unwrap();
    assert_eq!(src.transcripts["Fsm1/base/trial-0"], t);

    let cfg = SessionConfig {
        provider: ProviderConfig::Replay { dir: dir.path().into() },
        session_id: "Fsm1/base/trial-0".into(),
    };
    let mut s = open_session(&cfg).unwrap();
    assert_eq!(s.send("a").unwrap().content, "first");
    assert_eq!(s.send("b").unwrap().content, "second");
    assert_eq!(s.transcript().messages.len(), 4);
    assert!(matches!(s.send("c"), Err(GatewayError::ReplayExhausted(_))));

    let mut other = src.session("Fsm1/base/trial-0");
    assert_eq!(other.send("z").unwrap().content, "first");
}

#[test]
fn replay_sessions_are_independent() {
    let dir = tempfile::tempdir().unwrap();
    save_transcript(&transcript("a", &["a1", "a2"]), dir.path()).unwrap();
    save_transcript(&transcript("b", &["b1"]), dir.path()).unwrap();
    let open = |id: &str| {
        open_session(&SessionConfig {
            provider: ProviderConfig::Replay { dir: dir.path().into() },
            session_id: id.into(),
        })
        .unwrap()
    };
    let (mut a, mut b, mut a2) = (open("a"), open("b"), open("a"));
    assert_eq!(a.send("x").unwrap().content, "a1");
    assert_eq!(b.send("y").unwrap().content, "b1");
    assert_eq!(a2.send("w").unwrap().content, "a1");
    assert_eq!(a.send("x").unwrap().content, "a2");
    assert!(b.transcript().messages.iter().all(|m| m.content != "x" && m.content != "a1"));
}

#[test]
fn replay_missing_dir_and_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let cfg = SessionConfig {
        provider: ProviderConfig::Replay { dir: missing.clone() },
        session_id: "s".into(),
    };
    assert!(matches!(open_session(&cfg), Err(GatewayError::TranscriptNotFound(_))));
    assert!(matches!(load_transcripts(&missing), Err(GatewayError::TranscriptNotFound(_))));

    let empty = load_transcripts(dir.path()).unwrap();
    assert!(matches!(empty.session("s").send("hi"), Err(GatewayError::ReplayExhausted(_))));
}

#[test]
fn corrupt_transcript_is_format_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"session_id\": 3").unwrap();
    match load_transcripts(dir.path()) {
        Err(GatewayError::FormatError { path, .. }) => assert!(path.ends_with("bad.json")),
        other => panic!("{other:?}"),
    }
    let mut t = transcript("x", &["r"]);
    t.messages.swap(0, 1);
    std::fs::write(dir.path().join("bad.json"), serde_json::to_string(&t).unwrap()).unwrap();
    assert!(matches!(load_transcripts(dir.path()), Err(GatewayError::FormatError { .. })));
}

#[test]
fn transcript_role_check() {
    let mut t = transcript("x", &["r"]);
    assert!(t.check().is_ok());
    t.messages.insert(
        0,
        ChatMessage {
            role: Role::System,
            content: "sys".into(),
        },
    );
    assert!(t.check().is_ok());
    t.messages.push(reply("again"));
    assert!(t.check().is_err());
}

type Requests = Arc<Mutex<Vec<(String, String)>>>;

/// Serves one scripted `(status, body)` per connection and records request bodies.
fn mock_server(responses: Vec<(u16, String)>) -> (String, Requests) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for (status, body) in responses {
            let Ok((mut stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = String::new();
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push_str(&line);
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push((headers, String::from_utf8(buf).unwrap()));
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(resp.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn live_cfg(url: &str, key_env: &str) -> LiveHttpConfig {
    LiveHttpConfig {
        endpoint: url.into(),
        model: "test-model".into(),
        api_key_env: key_env.into(),
        temperature: None,
        max_tokens: 256,
        timeout_secs: 10,
        max_retries: 2,
        api: ApiFlavor::ChatCompletions,
        requests_per_minute: 6000,
        backoff_ms: 1,
        system_prompt: None,
    }
}

fn ok_body(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

#[test]
fn live_missing_credential() {
    let cfg = live_cfg("http://127.0.0.1:9/", "FSMSMITH_TEST_UNSET_KEY");
    assert!(matches!(
        LiveSession::open(&cfg, "s"),
        Err(GatewayError::MissingCredential(v)) if v == "FSMSMITH_TEST_UNSET_KEY"
    ));
}

#[test]
fn live_request_shape_and_retry_on_server_error() {
    std::env::set_var("FSMSMITH_TEST_KEY_A", "secret-a");
    let (url, seen) = mock_server(vec![(503, "{}".into()), (200, ok_body("```systemverilog\nmodule m;\nendmodule\n```"))]);
    let mut s = LiveSession::open(&live_cfg(&url, "FSMSMITH_TEST_KEY_A"), "live-1").unwrap();
    let r = s.send("hello").unwrap();
    assert!(r.content.contains("module m;"));
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    assert!(seen[1].0.to_ascii_lowercase().contains("authorization: bearer secret-a"));
    let body: serde_json::Value = serde_json::from_str(&seen[1].1).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "hello");
    assert!(body.get("temperature").is_none());
    assert_eq!(s.transcript().meta["temperature"], "provider-default");
    assert_eq!(s.transcript().messages.len(), 2);
}

#[test]
fn live_client_error_is_not_retried() {
    std::env::set_var("FSMSMITH_TEST_KEY_B", "k");
    let (url, seen) = mock_server(vec![(400, "{\"error\":\"bad\"}".into()), (200, ok_body("late"))]);
    let mut s = LiveSession::open(&live_cfg(&url, "FSMSMITH_TEST_KEY_B"), "live-2").unwrap();
    match s.send("x") {
        Err(GatewayError::ProviderError { status, body }) => {
            assert_eq!(status, 400);
            assert!(body.contains("bad"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn live_retries_exhausted() {
    std::env::set_var("FSMSMITH_TEST_KEY_C", "k");
    let (url, seen) = mock_server(vec![(500, "a".into()), (429, "b".into()), (502, "c".into())]);
    let mut s = LiveSession::open(&live_cfg(&url, "FSMSMITH_TEST_KEY_C"), "live-3").unwrap();
    assert!(matches!(s.send("x"), Err(GatewayError::ProviderError { status: 502, .. })));
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn live_connection_failure_is_transport_error() {
    std::env::set_var("FSMSMITH_TEST_KEY_D", "k");
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = live_cfg(&format!("http://127.0.0.1:{port}/"), "FSMSMITH_TEST_KEY_D");
    cfg.max_retries = 1;
    let mut s = LiveSession::open(&cfg, "live-4").unwrap();
    assert!(matches!(s.send("x"), Err(GatewayError::TransportError(_))));
}

#[test]
fn anthropic_flavor_headers_and_reply() {
    std::env::set_var("FSMSMITH_TEST_KEY_E", "ant-key");
    let body = serde_json::json!({"content": [{"type": "text", "text": "hi "}, {"type": "text", "text": "there"}]});
    let (url, seen) = mock_server(vec![(200, body.to_string())]);
    let mut cfg = live_cfg(&url, "FSMSMITH_TEST_KEY_E");
    cfg.api = ApiFlavor::AnthropicMessages;
    cfg.temperature = Some(0.2);
    cfg.system_prompt = Some("be terse".into());
    let mut s = LiveSession::open(&cfg, "live-5").unwrap();
    assert_eq!(s.send("q").unwrap().content, "hi there");
    let seen = seen.lock().unwrap();
    let headers = seen[0].0.to_ascii_lowercase();
    assert!(headers.contains("x-api-key: ant-key"));
    assert!(headers.contains("anthropic-version"));
    let req: serde_json::Value = serde_json::from_str(&seen[0].1).unwrap();
    assert_eq!(req["system"], "be terse");
    assert_eq!(req["temperature"], 0.2);
    assert_eq!(req["messages"].as_array().unwrap().len(), 1);
    assert_eq!(s.transcript().messages[0].role, Role::System);
}

#[test]
fn token_bucket_limits_concurrent_acquisition() {
    let limiter = Arc::new(RateLimiter::new(600));
    // Drain the burst, then ten more must take about one second at 10/s.
    for _ in 0..600 {
        limiter.acquire();
    }
    let start = Instant::now();
    let handles: Vec<_> = (0..5)
        .map(|_| {
            let l = limiter.clone();
            std::thread::spawn(move || {
                l.acquire();
                l.acquire();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed > 0.8, "{elapsed}");
    assert!(elapsed < 3.0, "{elapsed}");
}

#[test]
fn limiter_registry_is_per_endpoint() {
    let a = limiter_for("http://a.example/", 5);
    let b = limiter_for("http://a.example/", 99);
    let c = limiter_for("http://c.example/", 5);
    assert!(Arc::ptr_eq(&a, &b));
    assert!(!Arc::ptr_eq(&a, &c));
}
