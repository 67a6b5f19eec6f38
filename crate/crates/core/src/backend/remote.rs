//! OpenAI-compatible chat-completion client.
//!
//! Requests carry the model id and a single user message; decoding parameters
//! from the config are merged verbatim into the request body. The bearer
//! token comes from `SHUFFLEVAL_API_KEY`, the endpoint from the config,
//! `SHUFFLEVAL_ENDPOINT`, or the built-in default, in that order.

use std::time::Duration;

use super::{BackendConfig, BackendError, CompletionBackend, CompletionRequest};

pub const API_KEY_ENV: &str = "SHUFFLEVAL_API_KEY";
pub const ENDPOINT_ENV: &str = "SHUFFLEVAL_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

pub struct RemoteChat {
    client: reqwest::blocking::Client,
    url: String,
    api_key: String,
}

impl RemoteChat {
    pub fn from_config(cfg: &BackendConfig) -> Result<Self, BackendError> {
        let api_key =
            std::env::var(API_KEY_ENV).map_err(|_| BackendError::MissingCredentials(API_KEY_ENV))?;
        let endpoint = if !cfg.endpoint.is_empty() {
            cfg.endpoint.clone()
        } else {
            std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string())
        };
        let url = normalize_endpoint(&endpoint);
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| BackendError::InvalidConfig(e.to_string()))?;
        Ok(RemoteChat {
            client,
            url,
            api_key,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

/// Append `/chat/completions` unless the endpoint already names the route.
fn normalize_endpoint(endpoint: &str) -> String {
    let trimmed = endpoint.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        trimmed.to_string()
    } else {
        format!("{trimmed}/chat/completions")
    }
}

/// Build the request body: model + one user message, decoding parameters on top.
pub fn request_body(request: &CompletionRequest<'_>) -> serde_json::Value {
    let mut body = serde_json::json!({
        "model": request.model_id,
        "messages": [{"role": "user", "content": request.prompt}],
    });
    let obj = body.as_object_mut().expect("body is an object");
    for (k, v) in request.params {
        obj.insert(k.clone(), v.clone());
    }
    body
}

/// Pull the assistant text out of a chat-completion response body.
pub fn parse_reply(body: &str) -> Result<String, BackendError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| BackendError::MalformedResponse(format!("invalid JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| {
            BackendError::MalformedResponse(
                "response lacks choices[0].message.content".to_string(),
            )
        })
}

impl CompletionBackend for RemoteChat {
    fn id(&self) -> &'static str {
        "remote-chat"
    }

    fn is_remote(&self) -> bool {
        true
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let body = request_body(request);
        let response = self
            .client
            .post(&self.url)
            .bearer_auth(&self.api_key)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transport(format!(
                "status {status}: {}",
                truncate(&text, 200)
            )));
        }
        if !status.is_success() {
            return Err(BackendError::Http {
                status: status.as_u16(),
                message: truncate(&text, 200),
            });
        }
        parse_reply(&text)
    }
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        let mut end = max;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &s[..end])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use std::sync::Mutex;

    // Both credential tests touch SHUFFLEVAL_API_KEY; serialize them.
    static ENV_LOCK: Mutex<()> = Mutex::new(());

    #[test]
    fn endpoint_normalization_appends_route_once() {
        assert_eq!(
            normalize_endpoint("https://api.openai.com/v1"),
            "https://api.openai.com/v1/chat/completions"
        );
        assert_eq!(
            normalize_endpoint("https://api.openai.com/v1/"),
            "https://api.openai.com/v1/chat/completions"
        );
        assert_eq!(
            normalize_endpoint("http://localhost:9000/v1/chat/completions"),
            "http://localhost:9000/v1/chat/completions"
        );
    }

    #[test]
    fn request_body_merges_decoding_parameters() {
        let mut params = BTreeMap::new();
        params.insert("temperature".to_string(), serde_json::json!(0.2));
        let body = request_body(&CompletionRequest {
            model_id: "gpt-x",
            prompt: "hello",
            params: &params,
        });
        assert_eq!(body["model"], "gpt-x");
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["temperature"], 0.2);
    }

    #[test]
    fn reply_parsing_extracts_first_choice() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"2"}}]}"#;
        assert_eq!(parse_reply(body).unwrap(), "2");
        assert!(parse_reply("{}").is_err());
        assert!(parse_reply("not json").is_err());
    }

    #[test]
    fn missing_api_key_is_a_credentials_error() {
        let _guard = ENV_LOCK.lock().unwrap();
        let previous = std::env::var(API_KEY_ENV).ok();
        std::env::remove_var(API_KEY_ENV);
        let cfg = BackendConfig::remote("gpt-x");
        let result = RemoteChat::from_config(&cfg);
        if let Some(v) = previous {
            std::env::set_var(API_KEY_ENV, v);
        }
        assert!(matches!(result, Err(BackendError::MissingCredentials(_))));
    }

    #[test]
    fn completes_against_loopback_server() {
        use std::io::{Read, Write};
        use std::net::TcpListener;

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 8192];
            let mut read = 0;
            // Read until the end of the body (Content-Length delimited).
            loop {
                let n = stream.read(&mut buf[read..]).unwrap();
                read += n;
                let text = String::from_utf8_lossy(&buf[..read]);
                if let Some(header_end) = text.find("\r\n\r\n") {
                    let content_length = text
                        .lines()
                        .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(str::trim).map(String::from))
                        .and_then(|v| v.parse::<usize>().ok())
                        .unwrap_or(0);
                    if read >= header_end + 4 + content_length {
                        break;
                    }
                }
            }
            let request = String::from_utf8_lossy(&buf[..read]).to_string();
            let body = r#"{"choices":[{"message":{"content":"1"}}]}"#;
            let response = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(response.as_bytes()).unwrap();
            request
        });

        let remote = {
            let _guard = ENV_LOCK.lock().unwrap();
            let previous = std::env::var(API_KEY_ENV).ok();
            std::env::set_var(API_KEY_ENV, "test-key");
            let mut cfg = BackendConfig::remote("gpt-test");
            cfg.endpoint = format!("http://{addr}/v1");
            let remote = RemoteChat::from_config(&cfg).unwrap();
            match previous {
                Some(v) => std::env::set_var(API_KEY_ENV, v),
                None => std::env::remove_var(API_KEY_ENV),
            }
            remote
        };
        let reply = remote
            .complete(&CompletionRequest {
                model_id: "gpt-test",
                prompt: "which ordering?",
                params: &BTreeMap::new(),
            })
            .unwrap();
        assert_eq!(reply, "1");

        let request = server.join().unwrap();
        assert!(request.contains("POST /v1/chat/completions"));
        assert!(request.contains("Bearer test-key"));
        assert!(request.contains("which ordering?"));
        assert!(request.contains("\"model\":\"gpt-test\""));
    }
}
