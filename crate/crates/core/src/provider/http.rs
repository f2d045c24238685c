use std::time::Duration;

use rand::Rng;

use super::{build_url, ApiKey, CaptureSpec, ImageProvider, ProviderResult, DEFAULT_ENDPOINT};
use crate::error::{Error, Result};
use crate::imaging::Image;

/// Raw HTTP answer, whatever the status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

/// The request never produced an HTTP status (DNS, connect, TLS, timeout).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportFailure(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, TransportFailure>;
}

/// Blocking HTTPS transport on ureq.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        UreqTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new(Duration::from_secs(30))
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, TransportFailure> {
        let mut resp = self
            .agent
            .get(url)
            .call()
            .map_err(|e| TransportFailure(e.to_string()))?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_string();
        let body = resp
            .body_mut()
            .with_config()
            .limit(32 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| TransportFailure(e.to_string()))?;
        Ok(HttpResponse {
            status,
            content_type,
            body,
        })
    }
}

/// Exponential backoff with multiplicative jitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Backoff {
    pub base: Duration,
    pub factor: f64,
    /// Relative jitter; 0.2 draws each delay from [0.8, 1.2] times nominal.
    pub jitter: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_secs(1),
            factor: 2.0,
            jitter: 0.2,
        }
    }
}

impl Backoff {
    pub fn none() -> Self {
        Backoff {
            base: Duration::ZERO,
            factor: 1.0,
            jitter: 0.0,
        }
    }

    /// Nominal delay before retry number `retry` (1-based).
    pub fn nominal(&self, retry: u32) -> Duration {
        self.base
            .mul_f64(self.factor.powi(retry.saturating_sub(1) as i32))
    }

    fn delay(&self, retry: u32) -> Duration {
        let nominal = self.nominal(retry);
        if self.jitter <= 0.0 || nominal.is_zero() {
            return nominal;
        }
        let j = rand::rng().random_range(-self.jitter..=self.jitter);
        nominal.mul_f64(1.0 + j)
    }
}

enum Attempt {
    Done(ProviderResult),
    Retry { status: Option<u16>, msg: String },
}

/// Static-map client with retry.
pub struct HttpProvider {
    endpoint: String,
    key: ApiKey,
    transport: Box<dyn Transport>,
    backoff: Backoff,
}

impl HttpProvider {
    pub fn new(key: ApiKey) -> Self {
        HttpProvider::with_transport(key, Box::new(UreqTransport::default()))
    }

    pub fn with_transport(key: ApiKey, transport: Box<dyn Transport>) -> Self {
        HttpProvider {
            endpoint: DEFAULT_ENDPOINT.to_string(),
            key,
            transport,
            backoff: Backoff::default(),
        }
    }

    pub fn endpoint(mut self, endpoint: impl Into<String>) -> Self {
        self.endpoint = endpoint.into();
        self
    }

    pub fn backoff(mut self, backoff: Backoff) -> Self {
        self.backoff = backoff;
        self
    }

    fn attempt(&self, url: &str, attempts: u32) -> Result<Attempt> {
        let resp = match self.transport.get(url) {
            Ok(r) => r,
            Err(TransportFailure(msg)) => return Ok(Attempt::Retry { status: None, msg }),
        };
        match resp.status {
            200..=299 => {}
            401 | 403 => {
                return Err(Error::Auth {
                    status: resp.status,
                })
            }
            429 | 500..=599 => {
                return Ok(Attempt::Retry {
                    status: Some(resp.status),
                    msg: format!("HTTP {}", resp.status),
                })
            }
            s => {
                return Err(Error::Transport {
                    status: Some(s),
                    attempts,
                    msg: format!("HTTP {s}"),
                })
            }
        }
        if !resp.content_type.is_empty() && !resp.content_type.starts_with("image/") {
            return Err(Error::Protocol(format!(
                "expected an image, got content type {:?}",
                resp.content_type
            )));
        }
        let image = Image::decode(&resp.body)
            .map_err(|e| Error::Protocol(format!("undecodable image payload: {e}")))?;
        Ok(Attempt::Done(ProviderResult {
            image,
            content_type: resp.content_type,
            attempts,
        }))
    }
}

impl ImageProvider for HttpProvider {
    fn fetch(&self, spec: &CaptureSpec, retry: u32) -> Result<ProviderResult> {
        let url = build_url(&self.endpoint, spec, &self.key)?;
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&url, attempts)? {
                Attempt::Done(r) => return Ok(r),
                Attempt::Retry { status, msg } => {
                    if attempts > retry {
                        return Err(Error::Transport {
                            status,
                            attempts,
                            msg,
                        });
                    }
                    let wait = self.backoff.delay(attempts);
                    log::warn!("attempt {attempts} failed ({msg}), retrying in {wait:?}");
                    std::thread::sleep(wait);
                }
            }
        }
    }
}
