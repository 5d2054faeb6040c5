//! Timed HTTP retrieval and site-level probes.
//!
//! The fetcher follows redirects by hand (so hop counts are enforced
//! exactly), asks for gzip and decompresses it itself (so the compressed
//! flag reflects the wire), and spaces requests per host. Probes cover
//! robots.txt, sitemap discovery, soft-404 detection, and broken-link
//! sampling.

mod robots;

pub use robots::{parse_robots, RobotsRules};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use flate2::read::GzDecoder;
use rand::Rng;
use seo_rankminer_core::model::MetricId;
use thiserror::Error;
use url::Url;

/// Knobs for retrieval and probing. Defaults suit a polite audit of a
/// public site; tests dial the delays down and the tolerances up.
#[derive(Debug, Clone)]
pub struct FetchPolicy {
    pub timeout_ms: u64,
    pub max_redirects: u32,
    pub max_body_kb: u64,
    pub user_agent: String,
    pub max_concurrent: usize,
    pub per_host_delay_ms: u64,
    pub broken_link_sample: usize,
    /// Consult robots.txt before probe requests. Off for test servers.
    pub honor_robots: bool,
    /// Accept self-signed certificates, e.g. from a local TLS server.
    pub accept_invalid_certs: bool,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            timeout_ms: 15_000,
            max_redirects: 5,
            max_body_kb: 5_120,
            user_agent: "seo-rankminer/0.1".to_string(),
            max_concurrent: 8,
            per_host_delay_ms: 500,
            broken_link_sample: 50,
            honor_robots: true,
            accept_invalid_certs: false,
        }
    }
}

/// One retrieved document plus the transfer facts the metrics need.
#[derive(Debug, Clone)]
pub struct FetchResult {
    pub requested_url: String,
    /// Where the redirect chain ended.
    pub final_url: String,
    pub status: u16,
    /// Decompressed body, truncated at `max_body_kb`.
    pub body: Vec<u8>,
    /// Wall time from first request to last body byte, across redirects.
    pub load_time_ms: u64,
    /// Body arrived gzip-encoded on the wire.
    pub gzip: bool,
    /// Final URL scheme was https.
    pub https: bool,
    /// Response headers, lowercase names, repeats joined with ", ".
    pub headers: BTreeMap<String, String>,
    pub truncated: bool,
}

impl FetchResult {
    pub fn body_text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("invalid url `{0}`")]
    InvalidUrl(String),
    #[error("dns lookup failed for {0}")]
    Dns(String),
    #[error("timed out fetching {0}")]
    Timeout(String),
    #[error("more than {limit} redirects from {url}")]
    TooManyRedirects { url: String, limit: u32 },
    #[error("tls failure fetching {url}: {detail}")]
    Tls { url: String, detail: String },
    #[error("transport failure fetching {url}: {detail}")]
    Transport { url: String, detail: String },
    #[error("robots.txt disallows probing {0}")]
    RobotsDisallowed(String),
    #[error("bad fetch policy: {0}")]
    BadPolicy(String),
}

/// Reserves send slots so same-host requests stay `delay` apart no
/// matter which thread issues them.
struct HostGate {
    next_allowed: Mutex<HashMap<String, Instant>>,
}

impl HostGate {
    fn new() -> HostGate {
        HostGate {
            next_allowed: Mutex::new(HashMap::new()),
        }
    }

    fn wait_turn(&self, host: &str, delay: Duration) {
        let at = {
            let mut slots = self.next_allowed.lock().expect("host gate poisoned");
            let now = Instant::now();
            let at = slots.get(host).copied().map_or(now, |t| t.max(now));
            slots.insert(host.to_string(), at + delay);
            at
        };
        let now = Instant::now();
        if at > now {
            thread::sleep(at - now);
        }
    }
}

fn host_key(url: &Url) -> String {
    format!(
        "{}:{}",
        url.host_str().unwrap_or(""),
        url.port_or_known_default().unwrap_or(0)
    )
}

fn parse_http_url(url: &str) -> Result<Url, FetchError> {
    let parsed = Url::parse(url).map_err(|_| FetchError::InvalidUrl(url.to_string()))?;
    match parsed.scheme() {
        "http" | "https" => Ok(parsed),
        _ => Err(FetchError::InvalidUrl(url.to_string())),
    }
}

fn classify(url: &str, err: reqwest::Error) -> FetchError {
    if err.is_timeout() {
        return FetchError::Timeout(url.to_string());
    }
    let mut messages = Vec::new();
    let mut source: Option<&(dyn std::error::Error + 'static)> = Some(&err);
    while let Some(e) = source {
        messages.push(e.to_string());
        source = e.source();
    }
    let detail = messages.last().cloned().unwrap_or_default();
    let haystack = messages.join(": ").to_ascii_lowercase();
    if haystack.contains("dns")
        || haystack.contains("lookup address")
        || haystack.contains("name or service not known")
    {
        FetchError::Dns(url.to_string())
    } else if haystack.contains("certificate")
        || haystack.contains("tls")
        || haystack.contains("ssl")
        || haystack.contains("handshake")
    {
        FetchError::Tls {
            url: url.to_string(),
            detail,
        }
    } else {
        FetchError::Transport {
            url: url.to_string(),
            detail,
        }
    }
}

pub struct Fetcher {
    client: reqwest::blocking::Client,
    policy: FetchPolicy,
    gate: HostGate,
    robots_cache: Mutex<HashMap<String, Arc<Option<RobotsRules>>>>,
}

impl Fetcher {
    pub fn new(policy: FetchPolicy) -> Result<Fetcher, FetchError> {
        if policy.timeout_ms == 0 {
            return Err(FetchError::BadPolicy("timeout_ms must be positive".into()));
        }
        if policy.max_concurrent == 0 {
            return Err(FetchError::BadPolicy("max_concurrent must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(policy.timeout_ms))
            .redirect(reqwest::redirect::Policy::none())
            .user_agent(policy.user_agent.clone())
            .tls_danger_accept_invalid_certs(policy.accept_invalid_certs)
            .build()
            .map_err(|e| FetchError::BadPolicy(e.to_string()))?;
        Ok(Fetcher {
            client,
            policy,
            gate: HostGate::new(),
            robots_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn policy(&self) -> &FetchPolicy {
        &self.policy
    }

    fn delay(&self) -> Duration {
        Duration::from_millis(self.policy.per_host_delay_ms)
    }

    /// GET with manual redirect following, explicit gzip negotiation,
    /// and a hard cap on the decompressed body.
    pub fn fetch_page(&self, url: &str) -> Result<FetchResult, FetchError> {
        let requested = url.to_string();
        let mut current = parse_http_url(url)?;
        let mut hops = 0u32;
        let mut started: Option<Instant> = None;

        loop {
            self.gate.wait_turn(&host_key(&current), self.delay());
            // The clock starts with the first request, after politeness
            // waits, so spacing does not count as page load time.
            let start = *started.get_or_insert_with(Instant::now);
            let response = self
                .client
                .get(current.clone())
                .header("Accept-Encoding", "gzip")
                .send()
                .map_err(|e| classify(current.as_str(), e))?;

            let status = response.status().as_u16();
            if matches!(status, 301 | 302 | 303 | 307 | 308) {
                if let Some(location) = response
                    .headers()
                    .get("location")
                    .and_then(|v| v.to_str().ok())
                {
                    hops += 1;
                    if hops > self.policy.max_redirects {
                        return Err(FetchError::TooManyRedirects {
                            url: requested,
                            limit: self.policy.max_redirects,
                        });
                    }
                    current = current
                        .join(location)
                        .map_err(|_| FetchError::InvalidUrl(location.to_string()))?;
                    continue;
                }
            }

            let mut headers: BTreeMap<String, String> = BTreeMap::new();
            for (name, value) in response.headers() {
                let value = String::from_utf8_lossy(value.as_bytes()).into_owned();
                headers
                    .entry(name.as_str().to_ascii_lowercase())
                    .and_modify(|v| {
                        v.push_str(", ");
                        v.push_str(&value);
                    })
                    .or_insert(value);
            }
            let gzip = headers
                .get("content-encoding")
                .is_some_and(|v| v.to_ascii_lowercase().contains("gzip"));

            let cap = self.policy.max_body_kb * 1024;
            let mut body = Vec::new();
            let read = if gzip {
                GzDecoder::new(response).take(cap + 1).read_to_end(&mut body)
            } else {
                response.take(cap + 1).read_to_end(&mut body)
            };
            if let Err(e) = read {
                return Err(if e.kind() == std::io::ErrorKind::TimedOut {
                    FetchError::Timeout(current.to_string())
                } else {
                    FetchError::Transport {
                        url: current.to_string(),
                        detail: e.to_string(),
                    }
                });
            }
            let truncated = body.len() as u64 > cap;
            if truncated {
                body.truncate(cap as usize);
            }
            let load_time_ms = start.elapsed().as_millis() as u64;

            return Ok(FetchResult {
                requested_url: requested,
                final_url: current.to_string(),
                status,
                https: current.scheme() == "https",
                body,
                load_time_ms,
                gzip,
                headers,
                truncated,
            });
        }
    }

    /// Cached robots rules for an origin. `None` means no usable
    /// robots.txt (absent, empty, or unreachable): everything allowed.
    fn robots_for(&self, origin: &Url) -> Arc<Option<RobotsRules>> {
        let key = format!("{}://{}", origin.scheme(), host_key(origin));
        if let Some(rules) = self.robots_cache.lock().expect("robots cache poisoned").get(&key) {
            return Arc::clone(rules);
        }
        let fetched = self
            .robots_text(origin)
            .ok()
            .flatten()
            .map(|text| parse_robots(&text));
        let rules = Arc::new(fetched);
        self.robots_cache
            .lock()
            .expect("robots cache poisoned")
            .insert(key, Arc::clone(&rules));
        rules
    }

    fn probe_allowed(&self, url: &Url) -> bool {
        if !self.policy.honor_robots {
            return true;
        }
        match self.robots_for(url).as_ref() {
            Some(rules) => rules.is_allowed(&self.policy.user_agent, url.path()),
            None => true,
        }
    }

    /// robots.txt body when it exists: `Ok(Some(text))` for a 200 with
    /// non-blank content, `Ok(None)` otherwise.
    fn robots_text(&self, origin: &Url) -> Result<Option<String>, FetchError> {
        let robots_url = origin
            .join("/robots.txt")
            .map_err(|_| FetchError::InvalidUrl(origin.to_string()))?;
        let result = self.fetch_page(robots_url.as_str())?;
        if result.status == 200 {
            let text = result.body_text();
            if !text.trim().is_empty() {
                return Ok(Some(text));
            }
        }
        Ok(None)
    }

    /// True iff GET /robots.txt answers 200 with a non-blank body.
    pub fn check_robots(&self, origin: &str) -> Result<bool, FetchError> {
        let origin = parse_http_url(origin)?;
        Ok(self.robots_text(&origin)?.is_some())
    }

    /// True iff a Sitemap declared in robots.txt answers 200, or the
    /// conventional /sitemap.xml does. Declared URLs may be relative.
    pub fn check_sitemap(&self, origin: &str) -> Result<bool, FetchError> {
        let origin = parse_http_url(origin)?;
        if let Some(text) = self.robots_text(&origin)? {
            for declared in parse_robots(&text).sitemaps() {
                let Ok(sitemap_url) = origin.join(declared) else {
                    continue;
                };
                if self.fetch_page(sitemap_url.as_str())?.status == 200 {
                    return Ok(true);
                }
            }
        }
        let fallback = origin
            .join("/sitemap.xml")
            .map_err(|_| FetchError::InvalidUrl(origin.to_string()))?;
        Ok(self.fetch_page(fallback.as_str())?.status == 200)
    }

    /// Requests a randomized junk path. Only a literal 404 status means
    /// the site serves a real error page; 200 is a soft 404, and other
    /// statuses do not count either.
    pub fn check_custom_404(&self, origin: &str) -> Result<bool, FetchError> {
        let origin = parse_http_url(origin)?;
        let mut rng = rand::rng();
        let mut junk = String::from("/no-such-page-");
        for _ in 0..24 {
            let digit = rng.random_range(0..36u32);
            junk.push(char::from_digit(digit, 36).expect("digit in radix"));
        }
        let probe_url = origin
            .join(&junk)
            .map_err(|_| FetchError::InvalidUrl(origin.to_string()))?;
        if !self.probe_allowed(&probe_url) {
            return Err(FetchError::RobotsDisallowed(probe_url.to_string()));
        }
        Ok(self.fetch_page(probe_url.as_str())?.status == 404)
    }

    /// Probes the first `broken_link_sample` URLs in the order given,
    /// HEAD first with a GET retry on 405. A link is broken when the
    /// final status is 400+ or the transport fails; redirect statuses
    /// count as working without being followed. URLs robots.txt puts
    /// off limits are skipped and not counted as checked.
    pub fn probe_broken_links(&self, urls: &[Url]) -> ProbeSummary {
        let targets: Vec<&Url> = urls
            .iter()
            .take(self.policy.broken_link_sample)
            .filter(|u| self.probe_allowed(u))
            .collect();
        let checked = targets.len();
        if checked == 0 {
            return ProbeSummary { checked: 0, broken: 0 };
        }

        let results: Mutex<Vec<bool>> = Mutex::new(vec![false; checked]);
        let next = AtomicUsize::new(0);
        let workers = self.policy.max_concurrent.min(checked);
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= checked {
                        break;
                    }
                    let broken = self.probe_one(targets[i]);
                    results.lock().expect("probe results poisoned")[i] = broken;
                });
            }
        });

        let results = results.into_inner().expect("probe results poisoned");
        ProbeSummary {
            checked,
            broken: results.iter().filter(|&&b| b).count(),
        }
    }

    fn probe_one(&self, url: &Url) -> bool {
        self.gate.wait_turn(&host_key(url), self.delay());
        match self.client.head(url.clone()).send() {
            Ok(response) if response.status().as_u16() == 405 => {
                self.gate.wait_turn(&host_key(url), self.delay());
                match self.client.get(url.clone()).send() {
                    Ok(retry) => retry.status().as_u16() >= 400,
                    Err(_) => true,
                }
            }
            Ok(response) => response.status().as_u16() >= 400,
            Err(_) => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeSummary {
    pub checked: usize,
    pub broken: usize,
}

/// The five transfer-level metric values for one fetched home page.
#[derive(Debug, Clone, PartialEq)]
pub struct FetchMetrics {
    pub page_size_kb: f64,
    pub load_time_ms: u64,
    pub request_count: u32,
    pub gzip: bool,
    pub security: bool,
}

/// Derives transfer metrics from the home fetch. The request count is
/// the document itself plus its distinct subresource URLs; duplicates
/// collapse.
pub fn fetch_metrics(home: &FetchResult, subresources: &[Url]) -> FetchMetrics {
    let distinct: BTreeSet<&str> = subresources.iter().map(Url::as_str).collect();
    FetchMetrics {
        page_size_kb: (home.body.len() as f64 / 1024.0 * 10.0).round() / 10.0,
        load_time_ms: home.load_time_ms,
        request_count: 1 + distinct.len() as u32,
        gzip: home.gzip,
        security: home.https,
    }
}

impl FetchMetrics {
    pub fn to_metric_values(&self) -> BTreeMap<MetricId, f64> {
        BTreeMap::from([
            (MetricId::PageSizeKb, self.page_size_kb),
            (MetricId::LoadTimeMs, self.load_time_ms as f64),
            (MetricId::RequestCount, f64::from(self.request_count)),
            (MetricId::Gzip, f64::from(u8::from(self.gzip))),
            (MetricId::Security, f64::from(u8::from(self.security))),
        ])
    }
}
