//! Scripted localhost HTTP/HTTPS server for fetcher tests.
//!
//! Routes are declared up front; every connection is handled on its own
//! thread so a delayed route cannot stall the rest of a test. The server
//! answers each request with `Connection: close` and keeps a log of what
//! it was asked, so tests can assert on probe traffic.

use std::collections::HashMap;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use flate2::write::GzEncoder;
use flate2::Compression;

/// One scripted response.
#[derive(Debug, Clone)]
pub struct Route {
    pub status: u16,
    pub body: Vec<u8>,
    pub content_type: String,
    /// Compress the body when the client advertises gzip support.
    pub gzip: bool,
    /// Send a Location header; pair with a 3xx status.
    pub location: Option<String>,
    pub delay: Duration,
    /// Answer HEAD with 405 so clients must retry with GET.
    pub reject_head: bool,
    pub extra_headers: Vec<(String, String)>,
}

impl Route {
    pub fn page(body: impl Into<Vec<u8>>) -> Route {
        Route {
            status: 200,
            body: body.into(),
            content_type: "text/html; charset=utf-8".to_string(),
            gzip: false,
            location: None,
            delay: Duration::ZERO,
            reject_head: false,
            extra_headers: Vec::new(),
        }
    }

    pub fn text(body: impl Into<Vec<u8>>) -> Route {
        Route::page(body).content_type("text/plain; charset=utf-8")
    }

    pub fn not_found() -> Route {
        Route::page("<html><body>not found</body></html>").status(404)
    }

    pub fn redirect(to: impl Into<String>) -> Route {
        let mut r = Route::page(Vec::new()).status(302);
        r.location = Some(to.into());
        r
    }

    pub fn status(mut self, status: u16) -> Route {
        self.status = status;
        self
    }

    pub fn content_type(mut self, ct: impl Into<String>) -> Route {
        self.content_type = ct.into();
        self
    }

    pub fn gzip(mut self) -> Route {
        self.gzip = true;
        self
    }

    pub fn delay_ms(mut self, ms: u64) -> Route {
        self.delay = Duration::from_millis(ms);
        self
    }

    pub fn reject_head(mut self) -> Route {
        self.reject_head = true;
        self
    }

    pub fn header(mut self, name: impl Into<String>, value: impl Into<String>) -> Route {
        self.extra_headers.push((name.into(), value.into()));
        self
    }
}

/// Route table plus the response unknown paths receive.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    routes: HashMap<String, Route>,
    fallback: Route,
}

impl ServerConfig {
    pub fn new() -> ServerConfig {
        ServerConfig {
            routes: HashMap::new(),
            fallback: Route::not_found(),
        }
    }

    pub fn route(mut self, path: impl Into<String>, route: Route) -> ServerConfig {
        self.routes.insert(path.into(), route);
        self
    }

    /// Replace the 404 fallback, e.g. with a soft-404 page.
    pub fn fallback(mut self, route: Route) -> ServerConfig {
        self.fallback = route;
        self
    }
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig::new()
    }
}

/// What one request looked like on the wire.
#[derive(Debug, Clone)]
pub struct RequestRecord {
    pub method: String,
    /// Full request target including any query string.
    pub target: String,
    pub accept_encoding: Option<String>,
    pub user_agent: Option<String>,
}

pub struct TestServer {
    scheme: &'static str,
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
    log: Arc<Mutex<Vec<RequestRecord>>>,
}

impl TestServer {
    pub fn http(config: ServerConfig) -> io::Result<TestServer> {
        TestServer::start(config, None)
    }

    /// Serve the same routes over TLS with a fresh self-signed cert.
    /// Clients must skip verification.
    pub fn https(config: ServerConfig) -> io::Result<TestServer> {
        let certified = rcgen::generate_simple_self_signed(vec![
            "localhost".to_string(),
            "127.0.0.1".to_string(),
        ])
        .map_err(io::Error::other)?;
        let cert = certified.cert.der().clone();
        let key = rustls::pki_types::PrivateKeyDer::Pkcs8(
            certified.key_pair.serialize_der().into(),
        );
        let tls = rustls::ServerConfig::builder()
            .with_no_client_auth()
            .with_single_cert(vec![cert], key)
            .map_err(io::Error::other)?;
        TestServer::start(config, Some(Arc::new(tls)))
    }

    fn start(
        config: ServerConfig,
        tls: Option<Arc<rustls::ServerConfig>>,
    ) -> io::Result<TestServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let scheme = if tls.is_some() { "https" } else { "http" };
        let stop = Arc::new(AtomicBool::new(false));
        let log = Arc::new(Mutex::new(Vec::new()));
        let config = Arc::new(config);

        let accept_stop = Arc::clone(&stop);
        let accept_log = Arc::clone(&log);
        let handle = thread::spawn(move || {
            for conn in listener.incoming() {
                if accept_stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(tcp) = conn else { continue };
                let config = Arc::clone(&config);
                let log = Arc::clone(&accept_log);
                let tls = tls.clone();
                thread::spawn(move || {
                    let _ = serve_connection(tcp, &config, &log, tls);
                });
            }
        });

        Ok(TestServer {
            scheme,
            addr,
            stop,
            handle: Some(handle),
            log,
        })
    }

    pub fn url(&self, path: &str) -> String {
        let sep = if path.starts_with('/') { "" } else { "/" };
        format!("{}://{}{}{}", self.scheme, self.addr, sep, path)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn requests(&self) -> Vec<RequestRecord> {
        self.log.lock().expect("request log poisoned").clone()
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the acceptor so it observes the stop flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_connection(
    mut tcp: TcpStream,
    config: &ServerConfig,
    log: &Mutex<Vec<RequestRecord>>,
    tls: Option<Arc<rustls::ServerConfig>>,
) -> io::Result<()> {
    tcp.set_read_timeout(Some(Duration::from_secs(10)))?;
    tcp.set_write_timeout(Some(Duration::from_secs(10)))?;
    match tls {
        None => handle_request(&mut tcp, config, log),
        Some(tls) => {
            let mut conn =
                rustls::ServerConnection::new(tls).map_err(io::Error::other)?;
            {
                let mut stream = rustls::Stream::new(&mut conn, &mut tcp);
                handle_request(&mut stream, config, log)?;
            }
            conn.send_close_notify();
            let _ = conn.complete_io(&mut tcp);
            Ok(())
        }
    }
}

fn handle_request<S: Read + Write>(
    stream: &mut S,
    config: &ServerConfig,
    log: &Mutex<Vec<RequestRecord>>,
) -> io::Result<()> {
    let head = read_head(stream)?;
    let Some((method, target, headers)) = parse_head(&head) else {
        return write_response(stream, 400, "text/plain", b"bad request", &[], true);
    };

    log.lock().expect("request log poisoned").push(RequestRecord {
        method: method.clone(),
        target: target.clone(),
        accept_encoding: headers.get("accept-encoding").cloned(),
        user_agent: headers.get("user-agent").cloned(),
    });

    let path = target.split('?').next().unwrap_or("");
    let route = config.routes.get(path).unwrap_or(&config.fallback);

    if !route.delay.is_zero() {
        thread::sleep(route.delay);
    }

    if method == "HEAD" && route.reject_head {
        let allow = [("Allow".to_string(), "GET".to_string())];
        return write_response(stream, 405, "text/plain", b"", &allow, false);
    }

    let client_gzip = headers
        .get("accept-encoding")
        .is_some_and(|v| v.to_ascii_lowercase().contains("gzip"));
    let mut extra = route.extra_headers.clone();
    if let Some(location) = &route.location {
        extra.push(("Location".to_string(), location.clone()));
    }
    let mut body = route.body.clone();
    if route.gzip && client_gzip && !body.is_empty() {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&body)?;
        body = enc.finish()?;
        extra.push(("Content-Encoding".to_string(), "gzip".to_string()));
    }

    let send_body = method != "HEAD";
    write_response(
        stream,
        route.status,
        &route.content_type,
        &body,
        &extra,
        send_body,
    )
}

fn read_head<S: Read>(stream: &mut S) -> io::Result<Vec<u8>> {
    let mut head = Vec::new();
    let mut buf = [0u8; 1024];
    loop {
        let n = stream.read(&mut buf)?;
        if n == 0 {
            break;
        }
        head.extend_from_slice(&buf[..n]);
        if head.windows(4).any(|w| w == b"\r\n\r\n") || head.len() > 32 * 1024 {
            break;
        }
    }
    Ok(head)
}

fn parse_head(head: &[u8]) -> Option<(String, String, HashMap<String, String>)> {
    let text = String::from_utf8_lossy(head);
    let mut lines = text.split("\r\n");
    let request_line = lines.next()?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next()?.to_string();
    let target = parts.next()?.to_string();
    let mut headers = HashMap::new();
    for line in lines {
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            headers.insert(name.trim().to_ascii_lowercase(), value.trim().to_string());
        }
    }
    Some((method, target, headers))
}

fn write_response<S: Write>(
    stream: &mut S,
    status: u16,
    content_type: &str,
    body: &[u8],
    extra: &[(String, String)],
    send_body: bool,
) -> io::Result<()> {
    let reason = match status {
        200 => "OK",
        301 => "Moved Permanently",
        302 => "Found",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    };
    let mut response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n",
        body.len()
    );
    for (name, value) in extra {
        response.push_str(name);
        response.push_str(": ");
        response.push_str(value);
        response.push_str("\r\n");
    }
    response.push_str("Connection: close\r\n\r\n");
    stream.write_all(response.as_bytes())?;
    if send_body {
        stream.write_all(body)?;
    }
    stream.flush()
}
