use std::time::Instant;

use seo_rankminer_net::{fetch_metrics, FetchError, FetchPolicy, Fetcher};
use seo_rankminer_testserver::{Route, ServerConfig, TestServer};
use url::Url;

fn quick_policy() -> FetchPolicy {
    FetchPolicy {
        per_host_delay_ms: 0,
        honor_robots: false,
        ..FetchPolicy::default()
    }
}

fn fetcher(policy: FetchPolicy) -> Fetcher {
    Fetcher::new(policy).unwrap()
}

#[test]
fn fetch_follows_redirects_and_reports_the_final_hop() {
    let server = TestServer::http(
        ServerConfig::new()
            .route("/a", Route::redirect("/b").status(301))
            .route("/b", Route::redirect("/c"))
            .route("/c", Route::page("<html>landed</html>")),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    let result = f.fetch_page(&server.url("/a")).unwrap();
    assert_eq!(result.status, 200);
    assert_eq!(result.requested_url, server.url("/a"));
    assert_eq!(result.final_url, server.url("/c"));
    assert_eq!(result.body, b"<html>landed</html>");
    assert!(!result.https);
    assert!(!result.gzip);
    assert!(!result.truncated);
    assert_eq!(
        result.headers.get("content-type").map(String::as_str),
        Some("text/html; charset=utf-8")
    );
}

#[test]
fn redirect_chains_over_the_limit_fail() {
    let mut config = ServerConfig::new().route("/final", Route::page("done"));
    for i in 0..6 {
        config = config.route(format!("/hop{i}"), Route::redirect(format!("/hop{}", i + 1)));
    }
    config = config.route("/hop6", Route::redirect("/final"));
    let server = TestServer::http(config).unwrap();

    // /hop0 needs 7 redirects to land; 5 is not enough, 7 is.
    let strict = fetcher(FetchPolicy {
        max_redirects: 5,
        ..quick_policy()
    });
    let err = strict.fetch_page(&server.url("/hop0")).unwrap_err();
    match err {
        FetchError::TooManyRedirects { limit, .. } => assert_eq!(limit, 5),
        other => panic!("expected redirect failure, got {other}"),
    }

    let roomy = fetcher(FetchPolicy {
        max_redirects: 7,
        ..quick_policy()
    });
    let ok = roomy.fetch_page(&server.url("/hop0")).unwrap();
    assert_eq!(ok.final_url, server.url("/final"));
}

#[test]
fn gzip_bodies_are_decompressed_and_flagged() {
    let body = "x".repeat(12 * 1024);
    let server = TestServer::http(
        ServerConfig::new()
            .route("/", Route::page(body.clone()).gzip())
            .route("/plain", Route::page("small page")),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    let home = f.fetch_page(&server.url("/")).unwrap();
    assert!(home.gzip);
    assert_eq!(home.body.len(), 12 * 1024);
    assert_eq!(home.body, body.as_bytes());

    let metrics = fetch_metrics(&home, &[]);
    assert_eq!(metrics.page_size_kb, 12.0);
    assert!(metrics.gzip);
    assert!(!metrics.security);

    let plain = f.fetch_page(&server.url("/plain")).unwrap();
    assert!(!plain.gzip);
    assert_eq!(plain.body, b"small page");
}

#[test]
fn bodies_truncate_at_the_cap() {
    let body = "y".repeat(8 * 1024);
    let server = TestServer::http(
        ServerConfig::new()
            .route("/big", Route::page(body.clone()))
            .route("/big-gz", Route::page(body).gzip()),
    )
    .unwrap();

    let f = fetcher(FetchPolicy {
        max_body_kb: 4,
        ..quick_policy()
    });
    let plain = f.fetch_page(&server.url("/big")).unwrap();
    assert!(plain.truncated);
    assert_eq!(plain.body.len(), 4 * 1024);

    // The cap applies to decompressed bytes, not wire bytes.
    let gz = f.fetch_page(&server.url("/big-gz")).unwrap();
    assert!(gz.truncated);
    assert!(gz.gzip);
    assert_eq!(gz.body.len(), 4 * 1024);
}

#[test]
fn https_sets_the_security_flag() {
    let server = TestServer::https(
        ServerConfig::new().route("/", Route::page("secure")),
    )
    .unwrap();

    let f = fetcher(FetchPolicy {
        accept_invalid_certs: true,
        ..quick_policy()
    });
    let result = f.fetch_page(&server.url("/")).unwrap();
    assert_eq!(result.status, 200);
    assert!(result.https);
    assert_eq!(result.body, b"secure");
    assert!(fetch_metrics(&result, &[]).security);
}

#[test]
fn self_signed_certs_fail_without_the_override() {
    let server = TestServer::https(
        ServerConfig::new().route("/", Route::page("secure")),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    match f.fetch_page(&server.url("/")).unwrap_err() {
        FetchError::Tls { .. } => {}
        other => panic!("expected tls failure, got {other}"),
    }
}

#[test]
fn slow_servers_time_out() {
    let server = TestServer::http(
        ServerConfig::new().route("/slow", Route::page("eventually").delay_ms(500)),
    )
    .unwrap();

    let f = fetcher(FetchPolicy {
        timeout_ms: 100,
        ..quick_policy()
    });
    match f.fetch_page(&server.url("/slow")).unwrap_err() {
        FetchError::Timeout(url) => assert!(url.contains("/slow")),
        other => panic!("expected timeout, got {other}"),
    }
}

#[test]
fn unresolvable_hosts_are_dns_failures() {
    let f = fetcher(quick_policy());
    match f.fetch_page("http://no-such-host.invalid/").unwrap_err() {
        FetchError::Dns(url) => assert!(url.contains("no-such-host.invalid")),
        other => panic!("expected dns failure, got {other}"),
    }
}

#[test]
fn non_http_urls_are_rejected() {
    let f = fetcher(quick_policy());
    for bad in ["not a url", "ftp://host/file", "mailto:x@y"] {
        assert!(
            matches!(f.fetch_page(bad), Err(FetchError::InvalidUrl(_))),
            "{bad} should be invalid"
        );
    }
}

#[test]
fn bad_policies_are_rejected() {
    let zero_timeout = FetchPolicy {
        timeout_ms: 0,
        ..FetchPolicy::default()
    };
    assert!(matches!(
        Fetcher::new(zero_timeout),
        Err(FetchError::BadPolicy(_))
    ));
    let zero_workers = FetchPolicy {
        max_concurrent: 0,
        ..FetchPolicy::default()
    };
    assert!(matches!(
        Fetcher::new(zero_workers),
        Err(FetchError::BadPolicy(_))
    ));
}

#[test]
fn robots_probe_needs_a_non_blank_200() {
    let with_robots = TestServer::http(
        ServerConfig::new().route(
            "/robots.txt",
            Route::text("User-agent: *\nDisallow: /private/\n"),
        ),
    )
    .unwrap();
    let without = TestServer::http(ServerConfig::new()).unwrap();
    let blank = TestServer::http(
        ServerConfig::new().route("/robots.txt", Route::text("  \n\t\n")),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    assert!(f.check_robots(&with_robots.url("/")).unwrap());
    assert!(!f.check_robots(&without.url("/")).unwrap());
    assert!(!f.check_robots(&blank.url("/")).unwrap());
}

#[test]
fn sitemap_probe_prefers_the_robots_declaration() {
    let declared = TestServer::http(
        ServerConfig::new()
            .route("/robots.txt", Route::text("Sitemap: /map.xml\n"))
            .route("/map.xml", Route::text("<urlset/>").content_type("application/xml")),
    )
    .unwrap();
    let conventional = TestServer::http(
        ServerConfig::new().route("/sitemap.xml", Route::text("<urlset/>")),
    )
    .unwrap();
    let nothing = TestServer::http(ServerConfig::new()).unwrap();

    let f = fetcher(quick_policy());
    assert!(f.check_sitemap(&declared.url("/")).unwrap());
    assert!(f.check_sitemap(&conventional.url("/")).unwrap());
    assert!(!f.check_sitemap(&nothing.url("/")).unwrap());

    // The declared map was enough; /sitemap.xml was never tried there.
    assert!(declared
        .requests()
        .iter()
        .all(|r| !r.target.starts_with("/sitemap.xml")));
}

#[test]
fn custom_404_detection_wants_a_literal_404() {
    let proper = TestServer::http(ServerConfig::new()).unwrap();
    let soft = TestServer::http(
        ServerConfig::new().fallback(Route::page("<html>helpful page</html>")),
    )
    .unwrap();
    let broken = TestServer::http(
        ServerConfig::new().fallback(Route::page("oops").status(500)),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    assert!(f.check_custom_404(&proper.url("/")).unwrap());
    assert!(!f.check_custom_404(&soft.url("/")).unwrap());
    assert!(!f.check_custom_404(&broken.url("/")).unwrap());

    let probes = proper.requests();
    assert_eq!(probes.len(), 1);
    assert!(probes[0].target.starts_with("/no-such-page-"));
}

#[test]
fn broken_link_probe_counts_and_samples() {
    let server = TestServer::http(
        ServerConfig::new()
            .route("/ok", Route::page("fine"))
            .route("/no-head", Route::page("get works").reject_head())
            .route("/boom", Route::page("broken").status(500)),
    )
    .unwrap();

    let urls: Vec<Url> = ["/ok", "/gone", "/no-head", "/boom"]
        .iter()
        .map(|p| Url::parse(&server.url(p)).unwrap())
        .collect();

    let f = fetcher(quick_policy());
    let summary = f.probe_broken_links(&urls);
    assert_eq!(summary.checked, 4);
    // /gone hits the 404 fallback; /boom is a 500; /no-head recovers
    // through the GET retry.
    assert_eq!(summary.broken, 2);

    let log = server.requests();
    let head_retry: Vec<&str> = log
        .iter()
        .filter(|r| r.target == "/no-head")
        .map(|r| r.method.as_str())
        .collect();
    assert_eq!(head_retry, ["HEAD", "GET"]);

    let sampled = Fetcher::new(FetchPolicy {
        broken_link_sample: 2,
        ..quick_policy()
    })
    .unwrap();
    let summary = sampled.probe_broken_links(&urls);
    assert_eq!(summary.checked, 2);
    assert_eq!(summary.broken, 1);

    assert_eq!(f.probe_broken_links(&[]).checked, 0);
    assert_eq!(f.probe_broken_links(&[]).broken, 0);
}

#[test]
fn robots_disallow_shields_probe_paths() {
    let server = TestServer::http(
        ServerConfig::new()
            .route("/robots.txt", Route::text("User-agent: *\nDisallow: /private/\n"))
            .route("/ok", Route::page("fine"))
            .route("/private/x", Route::page("secret")),
    )
    .unwrap();

    let f = fetcher(FetchPolicy {
        per_host_delay_ms: 0,
        honor_robots: true,
        ..FetchPolicy::default()
    });
    let urls = [
        Url::parse(&server.url("/ok")).unwrap(),
        Url::parse(&server.url("/private/x")).unwrap(),
    ];
    let summary = f.probe_broken_links(&urls);
    assert_eq!(summary.checked, 1);
    assert_eq!(summary.broken, 0);
    assert!(server.requests().iter().all(|r| r.target != "/private/x"));

    let walled = TestServer::http(
        ServerConfig::new().route("/robots.txt", Route::text("User-agent: *\nDisallow: /\n")),
    )
    .unwrap();
    let g = fetcher(FetchPolicy {
        per_host_delay_ms: 0,
        honor_robots: true,
        ..FetchPolicy::default()
    });
    assert!(matches!(
        g.check_custom_404(&walled.url("/")),
        Err(FetchError::RobotsDisallowed(_))
    ));
}

#[test]
fn same_host_requests_are_spaced() {
    let server = TestServer::http(
        ServerConfig::new().route("/", Route::page("home")),
    )
    .unwrap();

    let f = fetcher(FetchPolicy {
        per_host_delay_ms: 150,
        honor_robots: false,
        ..FetchPolicy::default()
    });
    let started = Instant::now();
    f.fetch_page(&server.url("/")).unwrap();
    f.fetch_page(&server.url("/")).unwrap();
    assert!(
        started.elapsed().as_millis() >= 150,
        "second same-host request must wait out the delay"
    );
}

#[test]
fn fetch_metric_arithmetic_counts_distinct_subresources() {
    let body = vec![b'z'; 2048];
    let server = TestServer::http(
        ServerConfig::new().route("/", Route::page(body)),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    let home = f.fetch_page(&server.url("/")).unwrap();
    let subresources: Vec<Url> = [
        "http://cdn.example/app.js",
        "http://cdn.example/site.css",
        "http://cdn.example/app.js",
        "http://img.example/logo.png",
    ]
    .iter()
    .map(|u| Url::parse(u).unwrap())
    .collect();

    let metrics = fetch_metrics(&home, &subresources);
    assert_eq!(metrics.page_size_kb, 2.0);
    assert_eq!(metrics.request_count, 4);
    assert_eq!(metrics.load_time_ms, home.load_time_ms);

    let values = metrics.to_metric_values();
    assert_eq!(values.len(), 5);
    use seo_rankminer_core::model::MetricId;
    assert_eq!(values[&MetricId::PageSizeKb], 2.0);
    assert_eq!(values[&MetricId::RequestCount], 4.0);
    assert_eq!(values[&MetricId::Gzip], 0.0);
    assert_eq!(values[&MetricId::Security], 0.0);
}

#[test]
fn probe_flags_are_idempotent_against_a_static_server() {
    let server = TestServer::http(
        ServerConfig::new()
            .route("/", Route::page("<html>home</html>").gzip())
            .route("/robots.txt", Route::text("User-agent: *\nSitemap: /map.xml\n"))
            .route("/map.xml", Route::text("<urlset/>")),
    )
    .unwrap();

    let f = fetcher(quick_policy());
    let origin = server.url("/");
    let run = |f: &Fetcher| {
        let home = f.fetch_page(&origin).unwrap();
        (
            home.status,
            home.gzip,
            home.https,
            home.body.len(),
            f.check_robots(&origin).unwrap(),
            f.check_sitemap(&origin).unwrap(),
            f.check_custom_404(&origin).unwrap(),
        )
    };
    assert_eq!(run(&f), run(&f));
}
