//! Encyclopedia lookup client with an on-disk response cache.
//!
//! The client fetches article summaries over HTTP, but every response worth
//! keeping (a summary or a definite miss) is written to a cache directory
//! keyed by the normalized term. Subsequent lookups for the same term are
//! served from the cache without touching the network, which makes augmented
//! corpus generation reproducible: given a fixed cache, two runs see exactly
//! the same bytes. An `offline` mode turns cold cache misses into hard errors
//! instead of network calls, so batch jobs can be replayed hermetically.

use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};
use serde::{Deserialize, Serialize};

use super::{AugmentError, SkipReason};

/// Production endpoint prefix for article summary lookups.
pub const DEFAULT_BASE_URL: &str = "https://en.wikipedia.org/api/rest_v1";

/// Characters escaped when a title is spliced into a URL path segment.
///
/// Everything a path separator or query delimiter could misread is encoded;
/// unreserved characters pass through so cached URLs stay human-readable.
const PATH_SEGMENT: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'#')
    .add(b'%')
    .add(b'/')
    .add(b'<')
    .add(b'>')
    .add(b'?')
    .add(b'`')
    .add(b'{')
    .add(b'}');

/// How a [`WikiClient`] talks to the network and where it keeps its cache.
#[derive(Debug, Clone)]
pub struct FetchPolicy {
    /// Maximum request rate in requests per second. Must be positive.
    pub rate_limit: f64,
    /// Directory holding cached response bodies and their metadata.
    pub cache_dir: PathBuf,
    /// When true, never touch the network: a term missing from the cache is
    /// an error rather than a fetch.
    pub offline: bool,
    /// `User-Agent` header sent with every request.
    pub user_agent: String,
}

impl FetchPolicy {
    /// A policy suitable for tests and offline batch replays.
    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        FetchPolicy {
            rate_limit: 1.0,
            cache_dir: cache_dir.into(),
            offline: true,
            user_agent: concat!("deftkit/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

/// Result of looking up one term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    /// The article exists and yielded a usable first sentence.
    Fetched {
        /// First sentence of the article summary.
        sentence: String,
        /// URL the summary was requested from.
        url: String,
        /// RFC 3339 timestamp of when the response was originally fetched.
        fetched_at: String,
    },
    /// The lookup completed but produced nothing usable; the term should be
    /// skipped, not retried.
    Skipped(SkipReason),
}

/// On-disk form of a cached response's provenance, stored next to the body.
#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    url: String,
    status: u16,
    fetched_at: String,
}

/// Spacing governor that enforces a minimum interval between requests.
///
/// The decision logic is pure — [`wait_time`](RateLimiter::wait_time) maps a
/// clock reading to a required delay — so tests can drive it with fabricated
/// instants instead of sleeping.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    last: Option<Instant>,
}

impl RateLimiter {
    /// Creates a limiter allowing at most `rate_per_sec` requests per second.
    pub fn new(rate_per_sec: f64) -> Self {
        RateLimiter {
            min_interval: Duration::from_secs_f64(1.0 / rate_per_sec),
            last: None,
        }
    }

    /// How long a request issued at `now` must wait to respect the rate.
    pub fn wait_time(&self, now: Instant) -> Duration {
        match self.last {
            None => Duration::ZERO,
            Some(last) => {
                let elapsed = now.saturating_duration_since(last);
                self.min_interval.saturating_sub(elapsed)
            }
        }
    }

    /// Records that a request was issued at `now`.
    pub fn record(&mut self, now: Instant) {
        self.last = Some(now);
    }

    /// Blocks until a request may be issued, then records it.
    fn throttle(&mut self) {
        let wait = self.wait_time(Instant::now());
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
        self.record(Instant::now());
    }
}

/// Summary-lookup client with caching, rate limiting, and an offline mode.
pub struct WikiClient {
    base_url: String,
    policy: FetchPolicy,
    http: reqwest::blocking::Client,
    limiter: Mutex<RateLimiter>,
}

impl WikiClient {
    /// Creates a client against the production endpoint.
    pub fn new(policy: FetchPolicy) -> Result<Self, AugmentError> {
        Self::with_base_url(policy, DEFAULT_BASE_URL)
    }

    /// Creates a client against an arbitrary endpoint prefix (no trailing
    /// slash), which lets tests point at a local mock server.
    pub fn with_base_url(
        policy: FetchPolicy,
        base_url: impl Into<String>,
    ) -> Result<Self, AugmentError> {
        if policy.rate_limit <= 0.0 || policy.rate_limit.is_nan() {
            return Err(AugmentError::BadPolicy(format!(
                "rate_limit must be positive, got {}",
                policy.rate_limit
            )));
        }
        if policy.user_agent.trim().is_empty() {
            return Err(AugmentError::BadPolicy(
                "user_agent must be non-empty".to_string(),
            ));
        }
        fs::create_dir_all(&policy.cache_dir).map_err(|source| AugmentError::Io {
            path: policy.cache_dir.display().to_string(),
            source,
        })?;
        let http = reqwest::blocking::Client::builder()
            .user_agent(policy.user_agent.clone())
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| AugmentError::Network {
                term: String::new(),
                msg: e.to_string(),
            })?;
        let limiter = Mutex::new(RateLimiter::new(policy.rate_limit));
        Ok(WikiClient {
            base_url: base_url.into(),
            policy,
            http,
            limiter,
        })
    }

    /// The summary URL a term resolves to.
    pub fn summary_url(&self, term: &str) -> String {
        let title = term.trim().replace(char::is_whitespace, "_");
        let encoded = utf8_percent_encode(&title, PATH_SEGMENT);
        format!("{}/page/summary/{}", self.base_url, encoded)
    }

    /// Looks up `term`, serving from the cache when possible.
    ///
    /// Cache hits never touch the network or the rate limiter. Cold misses
    /// in offline mode fail with [`AugmentError::OfflineMiss`]; transport
    /// failures and unexpected statuses fail with retryable errors rather
    /// than being folded into skips.
    pub fn fetch_first_sentence(&self, term: &str) -> Result<FetchOutcome, AugmentError> {
        let key = normalize_term(term);
        if key.is_empty() {
            return Err(AugmentError::EmptyTerm);
        }

        if let Some((meta, body)) = self.read_cache(&key)? {
            return interpret_response(meta.status, &body, &meta.url, &meta.fetched_at);
        }
        if self.policy.offline {
            return Err(AugmentError::OfflineMiss {
                term: term.to_string(),
            });
        }

        self.limiter
            .lock()
            .expect("rate limiter lock poisoned")
            .throttle();

        let url = self.summary_url(term);
        let response = self
            .http
            .get(&url)
            .send()
            .map_err(|e| AugmentError::Network {
                term: term.to_string(),
                msg: e.to_string(),
            })?;
        let status = response.status().as_u16();
        let final_url = response.url().to_string();
        let body = response.bytes().map_err(|e| AugmentError::Network {
            term: term.to_string(),
            msg: e.to_string(),
        })?;
        let fetched_at = chrono::Utc::now().to_rfc3339();

        // Only definitive answers are cached; transient failures must stay
        // retryable on the next run.
        if status == 200 || status == 404 {
            self.write_cache(&key, &final_url, status, &fetched_at, &body)?;
        }
        interpret_response(status, &body, &final_url, &fetched_at)
    }

    /// Stores a response in the cache under `term`'s key, exactly as a live
    /// fetch would have.
    ///
    /// This is the seeding half of hermetic replays: a prefetch step (or a
    /// test) populates the cache, and later offline runs replay it through
    /// the same interpretation path as live traffic.
    pub fn store_response(
        &self,
        term: &str,
        url: &str,
        status: u16,
        fetched_at: &str,
        body: &[u8],
    ) -> Result<(), AugmentError> {
        let key = normalize_term(term);
        if key.is_empty() {
            return Err(AugmentError::EmptyTerm);
        }
        self.write_cache(&key, url, status, fetched_at, body)
    }

    fn body_path(&self, key: &str) -> PathBuf {
        self.policy.cache_dir.join(format!("{key}.body"))
    }

    fn meta_path(&self, key: &str) -> PathBuf {
        self.policy.cache_dir.join(format!("{key}.meta.json"))
    }

    fn read_cache(&self, key: &str) -> Result<Option<(CacheMeta, Vec<u8>)>, AugmentError> {
        let meta_path = self.meta_path(key);
        if !meta_path.exists() {
            return Ok(None);
        }
        let meta_text = fs::read_to_string(&meta_path).map_err(|source| AugmentError::Io {
            path: meta_path.display().to_string(),
            source,
        })?;
        let meta: CacheMeta =
            serde_json::from_str(&meta_text).map_err(|e| AugmentError::BadCacheEntry {
                path: meta_path.display().to_string(),
                msg: e.to_string(),
            })?;
        let body_path = self.body_path(key);
        let body = fs::read(&body_path).map_err(|source| AugmentError::Io {
            path: body_path.display().to_string(),
            source,
        })?;
        Ok(Some((meta, body)))
    }

    fn write_cache(
        &self,
        key: &str,
        url: &str,
        status: u16,
        fetched_at: &str,
        body: &[u8],
    ) -> Result<(), AugmentError> {
        let body_path = self.body_path(key);
        fs::write(&body_path, body).map_err(|source| AugmentError::Io {
            path: body_path.display().to_string(),
            source,
        })?;
        let meta = CacheMeta {
            url: url.to_string(),
            status,
            fetched_at: fetched_at.to_string(),
        };
        let meta_path = self.meta_path(key);
        let text = serde_json::to_string_pretty(&meta).expect("cache metadata serializes");
        fs::write(&meta_path, text).map_err(|source| AugmentError::Io {
            path: meta_path.display().to_string(),
            source,
        })
    }
}

/// Cache key for a term: lowercased, whitespace collapsed to `_`, and every
/// byte outside `[a-z0-9_.-]` hex-escaped so the key is filesystem-safe on
/// any platform. Distinct normalized terms map to distinct keys.
pub fn normalize_term(term: &str) -> String {
    let lowered = term.trim().to_lowercase();
    let mut key = String::with_capacity(lowered.len());
    let mut prev_sep = false;
    for ch in lowered.chars() {
        if ch.is_whitespace() {
            if !prev_sep {
                key.push('_');
                prev_sep = true;
            }
            continue;
        }
        prev_sep = false;
        if ch.is_ascii_alphanumeric() || matches!(ch, '_' | '-' | '.') {
            key.push(ch);
        } else {
            let mut buf = [0u8; 4];
            for byte in ch.encode_utf8(&mut buf).bytes() {
                key.push_str(&format!("%{byte:02x}"));
            }
        }
    }
    key
}

/// Maps a raw HTTP response to a lookup outcome.
///
/// This is the pure core of the client: status 200 with a summary body
/// yields the extract's first sentence, disambiguation pages and empty
/// extracts become skips, 404 becomes a not-found skip, and anything else is
/// a retryable error. It is driven identically by live responses and cached
/// ones, which is what makes cached replays faithful.
pub fn interpret_response(
    status: u16,
    body: &[u8],
    url: &str,
    fetched_at: &str,
) -> Result<FetchOutcome, AugmentError> {
    match status {
        404 => Ok(FetchOutcome::Skipped(SkipReason::NotFound)),
        200 => {
            let value: serde_json::Value =
                serde_json::from_slice(body).map_err(|e| AugmentError::BadResponse {
                    url: url.to_string(),
                    msg: format!("body is not valid JSON: {e}"),
                })?;
            let page_type = value.get("type").and_then(|v| v.as_str()).unwrap_or("");
            if page_type.contains("disambiguation") {
                return Ok(FetchOutcome::Skipped(SkipReason::Disambiguation));
            }
            let extract = value
                .get("extract")
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .trim();
            if extract.is_empty() {
                return Ok(FetchOutcome::Skipped(SkipReason::EmptyExtract));
            }
            Ok(FetchOutcome::Fetched {
                sentence: first_sentence(extract),
                url: url.to_string(),
                fetched_at: fetched_at.to_string(),
            })
        }
        other => Err(AugmentError::HttpStatus {
            url: url.to_string(),
            status: other,
        }),
    }
}

/// Abbreviations whose trailing period must not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
    "no.", "fig.", "ca.", "approx.",
];

/// Longest prefix of `extract` that reads as its first sentence.
///
/// The boundary is the first `.` followed by whitespace and an uppercase
/// letter whose preceding word is not a known abbreviation. When no such
/// boundary exists the first paragraph is returned instead, truncated to at
/// most 400 characters on a character boundary.
pub fn first_sentence(extract: &str) -> String {
    let text = extract.trim();
    for (i, ch) in text.char_indices() {
        if ch != '.' {
            continue;
        }
        let tail = &text[i + 1..];
        let mut chars = tail.chars();
        let Some(next) = chars.next() else { continue };
        if !next.is_whitespace() {
            continue;
        }
        let after_ws = tail.trim_start();
        let Some(first) = after_ws.chars().next() else {
            continue;
        };
        if !first.is_uppercase() {
            continue;
        }
        let head = &text[..=i];
        let word = head
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or(head)
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if ABBREVIATIONS.contains(&word.as_str()) {
            continue;
        }
        return head.to_string();
    }

    let paragraph = text.split('\n').next().unwrap_or(text).trim();
    let mut end = paragraph.len().min(400);
    while end > 0 && !paragraph.is_char_boundary(end) {
        end -= 1;
    }
    paragraph[..end].trim_end().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_keys_are_lowercase_and_filesystem_safe() {
        assert_eq!(normalize_term("Phylogenetic Tree"), "phylogenetic_tree");
        assert_eq!(normalize_term("  DNA  "), "dna");
        assert_eq!(normalize_term("a\t b"), "a_b");
        assert_eq!(normalize_term("C++"), "c%2b%2b");
        assert_eq!(normalize_term("naïve"), "na%c3%afve");
        assert_eq!(normalize_term("x/y"), "x%2fy");
    }

    #[test]
    fn distinct_terms_get_distinct_keys() {
        assert_ne!(normalize_term("a b"), normalize_term("a_c"));
        assert_eq!(normalize_term("A  B"), normalize_term("a b"));
    }

    #[test]
    fn first_sentence_stops_at_the_first_real_boundary() {
        let extract = "A cell is the basic unit of life. It was discovered in 1665.";
        assert_eq!(
            first_sentence(extract),
            "A cell is the basic unit of life."
        );
    }

    #[test]
    fn abbreviations_do_not_end_a_sentence() {
        let extract = "Organelles (e.g. Mitochondria) supply energy. They are small.";
        assert_eq!(
            first_sentence(extract),
            "Organelles (e.g. Mitochondria) supply energy."
        );
        let extract = "Dr. Smith coined the term. It stuck.";
        assert_eq!(first_sentence(extract), "Dr. Smith coined the term.");
    }

    #[test]
    fn lowercase_continuation_does_not_end_a_sentence() {
        let extract = "The v. cholerae bacterium causes cholera. It spreads in water.";
        assert_eq!(
            first_sentence(extract),
            "The v. cholerae bacterium causes cholera."
        );
    }

    #[test]
    fn fallback_returns_first_paragraph_capped_at_400_chars() {
        let extract = "no boundary here\nsecond paragraph";
        assert_eq!(first_sentence(extract), "no boundary here");

        let long = "x".repeat(500);
        let got = first_sentence(&long);
        assert_eq!(got.len(), 400);

        // Truncation must land on a character boundary even for multibyte text.
        let wide = "é".repeat(300);
        let got = first_sentence(&wide);
        assert!(got.len() <= 400);
        assert!(wide.starts_with(&got));
    }

    #[test]
    fn interpret_recognizes_summaries_skips_and_errors() {
        let ok = br#"{"type":"standard","extract":"A gene is a unit of heredity. More text."}"#;
        match interpret_response(200, ok, "u", "t").unwrap() {
            FetchOutcome::Fetched {
                sentence,
                url,
                fetched_at,
            } => {
                assert_eq!(sentence, "A gene is a unit of heredity.");
                assert_eq!(url, "u");
                assert_eq!(fetched_at, "t");
            }
            other => panic!("expected Fetched, got {other:?}"),
        }

        let dab = br#"{"type":"disambiguation","extract":"Gene may refer to:"}"#;
        assert_eq!(
            interpret_response(200, dab, "u", "t").unwrap(),
            FetchOutcome::Skipped(SkipReason::Disambiguation)
        );

        let empty = br#"{"type":"standard","extract":"  "}"#;
        assert_eq!(
            interpret_response(200, empty, "u", "t").unwrap(),
            FetchOutcome::Skipped(SkipReason::EmptyExtract)
        );

        assert_eq!(
            interpret_response(404, b"ignored", "u", "t").unwrap(),
            FetchOutcome::Skipped(SkipReason::NotFound)
        );

        assert!(matches!(
            interpret_response(503, b"", "u", "t"),
            Err(AugmentError::HttpStatus { status: 503, .. })
        ));
        assert!(matches!(
            interpret_response(200, b"not json", "u", "t"),
            Err(AugmentError::BadResponse { .. })
        ));
    }

    #[test]
    fn rate_limiter_enforces_the_minimum_interval_on_a_mock_clock() {
        let mut limiter = RateLimiter::new(2.0); // 500 ms between requests
        let t0 = Instant::now();
        assert_eq!(limiter.wait_time(t0), Duration::ZERO);
        limiter.record(t0);

        // 100 ms later: 400 ms still owed.
        let t1 = t0 + Duration::from_millis(100);
        assert_eq!(limiter.wait_time(t1), Duration::from_millis(400));

        // Exactly at the interval: free to go.
        let t2 = t0 + Duration::from_millis(500);
        assert_eq!(limiter.wait_time(t2), Duration::ZERO);

        // Simulate a driver that always waits what it is told: the observed
        // spacing can never drop below the interval.
        let mut now = t0;
        limiter.record(now);
        for _ in 0..10 {
            let arrival = now + Duration::from_millis(37);
            let wait = limiter.wait_time(arrival);
            let issue = arrival + wait;
            assert!(issue.duration_since(now) >= Duration::from_millis(500));
            limiter.record(issue);
            now = issue;
        }
    }

    #[test]
    fn summary_urls_are_percent_encoded() {
        let policy = FetchPolicy::offline(tempfile::tempdir().unwrap().path());
        let client = WikiClient::with_base_url(policy, "http://localhost:1").unwrap();
        assert_eq!(
            client.summary_url("phylogenetic tree"),
            "http://localhost:1/page/summary/phylogenetic_tree"
        );
        assert_eq!(
            client.summary_url("AC/DC current"),
            "http://localhost:1/page/summary/AC%2FDC_current"
        );
    }

    #[test]
    fn offline_cold_cache_is_a_retryable_error_not_a_skip() {
        let dir = tempfile::tempdir().unwrap();
        let client = WikiClient::new(FetchPolicy::offline(dir.path())).unwrap();
        match client.fetch_first_sentence("unseen term") {
            Err(AugmentError::OfflineMiss { term }) => assert_eq!(term, "unseen term"),
            other => panic!("expected OfflineMiss, got {other:?}"),
        }
    }

    #[test]
    fn cached_responses_replay_without_network() {
        let dir = tempfile::tempdir().unwrap();
        let client = WikiClient::new(FetchPolicy::offline(dir.path())).unwrap();

        // Seed the cache by hand, as a previous online run would have.
        let body = br#"{"type":"standard","extract":"A prion is a misfolded protein. It replicates."}"#;
        client
            .store_response(
                "prion",
                "https://example.org/page/summary/prion",
                200,
                "2024-01-01T00:00:00+00:00",
                body,
            )
            .unwrap();

        let first = client.fetch_first_sentence("prion").unwrap();
        let second = client.fetch_first_sentence("Prion").unwrap();
        assert_eq!(first, second);
        match first {
            FetchOutcome::Fetched {
                sentence,
                url,
                fetched_at,
            } => {
                assert_eq!(sentence, "A prion is a misfolded protein.");
                assert_eq!(url, "https://example.org/page/summary/prion");
                assert_eq!(fetched_at, "2024-01-01T00:00:00+00:00");
            }
            other => panic!("expected Fetched, got {other:?}"),
        }
    }

    #[test]
    fn cached_not_found_replays_as_a_skip() {
        let dir = tempfile::tempdir().unwrap();
        let client = WikiClient::new(FetchPolicy::offline(dir.path())).unwrap();
        client
            .store_response("ghost", "u", 404, "t", b"{}")
            .unwrap();
        assert_eq!(
            client.fetch_first_sentence("ghost").unwrap(),
            FetchOutcome::Skipped(SkipReason::NotFound)
        );
    }

    #[test]
    fn corrupt_cache_metadata_is_reported_with_its_path() {
        let dir = tempfile::tempdir().unwrap();
        let client = WikiClient::new(FetchPolicy::offline(dir.path())).unwrap();
        let key = normalize_term("broken");
        fs::write(dir.path().join(format!("{key}.meta.json")), "not json").unwrap();
        fs::write(dir.path().join(format!("{key}.body")), "").unwrap();
        match client.fetch_first_sentence("broken") {
            Err(AugmentError::BadCacheEntry { path, .. }) => {
                assert!(path.ends_with("broken.meta.json"))
            }
            other => panic!("expected BadCacheEntry, got {other:?}"),
        }
    }

    #[test]
    fn invalid_policies_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut policy = FetchPolicy::offline(dir.path());
        policy.rate_limit = 0.0;
        assert!(matches!(
            WikiClient::new(policy),
            Err(AugmentError::BadPolicy(_))
        ));

        let mut policy = FetchPolicy::offline(dir.path());
        policy.user_agent = "  ".to_string();
        assert!(matches!(
            WikiClient::new(policy),
            Err(AugmentError::BadPolicy(_))
        ));
    }
}
