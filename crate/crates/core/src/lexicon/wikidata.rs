//! `wbgetentities` clients and the batched harvester.
//!
//! Two fetchers implement [`EntityFetcher`]:
//!
//! * [`HttpWikidataClient`] calls the live API
//!   (`action=wbgetentities&props=labels|aliases&ids=..&languages=..&format=json`),
//!   rate-limited and retried with backoff on HTTP 429/5xx.
//! * [`FixtureWikidataClient`] answers from a directory of canned
//!   `wbgetentities` responses. Every `*.json` file in the directory is read
//!   and their `entities` objects are merged; requested ids absent from all
//!   files are answered as `{"id": .., "missing": ""}`, as the API does.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde_json::Value;
use tracing::{debug, warn};

use super::{EntityLexicon, NameSet, NameSource, Provenance};
use crate::locale::Locale;
use crate::qid::Qid;
use crate::retry::{RateLimiter, RetryPolicy};

/// Upper bound on ids per `wbgetentities` call imposed by the API.
pub const MAX_IDS_PER_REQUEST: usize = 50;
pub const DEFAULT_ENDPOINT: &str = "https://www.wikidata.org/w/api.php";
/// Environment variable holding a contact string (e-mail or URL) for the user agent.
pub const CONTACT_ENV: &str = "EAMT_WIKIDATA_CONTACT";

/// Terms for one entity, already restricted to the requested languages.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityTerms {
    pub labels: BTreeMap<String, String>,
    pub aliases: BTreeMap<String, Vec<String>>,
}

/// Parsed response: `None` marks an id Wikidata reports as missing.
pub type FetchedBatch = HashMap<Qid, Option<EntityTerms>>;

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("request failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status} after {attempts} attempt(s)")]
    Status { status: u16, attempts: u32 },
    #[error("API error `{code}`: {info}")]
    Api { code: String, info: String },
    #[error("unexpected response: {0}")]
    Malformed(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

pub trait EntityFetcher: Sync {
    fn fetch(&self, ids: &[Qid], languages: &[Locale]) -> Result<FetchedBatch, FetchError>;

    fn source(&self) -> NameSource;
}

fn terms_list(v: Option<&Value>) -> impl Iterator<Item = (&String, &Value)> {
    // PHP serializes empty maps as `[]`
    v.and_then(Value::as_object).into_iter().flat_map(|m| m.iter())
}

/// Parses a `wbgetentities` response body, keeping only `languages`.
pub fn parse_response(body: &Value, requested: &[Qid], languages: &[Locale]) -> Result<FetchedBatch, FetchError> {
    if let Some(err) = body.get("error") {
        return Err(FetchError::Api {
            code: err.get("code").and_then(Value::as_str).unwrap_or("unknown").to_owned(),
            info: err.get("info").and_then(Value::as_str).unwrap_or_default().to_owned(),
        });
    }
    let entities = body
        .get("entities")
        .and_then(Value::as_object)
        .ok_or_else(|| FetchError::Malformed("no `entities` object".into()))?;
    let wanted: BTreeSet<&str> = languages.iter().map(Locale::as_str).collect();

    let mut out = FetchedBatch::with_capacity(requested.len());
    for qid in requested {
        let Some(entity) = entities.get(qid.as_str()) else {
            out.insert(qid.clone(), None);
            continue;
        };
        if entity.get("missing").is_some() {
            out.insert(qid.clone(), None);
            continue;
        }
        let mut terms = EntityTerms::default();
        for (lang, term) in terms_list(entity.get("labels")) {
            if !wanted.contains(lang.as_str()) {
                continue;
            }
            if let Some(v) = term.get("value").and_then(Value::as_str) {
                terms.labels.insert(lang.clone(), v.to_owned());
            }
        }
        for (lang, list) in terms_list(entity.get("aliases")) {
            if !wanted.contains(lang.as_str()) {
                continue;
            }
            let values = list
                .as_array()
                .into_iter()
                .flatten()
                .filter_map(|t| t.get("value").and_then(Value::as_str).map(str::to_owned))
                .collect();
            terms.aliases.insert(lang.clone(), values);
        }
        out.insert(qid.clone(), Some(terms));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct WikidataClientConfig {
    pub endpoint: String,
    pub requests_per_second: f64,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub user_agent: String,
}

impl Default for WikidataClientConfig {
    fn default() -> Self {
        WikidataClientConfig {
            endpoint: DEFAULT_ENDPOINT.to_owned(),
            requests_per_second: 5.0,
            timeout: Duration::from_secs(30),
            retry: RetryPolicy::default(),
            user_agent: default_user_agent(),
        }
    }
}

/// `eamt/<version>`, with the contact from [`CONTACT_ENV`] appended when set.
pub fn default_user_agent() -> String {
    let base = format!("eamt/{}", env!("CARGO_PKG_VERSION"));
    match std::env::var(CONTACT_ENV) {
        Ok(contact) if !contact.trim().is_empty() => format!("{base} ({})", contact.trim()),
        _ => base,
    }
}

pub struct HttpWikidataClient {
    http: reqwest::blocking::Client,
    config: WikidataClientConfig,
    limiter: RateLimiter,
    calls: AtomicUsize,
}

impl HttpWikidataClient {
    pub fn new(config: WikidataClientConfig) -> Result<Self, FetchError> {
        let http = reqwest::blocking::Client::builder()
            .user_agent(config.user_agent.clone())
            .timeout(config.timeout)
            .build()
            .map_err(|e| FetchError::Transport {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(HttpWikidataClient {
            http,
            limiter: RateLimiter::new(config.requests_per_second),
            config,
            calls: AtomicUsize::new(0),
        })
    }

    /// HTTP requests issued so far, retries included.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn join<T: AsRef<str>>(items: &[T]) -> String {
        items.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("|")
    }
}

fn is_retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    headers
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<u64>()
        .ok()
        .map(Duration::from_secs)
}

impl EntityFetcher for HttpWikidataClient {
    fn fetch(&self, ids: &[Qid], languages: &[Locale]) -> Result<FetchedBatch, FetchError> {
        let ids_param = Self::join(ids);
        let lang_param = Self::join(languages.iter().map(Locale::as_str).collect::<Vec<_>>().as_slice());
        let seed = ids.first().map_or(0, |q| q.as_str()[1..].parse::<u64>().unwrap_or(0));
        let mut backoff = self.config.retry.backoff(seed);
        let mut attempts = 0u32;
        loop {
            self.limiter.acquire();
            attempts += 1;
            self.calls.fetch_add(1, Ordering::Relaxed);
            let result = self
                .http
                .get(&self.config.endpoint)
                .query(&[
                    ("action", "wbgetentities"),
                    ("props", "labels|aliases"),
                    ("ids", ids_param.as_str()),
                    ("languages", lang_param.as_str()),
                    ("format", "json"),
                ])
                .send();
            let (floor, failure) = match result {
                Ok(resp) if resp.status().is_success() => {
                    let body: Value = resp.json().map_err(|e| FetchError::Malformed(e.to_string()))?;
                    return parse_response(&body, ids, languages);
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    if !is_retryable(status) {
                        return Err(FetchError::Status { status, attempts });
                    }
                    (
                        retry_after(resp.headers()).unwrap_or(Duration::ZERO),
                        FetchError::Status { status, attempts },
                    )
                }
                Err(e) => (
                    Duration::ZERO,
                    FetchError::Transport {
                        attempts,
                        message: e.to_string(),
                    },
                ),
            };
            match backoff.next_delay_at_least(floor) {
                Some(delay) => {
                    debug!(attempts, ?delay, error = %failure, "retrying wbgetentities");
                    std::thread::sleep(delay);
                }
                None => return Err(failure),
            }
        }
    }

    fn source(&self) -> NameSource {
        NameSource::Api
    }
}

/// Offline fetcher over a directory of canned `wbgetentities` responses.
#[derive(Debug)]
pub struct FixtureWikidataClient {
    entities: serde_json::Map<String, Value>,
    calls: Mutex<Vec<usize>>,
}

impl FixtureWikidataClient {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, FetchError> {
        let dir = dir.as_ref();
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| FetchError::Fixture(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut entities = serde_json::Map::new();
        for file in files {
            let text = fs::read_to_string(&file)
                .map_err(|e| FetchError::Fixture(format!("{}: {e}", file.display())))?;
            let body: Value = serde_json::from_str(&text)
                .map_err(|e| FetchError::Fixture(format!("{}: {e}", file.display())))?;
            let Some(Value::Object(map)) = body.get("entities").cloned() else {
                return Err(FetchError::Fixture(format!("{}: no `entities` object", file.display())));
            };
            entities.extend(map);
        }
        Ok(FixtureWikidataClient {
            entities,
            calls: Mutex::new(Vec::new()),
        })
    }

    pub fn from_response(body: Value) -> Result<Self, FetchError> {
        let Some(Value::Object(entities)) = body.get("entities").cloned() else {
            return Err(FetchError::Fixture("no `entities` object".into()));
        };
        Ok(FixtureWikidataClient {
            entities,
            calls: Mutex::new(Vec::new()),
        })
    }

    /// Batch sizes of the calls answered so far, in completion order.
    pub fn call_sizes(&self) -> Vec<usize> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl EntityFetcher for FixtureWikidataClient {
    fn fetch(&self, ids: &[Qid], languages: &[Locale]) -> Result<FetchedBatch, FetchError> {
        self.calls
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(ids.len());
        let mut response = serde_json::Map::new();
        for id in ids {
            let entity = self.entities.get(id.as_str()).cloned().unwrap_or_else(|| {
                serde_json::json!({"id": id.as_str(), "missing": ""})
            });
            response.insert(id.to_string(), entity);
        }
        parse_response(&serde_json::json!({ "entities": response }), ids, languages)
    }

    fn source(&self) -> NameSource {
        NameSource::File
    }
}

#[derive(Debug, Clone)]
pub struct HarvestOptions {
    /// Ids per request, 1..=50.
    pub batch_size: usize,
    pub max_in_flight: usize,
    /// Aliases count as names alongside the label; when false only labels are kept.
    pub include_aliases: bool,
    /// Provenance timestamp (Unix seconds); the current time when unset.
    pub timestamp: Option<u64>,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        HarvestOptions {
            batch_size: MAX_IDS_PER_REQUEST,
            max_in_flight: 4,
            include_aliases: true,
            timestamp: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("invalid harvest options: {0}")]
    Config(String),
    #[error("{} entities could not be fetched (first error: {first_error})", unfetched.len())]
    Incomplete {
        partial: EntityLexicon,
        unfetched: Vec<Qid>,
        first_error: String,
    },
}

/// Fetches labels (and aliases) for every (QID, language) pair.
///
/// Ids are de-duplicated and sorted, then fetched in batches of at most
/// `batch_size` on up to `max_in_flight` threads. Every pair of a fetched id
/// is recorded, with an empty [`NameSet`] where Wikidata has no name, so a
/// missing entity yields empty sets rather than an error.
pub fn harvest(
    qids: &[Qid],
    languages: &[Locale],
    fetcher: &dyn EntityFetcher,
    opts: &HarvestOptions,
) -> Result<EntityLexicon, HarvestError> {
    if opts.batch_size == 0 || opts.batch_size > MAX_IDS_PER_REQUEST {
        return Err(HarvestError::Config(format!(
            "batch size must be in 1..={MAX_IDS_PER_REQUEST}, got {}",
            opts.batch_size
        )));
    }
    if opts.max_in_flight == 0 {
        return Err(HarvestError::Config("max in-flight must be at least 1".into()));
    }
    let unique: Vec<Qid> = qids.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let languages: Vec<Locale> = languages.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if unique.is_empty() || languages.is_empty() {
        return Ok(EntityLexicon::new());
    }

    let batches: Vec<&[Qid]> = unique.chunks(opts.batch_size).collect();
    let results: Vec<Mutex<Option<Result<FetchedBatch, FetchError>>>> =
        batches.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.min(batches.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(batch) = batches.get(i) else { break };
                let r = fetcher.fetch(batch, &languages);
                *results[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });

    let provenance = Provenance {
        source: fetcher.source(),
        fetched_at: opts.timestamp.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        }),
    };
    let mut lexicon = EntityLexicon::new();
    let mut unfetched = Vec::new();
    let mut first_error = None;
    for (batch, slot) in batches.iter().zip(results) {
        let result = slot
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .expect("every batch is fetched");
        match result {
            Ok(fetched) => {
                for qid in batch.iter() {
                    let terms = fetched.get(qid).cloned().flatten().unwrap_or_default();
                    for lang in &languages {
                        let label = terms.labels.get(lang.as_str()).cloned();
                        let aliases = if opts.include_aliases {
                            terms.aliases.get(lang.as_str()).cloned().unwrap_or_default()
                        } else {
                            Vec::new()
                        };
                        lexicon.insert(qid.clone(), lang.clone(), NameSet::new(label, aliases), provenance.clone());
                    }
                }
            }
            Err(e) => {
                warn!(batch = batch.len(), error = %e, "wbgetentities batch failed");
                first_error.get_or_insert_with(|| e.to_string());
                unfetched.extend(batch.iter().cloned());
            }
        }
    }
    match first_error {
        None => Ok(lexicon),
        Some(first_error) => Err(HarvestError::Incomplete {
            partial: lexicon,
            unfetched,
            first_error,
        }),
    }
}
