//! Anonymous HTML adapter for a Scholar-style search front end.
//!
//! Requests carry no login or cookies. Page markup drifts; the selectors
//! below are best effort and not covered by the acceptance suite.

use std::time::Duration;

use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};

use super::source::{ScholarlySource, SourceError};
use crate::corpus::{DocId, Document, QuerySpec};
use crate::metrics::parse_year;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveSettings {
    pub base_url: String,
    pub user_agent: String,
    pub page_size: usize,
    /// hard cap on pages fetched per request list
    pub max_pages: usize,
    pub timeout_secs: u64,
}

impl Default for LiveSettings {
    fn default() -> Self {
        LiveSettings {
            base_url: "https://scholar.google.com".into(),
            user_agent: "litmap/0.1".into(),
            page_size: 10,
            max_pages: 100,
            timeout_secs: 30,
        }
    }
}

pub struct LiveSource {
    settings: LiveSettings,
    client: reqwest::blocking::Client,
}

impl LiveSource {
    pub fn new(settings: LiveSettings) -> Result<Self, SourceError> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(settings.user_agent.clone())
            .timeout(Duration::from_secs(settings.timeout_secs))
            .build()
            .map_err(|e| SourceError::Fatal(e.to_string()))?;
        Ok(LiveSource { settings, client })
    }

    fn get(&self, params: &[(&str, String)]) -> Result<String, SourceError> {
        let url = format!("{}/scholar", self.settings.base_url.trim_end_matches('/'));
        let resp = self
            .client
            .get(url)
            .query(params)
            .send()
            .map_err(|e| SourceError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(SourceError::Transient(format!("http {status}")));
        }
        if !status.is_success() {
            return Err(SourceError::Fatal(format!("http {status}")));
        }
        resp.text().map_err(|e| SourceError::Transient(e.to_string()))
    }

    fn paged(&self, mut base: Vec<(&str, String)>, limit: usize) -> Result<Vec<Document>, SourceError> {
        let mut out = Vec::new();
        base.push(("start", String::new()));
        let slot = base.len() - 1;
        for page in 0..self.settings.max_pages {
            if out.len() >= limit {
                break;
            }
            base[slot].1 = (page * self.settings.page_size).to_string();
            let found = parse_results(&self.get(&base)?);
            if found.is_empty() {
                break;
            }
            out.extend(found);
        }
        out.truncate(limit);
        Ok(out)
    }
}

impl ScholarlySource for LiveSource {
    fn search(&self, query: &QuerySpec, k: usize) -> Result<Vec<Document>, SourceError> {
        self.paged(vec![("q", query.query_string.clone())], k)
    }

    fn citers(&self, doc_id: &DocId, limit: Option<usize>) -> Result<Vec<Document>, SourceError> {
        let cap = self.settings.max_pages * self.settings.page_size;
        self.paged(vec![("cites", doc_id.as_str().to_string())], limit.unwrap_or(cap).min(cap))
    }
}

/// Extracts result entries from one result page.
pub fn parse_results(html: &str) -> Vec<Document> {
    let page = Html::parse_document(html);
    let entry = Selector::parse("div.gs_ri").unwrap();
    let title = Selector::parse("h3.gs_rt").unwrap();
    let byline = Selector::parse("div.gs_a").unwrap();
    let links = Selector::parse("div.gs_fl a").unwrap();
    let mut out = Vec::new();
    for e in page.select(&entry) {
        let Some(t) = e.select(&title).next() else { continue };
        let text = strip_tags(&t.text().collect::<String>());
        if text.is_empty() {
            continue;
        }
        let by = e.select(&byline).next().map(|b| b.text().collect::<String>()).unwrap_or_default();
        let mut parts = by.split(" - ");
        let authors: Vec<String> = parts
            .next()
            .unwrap_or("")
            .split(',')
            .map(|a| a.trim().trim_end_matches('…').trim().to_string())
            .filter(|a| !a.is_empty())
            .collect();
        let venue = parts.next().map(|v| v.split(',').next().unwrap_or("").trim().to_string());
        let mut cited_by = 0;
        let mut id = None;
        for a in e.select(&links) {
            let label: String = a.text().collect();
            if let Some(n) = label.strip_prefix("Cited by ") {
                cited_by = n.trim().parse().unwrap_or(0);
                id = a
                    .value()
                    .attr("href")
                    .and_then(|h| h.split("cites=").nth(1))
                    .map(|s| s.split('&').next().unwrap_or(s).to_string());
            }
        }
        let id = id.unwrap_or_else(|| format!("t:{}", crate::corpus::normalized_title(&text).replace(' ', "-")));
        let mut doc = Document::new(id, text, parse_year(&by)).with_cited_by(cited_by).with_authors(authors);
        if let Some(v) = venue.filter(|v| !v.is_empty()) {
            doc = doc.with_venue(v);
        }
        out.push(doc);
    }
    out
}

/// Drops leading `[PDF]`, `[BOOK]`-style markers.
fn strip_tags(raw: &str) -> String {
    let mut s = raw.trim();
    while s.starts_with('[') {
        match s.find(']') {
            Some(end) => s = s[end + 1..].trim_start(),
            None => break,
        }
    }
    s.to_string()
}
