//! Reading-time budgets, growth series and query-overlap patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocId, Document, Membership, QueryId, UNDETERMINED};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("membership references unknown query {0}")]
    UnknownQuery(QueryId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadingParams {
    pub words_per_doc: f64,
    pub wpm: f64,
    pub hours_per_week: f64,
    pub weeks_per_year: f64,
}

impl Default for ReadingParams {
    fn default() -> Self {
        ReadingParams {
            words_per_doc: 5000.0,
            wpm: 225.0,
            hours_per_week: 37.0,
            weeks_per_year: 52.0,
        }
    }
}

impl ReadingParams {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (name, v) in [
            ("words_per_doc", self.words_per_doc),
            ("wpm", self.wpm),
            ("hours_per_week", self.hours_per_week),
            ("weeks_per_year", self.weeks_per_year),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricsError::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadingBudget {
    pub n_docs: u64,
    pub total_minutes: f64,
    pub weeks: f64,
    pub years: f64,
}

pub fn reading_minutes(words: f64, wpm: f64) -> Result<f64, MetricsError> {
    if !(wpm.is_finite() && wpm > 0.0) {
        return Err(MetricsError::InvalidParam(format!("wpm must be positive, got {wpm}")));
    }
    if !(words.is_finite() && words >= 0.0) {
        return Err(MetricsError::InvalidParam(format!("words must be non-negative, got {words}")));
    }
    Ok(words / wpm)
}

pub fn corpus_reading_budget(n_docs: u64, params: &ReadingParams) -> Result<ReadingBudget, MetricsError> {
    params.validate()?;
    let per_doc = reading_minutes(params.words_per_doc, params.wpm)?;
    let total_minutes = n_docs as f64 * per_doc;
    let weeks = total_minutes / (60.0 * params.hours_per_week);
    Ok(ReadingBudget {
        n_docs,
        total_minutes,
        weeks,
        years: weeks / params.weeks_per_year,
    })
}

/// The exact set of queries that returned a group of documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPattern {
    pub queries: BTreeSet<QueryId>,
    pub doc_count: u64,
    /// up to three members, smallest ids first
    pub example_doc_ids: Vec<DocId>,
}

impl IntersectionPattern {
    pub fn size(&self) -> usize {
        self.queries.len()
    }

    /// `&`-joined query ids, e.g. `2G&3G`.
    pub fn label(&self) -> String {
        self.queries.iter().map(QueryId::as_str).collect::<Vec<_>>().join("&")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionSummary {
    pub total_memberships: u64,
    pub unique_docs: u64,
    pub max_overlap: u64,
    /// number of documents whose fingerprint has `max_overlap` queries
    pub docs_at_max: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intersections {
    /// ordered by doc_count descending, then size descending, then label
    pub patterns: Vec<IntersectionPattern>,
    pub summary: IntersectionSummary,
    /// every document with its hit count, most hits first, ties by id
    pub doc_hits: Vec<(DocId, u64)>,
}

const EXAMPLES: usize = 3;

/// Aggregates per-document query fingerprints.
///
/// `known` lists the valid query ids; a membership naming any other id is
/// rejected. Duplicate (doc, query) pairs count once.
pub fn query_intersections(
    memberships: &[Membership],
    known: &BTreeSet<QueryId>,
) -> Result<Intersections, MetricsError> {
    let mut fingerprints: BTreeMap<&DocId, BTreeSet<QueryId>> = BTreeMap::new();
    for m in memberships {
        if !known.contains(&m.query_id) {
            return Err(MetricsError::UnknownQuery(m.query_id.clone()));
        }
        fingerprints.entry(&m.doc_id).or_default().insert(m.query_id.clone());
    }
    let mut grouped: BTreeMap<BTreeSet<QueryId>, (u64, Vec<DocId>)> = BTreeMap::new();
    let mut summary = IntersectionSummary::default();
    let mut doc_hits = Vec::with_capacity(fingerprints.len());
    for (doc, fp) in fingerprints {
        let size = fp.len() as u64;
        summary.total_memberships += size;
        summary.unique_docs += 1;
        if size > summary.max_overlap {
            summary.max_overlap = size;
            summary.docs_at_max = 0;
        }
        if size == summary.max_overlap {
            summary.docs_at_max += 1;
        }
        doc_hits.push((doc.clone(), size));
        let entry = grouped.entry(fp).or_default();
        entry.0 += 1;
        if entry.1.len() < EXAMPLES {
            entry.1.push(doc.clone());
        }
    }
    let mut patterns: Vec<IntersectionPattern> = grouped
        .into_iter()
        .map(|(queries, (doc_count, example_doc_ids))| IntersectionPattern { queries, doc_count, example_doc_ids })
        .collect();
    patterns.sort_by(|a, b| {
        b.doc_count
            .cmp(&a.doc_count)
            .then(b.size().cmp(&a.size()))
            .then_with(|| a.queries.cmp(&b.queries))
    });
    doc_hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Intersections { patterns, summary, doc_hits })
}

/// Rewrites query ids through `groups` (e.g. query id → genre), dropping the
/// duplicate (doc, group) pairs this creates. Unmapped ids pass through.
pub fn collapse_memberships(memberships: &[Membership], groups: &BTreeMap<QueryId, String>) -> Vec<Membership> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in memberships {
        let q = groups.get(&m.query_id).map(|g| QueryId::new(g.clone())).unwrap_or_else(|| m.query_id.clone());
        if seen.insert((m.doc_id.clone(), q.clone())) {
            out.push(Membership { doc_id: m.doc_id.clone(), query_id: q, rank: m.rank });
        }
    }
    out
}

/// Year bucket; undated documents sort last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum YearBucket {
    Year(i32),
    Unknown,
}

impl fmt::Display for YearBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YearBucket::Year(y) => write!(f, "{y}"),
            YearBucket::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub by_year: BTreeMap<YearBucket, BTreeMap<String, u64>>,
    pub total: u64,
    /// documents with a language other than English or undetermined
    pub non_english: u64,
}

impl GrowthSeries {
    /// Non-English documents over all documents; 0 for an empty corpus.
    pub fn non_english_share(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.non_english as f64 / self.total as f64
        }
    }

    pub fn count(&self, year: YearBucket, language: &str) -> u64 {
        self.by_year.get(&year).and_then(|m| m.get(language)).copied().unwrap_or(0)
    }

    fn merge(mut self, other: GrowthSeries) -> GrowthSeries {
        for (year, langs) in other.by_year {
            let slot = self.by_year.entry(year).or_default();
            for (lang, n) in langs {
                *slot.entry(lang).or_default() += n;
            }
        }
        self.total += other.total;
        self.non_english += other.non_english;
        self
    }
}

pub fn growth_series(documents: &[Document]) -> GrowthSeries {
    documents
        .par_iter()
        .fold(GrowthSeries::default, |mut acc, doc| {
            let year = doc.year.map(YearBucket::Year).unwrap_or(YearBucket::Unknown);
            *acc.by_year.entry(year).or_default().entry(doc.language.clone()).or_default() += 1;
            acc.total += 1;
            if doc.language != "en" && doc.language != UNDETERMINED {
                acc.non_english += 1;
            }
            acc
        })
        .reduce(GrowthSeries::default, GrowthSeries::merge)
}

/// First run of exactly four digits, e.g. `"2009-2010"` → 2009.
pub fn parse_year(raw: &str) -> Option<i32> {
    let b = raw.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                return raw[start..i].parse().ok();
            }
        } else {
            i += 1;
        }
    }
    None
}

pub fn write_intersections_csv<W: Write>(ix: &Intersections, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pattern", "size", "count"])?;
    for p in &ix.patterns {
        w.write_record([p.label(), p.size().to_string(), p.doc_count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_growth_csv<W: Write>(series: &GrowthSeries, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["year", "language", "count"])?;
    for (year, langs) in &series.by_year {
        for (lang, n) in langs {
            w.write_record([year.to_string(), lang.clone(), n.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_budget_csv<W: Write>(budgets: &[ReadingBudget], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_docs", "minutes", "weeks", "years"])?;
    for b in budgets {
        w.write_record([
            b.n_docs.to_string(),
            format!("{:.6}", b.total_minutes),
            format!("{:.6}", b.weeks),
            format!("{:.6}", b.years),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(doc: &str, q: &str) -> Membership {
        Membership { doc_id: DocId::from(doc), query_id: QueryId::from(q), rank: 1 }
    }

    fn known(ids: &[&str]) -> BTreeSet<QueryId> {
        ids.iter().map(|s| QueryId::from(*s)).collect()
    }

    #[test]
    fn reading_examples() {
        assert!((reading_minutes(5000.0, 225.0).unwrap() - 200.0 / 9.0).abs() < 1e-12);
        assert_eq!(reading_minutes(0.0, 225.0).unwrap(), 0.0);
        assert_eq!(reading_minutes(225.0, 225.0).unwrap(), 1.0);
        assert!(reading_minutes(10.0, 0.0).is_err());
        assert!(reading_minutes(10.0, -3.0).is_err());
        assert!(reading_minutes(-1.0, 3.0).is_err());
    }

    #[test]
    fn budgets() {
        let p = ReadingParams::default();
        let small = corpus_reading_budget(660, &p).unwrap();
        // 660 * 5000 / 225 / 60 / 37
        assert!((small.weeks - 3_300_000.0 / 499_500.0).abs() < 1e-9);
        let big = corpus_reading_budget(445_080, &p).unwrap();
        assert!((big.years - 2_225_400_000.0 / 499_500.0 / 52.0).abs() < 1e-9);
        let zero = corpus_reading_budget(0, &p).unwrap();
        assert_eq!((zero.total_minutes, zero.weeks, zero.years), (0.0, 0.0, 0.0));
        let bad = ReadingParams { hours_per_week: 0.0, ..p };
        assert!(corpus_reading_budget(1, &bad).is_err());
    }

    #[test]
    fn single_query_pattern() {
        let ms: Vec<_> = (0..10).map(|i| m(&format!("d{i}"), "2G")).collect();
        let ix = query_intersections(&ms, &known(&["2G"])).unwrap();
        assert_eq!(ix.patterns.len(), 1);
        assert_eq!((ix.patterns[0].size(), ix.patterns[0].doc_count), (1, 10));
        assert_eq!(ix.summary, IntersectionSummary { total_memberships: 10, unique_docs: 10, max_overlap: 1, docs_at_max: 10 });
    }

    #[test]
    fn unknown_query_rejected() {
        let err = query_intersections(&[m("a", "9Z")], &known(&["2G"])).unwrap_err();
        assert_eq!(err, MetricsError::UnknownQuery(QueryId::from("9Z")));
    }

    #[test]
    fn overlap_and_collapse() {
        let ms = vec![m("a", "2G"), m("a", "3G"), m("a", "3GT"), m("b", "2G"), m("c", "3G"), m("c", "3GT")];
        let ix = query_intersections(&ms, &known(&["2G", "3G", "3GT"])).unwrap();
        assert_eq!(ix.summary.max_overlap, 3);
        assert_eq!(ix.summary.docs_at_max, 1);
        assert_eq!(ix.doc_hits[0], (DocId::from("a"), 3));
        let genres: BTreeMap<QueryId, String> =
            [("2G", "IM"), ("3G", "RM"), ("3GT", "RM")].iter().map(|(q, g)| (QueryId::from(*q), g.to_string())).collect();
        let collapsed = collapse_memberships(&ms, &genres);
        let gx = query_intersections(&collapsed, &known(&["IM", "RM"])).unwrap();
        assert_eq!(gx.summary.total_memberships, 4);
        let labels: Vec<_> = gx.patterns.iter().map(|p| (p.label(), p.doc_count)).collect();
        assert!(labels.contains(&("IM&RM".to_string(), 1)));
        assert!(labels.contains(&("RM".to_string(), 1)));
    }

    #[test]
    fn growth_hand_count() {
        let mut docs = Vec::new();
        for i in 0..3 {
            docs.push(Document::new(format!("e{i}"), "t", Some(2000)).with_language("en"));
        }
        for i in 0..2 {
            docs.push(Document::new(format!("z{i}"), "t", Some(2000)).with_language("zh"));
        }
        docs.push(Document::new("e9", "t", Some(2001)).with_language("en"));
        let g = growth_series(&docs);
        assert_eq!(g.count(YearBucket::Year(2000), "en"), 3);
        assert_eq!(g.count(YearBucket::Year(2000), "zh"), 2);
        assert_eq!(g.count(YearBucket::Year(2001), "en"), 1);
        assert_eq!(g.by_year.len(), 2);
        assert!((g.non_english_share() - 2.0 / 6.0).abs() < 1e-12);
        assert!(growth_series(&[]).by_year.is_empty());
        let undated = growth_series(&[Document::new("u", "t", None).with_language("en")]);
        assert_eq!(undated.count(YearBucket::Unknown, "en"), 1);
    }

    #[test]
    fn years() {
        assert_eq!(parse_year("2009"), Some(2009));
        assert_eq!(parse_year("2009-2010"), Some(2009));
        assert_eq!(parse_year("vol 12, 1966"), Some(1966));
        assert_eq!(parse_year("12345 1999"), Some(1999));
        assert_eq!(parse_year("n.d."), None);
    }

    #[test]
    fn csv_outputs() {
        let ms = vec![m("a", "2G"), m("a", "3G"), m("b", "2G")];
        let ix = query_intersections(&ms, &known(&["2G", "3G"])).unwrap();
        let mut buf = Vec::new();
        write_intersections_csv(&ix, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "pattern,size,count\n2G&3G,2,1\n2G,1,1\n");
        let mut buf = Vec::new();
        write_budget_csv(&[corpus_reading_budget(225, &ReadingParams { words_per_doc: 60.0 * 225.0, ..Default::default() }).unwrap()], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n_docs,minutes,weeks,years\n225,13500.000000,"));
        let mut buf = Vec::new();
        write_growth_csv(&growth_series(&[Document::new("u", "t", None)]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "year,language,count\nunknown,und,1\n");
    }

    proptest! {
        #[test]
        fn reading_is_linear(words in 0.0f64..1e7, wpm in 1.0f64..1e4, k in 1.0f64..50.0) {
            let base = reading_minutes(words, wpm).unwrap();
            let scaled = reading_minutes(words * k, wpm).unwrap();
            prop_assert!((scaled - k * base).abs() <= 1e-9 * scaled.abs().max(1.0));
            let slower = reading_minutes(words, wpm * k).unwrap();
            prop_assert!((slower * k - base).abs() <= 1e-9 * base.abs().max(1.0));
        }

        #[test]
        fn budget_is_additive(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            let p = ReadingParams::default();
            let x = corpus_reading_budget(a, &p).unwrap();
            let y = corpus_reading_budget(b, &p).unwrap();
            let z = corpus_reading_budget(a + b, &p).unwrap();
            let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * u.abs().max(1.0);
            prop_assert!(close(z.total_minutes, x.total_minutes + y.total_minutes));
            prop_assert!(close(z.weeks, x.weeks + y.weeks));
            prop_assert!(close(z.years, x.years + y.years));
        }

        #[test]
        fn pattern_sums(pairs in prop::collection::vec((0u8..40, 0u8..6), 0..200)) {
            let ms: Vec<_> = pairs.iter().map(|(d, q)| m(&format!("d{d}"), &format!("q{q}"))).collect();
            let ids: Vec<String> = (0..6).map(|q| format!("q{q}")).collect();
            let k: BTreeSet<QueryId> = ids.iter().map(|s| QueryId::from(s.as_str())).collect();
            let ix = query_intersections(&ms, &k).unwrap();
            let distinct: BTreeSet<_> = pairs.iter().collect();
            let docs: BTreeSet<_> = pairs.iter().map(|p| p.0).collect();
            prop_assert_eq!(ix.summary.total_memberships, distinct.len() as u64);
            prop_assert_eq!(ix.summary.unique_docs, docs.len() as u64);
            prop_assert_eq!(ix.patterns.iter().map(|p| p.doc_count).sum::<u64>(), ix.summary.unique_docs);
            prop_assert_eq!(ix.patterns.iter().map(|p| p.size() as u64 * p.doc_count).sum::<u64>(), ix.summary.total_memberships);
            prop_assert!(ix.patterns.iter().all(|p| p.doc_count >= 1));
        }

        #[test]
        fn growth_conserves(years in prop::collection::vec((prop::option::of(1990i32..2020), 0usize..4), 0..100)) {
            let langs = ["en", "zh", "de", UNDETERMINED];
            let docs: Vec<_> = years.iter().enumerate()
                .map(|(i, (y, l))| Document::new(format!("d{i}"), "t", *y).with_language(langs[*l]))
                .collect();
            let g = growth_series(&docs);
            let sum: u64 = g.by_year.values().flat_map(|m| m.values()).sum();
            prop_assert_eq!(sum, docs.len() as u64);
            prop_assert_eq!(g.total, docs.len() as u64);
        }
    }
}
