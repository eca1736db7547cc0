use std::collections::BTreeMap;

use serde::Serialize;

use super::{CorpusError, DocId, Document};
use crate::textlab::tokenize_title;

/// Maximum year gap at which two identically titled records are reported as
/// likely duplicates.
pub const NEAR_DUPLICATE_YEARS: i32 = 4;

/// Title reduced to its token sequence, space-joined.
pub fn normalized_title(title: &str) -> String {
    tokenize_title(title).join(" ")
}

/// Deduplication key: normalized title plus exact year bucket.
///
/// Records without a year fall into the `unknown` bucket and never share a
/// key with a dated record.
pub fn dedup_key(doc: &Document) -> Result<String, CorpusError> {
    if doc.title.trim().is_empty() {
        return Err(CorpusError::InvalidDocument(format!(
            "{} has an empty title",
            doc.doc_id
        )));
    }
    let title = normalized_title(&doc.title);
    if title.is_empty() {
        return Err(CorpusError::InvalidDocument(format!(
            "{} has no letters in its title",
            doc.doc_id
        )));
    }
    let bucket = match doc.year {
        Some(y) => y.to_string(),
        None => "unknown".to_string(),
    };
    Ok(format!("{title}|{bucket}"))
}

/// Two records with the same normalized title whose years differ by at most
/// [`NEAR_DUPLICATE_YEARS`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NearDuplicate {
    pub normalized_title: String,
    pub first: DocId,
    pub first_year: i32,
    pub second: DocId,
    pub second_year: i32,
}

/// Pairs of distinct records that share a normalized title but sit in
/// different year buckets close enough to look like a citation slip.
pub fn near_duplicates<'a, I>(docs: I) -> Vec<NearDuplicate>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut by_title: BTreeMap<String, Vec<(i32, &DocId)>> = BTreeMap::new();
    for doc in docs {
        if let Some(year) = doc.year {
            let title = normalized_title(&doc.title);
            if !title.is_empty() {
                by_title.entry(title).or_default().push((year, &doc.doc_id));
            }
        }
    }
    let mut out = Vec::new();
    for (title, mut group) in by_title {
        group.sort();
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let (ya, a) = group[i];
                let (yb, b) = group[j];
                if ya != yb && (yb - ya) <= NEAR_DUPLICATE_YEARS {
                    out.push(NearDuplicate {
                        normalized_title: title.clone(),
                        first: a.clone(),
                        first_year: ya,
                        second: b.clone(),
                        second_year: yb,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, year: Option<i32>) -> Document {
        Document::new(id, title, year)
    }

    #[test]
    fn case_and_punctuation_variants_share_a_key() {
        let a = dedup_key(&doc("a", "The Laws of Migration", Some(1889))).unwrap();
        let b = dedup_key(&doc("b", "the laws of migration.", Some(1889))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn year_is_part_of_the_key() {
        let a = dedup_key(&doc("a", "A Theory of Migration", Some(1966))).unwrap();
        let b = dedup_key(&doc("b", "A Theory of Migration", Some(1996))).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn undated_records_never_share_a_dated_key() {
        let a = dedup_key(&doc("a", "Why families move", None)).unwrap();
        let b = dedup_key(&doc("b", "Why families move", Some(1980))).unwrap();
        assert_ne!(a, b);
        assert!(a.ends_with("|unknown"));
    }

    #[test]
    fn empty_title_is_invalid() {
        assert!(matches!(
            dedup_key(&doc("a", "   ", Some(2000))),
            Err(CorpusError::InvalidDocument(_))
        ));
        assert!(dedup_key(&doc("a", "1999", Some(2000))).is_err());
    }

    #[test]
    fn ravenstein_year_slip_is_a_near_duplicate() {
        let docs = vec![
            doc("r1885", "The Laws of Migration", Some(1885)),
            doc("r1889", "The Laws of Migration", Some(1889)),
            doc("lee", "A Theory of Migration", Some(1966)),
            doc("lee2", "A Theory of Migration", Some(1996)),
        ];
        let k1 = dedup_key(&docs[0]).unwrap();
        let k2 = dedup_key(&docs[1]).unwrap();
        assert_ne!(k1, k2);
        let report = near_duplicates(&docs);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].first, DocId::from("r1885"));
        assert_eq!(report[0].second, DocId::from("r1889"));
    }
}
