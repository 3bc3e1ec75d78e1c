//! TOML map documents.
//!
//! ```toml
//! [[concepts]]
//! id = "body_temperature"
//! name = "body temperature"
//! section = "sensing"
//!
//! [[links]]
//! source = "body_temperature"
//! target = "thermoreceptor_signals"
//! sign = "increase"            # or "decrease"
//! page = "page_sensing"        # required on expert maps
//! marking = "marked_correct"   # optional, default "unmarked"
//!
//! [[pages]]                    # expert maps only
//! id = "page_sensing"
//! title = "Sensing temperature"
//! ```
//!
//! Writing always emits the canonical form: concepts, links and pages
//! sorted by id, default markings omitted. Loading and re-writing a
//! canonical document reproduces it byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use super::{
    CausalError, CausalLink, CausalMap, Concept, ConceptId, ExpertMap, Marking, PageId, Sign,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: CausalError },
    #[error("invalid expert map: {0}")]
    Expert(CausalError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        source: Box<FormatError>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    #[serde(default)]
    concepts: Vec<RawConcept>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    pages: Vec<RawPage>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConcept {
    id: Spanned<String>,
    name: String,
    section: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    source: Spanned<String>,
    target: Spanned<String>,
    sign: Sign,
    #[serde(default)]
    marking: Marking,
    #[serde(default)]
    page: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPage {
    id: String,
    title: String,
}

#[derive(Serialize)]
struct OutDoc<'a> {
    concepts: Vec<OutConcept<'a>>,
    links: Vec<OutLink<'a>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pages: Vec<OutPage<'a>>,
}

#[derive(Serialize)]
struct OutConcept<'a> {
    id: &'a str,
    name: &'a str,
    section: &'a str,
}

#[derive(Serialize)]
struct OutLink<'a> {
    source: &'a str,
    target: &'a str,
    sign: Sign,
    #[serde(skip_serializing_if = "is_unmarked")]
    marking: Marking,
    #[serde(skip_serializing_if = "Option::is_none")]
    page: Option<&'a str>,
}

fn is_unmarked(m: &Marking) -> bool {
    *m == Marking::Unmarked
}

#[derive(Serialize)]
struct OutPage<'a> {
    id: &'a str,
    title: &'a str,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

fn build(src: &str) -> Result<(CausalMap, BTreeMap<PageId, String>), FormatError> {
    let raw: RawDoc = toml::from_str(src)?;
    let mut map = CausalMap::new();
    for c in raw.concepts {
        let line = line_of(src, c.id.span().start);
        map.add_concept(Concept {
            id: ConceptId(c.id.into_inner()),
            name: c.name,
            section: c.section,
        })
        .map_err(|source| FormatError::Invalid { line, source })?;
    }
    for l in raw.links {
        let line = line_of(src, l.source.span().start);
        map.add_link(CausalLink {
            source: ConceptId(l.source.into_inner()),
            target: ConceptId(l.target.into_inner()),
            sign: l.sign,
            marking: l.marking,
            source_page: l.page.map(PageId),
        })
        .map_err(|source| FormatError::Invalid { line, source })?;
    }
    let pages = raw
        .pages
        .into_iter()
        .map(|p| (PageId(p.id), p.title))
        .collect();
    Ok((map, pages))
}

/// Parses a student (or any) map; `pages` entries, if present, are ignored.
pub fn parse_map(src: &str) -> Result<CausalMap, FormatError> {
    build(src).map(|(m, _)| m)
}

pub fn parse_expert(src: &str) -> Result<ExpertMap, FormatError> {
    let (map, pages) = build(src)?;
    ExpertMap::new(map, pages).map_err(FormatError::Expert)
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn in_file(path: &Path) -> impl FnOnce(FormatError) -> FormatError + '_ {
    move |e| FormatError::InFile {
        path: path.display().to_string(),
        source: Box::new(e),
    }
}

pub fn load_map(path: &Path) -> Result<CausalMap, FormatError> {
    parse_map(&read(path)?).map_err(in_file(path))
}

pub fn load_expert(path: &Path) -> Result<ExpertMap, FormatError> {
    parse_expert(&read(path)?).map_err(in_file(path))
}

fn render(map: &CausalMap, pages: Vec<OutPage<'_>>) -> String {
    let doc = OutDoc {
        concepts: map
            .concepts()
            .map(|c| OutConcept {
                id: c.id.as_str(),
                name: &c.name,
                section: &c.section,
            })
            .collect(),
        links: map
            .links()
            .map(|l| OutLink {
                source: l.source.as_str(),
                target: l.target.as_str(),
                sign: l.sign,
                marking: l.marking,
                page: l.source_page.as_ref().map(PageId::as_str),
            })
            .collect(),
        pages,
    };
    toml::to_string(&doc).expect("map documents always serialize")
}

pub fn write_map(map: &CausalMap) -> String {
    render(map, Vec::new())
}

pub fn write_expert(expert: &ExpertMap) -> String {
    let pages = expert
        .pages()
        .map(|(id, title)| OutPage {
            id: id.as_str(),
            title,
        })
        .collect();
    render(expert.map(), pages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::default_expert;

    #[test]
    fn canonical_round_trip_is_byte_stable() {
        let text = write_expert(&default_expert());
        let again = write_expert(&parse_expert(&text).unwrap());
        assert_eq!(text, again);
    }

    #[test]
    fn unsorted_input_canonicalizes() {
        let src = r#"
[[links]]
source = "b"
target = "a"
sign = "decrease"
marking = "marked_could_be_wrong"

[[concepts]]
id = "b"
name = "B"
section = "s"

[[concepts]]
id = "a"
name = "A"
section = "s"
"#;
        let map = parse_map(src).unwrap();
        let canon = write_map(&map);
        assert!(canon.find("id = \"a\"").unwrap() < canon.find("id = \"b\"").unwrap());
        assert_eq!(write_map(&parse_map(&canon).unwrap()), canon);
        assert_eq!(
            map.link(&"b".into(), &"a".into()).unwrap().marking,
            Marking::MarkedCouldBeWrong
        );
    }

    #[test]
    fn semantic_errors_name_the_line() {
        let src = "[[concepts]]\nid = \"a\"\nname = \"A\"\nsection = \"s\"\n\n[[links]]\nsource = \"a\"\ntarget = \"zz\"\nsign = \"increase\"\n";
        let err = parse_map(src).unwrap_err();
        assert!(matches!(err, FormatError::Invalid { line: 7, .. }), "{err}");
        assert!(err.to_string().starts_with("line 7:"));
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let src = "[[concepts]]\nid = \"a\"\nname = \nsection = \"s\"\n";
        let err = parse_map(src).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn bad_sign_is_rejected() {
        let src = "[[concepts]]\nid = \"a\"\nname = \"A\"\nsection = \"s\"\n[[concepts]]\nid = \"b\"\nname = \"B\"\nsection = \"s\"\n[[links]]\nsource = \"a\"\ntarget = \"b\"\nsign = \"sideways\"\n";
        assert!(matches!(parse_map(src), Err(FormatError::Syntax(_))));
    }
}
