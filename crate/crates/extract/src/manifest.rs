//! `META-INF/MANIFEST.MF` parsing.
//!
//! Only the main section (up to the first blank line) is read. Header values
//! may continue on following lines that start with a single space. Clause
//! lists such as `Require-Bundle` are split on commas outside double quotes;
//! each clause is split on `;` into values, `name=value` attributes and
//! `name:=value` directives.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// Paths before the first attribute, usually exactly one.
    pub values: Vec<String>,
    pub attributes: BTreeMap<String, String>,
    pub directives: BTreeMap<String, String>,
}

impl Clause {
    pub fn value(&self) -> &str {
        self.values.first().map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestHeader {
    pub name: String,
    pub raw: String,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub headers: BTreeMap<String, ManifestHeader>,
    pub diagnostics: Vec<ManifestDiagnostic>,
}

impl Manifest {
    pub fn get(&self, name: &str) -> Option<&ManifestHeader> {
        self.headers.get(name)
    }

    /// First clause value of a header, e.g. the symbolic name without its
    /// `singleton:=true` directive.
    pub fn value(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(|h| h.clauses.first()).map(Clause::value).filter(|v| !v.is_empty())
    }
}

pub fn parse_manifest(text: &str) -> Manifest {
    let mut manifest = Manifest::default();
    let mut logical: Vec<(usize, String)> = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            if logical.is_empty() {
                continue;
            }
            break;
        }
        if let Some(rest) = line.strip_prefix(' ') {
            match logical.last_mut() {
                Some((_, current)) => current.push_str(rest),
                None => manifest
                    .diagnostics
                    .push(ManifestDiagnostic { line: index + 1, message: "continuation line without a header".into() }),
            }
        } else {
            logical.push((index + 1, line.to_string()));
        }
    }
    for (line, text) in logical {
        let Some((name, value)) = text.split_once(':') else {
            manifest.diagnostics.push(ManifestDiagnostic { line, message: format!("malformed header `{text}`") });
            continue;
        };
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            manifest.diagnostics.push(ManifestDiagnostic { line, message: format!("malformed header name `{name}`") });
            continue;
        }
        let raw = value.trim().to_string();
        let clauses = parse_clauses(&raw);
        manifest.headers.insert(name.to_string(), ManifestHeader { name: name.to_string(), raw, clauses });
    }
    manifest
}

/// Splits on `separator` outside double-quoted sections.
pub fn split_top_level(text: &str, separator: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut quoted = false;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == '"' {
            quoted = !quoted;
        } else if c == separator && !quoted {
            parts.push(&text[start..i]);
            start = i + c.len_utf8();
        }
    }
    parts.push(&text[start..]);
    parts
}

pub fn parse_clauses(value: &str) -> Vec<Clause> {
    if value.trim().is_empty() {
        return Vec::new();
    }
    split_top_level(value, ',')
        .into_iter()
        .map(|clause| {
            let mut parsed = Clause { values: Vec::new(), attributes: BTreeMap::new(), directives: BTreeMap::new() };
            for part in split_top_level(clause, ';') {
                let part = part.trim();
                if let Some((key, v)) = part.split_once(":=") {
                    parsed.directives.insert(key.trim().to_string(), unquote(v.trim()));
                } else if let Some((key, v)) = part.split_once('=') {
                    parsed.attributes.insert(key.trim().to_string(), unquote(v.trim()));
                } else if !part.is_empty() {
                    parsed.values.push(part.to_string());
                }
            }
            parsed
        })
        .collect()
}

fn unquote(v: &str) -> String {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v).to_string()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn quoted_commas_do_not_split() {
        let m = parse_manifest("Require-Bundle: a;bundle-version=\"[1.0,2.0)\",b\n");
        let clauses = &m.get("Require-Bundle").unwrap().clauses;
        assert_eq!(clauses.len(), 2);
        assert_eq!(clauses[0].value(), "a");
        assert_eq!(clauses[0].attributes.len(), 1);
        assert_eq!(clauses[0].attributes["bundle-version"], "[1.0,2.0)");
        assert_eq!(clauses[1].value(), "b");
        assert!(clauses[1].attributes.is_empty());
    }

    #[test]
    fn directives_are_separate() {
        let m = parse_manifest("Bundle-SymbolicName: x.y;singleton:=true\n");
        assert_eq!(m.value("Bundle-SymbolicName"), Some("x.y"));
        assert_eq!(m.get("Bundle-SymbolicName").unwrap().clauses[0].directives["singleton"], "true");
    }

    #[test]
    fn continuation_lines_join() {
        let text = "Manifest-Version: 1.0\r\nRequire-Bundle: org.eclipse.core.runtime,\r\n org.eclipse.ui;resolution:=optional,\r\n  x\r\n\r\nName: ignored\r\nFoo: bar\r\n";
        let m = parse_manifest(text);
        let clauses = &m.get("Require-Bundle").unwrap().clauses;
        let values: Vec<&str> = clauses.iter().map(Clause::value).collect();
        assert_eq!(values, ["org.eclipse.core.runtime", "org.eclipse.ui", "x"]);
        assert_eq!(clauses[1].directives["resolution"], "optional");
        assert!(m.get("Foo").is_none(), "only the main section is read");
    }

    #[test]
    fn empty_and_malformed() {
        assert!(parse_manifest("").headers.is_empty());
        let m = parse_manifest("no colon here\nGood: yes\n");
        assert_eq!(m.diagnostics.len(), 1);
        assert_eq!(m.diagnostics[0].line, 1);
        assert_eq!(m.value("Good"), Some("yes"));
    }

    proptest! {
        #[test]
        fn unquoted_lists_split_like_naive_commas(items in proptest::collection::vec("[a-z][a-z0-9.]{0,8}", 1..8)) {
            let text = items.join(",");
            let ours: Vec<String> = parse_clauses(&text).iter().map(|c| c.value().to_string()).collect();
            let naive: Vec<String> = text.split(',').map(str::to_string).collect();
            prop_assert_eq!(ours, naive);
        }

        #[test]
        fn quoted_commas_never_split(name in "[a-z]{1,6}", lo in 0u32..9, hi in 0u32..9) {
            let text = format!("{name};bundle-version=\"[{lo}.0,{hi}.0)\",other");
            let clauses = parse_clauses(&text);
            prop_assert_eq!(clauses.len(), 2);
            prop_assert_eq!(clauses[0].value(), name.as_str());
        }
    }
}
