//! Yarn v1 lockfiles and InversifyJS bindings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::Deserialize;

use crate::maven::strip_comments;
use crate::osgi::read_or_warn;
use crate::{require_artifacts, walk, Builder, ExtractError, Extraction, ExtractionConfig, SourceFile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LockEntry {
    /// `name@range` keys sharing this entry.
    pub keys: Vec<(String, String)>,
    pub name: String,
    pub version: String,
    /// Dependency name and requested range.
    pub dependencies: Vec<(String, String)>,
    pub line: usize,
}

impl LockEntry {
    pub fn id(&self) -> String {
        format!("{}@{}", self.name, self.version)
    }
}

/// Splits on whitespace and `,`, honouring double quotes.
fn tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut any = false;
    for c in line.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                any = true;
            }
            c if !quoted && (c.is_whitespace() || c == ',') => {
                if any {
                    out.push(std::mem::take(&mut current));
                    any = false;
                }
            }
            c => {
                current.push(c);
                any = true;
            }
        }
    }
    if any {
        out.push(current);
    }
    out
}

/// `name@range`, where scoped names start with `@`.
fn split_key(key: &str) -> Option<(String, String)> {
    let at = key.get(1..)?.rfind('@')? + 1;
    Some((key[..at].to_string(), key[at + 1..].to_string()))
}

/// Parses a v1 lockfile. Errors carry a line number.
pub(crate) fn parse_lockfile(text: &str) -> Result<Vec<LockEntry>, (usize, String)> {
    let mut entries: Vec<LockEntry> = Vec::new();
    let mut in_dependencies = false;
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let body = line.trim_start();
        match indent {
            0 => {
                if body.starts_with("__metadata") {
                    return Err((line_no, "yarn.lock v2+ is not supported".into()));
                }
                let Some(keys) = body.strip_suffix(':') else {
                    return Err((line_no, format!("expected an entry header, found `{body}`")));
                };
                let keys = tokens(keys)
                    .iter()
                    .map(|k| split_key(k).ok_or_else(|| (line_no, format!("malformed key `{k}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let Some(name) = keys.first().map(|k| k.0.clone()) else {
                    return Err((line_no, "entry without keys".into()));
                };
                entries.push(LockEntry { keys, name, version: String::new(), dependencies: Vec::new(), line: line_no });
                in_dependencies = false;
            }
            _ => {
                let Some(entry) = entries.last_mut() else {
                    return Err((line_no, "indented line outside an entry".into()));
                };
                if indent <= 2 {
                    in_dependencies = body == "dependencies:";
                    if in_dependencies || body.ends_with(':') {
                        continue;
                    }
                    let t = tokens(body);
                    if t.len() == 2 && t[0] == "version" {
                        entry.version = t[1].clone();
                    }
                } else if in_dependencies {
                    match tokens(body).as_slice() {
                        [name, range] => entry.dependencies.push((name.clone(), range.clone())),
                        _ => return Err((line_no, format!("malformed dependency `{body}`"))),
                    }
                }
            }
        }
    }
    if let Some(e) = entries.iter().find(|e| e.version.is_empty()) {
        return Err((e.line, format!("entry `{}` has no version", e.name)));
    }
    Ok(entries)
}

static INJECTABLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"@injectable\s*\(\s*\)\s*(?:@\w+(?:\([^)]*\))?\s*)*(?:export\s+)?(?:default\s+)?(?:abstract\s+)?class\s+(\w+)").unwrap()
});
static CLASS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\bclass\s+(\w+)").unwrap());
static INTERFACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\binterface\s+(\w+)").unwrap());
static INJECT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@inject\s*\(").unwrap());
static BIND: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bbind\s*(?:<[^>]*>)?\s*\(([^()]*(?:\([^()]*\))?[^()]*)\)\s*\.\s*to\s*\(\s*(\w+)\s*\)").unwrap());
static SYMBOL_FOR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"Symbol\.for\(\s*["'`]([^"'`]+)["'`]\s*\)"#).unwrap());

/// Interface name for an injection token: `TYPES.Warrior`,
/// `Symbol.for("Warrior")` and `"Warrior"` all name `Warrior`.
pub(crate) fn token_name(token: &str) -> String {
    let token = token.trim();
    if let Some(c) = SYMBOL_FOR.captures(token) {
        return c[1].to_string();
    }
    let token = token.trim_matches(|c| c == '"' || c == '\'' || c == '`');
    token.rsplit('.').next().unwrap_or(token).trim().to_string()
}

#[derive(Debug, Default, PartialEq, Eq)]
pub(crate) struct TsScan {
    pub injectables: Vec<String>,
    pub interfaces: Vec<String>,
    /// (interface token, class)
    pub bindings: Vec<(String, String)>,
    /// (class, interface token)
    pub injections: Vec<(String, String)>,
}

pub(crate) fn scan_ts(src: &str) -> TsScan {
    let src = strip_comments(src, false);
    let mut scan = TsScan {
        injectables: INJECTABLE.captures_iter(&src).map(|c| c[1].to_string()).collect(),
        interfaces: INTERFACE.captures_iter(&src).map(|c| c[1].to_string()).collect(),
        ..Default::default()
    };
    let classes: Vec<(usize, String)> =
        CLASS.captures_iter(&src).map(|c| (c.get(0).unwrap().start(), c[1].to_string())).collect();
    for m in INJECT.find_iter(&src) {
        let rest = &src[m.end()..];
        let Some(end) = closing_paren(rest) else { continue };
        let token = token_name(&rest[..end]);
        if let Some((_, class)) = classes.iter().rev().find(|(at, _)| *at < m.start()) {
            let pair = (class.clone(), token);
            if !bad_token(&pair.1) && !scan.injections.contains(&pair) {
                scan.injections.push(pair);
            }
        }
    }
    for c in BIND.captures_iter(&src) {
        let pair = (token_name(&c[1]), c[2].to_string());
        if !bad_token(&pair.0) && !scan.bindings.contains(&pair) {
            scan.bindings.push(pair);
        }
    }
    scan
}

fn bad_token(t: &str) -> bool {
    t.is_empty() || !t.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$' || c == '-')
}

fn closing_paren(rest: &str) -> Option<usize> {
    let mut depth = 1usize;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

#[derive(Deserialize)]
struct PackageJson {
    name: Option<String>,
    version: Option<String>,
}

fn find_lockfile(files: &[SourceFile]) -> Option<&SourceFile> {
    files.iter().filter(|f| f.name() == "yarn.lock").min_by_key(|f| (f.rel.matches('/').count(), f.rel.clone()))
}

pub fn extract_yarn(cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    require_artifacts(cfg, &["Package", "Interface", "Class"])?;
    let files = walk(cfg)?;
    let lock = find_lockfile(&files).ok_or(ExtractError::YarnLockNotFound)?;
    let mut b = Builder::new(cfg);
    let text = crate::read(lock)?;
    let entries =
        parse_lockfile(&text).map_err(|(line, message)| ExtractError::Schema { file: format!("{}:{line}", lock.rel), message })?;
    for other in files.iter().filter(|f| f.name() == "yarn.lock" && f.rel != lock.rel) {
        b.warn(Some(&other.rel), format!("ignored, using {}", lock.rel));
    }

    let mut resolved: HashMap<(String, String), String> = HashMap::new();
    for entry in &entries {
        let id = entry.id();
        b.ensure("Package", &id, None, Some(&lock.rel));
        for key in &entry.keys {
            resolved.insert(key.clone(), id.clone());
        }
    }
    for entry in &entries {
        let origin = format!("{}:{}", lock.rel, entry.line);
        for (name, range) in &entry.dependencies {
            match resolved.get(&(name.clone(), range.clone())) {
                Some(target) => b.connect("Dependency", &entry.id(), target, Some(&origin)),
                None => b.warn(Some(&origin), format!("cannot resolve `{name}@{range}`, link skipped")),
            }
        }
    }

    // package.json files give the packages owning source files
    let mut manifests: BTreeMap<String, String> = BTreeMap::new();
    for file in files.iter().filter(|f| f.name() == "package.json") {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        match serde_json::from_str::<PackageJson>(&text) {
            Ok(PackageJson { name: Some(name), version }) => {
                let id = match version {
                    Some(v) => format!("{name}@{v}"),
                    None => name,
                };
                manifests.insert(file.dir().to_string(), id);
            }
            Ok(_) => b.warn(Some(&file.rel), "package.json without a name"),
            Err(e) => b.warn(Some(&file.rel), format!("unparseable package.json: {e}")),
        }
    }
    let package_of = |rel: &str| -> Option<String> {
        let mut dir = rel.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
        loop {
            if let Some(id) = manifests.get(dir) {
                return Some(id.clone());
            }
            if dir.is_empty() {
                return None;
            }
            dir = dir.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
        }
    };

    let mut scans = Vec::new();
    for file in files.iter().filter(|f| {
        let n = f.name();
        (n.ends_with(".ts") || n.ends_with(".tsx")) && !n.ends_with(".d.ts")
    }) {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        let scan = scan_ts(&text);
        if scan.injectables.is_empty() && scan.bindings.is_empty() && scan.injections.is_empty() {
            continue;
        }
        let Some(package) = package_of(&file.rel) else {
            b.warn(Some(&file.rel), "no enclosing package.json, skipped");
            continue;
        };
        scans.push((file.rel.clone(), package, scan));
    }

    let mut class_home: BTreeMap<String, String> = BTreeMap::new();
    for (_, package, scan) in &scans {
        for class in &scan.injectables {
            class_home.entry(class.clone()).or_insert_with(|| package.clone());
        }
    }
    for (_, package, scan) in &scans {
        for (_, class) in &scan.bindings {
            class_home.entry(class.clone()).or_insert_with(|| package.clone());
        }
        for (class, _) in &scan.injections {
            class_home.entry(class.clone()).or_insert_with(|| package.clone());
        }
    }
    let class_ids: HashSet<&String> = class_home.keys().collect();
    let interface_id = |token: &str| {
        if class_ids.contains(&token.to_string()) {
            format!("{token}#interface")
        } else {
            token.to_string()
        }
    };
    let mut interface_home: BTreeMap<String, String> = BTreeMap::new();
    for (_, package, scan) in &scans {
        for i in &scan.interfaces {
            interface_home.entry(interface_id(i)).or_insert_with(|| package.clone());
        }
    }
    for (_, package, scan) in &scans {
        for (token, _) in &scan.bindings {
            interface_home.entry(interface_id(token)).or_insert_with(|| package.clone());
        }
        for (_, token) in &scan.injections {
            interface_home.entry(interface_id(token)).or_insert_with(|| package.clone());
        }
    }

    // creates the instance and its home package on first use
    let place = |b: &mut Builder, kind: &str, id: &str, home: &str, origin: &str| -> bool {
        if b.has(id) {
            return b.type_of(id) == Some(kind);
        }
        if !b.has(home) && !b.ensure("Package", home, None, Some(origin)) {
            return false;
        }
        let added = b.ensure(kind, id, None, Some(origin));
        if added {
            b.contain(home, id, Some(origin));
        }
        added
    };
    let ensure_class = |b: &mut Builder, class: &str, origin: &str| place(b, "Class", class, &class_home[class], origin);
    let ensure_interface =
        |b: &mut Builder, id: &str, origin: &str| place(b, "Interface", id, &interface_home[id], origin);
    for (rel, _, scan) in &scans {
        for class in &scan.injectables {
            ensure_class(&mut b, class, rel);
        }
    }
    for (rel, _, scan) in &scans {
        for (token, class) in &scan.bindings {
            let interface = interface_id(token);
            if ensure_class(&mut b, class, rel)
                && ensure_interface(&mut b, &interface, rel)
            {
                b.connect("ProvidedBy", &interface, class, Some(rel));
            }
        }
        for (class, token) in &scan.injections {
            let interface = interface_id(token);
            if ensure_class(&mut b, class, rel)
                && ensure_interface(&mut b, &interface, rel)
            {
                b.connect("Injects", class, &interface, Some(rel));
            }
        }
    }
    Ok(b.finish())
}
