//! Maven reactors and annotation-based injection.
//!
//! Poms with `<modules>` become MavenArtifacts, every other pom a Module
//! (`groupId:artifactId`). Java sources are scanned with regular expressions
//! for `@Named` classes and `@Inject` fields, setters and constructors.

use std::collections::{BTreeMap, HashMap};
use std::sync::LazyLock;

use regex::Regex;

use crate::osgi::{parse_xml, read_or_warn};
use crate::{require_artifacts, walk, Builder, ExtractError, Extraction, ExtractionConfig};

struct Pom {
    id: String,
    dir: String,
    modules: Vec<String>,
    dependencies: Vec<String>,
    origin: String,
}

fn child_text(node: roxmltree::Node<'_, '_>, name: &str) -> Option<String> {
    node.children()
        .find(|n| n.is_element() && n.tag_name().name() == name)
        .and_then(|n| n.text())
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|n| n.is_element() && n.tag_name().name() == name)
}

fn parse_pom(text: &str, dir: &str, origin: &str) -> Result<Pom, String> {
    let doc = parse_xml(text).map_err(|e| format!("unparseable XML: {e}"))?;
    let project = doc.root_element();
    if project.tag_name().name() != "project" {
        return Err("root element is not <project>".into());
    }
    let parent_group = child(project, "parent").and_then(|p| child_text(p, "groupId"));
    let group = child_text(project, "groupId").or(parent_group.clone()).ok_or("no groupId")?;
    let artifact = child_text(project, "artifactId").ok_or("no artifactId")?;
    let substitute = |v: String| {
        v.replace("${project.groupId}", &group)
            .replace("${pom.groupId}", &group)
            .replace("${groupId}", &group)
            .replace("${project.parent.groupId}", parent_group.as_deref().unwrap_or(&group))
            .replace("${project.artifactId}", &artifact)
    };
    let modules = child(project, "modules")
        .map(|m| {
            m.children()
                .filter(|n| n.has_tag_name("module") || n.tag_name().name() == "module")
                .filter_map(|n| n.text())
                .map(|t| t.trim().trim_end_matches('/').to_string())
                .filter(|t| !t.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let dependencies = child(project, "dependencies")
        .map(|d| {
            d.children()
                .filter(|n| n.is_element() && n.tag_name().name() == "dependency")
                .filter_map(|n| Some(format!("{}:{}", child_text(n, "groupId")?, child_text(n, "artifactId")?)))
                .map(substitute)
                .collect()
        })
        .unwrap_or_default();
    Ok(Pom { id: format!("{group}:{artifact}"), dir: dir.to_string(), modules, dependencies, origin: origin.to_string() })
}

/// Joins `dir` and a relative module path, resolving `.` and `..`.
fn join(dir: &str, rel: &str) -> String {
    let mut parts: Vec<&str> = dir.split('/').filter(|p| !p.is_empty()).collect();
    for part in rel.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            p => parts.push(p),
        }
    }
    parts.join("/")
}

/// Blanks out comments, and with `blank_strings` the contents of string and
/// char literals, keeping line structure.
pub(crate) fn strip_comments(src: &str, blank_strings: bool) -> String {
    let mut out = String::with_capacity(src.len());
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' | '\'' | '`' => {
                out.push(c);
                while let Some(d) = chars.next() {
                    if d == '\\' {
                        let e = chars.next();
                        if blank_strings {
                            out.push_str("  ");
                        } else {
                            out.push(d);
                            out.extend(e);
                        }
                    } else if d == c || d == '\n' {
                        out.push(d);
                        break;
                    } else {
                        out.push(if blank_strings { ' ' } else { d });
                    }
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = ' ';
                for d in chars.by_ref() {
                    if d == '\n' {
                        out.push('\n');
                    }
                    if prev == '*' && d == '/' {
                        break;
                    }
                    prev = d;
                }
                out.push(' ');
            }
            c => out.push(c),
        }
    }
    out
}

static PACKAGE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^\s*package\s+([\w.]+)\s*;").unwrap());
static IMPORT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^\s*import\s+([\w.]+)\s*;").unwrap());
const ANNOTATION: &str = r"(?:@[\w.]+(?:\s*\([^)]*\))?\s+)";
const MODIFIERS: &str = r"(?:(?:public|protected|private|abstract|final|static)\s+)";
static CLASS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?P<annotations>{ANNOTATION}*){MODIFIERS}*class\s+(?P<name>\w+)(?:\s*<[^{{]*?>)?(?:\s+extends\s+[\w.]+(?:<[^{{]*?>)?)?(?:\s+implements\s+(?P<implements>[^{{]+))?\s*\{{"
    ))
    .unwrap()
});
static INTERFACE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"{MODIFIERS}*interface\s+(\w+)")).unwrap());
static NAMED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@(?:javax\.inject\.|jakarta\.inject\.)?Named\b").unwrap());
static INJECT_FIELD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"@(?:javax\.inject\.|jakarta\.inject\.)?Inject\s+{ANNOTATION}*{MODIFIERS}*(?P<type>[\w.]+)(?:<[^;=()]*>)?\s+\w+\s*[;=]")).unwrap()
});
static INJECT_CALL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"@(?:javax\.inject\.|jakarta\.inject\.)?Inject\s+{ANNOTATION}*{MODIFIERS}*(?:void\s+)?\w+\s*\(")).unwrap()
});
static PARAM: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"^\s*{ANNOTATION}*(?:final\s+)?(?P<type>[\w.]+)(?:<.*>)?\s+\w+\s*$")).unwrap()
});

/// What one Java file contributes.
#[derive(Debug, Default, PartialEq, Eq)]
pub(crate) struct JavaScan {
    /// Fully qualified names of interfaces declared in the file.
    pub interfaces: Vec<String>,
    /// `@Named` or injected-into classes: (class, provided interfaces, injected types).
    pub components: Vec<(String, Vec<String>, Vec<String>)>,
}

/// Heuristic scan of one Java compilation unit. Injection points are
/// attributed to the nearest preceding class declaration.
pub(crate) fn scan_java(src: &str) -> JavaScan {
    let src = strip_comments(src, true);
    let package = PACKAGE.captures(&src).map(|c| c[1].to_string());
    let imports: HashMap<String, String> = IMPORT
        .captures_iter(&src)
        .map(|c| {
            let fq = c[1].to_string();
            (fq.rsplit('.').next().unwrap_or(&fq).to_string(), fq)
        })
        .collect();
    let qualify = |name: &str| -> String {
        let name = name.trim();
        if name.contains('.') {
            return name.to_string();
        }
        match (imports.get(name), &package) {
            (Some(fq), _) => fq.clone(),
            (None, Some(p)) => format!("{p}.{name}"),
            (None, None) => name.to_string(),
        }
    };

    let mut scan = JavaScan::default();
    for c in INTERFACE.captures_iter(&src) {
        let start = c.get(0).unwrap().start();
        if src[..start].trim_end().ends_with('@') {
            continue;
        }
        scan.interfaces.push(qualify(&c[1]));
    }

    struct Decl {
        at: usize,
        name: String,
        named: bool,
        implements: Vec<String>,
        injects: Vec<String>,
    }
    let mut decls: Vec<Decl> = CLASS
        .captures_iter(&src)
        .map(|c| Decl {
            at: c.get(0).unwrap().start(),
            name: qualify(&c["name"]),
            named: NAMED.is_match(&c["annotations"]),
            implements: c
                .name("implements")
                .map(|m| split_types(m.as_str()).into_iter().map(|t| qualify(&t)).collect())
                .unwrap_or_default(),
            injects: Vec::new(),
        })
        .collect();

    let mut points: Vec<(usize, String)> = Vec::new();
    for c in INJECT_FIELD.captures_iter(&src) {
        points.push((c.get(0).unwrap().start(), c["type"].to_string()));
    }
    for c in INJECT_CALL.captures_iter(&src) {
        let at = c.get(0).unwrap().start();
        if points.iter().any(|(p, _)| *p == at) {
            continue;
        }
        for param in split_types(balanced(&src[c.get(0).unwrap().end()..])) {
            if let Some(p) = PARAM.captures(&param) {
                points.push((at, p["type"].to_string()));
            }
        }
    }
    points.sort_by_key(|(at, _)| *at);
    for (at, ty) in points {
        if let Some(decl) = decls.iter_mut().rev().find(|d| d.at < at) {
            let ty = qualify(&ty);
            if !decl.injects.contains(&ty) {
                decl.injects.push(ty);
            }
        }
    }
    for d in decls {
        if d.named || !d.injects.is_empty() {
            let provides = if d.named { d.implements } else { Vec::new() };
            scan.components.push((d.name, provides, d.injects));
        }
    }
    scan
}

/// Text up to the parenthesis closing an already opened one.
fn balanced(rest: &str) -> &str {
    let mut depth = 1usize;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return &rest[..i];
                }
            }
            _ => {}
        }
    }
    rest
}

/// Splits a comma list, ignoring commas inside `<...>` and `(...)`.
fn split_types(list: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in list.chars() {
        match c {
            '<' | '(' => {
                depth += 1;
                current.push(c);
            }
            '>' | ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => parts.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    parts.push(current);
    parts
        .into_iter()
        .map(|p| {
            let p = p.trim();
            // generic arguments are not part of the interface identity
            p.split('<').next().unwrap_or(p).trim().to_string()
        })
        .filter(|p| !p.is_empty())
        .collect()
}

pub fn extract_maven(cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    require_artifacts(cfg, &["MavenArtifact", "Module", "ServiceInterface", "ServiceComponent"])?;
    let files = walk(cfg)?;
    let mut b = Builder::new(cfg);

    let mut poms: Vec<Pom> = Vec::new();
    for file in files.iter().filter(|f| f.name() == "pom.xml") {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        match parse_pom(&text, file.dir(), &file.rel) {
            Ok(pom) if poms.iter().any(|p| p.id == pom.id) => {
                b.warn(Some(&file.rel), format!("`{}` is defined twice, skipped", pom.id));
            }
            Ok(pom) => poms.push(pom),
            Err(message) => b.warn(Some(&file.rel), format!("{message}, file skipped")),
        }
    }
    for pom in &poms {
        let kind = if pom.modules.is_empty() { "Module" } else { "MavenArtifact" };
        b.ensure(kind, &pom.id, None, Some(&pom.origin));
    }
    let by_dir: HashMap<&str, &Pom> = poms.iter().map(|p| (p.dir.as_str(), p)).collect();
    for pom in poms.iter().filter(|p| !p.modules.is_empty()) {
        for module in &pom.modules {
            let dir = join(&pom.dir, module);
            match by_dir.get(dir.as_str()) {
                Some(child) if child.modules.is_empty() => b.contain(&pom.id, &child.id, Some(&pom.origin)),
                Some(child) => b.warn(
                    Some(&pom.origin),
                    format!("module `{module}` is itself an aggregator ({}), not contained", child.id),
                ),
                None => b.warn(Some(&pom.origin), format!("module `{module}` has no pom.xml in the tree")),
            }
        }
    }
    for pom in poms.iter().filter(|p| p.modules.is_empty()) {
        for dep in &pom.dependencies {
            if poms.iter().any(|p| p.modules.is_empty() && &p.id == dep) {
                b.connect("Dependency", &pom.id, dep, Some(&pom.origin));
            }
        }
    }

    // each source file belongs to the Module with the deepest enclosing pom
    let module_of = |rel: &str| -> Option<&str> {
        poms.iter()
            .filter(|p| p.modules.is_empty())
            .filter(|p| p.dir.is_empty() || rel.starts_with(&format!("{}/", p.dir)))
            .max_by_key(|p| p.dir.len())
            .map(|p| p.id.as_str())
    };
    let mut scans = Vec::new();
    for file in files.iter().filter(|f| f.name().ends_with(".java")) {
        let Some(module) = module_of(&file.rel) else { continue };
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        scans.push((file.rel.clone(), module.to_string(), scan_java(&text)));
    }
    // an interface belongs to the module declaring it, else to the first
    // module using it
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for (_, module, scan) in &scans {
        for i in &scan.interfaces {
            owner.entry(i.clone()).or_insert_with(|| module.clone());
        }
    }
    for (_, module, scan) in &scans {
        for (_, provides, injects) in &scan.components {
            for i in provides.iter().chain(injects) {
                owner.entry(i.clone()).or_insert_with(|| module.clone());
            }
        }
    }
    let classes: Vec<&str> =
        scans.iter().flat_map(|(_, _, s)| s.components.iter().map(|(c, _, _)| c.as_str())).collect();
    for (rel, module, scan) in &scans {
        let origin = Some(rel.as_str());
        for (class, provides, injects) in &scan.components {
            if !b.ensure("ServiceComponent", class, None, origin) {
                continue;
            }
            b.contain(module, class, origin);
            for i in provides {
                if b.ensure("ServiceInterface", i, None, origin) {
                    b.contain(&owner[i], i, origin);
                    b.connect("ProvidedBy", i, class, origin);
                }
            }
            for i in injects {
                if classes.contains(&i.as_str()) {
                    b.warn(origin, format!("`{class}` injects the component class `{i}` directly, not linked"));
                    continue;
                }
                if b.ensure("ServiceInterface", i, None, origin) {
                    b.contain(&owner[i], i, origin);
                    b.connect("Required", class, i, origin);
                }
            }
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_class_provides_its_interfaces() {
        let scan = scan_java(
            "package p;\nimport q.I;\n@Named\n@Singleton\npublic class A extends Base implements I, J<String> {\n}\n",
        );
        assert_eq!(scan.components, vec![("p.A".to_string(), vec!["q.I".to_string(), "p.J".to_string()], vec![])]);
    }

    #[test]
    fn field_and_constructor_injection() {
        let src = r#"
package p;
// @Inject Ignored ignored;
public class B {
    @Inject
    private I i;
    @Inject @Named("x") protected java.util.List<K> ks;
    private final L l;
    @Inject
    public B(final L l, @Named("m") M m) { this.l = l; }
    String s = "@Inject Fake f;";
}
"#;
        let scan = scan_java(src);
        assert_eq!(scan.components.len(), 1);
        let (class, provides, injects) = &scan.components[0];
        assert_eq!(class, "p.B");
        assert!(provides.is_empty());
        assert_eq!(injects, &["p.I", "java.util.List", "p.L", "p.M"]);
    }

    #[test]
    fn plain_classes_and_interfaces() {
        let scan = scan_java("package p;\npublic interface I { void run(); }\nclass C implements I {}\n");
        assert_eq!(scan.interfaces, ["p.I"]);
        assert!(scan.components.is_empty());
        assert!(scan_java("@interface Named {}").interfaces.is_empty());
    }

    #[test]
    fn module_paths_resolve() {
        assert_eq!(join("", "m1"), "m1");
        assert_eq!(join("a/b", "../c/"), "a/c");
        assert_eq!(join("a", "./x/y"), "a/x/y");
    }

    #[test]
    fn comments_are_blanked() {
        let s = strip_comments("a /* x\ny */ b // c\n\"//not\" d", true);
        assert_eq!(s, "a \n  b \n\"     \" d");
        assert_eq!(strip_comments("x('//a') // b", false), "x('//a') ");
    }
}
