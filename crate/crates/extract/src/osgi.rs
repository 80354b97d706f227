//! OSGi/Eclipse project trees.
//!
//! Instances are added in phases so the output order is stable: bundles (in
//! manifest path order), their `Require-Bundle` dependencies, declarative
//! services components, features, then products.

use std::collections::BTreeMap;

use crate::manifest::parse_manifest;
use crate::{require_artifacts, walk, Builder, ExtractError, Extraction, ExtractionConfig, SourceFile};

struct Bundle {
    id: String,
    /// Directory holding `META-INF/`, relative to the root.
    root: String,
    requires: Vec<String>,
    origin: String,
}

struct Component {
    class: String,
    bundle: String,
    provides: Vec<String>,
    references: Vec<String>,
    origin: String,
}

pub(crate) fn parse_xml(text: &str) -> Result<roxmltree::Document<'_>, roxmltree::Error> {
    let options = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    roxmltree::Document::parse_with_options(text, options)
}

fn attr(node: roxmltree::Node<'_, '_>, name: &str) -> Option<String> {
    node.attribute(name).map(str::trim).filter(|v| !v.is_empty()).map(str::to_string)
}

fn elements<'a, 'i>(doc: &'a roxmltree::Document<'i>, local: &'a str) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> + 'a {
    doc.descendants().filter(move |n| n.is_element() && n.tag_name().name() == local)
}

pub fn extract_osgi(cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    require_artifacts(cfg, &["Bundle", "Feature", "ServiceInterface", "ServiceComponent"])?;
    let with_products = cfg.arch.resolve_artifact("Product").is_some();
    let files = walk(cfg)?;
    let mut b = Builder::new(cfg);

    let mut manifests = Vec::new();
    let mut components = Vec::new();
    let mut features = Vec::new();
    let mut products = Vec::new();
    for file in &files {
        if file.rel == "META-INF/MANIFEST.MF" || file.rel.ends_with("/META-INF/MANIFEST.MF") {
            manifests.push(file);
        } else if file.name() == "feature.xml" {
            features.push(file);
        } else if file.name().ends_with(".product") {
            products.push(file);
        } else if file.name().ends_with(".xml") && file.dir().split('/').any(|d| d == "OSGI-INF") {
            components.push(file);
        }
    }

    let mut bundles: Vec<Bundle> = Vec::new();
    for file in manifests {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        let manifest = parse_manifest(&text);
        for d in &manifest.diagnostics {
            b.warn(Some(&file.rel), format!("line {}: {}", d.line, d.message));
        }
        let Some(id) = manifest.value("Bundle-SymbolicName") else {
            b.warn(Some(&file.rel), "no Bundle-SymbolicName, skipped");
            continue;
        };
        if let Some(other) = bundles.iter().find(|o| o.id == id) {
            b.warn(Some(&file.rel), format!("bundle `{id}` already defined by {}, skipped", other.origin));
            continue;
        }
        let root = file.dir().strip_suffix("META-INF").unwrap_or("").trim_end_matches('/').to_string();
        let requires = manifest
            .get("Require-Bundle")
            .map(|h| h.clauses.iter().map(|c| c.value().to_string()).filter(|v| !v.is_empty()).collect())
            .unwrap_or_default();
        let display = manifest.value("Bundle-Name").filter(|n| !n.starts_with('%') && *n != id);
        b.ensure("Bundle", id, display, Some(&file.rel));
        bundles.push(Bundle { id: id.to_string(), root, requires, origin: file.rel.clone() });
    }
    for bundle in &bundles {
        for target in &bundle.requires {
            if !b.has(target) {
                b.ensure_external("Bundle", target, Some(&bundle.origin));
            }
            b.connect("Dependency", &bundle.id, target, Some(&bundle.origin));
        }
    }

    let mut parsed = Vec::new();
    for file in components {
        let Some(bundle) = owning_bundle(&bundles, file) else {
            b.warn(Some(&file.rel), "component outside any bundle, skipped");
            continue;
        };
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        let doc = match parse_xml(&text) {
            Ok(doc) => doc,
            Err(e) => {
                b.warn(Some(&file.rel), format!("unparseable XML: {e}"));
                continue;
            }
        };
        if doc.root_element().tag_name().name() != "component" {
            continue;
        }
        let root = doc.root_element();
        let class = elements(&doc, "implementation").find_map(|n| attr(n, "class")).or_else(|| attr(root, "name"));
        let Some(class) = class else {
            b.warn(Some(&file.rel), "component without implementation class, skipped");
            continue;
        };
        parsed.push(Component {
            class,
            bundle: bundle.to_string(),
            provides: elements(&doc, "provide").filter_map(|n| attr(n, "interface")).collect(),
            references: elements(&doc, "reference").filter_map(|n| attr(n, "interface")).collect(),
            origin: file.rel.clone(),
        });
    }
    // An interface lives in the first bundle providing it, or failing that
    // the first bundle referencing it.
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for c in &parsed {
        for i in &c.provides {
            owner.entry(i).or_insert(&c.bundle);
        }
    }
    for c in &parsed {
        for i in &c.references {
            owner.entry(i).or_insert(&c.bundle);
        }
    }
    for c in &parsed {
        let origin = Some(c.origin.as_str());
        if !b.ensure("ServiceComponent", &c.class, None, origin) {
            continue;
        }
        b.contain(&c.bundle, &c.class, origin);
        for i in &c.provides {
            if b.ensure("ServiceInterface", i, None, origin) {
                b.contain(owner[i.as_str()], i, origin);
                b.connect("ProvidedBy", i, &c.class, origin);
            }
        }
        for i in &c.references {
            if b.ensure("ServiceInterface", i, None, origin) {
                b.contain(owner[i.as_str()], i, origin);
                b.connect("Required", &c.class, i, origin);
            }
        }
    }

    for file in features {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        let doc = match parse_xml(&text) {
            Ok(doc) => doc,
            Err(e) => {
                b.warn(Some(&file.rel), format!("unparseable XML: {e}"));
                continue;
            }
        };
        let root = doc.root_element();
        let Some(id) = attr(root, "id").filter(|_| root.tag_name().name() == "feature") else {
            b.warn(Some(&file.rel), "no <feature id>, skipped");
            continue;
        };
        if !b.ensure("Feature", &id, None, Some(&file.rel)) {
            continue;
        }
        for plugin in root.children().filter(|n| n.has_tag_name("plugin")).filter_map(|n| attr(n, "id")) {
            if !b.has(&plugin) {
                b.ensure_external("Bundle", &plugin, Some(&file.rel));
            }
            b.contain(&id, &plugin, Some(&file.rel));
        }
    }

    if !with_products && !products.is_empty() {
        b.warn(None, "the architecture has no Product artifact, *.product files ignored");
    }
    for file in products.into_iter().filter(|_| with_products) {
        let Some(text) = read_or_warn(&mut b, file) else { continue };
        let doc = match parse_xml(&text) {
            Ok(doc) => doc,
            Err(e) => {
                b.warn(Some(&file.rel), format!("unparseable XML: {e}"));
                continue;
            }
        };
        let root = doc.root_element();
        let stem = file.name().trim_end_matches(".product").to_string();
        let id = attr(root, "uid").or_else(|| attr(root, "id")).unwrap_or(stem);
        let display = attr(root, "name").filter(|n| *n != id);
        if !b.ensure("Product", &id, display.as_deref(), Some(&file.rel)) {
            continue;
        }
        for section in root.children().filter(|n| n.is_element()) {
            let (kind, child) = match section.tag_name().name() {
                "features" => ("Feature", "feature"),
                "plugins" => ("Bundle", "plugin"),
                _ => continue,
            };
            for member in section.children().filter(|n| n.has_tag_name(child)).filter_map(|n| attr(n, "id")) {
                if !b.has(&member) {
                    b.ensure_external(kind, &member, Some(&file.rel));
                }
                b.contain(&id, &member, Some(&file.rel));
            }
        }
    }
    Ok(b.finish())
}

/// The bundle with the longest root that is an ancestor of `file`.
fn owning_bundle<'a>(bundles: &'a [Bundle], file: &SourceFile) -> Option<&'a str> {
    bundles
        .iter()
        .filter(|bundle| bundle.root.is_empty() || file.rel.starts_with(&format!("{}/", bundle.root)))
        .max_by_key(|bundle| bundle.root.len())
        .map(|bundle| bundle.id.as_str())
}

pub(crate) fn read_or_warn(b: &mut Builder, file: &SourceFile) -> Option<String> {
    match std::fs::read_to_string(&file.path) {
        Ok(text) => Some(text),
        Err(e) => {
            b.warn(Some(&file.rel), format!("unreadable: {e}"));
            None
        }
    }
}
