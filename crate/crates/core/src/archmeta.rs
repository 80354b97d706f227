//! The architecture language (`.spvizmodel`): artifact types, the containment
//! hierarchy between them and named, directed connections.
//!
//! ```text
//! package de.cau.cs.kieler.spviz.osgi
//! SPVizModel OSGi {
//!   Feature { contains Bundle }
//!   Bundle { Dependency connects Bundle }
//! }
//! ```
//!
//! `contains X` refers to a top-level artifact; `contains X { ... }` declares
//! `X` inline and registers it globally as well.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::syntax::{has_errors, Cursor, Diagnostic, Located, PResult, Pos, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureModel {
    pub package_name: Located<String>,
    pub model_name: Located<String>,
    pub artifacts: Vec<ArtifactDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactDecl {
    pub name: Located<String>,
    pub containments: Vec<Located<String>>,
    pub connections: Vec<ConnectionDecl>,
    pub decl_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionDecl {
    pub name: Located<String>,
    pub source: String,
    pub target: Located<String>,
}

/// Index of an artifact type in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtifactId(pub usize);

/// A connection identified by its owning artifact and its position in that
/// artifact's connection list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectionId {
    pub owner: ArtifactId,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Model,
    Artifact(ArtifactId),
    Connection(ConnectionId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchError {
    #[error("unresolved artifact `{0}`")]
    UnresolvedArtifact(String),
    #[error("empty containment chain")]
    EmptyChain,
}

pub fn parse_architecture(text: &str) -> Result<ArchitectureModel, Vec<Diagnostic>> {
    let mut parser = ArchParser { cursor: Cursor::new(text), artifacts: Vec::new() };
    let parsed = parser.model();
    let mut diags = std::mem::take(&mut parser.cursor.diags);
    match parsed {
        Ok(model) => {
            diags.extend(declaration_diagnostics(&model));
            if has_errors(&diags) {
                Err(diags)
            } else {
                Ok(model)
            }
        }
        Err(_) => Err(diags),
    }
}

struct ArchParser {
    cursor: Cursor,
    artifacts: Vec<Option<ArtifactDecl>>,
}

impl ArchParser {
    fn model(&mut self) -> PResult<ArchitectureModel> {
        self.cursor.expect_keyword("package")?;
        let package_name = self.cursor.expect_ident("package name")?;
        self.cursor.expect_keyword("SPVizModel")?;
        let model_name = self.cursor.expect_ident("model name")?;
        if model_name.value.contains('.') {
            self.cursor.diags.push(Diagnostic::error(
                model_name.pos,
                format!("model name `{}` must not contain `.`", model_name.value),
            ));
        }
        self.cursor.expect(TokenKind::LBrace)?;
        while !self.cursor.at(&TokenKind::RBrace) {
            if self.cursor.at(&TokenKind::Eof) {
                return self.cursor.fail("expected `}`");
            }
            self.artifact()?;
        }
        self.cursor.advance();
        self.cursor.expect(TokenKind::Eof)?;
        let artifacts = std::mem::take(&mut self.artifacts).into_iter().flatten().collect();
        Ok(ArchitectureModel { package_name, model_name, artifacts })
    }

    /// Parses `Name [{ Reference* }]` and registers it; returns the name.
    fn artifact(&mut self) -> PResult<Located<String>> {
        let name = self.cursor.expect_ident("artifact name")?;
        let slot = self.artifacts.len();
        self.artifacts.push(None);
        let mut decl = ArtifactDecl { name: name.clone(), containments: Vec::new(), connections: Vec::new(), decl_index: slot };
        if self.cursor.at(&TokenKind::LBrace) {
            self.cursor.advance();
            loop {
                match &self.cursor.peek().kind {
                    TokenKind::RBrace => {
                        self.cursor.advance();
                        break;
                    }
                    TokenKind::Ident(word)
                        if word == "contains" && !matches!(&self.cursor.peek_nth(1).kind, TokenKind::Ident(w) if w == "connects") =>
                    {
                        self.cursor.advance();
                        let target = if matches!(self.cursor.peek_nth(1).kind, TokenKind::LBrace) {
                            self.artifact()?
                        } else {
                            self.cursor.expect_ident("contained artifact")?
                        };
                        decl.containments.push(target);
                    }
                    TokenKind::Ident(_) => {
                        let conn = self.cursor.expect_ident("connection name")?;
                        self.cursor.expect_keyword("connects")?;
                        let target = self.cursor.expect_ident("connected artifact")?;
                        decl.connections.push(ConnectionDecl { name: conn, source: name.value.clone(), target });
                    }
                    _ => return self.cursor.fail("expected `contains`, a connection or `}`"),
                }
            }
        }
        self.artifacts[slot] = Some(decl);
        Ok(name)
    }
}

/// Name-level checks that need no resolution: duplicates and dotted names.
fn declaration_diagnostics(model: &ArchitectureModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen: HashMap<&str, Pos> = HashMap::new();
    for artifact in &model.artifacts {
        let name = &artifact.name;
        if name.value.contains('.') {
            diags.push(Diagnostic::error(name.pos, format!("artifact name `{}` must not contain `.`", name.value)));
        }
        if let Some(first) = seen.get(name.as_str()) {
            diags.push(Diagnostic::error(
                name.pos,
                format!("duplicate artifact `{}` (first declared at {first})", name.value),
            ));
        } else {
            seen.insert(name.as_str(), name.pos);
        }
        let mut conns: HashSet<&str> = HashSet::new();
        for conn in &artifact.connections {
            if conn.name.value.contains('.') {
                diags.push(Diagnostic::error(
                    conn.name.pos,
                    format!("connection name `{}` must not contain `.`", conn.name.value),
                ));
            }
            if !conns.insert(conn.name.as_str()) {
                diags.push(Diagnostic::error(
                    conn.name.pos,
                    format!("duplicate connection `{}` in artifact `{}`", conn.name.value, name.value),
                ));
            }
        }
        let mut contained: HashSet<&str> = HashSet::new();
        for child in &artifact.containments {
            if !contained.insert(child.as_str()) {
                diags.push(Diagnostic::error(
                    child.pos,
                    format!("duplicate containment of `{}` in artifact `{}`", child.value, name.value),
                ));
            }
        }
    }
    diags
}

impl fmt::Display for ArchitectureModel {
    /// Canonical source form: every artifact at top level, containments as
    /// bare references.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "package {}", self.package_name.value)?;
        writeln!(f)?;
        writeln!(f, "SPVizModel {} {{", self.model_name.value)?;
        for artifact in &self.artifacts {
            if artifact.containments.is_empty() && artifact.connections.is_empty() {
                writeln!(f, "  {}", artifact.name.value)?;
                continue;
            }
            writeln!(f, "  {} {{", artifact.name.value)?;
            for conn in &artifact.connections {
                writeln!(f, "    {} connects {}", conn.name.value, conn.target.value)?;
            }
            for child in &artifact.containments {
                writeln!(f, "    contains {}", child.value)?;
            }
            writeln!(f, "  }}")?;
        }
        writeln!(f, "}}")
    }
}

#[derive(Debug, Clone)]
struct ResolvedConnection {
    target: ArtifactId,
}

/// An architecture whose references all resolve, with a symbol table of
/// qualified names (`Model`, `Model.Artifact`, `Model.Artifact.Connection`).
#[derive(Debug, Clone)]
pub struct ValidatedArchitecture {
    model: ArchitectureModel,
    index: HashMap<String, ArtifactId>,
    containments: Vec<Vec<ArtifactId>>,
    connections: Vec<Vec<ResolvedConnection>>,
    symbols: BTreeMap<String, Symbol>,
    warnings: Vec<Diagnostic>,
}

impl PartialEq for ValidatedArchitecture {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
    }
}

pub fn validate_architecture(model: ArchitectureModel) -> Result<ValidatedArchitecture, Vec<Diagnostic>> {
    let mut diags = declaration_diagnostics(&model);
    let mut index = HashMap::new();
    for (i, artifact) in model.artifacts.iter().enumerate() {
        index.entry(artifact.name.value.clone()).or_insert(ArtifactId(i));
    }

    let mut containments = Vec::with_capacity(model.artifacts.len());
    let mut connections = Vec::with_capacity(model.artifacts.len());
    for artifact in &model.artifacts {
        let mut children = Vec::new();
        for child in &artifact.containments {
            match index.get(child.as_str()) {
                Some(&id) => children.push(id),
                None => diags.push(Diagnostic::error(
                    child.pos,
                    format!("`{}` contains undeclared artifact `{}`", artifact.name.value, child.value),
                )),
            }
        }
        containments.push(children);
        let mut conns = Vec::new();
        for conn in &artifact.connections {
            match index.get(conn.target.as_str()) {
                Some(&target) => conns.push(ResolvedConnection { target }),
                None => {
                    diags.push(Diagnostic::error(
                        conn.target.pos,
                        format!(
                            "connection `{}.{}` targets unresolved artifact `{}`",
                            artifact.name.value, conn.name.value, conn.target.value
                        ),
                    ));
                    // keep indices aligned with the declaration list
                    conns.push(ResolvedConnection { target: ArtifactId(usize::MAX) });
                }
            }
        }
        connections.push(conns);
    }

    if has_errors(&diags) {
        return Err(diags);
    }

    diags.extend(cycle_warnings(&model, &containments));

    let model_name = model.model_name.value.clone();
    let mut symbols = BTreeMap::new();
    symbols.insert(model_name.clone(), Symbol::Model);
    for (i, artifact) in model.artifacts.iter().enumerate() {
        let qualified = format!("{model_name}.{}", artifact.name.value);
        for (c, conn) in artifact.connections.iter().enumerate() {
            symbols.insert(
                format!("{qualified}.{}", conn.name.value),
                Symbol::Connection(ConnectionId { owner: ArtifactId(i), index: c }),
            );
        }
        symbols.insert(qualified, Symbol::Artifact(ArtifactId(i)));
    }

    Ok(ValidatedArchitecture { model, index, containments, connections, symbols, warnings: diags })
}

/// One warning per back edge found by a depth-first walk in declaration order.
fn cycle_warnings(model: &ArchitectureModel, containments: &[Vec<ArtifactId>]) -> Vec<Diagnostic> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }

    fn visit(
        node: usize,
        model: &ArchitectureModel,
        containments: &[Vec<ArtifactId>],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
        out: &mut Vec<Diagnostic>,
    ) {
        marks[node] = Mark::Active;
        stack.push(node);
        for (slot, child) in containments[node].iter().enumerate() {
            match marks[child.0] {
                Mark::New => visit(child.0, model, containments, marks, stack, out),
                Mark::Active => {
                    let start = stack.iter().position(|&n| n == child.0).unwrap_or(0);
                    let mut names: Vec<&str> =
                        stack[start..].iter().map(|&n| model.artifacts[n].name.as_str()).collect();
                    names.push(model.artifacts[child.0].name.as_str());
                    out.push(Diagnostic::warning(
                        model.artifacts[node].containments[slot].pos,
                        format!("containment cycle: {}", names.join(" contains ")),
                    ));
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[node] = Mark::Done;
    }

    let mut marks = vec![Mark::New; model.artifacts.len()];
    let mut out = Vec::new();
    for start in 0..model.artifacts.len() {
        if marks[start] == Mark::New {
            visit(start, model, containments, &mut marks, &mut Vec::new(), &mut out);
        }
    }
    out
}

impl ValidatedArchitecture {
    pub fn model(&self) -> &ArchitectureModel {
        &self.model
    }

    pub fn model_name(&self) -> &str {
        &self.model.model_name.value
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn artifact_count(&self) -> usize {
        self.model.artifacts.len()
    }

    pub fn artifact_ids(&self) -> impl Iterator<Item = ArtifactId> + '_ {
        (0..self.model.artifacts.len()).map(ArtifactId)
    }

    pub fn artifact_id(&self, name: &str) -> Option<ArtifactId> {
        self.index.get(name).copied()
    }

    pub fn artifact(&self, id: ArtifactId) -> &ArtifactDecl {
        &self.model.artifacts[id.0]
    }

    pub fn artifact_name(&self, id: ArtifactId) -> &str {
        self.model.artifacts[id.0].name.as_str()
    }

    pub fn qualified_artifact_name(&self, id: ArtifactId) -> String {
        format!("{}.{}", self.model_name(), self.artifact_name(id))
    }

    /// Directly contained artifact types, in declaration order.
    pub fn children(&self, id: ArtifactId) -> &[ArtifactId] {
        &self.containments[id.0]
    }

    pub fn contains(&self, parent: ArtifactId, child: ArtifactId) -> bool {
        self.containments[parent.0].contains(&child)
    }

    /// Position of `child` within `parent`'s containment list.
    pub fn containment_slot(&self, parent: ArtifactId, child: ArtifactId) -> Option<usize> {
        self.containments[parent.0].iter().position(|&c| c == child)
    }

    pub fn connections(&self, owner: ArtifactId) -> impl Iterator<Item = ConnectionId> + '_ {
        (0..self.connections[owner.0].len()).map(move |index| ConnectionId { owner, index })
    }

    pub fn all_connections(&self) -> impl Iterator<Item = ConnectionId> + '_ {
        self.artifact_ids().flat_map(|a| self.connections(a))
    }

    pub fn connection(&self, owner: ArtifactId, name: &str) -> Option<ConnectionId> {
        self.model.artifacts[owner.0]
            .connections
            .iter()
            .position(|c| c.name.value == name)
            .map(|index| ConnectionId { owner, index })
    }

    pub fn connection_name(&self, id: ConnectionId) -> &str {
        self.model.artifacts[id.owner.0].connections[id.index].name.as_str()
    }

    pub fn connection_target(&self, id: ConnectionId) -> ArtifactId {
        self.connections[id.owner.0][id.index].target
    }

    /// `Model.Artifact.Connection`
    pub fn qualified_connection_name(&self, id: ConnectionId) -> String {
        format!("{}.{}.{}", self.model_name(), self.artifact_name(id.owner), self.connection_name(id))
    }

    pub fn symbols(&self) -> &BTreeMap<String, Symbol> {
        &self.symbols
    }

    /// Looks up a qualified name. Names without the model prefix are tried
    /// with it as well.
    pub fn resolve(&self, name: &str) -> Option<Symbol> {
        self.symbols
            .get(name)
            .or_else(|| self.symbols.get(&format!("{}.{}", self.model_name(), name)))
            .copied()
    }

    pub fn resolve_artifact(&self, name: &str) -> Option<ArtifactId> {
        match self.resolve(name) {
            Some(Symbol::Artifact(id)) => Some(id),
            _ => None,
        }
    }

    pub fn resolve_connection(&self, name: &str) -> Option<ConnectionId> {
        match self.resolve(name) {
            Some(Symbol::Connection(id)) => Some(id),
            _ => None,
        }
    }

    /// Index of the first pair `(chain[i], chain[i+1])` not linked by direct
    /// containment, if any.
    pub fn first_broken_link(&self, chain: &[ArtifactId]) -> Option<usize> {
        chain.windows(2).position(|pair| !self.contains(pair[0], pair[1]))
    }

    /// Renders a short summary for listings.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for id in self.artifact_ids() {
            let _ = write!(out, "{}", self.artifact_name(id));
            let children: Vec<&str> = self.children(id).iter().map(|&c| self.artifact_name(c)).collect();
            if !children.is_empty() {
                let _ = write!(out, " contains [{}]", children.join(", "));
            }
            out.push('\n');
        }
        out
    }
}

/// True iff each consecutive pair of the chain is linked by direct
/// containment. Names may be qualified or bare.
pub fn containment_chain_valid(arch: &ValidatedArchitecture, chain: &[&str]) -> Result<bool, ArchError> {
    if chain.is_empty() {
        return Err(ArchError::EmptyChain);
    }
    let ids = chain
        .iter()
        .map(|name| arch.resolve_artifact(name).ok_or_else(|| ArchError::UnresolvedArtifact((*name).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(arch.first_broken_link(&ids).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Severity;

    pub(crate) const OSGI: &str = include_str!("../../../models/osgi-basic.spvizmodel");

    fn validated(text: &str) -> ValidatedArchitecture {
        validate_architecture(parse_architecture(text).expect("parse")).expect("validate")
    }

    #[test]
    fn parses_osgi_listing() {
        let model = parse_architecture(OSGI).unwrap();
        assert_eq!(model.package_name.value, "de.cau.cs.kieler.spviz.osgi");
        assert_eq!(model.model_name.value, "OSGi");
        let names: Vec<_> = model.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["Feature", "Bundle", "ServiceInterface", "ServiceComponent"]);
        let connections: usize = model.artifacts.iter().map(|a| a.connections.len()).sum();
        let containments: usize = model.artifacts.iter().map(|a| a.containments.len()).sum();
        assert_eq!((connections, containments), (3, 3));
        assert_eq!(model.artifacts[2].decl_index, 2);
    }

    #[test]
    fn empty_model() {
        let model = parse_architecture("package p SPVizModel M {}").unwrap();
        assert_eq!(model.model_name.value, "M");
        assert!(model.artifacts.is_empty());
    }

    #[test]
    fn self_connection_is_allowed() {
        let arch = validated("package p SPVizModel M { Class { Inherits connects Class } }");
        let class = arch.artifact_id("Class").unwrap();
        let inherits = arch.connection(class, "Inherits").unwrap();
        assert_eq!(arch.connection_target(inherits), class);
    }

    #[test]
    fn inline_declarations_register_globally() {
        let model = parse_architecture("package p SPVizModel M { A { contains B { X connects A } } }").unwrap();
        assert_eq!(model.artifacts.len(), 2);
        assert_eq!(model.artifacts[0].name.value, "A");
        assert_eq!(model.artifacts[1].name.value, "B");
        assert_eq!(model.artifacts[0].containments[0].value, "B");
        assert_eq!(model.artifacts[1].connections[0].target.value, "A");
    }

    #[test]
    fn inline_and_top_level_duplicate_is_an_error() {
        let diags = parse_architecture("package p SPVizModel M { A { contains B {} } B }").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.starts_with("duplicate artifact `B`"), "{}", diags[0].message);
        assert_eq!(diags[0].pos(), Pos::new(1, 46));
    }

    #[test]
    fn duplicate_connections_and_dotted_names() {
        let diags =
            parse_architecture("package p SPVizModel M { A { D connects A D connects A } B.C }").unwrap_err();
        let messages: Vec<_> = diags.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(
            messages,
            ["duplicate connection `D` in artifact `A`", "artifact name `B.C` must not contain `.`"]
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let diags = parse_architecture("package p\nSPVizModel M {\n  A { contains }\n}").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].pos(), Pos::new(3, 16));
        assert!(diags[0].message.contains("expected contained artifact"));

        let diags = parse_architecture("").unwrap_err();
        assert_eq!(diags[0].message, "expected `package`, found end of input");
    }

    #[test]
    fn connection_named_contains() {
        let model = parse_architecture("package p SPVizModel M { A { contains connects A } }").unwrap();
        assert_eq!(model.artifacts[0].connections[0].name.value, "contains");
    }

    #[test]
    fn symbol_table_has_qualified_connections() {
        let arch = validated(OSGI);
        assert!(matches!(arch.symbols().get("OSGi.Bundle.Dependency"), Some(Symbol::Connection(_))));
        assert!(matches!(arch.symbols().get("OSGi.Bundle"), Some(Symbol::Artifact(ArtifactId(1)))));
        assert_eq!(arch.symbols().get("OSGi"), Some(&Symbol::Model));
        // 1 model + 4 artifacts + 3 connections
        assert_eq!(arch.symbols().len(), 8);
    }

    #[test]
    fn undeclared_containment_is_reported() {
        let model = parse_architecture("package p SPVizModel M { A { contains Ghost } }").unwrap();
        let diags = validate_architecture(model).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("`Ghost`"));
        assert_eq!(diags[0].pos(), Pos::new(1, 39));
    }

    #[test]
    fn unresolved_connection_target_is_reported() {
        let model = parse_architecture("package p SPVizModel M { A { D connects Nope } }").unwrap();
        let diags = validate_architecture(model).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("`Nope`"));
    }

    #[test]
    fn containment_cycle_is_a_warning() {
        let arch = validated("package p SPVizModel M { A { contains B } B { contains A } }");
        assert_eq!(arch.warnings().len(), 1);
        assert_eq!(arch.warnings()[0].severity, Severity::Warning);
        assert_eq!(arch.warnings()[0].message, "containment cycle: A contains B contains A");

        let arch = validated("package p SPVizModel M { A { contains A } }");
        assert_eq!(arch.warnings()[0].message, "containment cycle: A contains A");
    }

    #[test]
    fn chains() {
        let arch = validated(OSGI);
        assert_eq!(containment_chain_valid(&arch, &["Feature", "Bundle"]), Ok(true));
        assert_eq!(containment_chain_valid(&arch, &["OSGi.Feature", "OSGi.Bundle", "OSGi.ServiceComponent"]), Ok(true));
        assert_eq!(containment_chain_valid(&arch, &["Feature"]), Ok(true));
        assert_eq!(containment_chain_valid(&arch, &["Feature", "ServiceInterface"]), Ok(false));
        assert_eq!(
            containment_chain_valid(&arch, &["Feature", "Plugin"]),
            Err(ArchError::UnresolvedArtifact("Plugin".into()))
        );
        assert_eq!(containment_chain_valid(&arch, &[]), Err(ArchError::EmptyChain));
    }

    #[test]
    fn printing_round_trips() {
        let model = parse_architecture(OSGI).unwrap();
        let printed = model.to_string();
        assert_eq!(parse_architecture(&printed).unwrap(), model);
        // printing is canonical
        assert_eq!(parse_architecture(&printed).unwrap().to_string(), printed);
    }

    #[test]
    fn parsing_is_deterministic() {
        let bad = "package p SPVizModel M { A { D connects A D connects A } A B.x }";
        assert_eq!(parse_architecture(bad).unwrap_err(), parse_architecture(bad).unwrap_err());
    }
}
