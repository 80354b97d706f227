//! The visualization language (`.spviz`): which artifacts and connections each
//! view shows, category connections aggregating contained connections, and
//! artifact views nested inside expanded artifacts.
//!
//! A [`VizModel`] is purely syntactic. [`link_viz`] resolves it against a
//! [`ValidatedArchitecture`] into a [`ValidatedViz`] whose references are ids
//! into the architecture.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::archmeta::{ArtifactId, ConnectionId, ValidatedArchitecture};
use crate::syntax::{has_errors, Cursor, Diagnostic, Located, PResult, Pos, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VizModel {
    pub package_name: Located<String>,
    pub import_uri: Located<String>,
    pub viz_name: Located<String>,
    pub views: Vec<ViewDecl>,
    pub artifact_shows: Vec<ArtifactShowsDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDecl {
    pub name: Located<String>,
    pub shown_artifacts: Vec<Located<String>>,
    pub shown_connections: Vec<Located<String>>,
    pub category_connections: Vec<CategoryConnectionDecl>,
}

/// `connect Conn via Category{>Artifact} in InnerView`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryConnectionDecl {
    pub connection: Located<String>,
    pub chain: Vec<Located<String>>,
    pub inner_view: Located<String>,
}

/// `Parent shows { View with { ... } ... }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactShowsDecl {
    pub parent_artifact: Located<String>,
    pub artifact_views: Vec<ArtifactViewDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactViewDecl {
    pub view: Located<String>,
    pub filters: Vec<FilterChain>,
}

/// `Shown from Parent>...>Shown`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterChain {
    pub shown_artifact: Located<String>,
    pub path: Vec<Located<String>>,
}

pub fn parse_viz(text: &str) -> Result<VizModel, Vec<Diagnostic>> {
    let mut cursor = Cursor::new(text);
    let parsed = viz_model(&mut cursor);
    let mut diags = std::mem::take(&mut cursor.diags);
    match parsed {
        Ok(model) => {
            let mut seen: HashMap<&str, Pos> = HashMap::new();
            for view in &model.views {
                if view.name.value.contains('.') {
                    diags.push(Diagnostic::error(
                        view.name.pos,
                        format!("view name `{}` must not contain `.`", view.name.value),
                    ));
                }
                if let Some(first) = seen.get(view.name.as_str()) {
                    diags.push(Diagnostic::error(
                        view.name.pos,
                        format!("duplicate view `{}` (first declared at {first})", view.name.value),
                    ));
                } else {
                    seen.insert(view.name.as_str(), view.name.pos);
                }
            }
            if has_errors(&diags) {
                Err(diags)
            } else {
                Ok(model)
            }
        }
        Err(_) => Err(diags),
    }
}

fn viz_model(c: &mut Cursor) -> PResult<VizModel> {
    c.expect_keyword("package")?;
    let package_name = c.expect_ident("package name")?;
    c.expect_keyword("import")?;
    let import_uri = c.expect_string("quoted import URI")?;
    c.expect_keyword("SPViz")?;
    let viz_name = c.expect_ident("visualization name")?;
    c.expect(TokenKind::LBrace)?;
    let mut views = Vec::new();
    let mut artifact_shows = Vec::new();
    loop {
        match (&c.peek().kind, &c.peek_nth(1).kind) {
            (TokenKind::RBrace, _) => {
                c.advance();
                break;
            }
            (TokenKind::Ident(_), TokenKind::LBrace) => views.push(view(c)?),
            (TokenKind::Ident(_), TokenKind::Ident(kw)) if kw == "shows" => artifact_shows.push(shows(c)?),
            (TokenKind::Ident(_), _) => {
                c.advance();
                return c.fail("expected `{` or `shows`");
            }
            _ => return c.fail("expected a view, an artifact `shows` block or `}`"),
        }
    }
    c.expect(TokenKind::Eof)?;
    Ok(VizModel { package_name, import_uri, viz_name, views, artifact_shows })
}

fn view(c: &mut Cursor) -> PResult<ViewDecl> {
    let name = c.expect_ident("view name")?;
    c.expect(TokenKind::LBrace)?;
    let mut decl = ViewDecl {
        name,
        shown_artifacts: Vec::new(),
        shown_connections: Vec::new(),
        category_connections: Vec::new(),
    };
    loop {
        if c.at(&TokenKind::RBrace) {
            c.advance();
            return Ok(decl);
        }
        if c.at_keyword("show") {
            c.advance();
            decl.shown_artifacts.push(c.expect_ident("artifact reference")?);
        } else if c.at_keyword("connect") {
            c.advance();
            let connection = c.expect_ident("connection reference")?;
            if c.at_keyword("via") {
                c.advance();
                let chain = chain(c)?;
                c.expect_keyword("in")?;
                let inner_view = c.expect_ident("view name")?;
                decl.category_connections.push(CategoryConnectionDecl { connection, chain, inner_view });
            } else {
                decl.shown_connections.push(connection);
            }
        } else {
            return c.fail("expected `show`, `connect` or `}`");
        }
    }
}

/// `Artifact {">" Artifact}`
fn chain(c: &mut Cursor) -> PResult<Vec<Located<String>>> {
    let mut chain = vec![c.expect_ident("artifact reference")?];
    while c.at(&TokenKind::Gt) {
        c.advance();
        chain.push(c.expect_ident("artifact reference")?);
    }
    Ok(chain)
}

fn shows(c: &mut Cursor) -> PResult<ArtifactShowsDecl> {
    let parent_artifact = c.expect_ident("artifact reference")?;
    c.expect_keyword("shows")?;
    c.expect(TokenKind::LBrace)?;
    let mut artifact_views = Vec::new();
    while !c.at(&TokenKind::RBrace) {
        let view = c.expect_ident("view name or `}`")?;
        c.expect_keyword("with")?;
        c.expect(TokenKind::LBrace)?;
        let mut filters = Vec::new();
        while !c.at(&TokenKind::RBrace) {
            let shown_artifact = c.expect_ident("artifact reference or `}`")?;
            c.expect_keyword("from")?;
            let path = chain(c)?;
            filters.push(FilterChain { shown_artifact, path });
        }
        c.advance();
        artifact_views.push(ArtifactViewDecl { view, filters });
    }
    c.advance();
    Ok(ArtifactShowsDecl { parent_artifact, artifact_views })
}

impl std::fmt::Display for VizModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |chain: &[Located<String>]| chain.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(">");
        writeln!(f, "package {}", self.package_name.value)?;
        writeln!(f, "import {:?}", self.import_uri.value)?;
        writeln!(f)?;
        writeln!(f, "SPViz {} {{", self.viz_name.value)?;
        for view in &self.views {
            writeln!(f, "  {} {{", view.name.value)?;
            for a in &view.shown_artifacts {
                writeln!(f, "    show {}", a.value)?;
            }
            for conn in &view.shown_connections {
                writeln!(f, "    connect {}", conn.value)?;
            }
            for cat in &view.category_connections {
                writeln!(f, "    connect {} via {} in {}", cat.connection.value, join(&cat.chain), cat.inner_view.value)?;
            }
            writeln!(f, "  }}")?;
        }
        for shows in &self.artifact_shows {
            writeln!(f, "  {} shows {{", shows.parent_artifact.value)?;
            for av in &shows.artifact_views {
                writeln!(f, "    {} with {{", av.view.value)?;
                for filter in &av.filters {
                    writeln!(f, "      {} from {}", filter.shown_artifact.value, join(&filter.path))?;
                }
                writeln!(f, "    }}")?;
            }
            writeln!(f, "  }}")?;
        }
        writeln!(f, "}}")
    }
}

/// Index of a view in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ViewId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedView {
    pub name: String,
    pub artifacts: Vec<ArtifactId>,
    pub connections: Vec<ConnectionId>,
    pub categories: Vec<CategoryConnection>,
}

impl LinkedView {
    pub fn shows_artifact(&self, id: ArtifactId) -> bool {
        self.artifacts.contains(&id)
    }

    pub fn shows_connection(&self, id: ConnectionId) -> bool {
        self.connections.contains(&id)
    }
}

/// A resolved category connection. `chain[0]` is the category artifact type;
/// the last chain element directly contains both endpoint types of
/// `connection`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryConnection {
    pub connection: ConnectionId,
    pub chain: Vec<ArtifactId>,
    pub inner_view: ViewId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactView {
    pub view: ViewId,
    pub filters: Vec<Filter>,
}

/// `path[0]` is the parent artifact type, `path.last()` the shown type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub shown: ArtifactId,
    pub path: Vec<ArtifactId>,
}

#[derive(Debug, Clone)]
pub struct ValidatedViz {
    model: VizModel,
    arch: Arc<ValidatedArchitecture>,
    views: Vec<LinkedView>,
    artifact_views: BTreeMap<ArtifactId, Vec<ArtifactView>>,
    warnings: Vec<Diagnostic>,
}

impl PartialEq for ValidatedViz {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.arch == other.arch
    }
}

impl ValidatedViz {
    pub fn model(&self) -> &VizModel {
        &self.model
    }

    pub fn name(&self) -> &str {
        &self.model.viz_name.value
    }

    pub fn arch(&self) -> &Arc<ValidatedArchitecture> {
        &self.arch
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn views(&self) -> &[LinkedView] {
        &self.views
    }

    pub fn view(&self, id: ViewId) -> &LinkedView {
        &self.views[id.0]
    }

    pub fn view_id(&self, name: &str) -> Option<ViewId> {
        self.views.iter().position(|v| v.name == name).map(ViewId)
    }

    pub fn view_names(&self) -> Vec<&str> {
        self.views.iter().map(|v| v.name.as_str()).collect()
    }

    /// Artifact views declared for instances of `parent`, in source order.
    pub fn artifact_views(&self, parent: ArtifactId) -> &[ArtifactView] {
        self.artifact_views.get(&parent).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_artifact_views(&self) -> &BTreeMap<ArtifactId, Vec<ArtifactView>> {
        &self.artifact_views
    }
}

pub fn link_viz(viz: VizModel, arch: Arc<ValidatedArchitecture>) -> Result<ValidatedViz, Vec<Diagnostic>> {
    let mut linker = Linker { arch: &arch, diags: Vec::new() };
    let view_index: HashMap<&str, ViewId> =
        viz.views.iter().enumerate().map(|(i, v)| (v.name.as_str(), ViewId(i))).collect();

    let mut views = Vec::with_capacity(viz.views.len());
    for decl in &viz.views {
        let artifacts: Vec<ArtifactId> = decl.shown_artifacts.iter().filter_map(|a| linker.artifact(a)).collect();
        let connections: Vec<ConnectionId> =
            decl.shown_connections.iter().filter_map(|c| linker.connection(c)).collect();
        views.push(LinkedView { name: decl.name.value.clone(), artifacts, connections, categories: Vec::new() });
    }

    for (i, decl) in viz.views.iter().enumerate() {
        for conn_ref in &decl.shown_connections {
            let Some(conn) = arch.resolve_connection(&conn_ref.value) else { continue };
            let owner = conn.owner;
            let target = arch.connection_target(conn);
            for endpoint in [owner, target] {
                if !views[i].shows_artifact(endpoint) {
                    linker.diags.push(Diagnostic::warning(
                        conn_ref.pos,
                        format!(
                            "view `{}` connects `{}` but does not show `{}`; these edges can never render",
                            decl.name.value,
                            conn_ref.value,
                            arch.qualified_artifact_name(endpoint)
                        ),
                    ));
                    break;
                }
            }
        }

        let mut categories = Vec::new();
        for cat in &decl.category_connections {
            if let Some(linked) = linker.category(cat, &views[i], &views, &view_index) {
                categories.push(linked);
            }
        }
        views[i].categories = categories;
    }

    let mut artifact_views: BTreeMap<ArtifactId, Vec<ArtifactView>> = BTreeMap::new();
    let mut seen_parents: HashMap<ArtifactId, Pos> = HashMap::new();
    for shows in &viz.artifact_shows {
        let Some(parent) = linker.artifact(&shows.parent_artifact) else { continue };
        if let Some(first) = seen_parents.get(&parent) {
            linker.diags.push(Diagnostic::error(
                shows.parent_artifact.pos,
                format!("`{}` already has a `shows` block at {first}", shows.parent_artifact.value),
            ));
            continue;
        }
        seen_parents.insert(parent, shows.parent_artifact.pos);
        let mut linked = Vec::new();
        let mut seen_views = HashSet::new();
        for av in &shows.artifact_views {
            let Some(&view) = view_index.get(av.view.as_str()) else {
                linker.diags.push(Diagnostic::error(av.view.pos, format!("unresolved view `{}`", av.view.value)));
                continue;
            };
            if !seen_views.insert(view) {
                linker.diags.push(Diagnostic::error(
                    av.view.pos,
                    format!("artifact view `{}` declared twice for `{}`", av.view.value, shows.parent_artifact.value),
                ));
                continue;
            }
            let filters = av.filters.iter().filter_map(|f| linker.filter(f, parent, &views[view.0])).collect();
            linked.push(ArtifactView { view, filters });
        }
        artifact_views.insert(parent, linked);
    }

    let diags = linker.diags;
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok(ValidatedViz { model: viz, arch, views, artifact_views, warnings: diags })
}

struct Linker<'a> {
    arch: &'a ValidatedArchitecture,
    diags: Vec<Diagnostic>,
}

impl Linker<'_> {
    fn artifact(&mut self, name: &Located<String>) -> Option<ArtifactId> {
        let found = self.arch.resolve_artifact(&name.value);
        if found.is_none() {
            self.diags.push(Diagnostic::error(name.pos, format!("unresolved artifact `{}`", name.value)));
        }
        found
    }

    fn connection(&mut self, name: &Located<String>) -> Option<ConnectionId> {
        let found = self.arch.resolve_connection(&name.value);
        if found.is_none() {
            self.diags.push(Diagnostic::error(name.pos, format!("unresolved connection `{}`", name.value)));
        }
        found
    }

    fn artifacts(&mut self, chain: &[Located<String>]) -> Option<Vec<ArtifactId>> {
        let ids: Vec<_> = chain.iter().map(|a| self.artifact(a)).collect();
        ids.into_iter().collect()
    }

    fn broken_chain(&mut self, chain: &[Located<String>], ids: &[ArtifactId]) -> bool {
        if let Some(i) = self.arch.first_broken_link(ids) {
            self.diags.push(Diagnostic::error(
                chain[i + 1].pos,
                format!(
                    "broken chain: `{}` does not contain `{}`",
                    self.arch.qualified_artifact_name(ids[i]),
                    self.arch.qualified_artifact_name(ids[i + 1])
                ),
            ));
            true
        } else {
            false
        }
    }

    fn category(
        &mut self,
        decl: &CategoryConnectionDecl,
        owner_view: &LinkedView,
        views: &[LinkedView],
        view_index: &HashMap<&str, ViewId>,
    ) -> Option<CategoryConnection> {
        let connection = self.connection(&decl.connection);
        let chain = self.artifacts(&decl.chain);
        let inner_view = view_index.get(decl.inner_view.as_str()).copied();
        if inner_view.is_none() {
            self.diags.push(Diagnostic::error(
                decl.inner_view.pos,
                format!("unresolved view `{}`", decl.inner_view.value),
            ));
        }
        let (connection, chain, inner_view) = (connection?, chain?, inner_view?);

        let mut ok = true;
        if !owner_view.shows_artifact(chain[0]) {
            self.diags.push(Diagnostic::error(
                decl.chain[0].pos,
                format!(
                    "category artifact `{}` is not shown in view `{}`",
                    decl.chain[0].value, owner_view.name
                ),
            ));
            ok = false;
        }
        if self.broken_chain(&decl.chain, &chain) {
            ok = false;
        }
        let last = *chain.last().expect("chain is non-empty");
        let last_pos = decl.chain.last().expect("chain is non-empty").pos;
        let source = connection.owner;
        let target = self.arch.connection_target(connection);
        for endpoint in [source, target] {
            if !self.arch.contains(last, endpoint) {
                self.diags.push(Diagnostic::error(
                    last_pos,
                    format!(
                        "`{}` does not contain `{}`, so it cannot route `{}`",
                        self.arch.qualified_artifact_name(last),
                        self.arch.qualified_artifact_name(endpoint),
                        decl.connection.value
                    ),
                ));
                ok = false;
                break;
            }
        }
        if !views[inner_view.0].shows_connection(connection) {
            self.diags.push(Diagnostic::error(
                decl.inner_view.pos,
                format!("inner view `{}` does not show `{}`", decl.inner_view.value, decl.connection.value),
            ));
            ok = false;
        }
        ok.then_some(CategoryConnection { connection, chain, inner_view })
    }

    fn filter(&mut self, decl: &FilterChain, parent: ArtifactId, view: &LinkedView) -> Option<Filter> {
        let shown = self.artifact(&decl.shown_artifact);
        let path = self.artifacts(&decl.path);
        let (shown, path) = (shown?, path?);
        if path.len() < 2 {
            self.diags.push(Diagnostic::error(
                decl.path[0].pos,
                format!(
                    "filter chain for `{}` needs at least a parent and a shown artifact",
                    decl.shown_artifact.value
                ),
            ));
            return None;
        }
        let mut ok = true;
        if path[0] != parent {
            self.diags.push(Diagnostic::error(
                decl.path[0].pos,
                format!(
                    "filter chain must start at `{}`, found `{}`",
                    self.arch.qualified_artifact_name(parent),
                    decl.path[0].value
                ),
            ));
            ok = false;
        }
        if *path.last().expect("len >= 2") != shown {
            self.diags.push(Diagnostic::error(
                decl.path.last().expect("len >= 2").pos,
                format!("filter chain must end at the shown artifact `{}`", decl.shown_artifact.value),
            ));
            ok = false;
        }
        if !view.shows_artifact(shown) {
            self.diags.push(Diagnostic::error(
                decl.shown_artifact.pos,
                format!("view `{}` does not show `{}`", view.name, decl.shown_artifact.value),
            ));
            ok = false;
        }
        if self.broken_chain(&decl.path, &path) {
            ok = false;
        }
        ok.then_some(Filter { shown, path })
    }
}
