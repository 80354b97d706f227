use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CtxError, ContextState, ElementState, Scope, ShownEdge, ViewContext, ViewPath};

/// Undo records kept before the oldest is discarded.
pub const HISTORY_DEPTH: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outgoing,
    Incoming,
}

impl Direction {
    /// `(source, target)` of an edge between `id` and a neighbour found in
    /// this direction.
    pub fn orient<'a>(self, id: &'a str, neighbour: &'a str) -> (&'a str, &'a str) {
        match self {
            Direction::Outgoing => (id, neighbour),
            Direction::Incoming => (neighbour, id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum Action {
    /// Expand and mark as focused.
    Focus { view: ViewPath, id: String },
    Unfocus { view: ViewPath, id: String },
    Expand { view: ViewPath, id: String },
    /// Collapse and drop the element's shown edges in that view.
    Collapse { view: ViewPath, id: String },
    ShowCollapsedArea { visible: bool },
    /// Show the edges to every direct neighbour, expanding them.
    ConnectOnce { view: ViewPath, id: String, connection: String, direction: Direction },
    /// Like `ConnectOnce`, repeated over the transitive closure.
    ConnectAll { view: ViewPath, id: String, connection: String, direction: Direction },
    /// `ConnectOnce` for every element currently expanded in the view.
    EveryVisibleOnce { view: ViewPath, connection: String, direction: Direction },
    RemoveConnections { view: ViewPath, id: String },
    SetViewVisible { view: String, visible: bool },
    /// Case-insensitive substring filter on instance ids; `None` or an empty
    /// pattern clears it.
    SetIdFilter { pattern: Option<String> },
    Reset,
    Undo,
    Redo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Change {
    Element { key: (ViewPath, String), before: Option<ElementState>, after: Option<ElementState> },
    Edge { edge: ShownEdge, added: bool },
    ViewVisible { view: String, before: bool, after: bool },
    IdFilter { before: Option<String>, after: Option<String> },
    CollapsedArea { before: bool, after: bool },
}

impl Change {
    fn apply(&self, state: &mut ContextState, forward: bool) {
        match self {
            Change::Element { key, before, after } => {
                let value = if forward { after } else { before };
                match value {
                    Some(s) => state.elements.insert(key.clone(), *s),
                    None => state.elements.remove(key),
                };
            }
            Change::Edge { edge, added } => {
                if *added == forward {
                    state.shown_edges.insert(edge.clone());
                } else {
                    state.shown_edges.remove(edge);
                }
            }
            Change::ViewVisible { view, before, after } => {
                state.view_visibility.insert(view.clone(), if forward { *after } else { *before });
            }
            Change::IdFilter { before, after } => {
                state.id_filter = if forward { after.clone() } else { before.clone() };
            }
            Change::CollapsedArea { before, after } => {
                state.collapsed_area_visible = if forward { *after } else { *before };
            }
        }
    }
}

/// Per action, the list of changes it made. Undo replays a record backwards.
#[derive(Debug, Clone, Default)]
pub(super) struct History {
    undo: VecDeque<Vec<Change>>,
    redo: Vec<Vec<Change>>,
}

impl History {
    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.redo.is_empty()
    }

    pub fn undo_len(&self) -> usize {
        self.undo.len()
    }

    pub fn redo_len(&self) -> usize {
        self.redo.len()
    }

    fn push(&mut self, record: Vec<Change>) {
        if self.undo.len() == HISTORY_DEPTH {
            self.undo.pop_front();
        }
        self.undo.push_back(record);
        self.redo.clear();
    }
}

/// Mutations of one action, recorded as they are applied.
struct Tx<'a> {
    state: &'a mut ContextState,
    changes: Vec<Change>,
}

impl Tx<'_> {
    fn record(&mut self, change: Change) {
        change.apply(self.state, true);
        self.changes.push(change);
    }

    fn set_element(&mut self, view: &ViewPath, id: &str, after: Option<ElementState>) {
        let key = (view.clone(), id.to_string());
        let before = self.state.elements.get(&key).copied();
        if before != after {
            self.record(Change::Element { key, before, after });
        }
    }

    fn ensure_expanded(&mut self, view: &ViewPath, id: &str) {
        let key = (view.clone(), id.to_string());
        if !self.state.elements.contains_key(&key) {
            self.set_element(view, id, Some(ElementState::EXPANDED));
        }
    }

    fn add_edge(&mut self, edge: ShownEdge) {
        if !self.state.shown_edges.contains(&edge) {
            self.record(Change::Edge { edge, added: true });
        }
    }

    fn remove_edge(&mut self, edge: ShownEdge) {
        if self.state.shown_edges.contains(&edge) {
            self.record(Change::Edge { edge, added: false });
        }
    }

    fn remove_incident(&mut self, view: &ViewPath, id: &str) {
        let doomed: Vec<ShownEdge> = self
            .state
            .shown_edges
            .iter()
            .filter(|e| &e.view == view && (e.source == id || e.target == id))
            .cloned()
            .collect();
        for edge in doomed {
            self.remove_edge(edge);
        }
    }

    fn set_view_visible(&mut self, view: &str, after: bool) {
        let before = self.state.view_visibility.get(view).copied().unwrap_or(true);
        if before != after {
            self.record(Change::ViewVisible { view: view.to_string(), before, after });
        }
    }

    fn set_id_filter(&mut self, after: Option<String>) {
        let before = self.state.id_filter.clone();
        if before != after {
            self.record(Change::IdFilter { before, after });
        }
    }

    fn set_collapsed_area(&mut self, after: bool) {
        let before = self.state.collapsed_area_visible;
        if before != after {
            self.record(Change::CollapsedArea { before, after });
        }
    }
}

/// A validated connection request.
struct Link {
    connection: crate::archmeta::ConnectionId,
    qualified: String,
    direction: Direction,
}

impl ViewContext {
    /// Applies an action. Every successful action other than `Undo` and `Redo`
    /// pushes exactly one undo record, even if it changed nothing; a failed
    /// action leaves the context untouched.
    pub fn apply(&mut self, action: &Action) -> Result<(), CtxError> {
        match action {
            Action::Undo => return self.undo(),
            Action::Redo => return self.redo(),
            _ => {}
        }
        let plan = self.plan(action)?;
        let mut tx = Tx { state: &mut self.state, changes: Vec::new() };
        plan(&mut tx);
        let record = tx.changes;
        self.history.push(record);
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), CtxError> {
        let record = self.history.undo.pop_back().ok_or(CtxError::NothingToUndo)?;
        for change in record.iter().rev() {
            change.apply(&mut self.state, false);
        }
        self.history.redo.push(record);
        Ok(())
    }

    pub fn redo(&mut self) -> Result<(), CtxError> {
        let record = self.history.redo.pop().ok_or(CtxError::NothingToRedo)?;
        for change in &record {
            change.apply(&mut self.state, true);
        }
        self.history.undo.push_back(record);
        Ok(())
    }

    fn member(&self, view: &ViewPath, id: &str) -> Result<Scope, CtxError> {
        if !self.pm.contains_id(id) {
            return Err(CtxError::UnknownId(id.to_string()));
        }
        let scope = self.scope(view)?;
        if !scope.contains(id) {
            return Err(CtxError::NotInView { id: id.to_string(), view: view.to_string() });
        }
        Ok(scope)
    }

    fn link(&self, view: &ViewPath, connection: &str, direction: Direction) -> Result<Link, CtxError> {
        let conn = self.resolve_connection(connection)?;
        let (_, linked) = self.linked_view(view.leaf_view())?;
        let qualified = self.viz.arch().qualified_connection_name(conn);
        if !linked.shows_connection(conn) {
            return Err(CtxError::ConnectionNotInView { connection: qualified, view: view.to_string() });
        }
        Ok(Link { connection: conn, qualified, direction })
    }

    /// Validates an action and returns the state edits it performs. All
    /// lookups against the project model happen here, so applying the plan
    /// cannot fail.
    fn plan<'a>(&self, action: &'a Action) -> Result<Box<dyn FnOnce(&mut Tx<'_>) + 'a>, CtxError> {
        Ok(match action {
            Action::Focus { view, id } => {
                self.member(view, id)?;
                Box::new(move |tx| tx.set_element(view, id, Some(ElementState::FOCUSED)))
            }
            Action::Unfocus { view, id } => {
                self.member(view, id)?;
                Box::new(move |tx| {
                    if tx.state.elements.contains_key(&(view.clone(), id.clone())) {
                        tx.set_element(view, id, Some(ElementState::EXPANDED));
                    }
                })
            }
            Action::Expand { view, id } => {
                self.member(view, id)?;
                Box::new(move |tx| tx.ensure_expanded(view, id))
            }
            Action::Collapse { view, id } => {
                self.member(view, id)?;
                Box::new(move |tx| {
                    tx.remove_incident(view, id);
                    tx.set_element(view, id, None);
                })
            }
            Action::RemoveConnections { view, id } => {
                self.member(view, id)?;
                Box::new(move |tx| tx.remove_incident(view, id))
            }
            Action::ConnectOnce { view, id, connection, direction } => {
                let scope = self.member(view, id)?;
                let link = self.link(view, connection, *direction)?;
                let edges = self.once_edges(&scope, view, id, &link);
                Box::new(move |tx| {
                    tx.ensure_expanded(view, id);
                    apply_edges(tx, edges);
                })
            }
            Action::ConnectAll { view, id, connection, direction } => {
                let scope = self.member(view, id)?;
                let link = self.link(view, connection, *direction)?;
                let mut edges = Vec::new();
                let mut seen: HashSet<String> = HashSet::from([id.clone()]);
                let mut queue = VecDeque::from([id.clone()]);
                while let Some(current) = queue.pop_front() {
                    for neighbour in self.neighbours(&scope, &current, link.connection, link.direction) {
                        let (source, target) = link.direction.orient(&current, &neighbour);
                        edges.push(shown(view, &link.qualified, source, target));
                        if seen.insert(neighbour.clone()) {
                            queue.push_back(neighbour);
                        }
                    }
                }
                Box::new(move |tx| {
                    tx.ensure_expanded(view, id);
                    apply_edges(tx, edges);
                })
            }
            Action::EveryVisibleOnce { view, connection, direction } => {
                let scope = self.scope(view)?;
                let link = self.link(view, connection, *direction)?;
                let expanded: Vec<&String> = scope.members.iter().filter(|m| self.is_expanded(view, m)).collect();
                let mut edges = Vec::new();
                for id in expanded {
                    edges.extend(self.once_edges(&scope, view, id, &link));
                }
                Box::new(move |tx| apply_edges(tx, edges))
            }
            Action::ShowCollapsedArea { visible } => {
                let visible = *visible;
                Box::new(move |tx| tx.set_collapsed_area(visible))
            }
            Action::SetViewVisible { view, visible } => {
                self.linked_view(view)?;
                let visible = *visible;
                Box::new(move |tx| tx.set_view_visible(view, visible))
            }
            Action::SetIdFilter { pattern } => {
                let pattern = pattern.clone().filter(|p| !p.is_empty());
                Box::new(move |tx| tx.set_id_filter(pattern))
            }
            Action::Reset => Box::new(move |tx| {
                let edges: Vec<ShownEdge> = tx.state.shown_edges.iter().cloned().collect();
                for edge in edges {
                    tx.remove_edge(edge);
                }
                let keys: Vec<(ViewPath, String)> = tx.state.elements.keys().cloned().collect();
                for (view, id) in keys {
                    tx.set_element(&view, &id, None);
                }
                let views: Vec<String> = tx.state.view_visibility.keys().cloned().collect();
                for view in views {
                    tx.set_view_visible(&view, true);
                }
                tx.set_id_filter(None);
                tx.set_collapsed_area(true);
            }),
            Action::Undo | Action::Redo => unreachable!("handled by apply"),
        })
    }

    fn once_edges(&self, scope: &Scope, view: &ViewPath, id: &str, link: &Link) -> Vec<ShownEdge> {
        self.neighbours(scope, id, link.connection, link.direction)
            .iter()
            .map(|n| {
                let (source, target) = link.direction.orient(id, n);
                shown(view, &link.qualified, source, target)
            })
            .collect()
    }
}

fn shown(view: &ViewPath, connection: &str, source: &str, target: &str) -> ShownEdge {
    ShownEdge {
        view: view.clone(),
        connection: connection.to_string(),
        source: source.to_string(),
        target: target.to_string(),
    }
}

/// Adds the edges and expands their endpoints, in a deterministic order.
fn apply_edges(tx: &mut Tx<'_>, edges: Vec<ShownEdge>) {
    let mut expanded = BTreeSet::new();
    for edge in edges {
        for end in [&edge.source, &edge.target] {
            if expanded.insert(end.clone()) {
                tx.ensure_expanded(&edge.view, end);
            }
        }
        tx.add_edge(edge);
    }
}
