//! Fixtures and random generators shared by the test suites of the workspace.
//! Enabled with the `testkit` feature.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::archmeta::{parse_architecture, validate_architecture, ValidatedArchitecture};
use crate::projmodel::ProjectModel;
use crate::viewctx::{Action, Direction, ViewContext, ViewPath};
use crate::vizmeta::{link_viz, parse_viz, ValidatedViz};

pub const OSGI_MODEL: &str = include_str!("../../../models/osgi.spvizmodel");
pub const OSGI_VIZ: &str = include_str!("../../../models/osgi.spviz");
pub const OSGI_BASIC_MODEL: &str = include_str!("../../../models/osgi-basic.spvizmodel");
pub const OSGI_BASIC_VIZ: &str = include_str!("../../../models/osgi-basic.spviz");
pub const MAVEN_MODEL: &str = include_str!("../../../models/maven.spvizmodel");
pub const MAVEN_VIZ: &str = include_str!("../../../models/maven.spviz");
pub const YARN_MODEL: &str = include_str!("../../../models/yarn.spvizmodel");
pub const YARN_VIZ: &str = include_str!("../../../models/yarn.spviz");
pub const GRADLE_MODEL: &str = include_str!("../../../models/gradle.spvizmodel");
pub const GRADLE_VIZ: &str = include_str!("../../../models/gradle.spviz");

pub fn arch(text: &str) -> Arc<ValidatedArchitecture> {
    Arc::new(validate_architecture(parse_architecture(text).expect("parses")).expect("validates"))
}

pub fn viz(text: &str, arch: Arc<ValidatedArchitecture>) -> Arc<ValidatedViz> {
    Arc::new(link_viz(parse_viz(text).expect("parses"), arch).expect("links"))
}

/// The full OSGi architecture and visualization.
pub fn osgi() -> (Arc<ValidatedArchitecture>, Arc<ValidatedViz>) {
    let a = arch(OSGI_MODEL);
    let v = viz(OSGI_VIZ, a.clone());
    (a, v)
}

/// A small OSGi project:
///
/// ```text
/// p1 > f1 > b1, b2        b1 -> b2 -> b3, b4 -> b1
/// p1 > f2 > b3, b4        b5 alone
/// p1 > b2, b3
/// b2 > si1, sc1           si1 ProvidedBy sc1, sc2 Required si1
/// b3 > sc2
/// ```
pub fn osgi_project(arch: Arc<ValidatedArchitecture>) -> ProjectModel {
    let mut pm = ProjectModel::new(arch, "sample");
    pm.add_instance("Product", "p1", Some("Product One")).unwrap();
    for f in ["f1", "f2"] {
        pm.add_instance("Feature", f, None).unwrap();
    }
    for b in ["b1", "b2", "b3", "b4", "b5"] {
        pm.add_instance("Bundle", b, None).unwrap();
    }
    pm.add_instance("ServiceInterface", "si1", None).unwrap();
    pm.add_instance("ServiceComponent", "sc1", None).unwrap();
    pm.add_instance("ServiceComponent", "sc2", None).unwrap();
    for (parent, child) in
        [("p1", "f1"), ("p1", "f2"), ("p1", "b2"), ("p1", "b3"), ("f1", "b1"), ("f1", "b2"), ("f2", "b3"), ("f2", "b4"), ("b2", "si1"), ("b2", "sc1"), ("b3", "sc2")]
    {
        pm.contain(parent, child).unwrap();
    }
    for (from, to) in [("b1", "b2"), ("b2", "b3"), ("b4", "b1")] {
        pm.connect("Bundle.Dependency", from, to).unwrap();
    }
    pm.connect("ServiceInterface.ProvidedBy", "si1", "sc1").unwrap();
    pm.connect("ServiceComponent.Required", "sc2", "si1").unwrap();
    pm
}

/// A random project with `n` instances of random types. Containment and
/// connection links only ever join instances of the declared types; roughly
/// `density * n` links of each kind are attempted.
pub fn random_pm(rng: &mut impl Rng, arch: &Arc<ValidatedArchitecture>, n: usize, density: f64) -> ProjectModel {
    let mut pm = ProjectModel::new(arch.clone(), "random");
    let types: Vec<_> = arch.artifact_ids().collect();
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let ty = *types.choose(rng).expect("architecture has artifacts");
        let id = format!("i{i}");
        pm.add_instance(arch.artifact_name(ty), &id, None).unwrap();
        ids.push((id, ty));
    }
    if n == 0 {
        return pm;
    }
    let attempts = (density * n as f64).ceil() as usize;
    for _ in 0..attempts {
        let (parent, pty) = ids.choose(rng).unwrap().clone();
        let (child, cty) = ids.choose(rng).unwrap().clone();
        if parent != child && arch.contains(pty, cty) {
            pm.contain(&parent, &child).unwrap();
        }
        let (from, fty) = ids.choose(rng).unwrap().clone();
        let connections: Vec<_> = arch.connections(fty).collect();
        if let Some(&conn) = connections.choose(rng) {
            let target = arch.connection_target(conn);
            let candidates: Vec<&String> = ids.iter().filter(|(_, t)| *t == target).map(|(id, _)| id).collect();
            if let Some(to) = candidates.choose(rng) {
                pm.connect(&arch.qualified_connection_name(conn), &from, to).unwrap();
            }
        }
    }
    pm
}

/// Every resolvable view path, descending into each member that declares
/// artifact views, up to `max_depth` nestings.
pub fn reachable_paths(ctx: &ViewContext, max_depth: usize) -> Vec<ViewPath> {
    let mut out = Vec::new();
    let mut stack: Vec<ViewPath> = ctx.viz().views().iter().map(|v| ViewPath::root(v.name.clone())).collect();
    stack.reverse();
    while let Some(path) = stack.pop() {
        let Ok(scope) = ctx.scope(&path) else { continue };
        if path.depth() < max_depth {
            for id in &scope.members {
                let Some(instance) = ctx.pm().instance(id) else { continue };
                for av in ctx.viz().artifact_views(instance.artifact()) {
                    stack.push(path.child(id.clone(), ctx.viz().view(av.view).name.clone()));
                }
            }
        }
        out.push(path);
    }
    out
}

/// A random action that is usually, but not always, applicable to `ctx`.
pub fn random_action(rng: &mut impl Rng, ctx: &ViewContext) -> Action {
    let paths = reachable_paths(ctx, 2);
    let view_names: Vec<String> = ctx.viz().views().iter().map(|v| v.name.clone()).collect();
    let path = paths
        .choose(rng)
        .cloned()
        .unwrap_or_else(|| ViewPath::root(view_names.first().cloned().unwrap_or_default()));
    let scope_members = ctx.scope(&path).map(|s| s.members).unwrap_or_default();
    let id = scope_members
        .choose(rng)
        .cloned()
        .or_else(|| ctx.pm().instances().next().map(|i| i.id().to_string()))
        .unwrap_or_else(|| "missing".to_string());
    let view = ctx.viz().view_id(path.leaf_view()).map(|v| ctx.viz().view(v));
    let connection = view
        .and_then(|v| v.connections.choose(rng).copied())
        .map(|c| ctx.viz().arch().qualified_connection_name(c))
        .unwrap_or_else(|| "Unknown.Connection".to_string());
    let direction = if rng.gen_bool(0.5) { Direction::Outgoing } else { Direction::Incoming };
    match rng.gen_range(0..16) {
        0 => Action::Focus { view: path, id },
        1 => Action::Unfocus { view: path, id },
        2 | 3 => Action::Expand { view: path, id },
        4 => Action::Collapse { view: path, id },
        5 => Action::ShowCollapsedArea { visible: rng.gen_bool(0.5) },
        6 | 7 => Action::ConnectOnce { view: path, id, connection, direction },
        8 => Action::ConnectAll { view: path, id, connection, direction },
        9 => Action::EveryVisibleOnce { view: path, connection, direction },
        10 => Action::RemoveConnections { view: path, id },
        11 => Action::SetViewVisible {
            view: view_names.choose(rng).cloned().unwrap_or_default(),
            visible: rng.gen_bool(0.7),
        },
        12 => {
            let pattern = if rng.gen_bool(0.5) { None } else { Some(format!("{}", rng.gen_range(0..10))) };
            Action::SetIdFilter { pattern }
        }
        13 => Action::Reset,
        14 => Action::Undo,
        _ => Action::Redo,
    }
}

/// Applies `steps` random actions, ignoring the ones that are rejected.
pub fn random_context(rng: &mut impl Rng, pm: Arc<ProjectModel>, viz: Arc<ValidatedViz>, steps: usize) -> ViewContext {
    let mut ctx = ViewContext::new(pm, viz).expect("same architecture");
    for _ in 0..steps {
        let action = random_action(rng, &ctx);
        let _ = ctx.apply(&action);
    }
    ctx
}
