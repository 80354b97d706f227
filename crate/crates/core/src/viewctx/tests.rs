use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use super::*;
use crate::testkit;

fn sample() -> ViewContext {
    let (arch, viz) = testkit::osgi();
    let pm = Arc::new(testkit::osgi_project(arch));
    ViewContext::new(pm, viz).unwrap()
}

fn bd() -> ViewPath {
    ViewPath::root("BundleDependencies")
}

fn once(view: ViewPath, id: &str, direction: Direction) -> Action {
    Action::ConnectOnce { view, id: id.into(), connection: "OSGi.Bundle.Dependency".into(), direction }
}

fn edge_set(ctx: &ViewContext) -> BTreeSet<(String, String)> {
    ctx.shown_edges().iter().map(|e| (e.source.clone(), e.target.clone())).collect()
}

fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn starts_collapsed() {
    let ctx = sample();
    let visible = ctx.visible_elements(&bd()).unwrap();
    assert_eq!(visible.collapsed, ["b1", "b2", "b3", "b4", "b5"]);
    assert!(visible.expanded.is_empty() && visible.edges.is_empty());
    assert!(!ctx.can_undo());
}

#[test]
fn connect_once_expands_neighbours() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b1", Direction::Outgoing)).unwrap();
    let visible = ctx.visible_elements(&bd()).unwrap();
    assert_eq!(visible.expanded, ["b1", "b2"]);
    assert_eq!(edge_set(&ctx), pairs(&[("b1", "b2")]));

    ctx.apply(&once(bd(), "b1", Direction::Incoming)).unwrap();
    assert_eq!(edge_set(&ctx), pairs(&[("b1", "b2"), ("b4", "b1")]));
}

#[test]
fn connect_all_follows_the_closure() {
    let mut ctx = sample();
    let action = Action::ConnectAll {
        view: bd(),
        id: "b4".into(),
        connection: "Bundle.Dependency".into(),
        direction: Direction::Outgoing,
    };
    ctx.apply(&action).unwrap();
    assert_eq!(edge_set(&ctx), pairs(&[("b4", "b1"), ("b1", "b2"), ("b2", "b3")]));
    assert_eq!(ctx.visible_elements(&bd()).unwrap().collapsed, ["b5"]);
}

#[test]
fn every_visible_once() {
    let mut ctx = sample();
    ctx.apply(&Action::Expand { view: bd(), id: "b1".into() }).unwrap();
    ctx.apply(&Action::Expand { view: bd(), id: "b3".into() }).unwrap();
    ctx.apply(&Action::EveryVisibleOnce {
        view: bd(),
        connection: "OSGi.Bundle.Dependency".into(),
        direction: Direction::Incoming,
    })
    .unwrap();
    assert_eq!(edge_set(&ctx), pairs(&[("b4", "b1"), ("b2", "b3")]));
}

#[test]
fn nested_views_are_scoped_to_their_parent() {
    let mut ctx = sample();
    let inner = ViewPath::root("Features").child("f1", "BundleDependencies");
    let scope = ctx.scope(&inner).unwrap();
    assert_eq!(scope.members, ["b1", "b2"]);

    ctx.apply(&once(inner.clone(), "b2", Direction::Outgoing)).unwrap();
    assert!(edge_set(&ctx).is_empty(), "b3 lives in f2");
    assert_eq!(
        ctx.port_state(&inner, "b2", "OSGi.Bundle.Dependency", Direction::Outgoing).unwrap(),
        PortState::AllShown
    );
    assert!(ctx.is_expanded(&inner, "b2"));
    assert!(!ctx.is_expanded(&bd(), "b2"), "state is per view");

    let err = ctx.apply(&Action::Expand { view: inner, id: "b3".into() }).unwrap_err();
    assert!(matches!(err, CtxError::NotInView { .. }));
}

#[test]
fn multi_step_filters() {
    let ctx = sample();
    let services = ViewPath::root("Products").child("p1", "Services");
    assert_eq!(ctx.scope(&services).unwrap().members, ["si1", "sc1", "sc2"]);
    let bundles = ViewPath::root("Products").child("p1", "Features").child("f2", "BundleDependencies");
    assert_eq!(ctx.scope(&bundles).unwrap().members, ["b3", "b4"]);
}

#[test]
fn port_state_tracks_pending_neighbours() {
    let mut ctx = sample();
    let conn = "OSGi.Bundle.Dependency";
    assert_eq!(ctx.port_state(&bd(), "b1", conn, Direction::Outgoing).unwrap(), PortState::MoreAvailable);
    ctx.apply(&once(bd(), "b1", Direction::Outgoing)).unwrap();
    assert_eq!(ctx.port_state(&bd(), "b1", conn, Direction::Outgoing).unwrap(), PortState::AllShown);
    assert_eq!(ctx.port_state(&bd(), "b5", conn, Direction::Outgoing).unwrap(), PortState::AllShown);
    assert_eq!(ctx.port_state(&bd(), "b2", conn, Direction::Outgoing).unwrap(), PortState::MoreAvailable);
}

#[test]
fn collapse_drops_incident_edges() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b2", Direction::Outgoing)).unwrap();
    ctx.apply(&once(bd(), "b2", Direction::Incoming)).unwrap();
    assert_eq!(edge_set(&ctx).len(), 2);
    ctx.apply(&Action::Collapse { view: bd(), id: "b3".into() }).unwrap();
    assert_eq!(edge_set(&ctx), pairs(&[("b1", "b2")]));
    ctx.apply(&Action::RemoveConnections { view: bd(), id: "b1".into() }).unwrap();
    assert!(edge_set(&ctx).is_empty());
    assert!(ctx.is_expanded(&bd(), "b1"));
}

#[test]
fn focus_implies_expansion() {
    let mut ctx = sample();
    ctx.apply(&Action::Focus { view: bd(), id: "b5".into() }).unwrap();
    assert_eq!(ctx.element_state(&bd(), "b5"), Some(ElementState::FOCUSED));
    ctx.apply(&Action::Unfocus { view: bd(), id: "b5".into() }).unwrap();
    assert_eq!(ctx.element_state(&bd(), "b5"), Some(ElementState::EXPANDED));
    ctx.apply(&Action::Unfocus { view: bd(), id: "b4".into() }).unwrap();
    assert_eq!(ctx.element_state(&bd(), "b4"), None);
}

#[test]
fn id_filter_is_case_insensitive() {
    let mut ctx = sample();
    ctx.apply(&Action::Expand { view: bd(), id: "b1".into() }).unwrap();
    ctx.apply(&Action::SetIdFilter { pattern: Some("B1".into()) }).unwrap();
    let visible = ctx.visible_elements(&bd()).unwrap();
    assert_eq!(visible.expanded, ["b1"]);
    assert!(visible.collapsed.is_empty());
    ctx.apply(&Action::SetIdFilter { pattern: Some(String::new()) }).unwrap();
    assert_eq!(ctx.id_filter(), None);
}

#[test]
fn hidden_views_reject_queries() {
    let mut ctx = sample();
    ctx.apply(&Action::SetViewVisible { view: "BundleDependencies".into(), visible: false }).unwrap();
    assert_eq!(ctx.visible_elements(&bd()).unwrap_err(), CtxError::ViewHidden("BundleDependencies".into()));
    let nested = ViewPath::root("Features").child("f1", "BundleDependencies");
    assert!(matches!(ctx.scope(&nested), Err(CtxError::ViewHidden(_))));
}

#[test]
fn bad_actions_leave_no_trace() {
    let mut ctx = sample();
    let before = ctx.state().clone();
    let cases = [
        (Action::Expand { view: bd(), id: "nope".into() }, CtxError::UnknownId("nope".into())),
        (Action::Expand { view: ViewPath::root("Nope"), id: "b1".into() }, CtxError::UnknownView("Nope".into())),
        (Action::SetViewVisible { view: "Nope".into(), visible: true }, CtxError::UnknownView("Nope".into())),
        (
            Action::Expand { view: bd(), id: "f1".into() },
            CtxError::NotInView { id: "f1".into(), view: "BundleDependencies".into() },
        ),
        (
            Action::ConnectOnce {
                view: bd(),
                id: "b1".into(),
                connection: "OSGi.ServiceInterface.ProvidedBy".into(),
                direction: Direction::Outgoing,
            },
            CtxError::ConnectionNotInView {
                connection: "OSGi.ServiceInterface.ProvidedBy".into(),
                view: "BundleDependencies".into(),
            },
        ),
        (Action::Undo, CtxError::NothingToUndo),
        (Action::Redo, CtxError::NothingToRedo),
    ];
    for (action, expected) in cases {
        assert_eq!(ctx.apply(&action).unwrap_err(), expected, "{action:?}");
    }
    assert_eq!(ctx.state(), &before);
    assert!(!ctx.can_undo());
}

#[test]
fn category_edges_between_features() {
    let mut ctx = sample();
    let features = ViewPath::root("Features");
    ctx.apply(&Action::Expand { view: features.clone(), id: "f1".into() }).unwrap();
    assert!(ctx.visible_elements(&features).unwrap().edges.is_empty(), "f2 collapsed");
    ctx.apply(&Action::Expand { view: features.clone(), id: "f2".into() }).unwrap();
    let edges = ctx.visible_elements(&features).unwrap().edges;
    let expected = |source: &str, target: &str| EdgeInstance {
        connection: "OSGi.Bundle.Dependency".into(),
        source: source.into(),
        target: target.into(),
        multiplicity: 1,
        category: true,
    };
    assert_eq!(edges, vec![expected("f1", "f2"), expected("f2", "f1")]);

    // everything sits inside p1, so nothing crosses product boundaries
    let decl = ctx.categories(&ViewPath::root("Products")).unwrap()[0].clone();
    assert!(category_edges(&ctx, &ViewPath::root("Products"), &decl).unwrap().is_empty());
}

#[test]
fn history_is_bounded() {
    let mut ctx = sample();
    for i in 0..HISTORY_DEPTH + 5 {
        ctx.apply(&Action::ShowCollapsedArea { visible: i % 2 == 0 }).unwrap();
    }
    assert_eq!(ctx.undo_depth(), HISTORY_DEPTH);
    while ctx.can_undo() {
        ctx.undo().unwrap();
    }
    assert_eq!(ctx.redo_depth(), HISTORY_DEPTH);
}

#[test]
fn reset_is_one_undoable_step() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b1", Direction::Outgoing)).unwrap();
    ctx.apply(&Action::SetViewVisible { view: "Services".into(), visible: false }).unwrap();
    ctx.apply(&Action::SetIdFilter { pattern: Some("b".into()) }).unwrap();
    let busy = ctx.state().clone();
    ctx.apply(&Action::Reset).unwrap();
    assert_eq!(ctx.state(), sample().state());
    ctx.apply(&Action::Undo).unwrap();
    assert_eq!(ctx.state(), &busy);
    ctx.apply(&Action::Redo).unwrap();
    assert_eq!(ctx.state(), sample().state());
}

#[test]
fn action_json() {
    let action: Action = serde_json::from_str(
        r#"{"type":"connectOnce","view":["Features","f1","BundleDependencies"],"id":"b1",
            "connection":"OSGi.Bundle.Dependency","direction":"outgoing"}"#,
    )
    .unwrap();
    assert_eq!(
        action,
        Action::ConnectOnce {
            view: ViewPath::root("Features").child("f1", "BundleDependencies"),
            id: "b1".into(),
            connection: "OSGi.Bundle.Dependency".into(),
            direction: Direction::Outgoing,
        }
    );
    let short: Action = serde_json::from_str(r#"{"type":"expand","view":"Features","id":"f1"}"#).unwrap();
    assert_eq!(short, Action::Expand { view: ViewPath::root("Features"), id: "f1".into() });
    assert_eq!(serde_json::to_string(&Action::Reset).unwrap(), r#"{"type":"reset"}"#);
    assert!(serde_json::from_str::<Action>(r#"{"type":"expand","view":["A","b"],"id":"x"}"#).is_err());
}

#[test]
fn vcm_round_trip() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b1", Direction::Outgoing)).unwrap();
    let inner = ViewPath::root("Features").child("f1", "BundleDependencies");
    ctx.apply(&Action::Focus { view: inner, id: "b1".into() }).unwrap();
    ctx.apply(&Action::ShowCollapsedArea { visible: false }).unwrap();
    let text = ctx.export_vcm();
    let (restored, report) = restore_vcm(&text, ctx.pm().clone(), ctx.viz().clone()).unwrap();
    assert!(report.is_empty());
    assert_eq!(restored, ctx);
    assert_eq!(restored.export_vcm(), text);
}

#[test]
fn vcm_drops_only_states_of_vanished_ids() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b2", Direction::Outgoing)).unwrap();
    ctx.apply(&once(bd(), "b1", Direction::Incoming)).unwrap();
    let inner = ViewPath::root("Features").child("f2", "BundleDependencies");
    ctx.apply(&Action::Expand { view: inner.clone(), id: "b4".into() }).unwrap();
    let text = ctx.export_vcm();

    let mut pm = (**ctx.pm()).clone();
    pm.remove_instance("b3").unwrap();
    let (restored, report) = restore_vcm(&text, Arc::new(pm), ctx.viz().clone()).unwrap();
    assert_eq!(report.dropped_ids, BTreeSet::from(["b3".to_string()]));
    assert_eq!(report.dropped_elements.len(), 1);
    assert_eq!(report.dropped_edges.len(), 1);
    assert!(report.dropped_elements.iter().all(|r| r.id == "b3"));
    assert!(report.dropped_edges.iter().all(|e| e.target == "b3"));
    assert_eq!(edge_set(&restored), pairs(&[("b4", "b1")]));
    assert!(restored.is_expanded(&inner, "b4"));
}

#[test]
fn vcm_does_not_show_new_connections() {
    let mut ctx = sample();
    ctx.apply(&once(bd(), "b4", Direction::Outgoing)).unwrap();
    let text = ctx.export_vcm();

    let mut pm = (**ctx.pm()).clone();
    pm.connect("Bundle.Dependency", "b4", "b5").unwrap();
    let (restored, report) = restore_vcm(&text, Arc::new(pm), ctx.viz().clone()).unwrap();
    assert!(report.is_empty());
    assert_eq!(edge_set(&restored), pairs(&[("b4", "b1")]));
    assert_eq!(
        restored.port_state(&bd(), "b4", "OSGi.Bundle.Dependency", Direction::Outgoing).unwrap(),
        PortState::MoreAvailable
    );
}

#[test]
fn vcm_rejects_foreign_documents() {
    let ctx = sample();
    let text = ctx.export_vcm();
    let (pm, viz) = (ctx.pm().clone(), ctx.viz().clone());
    assert!(matches!(restore_vcm("{", pm.clone(), viz.clone()), Err(CtxError::Malformed(_))));
    let bumped = text.replace("\"formatVersion\": \"1\"", "\"formatVersion\": \"9\"");
    assert_eq!(restore_vcm(&bumped, pm.clone(), viz.clone()).unwrap_err(), CtxError::VersionMismatch("9".into()));
    let renamed = text.replace("OSGiViz", "Other");
    assert!(matches!(restore_vcm(&renamed, pm, viz), Err(CtxError::VisualizationMismatch { .. })));
}

/// Brute-force multiplicity: climbs from each connected pair through the
/// reverse index instead of walking the chain downwards.
fn category_oracle(ctx: &ViewContext, scope: &Scope, decl: &CategoryConnection) -> Vec<EdgeInstance> {
    let pm = ctx.pm();
    let arch = ctx.viz().arch();
    let chain = &decl.chain;
    let owner = decl.connection.owner;
    let target_type = arch.connection_target(decl.connection);

    // categories reached by climbing from `id` up the chain
    let climb = |id: &str, ty: ArtifactId| -> BTreeSet<String> {
        if pm.instance(id).map(|i| i.artifact()) != Some(ty) {
            return BTreeSet::new();
        }
        let mut level: BTreeSet<String> = BTreeSet::from([id.to_string()]);
        for &parent_ty in chain.iter().rev() {
            level = level.iter().flat_map(|x| pm.parents_of(x, parent_ty).iter().cloned()).collect();
        }
        level
    };

    let categories: Vec<&String> = scope
        .members
        .iter()
        .filter(|id| pm.instance(id).unwrap().artifact() == chain[0])
        .collect();
    let mut out = Vec::new();
    for c1 in &categories {
        for c2 in &categories {
            if c1 == c2 {
                continue;
            }
            let mut count = 0;
            for a in pm.instances() {
                for b in pm.instances() {
                    if pm.sources_of(b.id(), decl.connection).iter().any(|s| s == a.id())
                        && climb(a.id(), owner).contains(*c1)
                        && climb(b.id(), target_type).contains(*c2)
                    {
                        count += 1;
                    }
                }
            }
            if count > 0 {
                out.push(EdgeInstance {
                    connection: arch.qualified_connection_name(decl.connection),
                    source: c1.to_string(),
                    target: c2.to_string(),
                    multiplicity: count,
                    category: true,
                });
            }
        }
    }
    out.sort();
    out
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_sample(seed: u64, n: usize, steps: usize) -> ViewContext {
    let mut rng = rng(seed);
    let (arch, viz) = testkit::osgi();
    let pm = Arc::new(testkit::random_pm(&mut rng, &arch, n, 1.5));
    testkit::random_context(&mut rng, pm, viz, steps)
}

fn assert_consistent(ctx: &ViewContext) {
    for ((view, id), state) in &ctx.state().elements {
        assert!(ctx.pm().contains_id(id));
        assert!(view.parent_ids().all(|p| ctx.pm().contains_id(p)));
        assert!(state.expanded);
    }
    for edge in ctx.shown_edges() {
        assert!(ctx.is_expanded(&edge.view, &edge.source), "{edge:?}");
        assert!(ctx.is_expanded(&edge.view, &edge.target), "{edge:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn undo_restores_the_previous_state(seed in any::<u64>(), steps in 0usize..30) {
        let mut ctx = random_sample(seed, 25, steps);
        let mut rng = rng(seed ^ 0x5eed);
        for _ in 0..10 {
            let action = testkit::random_action(&mut rng, &ctx);
            if matches!(action, Action::Undo | Action::Redo) {
                continue;
            }
            let before = ctx.state().clone();
            if ctx.apply(&action).is_ok() {
                let after = ctx.state().clone();
                ctx.undo().unwrap();
                prop_assert_eq!(ctx.state(), &before);
                ctx.redo().unwrap();
                prop_assert_eq!(ctx.state(), &after);
            } else {
                prop_assert_eq!(ctx.state(), &before);
            }
        }
    }

    #[test]
    fn undoing_everything_returns_to_init(seed in any::<u64>(), steps in 0usize..40) {
        let (arch, viz) = testkit::osgi();
        let mut rng = rng(seed);
        let pm = Arc::new(testkit::random_pm(&mut rng, &arch, 20, 1.5));
        let mut ctx = ViewContext::new(pm.clone(), viz.clone()).unwrap();
        let initial = ctx.state().clone();
        for _ in 0..steps {
            let action = testkit::random_action(&mut rng, &ctx);
            if !matches!(action, Action::Undo | Action::Redo) {
                let _ = ctx.apply(&action);
            }
        }
        while ctx.can_undo() {
            ctx.undo().unwrap();
        }
        prop_assert_eq!(ctx.state(), &initial);
    }

    #[test]
    fn reset_matches_init(seed in any::<u64>(), steps in 0usize..40) {
        let mut ctx = random_sample(seed, 20, steps);
        ctx.apply(&Action::Reset).unwrap();
        let fresh = ViewContext::new(ctx.pm().clone(), ctx.viz().clone()).unwrap();
        prop_assert_eq!(ctx.state(), fresh.state());
    }

    #[test]
    fn states_stay_consistent(seed in any::<u64>(), steps in 0usize..60) {
        let ctx = random_sample(seed, 30, steps);
        assert_consistent(&ctx);
        for path in testkit::reachable_paths(&ctx, 2) {
            let visible = ctx.visible_elements(&path).unwrap();
            let scope = ctx.scope(&path).unwrap();
            let expanded: BTreeSet<&String> = visible.expanded.iter().collect();
            let collapsed: BTreeSet<&String> = visible.collapsed.iter().collect();
            prop_assert!(expanded.is_disjoint(&collapsed));
            prop_assert!(visible.expanded.iter().chain(&visible.collapsed).all(|id| scope.contains(id)));
            for edge in &visible.edges {
                prop_assert!(expanded.contains(&edge.source) && expanded.contains(&edge.target));
            }
        }
    }

    #[test]
    fn category_edges_match_oracle(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = rng(seed);
        let (arch, viz) = testkit::osgi();
        let pm = Arc::new(testkit::random_pm(&mut rng, &arch, n, 2.0));
        let ctx = ViewContext::new(pm, viz).unwrap();
        for view in ["Features", "Products"] {
            let path = ViewPath::root(view);
            let scope = ctx.scope(&path).unwrap();
            for decl in ctx.categories(&path).unwrap() {
                let mut ours = category_edges(&ctx, &path, decl).unwrap();
                ours.sort();
                prop_assert_eq!(ours, category_oracle(&ctx, &scope, decl));
            }
        }
    }

    #[test]
    fn vcm_round_trips(seed in any::<u64>(), steps in 0usize..40) {
        let ctx = random_sample(seed, 20, steps);
        let (restored, report) = restore_vcm(&ctx.export_vcm(), ctx.pm().clone(), ctx.viz().clone()).unwrap();
        prop_assert!(report.is_empty());
        prop_assert_eq!(restored.state(), ctx.state());
    }
}
