//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the report is always printed; exits non-zero on any FAIL.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use archviz_core::archmeta::{parse_architecture, validate_architecture};
use archviz_core::diagram::{assign_colors, hue, layout, render_svg, synthesize, LaidOutDiagram, LayoutConfig, NodeKind};
use archviz_core::projmodel::{load_pm, save_pm, ProjectModel};
use archviz_core::testkit;
use archviz_core::viewctx::{category_edges, restore_vcm, EdgeInstance, ShownEdge};
use archviz_core::vizmeta::{link_viz, parse_viz, CategoryConnection};
use archviz_core::{Action, ViewContext, ViewPath};
use archviz_extract::{extract, ExtractionConfig, ExtractorKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Verdict = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn dsl_fidelity() -> Verdict {
    let start = Instant::now();
    let model = parse_architecture(testkit::OSGI_BASIC_MODEL).map_err(|d| format!("{d:?}"))?;
    let arch = Arc::new(validate_architecture(model.clone()).map_err(|d| format!("{d:?}"))?);
    let parsed = parse_viz(testkit::OSGI_BASIC_VIZ).map_err(|d| format!("{d:?}"))?;
    let viz = link_viz(parsed.clone(), arch.clone()).map_err(|d| format!("{d:?}"))?;
    let elapsed = start.elapsed();

    check(arch.warnings().is_empty() && viz.warnings().is_empty(), || "unexpected warnings".into())?;
    let artifacts = model.artifacts.len();
    let connections: usize = model.artifacts.iter().map(|a| a.connections.len()).sum();
    let containments: usize = model.artifacts.iter().map(|a| a.containments.len()).sum();
    check((artifacts, connections, containments) == (4, 3, 3), || {
        format!("model counts {artifacts}/{connections}/{containments}")
    })?;
    let views = parsed.views.len();
    let categories: usize = parsed.views.iter().map(|v| v.category_connections.len()).sum();
    let shows = parsed.artifact_shows.len();
    check((views, categories, shows) == (3, 1, 1), || format!("viz counts {views}/{categories}/{shows}"))?;
    within(elapsed, Duration::from_millis(50))?;
    Ok(format!("4/3/3 and 3/1/1 in {elapsed:?}"))
}

/// The OSGi visualization with a third category type: products reached
/// through their features.
fn three_category_viz(arch: Arc<archviz_core::ValidatedArchitecture>) -> Arc<archviz_core::ValidatedViz> {
    let text = testkit::OSGI_VIZ.replace(
        "connect OSGi.Bundle.Dependency via OSGi.Product in BundleDependencies",
        "connect OSGi.Bundle.Dependency via OSGi.Product in BundleDependencies\n    \
         connect OSGi.Bundle.Dependency via OSGi.Product>OSGi.Feature in BundleDependencies",
    );
    testkit::viz(&text, arch)
}

/// Brute force over every connected pair and every ordered pair of
/// categories, climbing the containment chain upwards from the endpoints.
fn category_oracle(pm: &ProjectModel, members: &[String], decl: &CategoryConnection) -> Vec<EdgeInstance> {
    let arch = pm.arch();
    let conn = decl.connection;
    let climb = |id: &str| -> BTreeSet<String> {
        let mut level = BTreeSet::from([id.to_string()]);
        for &ty in decl.chain.iter().rev() {
            level = level.iter().flat_map(|x| pm.parents_of(x, ty).iter().cloned()).collect();
        }
        level
    };
    let categories: Vec<&String> =
        members.iter().filter(|id| pm.instance(id).unwrap().artifact() == decl.chain[0]).collect();
    let mut out = Vec::new();
    for c1 in &categories {
        for c2 in &categories {
            if c1 == c2 {
                continue;
            }
            let mut count = 0;
            for b in pm.instances() {
                if b.artifact() != arch.connection_target(conn) {
                    continue;
                }
                for a in pm.sources_of(b.id(), conn) {
                    if climb(a).contains(*c1) && climb(b.id()).contains(*c2) {
                        count += 1;
                    }
                }
            }
            if count > 0 {
                out.push(EdgeInstance {
                    connection: arch.qualified_connection_name(conn),
                    source: (*c1).clone(),
                    target: (*c2).clone(),
                    multiplicity: count,
                    category: true,
                });
            }
        }
    }
    out.sort();
    out
}

fn category_edges_oracle() -> Verdict {
    let start = Instant::now();
    let arch = testkit::arch(testkit::OSGI_MODEL);
    let viz = three_category_viz(arch.clone());
    let mut rng = StdRng::seed_from_u64(0xCA7E);
    let (mut compared, mut nonempty) = (0, 0);
    let mut kinds = BTreeSet::new();
    for round in 0..200 {
        let n = rng.gen_range(1..=30);
        let pm = Arc::new(testkit::random_pm(&mut rng, &arch, n, 2.0));
        let ctx = testkit::random_context(&mut rng, pm.clone(), viz.clone(), 10);
        for path in testkit::reachable_paths(&ctx, 2) {
            let Ok(decls) = ctx.categories(&path) else { continue };
            let members = ctx.scope(&path).map_err(|e| e.to_string())?.members;
            for decl in decls {
                kinds.insert(decl.chain.clone());
                let mut got = category_edges(&ctx, &path, decl).map_err(|e| e.to_string())?;
                got.sort();
                let want = category_oracle(&pm, &members, decl);
                check(got == want, || format!("round {round}, {path:?}: {got:?} != {want:?}"))?;
                compared += 1;
                nonempty += usize::from(!want.is_empty());
            }
        }
    }
    let elapsed = start.elapsed();
    check(kinds.len() == 3, || format!("{} category types exercised", kinds.len()))?;
    check(nonempty > 0, || "oracle never produced an edge".into())?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{compared} comparisons ({nonempty} non-empty) in {elapsed:?}"))
}

fn undo_identity() -> Verdict {
    let start = Instant::now();
    let (arch, viz) = testkit::osgi();
    let mut rng = StdRng::seed_from_u64(0x0DD0);
    let mut applied = 0;
    for round in 0..500 {
        let n = rng.gen_range(0..=25);
        let pm = Arc::new(testkit::random_pm(&mut rng, &arch, n, 1.5));
        let init = ViewContext::new(pm, viz.clone()).map_err(|e| e.to_string())?;
        let mut ctx = init.clone();
        let len = rng.gen_range(0..=50);
        for _ in 0..len {
            let action = testkit::random_action(&mut rng, &ctx);
            applied += usize::from(ctx.apply(&action).is_ok());
        }
        while ctx.can_undo() {
            ctx.undo().map_err(|e| e.to_string())?;
        }
        check(ctx == init, || format!("round {round}: state after full undo differs"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("500 sequences, {applied} accepted actions, {elapsed:?}"))
}

fn vcm_tolerance() -> Verdict {
    let (arch, viz) = testkit::osgi();
    let pm = testkit::osgi_project(arch);
    let mut ctx = ViewContext::new(Arc::new(pm.clone()), viz.clone()).map_err(|e| e.to_string())?;
    let features = ViewPath::root("Features");
    let nested = features.child("f1", "BundleDependencies");
    let bundles = ViewPath::root("BundleDependencies");
    let script = [
        Action::Expand { view: ViewPath::root("Products"), id: "p1".into() },
        Action::Expand { view: features.clone(), id: "f1".into() },
        Action::Expand { view: features.clone(), id: "f2".into() },
        Action::Expand { view: nested.clone(), id: "b1".into() },
        Action::Expand { view: nested.clone(), id: "b2".into() },
        Action::ConnectAll {
            view: bundles.clone(),
            id: "b1".into(),
            connection: "OSGi.Bundle.Dependency".into(),
            direction: archviz_core::viewctx::Direction::Outgoing,
        },
        Action::Focus { view: bundles.clone(), id: "b3".into() },
        Action::Expand { view: ViewPath::root("Services"), id: "si1".into() },
        Action::Expand { view: ViewPath::root("Services"), id: "sc1".into() },
    ];
    for action in &script {
        ctx.apply(action).map_err(|e| format!("{action:?}: {e}"))?;
    }
    let text = ctx.export_vcm();
    let before = ctx.state().clone();
    let mut checked = 0;
    for victim in pm.instances().map(|i| i.id().to_string()) {
        let mentions = |view: &ViewPath, ids: &[&str]| view.parent_ids().any(|p| p == victim) || ids.contains(&&*victim);
        let mut smaller = pm.clone();
        smaller.remove_instance(&victim).map_err(|e| e.to_string())?;
        let (restored, report) = restore_vcm(&text, Arc::new(smaller), viz.clone()).map_err(|e| e.to_string())?;
        let want_elements: BTreeMap<_, _> = before
            .elements
            .iter()
            .filter(|((view, id), _)| !mentions(view, &[id]))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let want_edges: BTreeSet<ShownEdge> = before
            .shown_edges
            .iter()
            .filter(|e| !mentions(&e.view, &[&e.source, &e.target]))
            .cloned()
            .collect();
        let after = restored.state();
        check(after.elements == want_elements, || format!("removing {victim}: element states differ"))?;
        check(after.shown_edges == want_edges, || format!("removing {victim}: shown edges differ"))?;
        check(after.view_visibility == before.view_visibility && after.id_filter == before.id_filter, || {
            format!("removing {victim}: global state changed")
        })?;
        let referenced = before.elements.keys().any(|(v, id)| mentions(v, &[id]))
            || before.shown_edges.iter().any(|e| mentions(&e.view, &[&e.source, &e.target]));
        let dropped = report.dropped_elements.len() + report.dropped_edges.len();
        check(dropped == before.elements.len() - want_elements.len() + before.shown_edges.len() - want_edges.len(), || {
            format!("removing {victim}: report counts {dropped}")
        })?;
        check(!referenced || report.dropped_ids == BTreeSet::from([victim.clone()]), || {
            format!("removing {victim}: dropped ids {:?}", report.dropped_ids)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} single-instance deletions, {} states", before.elements.len() + before.shown_edges.len()))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../extract/tests/fixtures")
}

fn run_fixture(kind: ExtractorKind, dir: &str, model: &str, name: &str) -> Result<ProjectModel, String> {
    let arch = testkit::arch(model);
    let root = fixtures().join(dir);
    let mut cfg = ExtractionConfig::new(root.join("tree"), kind, arch.clone());
    cfg.project_name = Some(name.into());
    let out = extract(&cfg).map_err(|e| format!("{dir}: {e}"))?;
    check(out.warnings.is_empty(), || format!("{dir}: warnings {:?}", out.warnings))?;
    let expected = std::fs::read_to_string(root.join("expected.spvizpm.json")).map_err(|e| e.to_string())?;
    check(save_pm(&out.pm) == expected, || format!("{dir}: output differs from the expected model"))?;
    load_pm(&expected, arch).map_err(|e| e.to_string())?;
    Ok(out.pm)
}

fn count(pm: &ProjectModel, ty: &str) -> usize {
    pm.instances_of(pm.arch().artifact_id(ty).unwrap()).count()
}

fn links(pm: &ProjectModel, qualified: &str) -> usize {
    let conn = pm.arch().resolve_connection(qualified).unwrap();
    pm.instances().map(|i| pm.targets_of(i.id(), conn).len()).sum()
}

fn extractor_fixtures() -> Verdict {
    let osgi = run_fixture(ExtractorKind::Osgi, "osgi", testkit::OSGI_MODEL, "osgi-fixture")?;
    check(osgi.len() == 7 && osgi.link_counts() == (5, 3), || {
        format!("osgi: {} instances, links {:?}", osgi.len(), osgi.link_counts())
    })?;

    let maven = run_fixture(ExtractorKind::Maven, "maven", testkit::MAVEN_MODEL, "maven-fixture")?;
    let provided = ["ServiceInterface.ProvidedBy", "ServiceComponent.Required"].map(|c| links(&maven, c));
    check(count(&maven, "Module") == 2 && links(&maven, "Module.Dependency") == 1 && provided == [1, 1], || {
        "maven: expected 2 modules, 1 dependency, 1 injection triple".into()
    })?;

    let yarn = run_fixture(ExtractorKind::Yarn, "yarn", testkit::YARN_MODEL, "yarn-fixture")?;
    check(count(&yarn, "Package") == 2 && links(&yarn, "Package.Dependency") == 1, || {
        "yarn: expected 2 packages, 1 dependency".into()
    })?;

    let gradle = run_fixture(ExtractorKind::GradleJson, "gradle", testkit::GRADLE_MODEL, "gradle-fixture")?;
    check(count(&gradle, "Project") == 3 && links(&gradle, "Project.Dependency") == 2, || {
        "gradle: expected 3 projects, 2 links".into()
    })?;
    Ok("osgi 7/5+3, maven 2/1/1, yarn 2/1, gradle 3/2, byte-identical".into())
}

fn layout_problem(d: &LaidOutDiagram) -> Option<String> {
    let g = &d.graph;
    for (i, node) in g.nodes.iter().enumerate() {
        let outer = d.nodes[i].rect;
        for &c in &node.children {
            let inner = d.nodes[c].rect;
            if inner.x < outer.x || inner.y < outer.y || inner.right() > outer.right() || inner.bottom() > outer.bottom() {
                return Some(format!("{}: node {c} outside parent {i}", g.view));
            }
        }
        for (k, &a) in node.children.iter().enumerate() {
            for &b in &node.children[k + 1..] {
                let (ra, rb) = (d.nodes[a].rect, d.nodes[b].rect);
                let w = ra.right().min(rb.right()) - ra.x.max(rb.x);
                let h = ra.bottom().min(rb.bottom()) - ra.y.max(rb.y);
                if w > 0.0 && h > 0.0 {
                    return Some(format!("{}: siblings {a} and {b} overlap", g.view));
                }
            }
        }
        let area = |kind| node.children.iter().copied().find(|&c| g.nodes[c].kind == kind);
        if let (Some(c), Some(e)) = (area(NodeKind::CollapsedArea), area(NodeKind::ExpandedArea)) {
            if d.nodes[c].rect.bottom() > d.nodes[e].rect.y {
                return Some(format!("{}: collapsed area {c} below expanded area {e}", g.view));
            }
        }
    }
    None
}

fn layout_invariants() -> Verdict {
    let (arch, viz) = testkit::osgi();
    let mut rng = StdRng::seed_from_u64(0x1A7);
    let mut drawn = 0;
    for round in 0..100 {
        let n = rng.gen_range(0..=30);
        let pm = Arc::new(testkit::random_pm(&mut rng, &arch, n, 1.5));
        let ctx = testkit::random_context(&mut rng, pm, viz.clone(), 40);
        for view in viz.views() {
            let Ok(graph) = synthesize(&ctx, &view.name) else { continue };
            let first = layout(&graph, &LayoutConfig::default());
            if let Some(problem) = layout_problem(&first) {
                return Err(format!("round {round}: {problem}"));
            }
            let again = layout(&synthesize(&ctx, &view.name).map_err(|e| e.to_string())?, &LayoutConfig::default());
            check(render_svg(&first) == render_svg(&again), || format!("round {round}: {} renders differ", view.name))?;
            drawn += 1;
        }
    }
    Ok(format!("{drawn} diagrams from 100 contexts"))
}

fn isqrt(n: u128) -> u128 {
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

/// frac((k+1)(√5−1)/2)·360 in fixed point with 18 decimals.
fn exact_hue(k: u128) -> f64 {
    const SCALE: u128 = 1_000_000_000_000_000_000;
    let sqrt5 = isqrt(5 * SCALE * SCALE);
    let fraction = (sqrt5 - SCALE) / 2;
    let scaled = ((k + 1) * fraction) % SCALE * 360;
    (scaled / SCALE) as f64 + (scaled % SCALE) as f64 / SCALE as f64
}

fn color_formula() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let diff = (hue(k) - exact_hue(k as u128)).abs();
        worst = worst.max(diff);
        check(diff < 1e-4, || format!("k={k}: {} vs {}", hue(k), exact_hue(k as u128)))?;
    }
    check((hue(0) - 222.4922).abs() < 5e-5 && (hue(1) - 84.9845).abs() < 5e-5, || {
        format!("first hues {} {}", hue(0), hue(1))
    })?;
    let mut text = String::from("package p\nSPVizModel Ten {\n");
    for i in 0..10 {
        text.push_str(&format!("  T{i} {{ }}\n"));
    }
    text.push_str("}\n");
    let arch = testkit::arch(&text);
    let colors = assign_colors(&arch);
    for (k, id) in arch.artifact_ids().enumerate() {
        let h = colors.get(id).h;
        check((h - exact_hue(k as u128)).abs() < 1e-4, || format!("T{k} painted with hue {h}"))?;
    }
    Ok(format!("max deviation {worst:.2e} degrees"))
}

/// Requires a local checkout; see the README for the expected count.
fn klighd_bundles() -> Option<Verdict> {
    let root = std::env::var_os("ARCHVIZ_KLIGHD_ROOT")?;
    let expected: usize = std::env::var("ARCHVIZ_KLIGHD_BUNDLES").ok().and_then(|v| v.parse().ok()).unwrap_or(25);
    let arch = testkit::arch(testkit::OSGI_MODEL);
    let cfg = ExtractionConfig::new(PathBuf::from(root), ExtractorKind::Osgi, arch.clone());
    Some(extract(&cfg).map_err(|e| e.to_string()).and_then(|out| {
        let bundles: Vec<_> = out
            .pm
            .instances_of(arch.artifact_id("Bundle").unwrap())
            .filter(|i| !i.display_name().starts_with(archviz_extract::EXTERNAL_PREFIX))
            .collect();
        check(bundles.len() == expected, || format!("{} project bundles, expected {expected}", bundles.len()))?;
        Ok(format!("{} project bundles", bundles.len()))
    }))
}

fn main() -> std::process::ExitCode {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("dsl-fidelity", dsl_fidelity),
        ("category-edge-oracle", category_edges_oracle),
        ("undo-redo-identity", undo_identity),
        ("vcm-tolerance", vcm_tolerance),
        ("extractor-fixtures", extractor_fixtures),
        ("layout-invariants", layout_invariants),
        ("color-formula", color_formula),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    match klighd_bundles() {
        None => println!("SKIP klighd-bundles: ARCHVIZ_KLIGHD_ROOT not set"),
        Some(Ok(detail)) => println!("PASS klighd-bundles: {detail}"),
        Some(Err(why)) => {
            println!("FAIL klighd-bundles: {why}");
            failed.push("klighd-bundles");
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
