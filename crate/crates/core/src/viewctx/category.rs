use std::collections::{BTreeMap, HashMap, HashSet};

use super::{CtxError, EdgeInstance, Scope, ViewContext, ViewPath};
use crate::vizmeta::CategoryConnection;

/// Aggregated edges for one category connection in a view.
///
/// For categories `c1 != c2` the multiplicity is the number of distinct
/// `(a, b)` instance pairs connected by the declared connection where `a` is
/// reachable from `c1` and `b` from `c2` along the containment chain.
/// Connections inside a single category are not drawn.
pub fn category_edges(
    ctx: &ViewContext,
    path: &ViewPath,
    decl: &CategoryConnection,
) -> Result<Vec<EdgeInstance>, CtxError> {
    let scope = ctx.scope(path)?;
    Ok(edges_in_scope(ctx, &scope, decl))
}

pub(super) fn edges_in_scope(ctx: &ViewContext, scope: &Scope, decl: &CategoryConnection) -> Vec<EdgeInstance> {
    let pm = ctx.pm();
    let arch = ctx.viz().arch();
    let category_type = decl.chain[0];
    let owner = decl.connection.owner;
    let target_type = arch.connection_target(decl.connection);
    let qualified = arch.qualified_connection_name(decl.connection);

    let categories: Vec<&String> = scope
        .members
        .iter()
        .filter(|id| pm.instance(id).is_some_and(|i| i.artifact() == category_type))
        .collect();

    let reach = |category: &str, endpoint| -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for holder in ctx.walk(category, &decl.chain[1..]) {
            for id in pm.children_of(&holder, endpoint) {
                if seen.insert(id.clone()) {
                    out.push(id.clone());
                }
            }
        }
        out
    };

    let mut containers: HashMap<String, Vec<usize>> = HashMap::new();
    for (index, category) in categories.iter().enumerate() {
        for b in reach(category, target_type) {
            containers.entry(b).or_default().push(index);
        }
    }

    let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for (i, category) in categories.iter().enumerate() {
        for a in reach(category, owner) {
            for b in pm.targets_of(&a, decl.connection) {
                for &j in containers.get(b).map(Vec::as_slice).unwrap_or(&[]) {
                    if i != j {
                        *counts.entry((i, j)).or_default() += 1;
                    }
                }
            }
        }
    }

    counts
        .into_iter()
        .map(|((i, j), multiplicity)| EdgeInstance {
            connection: qualified.clone(),
            source: categories[i].clone(),
            target: categories[j].clone(),
            multiplicity,
            category: true,
        })
        .collect()
}
