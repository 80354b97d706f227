//! Ingest of `*.gradle-deps.json` files (schema in `docs/gradle-deps.md`).

use serde::Deserialize;

use crate::{read, require_artifacts, walk, Builder, ExtractError, Extraction, ExtractionConfig};

pub const GRADLE_SUFFIX: &str = ".gradle-deps.json";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradleDeps {
    pub project: String,
    pub dependencies: Vec<String>,
}

pub fn ingest_gradle_json(cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    require_artifacts(cfg, &["Project"])?;
    let files = walk(cfg)?;
    let mut b = Builder::new(cfg);
    let mut projects: Vec<(GradleDeps, String)> = Vec::new();
    for file in files.iter().filter(|f| f.name().ends_with(GRADLE_SUFFIX)) {
        let text = read(file)?;
        let deps: GradleDeps = serde_json::from_str(&text)
            .map_err(|e| ExtractError::Schema { file: file.rel.clone(), message: e.to_string() })?;
        if deps.project.trim().is_empty() {
            return Err(ExtractError::Schema { file: file.rel.clone(), message: "field `project` is empty".into() });
        }
        if projects.iter().any(|(p, _)| p.project == deps.project) {
            return Err(ExtractError::DuplicateProject { id: deps.project, file: file.rel.clone() });
        }
        projects.push((deps, file.rel.clone()));
    }
    for (deps, origin) in &projects {
        b.ensure("Project", &deps.project, None, Some(origin));
    }
    for (deps, origin) in &projects {
        for target in &deps.dependencies {
            if !b.has(target) {
                b.ensure_external("Project", target, Some(origin));
            }
            b.connect("Dependency", &deps.project, target, Some(origin));
        }
    }
    Ok(b.finish())
}
