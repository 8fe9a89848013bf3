use std::path::{Path, PathBuf};

/// Values read from a `key=value` manifest file. Command-line flags take
/// precedence over every field.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Manifest {
    pub text_vecs: Option<PathBuf>,
    pub image_vecs: Option<PathBuf>,
    pub benches: Vec<PathBuf>,
    pub configs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub dim_step: Option<usize>,
    pub dim_min: Option<usize>,
    pub alpha_step: Option<f64>,
    pub ridge: Option<f64>,
    pub motifs: Option<String>,
    pub workers: Option<usize>,
    pub normalize_concat: Option<bool>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(""))).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Relative paths are resolved against `base`, the manifest's directory.
    /// `bench` and `config` may repeat or hold comma-separated lists.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut m = Manifest::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {lineno}: expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let path = |v: &str| base.join(v);
            let num = |what: &str| format!("line {lineno}: invalid {what} `{value}`");
            match key {
                "text_vecs" => m.text_vecs = Some(path(value)),
                "image_vecs" => m.image_vecs = Some(path(value)),
                "bench" => m.benches.extend(value.split(',').map(|v| path(v.trim()))),
                "config" => m.configs.extend(value.split(',').map(|v| path(v.trim()))),
                "out" => m.out = Some(path(value)),
                "dim_step" => m.dim_step = Some(value.parse().map_err(|_| num("dim_step"))?),
                "dim_min" => m.dim_min = Some(value.parse().map_err(|_| num("dim_min"))?),
                "alpha_step" => m.alpha_step = Some(value.parse().map_err(|_| num("alpha_step"))?),
                "ridge" => m.ridge = Some(value.parse().map_err(|_| num("ridge"))?),
                "motifs" => m.motifs = Some(value.to_string()),
                "workers" => m.workers = Some(value.parse().map_err(|_| num("workers"))?),
                "normalize_concat" => m.normalize_concat = Some(value.parse().map_err(|_| num("normalize_concat"))?),
                other => return Err(format!("line {lineno}: unknown key `{other}`")),
            }
        }
        Ok(m)
    }
}
