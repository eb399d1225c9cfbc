use std::path::Path;

use anyhow::{anyhow, Context};
use sspert::{catalog, Arithmetic, MethodDoc, NumericPolicy};

/// A method loaded from the catalog or a method file.
pub struct Source {
    pub doc: MethodDoc,
    pub arithmetic: Arithmetic,
}

impl Source {
    pub fn has_perturbation(&self) -> bool {
        self.doc.a_tilde.is_some()
    }
}

/// Files win over catalog names so a local `rk44` file can shadow the
/// built-in one.
pub fn load(name: &str, policy: NumericPolicy) -> anyhow::Result<Source> {
    let path = Path::new(name);
    let doc = if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        MethodDoc::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        catalog::get(name)
            .map_err(|_| anyhow!("`{name}` is neither a catalog method nor a readable method file"))?
            .doc
    };
    let arithmetic = doc.arithmetic(policy)?;
    log::debug!("loaded {} with {:?} arithmetic", doc.name, arithmetic);
    Ok(Source { doc, arithmetic })
}

/// Runs `$f::<T>(args)` with the scalar type chosen for `$src`.
macro_rules! dispatch {
    ($src:expr, $f:ident($($arg:expr),* $(,)?)) => {
        match $src.arithmetic {
            sspert::Arithmetic::Rational => $f::<sspert::Rational>($($arg),*),
            sspert::Arithmetic::Float => $f::<f64>($($arg),*),
        }
    };
}

pub(crate) use dispatch;
