//! Models shipped with the crate.

use super::{parse_model, ModelDoc};

/// `(file name, source)` of every bundled model.
pub const BUNDLED: [(&str, &str); 4] = [
    ("kdv.phs", include_str!("../../models/kdv.phs")),
    (
        "boussinesq.phs",
        include_str!("../../models/boussinesq.phs"),
    ),
    (
        "elastic_rod.phs",
        include_str!("../../models/elastic_rod.phs"),
    ),
    (
        "allen_cahn.phs",
        include_str!("../../models/allen_cahn.phs"),
    ),
];

/// Source of a bundled model, by file name with or without `.phs`.
pub fn bundled(name: &str) -> Option<&'static str> {
    let file = if name.ends_with(".phs") {
        name.to_string()
    } else {
        format!("{name}.phs")
    };
    BUNDLED
        .iter()
        .find(|(f, _)| *f == file)
        .map(|(_, src)| *src)
}

/// A parsed bundled model. Panics if `name` is not bundled.
pub fn bundled_model(name: &str) -> ModelDoc {
    let src = bundled(name).unwrap_or_else(|| panic!("no bundled model `{name}`"));
    parse_model(src).expect("bundled models are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_model_parses() {
        for (name, src) in BUNDLED {
            let doc = parse_model(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(doc.build().is_ok());
        }
        assert!(bundled("kdv").is_some());
        assert!(bundled("missing.phs").is_none());
        assert!(bundled_model("allen_cahn").is_dissipative());
    }
}
