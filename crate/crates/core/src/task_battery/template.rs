//! Prompt templates with `{name}` placeholders.

use std::collections::BTreeMap;

use super::{AssetStore, BatteryError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub domain: String,
    pub id: String,
    pub text: String,
}

impl Template {
    /// Substitute every `{name}`. A placeholder without a value is an error,
    /// so a typo in an edited asset cannot leak into prompts.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String, BatteryError> {
        let mut out = String::with_capacity(self.text.len() + 64);
        let mut rest = self.text.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let close = after.find('}');
            let name = close
                .map(|c| &after[..c])
                .filter(|n| !n.is_empty() && n.chars().all(|ch| ch.is_ascii_lowercase() || ch == '_'));
            match (name, close) {
                (Some(name), Some(c)) => {
                    let value = vars.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).ok_or_else(|| {
                        BatteryError::Placeholder { template: self.id.clone(), name: name.to_string() }
                    })?;
                    out.push_str(value);
                    rest = &after[c + 1..];
                }
                _ => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Templates grouped by domain key, in file order.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    by_domain: BTreeMap<String, Vec<Template>>,
}

impl TemplateSet {
    pub fn load(assets: &AssetStore, subset: Option<&[String]>) -> Result<Self, BatteryError> {
        let mut by_domain: BTreeMap<String, Vec<Template>> = BTreeMap::new();
        let mut all_domains = Vec::new();
        for row in assets.rows("templates.tsv", 3)? {
            let t = Template { domain: row.cells[0].clone(), id: row.cells[1].clone(), text: row.cells[2].clone() };
            if !all_domains.contains(&t.domain) {
                all_domains.push(t.domain.clone());
            }
            if subset.map_or(true, |s| s.contains(&t.id)) {
                by_domain.entry(t.domain.clone()).or_default().push(t);
            }
        }
        for d in all_domains {
            by_domain.entry(d).or_default();
        }
        Ok(Self { by_domain })
    }

    pub fn for_domain(&self, domain: &str) -> Result<&[Template], BatteryError> {
        match self.by_domain.get(domain) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(BatteryError::NoTemplates(domain.to_string())),
        }
    }

    /// Template for a cell: cycles with the cell index and repeat, offset by
    /// the seed.
    pub fn cycled(&self, domain: &str, cell: usize, repeat: u32, seed: u64) -> Result<&Template, BatteryError> {
        let list = self.for_domain(domain)?;
        let n = list.len();
        let idx = (cell % n + repeat as usize % n + (seed % n as u64) as usize) % n;
        Ok(&list[idx])
    }
}
