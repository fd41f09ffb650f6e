//! `.smi` files: one `<SMILES> <optional name>` record per line. Blank lines
//! and lines starting with `#` are skipped.

use super::{parse_smiles, MolError, Molecule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmiRecord {
    /// 1-based line number in the source text.
    pub line: usize,
    pub smiles: String,
    pub name: Option<String>,
}

impl SmiRecord {
    /// The record name, or `line<N>` when the line has none.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("line{}", self.line))
    }

    pub fn parse(&self) -> Result<Molecule, MolError> {
        parse_smiles(&self.smiles).map(|m| m.with_name(self.name.clone()))
    }
}

pub fn read_smi(text: &str) -> Vec<SmiRecord> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            let (smiles, rest) = match line.find(char::is_whitespace) {
                Some(k) => (&line[..k], line[k..].trim()),
                None => (line, ""),
            };
            Some(SmiRecord {
                line: i + 1,
                smiles: smiles.to_string(),
                name: (!rest.is_empty()).then(|| rest.to_string()),
            })
        })
        .collect()
}

/// Formats `(smiles, name)` pairs as `.smi` text.
pub fn write_smi<'a>(records: impl IntoIterator<Item = (&'a str, Option<&'a str>)>) -> String {
    let mut out = String::new();
    for (smiles, name) in records {
        out.push_str(smiles);
        if let Some(n) = name {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let text = "# header\n\nCCO ethanol\nc1ccccc1\tbenzene ring\n  C  \n";
        let recs = read_smi(text);
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].line, 3);
        assert_eq!(recs[0].name.as_deref(), Some("ethanol"));
        assert_eq!(recs[1].name.as_deref(), Some("benzene ring"));
        assert_eq!(recs[2].name, None);
        assert_eq!(recs[2].label(), "line5");
        assert_eq!(recs[0].parse().unwrap().name(), Some("ethanol"));
    }

    #[test]
    fn write_then_read() {
        let text = write_smi([("CCO", Some("a")), ("C", None)]);
        let recs = read_smi(&text);
        assert_eq!(recs[0].smiles, "CCO");
        assert_eq!(recs[1].name, None);
    }
}
