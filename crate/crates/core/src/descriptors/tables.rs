use std::sync::OnceLock;

use crate::data::{parse_f64, DataError, DataSource, Table};
use crate::molgraph::{Element, Pattern};

#[derive(Debug, Clone)]
pub struct CrippenRule {
    pub atom_type: String,
    pub pattern: Pattern,
    pub logp: f64,
}

#[derive(Debug, Clone)]
pub struct TpsaRule {
    pub pattern: Pattern,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Alert {
    pub name: String,
    pub pattern: Pattern,
}

/// Contribution tables behind [`super::compute_descriptors`].
#[derive(Debug, Clone)]
pub struct DescriptorTables {
    weights: Vec<Option<f64>>,
    isotopes: Vec<(Element, u16, f64)>,
    pub crippen: Vec<CrippenRule>,
    pub tpsa: Vec<TpsaRule>,
    pub alerts: Vec<Alert>,
    /// `(table, version)` for provenance in reports.
    pub versions: Vec<(String, u32)>,
}

fn pattern(table: &str, line: usize, text: &str) -> Result<Pattern, DataError> {
    Pattern::parse(text).map_err(|e| DataError::parse(table, line, format!("pattern '{text}': {e}")))
}

impl DescriptorTables {
    pub fn load(src: &DataSource) -> Result<DescriptorTables, DataError> {
        let mut versions = Vec::new();

        let text = src.read("weights.tsv")?;
        let t = Table::parse("weights", &text, 2)?;
        versions.push((t.name.clone(), t.version));
        let mut weights = vec![None; 119];
        for (line, f) in &t.rows {
            let e = Element::from_symbol(f[0])
                .ok_or_else(|| DataError::parse("weights", *line, format!("unknown element '{}'", f[0])))?;
            weights[e.atomic_number() as usize] = Some(parse_f64("weights", *line, f[1])?);
        }

        let text = src.read("isotopes.tsv")?;
        let t = Table::parse("isotopes", &text, 3)?;
        versions.push((t.name.clone(), t.version));
        let isotopes = t
            .rows
            .iter()
            .map(|(line, f)| {
                let e = Element::from_symbol(f[0])
                    .ok_or_else(|| DataError::parse("isotopes", *line, format!("unknown element '{}'", f[0])))?;
                let a = f[1]
                    .parse()
                    .map_err(|_| DataError::parse("isotopes", *line, format!("bad mass number '{}'", f[1])))?;
                Ok((e, a, parse_f64("isotopes", *line, f[2])?))
            })
            .collect::<Result<_, DataError>>()?;

        let text = src.read("crippen.tsv")?;
        let t = Table::parse("crippen", &text, 3)?;
        versions.push((t.name.clone(), t.version));
        let crippen = t
            .rows
            .iter()
            .map(|(line, f)| {
                Ok(CrippenRule {
                    atom_type: f[0].to_string(),
                    pattern: pattern("crippen", *line, f[1])?,
                    logp: parse_f64("crippen", *line, f[2])?,
                })
            })
            .collect::<Result<_, DataError>>()?;

        let text = src.read("tpsa.tsv")?;
        let t = Table::parse("tpsa", &text, 2)?;
        versions.push((t.name.clone(), t.version));
        let tpsa = t
            .rows
            .iter()
            .map(|(line, f)| {
                Ok(TpsaRule {
                    pattern: pattern("tpsa", *line, f[0])?,
                    value: parse_f64("tpsa", *line, f[1])?,
                })
            })
            .collect::<Result<_, DataError>>()?;

        let text = src.read("alerts.tsv")?;
        let t = Table::parse("alerts", &text, 2)?;
        versions.push((t.name.clone(), t.version));
        let alerts = t
            .rows
            .iter()
            .map(|(line, f)| {
                Ok(Alert {
                    name: f[0].to_string(),
                    pattern: pattern("alerts", *line, f[1])?,
                })
            })
            .collect::<Result<_, DataError>>()?;

        Ok(DescriptorTables {
            weights,
            isotopes,
            crippen,
            tpsa,
            alerts,
            versions,
        })
    }

    /// The compiled-in tables, parsed once.
    pub fn embedded() -> &'static DescriptorTables {
        static TABLES: OnceLock<DescriptorTables> = OnceLock::new();
        TABLES.get_or_init(|| DescriptorTables::load(&DataSource::Embedded).expect("embedded descriptor tables are valid"))
    }

    pub fn weight(&self, e: Element) -> Option<f64> {
        self.weights[e.atomic_number() as usize]
    }

    /// Nuclide mass, falling back to the mass number.
    pub fn isotope_mass(&self, e: Element, mass_number: u16) -> f64 {
        self.isotopes
            .iter()
            .find(|&&(ie, a, _)| ie == e && a == mass_number)
            .map_or(mass_number as f64, |&(_, _, m)| m)
    }
}
