use std::sync::OnceLock;

use crate::data::{parse_f64, DataError, DataSource, Table};
use crate::descriptors::DescriptorSet;
use crate::Scalar;

use super::DruglikenessError;

/// Property order of every QED input array.
pub const QED_PROPERTIES: [&str; 8] = [
    "mw",
    "lp",
    "hba",
    "hbd",
    "tpsa",
    "rotatable_bonds",
    "aromatic_rings",
    "alerts",
];

/// Asymmetric double sigmoid parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ads<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
    pub dmax: T,
}

impl<T: Scalar> Ads<T> {
    /// Desirability of `x`, i.e. the sigmoid divided by its maximum.
    pub fn desirability(&self, x: T) -> T {
        let two = T::lit(2.0);
        let rise = T::one() + (-(x - self.c + self.d / two) / self.e).exp();
        let fall = T::one() + (-(x - self.c - self.d / two) / self.f).exp();
        (self.a + self.b / rise * (T::one() - T::one() / fall)) / self.dmax
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QedParams<T> {
    /// Indexed like [`QED_PROPERTIES`].
    pub ads: [Ads<T>; 8],
    pub version: u32,
}

impl<T: Scalar> QedParams<T> {
    pub fn load(src: &DataSource) -> Result<QedParams<T>, DataError> {
        let text = src.read("qed_ads.tsv")?;
        let t = Table::parse("qed_ads", &text, 8)?;
        let mut ads: [Option<Ads<T>>; 8] = [None; 8];
        for (line, f) in &t.rows {
            let k = QED_PROPERTIES
                .iter()
                .position(|p| *p == f[0])
                .ok_or_else(|| DataError::parse("qed_ads", *line, format!("unknown property '{}'", f[0])))?;
            let v = |j: usize| parse_f64("qed_ads", *line, f[j]).map(T::lit);
            ads[k] = Some(Ads {
                a: v(1)?,
                b: v(2)?,
                c: v(3)?,
                d: v(4)?,
                e: v(5)?,
                f: v(6)?,
                dmax: v(7)?,
            });
        }
        let mut out = [Ads {
            a: T::zero(),
            b: T::zero(),
            c: T::zero(),
            d: T::zero(),
            e: T::one(),
            f: T::one(),
            dmax: T::one(),
        }; 8];
        for (k, a) in ads.into_iter().enumerate() {
            out[k] = a.ok_or_else(|| DataError::parse("qed_ads", 0, format!("missing row '{}'", QED_PROPERTIES[k])))?;
        }
        Ok(QedParams {
            ads: out,
            version: t.version,
        })
    }
}

pub fn embedded_qed_params() -> &'static QedParams<f64> {
    static P: OnceLock<QedParams<f64>> = OnceLock::new();
    P.get_or_init(|| QedParams::load(&DataSource::Embedded).expect("embedded QED table is valid"))
}

/// Unweighted geometric mean of the desirabilities.
pub fn qed_from_desirabilities<T: Scalar>(d: &[T; 8]) -> T {
    let logs: T = d.iter().map(|&x| x.ln()).sum();
    (logs / T::lit(8.0)).exp()
}

/// QED from raw property values in [`QED_PROPERTIES`] order. A `None` or NaN
/// value is a missing descriptor.
pub fn qed_from_values<T: Scalar>(values: &[Option<T>; 8], params: &QedParams<T>) -> Result<T, DruglikenessError> {
    let mut d = [T::zero(); 8];
    for k in 0..8 {
        let x = values[k]
            .filter(|v| !v.is_nan())
            .ok_or(DruglikenessError::MissingDescriptor(QED_PROPERTIES[k]))?;
        d[k] = params.ads[k].desirability(x);
    }
    Ok(qed_from_desirabilities(&d))
}

pub fn qed_values(d: &DescriptorSet) -> [Option<f64>; 8] {
    [
        Some(d.mw),
        Some(d.lp),
        Some(d.hba as f64),
        Some(d.hbd as f64),
        Some(d.tpsa),
        Some(d.rotatable_bonds as f64),
        Some(d.aromatic_rings as f64),
        Some(d.alerts as f64),
    ]
}

pub fn qed(d: &DescriptorSet) -> Result<f64, DruglikenessError> {
    qed_with(d, embedded_qed_params())
}

pub fn qed_with(d: &DescriptorSet, params: &QedParams<f64>) -> Result<f64, DruglikenessError> {
    qed_from_values(&qed_values(d), params)
}
