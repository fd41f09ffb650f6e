//! Per-panel CSV tables (the contract) and SVG sketches from a report.

use std::path::Path;

use screenlab_core::stats::BoxplotSummary;

use crate::error::{CliError, Result};
use crate::io::{csv_field, num, read_text, write_atomic};
use crate::report::{ScoreSeries, ScreeningReport, REQUIRED_SECTIONS, SCHEMA_VERSION};
use crate::svg;

/// Parses a report, naming the first missing section.
pub fn load_report(path: &Path) -> Result<ScreeningReport> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: not JSON: {e}", path.display())))?;
    for key in REQUIRED_SECTIONS {
        if value.get(key).is_none() {
            return Err(CliError::input(format!("{}: missing report section '{key}'", path.display())));
        }
    }
    let version = value["schema_version"].as_u64();
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(CliError::input(format!(
            "{}: schema_version {:?} is not {SCHEMA_VERSION}",
            path.display(),
            version
        )));
    }
    serde_json::from_value(value).map_err(|e| CliError::input(format!("{}: malformed report: {e}", path.display())))
}

/// File name and contents of every output, CSVs first.
pub fn render(r: &ScreeningReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let sim = &r.similarity;

    // 3A: similarity before and after finetuning.
    let mut s = String::from("bin_lo,bin_hi,pre_count,post_count\n");
    for k in 0..sim.post.histogram.counts.len() {
        let (lo, hi) = sim.post.histogram.edges(k);
        let pre = sim.pre.as_ref().map(|p| p.histogram.counts[k].to_string()).unwrap_or_default();
        s.push_str(&format!("{lo},{hi},{pre},{}\n", sim.post.histogram.counts[k]));
    }
    out.push(("fig3a.csv".into(), s));

    // 3B: the cutoff set with its percentile line.
    let base = match sim.cutoff_source.as_str() {
        "pre" => sim.pre.as_ref().unwrap_or(&sim.post),
        _ => &sim.post,
    };
    let mut s = String::from("bin_lo,bin_hi,count,percentile,cutoff\n");
    for (k, c) in base.histogram.counts.iter().enumerate() {
        let (lo, hi) = base.histogram.edges(k);
        s.push_str(&format!("{lo},{hi},{c},{},{}\n", sim.percentile, num(sim.cutoff)));
    }
    out.push(("fig3b.csv".into(), s));

    // 3C: property histograms with the seed's value and z-score.
    let mut s = String::from("property,bin_lo,bin_hi,count,seed_value,seed_z\n");
    for d in &r.descriptor_distributions {
        for (k, c) in d.histogram.counts.iter().enumerate() {
            let (lo, hi) = d.histogram.edges(k);
            s.push_str(&format!("{},{lo},{hi},{c},{},{}\n", d.property, d.seed_value, num(d.seed_z)));
        }
    }
    out.push(("fig3c.csv".into(), s));

    // 4B: top-k versus bottom-k group means.
    let mut s = String::from("metric,mean_top,count_top,mean_bottom,count_bottom\n");
    for g in &r.group_comparison.rows {
        s.push_str(&format!("{},{},{},{},{}\n", g.metric, g.mean_a, g.count_a, g.mean_b, g.count_b));
    }
    out.push(("fig4b.csv".into(), s));

    // 4C: one row per high-affinity ligand, r values alongside.
    let mut s = String::from("ligand_label,energy,lp,mw,tpsa,hbd,hba\n");
    for h in &r.high_affinity {
        let d = &h.descriptors;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&h.label),
            h.energy,
            d.lp,
            d.mw,
            d.tpsa,
            d.hbd,
            d.hba
        ));
    }
    out.push(("fig4c.csv".into(), s));
    out.push(("fig4c_r.csv".into(), r.correlations_csv()));

    // 5A/5B: score boxplots and the values behind them.
    for (name, label, series) in [
        ("fig5a", "qed", &r.score_distributions.qed),
        ("fig5b", "sas", &r.score_distributions.sas),
    ] {
        let mut s = String::from("set,n,min,q1,median,q3,max,outliers\n");
        for x in series.iter() {
            match &x.summary {
                Some(b) => s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    x.set,
                    x.values.len(),
                    b.min,
                    b.q1,
                    b.median,
                    b.q3,
                    b.max,
                    b.outliers.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(";")
                )),
                None => s.push_str(&format!("{},0,,,,,,\n", x.set)),
            }
        }
        out.push((format!("{name}.csv"), s));
        let mut v = format!("set,ligand_label,{label}\n");
        for x in series.iter() {
            for (l, val) in x.labels.iter().zip(&x.values) {
                v.push_str(&format!("{},{},{val}\n", x.set, csv_field(l)));
            }
        }
        out.push((format!("{name}_values.csv"), v));
    }

    // 6A: contact frequencies.
    out.push(("fig6a.csv".into(), r.contact_frequencies.to_csv()));

    out.extend(svgs(r));
    out
}

fn boxes(series: &[ScoreSeries]) -> Vec<(&str, &BoxplotSummary<f64>)> {
    series.iter().filter_map(|x| x.summary.as_ref().map(|b| (x.set.as_str(), b))).collect()
}

fn svgs(r: &ScreeningReport) -> Vec<(String, String)> {
    let sim = &r.similarity;
    let mut out = Vec::new();
    let mut series: Vec<(&str, &[usize])> = Vec::new();
    if let Some(p) = &sim.pre {
        series.push(("pre", &p.histogram.counts));
    }
    series.push(("post", &sim.post.histogram.counts));
    out.push(("fig3a.svg".into(), svg::histogram("Similarity to the seed", "Tanimoto", 0.0, 1.0, &series, None)));

    let base = if sim.cutoff_source == "pre" { sim.pre.as_ref().unwrap_or(&sim.post) } else { &sim.post };
    let marker = sim.cutoff.map(|c| (format!("p{} = {c:.3}", sim.percentile), c));
    out.push((
        "fig3b.svg".into(),
        svg::histogram(
            "Similarity cutoff",
            "Tanimoto",
            0.0,
            1.0,
            &[(base.source.as_str(), &base.histogram.counts)],
            marker.as_ref().map(|(l, c)| (l.as_str(), *c)),
        ),
    ));

    for d in &r.descriptor_distributions {
        let z = d.seed_z.map(|z| format!("seed (z = {z:.2})")).unwrap_or_else(|| "seed".into());
        out.push((
            format!("fig3c_{}.svg", d.property),
            svg::histogram(&d.property, &d.property, d.histogram.lo, d.histogram.hi, &[("post", &d.histogram.counts)], Some((&z, d.seed_value))),
        ));
    }

    let metrics: Vec<String> = r.group_comparison.rows.iter().map(|g| g.metric.clone()).collect();
    out.push((
        "fig4b.svg".into(),
        svg::bars(
            "Top versus bottom affinity group",
            "mean",
            &metrics,
            &[
                ("top", r.group_comparison.rows.iter().map(|g| g.mean_a).collect()),
                ("bottom", r.group_comparison.rows.iter().map(|g| g.mean_b).collect()),
            ],
        ),
    ));

    let panels: Vec<(&str, Vec<(f64, f64)>, Option<f64>)> = r
        .correlations
        .iter()
        .map(|c| {
            let pts = r
                .high_affinity
                .iter()
                .map(|h| (h.energy, crate::screen::property(&h.descriptors, &c.y)))
                .collect();
            (c.y.as_str(), pts, c.r)
        })
        .collect();
    out.push(("fig4c.svg".into(), svg::scatter_panels("Energy against properties", "energy", &panels)));

    for (name, label, series) in [
        ("fig5a.svg", "QED", &r.score_distributions.qed),
        ("fig5b.svg", "SAS", &r.score_distributions.sas),
    ] {
        let rows: Vec<svg::BoxRow> = boxes(series)
            .into_iter()
            .map(|(n, b)| (n, b.min, b.q1, b.median, b.q3, b.max, b.outliers.as_slice()))
            .collect();
        out.push((name.into(), svg::boxplots(label, label, &rows)));
    }

    let labels: Vec<String> = r.contact_frequencies.rows.iter().map(|x| x.residue_label.clone()).collect();
    let counts: Vec<f64> = r.contact_frequencies.rows.iter().map(|x| x.count as f64).collect();
    out.push(("fig6a.svg".into(), svg::bars("Polar contact frequency", "ligands", &labels, &[("count", counts)])));
    out
}

pub fn write_plotdata(r: &ScreeningReport, out: &Path) -> Result<Vec<String>> {
    let files = render(r);
    for (name, text) in &files {
        write_atomic(&out.join(name), text.as_bytes())?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}
