//! Singular sets and labels for the three model examples.

use emfront::frontio::jobs::histogram;
use emfront::frontio::jobs::ReportRecord;
use emfront::{classify_point, classify_window, ChartWindow, GeneratingFunction, Tolerances};

fn main() -> emfront::Result<()> {
    let tols = Tolerances::default();
    let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 41)?;
    for (name, src) in [
        ("cuspidal edge", "x1^3/3 - p2^2/2"),
        ("swallowtail", "x1^4/4 + p2*x1^2/2"),
        ("A3-type", "x1^4/4 - p2^2/2"),
    ] {
        let g = GeneratingFunction::parse(src, 2, &[1])?;
        let records: Vec<ReportRecord> = classify_window(&g, &w, &tols)
            .into_iter()
            .map(|(point, r)| match r {
                Ok(r) => ReportRecord::Report(Box::new(r)),
                Err(e) => ReportRecord::Failed { point, error: e.to_string() },
            })
            .collect();
        println!("{name:>14} ({src}): {:?}", histogram(&records));
        let r = classify_point(&g, &[0.0, 0.0], &tols)?;
        println!(
            "{:>14} origin: T3 = {:?}, T4 = {:?}, |dλ| = {:.3e}, h psd = {}",
            "",
            r.t3,
            r.t4,
            r.grad_lambda.iter().map(|v| v * v).sum::<f64>().sqrt(),
            r.h_psd
        );
    }
    Ok(())
}
