//! Labels survive an affine Legendre equivalence: the image of the
//! swallowtail example under a shear, described in a new chart.

use emfront::geometry::kernel_vector;
use emfront::nalgebra::{DMatrix, DVector};
use emfront::{classify_point, AffineChartModel, AffineLegendre, GeneratingFunction, Partition, Tolerances};

fn main() -> emfront::Result<()> {
    let tols = Tolerances::default();
    let g = GeneratingFunction::parse("x1^4/4 + p2*x1^2/2", 2, &[1])?;
    let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, -0.2, 0.9]);
    let map = AffineLegendre::new(a, DVector::from_vec(vec![0.1, -0.3]), DVector::from_vec(vec![0.2, 0.05]), 0.7)?;
    let model = AffineChartModel::new(g.clone(), map, Partition::new(2, &[1])?, vec![0.0, 0.0])?;
    for q in [[0.0, 0.0], [0.3, -0.27], [0.5, -0.75]] {
        let before = classify_point(&g, &q, &tols)?;
        let image = model.image(&q)?;
        let after = classify_point(&model, &image, &tols)?;
        let k = kernel_vector(&model, &image, tols.kernel_tol).map(|k| k.c).ok();
        println!(
            "{q:?}: {:?} -> {:?} at {image:.6?} (kernel {k:.6?})",
            before.classification, after.classification
        );
    }
    Ok(())
}
