//! e- and m-wavefronts of the cuspidal-edge example, with OBJ export and the
//! duality between the two sides.

use emfront::frontio::mesh::sample_wavefronts;
use emfront::geometry::{dual_chart_point, dualize};
use emfront::{find_singular_set, lift, project_e, project_m, ChartWindow, GeneratingFunction};

fn main() -> emfront::Result<()> {
    let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1])?;
    let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 21)?;
    for q in [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.5]] {
        let pt = lift(&g, &q)?;
        let (x, z) = project_e(&pt);
        let (p, zd) = project_m(&pt);
        println!("q = {q:?}: e-side ({x:?}, {z:.6}), m-side ({p:?}, {zd:.6})");
    }

    let singular = find_singular_set(&g, &w, 1e-10);
    let (e, m) = sample_wavefronts(&g, &w, &singular);
    println!(
        "{} vertices, {} triangles, {} singular curve(s)",
        m.vertex_count(),
        m.faces().len(),
        m.singular.len()
    );
    let dir = std::env::temp_dir().join("emfront-wavefronts");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("mesh_e.obj"), e.to_obj().unwrap_or_default())?;
    std::fs::write(dir.join("mesh_m.obj"), m.to_obj().unwrap_or_default())?;
    println!("meshes written to {}", dir.display());

    let dual = dualize(&g);
    println!("dual: {dual} with I' = {:?}", dual.partition().i());
    let q = [0.4, -0.2];
    let (p, zd) = project_m(&lift(&dual, &dual_chart_point(g.partition(), &q))?);
    let (x, z) = project_e(&lift(&g, &q)?);
    println!("m-wavefront of the dual {p:?}, {zd:.12} = e-wavefront {x:?}, {z:.12}");
    Ok(())
}
