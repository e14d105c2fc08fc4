//! Grid sampling of the e- and m-wavefronts and OBJ/CSV export.
//!
//! Vertices are the projected lifts of the window's grid nodes. Nodes whose
//! lift fails are dropped and counted; faces touching them are omitted, so
//! holes are never bridged.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::classify::ChartWindow;
use crate::geometry::{lift, project_e, project_m};
use crate::model::LocalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    E,
    M,
}

impl Side {
    fn coordinate(self) -> char {
        match self {
            Side::E => 'x',
            Side::M => 'p',
        }
    }

    fn height(self) -> &'static str {
        match self {
            Side::E => "z",
            Side::M => "z_prime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub chart: Vec<f64>,
    /// `x` on the e-side, `p` on the m-side.
    pub coords: Vec<f64>,
    /// `z` on the e-side, `z′ = p·x − z` on the m-side.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshFile {
    pub side: Side,
    pub window: ChartWindow,
    /// One entry per window node, first axis slowest; `None` if dropped.
    pub samples: Vec<Option<Sample>>,
    /// Singular-set curves on the wavefront, each point `coords ++ [height]`.
    pub singular: Vec<Vec<Vec<f64>>>,
}

/// Shortest round-trip decimal.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Samples both wavefronts over `w`; `singular` holds chart points of the
/// singular set, chained into curves.
pub fn sample_wavefronts<M: LocalModel>(m: &M, w: &ChartWindow, singular: &[Vec<f64>]) -> (MeshFile, MeshFile) {
    let mut e = Vec::with_capacity(w.num_nodes());
    let mut mm = Vec::with_capacity(w.num_nodes());
    for flat in 0..w.num_nodes() {
        let q = w.point(&w.unflatten(flat));
        let lifted = lift(m, &q).ok().filter(|l| {
            l.z.is_finite() && l.x.iter().chain(&l.p).all(|v| v.is_finite())
        });
        match lifted {
            Some(l) => {
                let (x, z) = project_e(&l);
                let (p, zd) = project_m(&l);
                e.push(Some(Sample {
                    chart: q.clone(),
                    coords: x,
                    height: z,
                }));
                mm.push(Some(Sample {
                    chart: q,
                    coords: p,
                    height: zd,
                }));
            }
            None => {
                e.push(None);
                mm.push(None);
            }
        }
    }
    let spacing = (0..w.dim()).map(|a| w.spacing(a).powi(2)).sum::<f64>().sqrt();
    let chains = chain(singular, 2.0 * spacing);
    let curves = |side: Side| -> Vec<Vec<Vec<f64>>> {
        chains
            .iter()
            .map(|c| {
                c.iter()
                    .filter_map(|q| lift(m, q).ok())
                    .map(|l| {
                        let (mut v, h) = if side == Side::E { project_e(&l) } else { project_m(&l) };
                        v.push(h);
                        v
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|c| !c.is_empty())
            .collect()
    };
    (
        MeshFile {
            side: Side::E,
            window: w.clone(),
            samples: e,
            singular: curves(Side::E),
        },
        MeshFile {
            side: Side::M,
            window: w.clone(),
            samples: mm,
            singular: curves(Side::M),
        },
    )
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

/// Greedy nearest-neighbour chaining of points closer than `reach`.
fn chain(points: &[Vec<f64>], reach: f64) -> Vec<Vec<Vec<f64>>> {
    let mut used = vec![false; points.len()];
    let mut out = Vec::new();
    for start in 0..points.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = std::collections::VecDeque::from([start]);
        for forward in [true, false] {
            loop {
                let end = if forward { *line.back().unwrap() } else { *line.front().unwrap() };
                let next = (0..points.len())
                    .filter(|&k| !used[k])
                    .map(|k| (dist(&points[end], &points[k]), k))
                    .filter(|(d, _)| *d <= reach)
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                let Some((_, k)) = next else { break };
                used[k] = true;
                if forward {
                    line.push_back(k);
                } else {
                    line.push_front(k);
                }
            }
        }
        out.push(line.into_iter().map(|k| points[k].clone()).collect());
    }
    out
}

impl MeshFile {
    pub fn vertex_count(&self) -> usize {
        self.samples.iter().flatten().count()
    }

    pub fn dropped(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }

    /// 0-based indices into the kept vertices, in node order.
    fn kept_index(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.samples
            .iter()
            .map(|s| {
                s.as_ref().map(|_| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// Triangles for `n = 2` (each grid quad split along its diagonal), or
    /// segments for `n = 1`, as 0-based kept-vertex indices.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let idx = self.kept_index();
        let res = self.window.resolution;
        match self.window.dim() {
            1 => (0..res - 1)
                .filter_map(|i| Some(vec![idx[i]?, idx[i + 1]?]))
                .collect(),
            2 => {
                let mut out = Vec::new();
                for i in 0..res - 1 {
                    for j in 0..res - 1 {
                        let [a, b, c, d] = [i * res + j, (i + 1) * res + j, (i + 1) * res + j + 1, i * res + j + 1];
                        for tri in [[a, b, c], [a, c, d]] {
                            if let (Some(u), Some(v), Some(w)) = (idx[tri[0]], idx[tri[1]], idx[tri[2]]) {
                                out.push(vec![u, v, w]);
                            }
                        }
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    fn position(&self, coords: &[f64], height: f64) -> [f64; 3] {
        match coords.len() {
            1 => [coords[0], height, 0.0],
            _ => [coords[0], coords[1], height],
        }
    }

    /// OBJ text, or `None` when `n > 2` has no surface embedding.
    pub fn to_obj(&self) -> Option<String> {
        let n = self.window.dim();
        if n > 2 {
            return None;
        }
        let c = self.side.coordinate();
        let mut s = String::new();
        let _ = writeln!(s, "# {}-wavefront over a {}-dimensional chart grid", if self.side == Side::E { 'e' } else { 'm' }, n);
        let layout = if n == 1 {
            format!("{c}1 {} 0", self.side.height())
        } else {
            format!("{c}1 {c}2 {}", self.side.height())
        };
        let _ = writeln!(s, "# v: {layout}");
        let _ = writeln!(s, "# vertices {} dropped {}", self.vertex_count(), self.dropped());
        for sample in self.samples.iter().flatten() {
            let [a, b, h] = self.position(&sample.coords, sample.height);
            let _ = writeln!(s, "v {} {} {}", num(a), num(b), num(h));
        }
        let tag = if n == 1 { 'l' } else { 'f' };
        for f in self.faces() {
            let ids: Vec<String> = f.iter().map(|k| (k + 1).to_string()).collect();
            let _ = writeln!(s, "{tag} {}", ids.join(" "));
        }
        let mut next = self.vertex_count();
        if !self.singular.is_empty() {
            let _ = writeln!(s, "g singular");
        }
        for curve in &self.singular {
            for v in curve {
                let [a, b, h] = self.position(&v[..n], v[n]);
                let _ = writeln!(s, "v {} {} {}", num(a), num(b), num(h));
            }
            let ids: Vec<String> = (next + 1..=next + curve.len()).map(|k| k.to_string()).collect();
            let _ = writeln!(s, "{} {}", if curve.len() == 1 { 'p' } else { 'l' }, ids.join(" "));
            next += curve.len();
        }
        Some(s)
    }

    /// CSV point cloud with a header row: `node, q1..qn, x1..xn | p1..pn,
    /// z | z_prime`.
    pub fn to_csv(&self) -> String {
        let n = self.window.dim();
        let c = self.side.coordinate();
        let mut header = vec!["node".to_string()];
        header.extend((1..=n).map(|k| format!("q{k}")));
        header.extend((1..=n).map(|k| format!("{c}{k}")));
        header.push(self.side.height().into());
        let mut s = header.join(",");
        s.push('\n');
        for (node, sample) in self.samples.iter().enumerate() {
            let Some(sample) = sample else { continue };
            let mut row = vec![node.to_string()];
            row.extend(sample.chart.iter().chain(&sample.coords).map(|v| num(*v)));
            row.push(num(sample.height));
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::find_singular_set;
    use crate::gfexpr::GeneratingFunction;

    #[test]
    fn flat_planes_for_zero() {
        let g = GeneratingFunction::parse("0", 2, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 5).unwrap();
        let (e, m) = sample_wavefronts(&g, &w, &[]);
        assert!(e.samples.iter().flatten().all(|s| s.height == 0.0));
        assert!(m.samples.iter().flatten().all(|s| s.height == 0.0));
        assert_eq!(e.faces().len(), 2 * 4 * 4);
        let obj = e.to_obj().unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 25);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 32);
    }

    #[test]
    fn dropped_vertices_leave_holes() {
        let g = GeneratingFunction::parse("log(x1) - p2^2/2", 2, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 5).unwrap();
        let (e, _) = sample_wavefronts(&g, &w, &[]);
        assert_eq!(e.dropped(), 15);
        assert_eq!(e.vertex_count(), 10);
        let faces = e.faces();
        assert_eq!(faces.len(), 2 * 4);
        assert!(faces.iter().flatten().all(|&k| k < 10));
        assert_eq!(e.to_csv().lines().count(), 11);
    }

    #[test]
    fn a2_fold_and_smooth_graph() {
        let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 21).unwrap();
        let sing = find_singular_set(&g, &w, 1e-10);
        let (e, m) = sample_wavefronts(&g, &w, &sing);
        assert_eq!(m.singular.len(), 1);
        assert_eq!(m.singular[0].len(), 21);
        assert!(m.singular[0].iter().all(|v| v[0].abs() < 1e-12));
        // m-side: two sheets over p1 > 0; e-side: a graph over x
        let mut xs: Vec<(i64, i64)> = e
            .samples
            .iter()
            .flatten()
            .map(|s| ((s.coords[0] * 1e9).round() as i64, (s.coords[1] * 1e9).round() as i64))
            .collect();
        xs.sort();
        xs.dedup();
        assert_eq!(xs.len(), 441);
        assert!(m.samples.iter().flatten().all(|s| s.coords[0] >= 0.0));
        let obj = m.to_obj().unwrap();
        assert!(obj.contains("\nl "));
    }

    #[test]
    fn one_dimensional_polyline() {
        let g = GeneratingFunction::parse("x1^3/3", 1, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0], 1.0, 11).unwrap();
        let sing = find_singular_set(&g, &w, 1e-10);
        let (_, m) = sample_wavefronts(&g, &w, &sing);
        let obj = m.to_obj().unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("l ")).count(), 10);
        assert!(obj.lines().any(|l| l.starts_with("p ")));
    }
}
