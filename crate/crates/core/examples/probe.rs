use farpoint::*;
use farpoint::antipode::*;
use farpoint::mesh::*;
use std::time::Instant;

fn main() {
    let cube = fixtures::cube();
    let src = SurfacePoint::at_vertex(&cube, VertexId(0));
    let t = Instant::now();
    let res = antipodes(&cube, &src).unwrap();
    println!("cube vertex antipode: radius={:.12} (sqrt5={:.12}) in {:?}", res.radius, 5f64.sqrt(), t.elapsed());
    for a in &res.antipodes {
        println!("  at {:?} dist {:.12} kind {:?} segs {}", cube.position(&a.point), a.distance, match &a.kind { AntipodeKind::Vertex(v) => format!("V{}", v.0), _ => "CC".into() }, a.segments.len());
    }
    let tetra = fixtures::regular_tetrahedron(1.0);
    let src = SurfacePoint::at_vertex(&tetra, VertexId(0));
    let res = antipodes(&tetra, &src).unwrap();
    println!("tetra vertex: radius={:.12}", res.radius);
    for a in &res.antipodes {
        println!("  at {:?} dist {:.12} segs {}", tetra.position(&a.point), a.distance, a.segments.len());
    }
    // generic point timing
    let src = tetra.surface_point(FaceId(0), vec![0.5, 0.3, 0.2]).unwrap();
    let t = Instant::now();
    let n = 50;
    for _ in 0..n { let _ = antipodes(&tetra, &src).unwrap(); }
    println!("tetra antipode call: {:?}/call", t.elapsed() / n);
    let ico = fixtures::random_convex_12(42);
    let src = ico.surface_point(FaceId(0), vec![0.5, 0.3, 0.2]).unwrap();
    let t = Instant::now();
    for _ in 0..10 { let _ = antipodes(&ico, &src).unwrap(); }
    println!("ico antipode call: {:?}/call", t.elapsed() / 10);
    let src = cube.surface_point(FaceId(0), vec![0.31, 0.29, 0.22, 0.18]).unwrap();
    let t = Instant::now();
    for _ in 0..10 { let _ = antipodes(&cube, &src).unwrap(); }
    println!("cube antipode call: {:?}/call", t.elapsed() / 10);
}
