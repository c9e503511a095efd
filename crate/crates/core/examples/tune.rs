use stackres::analysis::charts::slanted_edge;
use stackres::analysis::mtf::mtf_slanted_edge;
use stackres::ImagePlane;

fn main() {
    let n = 160;
    let img = slanted_edge(n, n, 5.0, 0.1, 0.9, 1.2);
    let first = mtf_slanted_edge(&img, 5.0, 16, 1.0).unwrap();

    let mut rebuilt = ImagePlane::zeros(n, n);
    let cos_t = 1.0 / (1.0 + first.edge_slope * first.edge_slope).sqrt();
    for y in 0..n {
        for x in 0..n {
            let t = (x as f64 - (first.edge_slope * y as f64 + first.edge_intercept)) * cos_t;
            rebuilt.set(x, y, first.esf_at(t));
        }
    }
    let second = mtf_slanted_edge(&rebuilt, 5.0, 16, 1.0).unwrap();
    println!("slope1 {:.8} slope2 {:.8}", first.edge_slope, second.edge_slope);
    println!("icept1 {:.6} icept2 {:.6}", first.edge_intercept, second.edge_intercept);
    println!("t0_1 {:.6} t0_2 {:.6}", first.esf_t0, second.esf_t0);
    println!("esf bins: {} vs {}", first.esf.len(), second.esf.len());
    // ESF difference on a common t grid
    let mut max_dev = 0.0f64;
    let mut at_t = 0.0;
    for i in 0..2000 {
        let t = -8.0 + i as f64 * 16.0 / 2000.0;
        let d = (first.esf_at(t) - second.esf_at(t)).abs();
        if d > max_dev { max_dev = d; at_t = t; }
    }
    println!("max esf dev {:.6e} at t {:.3}", max_dev, at_t);
    // spectra near f=0.313
    for (f, m) in first.frequencies.iter().zip(&first.magnitudes) {
        if (*f - 0.313).abs() < 0.02 {
            println!("f {:.4}: first {:.6} second {:.6}", f, m, second.at(*f));
        }
    }
}
