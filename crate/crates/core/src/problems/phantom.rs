use super::tv::ImageDims;

enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { x0, x1, y0, y1 } => (x0..=x1).contains(&x) && (y0..=y1).contains(&y),
        }
    }
}

/// Piecewise-constant test image in `[0, 1]`: a bright disk holding a darker
/// disk, a rectangle and a small spot. Later shapes paint over earlier ones.
pub fn phantom(dims: ImageDims) -> Vec<f64> {
    let shapes = [
        (Shape::Disk { cx: 0.0, cy: 0.0, r: 0.85 }, 0.6),
        (Shape::Disk { cx: -0.3, cy: -0.2, r: 0.3 }, 0.2),
        (Shape::Rect { x0: 0.1, x1: 0.55, y0: 0.05, y1: 0.5 }, 1.0),
        (Shape::Disk { cx: 0.3, cy: -0.45, r: 0.15 }, 0.85),
    ];
    let ImageDims { height: h, width: w } = dims;
    let mut u = vec![0.0; h * w];
    for r in 0..h {
        let y = 2.0 * (r as f64 + 0.5) / h as f64 - 1.0;
        for c in 0..w {
            let x = 2.0 * (c as f64 + 0.5) / w as f64 - 1.0;
            for (shape, value) in &shapes {
                if shape.contains(x, y) {
                    u[r * w + c] = *value;
                }
            }
        }
    }
    u
}
