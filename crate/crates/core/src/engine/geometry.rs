use crate::model::Shape;

/// Boundary-inclusive point-in-shape test in design coordinates.
pub fn hit_test(shape: Shape, center: (f64, f64), size: (f64, f64), p: (f64, f64)) -> bool {
    let dx = p.0 - center.0;
    let dy = p.1 - center.1;
    match shape {
        Shape::Rectangle => dx.abs() <= size.0 / 2.0 && dy.abs() <= size.1 / 2.0,
        Shape::Ellipse => {
            if size.0 <= 0.0 || size.1 <= 0.0 {
                return false;
            }
            let u = 2.0 * dx / size.0;
            let v = 2.0 * dy / size.1;
            u * u + v * v <= 1.0
        }
        Shape::Circle => {
            let r = size.0.min(size.1) / 2.0;
            dx * dx + dy * dy <= r * r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_grid_matches_inequality() {
        for x in 150..=450 {
            for y in (50..=350).step_by(7) {
                let inside = (x - 300i32).abs() <= 100 && (y - 200i32).abs() <= 100;
                assert_eq!(hit_test(Shape::Rectangle, (300.0, 200.0), (200.0, 200.0), (x as f64, y as f64)), inside);
            }
        }
        assert!(hit_test(Shape::Rectangle, (300.0, 200.0), (200.0, 200.0), (400.0, 200.0)));
        assert!(!hit_test(Shape::Rectangle, (300.0, 200.0), (200.0, 200.0), (401.0, 200.0)));
    }

    #[test]
    fn ellipse_and_circle() {
        assert!(hit_test(Shape::Ellipse, (0.0, 0.0), (200.0, 100.0), (99.0, 0.0)));
        assert!(!hit_test(Shape::Ellipse, (0.0, 0.0), (200.0, 100.0), (0.0, 51.0)));
        assert!(hit_test(Shape::Circle, (0.0, 0.0), (200.0, 100.0), (0.0, 50.0)));
        assert!(!hit_test(Shape::Circle, (0.0, 0.0), (200.0, 100.0), (60.0, 0.0)));
    }
}
