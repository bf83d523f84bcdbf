//! The two reference datasets.

use crate::document::InputDocument;
use crate::mesh::ScatterPoint;

/// Regular triangular pyramid seen from above: the base triangle at height 0
/// and its centre pushed down to -1/2.
pub fn pyramid() -> InputDocument {
    let s = 3f64.sqrt();
    InputDocument {
        points: vec![
            ScatterPoint::new(-0.5, -s / 6.0, 0.0),
            ScatterPoint::new(0.5, -s / 6.0, 0.0),
            ScatterPoint::new(0.0, s / 3.0, 0.0),
            ScatterPoint::new(0.0, 0.0, -0.5),
        ],
        triangles: vec![[1, 2, 4], [2, 3, 4], [3, 1, 4]],
    }
}

/// Seven points: five on the x-axis, one above and one below.
///
/// The triangles are the eight 3-cliques of the edge set
/// {17, 12, 16, 27, 23, 26, 37, 34, 36, 45, 46, 47, 56, 57}.
pub fn seven_point() -> InputDocument {
    InputDocument {
        points: vec![
            ScatterPoint::new(-2.0, 0.0, 0.0),
            ScatterPoint::new(-1.6, 0.0, -2.0),
            ScatterPoint::new(0.0, 0.0, -3.0),
            ScatterPoint::new(1.6, 0.0, -2.5),
            ScatterPoint::new(2.0, 0.0, 0.0),
            ScatterPoint::new(-0.5, 2.3, -1.7),
            ScatterPoint::new(0.5, -2.0, -1.9),
        ],
        triangles: vec![
            [1, 2, 6],
            [2, 3, 6],
            [3, 4, 6],
            [4, 5, 6],
            [1, 2, 7],
            [2, 3, 7],
            [3, 4, 7],
            [4, 5, 7],
        ],
    }
}

pub const NAMES: [&str; 2] = ["pyramid", "seven-point"];

pub fn by_name(name: &str) -> Option<InputDocument> {
    match name {
        "pyramid" => Some(pyramid()),
        "seven-point" => Some(seven_point()),
        _ => None,
    }
}
