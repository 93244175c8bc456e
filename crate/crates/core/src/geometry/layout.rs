use std::collections::BTreeMap;

use super::{GeometryError, Polygon};

/// Process-level design: per-layer multisets of normalized polygons.
///
/// Shapes are kept normalized and sorted, so two layouts holding the same
/// per-layer multisets compare equal with `==`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub cell_name: String,
    shapes: BTreeMap<String, Vec<Polygon>>,
}

impl Default for Layout {
    fn default() -> Self {
        Self::new("1")
    }
}

impl Layout {
    pub fn new(cell_name: &str) -> Self {
        Self {
            cell_name: cell_name.to_string(),
            shapes: BTreeMap::new(),
        }
    }

    /// Normalizes `polygon` and inserts it at its sorted position.
    pub fn add(&mut self, layer: &str, polygon: &Polygon) -> Result<(), GeometryError> {
        if layer.is_empty() {
            return Err(GeometryError::EmptyLayerName);
        }
        let p = polygon.normalize()?;
        let list = self.shapes.entry(layer.to_string()).or_default();
        let at = list.partition_point(|q| *q <= p);
        list.insert(at, p);
        Ok(())
    }

    pub fn layers(&self) -> impl Iterator<Item = &str> {
        self.shapes.keys().map(String::as_str)
    }

    pub fn layer(&self, name: &str) -> &[Polygon] {
        self.shapes.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `(layer, polygon)` pairs in canonical scan order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Polygon)> {
        self.shapes
            .iter()
            .flat_map(|(l, ps)| ps.iter().map(move |p| (l.as_str(), p)))
    }

    pub fn shape_count(&self) -> usize {
        self.shapes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.shape_count() == 0
    }

    /// Per-layer multiset equality, ignoring the cell name.
    pub fn same_shapes(&self, other: &Layout) -> bool {
        self.shapes == other.shapes
    }
}
