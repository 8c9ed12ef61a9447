//! Labelled 3D point clouds.

/// Semantic class of a cloud point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    FreeSpace,
    PassableObstacle,
    UnpassableObstacle,
}

impl Label {
    pub fn code(self) -> u8 {
        match self {
            Label::FreeSpace => 0,
            Label::PassableObstacle => 1,
            Label::UnpassableObstacle => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Label> {
        match code {
            0 => Some(Label::FreeSpace),
            1 => Some(Label::PassableObstacle),
            2 => Some(Label::UnpassableObstacle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelledPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub label: Label,
    /// Groups the points of a single stone; free space carries none.
    pub instance_id: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelledPointCloud {
    pub points: Vec<LabelledPoint>,
}

impl LabelledPointCloud {
    pub fn new() -> Self {
        Self { points: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: LabelledPoint) {
        self.points.push(point);
    }

    pub fn extend_from(&mut self, other: &LabelledPointCloud) {
        self.points.extend_from_slice(&other.points);
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabelledPoint> {
        self.points.iter()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.points.iter().filter(|p| p.label == label).count()
    }

    /// Distinct instance ids present for one label class.
    pub fn instance_count(&self, label: Label) -> usize {
        let mut ids: Vec<u32> = self
            .points
            .iter()
            .filter(|p| p.label == label)
            .filter_map(|p| p.instance_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

impl FromIterator<LabelledPoint> for LabelledPointCloud {
    fn from_iter<T: IntoIterator<Item = LabelledPoint>>(iter: T) -> Self {
        Self {
            points: iter.into_iter().collect(),
        }
    }
}
