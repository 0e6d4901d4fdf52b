use alloc::vec::Vec;

/// Bijection between external ids and dense 0-based internal indices.
///
/// Internal indices follow ascending external id, so index order and id order
/// agree and every tie-break "by ascending id" can be done on indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    ids: Vec<u64>,
}

impl IdMap {
    pub fn from_unsorted(mut ids: Vec<u64>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        IdMap { ids }
    }

    /// `ids` must be strictly ascending.
    pub fn from_sorted(ids: Vec<u64>) -> Option<Self> {
        if ids.windows(2).all(|w| w[0] < w[1]) {
            Some(IdMap { ids })
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn id_of(&self, index: usize) -> u64 {
        self.ids[index]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Keep the entries whose flag is set. Returns the new map and, for each
    /// old index, its new index if retained.
    pub fn retain(&self, keep: &[bool]) -> (IdMap, Vec<Option<usize>>) {
        let mut ids = Vec::new();
        let mut remap = Vec::with_capacity(self.ids.len());
        for (&id, &k) in self.ids.iter().zip(keep) {
            if k {
                remap.push(Some(ids.len()));
                ids.push(id);
            } else {
                remap.push(None);
            }
        }
        (IdMap { ids }, remap)
    }
}
