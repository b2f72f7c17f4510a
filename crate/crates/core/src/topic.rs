use core::fmt;

/// Dense integer handle for a topic phrase.
///
/// Ids are assigned contiguously from 0 in lexicon insertion order, so they
/// double as row indices into frequency tables and embedding matrices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TopicId(pub u32);

impl TopicId {
    /// The id as a row/array index.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for TopicId {
    fn from(raw: u32) -> Self {
        TopicId(raw)
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
