/// Splits a token sequence into consecutive chunks of at most `max_words`.
///
/// An empty input yields no chunks. `max_words` of zero is treated as one.
pub fn chunk<T: Clone>(tokens: &[T], max_words: usize) -> Vec<Vec<T>> {
    tokens.chunks(max_words.max(1)).map(<[T]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chunk_sizes() {
        let t: Vec<u32> = (0..499).collect();
        assert_eq!(chunk(&t, 500).len(), 1);
        let t: Vec<u32> = (0..1001).collect();
        let sizes: Vec<usize> = chunk(&t, 500).iter().map(Vec::len).collect();
        assert_eq!(sizes, [500, 500, 1]);
    }

    proptest! {
        #[test]
        fn chunking_is_a_partition(len in 0usize..2000, max in 1usize..600) {
            let t: Vec<usize> = (0..len).collect();
            let parts = chunk(&t, max);
            let joined: Vec<usize> = parts.concat();
            prop_assert_eq!(joined, t);
            if let Some((_, init)) = parts.split_last() {
                prop_assert!(init.iter().all(|c| c.len() == max));
            }
        }
    }
}
