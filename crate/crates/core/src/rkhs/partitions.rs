//! Exhaustive enumeration of set partitions by restricted growth strings.

/// Largest atom count accepted by the exhaustive enumerator (Bell(12) ≈ 4.2M).
pub const MAX_ENUMERATED_ATOMS: usize = 12;

/// Calls `visit` with the blocks (as bit masks over `0..n`) of every
/// partition of `{0, …, n-1}`. Blocks are ordered by their smallest element.
pub fn for_each_partition(n: usize, mut visit: impl FnMut(&[u64])) {
    assert!(n <= 64, "mask enumeration supports at most 64 atoms");
    if n == 0 {
        visit(&[]);
        return;
    }
    // labels[i] = block of atom i; labels[i] ≤ 1 + max(labels[..i]).
    let mut labels = vec![0usize; n];
    let mut blocks: Vec<u64> = Vec::with_capacity(n);
    loop {
        blocks.clear();
        for (i, &b) in labels.iter().enumerate() {
            if b == blocks.len() {
                blocks.push(0);
            }
            blocks[b] |= 1 << i;
        }
        visit(&blocks);

        // Next restricted growth string, incrementing from the right.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let max_prefix = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= max_prefix {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}
