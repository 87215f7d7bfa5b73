//! Order-insensitive parallel scans.
//!
//! Every reduction combines `(key, position)` pairs with a total order where a
//! larger key wins and equal keys go to the smaller position. That combine is
//! associative and commutative, so any rayon split yields the same answer as a
//! left-to-right sequential scan.

use rayon::prelude::*;

/// Below this many positions a scan stays on the calling thread.
pub(crate) const PAR_THRESHOLD: usize = 8192;
/// Minimum positions handled per rayon task.
pub(crate) const CHUNK: usize = 2048;

#[inline]
pub(crate) fn max_pair(a: (f32, usize), b: (f32, usize)) -> (f32, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

const EMPTY: (f32, usize) = (f32::NEG_INFINITY, usize::MAX);

/// Largest `key(pos)` over `0..len` and the earliest position attaining it.
pub(crate) fn argmax<F>(len: usize, key: F) -> (f32, usize)
where
    F: Fn(usize) -> f32 + Sync,
{
    if len < PAR_THRESHOLD {
        (0..len).map(|p| (key(p), p)).fold(EMPTY, max_pair)
    } else {
        (0..len)
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|p| (key(p), p))
            .reduce(|| EMPTY, max_pair)
    }
}

pub(crate) fn map_positions<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if len < PAR_THRESHOLD {
        (0..len).map(f).collect()
    } else {
        (0..len)
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(f)
            .collect()
    }
}

/// Applies `update` to every slot, then returns the argmax over the updated
/// values. Used by the farthest-first step, which lowers each distance and
/// picks the new farthest point in one pass.
pub(crate) fn update_argmax<F>(values: &mut [f32], update: F) -> (f32, usize)
where
    F: Fn(usize, &mut f32) + Sync,
{
    let fold_chunk = |(offset, chunk): (usize, &mut [f32])| {
        let mut best = EMPTY;
        for (i, v) in chunk.iter_mut().enumerate() {
            let pos = offset + i;
            update(pos, v);
            best = max_pair(best, (*v, pos));
        }
        best
    };
    if values.len() < PAR_THRESHOLD {
        fold_chunk((0, values))
    } else {
        values
            .par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(c, chunk)| fold_chunk((c * CHUNK, chunk)))
            .reduce(|| EMPTY, max_pair)
    }
}
