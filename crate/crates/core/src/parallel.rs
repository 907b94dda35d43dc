//! Indirection over rayon so internal hot loops are written once against the
//! `par_iter` surface. With the `parallel` feature disabled the same names
//! resolve to thin shims over the standard sequential iterators, so every
//! algorithm compiles and produces identical results either way.

#[cfg(feature = "parallel")]
pub use rayon::prelude::{
    IndexedParallelIterator, IntoParallelIterator, IntoParallelRefIterator,
    IntoParallelRefMutIterator, ParallelIterator,
};

/// Cap rayon's global pool. A no-op (with a warning for n > 1) when built
/// without the `parallel` feature. Calling more than once keeps the first
/// configuration; rayon forbids re-initialization.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n == 0 {
        return; // 0 = library default (all cores)
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(n: usize) {
    if n > 1 {
        log::warn!("built without the `parallel` feature; --threads {n} ignored");
    }
}

#[cfg(not(feature = "parallel"))]
mod fallback {
    //! Sequential stand-ins exposing the rayon method names used in this crate.

    pub trait IntoParallelIterator: IntoIterator + Sized {
        fn into_par_iter(self) -> Self::IntoIter {
            self.into_iter()
        }
    }
    impl<I: IntoIterator + Sized> IntoParallelIterator for I {}

    pub trait IntoParallelRefIterator<'a> {
        type Iter: Iterator;
        fn par_iter(&'a self) -> Self::Iter;
    }
    impl<'a, S: ?Sized + 'a> IntoParallelRefIterator<'a> for S
    where
        &'a S: IntoIterator,
    {
        type Iter = <&'a S as IntoIterator>::IntoIter;
        fn par_iter(&'a self) -> Self::Iter {
            self.into_iter()
        }
    }

    pub trait IntoParallelRefMutIterator<'a> {
        type Iter: Iterator;
        fn par_iter_mut(&'a mut self) -> Self::Iter;
    }
    impl<'a, S: ?Sized + 'a> IntoParallelRefMutIterator<'a> for S
    where
        &'a mut S: IntoIterator,
    {
        type Iter = <&'a mut S as IntoIterator>::IntoIter;
        fn par_iter_mut(&'a mut self) -> Self::Iter {
            self.into_iter()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub use fallback::{IntoParallelIterator, IntoParallelRefIterator, IntoParallelRefMutIterator};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_iter_preserves_order() {
        let v: Vec<u32> = (0..1000).collect();
        let doubled: Vec<u32> = v.par_iter().map(|x| x * 2).collect();
        assert_eq!(doubled, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn into_par_iter_preserves_order() {
        let v: Vec<u32> = (0..100).collect();
        let out: Vec<u32> = v.into_par_iter().map(|x| x + 1).collect();
        assert_eq!(out, (1..101).collect::<Vec<_>>());
    }
}
