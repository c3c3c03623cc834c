//! Static row-band partitioning of a phase.
//!
//! Interior rows `1..=n` of the output buffer are cut into contiguous bands of
//! `ceil(n / threads)` rows. Each band is handed to `f(first_row, band)`, where
//! `band` starts at the first column of `first_row`. Without the `parallel`
//! feature the bands run one after another on the calling thread.

use crate::error::Result;

pub(crate) struct BandRunner {
    threads: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl BandRunner {
    pub(crate) fn new(threads: usize) -> Result<BandRunner> {
        #[cfg(feature = "parallel")]
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .thread_name(|i| format!("bml-band-{i}"))
                    .build()
                    .map_err(|e| crate::error::Error::Config(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(BandRunner {
            threads,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub(crate) fn run<F>(&self, next: &mut [u8], n: usize, f: F)
    where
        F: Fn(usize, &mut [u8]) + Sync,
    {
        let stride = n + 2;
        let interior = &mut next[stride..stride * (n + 1)];
        if self.threads == 1 {
            f(1, interior);
            return;
        }
        let rows_per_band = n.div_ceil(self.threads);
        let chunk = rows_per_band * stride;

        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            pool.install(|| {
                interior
                    .par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(b, band)| f(1 + b * rows_per_band, band));
            });
            return;
        }

        for (b, band) in interior.chunks_mut(chunk).enumerate() {
            f(1 + b * rows_per_band, band);
        }
    }
}
