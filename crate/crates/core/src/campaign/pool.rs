use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use super::CampaignError;

/// Runs `work` over `items` on `workers` threads, each with its own session,
/// and hands results to `commit` strictly in item order.
///
/// A commit error stops dispatch and is returned once all workers exit.
pub(crate) fn ordered_pool<T, S, R>(
    items: &[T],
    workers: usize,
    make_session: &(dyn Fn() -> S + Sync),
    work: &(dyn Fn(&mut S, &T) -> R + Sync),
    commit: &mut dyn FnMut(usize, R) -> Result<(), CampaignError>,
) -> Result<(), CampaignError>
where
    T: Sync,
    R: Send,
{
    if items.is_empty() {
        return Ok(());
    }
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, R)>();
    thread::scope(|scope| {
        for _ in 0..workers.clamp(1, items.len()) {
            let tx = tx.clone();
            let (next, stop) = (&next, &stop);
            scope.spawn(move || {
                let mut session = make_session();
                while !stop.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    if tx.send((i, work(&mut session, &items[i]))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut expect = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&expect) {
                if let Err(e) = commit(expect, r) {
                    stop.store(true, Ordering::Relaxed);
                    return Err(e);
                }
                expect += 1;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commits_in_order_regardless_of_workers() {
        let items: Vec<u64> = (0..200).collect();
        for workers in [1, 3, 8] {
            let mut seen = Vec::new();
            ordered_pool(
                &items,
                workers,
                &|| 0u64,
                &|calls, x| {
                    *calls += 1;
                    std::thread::sleep(std::time::Duration::from_micros((x * 7919) % 300));
                    x * 2
                },
                &mut |i, r| {
                    assert_eq!(r, items[i] * 2);
                    seen.push(i);
                    Ok(())
                },
            )
            .unwrap();
            assert_eq!(seen, (0..200).collect::<Vec<_>>());
        }
    }

    #[test]
    fn commit_error_stops() {
        let items: Vec<u32> = (0..1000).collect();
        let mut n = 0;
        let r = ordered_pool(&items, 4, &|| (), &|_, x| *x, &mut |i, _| {
            n += 1;
            if i == 10 {
                Err(CampaignError::Config("stop".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
        assert_eq!(n, 11);
    }
}
