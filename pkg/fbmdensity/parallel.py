import logging
import multiprocessing

logger = logging.getLogger(__name__)


def pool_map(function, items, threads=1):
    """Map ``function`` over ``items`` keeping the input order.

    Parameters
    ----------
        function : callable
            Picklable (module level, or a functools.partial of one).
        items : iterable
            Work units.
        threads : int
            Worker processes; values <= 1 map in the calling process.

    Returns
    -------
    list
        One result per item, in input order.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    processes = min(int(threads), multiprocessing.cpu_count(), len(items))
    logger.debug('mapping %d items over %d processes', len(items), processes)
    pool = multiprocessing.Pool(processes=processes)
    try:
        result = list(pool.imap(function, items))
    finally:
        pool.close()
        pool.join()
    return result
