import logging
from concurrent.futures import ThreadPoolExecutor, ProcessPoolExecutor
from daeParareal.base import normalizers
from daeParareal.base.base import BaseObject, dynamicProperty

logger = logging.getLogger(__name__)


class WorkerPool(BaseObject):

    """
    A pool of workers for independent tasks such as the fine
    sweep of Parareal.

        >>> with WorkerPool(workers=4) as pool:
        ...     results = pool.map(function, items)

    **method** is ``"serial"``, ``"thread"`` or ``"process"``.
    With one worker, or with ``"serial"``, tasks run in the
    calling thread. Results always come back in item order, so
    the result of item ``j`` is the same for every worker count.
    Process pools need picklable functions and items.
    """

    def _init(self, workers=1, method="thread"):
        self._workers = normalizers.normalizeCount(workers, "Workers", minimum=1)
        self._method = normalizers.normalizePoolMethod(method)
        if self._workers == 1:
            self._method = "serial"
        self._executor = None

    def _reprContents(self):
        return ["method='%s'" % self.method, "workers=%d" % self.workers]

    workers = dynamicProperty("workers", "The number of workers.")

    def _get_workers(self):
        return self._workers

    method = dynamicProperty("method", "The pool method.")

    def _get_method(self):
        return self._method

    # ---------
    # Lifecycle
    # ---------

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, excType, excValue, traceback):
        self.shutdown()

    def start(self):
        if self._executor is not None or self._method == "serial":
            return
        if self._method == "thread":
            self._executor = ThreadPoolExecutor(max_workers=self._workers)
        else:
            self._executor = ProcessPoolExecutor(max_workers=self._workers)
        logger.debug("Started a %s pool of %d workers.", self._method, self._workers)

    def shutdown(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    # ---
    # Map
    # ---

    def map(self, function, *iterables):
        """
        Apply **function** to the items of **iterables** and
        return the results as a ``list`` in item order. The first
        exception raised by a task is raised again here.
        """
        if self._method == "serial":
            return [function(*args) for args in zip(*iterables)]
        self.start()
        return list(self._executor.map(function, *iterables))
