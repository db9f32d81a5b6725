"""Search budgets.

All exhaustive searches run under an explicit cap on visited candidates and
fail loudly with SizeCapExceeded instead of truncating silently.  The default
can be overridden per call, by CLI flags, or by OMEGAKIT_MAX_SEARCH (flags
win over the environment).
"""

import os

from .errors import SizeCapExceeded

DEFAULT_MAX_SEARCH = 10**6
DEFAULT_DEPTH = 3


def env_max_search():
    raw = os.environ.get("OMEGAKIT_MAX_SEARCH")
    if raw is None:
        return DEFAULT_MAX_SEARCH
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_MAX_SEARCH


class Budget:
    """Counts candidate assignments visited by a search."""

    def __init__(self, cap=None, what="search"):
        self.cap = env_max_search() if cap is None else cap
        self.what = what
        self.used = 0

    def spend(self, n=1):
        self.used += n
        if self.used > self.cap:
            raise SizeCapExceeded(
                f"{self.what}: visited {self.used} candidates, cap is {self.cap}"
            )

    def check_size(self, n):
        """Fail before materializing n candidates if n is over the cap."""
        if n > self.cap:
            raise SizeCapExceeded(f"{self.what}: {n} candidates, cap is {self.cap}")
