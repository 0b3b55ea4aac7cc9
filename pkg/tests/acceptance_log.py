"""Collects one verdict line per acceptance criterion for the terminal summary."""

from contextlib import contextmanager

LINES = []


@contextmanager
def criterion(number, title):
    """Record PASS if the block finishes, FAIL (and re-raise) otherwise.

    The block may fill the yielded dict with a short ``detail`` string.
    """
    info = {"detail": ""}
    try:
        yield info
    except BaseException:
        LINES.append(f"criterion {number}: FAIL  {title}  {info['detail']}".rstrip())
        raise
    LINES.append(f"criterion {number}: PASS  {title}  {info['detail']}".rstrip())
