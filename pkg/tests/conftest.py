import re

import numpy as np
import pytest

from risplace.channel import RfParams, sample_channels
from risplace.geom import Point2

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m:
                word = "PASS" if status == "passed" else "FAIL"
                lines[int(m.group(1))] = (word, m.group(2).replace("_", " "))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            word, desc = lines[num]
            terminalreporter.write_line(f"criterion {num:2d} [{word}] {desc}")


def make_rf(m=4, n=8, **kw) -> RfParams:
    args = dict(
        f_c=2.4,
        bandwidth=1e7,
        noise_figure=5.0,
        p_max_dbm=0.0,
        t1_db=10.0,
        t2_db=10.0,
        m_antennas=m,
        n_elements=n,
    )
    args.update(kw)
    return RfParams(**args)


def random_instance(seed, m=4, n=8, k=3, obstacles=()):
    """A seeded channel draw with users scattered east of the BS."""
    rf = make_rf(m=m, n=n)
    rng = np.random.default_rng(seed)
    bs = Point2(0.0, 0.0)
    ris = Point2(12.0, 8.0)
    users = [Point2(6 + 12 * rng.random(), -8 + 16 * rng.random()) for _ in range(k)]
    cs = sample_channels(rf, bs, ris, users, list(obstacles), seed)
    return rf, cs


@pytest.fixture
def rf_small():
    return make_rf()
