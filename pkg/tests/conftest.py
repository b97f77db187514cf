import os
import sys

import hypothesis
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from isovne.topology import SubstrateNetwork, VirtualLink, VirtualNetworkRequest, VirtualNode  # noqa: E402

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_vnr(cpus, links=(), isr=None, vnr_id=0, arrival=0.0, lifetime=10.0):
    """VNR from a CPU list and (a, b, bw) link triples."""
    isr = isr or [1] * len(cpus)
    return VirtualNetworkRequest(
        vnr_id,
        tuple(VirtualNode(i, c, r) for i, (c, r) in enumerate(zip(cpus, isr))),
        tuple(VirtualLink((a, b), bw) for a, b, bw in links),
        arrival,
        lifetime,
    )


def path_graph(n, cpu=50, bw=50, isa=3):
    return SubstrateNetwork([cpu] * n, [isa] * n, [(i, i + 1) for i in range(n - 1)], [bw] * (n - 1))


@pytest.fixture
def square():
    # 0-1-2-3-0 ring plus chord 0-2; link ids follow the list order
    return SubstrateNetwork(
        [50, 60, 70, 80],
        [1, 2, 3, 3],
        [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
        [30, 40, 50, 60, 20],
    )
