import functools

import numpy as np
import pytest

from subspectra.eigensolver import ground_state
from subspectra.fcidump import load_fixture
from subspectra.fock import ExcitationOperator, apply_excitation, build_hamiltonian, enumerate_sector


@functools.lru_cache(maxsize=None)
def system(name, op=None):
    """(table, sector, H, e0, psi0, psi_A, a_norm2) for a vendored fixture."""
    table = load_fixture(name)
    sec = enumerate_sector(table.norb, table.n_up, table.n_down)
    H = build_hamiltonian(table, sec.dets)
    e0, psi0 = ground_state(H, sec)
    psi_A = a_norm2 = None
    if op is not None:
        psi_A, a_norm2 = apply_excitation(ExcitationOperator.parse(op), psi0)
    return table, sec, H, e0, psi0, psi_A, a_norm2


@pytest.fixture
def h2():
    return system("h2_sto3g", "+1 -0")


@pytest.fixture
def hcl():
    return system("hcl_sto6g", "+9 -7")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
