import numpy as np
import pytest

import photonkin as pk

# collimated beam aimed at +z, the standard detector scenario
BEAM_SPEC = pk.StateSpec(
    center_p=(0.0, 0.0, 10.0), sigma_p=0.5, center_x=(0.0, 0.0, -5.0),
)

# broad packet with an axisymmetric closed-form detector projection
BROAD_SPEC = pk.StateSpec(
    center_p=(0.0, 0.0, 4.0), sigma_p=1.0, center_x=(0.0, 0.0, -1.0),
)


@pytest.fixture(scope="session")
def beam_grid():
    return pk.build_grid(48, 24, 24, 7.0, 13.0, ct_window=(0.94, 1.0))


@pytest.fixture(scope="session")
def beam_state(beam_grid):
    return pk.from_spec(BEAM_SPEC, beam_grid)


@pytest.fixture(scope="session")
def broad_grid():
    return pk.build_grid(56, 32, 8, 0.05, 10.0)


@pytest.fixture(scope="session")
def broad_state(broad_grid):
    return pk.from_spec(BROAD_SPEC, broad_grid)


def sample_probes(seed, n, k_lo=2.0, k_hi=12.0, ct_max=0.95):
    """Deterministic off-pole momentum batch, (n, 3)."""
    rng = np.random.default_rng(seed)
    k = np.exp(rng.uniform(np.log(k_lo), np.log(k_hi), n))
    ct = rng.uniform(-ct_max, ct_max, n)
    ph = rng.uniform(0.0, 2.0 * np.pi, n)
    st = np.sqrt(1.0 - ct**2)
    return k[:, None] * np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)


@pytest.fixture
def probes():
    return sample_probes(7, 16)


# ---------------------------------------------------------------------------
# acceptance-criterion reporting: one line per criterion after the run
# ---------------------------------------------------------------------------

_CRITERIA: list[tuple[str, str, bool]] = []


@pytest.fixture(scope="session")
def record_criterion():
    def _record(name: str, detail: str, passed: bool) -> None:
        _CRITERIA.append((name, detail, passed))
        assert passed, f"{name}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, detail, passed in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
