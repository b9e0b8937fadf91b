import pytest

from betatiling import betamap, tiling
from betatiling.betamap import IntervalQB, build_transform, preset, supported
from betatiling.numfield import make_field


@pytest.fixture(scope="session")
def golden():
    return make_field(1, 1)


@pytest.fixture(scope="session")
def tribonacci():
    return make_field(1, 1, 1)


@pytest.fixture(scope="session")
def smallest_pisot():
    return make_field(0, 1, 1)


@pytest.fixture(scope="session")
def golden_greedy(golden):
    return preset("greedy", golden)


@pytest.fixture(scope="session")
def golden_symmetric(golden):
    return preset("symmetric", golden)


@pytest.fixture(scope="session")
def golden_symmetric_r(golden_symmetric):
    return supported(golden_symmetric)


@pytest.fixture(scope="session")
def golden_minweight(golden):
    return preset("minimal_weight", golden, alpha=golden.qb(["17/5", "-9/5"]))


@pytest.fixture(scope="session")
def golden_pm1(golden):
    one = golden.one
    return build_transform(
        golden, [-one, one],
        [[IntervalQB(-one, golden.zero)], [IntervalQB(golden.zero, one)]])


@pytest.fixture(scope="session")
def tribonacci_symmetric(tribonacci):
    return preset("symmetric", tribonacci)


@pytest.fixture(scope="session")
def tribonacci_symmetric_r(tribonacci_symmetric):
    return supported(tribonacci_symmetric)


@pytest.fixture(scope="session")
def smallest_pisot_symmetric_r(smallest_pisot):
    return supported(preset("symmetric", smallest_pisot))


def stage_cache(t, _cache={}):
    """Shared heavy pipeline stages keyed by the transform's config."""
    key = str(t.to_config())
    if key not in _cache:
        vd = betamap.compute_v(t)
        g = tiling.gifs_build(t, vd)
        pset = tiling.purely_periodic_points(t)
        _cache[key] = (vd, g, pset)
    return _cache[key]
