import math

import pytest

from src.Objects.BilinearDecomposition import growth_factor, verify_decomposition
from src.Objects.Errors import CatalogLookupError
from src.Services import Catalog

RANKS = {
    "strassen_2x2": 7,
    "winograd_2x2": 7,
    "conventional_2x2": 8,
    "complex_regular": 4,
    "complex_gauss": 3,
    "complex_new": 3,
}


@pytest.mark.parametrize("name", Catalog.BUILTIN_NAMES)
def test_builtin_verifies_exactly(name):
    entry = Catalog.get_builtin(name)
    assert entry.verify()
    assert entry.decomposition.rank == RANKS[name]


@pytest.mark.parametrize("name", Catalog.BUILTIN_NAMES)
def test_closed_form_matches_growth_factor(name):
    entry = Catalog.get_builtin(name)
    assert growth_factor(entry.decomposition) == pytest.approx(entry.closed_form(), rel=1e-14)


def test_aliases():
    assert Catalog.get_builtin("strassen").name == "strassen_2x2"
    assert Catalog.get_builtin("new").name == "complex_new"
    assert Catalog.get_builtin("gauss").decomposition.rank == 3


def test_conventional_family():
    entry = Catalog.get_builtin("conventional_mm(3,2,4)")
    D = entry.decomposition
    assert D.dims == (6, 8, 12)
    assert D.rank == 24
    assert growth_factor(D) == 24.0
    assert verify_decomposition(D, Catalog.matmul_tensor(3, 2, 4))


def test_unknown_name():
    with pytest.raises(CatalogLookupError, match="unknown built-in"):
        Catalog.get_builtin("karatsuba")
    # also usable as a KeyError by callers that treat the catalog as a mapping
    with pytest.raises(KeyError):
        Catalog.get_builtin("karatsuba")


def test_nuclear_norms_are_metadata():
    rows = {row["name"]: row for row in Catalog.catalog_constants()}
    assert set(rows) == set(Catalog.BUILTIN_NAMES)
    for name in ("complex_regular", "complex_gauss", "complex_new"):
        assert rows[name]["nuclear_norm"] == 4.0
    for name in ("strassen_2x2", "winograd_2x2", "conventional_2x2"):
        assert rows[name]["nuclear_norm"] == "unknown"


def test_new_algorithm_attains_the_nuclear_norm():
    # the 3-term scheme is as stable as the 4-term one
    new = Catalog.get_builtin("complex_new")
    assert growth_factor(new.decomposition) == pytest.approx(new.known_nuclear_norm, rel=1e-14)
    assert growth_factor(Catalog.complex_gauss()) > new.known_nuclear_norm


def test_winograd_less_stable_than_strassen():
    assert growth_factor(Catalog.winograd_2x2()) > growth_factor(Catalog.strassen_2x2()) > 8.0
    assert growth_factor(Catalog.winograd_2x2()) == pytest.approx(17.853, abs=1e-3)
    assert growth_factor(Catalog.strassen_2x2()) == pytest.approx(12 + 2 * math.sqrt(2), rel=1e-14)


def test_complex_tensor_entries():
    T = Catalog.complex_mult_tensor()
    assert T[0, 0, 0] == 1
    assert T[1, 1, 0] == -1
    assert T[0, 1, 1] == 1
    assert T[1, 0, 1] == 1
    assert len(T.nonzero()) == 4
