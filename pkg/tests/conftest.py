import pytest

from viscx import (Concept, bundled_taxonomy_path, insert_concept,
                   load_taxonomy, parse_taxonomy)

FRAGMENT = """\
entity\t\t
vegetation\tentity\t
flower\tvegetation\t
construction\tentity\t
building\tconstruction\t
"""


@pytest.fixture(scope="session")
def base_lattice():
    return load_taxonomy(bundled_taxonomy_path())


@pytest.fixture()
def fragment_lattice():
    return parse_taxonomy(FRAGMENT)


@pytest.fixture()
def enriched_fragment(fragment_lattice):
    lat = insert_concept(fragment_lattice, Concept("rose"), ["flower"])
    return insert_concept(lat, Concept("cathedral"), ["building"])
