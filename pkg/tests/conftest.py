import pytest

from pathnli.kg import load_triples
from pathnli.synth import build_synthetic_kg
from pathnli.templates import TemplateTable

from util import DIRECTOR_TRIPLES


@pytest.fixture(scope="session")
def movie_kg():
    return load_triples(DIRECTOR_TRIPLES)


@pytest.fixture(scope="session")
def synth_kg():
    return build_synthetic_kg()


@pytest.fixture(scope="session")
def default_templates():
    return TemplateTable()
