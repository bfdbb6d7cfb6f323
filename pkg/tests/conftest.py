import datetime as dt
import json
from importlib.resources import files

import pytest

from cubewright import CleaningSpec, build_cube, clean, parse_csv, parse_schema

DATA = files("cubewright") / "data"

D = dt.date
FEB12, FEB13, MAR28, MAR29 = D(2011, 2, 12), D(2011, 2, 13), D(2011, 3, 28), D(2011, 3, 29)

# criterion id -> (title, passed); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def bakery_config():
    return json.loads((DATA / "bakery_workspace.json").read_text())


@pytest.fixture(scope="session")
def bakery_bytes():
    return (DATA / "bakery.csv").read_bytes()


@pytest.fixture(scope="session")
def bakery_path():
    return str(DATA / "bakery.csv")


@pytest.fixture(scope="session")
def bakery_schema(bakery_bytes, bakery_config):
    header = bakery_bytes.decode().splitlines()[0]
    return parse_schema(header, bakery_config["schema"]["types"], bakery_config["schema"]["aliases"])


@pytest.fixture(scope="session")
def bakery_raw(bakery_bytes, bakery_schema):
    return parse_csv(bakery_bytes, bakery_schema)


@pytest.fixture(scope="session")
def bakery_spec(bakery_config):
    return CleaningSpec.from_dict(bakery_config["cleaning"])


@pytest.fixture(scope="session")
def bakery_table(bakery_raw, bakery_spec):
    return clean(bakery_raw, bakery_spec)


@pytest.fixture(scope="session")
def bakery_cube(bakery_table, bakery_config):
    return build_cube(bakery_table, bakery_config["dims"], bakery_config["declared_members"])


@pytest.fixture(scope="session")
def pipeline_kwargs(bakery_config):
    return dict(
        type_hints=bakery_config["schema"]["types"],
        aliases=bakery_config["schema"]["aliases"],
        declared_members=bakery_config["declared_members"],
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] AC{key}: {title}")
