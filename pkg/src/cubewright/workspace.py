"""On-disk workspace: one dataset, one cube definition, one ``workspace.json``."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .cube import Cube, build_cube, cube_from_dict, cube_to_dict
from .ingest import Table, parse_csv, parse_schema, to_csv_bytes
from .prep import CleaningSpec

CONFIG = "workspace.json"
RAW = "raw.csv"
CLEAN = "clean.csv"
CUBE = "cube.json"
ENV_VAR = "CUBEWRIGHT_WORKSPACE"


class WorkspaceError(ValueError):
    pass


def default_config() -> dict:
    return {
        "schema": {"types": {}, "aliases": {}},
        "cleaning": None,
        "dims": None,
        "declared_members": {},
    }


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class Workspace:
    root: Path

    @classmethod
    def at(cls, path: str | os.PathLike | None) -> "Workspace":
        path = path or os.environ.get(ENV_VAR) or "."
        return cls(Path(path))

    def path(self, name: str) -> Path:
        return self.root / name

    @property
    def exists(self) -> bool:
        return self.path(CONFIG).is_file()

    def config(self) -> dict:
        if not self.exists:
            raise WorkspaceError(f"no {CONFIG} in {self.root}; run 'cubewright ingest' first")
        doc = default_config()
        doc.update(json.loads(self.path(CONFIG).read_text(encoding="utf-8")))
        return doc

    def save_config(self, doc: dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        _atomic_write(self.path(CONFIG), (json.dumps(doc, indent=2) + "\n").encode("utf-8"))

    def write_table(self, name: str, table: Table) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        _atomic_write(self.path(name), to_csv_bytes(table))

    def _read(self, name: str, types: dict, aliases: dict) -> Table:
        path = self.path(name)
        if not path.is_file():
            raise WorkspaceError(f"{path} is missing")
        data = path.read_bytes()
        header = data.decode("utf-8-sig").split("\n", 1)[0]
        return parse_csv(data, parse_schema(header, types, aliases))

    def raw_table(self) -> Table:
        cfg = self.config()
        return self._read(RAW, cfg["schema"]["types"], cfg["schema"]["aliases"])

    def clean_table(self) -> Table:
        cfg = self.config()
        return self._read(CLEAN, cfg["schema"]["types"], cfg["schema"]["aliases"])

    def cleaning_spec(self) -> CleaningSpec:
        cfg = self.config()
        if not cfg.get("cleaning"):
            raise WorkspaceError("no cleaning spec configured; run 'cubewright clean --spec FILE'")
        return CleaningSpec.from_dict(cfg["cleaning"])

    def dims(self) -> list[str]:
        cfg = self.config()
        if not cfg.get("dims"):
            raise WorkspaceError("no cube dimensions configured; run 'cubewright cube --dims ...'")
        return list(cfg["dims"])

    def build_cube(self) -> Cube:
        cfg = self.config()
        return build_cube(self.clean_table(), self.dims(), cfg.get("declared_members") or None)

    def save_cube(self, cube: Cube) -> None:
        _atomic_write(self.path(CUBE), (json.dumps(cube_to_dict(cube)) + "\n").encode("utf-8"))

    def load_cube(self) -> Cube:
        path = self.path(CUBE)
        if not path.is_file():
            raise WorkspaceError(f"{path} is missing; run 'cubewright cube'")
        return cube_from_dict(json.loads(path.read_text(encoding="utf-8")))
