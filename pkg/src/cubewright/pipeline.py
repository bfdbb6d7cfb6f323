"""Staged worker pipeline: ingest -> clean -> load -> cube -> analyze.

Each stage runs on its own thread and talks to its neighbours only through a
bounded FIFO channel. Producers block when a channel is full. A failing
stage sends ``Abort`` downstream and keeps draining its input so upstream
producers never wedge. Results do not depend on batch size or scheduling.
"""

from __future__ import annotations

import enum
import io
import json
import os
import queue
import threading
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .cube import Cube, build_cube
from .ingest import IngestError, Schema, Table, _text_stream, iter_rows, parse_csv, parse_schema
from .prep import CleaningSpec, clean, clean_rows, output_schema
from .query import Query, execute, parse_query

DEFAULT_CAPACITY = 16


class StageId(enum.Enum):
    INGEST = "ingest"
    CLEAN = "clean"
    LOAD = "load"
    CUBE = "cube"
    ANALYZE = "analyze"


class Kind(enum.Enum):
    BATCH = "batch"
    END = "end_of_stream"
    ABORT = "abort"


@dataclass(frozen=True)
class Message:
    kind: Kind
    sequence: int
    payload: Any = None  # tuple of items for BATCH, (StageId, reason) for ABORT


@dataclass
class StageReport:
    stage: StageId
    rows_in: int = 0
    rows_out: int = 0
    batches: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["stage"] = self.stage.value
        return doc


class PipelineError(RuntimeError):
    def __init__(self, stage: StageId, reason: str, reports: list[StageReport]):
        self.stage = stage
        self.reason = reason
        self.reports = reports
        super().__init__(f"{stage.value} stage failed: {reason}")


class Channel:
    """Bounded, order-preserving link between two stages."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        self._queue: queue.Queue[Message] = queue.Queue(maxsize=capacity)
        self._sequence = 0

    def send(self, kind: Kind, payload=None) -> None:
        self._sequence += 1
        self._queue.put(Message(kind, self._sequence, payload))

    def recv(self) -> Message:
        return self._queue.get()


class _Aborted(Exception):
    def __init__(self, origin: StageId, reason: str):
        self.origin = origin
        self.reason = reason


def _batched(items: Iterable, size: int):
    batch = []
    for item in items:
        batch.append(item)
        if len(batch) == size:
            yield tuple(batch)
            batch = []
    if batch:
        yield tuple(batch)


class _Stage(threading.Thread):
    stage_id: StageId

    def __init__(self, inbox: Channel | None, outbox: Channel | None):
        super().__init__(name=f"cubewright-{self.stage_id.value}", daemon=True)
        self.inbox = inbox
        self.outbox = outbox
        self.report = StageReport(self.stage_id)
        self.failure: tuple[StageId, str] | None = None
        self.input_closed = inbox is None
        self.ends_received = 0

    def emit(self, items: tuple) -> None:
        self.outbox.send(Kind.BATCH, items)
        self.report.batches += 1
        self.report.rows_out += len(items)

    def incoming(self):
        """Yield upstream batches until end of stream; raise on upstream abort."""
        while True:
            msg = self.inbox.recv()
            if msg.kind is Kind.END:
                self.input_closed = True
                self.ends_received += 1
                return
            if msg.kind is Kind.ABORT:
                self.input_closed = True
                raise _Aborted(*msg.payload)
            self.report.rows_in += len(msg.payload)
            yield msg.payload

    def drain(self) -> None:
        while not self.input_closed:
            msg = self.inbox.recv()
            if msg.kind is Kind.END:
                self.ends_received += 1
            self.input_closed = msg.kind is not Kind.BATCH

    def process(self) -> None:
        raise NotImplementedError

    def run(self) -> None:
        try:
            self.process()
        except _Aborted as exc:
            self.failure = (exc.origin, exc.reason)
            if self.outbox is not None:
                self.outbox.send(Kind.ABORT, (exc.origin, exc.reason))
            return
        except Exception as exc:  # noqa: BLE001 - any stage failure becomes an Abort
            reason = str(exc) or type(exc).__name__
            self.report.errors.append(reason)
            self.failure = (self.stage_id, reason)
            if self.outbox is not None:
                self.outbox.send(Kind.ABORT, (self.stage_id, reason))
            self.drain()
            return
        if self.outbox is not None:
            self.outbox.send(Kind.END)


class _Ingest(_Stage):
    stage_id = StageId.INGEST

    def __init__(self, stream, schema: Schema, batch_size: int, lenient: bool, outbox: Channel):
        super().__init__(None, outbox)
        self.stream, self.schema, self.batch_size, self.lenient = stream, schema, batch_size, lenient

    def process(self) -> None:
        rejected: list = []
        rows = iter_rows(self.stream, self.schema, lenient=self.lenient, rejected=rejected)

        def counted():
            for row in rows:
                self.report.rows_in += 1
                yield row

        try:
            for batch in _batched(counted(), self.batch_size):
                self.emit(batch)
        finally:
            self.report.rows_in += len(rejected)
            self.report.errors.extend(f"line {n}: skipped ({msg})" for n, msg in rejected)


class _Clean(_Stage):
    stage_id = StageId.CLEAN

    def __init__(self, schema: Schema, spec: CleaningSpec, inbox, outbox):
        super().__init__(inbox, outbox)
        self.schema, self.spec = schema, spec

    def process(self) -> None:
        output_schema(self.schema, self.spec)
        seen = 0
        for batch in self.incoming():
            self.emit(tuple(clean_rows(batch, self.schema, self.spec, start=seen)))
            seen += len(batch)


class _Load(_Stage):
    stage_id = StageId.LOAD

    def __init__(self, inbox, outbox):
        super().__init__(inbox, outbox)
        self.rows: list[tuple] = []

    def process(self) -> None:
        for batch in self.incoming():
            self.rows.extend(batch)
            self.emit(batch)


class _Cube(_Stage):
    stage_id = StageId.CUBE

    def __init__(self, schema: Schema, dims, declared, inbox, outbox):
        super().__init__(inbox, outbox)
        self.schema, self.dims, self.declared = schema, dims, declared

    def process(self) -> None:
        rows: list[tuple] = []
        for batch in self.incoming():
            rows.extend(batch)
        cube = build_cube(Table(self.schema, tuple(rows)), self.dims, self.declared)
        self.outbox.send(Kind.BATCH, (cube,))
        self.report.batches += 1
        self.report.rows_out = cube.total


class _Analyze(_Stage):
    stage_id = StageId.ANALYZE

    def __init__(self, queries: Sequence[Query], inbox):
        super().__init__(inbox, None)
        self.queries = queries
        self.cube: Cube | None = None
        self.results: list = []

    def process(self) -> None:
        for batch in self.incoming():
            for cube in batch:
                self.cube = cube
        self.report.rows_in = self.cube.total if self.cube is not None else 0
        for q in self.queries:
            self.results.append(execute(q, self.cube))
        self.report.rows_out = len(self.results)
        self.report.batches = 1


@dataclass
class PipelineRun:
    results: list
    reports: list[StageReport]
    cube: Cube | None = None
    table: Table | None = None

    def reports_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.reports], indent=2)


def _open_source(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8-sig", newline="")
    return _text_stream(source)


def run_pipeline(
    source,
    cleaning: CleaningSpec,
    dims: Sequence[str],
    queries: Sequence[Query | str],
    batch_size: int = 64,
    *,
    type_hints: Mapping | None = None,
    aliases: Mapping | None = None,
    declared_members: Mapping | None = None,
    lenient: bool = False,
    capacity: int = DEFAULT_CAPACITY,
) -> PipelineRun:
    """Run the five stages concurrently and block until all have settled.

    ``source`` is a CSV path, bytes, or a file object. Raises
    :class:`PipelineError` naming the stage where a failure originated.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    if capacity < 1:
        raise ValueError("capacity must be at least 1")
    parsed = [parse_query(q) if isinstance(q, str) else q for q in queries]
    stream = _open_source(source)
    try:
        header = stream.readline()
        if not header.strip():
            raise IngestError("missing header line", 1)
        schema = parse_schema(header, type_hints, aliases)
        clean_schema = output_schema(schema, cleaning)

        links = [Channel(capacity) for _ in range(4)]
        stages = [
            _Ingest(stream, schema, batch_size, lenient, links[0]),
            _Clean(schema, cleaning, links[0], links[1]),
            _Load(links[1], links[2]),
            _Cube(clean_schema, dims, declared_members, links[2], links[3]),
            _Analyze(parsed, links[3]),
        ]
        for st in stages:
            st.start()
        for st in stages:
            st.join()
    finally:
        if stream is not source:
            stream.close()

    reports = [st.report for st in stages]
    failure = stages[-1].failure
    if failure is not None:
        raise PipelineError(failure[0], failure[1], reports)
    load = stages[2]
    return PipelineRun(stages[-1].results, reports, stages[-1].cube,
                       Table(clean_schema, tuple(load.rows)))


def run_sequential(source, cleaning: CleaningSpec, dims, queries, *, type_hints=None, aliases=None,
                   declared_members=None) -> list:
    """Reference composition parse -> clean -> build -> execute, no threads."""
    stream = _open_source(source)
    try:
        text = stream.read()
    finally:
        if stream is not source:
            stream.close()
    schema = parse_schema(text.splitlines()[0] if text else "", type_hints, aliases)
    table = clean(parse_csv(io.StringIO(text), schema), cleaning)
    cube = build_cube(table, dims, declared_members)
    return [execute(q, cube) for q in queries]
