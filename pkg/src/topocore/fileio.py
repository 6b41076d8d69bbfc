"""DIMACS challenge files, cost tables, and the binary prep container.

Graph files follow the 9th-challenge shortest-path format: a ``.gr``
file with one ``p sp n m`` header and ``a u v w`` arc lines (1-based
ids, integer weights), and an optional ``.co`` file with ``v id x y``
coordinate lines in integer micro-degrees (x longitude, y latitude).

Cost tables are stored either as text ("costs k m <roles>" header,
then one row of k integers per arc, infinity written as the 4294967295
sentinel) or as an equivalent binary file for large instances.  Rows
pair with the arcs of the graph file they were written next to, in
file order; build_graph_arrays applies the same stable reorder to
both, so parsing them together keeps the pairing.

The prep container is little-endian binary with magic "TOPO1"; loading
is bit-exact.
"""

from __future__ import annotations

import io
import struct
from os import PathLike

import numpy as np

from topocore.core import CorePrep, SearchGraph, VARIANTS
from topocore.costs import COMPONENT_MAX, CombineSpec, CostTable, op_from_name, op_name
from topocore.graph import Graph, Permutation, build_graph_arrays

PREP_MAGIC = b"TOPO1"
PREP_VERSION = 1
COST_MAGIC = b"COST1"


class PrepFormatError(ValueError):
    """Raised for bad magic, version, truncation, or trailing bytes."""


def memory_estimate(n: int, m: int, k: int) -> int:
    """Bytes for an adjacency array with k cost components per arc.

    One 32-bit entry per first-out slot (n+1), per arc head, and per
    cost component: 4((n+1) + (k+1)m).
    """
    if n < 0 or m < 0 or k < 0:
        raise ValueError("n, m, k must be non-negative")
    return 4 * ((n + 1) + (k + 1) * m)


# ---------------------------------------------------------------------------
# DIMACS text formats


def _lines(source):
    """Yield (line_number, line) from a path or an open text stream."""
    if isinstance(source, (str, PathLike)):
        with open(source, "r", encoding="ascii") as f:
            yield from enumerate(f, start=1)
    else:
        yield from enumerate(source, start=1)


def parse_dimacs_arcs(gr_source) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Arc list of a .gr file: (node_count, tail, head, weight), 0-based.

    Arcs come back in file order; weights fit 32 bits.
    """
    n = m = None
    tails: list[int] = []
    heads: list[int] = []
    weights: list[int] = []
    for lineno, raw in _lines(gr_source):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise ValueError(f"line {lineno}: second problem line")
            if len(parts) != 4 or parts[1] != "sp":
                raise ValueError(f"line {lineno}: expected 'p sp <n> <m>'")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer problem sizes") from None
            if n < 0 or m < 0:
                raise ValueError(f"line {lineno}: negative problem sizes")
        elif parts[0] == "a":
            if n is None:
                raise ValueError(f"line {lineno}: arc before problem line")
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 'a <u> <v> <w>'")
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer arc fields") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"line {lineno}: endpoint out of range 1..{n}")
            if not (0 <= w <= COMPONENT_MAX):
                raise ValueError(f"line {lineno}: weight {w} outside 0..{COMPONENT_MAX}")
            if len(tails) == m:
                raise ValueError(f"line {lineno}: more than {m} arcs")
            tails.append(u - 1)
            heads.append(v - 1)
            weights.append(w)
        else:
            raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise ValueError("missing problem line 'p sp <n> <m>'")
    if len(tails) != m:
        raise ValueError(f"header promises {m} arcs, file has {len(tails)}")
    return (
        n,
        np.asarray(tails, dtype=np.int64),
        np.asarray(heads, dtype=np.int64),
        np.asarray(weights, dtype=np.uint32),
    )


def parse_dimacs_coords(co_source, node_count: int) -> np.ndarray:
    """(lat, lon) in degrees per node from a .co file.

    Lines are ``v id x y`` with x = longitude and y = latitude in
    integer micro-degrees; every node must get exactly one line.
    """
    coords = np.full((node_count, 2), np.nan, dtype=np.float64)
    for lineno, raw in _lines(co_source):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if parts[:4] != ["p", "aux", "sp", "co"] or len(parts) != 5:
                raise ValueError(f"line {lineno}: expected 'p aux sp co <n>'")
            if int(parts[4]) != node_count:
                raise ValueError(
                    f"line {lineno}: node count {parts[4]} does not match graph ({node_count})"
                )
        elif parts[0] == "v":
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 'v <id> <x> <y>'")
            try:
                vid, x, y = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer fields") from None
            if not (1 <= vid <= node_count):
                raise ValueError(f"line {lineno}: node id out of range 1..{node_count}")
            coords[vid - 1, 0] = y / 1e6
            coords[vid - 1, 1] = x / 1e6
        else:
            raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
    if np.isnan(coords).any():
        missing = int(np.flatnonzero(np.isnan(coords[:, 0]))[0]) + 1
        raise ValueError(f"no coordinates for node {missing}")
    return coords


def parse_dimacs(gr_source, co_source=None) -> Graph:
    """Graph from DIMACS .gr (and optional .co) data.

    The single cost component holds the arc weight (travel time in the
    challenge files).  Errors carry the offending line number.
    """
    n, tail, head, w = parse_dimacs_arcs(gr_source)
    coords = parse_dimacs_coords(co_source, n) if co_source is not None else None
    return build_graph_arrays(n, tail, head, w.reshape(-1, 1), coords=coords)


def write_dimacs(graph: Graph, gr_target, co_target=None, component: int = 0) -> None:
    """Write .gr (and optionally .co) data for a graph.

    Arc weights come from the given cost component; coordinates are
    written in micro-degrees, rounded half away from zero.
    """
    if not 0 <= component < graph.k:
        raise ValueError(f"component {component} out of range for k={graph.k}")

    def _write(target, body):
        if isinstance(target, (str, PathLike)):
            with open(target, "w", encoding="ascii") as f:
                body(f)
        else:
            body(target)

    tails = graph.tails()

    def gr_body(f):
        f.write(f"p sp {graph.node_count} {graph.arc_count}\n")
        w = graph.costs[:, component]
        for a in range(graph.arc_count):
            f.write(f"a {tails[a] + 1} {graph.head[a] + 1} {w[a]}\n")

    _write(gr_target, gr_body)
    if co_target is None:
        return
    if graph.coords is None:
        raise ValueError("graph has no coordinates to write")

    def co_body(f):
        f.write(f"p aux sp co {graph.node_count}\n")
        micro = np.copysign(
            np.floor(np.abs(graph.coords) * 1e6 + 0.5), graph.coords
        ).astype(np.int64)
        for v in range(graph.node_count):
            f.write(f"v {v + 1} {micro[v, 1]} {micro[v, 0]}\n")

    _write(co_target, co_body)


# ---------------------------------------------------------------------------
# cost tables


def write_cost_file(table: CostTable, target, binary: bool = False) -> None:
    roles = " ".join(op_name(op) for op in table.spec.ops)
    m = len(table.rows)
    if binary:
        payload = bytearray()
        payload += COST_MAGIC
        payload += struct.pack("<IQ", table.spec.k, m)
        payload += table.spec.role_array().astype("<u1", copy=False).tobytes()
        payload += np.ascontiguousarray(table.rows).astype("<u4", copy=False).tobytes()
        if isinstance(target, (str, PathLike)):
            with open(target, "wb") as f:
                f.write(payload)
        else:
            target.write(bytes(payload))
        return

    def body(f):
        f.write(f"costs {table.spec.k} {m} {roles}\n")
        for row in table.rows:
            f.write(" ".join(str(int(x)) for x in row) + "\n")

    if isinstance(target, (str, PathLike)):
        with open(target, "w", encoding="ascii") as f:
            body(f)
    else:
        body(target)


def _read_cost_binary(data: bytes) -> CostTable:
    r = _Reader(data, "cost file")
    r.expect_magic(COST_MAGIC)
    k, m = r.unpack("<IQ")
    roles = r.array("<u1", k)
    spec = CombineSpec(tuple(int(x) for x in roles))
    rows = r.array("<u4", m * k).reshape(m, k)
    r.done()
    return CostTable(spec, rows)


def read_cost_file(source) -> CostTable:
    """Read a cost table, text or binary, sniffing the magic bytes."""
    if isinstance(source, (str, PathLike)):
        with open(source, "rb") as f:
            head = f.read(len(COST_MAGIC))
            if head == COST_MAGIC:
                return _read_cost_binary(head + f.read())
            text = (head + f.read()).decode("ascii")
        return _read_cost_text(io.StringIO(text))
    data = source.read()
    if isinstance(data, bytes):
        if data.startswith(COST_MAGIC):
            return _read_cost_binary(data)
        return _read_cost_text(io.StringIO(data.decode("ascii")))
    return _read_cost_text(io.StringIO(data))


def _read_cost_text(stream) -> CostTable:
    it = _lines(stream)
    header = None
    for lineno, raw in it:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = (lineno, line)
        break
    if header is None:
        raise ValueError("empty cost file")
    lineno, line = header
    parts = line.split()
    if parts[0] != "costs" or len(parts) < 3:
        raise ValueError(f"line {lineno}: expected 'costs <k> <m> <roles>'")
    try:
        k, m = int(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"line {lineno}: non-integer sizes") from None
    roles = parts[3:]
    if len(roles) != k:
        raise ValueError(f"line {lineno}: {len(roles)} roles for k={k}")
    spec = CombineSpec(tuple(op_from_name(r) for r in roles))
    rows = np.empty((m, k), dtype=np.uint32)
    filled = 0
    for lineno, raw in it:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if filled == m:
            raise ValueError(f"line {lineno}: more than {m} rows")
        vals = line.split()
        if len(vals) != k:
            raise ValueError(f"line {lineno}: {len(vals)} values, expected {k}")
        try:
            row = [int(v) for v in vals]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer value") from None
        for v in row:
            if not 0 <= v <= COMPONENT_MAX:
                raise ValueError(f"line {lineno}: value {v} outside 0..{COMPONENT_MAX}")
        rows[filled] = row
        filled += 1
    if filled != m:
        raise ValueError(f"header promises {m} rows, file has {filled}")
    return CostTable(spec, rows)


# ---------------------------------------------------------------------------
# prep container


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.off = 0
        self.what = what

    def take(self, nbytes: int) -> bytes:
        if self.off + nbytes > len(self.data):
            raise PrepFormatError(f"truncated {self.what}")
        out = self.data[self.off:self.off + nbytes]
        self.off += nbytes
        return out

    def expect_magic(self, magic: bytes):
        if self.take(len(magic)) != magic:
            raise PrepFormatError(f"bad magic, not a {self.what}")

    def unpack(self, fmt: str):
        vals = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return vals if len(vals) > 1 else vals[0]

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        raw = self.take(dt.itemsize * count)
        return np.frombuffer(raw, dtype=dt)

    def done(self):
        if self.off != len(self.data):
            raise PrepFormatError(
                f"{len(self.data) - self.off} trailing bytes in {self.what}"
            )


def _write_array(buf: bytearray, arr: np.ndarray, dtype: str):
    buf += np.ascontiguousarray(arr).astype(dtype, copy=False).tobytes()


def save_prep(prep: CorePrep, target) -> None:
    """Write the container; integers are little-endian throughout."""
    buf = bytearray()
    buf += PREP_MAGIC
    spec = prep.spec
    variant = prep.variant.encode("ascii")
    order_name = prep.order_name.encode("ascii")
    n = prep.node_count
    m = prep.input_arc_count
    buf += struct.pack("<III", PREP_VERSION, spec.k, len(variant))
    buf += variant
    buf += struct.pack("<I", len(order_name))
    buf += order_name
    _write_array(buf, spec.role_array(), "<u1")
    buf += struct.pack("<QQQ", n, m, prep.core_count)
    _write_array(buf, prep.order_perm.new_id, "<u4")
    _write_array(buf, prep.perm.new_id, "<u4")
    _write_array(buf, prep.input_tail, "<u4")
    _write_array(buf, prep.input_head, "<u4")
    for sg in (prep.forward, prep.backward):
        buf += struct.pack("<Q", sg.arc_count)
        _write_array(buf, sg.first_out, "<u4")
        _write_array(buf, sg.head, "<u4")
        _write_array(buf, sg.costs, "<u4")
        _write_array(buf, sg.ref, "<i8")
    S = prep.shortcut_count
    buf += struct.pack("<Q", S)
    _write_array(buf, prep.sc_tail, "<i8")
    _write_array(buf, prep.sc_head, "<i8")
    _write_array(buf, prep.sc_cost, "<u4")
    buf += struct.pack("<Q", len(prep.sc_unpack_refs))
    _write_array(buf, prep.sc_unpack_first, "<i8")
    _write_array(buf, prep.sc_unpack_refs, "<i8")
    if isinstance(target, (str, PathLike)):
        with open(target, "wb") as f:
            f.write(buf)
    else:
        target.write(bytes(buf))


def load_prep(source) -> CorePrep:
    """Read a container written by save_prep; bit-exact round trip."""
    if isinstance(source, (str, PathLike)):
        with open(source, "rb") as f:
            data = f.read()
    else:
        data = source.read()
    r = _Reader(data, "prep container")
    r.expect_magic(PREP_MAGIC)
    version, k, vlen = r.unpack("<III")
    if version != PREP_VERSION:
        raise PrepFormatError(f"unsupported container version {version}")
    variant = r.take(vlen).decode("ascii")
    if variant not in VARIANTS:
        raise PrepFormatError(f"unknown variant {variant!r}")
    olen = r.unpack("<I")
    order_name = r.take(olen).decode("ascii")
    roles = r.array("<u1", k)
    spec = CombineSpec(tuple(int(x) for x in roles))
    n, m, core_count = r.unpack("<QQQ")
    order_perm = Permutation(r.array("<u4", n))
    perm = Permutation(r.array("<u4", n))
    input_tail = r.array("<u4", m)
    input_head = r.array("<u4", m)
    graphs = []
    for _ in range(2):
        mg = r.unpack("<Q")
        graphs.append(
            SearchGraph(
                node_count=n,
                first_out=r.array("<u4", n + 1),
                head=r.array("<u4", mg),
                costs=r.array("<u4", mg * k).reshape(mg, k),
                ref=r.array("<i8", mg),
            )
        )
    S = r.unpack("<Q")
    sc_tail = r.array("<i8", S)
    sc_head = r.array("<i8", S)
    sc_cost = r.array("<u4", S * k).reshape(S, k)
    U = r.unpack("<Q")
    sc_unpack_first = r.array("<i8", S + 1)
    sc_unpack_refs = r.array("<i8", U)
    r.done()
    return CorePrep(
        spec=spec,
        variant=variant,
        core_count=int(core_count),
        forward=graphs[0],
        backward=graphs[1],
        order_name=order_name,
        sc_tail=sc_tail,
        sc_head=sc_head,
        sc_cost=sc_cost,
        sc_unpack_first=sc_unpack_first,
        sc_unpack_refs=sc_unpack_refs,
        input_tail=input_tail,
        input_head=input_head,
        perm=perm,
        order_perm=order_perm,
    )
