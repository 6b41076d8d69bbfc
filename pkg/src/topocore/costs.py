"""Generalized arc costs and per-query objectives.

Arcs carry fixed-width vectors of unsigned 32-bit components.  Each
component position has a combine operation (saturating addition,
minimum, or bitwise AND) that says how the component accumulates along
a path.  A query objective maps a cost vector to a single non-negative
number or to infinity, and it distributes over the combine operation,
so path values can be accumulated component-wise and scalarized at the
end, or scalarized per arc and added up; both give the same result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Largest storable component value.  Min components use it as the
# "no restriction" sentinel; saturating addition clips to it.
COMPONENT_MAX = 2**32 - 1
INF_THRESHOLD = COMPONENT_MAX

# Objective value for forbidden arcs/paths.
INF = math.inf


class Op(enum.IntEnum):
    """Per-component combine operation."""

    ADD = 0
    MIN = 1
    AND = 2


_OP_NAMES = {Op.ADD: "add", Op.MIN: "min", Op.AND: "and"}
_OPS_BY_NAME = {v: k for k, v in _OP_NAMES.items()}


def op_name(op: Op) -> str:
    return _OP_NAMES[Op(op)]


def op_from_name(name: str) -> Op:
    try:
        return _OPS_BY_NAME[name.lower()]
    except KeyError:
        raise ValueError(f"unknown component role {name!r}") from None


@dataclass(frozen=True)
class CombineSpec:
    """Component layout shared by every arc of a graph.

    Attributes:
        ops: combine operation per component position.
    """

    ops: tuple[Op, ...]

    def __post_init__(self):
        if len(self.ops) == 0:
            raise ValueError("cost vectors need at least one component")
        object.__setattr__(self, "ops", tuple(Op(o) for o in self.ops))

    @property
    def k(self) -> int:
        return len(self.ops)

    def role_array(self) -> np.ndarray:
        """Op codes as uint8, for the jitted kernels."""
        return np.asarray([int(o) for o in self.ops], dtype=np.uint8)

    def positions(self, op: Op) -> tuple[int, ...]:
        return tuple(i for i, o in enumerate(self.ops) if o == op)

    @classmethod
    def basic(cls, k: int = 8) -> "CombineSpec":
        """All-additive layout (travel time style components)."""
        return cls(ops=(Op.ADD,) * k)

    @classmethod
    def generalized(cls, n_add: int = 4, n_min: int = 4) -> "CombineSpec":
        """Additive components followed by threshold (Min) components."""
        return cls(ops=(Op.ADD,) * n_add + (Op.MIN,) * n_min)


def _check_vector(c, spec: CombineSpec, name: str):
    if len(c) != spec.k:
        raise ValueError(f"{name} has {len(c)} components, spec expects {spec.k}")
    for i, x in enumerate(c):
        if not (0 <= int(x) <= COMPONENT_MAX):
            raise ValueError(f"{name}[{i}] = {x} outside uint32 range")


def combine(c1, c2, spec: CombineSpec) -> tuple[int, ...]:
    """Accumulate two cost vectors component-wise.

    Addition saturates at COMPONENT_MAX so stored vectors stay inside
    uint32.  Saturation loses information; preprocessing warns when it
    builds a shortcut whose additive part clipped (see topocore.core).
    """
    _check_vector(c1, spec, "c1")
    _check_vector(c2, spec, "c2")
    out = []
    for op, a, b in zip(spec.ops, c1, c2):
        a = int(a)
        b = int(b)
        if op == Op.ADD:
            out.append(min(a + b, COMPONENT_MAX))
        elif op == Op.MIN:
            out.append(min(a, b))
        else:
            out.append(a & b)
    return tuple(out)


def combine_rows(a: np.ndarray, b: np.ndarray, spec: CombineSpec) -> np.ndarray:
    """Vectorized combine over matching (r, k) uint32 arrays."""
    a = np.asarray(a, dtype=np.uint32)
    b = np.asarray(b, dtype=np.uint32)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] != spec.k:
        raise ValueError("combine_rows expects matching (r, k) arrays")
    out = np.empty_like(a)
    for i, op in enumerate(spec.ops):
        if op == Op.ADD:
            s = a[:, i].astype(np.uint64) + b[:, i].astype(np.uint64)
            out[:, i] = np.minimum(s, COMPONENT_MAX).astype(np.uint32)
        elif op == Op.MIN:
            out[:, i] = np.minimum(a[:, i], b[:, i])
        else:
            out[:, i] = a[:, i] & b[:, i]
    return out


def fold(rows: np.ndarray, spec: CombineSpec) -> tuple[int, ...]:
    """Combine a sequence of cost vectors left to right.

    Empty input yields the neutral vector (0 for Add, all-ones pattern
    for Min and AND).
    """
    rows = np.asarray(rows, dtype=np.uint32)
    if rows.ndim != 2 or rows.shape[1] != spec.k:
        raise ValueError("fold expects an (r, k) array")
    acc = tuple(0 if op == Op.ADD else COMPONENT_MAX for op in spec.ops)
    for row in rows:
        acc = combine(acc, row, spec)
    return acc


@dataclass(frozen=True)
class Objective:
    """Per-query scalarization of cost vectors.

    Attributes:
        add_weights: weight per Add component, in component order.
        vehicle_values: vehicle characteristic per Min component; an
            arc is forbidden when its threshold is below this value.
        required_bits: required mask per AND component; an arc is
            forbidden unless every required bit survives.
    """

    add_weights: tuple[int, ...] = ()
    vehicle_values: tuple[int, ...] = ()
    required_bits: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("add_weights", "vehicle_values", "required_bits"):
            vals = tuple(int(v) for v in getattr(self, name))
            for v in vals:
                if not (0 <= v <= COMPONENT_MAX):
                    raise ValueError(f"{name} entry {v} outside uint32 range")
            object.__setattr__(self, name, vals)

    def check_spec(self, spec: CombineSpec):
        counts = {
            Op.ADD: len(self.add_weights),
            Op.MIN: len(self.vehicle_values),
            Op.AND: len(self.required_bits),
        }
        for op, have in counts.items():
            want = len(spec.positions(op))
            if have != want:
                raise ValueError(
                    f"objective has {have} {op_name(op)} entries, spec has {want}"
                )

    def param_array(self, spec: CombineSpec) -> np.ndarray:
        """Per-component parameter (weight, vehicle value, or mask) as uint32."""
        self.check_spec(spec)
        params = np.zeros(spec.k, dtype=np.uint32)
        its = {
            Op.ADD: iter(self.add_weights),
            Op.MIN: iter(self.vehicle_values),
            Op.AND: iter(self.required_bits),
        }
        for i, op in enumerate(spec.ops):
            params[i] = next(its[op])
        return params


def evaluate(c, obj: Objective, spec: CombineSpec):
    """Scalarize one cost vector under an objective.

    Returns an exact int, or math.inf when a Min threshold falls below
    the vehicle value or an AND component misses a required bit.
    """
    _check_vector(c, spec, "c")
    obj.check_spec(spec)
    add_it = iter(obj.add_weights)
    min_it = iter(obj.vehicle_values)
    and_it = iter(obj.required_bits)
    total = 0
    for op, x in zip(spec.ops, c):
        x = int(x)
        if op == Op.ADD:
            total += next(add_it) * x
        elif op == Op.MIN:
            if x < next(min_it):
                return INF
        else:
            need = next(and_it)
            if (x & need) != need:
                return INF
    return total


def evaluate_rows(rows: np.ndarray, obj: Objective, spec: CombineSpec) -> np.ndarray:
    """Vectorized evaluate; forbidden rows come back as np.inf (float64)."""
    rows = np.asarray(rows, dtype=np.uint32)
    if rows.ndim != 2 or rows.shape[1] != spec.k:
        raise ValueError("evaluate_rows expects an (r, k) array")
    obj.check_spec(spec)
    params = obj.param_array(spec)
    total = np.zeros(rows.shape[0], dtype=np.float64)
    banned = np.zeros(rows.shape[0], dtype=bool)
    for i, op in enumerate(spec.ops):
        col = rows[:, i]
        if op == Op.ADD:
            total += np.float64(params[i]) * col.astype(np.float64)
        elif op == Op.MIN:
            banned |= col < params[i]
        else:
            banned |= (col & params[i]) != params[i]
    total[banned] = np.inf
    return total


def add_saturating(a: int, b: int) -> int:
    return min(int(a) + int(b), COMPONENT_MAX)


def homomorphism_check(c1, c2, obj: Objective, spec: CombineSpec) -> bool:
    """evaluate(c1 combined c2) must equal evaluate(c1) + evaluate(c2).

    Holds whenever the additive components do not saturate; infinity
    absorbs addition on the scalar side exactly like a failed
    restriction does on the vector side.
    """
    lhs = evaluate(combine(c1, c2, spec), obj, spec)
    a = evaluate(c1, obj, spec)
    b = evaluate(c2, obj, spec)
    rhs = INF if (a == INF or b == INF) else a + b
    return lhs == rhs


@dataclass(frozen=True)
class CostTable:
    """Arc cost matrix plus its component layout.

    Attributes:
        spec: component layout.
        rows: (m, k) uint32 array, one row per arc, ordered like the
            graph's arcs.  Row order tracks any graph permutation.
    """

    spec: CombineSpec
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.uint32)
        if rows.ndim != 2 or rows.shape[1] != self.spec.k:
            raise ValueError("rows must be (m, k) with k matching spec.k")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def arc_count(self) -> int:
        return self.rows.shape[0]
