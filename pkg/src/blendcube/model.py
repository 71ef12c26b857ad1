"""Constellation / dimension / hierarchy / fact model and instance-level roll-ups.

A constellation is built unsealed (by the ingest layer or directly in tests),
then sealed; sealing runs full validation and freezes the structure. Every
analysis operation requires a sealed constellation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from . import predicate as P
from .errors import (
    DataError,
    OperatorError,
    SchemaError,
    StrictnessError,
    UnknownValueError,
    ValidationError,
)
from .values import ALL_VALUE, DECIMAL, TEXT, fold_ident

ALL = "All"
AGG_FUNCTIONS = ("SUM", "AVG", "MIN", "MAX", "COUNT")


@dataclass(frozen=True)
class Attribute:
    name: str
    vtype: str = TEXT

    def __post_init__(self):
        if self.vtype not in (TEXT, DECIMAL):
            raise SchemaError(f"attribute {self.name}: unknown type {self.vtype!r}")


@dataclass
class Hierarchy:
    """An elementary acyclic path from the Id param up to All."""

    name: str
    params: list[str]
    weak: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def level_index(self, param: str) -> int:
        try:
            return self.params.index(param)
        except ValueError:
            raise UnknownValueError(f"{param!r} is not a param of hierarchy {self.name}") from None

    def is_coarser(self, a: str, b: str) -> bool:
        """True when a sits strictly above b on this path."""
        return self.level_index(a) > self.level_index(b)


@dataclass(frozen=True)
class Measure:
    name: str
    agg: str

    def __post_init__(self):
        if self.agg not in AGG_FUNCTIONS:
            raise SchemaError(f"measure {self.name}: unknown aggregation {self.agg!r}")


@dataclass(frozen=True)
class Violation:
    code: str
    location: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, location: str, message: str):
        self.violations.append(Violation(code, location, message))

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


class Dimension:
    """An analysis axis: attributes, hierarchies, and keyed instance rows.

    The distinguished All attribute is added automatically and is constant
    "all" on every instance. One declared attribute plays the Id role (the
    finest hierarchy level, unique across instances); R-OLAP surrogate keys
    live outside the attribute set, in `key_column` / instance keys.
    """

    def __init__(self, name: str, attributes, id_attr: str, hierarchies=()):
        self.name = name
        self.attributes: list[Attribute] = list(attributes)
        if not any(a.name == ALL for a in self.attributes):
            self.attributes.append(Attribute(ALL, TEXT))
        self.id_attr = id_attr
        self.hierarchies: dict[str, Hierarchy] = {}
        self.instances: dict[object, dict] = {}
        self.key_column = "id_" + fold_ident(name)

        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"dimension {name}: duplicate attribute names")
        folded = [fold_ident(n) for n in names if n != ALL]
        if len(set(folded)) != len(folded):
            raise SchemaError(f"dimension {name}: attribute names collide after SQL folding")
        if id_attr not in names:
            raise SchemaError(f"dimension {name}: Id attribute {id_attr!r} not declared")
        for h in hierarchies:
            self.add_hierarchy(h)

    def add_hierarchy(self, h: Hierarchy):
        if h.name in self.hierarchies:
            raise SchemaError(f"dimension {self.name}: duplicate hierarchy {h.name}")
        self.hierarchies[h.name] = h

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise UnknownValueError(f"dimension {self.name} has no attribute {name!r}")

    def has_attribute(self, name: str) -> bool:
        return any(a.name == name for a in self.attributes)

    def attr_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def add_instance(self, key, row: dict):
        """Append one instance; attribute values must be complete and non-null."""
        if key in self.instances:
            raise DataError(f"dimension {self.name}: duplicate key {key!r}")
        stored = {}
        for a in self.attributes:
            if a.name == ALL:
                stored[ALL] = ALL_VALUE
                continue
            if a.name not in row or row[a.name] is None or row[a.name] == "":
                raise DataError(f"dimension {self.name}, key {key!r}: missing {a.name}")
            v = row[a.name]
            if a.vtype == DECIMAL and not isinstance(v, Decimal):
                raise DataError(f"dimension {self.name}, key {key!r}: {a.name} must be decimal")
            if a.vtype == TEXT and not isinstance(v, str):
                raise DataError(f"dimension {self.name}, key {key!r}: {a.name} must be text")
            stored[a.name] = v
        self.instances[key] = stored

    def value(self, key, attr: str):
        return self.instances[key][attr]


class Fact:
    """An analysis subject: measures plus instances linked to dimension keys."""

    def __init__(self, name: str, measures):
        self.name = name
        self.measures: list[Measure] = [
            m if isinstance(m, Measure) else Measure(m[0], m[1]) for m in measures
        ]
        if not self.measures:
            raise SchemaError(f"fact {name}: at least one measure is required")
        mnames = [m.name for m in self.measures]
        if len(set(mnames)) != len(mnames):
            raise SchemaError(f"fact {name}: duplicate measure names")
        self.instances: list[tuple[object, dict, dict]] = []  # (key, refs, values)
        self.key_column = "id_" + fold_ident(name)

    def measure(self, name: str) -> Measure:
        for m in self.measures:
            if m.name == name:
                return m
        raise UnknownValueError(f"fact {self.name} has no measure {name!r}")

    def add_instance(self, key, refs: dict, values: dict):
        vals = {}
        for m in self.measures:
            if m.name not in values or values[m.name] is None:
                raise DataError(f"fact {self.name}, key {key!r}: missing measure {m.name}")
            v = values[m.name]
            if not isinstance(v, Decimal):
                raise DataError(f"fact {self.name}, key {key!r}: {m.name} must be decimal")
            vals[m.name] = v
        self.instances.append((key, dict(refs), vals))


class Constellation:
    def __init__(self, name: str):
        self.name = name
        self.dimensions: dict[str, Dimension] = {}
        self.facts: dict[str, Fact] = {}
        self.star: dict[str, list[str]] = {}
        self.links: dict[str, dict[str, str]] = {}  # fact -> dim -> fk column
        self._sealed = False

    @property
    def sealed(self) -> bool:
        return self._sealed

    def add_dimension(self, d: Dimension):
        self._mutable()
        if d.name in self.dimensions:
            raise SchemaError(f"duplicate dimension {d.name}")
        self.dimensions[d.name] = d

    def add_fact(self, f: Fact, star: list[str], links: dict[str, str] | None = None):
        self._mutable()
        if f.name in self.facts:
            raise SchemaError(f"duplicate fact {f.name}")
        self.facts[f.name] = f
        self.star[f.name] = list(star)
        self.links[f.name] = dict(links) if links else {
            d: "id_" + fold_ident(d) for d in star
        }

    def dimension(self, name: str) -> Dimension:
        if name not in self.dimensions:
            raise UnknownValueError(f"unknown dimension {name!r}")
        return self.dimensions[name]

    def fact(self, name: str) -> Fact:
        if name not in self.facts:
            raise UnknownValueError(f"unknown fact {name!r}")
        return self.facts[name]

    def seal(self) -> "Constellation":
        """Validate and freeze. Raises ValidationError listing every violation."""
        report = validate_constellation(self)
        if not report.ok:
            raise ValidationError(report)
        self._sealed = True
        return self

    def require_sealed(self):
        if not self._sealed:
            raise OperatorError("constellation is not sealed; load data and seal() first")

    def _mutable(self):
        if self._sealed:
            raise OperatorError("constellation is sealed and immutable")


def validate_constellation(c: Constellation) -> ValidationReport:
    """Check every structural and instance-level invariant; never raises.

    The report is empty iff the constellation is valid, including the
    per-hierarchy strictness of instance data.
    """
    r = ValidationReport()

    for fname, star in c.star.items():
        loc = f"fact {fname}"
        if not star:
            r.add("star-empty", loc, "fact is linked to no dimension")
        for dname in star:
            if dname not in c.dimensions:
                r.add("star-unknown-dimension", loc, f"star references unknown dimension {dname}")
        if fname not in c.facts:
            r.add("star-unknown-fact", "constellation", f"star references unknown fact {fname}")

    for d in c.dimensions.values():
        loc = f"dimension {d.name}"
        seen: dict[object, object] = {}
        for key, row in d.instances.items():
            idv = row[d.id_attr]
            if idv in seen:
                r.add("id-not-unique", loc, f"Id value {idv!r} appears on keys {seen[idv]!r} and {key!r}")
            else:
                seen[idv] = key
            if row.get(ALL) != ALL_VALUE:
                r.add("all-not-constant", loc, f"key {key!r}: All must be {ALL_VALUE!r}")

        if not d.hierarchies:
            r.add("no-hierarchy", loc, "dimension declares no hierarchy")
        for h in d.hierarchies.values():
            hloc = f"{loc} / hierarchy {h.name}"
            for p in h.params:
                if not d.has_attribute(p):
                    r.add("unknown-param", hloc, f"param {p} is not an attribute")
            if len(set(h.params)) != len(h.params):
                r.add("param-repeat", hloc, "params repeat along the path")
            if not h.params or h.params[0] != d.id_attr:
                r.add("path-start", hloc, f"path must start at the Id attribute {d.id_attr}")
            if not h.params or h.params[-1] != ALL:
                r.add("path-end", hloc, "path must end at All")
            param_set = set(h.params)
            for p, weaks in h.weak.items():
                if p not in param_set:
                    r.add("weak-on-nonparam", hloc, f"weak attributes attached to non-param {p}")
                for w in weaks:
                    if not d.has_attribute(w):
                        r.add("weak-unknown", hloc, f"weak attribute {w} is not an attribute")
                    elif w in param_set:
                        r.add("weak-is-param", hloc, f"weak attribute {w} is a param of this hierarchy")

            usable = [p for p in h.params if d.has_attribute(p)]
            for lower, upper in zip(usable, usable[1:]):
                parents: dict[object, set] = {}
                for row in d.instances.values():
                    parents.setdefault(row[lower], set()).add(row[upper])
                for v, ups in sorted(parents.items(), key=lambda kv: str(kv[0])):
                    if len(ups) > 1:
                        r.add(
                            "strictness",
                            hloc,
                            f"({lower}, {upper}): value {v!r} has parents "
                            + ", ".join(sorted(repr(u) for u in ups)),
                        )

    for fname, f in c.facts.items():
        loc = f"fact {fname}"
        star = set(c.star.get(fname, ()))
        for key, refs, _values in f.instances:
            for dname, ref in refs.items():
                if dname not in star:
                    r.add("link-outside-star", loc, f"instance {key!r} links dimension {dname} outside the star")
                    continue
                if dname not in c.dimensions:
                    continue
                if ref not in c.dimensions[dname].instances:
                    r.add("dangling-ref", loc, f"instance {key!r}: {dname} key {ref!r} does not exist")
            for dname in star:
                if dname not in refs:
                    r.add("missing-ref", loc, f"instance {key!r} has no link to dimension {dname}")

    return r


def dom(d: Dimension, p: str) -> set:
    """Active domain: distinct values of attribute p across instances."""
    d.attribute(p)  # raises on unknown attribute
    return {row[p] for row in d.instances.values()}


def parent_of(d: Dimension, h: Hierarchy, p_from: str, p_to: str, v):
    """The unique p_to value co-occurring with v, for p_to coarser than p_from.

    Works across any span of the hierarchy, not just adjacent levels.
    """
    if not h.is_coarser(p_to, p_from):
        raise OperatorError(f"{p_to} is not coarser than {p_from} in hierarchy {h.name}")
    found = set()
    for row in d.instances.values():
        if row[p_from] == v:
            found.add(row[p_to])
    if not found:
        raise UnknownValueError(f"value {v!r} not in the active domain of {p_from}")
    if len(found) > 1:
        raise StrictnessError(p_from, p_to, v, found)
    return next(iter(found))


def select_instances(d: Dimension, pred) -> list:
    """Keys of the instances satisfying pred, in instance order.

    pred may reference any attribute of the dimension, params and weak
    attributes alike.
    """
    unknown = sorted(a for a in P.references(pred) if not d.has_attribute(a))
    if unknown:
        raise P.PredicateError(f"unknown attribute {unknown[0]!r} on dimension {d.name}")
    return [key for key, row in d.instances.items() if P.evaluate(pred, row)]
