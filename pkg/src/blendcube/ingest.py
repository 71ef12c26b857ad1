"""Loading constellations from files, plus the bundled dataset generators.

File formats
------------
Schema descriptor (``*.bcs``): line oriented, ``#`` comments, blocks opened by
``dimension NAME`` / ``fact NAME``::

    constellation OGM
    dimension Geographies
      id Parcelle
      attribute Parcelle text
      attribute Densité decimal
      hierarchy HGEO: Parcelle > Etat > ... > All
      weak HGEO Pays: Densité
    fact Repartition
      star Dates, Organismes, Geographies
      measure Superficie SUM
      link Geographies id_geographies

Data files: RFC-4180 CSV, UTF-8, header row first. Column names are the
SQL-folded attribute names plus the surrogate key column (``id_geographies``);
dimension tables carry one column per declared attribute (All excluded), fact
tables carry the key, one foreign-key column per star link and one column per
measure. Attribute values must be present on every row.
"""

from __future__ import annotations

import csv
import random
from decimal import Decimal
from pathlib import Path

from .errors import DataError, SchemaError
from .model import Attribute, Constellation, Dimension, Fact, Hierarchy, Measure
from .values import DECIMAL, TEXT, fold_ident, format_value, parse_value

SCHEMA_FILENAME = "schema.bcs"


# ---------------------------------------------------------------- descriptor


def load_schema_text(text: str, source: str = "<schema>") -> Constellation:
    """Parse a schema descriptor into an unsealed, instance-less constellation."""
    cname = None
    dims: list[dict] = []
    facts: list[dict] = []
    current: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive = tokens[0].lower()

        if directive == "constellation":
            if len(tokens) != 2:
                raise SchemaError("constellation needs exactly one name", lineno)
            if cname is not None:
                raise SchemaError("constellation declared twice", lineno)
            cname = tokens[1]
        elif directive == "dimension":
            if len(tokens) != 2:
                raise SchemaError("dimension needs exactly one name", lineno)
            current = {
                "kind": "dimension",
                "name": tokens[1],
                "attrs": [],
                "id": None,
                "hierarchies": [],
                "weak": [],
                "line": lineno,
            }
            dims.append(current)
        elif directive == "fact":
            if len(tokens) != 2:
                raise SchemaError("fact needs exactly one name", lineno)
            current = {
                "kind": "fact",
                "name": tokens[1],
                "star": [],
                "measures": [],
                "links": {},
                "line": lineno,
            }
            facts.append(current)
        elif directive == "id":
            _expect(current, "dimension", directive, lineno)
            if len(tokens) != 2:
                raise SchemaError("id needs exactly one attribute name", lineno)
            current["id"] = tokens[1]
        elif directive == "attribute":
            _expect(current, "dimension", directive, lineno)
            if len(tokens) != 3 or tokens[2] not in (TEXT, DECIMAL):
                raise SchemaError("attribute syntax: attribute NAME text|decimal", lineno)
            current["attrs"].append(Attribute(tokens[1], tokens[2]))
        elif directive == "hierarchy":
            _expect(current, "dimension", directive, lineno)
            head, sep, tail = line.partition(":")
            if not sep:
                raise SchemaError("hierarchy syntax: hierarchy NAME: P1 > P2 > ... > All", lineno)
            head_tokens = head.split()
            if len(head_tokens) != 2:
                raise SchemaError("hierarchy needs exactly one name before ':'", lineno)
            params = [p.strip() for p in tail.split(">")]
            if any(not p for p in params) or len(params) < 2:
                raise SchemaError("hierarchy path needs at least Id > All", lineno)
            current["hierarchies"].append((head_tokens[1], params, lineno))
        elif directive == "weak":
            _expect(current, "dimension", directive, lineno)
            head, sep, tail = line.partition(":")
            if not sep:
                raise SchemaError("weak syntax: weak HIER PARAM: ATTR[, ATTR...]", lineno)
            head_tokens = head.split()
            if len(head_tokens) != 3:
                raise SchemaError("weak needs a hierarchy and a param before ':'", lineno)
            weaks = [w.strip() for w in tail.split(",") if w.strip()]
            if not weaks:
                raise SchemaError("weak lists no attributes", lineno)
            current["weak"].append((head_tokens[1], head_tokens[2], tuple(weaks), lineno))
        elif directive == "star":
            _expect(current, "fact", directive, lineno)
            names = [n.strip(",") for n in tokens[1:] if n.strip(",")]
            if not names:
                raise SchemaError("star lists no dimensions", lineno)
            current["star"].extend(names)
        elif directive == "measure":
            _expect(current, "fact", directive, lineno)
            if len(tokens) != 3:
                raise SchemaError("measure syntax: measure NAME AGG", lineno)
            try:
                current["measures"].append(Measure(tokens[1], tokens[2].upper()))
            except SchemaError as e:
                raise SchemaError(str(e), lineno) from None
        elif directive == "link":
            _expect(current, "fact", directive, lineno)
            if len(tokens) != 3:
                raise SchemaError("link syntax: link DIMENSION FK_COLUMN", lineno)
            current["links"][tokens[1]] = tokens[2]
        else:
            raise SchemaError(f"unknown directive {tokens[0]!r}", lineno)

    if cname is None:
        raise SchemaError(f"{source}: no constellation declared")

    c = Constellation(cname)
    for d in dims:
        if d["id"] is None:
            raise SchemaError(f"dimension {d['name']}: no id attribute", d["line"])
        try:
            dim = Dimension(d["name"], d["attrs"], d["id"])
        except SchemaError as e:
            raise SchemaError(str(e), d["line"]) from None
        for hname, params, lineno in d["hierarchies"]:
            for p in params:
                if p != "All" and not dim.has_attribute(p):
                    raise SchemaError(
                        f"hierarchy {hname}: param {p!r} is not an attribute of {d['name']}",
                        lineno,
                    )
            dim.add_hierarchy(Hierarchy(hname, params))
        for hname, param, weaks, lineno in d["weak"]:
            h = dim.hierarchies.get(hname)
            if h is None:
                raise SchemaError(f"weak attributes on unknown hierarchy {hname}", lineno)
            for w in weaks:
                if not dim.has_attribute(w):
                    raise SchemaError(f"weak attribute {w!r} is not an attribute of {d['name']}", lineno)
            h.weak[param] = tuple(weaks)
        c.add_dimension(dim)

    for f in facts:
        if not f["measures"]:
            raise SchemaError(f"fact {f['name']}: no measures", f["line"])
        fact = Fact(f["name"], f["measures"])
        for dname in f["star"]:
            if dname not in c.dimensions:
                raise SchemaError(f"fact {f['name']}: star references unknown dimension {dname}", f["line"])
            if dname not in f["links"]:
                raise SchemaError(
                    f"fact {f['name']}: dangling link, no foreign-key column for dimension {dname}",
                    f["line"],
                )
        for dname in f["links"]:
            if dname not in f["star"]:
                raise SchemaError(f"fact {f['name']}: link to {dname} outside the star", f["line"])
        c.add_fact(fact, f["star"], f["links"])

    return c


def _expect(current, kind, directive, lineno):
    if current is None or current["kind"] != kind:
        raise SchemaError(f"{directive!r} outside a {kind} block", lineno)


def load_schema(path) -> Constellation:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read schema {path}: {e}") from None
    return load_schema_text(text, source=str(path))


# ----------------------------------------------------------------- CSV load


def _parse_key(raw: str):
    raw = raw.strip()
    if raw == "":
        raise DataError("missing key value")
    if raw.lstrip("-").isdigit():
        return int(raw)
    return raw


def load_csv(c: Constellation, table: str, path) -> int:
    """Append rows from a CSV file to the named dimension or fact table.

    Returns the number of loaded rows. Strictness and reference resolution are
    checked later, at seal time; per-row problems (missing columns, nulls,
    type mismatches) fail immediately.
    """
    target = _resolve_table(c, table)
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None

    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        positions = {name: i for i, name in enumerate(header)}

        if isinstance(target, Dimension):
            needed = [target.key_column] + [
                fold_ident(a.name) for a in target.attributes if a.name != "All"
            ]
        else:
            fact_links = c.links[target.name]
            needed = [target.key_column] + [fact_links[d] for d in c.star[target.name]] + [
                fold_ident(m.name) for m in target.measures
            ]
        missing = [col for col in needed if col not in positions]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")

        count = 0
        for rowno, row in enumerate(reader, 2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            where = f"{path}:{rowno}"
            try:
                if isinstance(target, Dimension):
                    key = _parse_key(row[positions[target.key_column]])
                    values = {}
                    for a in target.attributes:
                        if a.name == "All":
                            continue
                        raw = row[positions[fold_ident(a.name)]]
                        values[a.name] = parse_value(raw, a.vtype, where=f"{where} {a.name}")
                    target.add_instance(key, values)
                else:
                    key = _parse_key(row[positions[target.key_column]])
                    refs = {
                        d: _parse_key(row[positions[c.links[target.name][d]]])
                        for d in c.star[target.name]
                    }
                    values = {
                        m.name: parse_value(
                            row[positions[fold_ident(m.name)]], DECIMAL, where=f"{where} {m.name}"
                        )
                        for m in target.measures
                    }
                    target.add_instance(key, refs, values)
            except IndexError:
                raise DataError(f"{where}: short row") from None
            count += 1
    return count


def _resolve_table(c: Constellation, table: str):
    wanted = fold_ident(table)
    for d in c.dimensions.values():
        if fold_ident(d.name) == wanted:
            return d
    for f in c.facts.values():
        if fold_ident(f.name) == wanted:
            return f
    raise DataError(f"no dimension or fact named {table!r}")


def load_dataset(directory) -> Constellation:
    """Load schema.bcs plus one CSV per table from a directory, then seal."""
    directory = Path(directory)
    c = load_schema(directory / SCHEMA_FILENAME)
    for name in list(c.dimensions) + list(c.facts):
        load_csv(c, name, directory / (fold_ident(name) + ".csv"))
    return c.seal()


def write_dataset(c: Constellation, directory, schema_text: str) -> list[Path]:
    """Write schema.bcs, one CSV per table, and the star DDL; returns paths."""
    from .sqlgen import generate_star_ddl

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / SCHEMA_FILENAME]
    written[0].write_text(schema_text, encoding="utf-8")
    if c.sealed:
        ddl = directory / "star_ddl.sql"
        ddl.write_text("\n".join(a.text for a in generate_star_ddl(c)) + "\n", encoding="utf-8")
        written.append(ddl)

    for d in c.dimensions.values():
        p = directory / (fold_ident(d.name) + ".csv")
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            attrs = [a for a in d.attributes if a.name != "All"]
            w.writerow([d.key_column] + [fold_ident(a.name) for a in attrs])
            for key, row in d.instances.items():
                w.writerow([key] + [format_value(row[a.name]) for a in attrs])
        written.append(p)

    for f in c.facts.values():
        p = directory / (fold_ident(f.name) + ".csv")
        links = c.links[f.name]
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(
                [f.key_column]
                + [links[d] for d in c.star[f.name]]
                + [fold_ident(m.name) for m in f.measures]
            )
            for key, refs, values in f.instances:
                w.writerow(
                    [key]
                    + [refs[d] for d in c.star[f.name]]
                    + [format_value(values[m.name]) for m in f.measures]
                )
        written.append(p)
    return written


# ------------------------------------------------------------ sample dataset

SAMPLE_SCHEMA = """\
constellation OGM

dimension Dates
  id MoisN
  attribute MoisN text
  attribute MoisL text
  attribute Trimestre text
  attribute Annee text
  attribute Quadriennal text
  hierarchy HDAT: MoisN > MoisL > Trimestre > Annee > Quadriennal > All

dimension Organismes
  id Variete
  attribute Variete text
  attribute Categorie text
  attribute TypeOrganisme text
  hierarchy HORG: Variete > Categorie > TypeOrganisme > All

dimension Geographies
  id Parcelle
  attribute Parcelle text
  attribute Etat text
  attribute Region text
  attribute Pays text
  attribute Densité decimal
  attribute Continent text
  hierarchy HGEO: Parcelle > Etat > Region > Pays > Continent > All
  weak HGEO Pays: Densité

fact Repartition
  star Dates, Organismes, Geographies
  measure Superficie SUM
  link Dates id_dates
  link Organismes id_organismes
  link Geographies id_geographies
"""

# Surface per variety and state; the engine must reproduce these exactly at
# the (Variete x Etat) grain. Missing pairs stay empty.
SAMPLE_STATE_TABLE = {
    "GTS-Soja": {"Golap": 400, "Iowa": 1500, "Minnesota": 2500, "Penjab": 300, "Rajasthan": 200},
    "Mais Doux": {"Golap": 300, "Minnesota": 500, "Maharashtra": 300, "Penjab": 1300, "Rajasthan": 800},
    "MaisBT176": {"Golap": 200, "Minnesota": 1500, "Maharashtra": 200, "Penjab": 900, "Rajasthan": 600},
    "MCN810": {"Golap": 200, "Iowa": 800, "Minnesota": 3000, "Maharashtra": 800, "Penjab": 800, "Rajasthan": 400},
    "Soja#8": {"Golap": 500, "Iowa": 200, "Minnesota": 250, "Maharashtra": 1000, "Penjab": 700, "Rajasthan": 100},
}

SAMPLE_GEOGRAPHY_ROWS = [
    # key, parcelle, etat, region, pays, densite, continent
    (1, "P1", "Iowa", "Midwest", "Etats-Unis", "31.15", "Amerique"),
    (2, "P2", "Iowa", "Midwest", "Etats-Unis", "31.15", "Amerique"),
    (3, "P3", "Golap", "Centre-Ouest", "Bresil", "21.60", "Amerique"),
    (4, "P4", "Maharashtra", "Inde-Ouest", "Inde", "300.24", "Asie"),
    (5, "P5", "Penjab", "Inde-Nord", "Inde", "300.24", "Asie"),
    (6, "P6", "Rajasthan", "Inde-Nord", "Inde", "300.24", "Asie"),
    (7, "P7", "Minnesota", "Midwest", "Etats-Unis", "31.15", "Amerique"),
]

SAMPLE_ORGANISM_ROWS = [
    (1, "GTS-Soja", "Soja-OGM", "OGM"),
    (2, "Mais Doux", "Mais-Classique", "Classique"),
    (3, "MaisBT176", "Mais-OGM", "OGM"),
    (4, "MCN810", "Mais-OGM", "OGM"),
    (5, "Soja#8", "Soja-Classique", "Classique"),
]

SAMPLE_DATE_ROWS = [
    (1, "2008-01", "Janvier 2008", "2008-T1", "2008", "2005-2008"),
    (2, "2008-02", "Fevrier 2008", "2008-T1", "2008", "2005-2008"),
]

SAMPLE_ROW_COUNTS = {"dates": 2, "organismes": 5, "geographies": 7, "repartition": 54}


def build_sample_constellation() -> Constellation:
    """The bundled OGM star with parcel-level data rolling up to the reference
    state table. Each (variety, state) surface is split over the state's
    parcels and the two months, so aggregation is actually exercised."""
    c = load_schema_text(SAMPLE_SCHEMA, source="<sample>")

    dates = c.dimensions["Dates"]
    for key, moisn, moisl, trim, annee, quad in SAMPLE_DATE_ROWS:
        dates.add_instance(
            key,
            {"MoisN": moisn, "MoisL": moisl, "Trimestre": trim, "Annee": annee, "Quadriennal": quad},
        )

    orgs = c.dimensions["Organismes"]
    for key, variete, cat, typo in SAMPLE_ORGANISM_ROWS:
        orgs.add_instance(key, {"Variete": variete, "Categorie": cat, "TypeOrganisme": typo})

    geo = c.dimensions["Geographies"]
    state_parcels: dict[str, list[int]] = {}
    for key, parcelle, etat, region, pays, densite, continent in SAMPLE_GEOGRAPHY_ROWS:
        geo.add_instance(
            key,
            {
                "Parcelle": parcelle,
                "Etat": etat,
                "Region": region,
                "Pays": pays,
                "Densité": Decimal(densite),
                "Continent": continent,
            },
        )
        state_parcels.setdefault(etat, []).append(key)

    org_keys = {variete: key for key, variete, _cat, _typo in SAMPLE_ORGANISM_ROWS}
    fact = c.facts["Repartition"]
    fact_key = 0
    check: dict[tuple[str, str], int] = {}
    for variete in sorted(SAMPLE_STATE_TABLE):
        for etat in sorted(SAMPLE_STATE_TABLE[variete]):
            total = SAMPLE_STATE_TABLE[variete][etat]
            parcels = state_parcels[etat]
            first = (total * 3) // 5
            parts = [(parcels[0], 1, first), (parcels[-1], 2, total - first)]
            for geo_key, date_key, amount in parts:
                fact_key += 1
                fact.add_instance(
                    fact_key,
                    {"Dates": date_key, "Organismes": org_keys[variete], "Geographies": geo_key},
                    {"Superficie": Decimal(amount)},
                )
                check[(variete, etat)] = check.get((variete, etat), 0) + amount

    # independent roll-up check before the dataset is used or written anywhere
    expected = {
        (v, e): total
        for v, states in SAMPLE_STATE_TABLE.items()
        for e, total in states.items()
    }
    if check != expected:
        raise DataError("sample generator no longer rolls up to the reference state table")

    return c.seal()


def generate_sample_dataset(directory) -> list[Path]:
    """Write the bundled sample dataset (schema.bcs + CSVs) into a directory."""
    c = build_sample_constellation()
    return write_dataset(c, directory, SAMPLE_SCHEMA)


# ------------------------------------------------------------- bench dataset

BENCH_MIN_GEO = 10
BENCH_MAX_GEO = 100
BENCH_ORGANISM_COUNT = 250

# predicate text per benchmark scenario; the stored PaysEtatM column always
# materializes the matching recombination. Predicates stick to displayed
# params (country names encode their side) so the SQL translation applies.
BENCH_PREDICATES = {
    "homogeneous": "Pays < 'B'",
    "skewed": "Pays = 'A-pays001'",
    "empty_inf": "TRUE",
}

BENCH_SCHEMA = """\
constellation BENCH

dimension Organismes
  id Variete
  attribute Variete text
  attribute TypeOrganisme text
  hierarchy HORG: Variete > TypeOrganisme > All

dimension Geographies
  id Parcelle
  attribute Parcelle text
  attribute Etat text
  attribute Pays text
  attribute Groupe text
  attribute PaysEtatM text
  hierarchy HGEO: Parcelle > Etat > Pays > All
  weak HGEO Pays: Groupe
  hierarchy HMAT: Parcelle > PaysEtatM > All

fact Repartition
  star Organismes, Geographies
  measure Superficie SUM
  link Organismes id_organismes
  link Geographies id_geographies
"""


def generate_bench_dataset(
    n_geo: int, seed: int = 0, allow_large: bool = False, scenario: str = "homogeneous"
) -> Constellation:
    """Random constellation shaped like the cost experiment.

    250 organisms, n_geo parcels, one fact row per (organism, parcel). Each
    country has two states with one parcel each; countries are split into an
    A side (selected by ``Groupe = 'A'``, contributing country values) and a B
    side (contributing state values) so the two recombined value sets have
    homogeneous sizes (within one of each other). The recombined level for the
    chosen scenario is also precomputed into the stored PaysEtatM attribute,
    which the HMAT hierarchy exposes for the materialized series.
    """
    if n_geo < BENCH_MIN_GEO:
        raise DataError(f"n_geo must be at least {BENCH_MIN_GEO}")
    if n_geo > BENCH_MAX_GEO and not allow_large:
        raise DataError(f"n_geo above {BENCH_MAX_GEO} needs the allow-large override")
    if scenario not in BENCH_PREDICATES:
        raise DataError(f"unknown bench scenario {scenario!r}")

    rng = random.Random(seed)
    c = load_schema_text(BENCH_SCHEMA, source="<bench>")

    # Two parcels per country, one state per parcel. With n_a = round(n/3)
    # A-countries, the recombined sets have sizes n_a and n - 2*n_a, which
    # differ by at most one for every n.
    n_a = round(n_geo / 3)

    geo = c.dimensions["Geographies"]
    e_sup: set[str] = set()
    e_inf: set[str] = set()
    for i in range(n_geo):
        country_idx = i // 2
        side = "A" if country_idx < n_a else "B"
        pays = f"{side}-pays{country_idx + 1:03d}"
        etat = f"{side}-etat{country_idx + 1:03d}{'ab'[i % 2]}"
        if scenario == "homogeneous":
            in_sup = side == "A"
        elif scenario == "skewed":
            in_sup = pays == "A-pays001"
        else:  # empty_inf
            in_sup = True
        geo.add_instance(
            i + 1,
            {
                "Parcelle": f"P{i + 1:04d}",
                "Etat": etat,
                "Pays": pays,
                "Groupe": side,
                "PaysEtatM": pays if in_sup else etat,
            },
        )
        (e_sup if side == "A" else e_inf).add(pays if side == "A" else etat)
    if scenario == "homogeneous" and abs(len(e_sup) - len(e_inf)) > 1:
        raise DataError(
            f"bench partition not homogeneous: |E_sup|={len(e_sup)} |E_inf|={len(e_inf)}"
        )

    orgs = c.dimensions["Organismes"]
    for i in range(BENCH_ORGANISM_COUNT):
        orgs.add_instance(
            i + 1, {"Variete": f"V{i + 1:03d}", "TypeOrganisme": f"Type{i % 5 + 1}"}
        )

    fact = c.facts["Repartition"]
    key = 0
    for o in range(1, BENCH_ORGANISM_COUNT + 1):
        for g in range(1, n_geo + 1):
            key += 1
            fact.add_instance(
                key,
                {"Organismes": o, "Geographies": g},
                {"Superficie": Decimal(rng.randint(1, 1000))},
            )
    return c.seal()
