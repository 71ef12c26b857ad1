#!/usr/bin/env python3
"""R-OLAP translation: star DDL, table queries, blend queries, and a live
equivalence check against sqlite."""

import sqlite3

import blendcube as bc
from blendcube import dbexec
from blendcube.algebra import BlendRequest, blend, display
from blendcube.mtable import evaluate
from blendcube.predicate import parse_predicate
from blendcube.sqlgen import generate_blend_query, generate_star_ddl, generate_tm_query

c = bc.build_sample_constellation()

print("star schema DDL:")
for artifact in generate_star_ddl(c):
    print(artifact.text)
    print()

t2 = display(
    c, "Repartition", [("SUM", "Superficie")],
    "Organismes", "HORG", "Geographies", "HGEO",
    params_lines=["Variete"], params_columns=["Continent", "Pays", "Etat"],
)
base = generate_tm_query(t2, c)
print("table query:")
print(base.text)

r1 = BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Pays <> 'Etats-Unis'"))
q1 = generate_blend_query(base, r1)
print("\nblend query (two complementary branches, regrouped):")
print(generate_blend_query("t2", r1).text)  # compact form over a stored relation

# execute the full chain on sqlite and compare with the in-memory grids
conn = sqlite3.connect(":memory:")
dbexec.load_constellation(conn, c)

ti = blend(r1, c)
r2 = BlendRequest(ti, "Geographies", "Continent", "-", "Pays_Etat", "-", parse_predicate("Continent = 'Asie'"))
q2 = generate_blend_query(q1, r2)
t3 = blend(r2, c)

for label, artifact, table in (("T2", base, t2), ("step 1", q1, ti), ("step 2", q2, t3)):
    rows = dbexec.fetch(conn, artifact)
    same = dbexec.rows_multiset(rows) == dbexec.grid_multiset(evaluate(table, c))
    print(f"{label}: sqlite rows == in-memory grid? {same}")
