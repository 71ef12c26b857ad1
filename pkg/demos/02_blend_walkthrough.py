#!/usr/bin/env python3
"""The blend operator end to end: recombining two granularity levels.

Scenario: compare US states against whole countries, then fold everything
Asian into one continent value, all at query time, without touching the
stored data. This is the worked two-step chain from the sample analysis.
"""

import blendcube as bc
from blendcube.algebra import BlendRequest, blend, compute_partition, check_valid, display, drilldown
from blendcube.mtable import evaluate, render_text
from blendcube.predicate import parse_predicate

c = bc.build_sample_constellation()

# start coarse, then drill: continents x organism types -> states x varieties
t1 = display(c, "Repartition", [("SUM", "Superficie")], "Organismes", "HORG", "Geographies", "HGEO")
print("T1:")
print(render_text(evaluate(t1, c)))

t2 = drilldown(drilldown(drilldown(t1, "Geographies", "Pays"), "Geographies", "Etat"), "Organismes", "Variete")
print("T2 (after drilldowns):")
print(render_text(evaluate(t2, c)))

# the canonical compact form used below shows only the variety line
t2 = display(
    c, "Repartition", [("SUM", "Superficie")],
    "Organismes", "HORG", "Geographies", "HGEO",
    params_lines=["Variete"], params_columns=["Continent", "Pays", "Etat"],
)

# step 1: keep non-US countries at country grain, US at state grain
r1 = BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Pays <> 'Etats-Unis'"))
part = compute_partition(r1, c)
print(f"step 1 partition: upper values {sorted(part.e_sup)}, lower values {sorted(part.e_inf)}")
print(f"step 1 validity: offending = {check_valid(part, r1, c)}")
ti = blend(r1, c)
print(render_text(evaluate(ti, c)))

# step 2: fold Asia into one continent value, chained on the new level
r2 = BlendRequest(ti, "Geographies", "Continent", "-", "Pays_Etat", "-", parse_predicate("Continent = 'Asie'"))
t3 = blend(r2, c)
print("T3 (continent vs countries vs states on one axis):")
print(render_text(evaluate(t3, c)))

# an invalid predicate: selecting Iowa's country into the upper set while
# Minnesota pushes that same country's states into the lower set
bad = BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Etat = 'Iowa'"))
try:
    blend(bad, c)
except bc.ConstraintViolation as e:
    print(f"rejected as expected, offending upper values: {e.offending_values}")

# stamps choose which of the two levels stay navigable
for stamps in ("--", "+-", "-+", "++"):
    t = blend(BlendRequest(t2, "Geographies", "Pays", stamps[0], "Etat", stamps[1],
                           parse_predicate("Pays <> 'Etats-Unis'")), c)
    print(f"stamps ({stamps[0]},{stamps[1]}): displayed = {t.columns.displayed}")

# special case 1: an empty lower set just removes the lower level
t = blend(BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Densité > 20")), c)
print("empty lower set:", [ct[-1] for ct in evaluate(t, c).col_tuples])

# special case 2: blending at the finest level re-aggregates measures
troot = display(
    c, "Repartition", [("SUM", "Superficie")],
    "Organismes", "HORG", "Geographies", "HGEO",
    params_lines=["Variete"], params_columns=["Etat", "Parcelle"],
)
t = blend(BlendRequest(troot, "Geographies", "Etat", "-", "Parcelle", "-", parse_predicate("Pays = 'Etats-Unis'")), c)
print("root-level blend (US parcels aggregated under their states):")
print(render_text(evaluate(t, c)))
