#!/usr/bin/env python3
"""Walk through the star model: loading, validation, and instance roll-ups.

The bundled sample is a one-fact constellation (a star): crop-surface
measurements linked to Dates, Organismes and Geographies, with the
Geographies hierarchy Parcelle > Etat > Region > Pays > Continent > All and
a population-density weak attribute on the country level.
"""

import blendcube as bc
from blendcube.predicate import Not, parse_predicate

c = bc.build_sample_constellation()
print(f"constellation {c.name}: facts {list(c.facts)}, dimensions {list(c.dimensions)}")

report = bc.validate_constellation(c)
print(f"validation: {'clean' if report.ok else report}")

geo = c.dimensions["Geographies"]
hgeo = geo.hierarchies["HGEO"]

# roll-ups work across any span of the hierarchy, not just adjacent levels
print("\nparent_of examples:")
print("  Iowa (Etat) -> Pays:", bc.parent_of(geo, hgeo, "Etat", "Pays", "Iowa"))
print("  P3 (Parcelle) -> Continent:", bc.parent_of(geo, hgeo, "Parcelle", "Continent", "P3"))
print("  Inde (Pays) -> All:", bc.parent_of(geo, hgeo, "Pays", "All", "Inde"))

print("\nactive domains:")
for attr in ("Continent", "Pays", "Etat"):
    print(f"  dom({attr}) = {sorted(bc.dom(geo, attr))}")

# predicates select dimension instances; weak attributes are addressable too
dense = parse_predicate("Densité > 20")
keys = bc.select_instances(geo, dense)
print(f"\nparcels in dense countries: {[geo.instances[k]['Parcelle'] for k in keys]}")

non_us = parse_predicate("Pays <> 'Etats-Unis'")
pos = set(bc.select_instances(geo, non_us))
neg = set(bc.select_instances(geo, Not(non_us)))
print(f"pred / not-pred partition the instances: {sorted(pos)} | {sorted(neg)}")

# a hierarchy is strict: every lower value has exactly one parent. Breaking
# that is caught by validation, here with a parcel split across two states.
broken = bc.Dimension(
    "Geo2",
    [bc.Attribute("Parcelle"), bc.Attribute("Etat")],
    "Parcelle",
    [bc.Hierarchy("H", ["Parcelle", "Etat", "All"])],
)
broken.add_instance(1, {"Parcelle": "P9", "Etat": "Iowa"})
broken.add_instance(2, {"Parcelle": "P9", "Etat": "Minnesota"})
c2 = bc.Constellation("Broken")
c2.add_dimension(broken)
c2.add_fact(bc.Fact("F", [("M", "SUM")]), ["Geo2"])
print("\na non-strict dimension fails validation:")
for violation in bc.validate_constellation(c2).violations:
    print(" ", violation)
