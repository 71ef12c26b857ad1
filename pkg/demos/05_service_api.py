#!/usr/bin/env python3
"""Drive the HTTP facade the way the web frontend does.

Uses the in-process test client; `blendcube serve` runs the same app over
uvicorn for real browsers.
"""

import json

from fastapi.testclient import TestClient

from blendcube.service import create_app

client = TestClient(create_app())

sid = client.post("/sessions", json={"dataset": "sample"}).json()["session_id"]
print(f"session: {sid}")

schema = client.get(f"/sessions/{sid}/schema").json()
print(f"schema: fact {schema['facts'][0]['name']}, dimensions {schema['facts'][0]['dimensions']}")

ops = [
    {
        "op": "display",
        "fact": "Repartition",
        "measures": [{"fn": "SUM", "measure": "Superficie"}],
        "lines": {"dimension": "Organismes", "hierarchy": "HORG", "params": ["Variete"]},
        "columns": {"dimension": "Geographies", "hierarchy": "HGEO", "params": ["Continent", "Pays", "Etat"]},
    },
    {"op": "blend", "dimension": "Geographies", "p_sup": "Pays", "s_sup": "-",
     "p_inf": "Etat", "s_inf": "-", "pred": "Pays <> 'Etats-Unis'"},
    {"op": "blend", "dimension": "Geographies", "p_sup": "Continent", "s_sup": "-",
     "p_inf": "Pays_Etat", "s_inf": "-", "pred": "Continent = 'Asie'"},
]
for op in ops:
    r = client.post(f"/sessions/{sid}/ops", json=op)
    print(f"{op['op']}: {r.status_code}")

doc = client.get(f"/sessions/{sid}/table").json()
table = doc["table"]
print("column leaves:", [n["value"] for n in table["col_headers"]])
print("first row cells:", json.dumps(table["cells"][0]))

# a predicate that splits a state's country across both sides is refused
bad = {"op": "blend", "dimension": "Geographies", "p_sup": "Continent_Pays_Etat", "s_sup": "-",
       "p_inf": "Parcelle", "s_inf": "-", "pred": "Parcelle = 'P1'"}
r = client.post(f"/sessions/{sid}/ops", json={**ops[1], "pred": "Etat = 'Iowa'"})
print("invalid blend:", r.status_code, r.json()["detail"])

print("sql for the current table:")
print(client.get(f"/sessions/{sid}/sql").json()["sql"][:200], "...")
