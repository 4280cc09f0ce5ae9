#!/usr/bin/env python3
"""Regenerates the two synthetic fixture meshes in data/meshes/.

Each map is a grid of cells; a cell belongs to one place and is split into
one or more axis-aligned areas. Empty cells are holes in the mesh. One extra
area per map sits on an upper level above another place's cell.
"""
import json
import pathlib

MAPS = {
    "de_inferno_s": {
        "origin": (-2400, -2400),
        "cell": 800,
        "split": 2,
        # row 0 is the bottom of the map (lowest y)
        "rows": [
            ["TSpawn", "TSpawn", "Alley", None, "Boiler", "Boiler"],
            ["TSpawn", "TRamp", "SecondMid", "Apartments", "Balcony", None],
            ["SecondMid", "TRamp", "TopMid", "Apartments", "Pit", "Graveyard"],
            ["Banana", None, "TopMid", "Mid", "BombsiteA", "BombsiteA"],
            ["Banana", "Banana", "Quad", "Arch", "Library", "CTSpawn"],
            ["Construction", "BombsiteB", "BombsiteB", "Coffins", "CTSpawn", "CTSpawn"],
        ],
        "z": {"TSpawn": 0, "Alley": 20, "Boiler": 40, "TRamp": 30, "SecondMid": 60,
              "Apartments": 0, "Balcony": 120, "TopMid": 70, "Pit": -40,
              "Graveyard": 80, "Banana": 100, "Mid": 80, "BombsiteA": 150,
              "Quad": 160, "Arch": 150, "Library": 150, "CTSpawn": 140,
              "Construction": 170, "BombsiteB": 160, "Coffins": 170},
        # (place, row, col, x-fraction range, y-fraction range, z)
        "upper": ("Balcony", 1, 3, (0.25, 0.75), (0.25, 0.75), 120),
    },
    "de_dust_s": {
        "origin": (-2250, -2250),
        "cell": 900,
        "split": 1,
        "rows": [
            ["TunnelStairs", "TSpawn", "TSpawn", "OutsideLong", "Pit"],
            ["UpperTunnel", None, "Mid", "OutsideLong", "LongDoors"],
            ["UpperTunnel", "LowerTunnel", "Mid", "ShortStairs", "LongA"],
            ["BombsiteB", "MidDoors", "XBox", "Catwalk", "ARamp"],
            ["BombsiteB", "BDoors", "CTSpawn", "CTSpawn", "BombsiteA"],
        ],
        "z": {"TunnelStairs": -20, "TSpawn": 0, "OutsideLong": 10, "Pit": -60,
              "UpperTunnel": 20, "Mid": 0, "LongDoors": 20, "LowerTunnel": -30,
              "ShortStairs": 60, "LongA": 40, "BombsiteB": 30, "MidDoors": 10,
              "XBox": 20, "Catwalk": 150, "ARamp": 60, "BDoors": 30,
              "CTSpawn": 50, "BombsiteA": 90},
        "upper": ("Catwalk", 2, 2, (0.5, 1.0), (0.5, 1.0), 200),
    },
}


def touches(a, b):
    ox = min(a["x_max"], b["x_max"]) - max(a["x_min"], b["x_min"])
    oy = min(a["y_max"], b["y_max"]) - max(a["y_min"], b["y_min"])
    return (ox == 0 and oy > 0) or (oy == 0 and ox > 0) or (ox > 0 and oy > 0)


def build(name, spec):
    ox, oy = spec["origin"]
    cell = spec["cell"]
    split = spec["split"]
    areas = []
    places = []
    next_id = 1
    for r, row in enumerate(spec["rows"]):
        for c, place in enumerate(row):
            if place is None:
                continue
            if place not in places:
                places.append(place)
            sub = cell // split
            for i in range(split):
                for j in range(split):
                    x0 = ox + c * cell + i * sub
                    y0 = oy + r * cell + j * sub
                    areas.append({"id": next_id, "x_min": x0, "y_min": y0,
                                  "x_max": x0 + sub, "y_max": y0 + sub,
                                  "z_center": spec["z"][place], "place_name": place})
                    next_id += 1
    place, r, c, fx, fy, z = spec["upper"]
    x0 = ox + c * cell
    y0 = oy + r * cell
    areas.append({"id": next_id, "x_min": x0 + fx[0] * cell, "y_min": y0 + fy[0] * cell,
                  "x_max": x0 + fx[1] * cell, "y_max": y0 + fy[1] * cell,
                  "z_center": z, "place_name": place})
    edges = []
    for i, a in enumerate(areas):
        for b in areas[i + 1:]:
            if touches(a, b):
                edges.append([a["id"], b["id"]])
    return {"map_name": name, "places": [{"name": p} for p in places],
            "areas": areas, "edges": edges}


if __name__ == "__main__":
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "meshes"
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in MAPS.items():
        doc = build(name, spec)
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print(name, len(doc["places"]), "places", len(doc["areas"]), "areas",
              len(doc["edges"]), "edges")
