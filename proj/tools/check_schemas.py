#!/usr/bin/env python3
"""Validate the shipped meshes, fixture replays and sketches against schemas/."""
import json
import sys
from pathlib import Path

from jsonschema import Draft202012Validator


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent)
    groups = {
        "mesh": sorted((root / "data" / "meshes").glob("*.json")),
        "replay": sorted((root / "data" / "fixtures").glob("*.json")),
        "sketch": sorted((root / "data" / "sketches").glob("*.json")),
    }
    failures = 0
    for name, files in groups.items():
        schema = load(root / "schemas" / f"{name}.schema.json")
        Draft202012Validator.check_schema(schema)
        validator = Draft202012Validator(schema)
        if not files:
            print(f"FAIL {name}: no files found")
            failures += 1
        for path in files:
            errors = sorted(validator.iter_errors(load(path)), key=lambda e: list(e.path))
            for e in errors[:5]:
                print(f"FAIL {path.relative_to(root)}: {'/'.join(map(str, e.path))}: {e.message}")
            failures += bool(errors)
            if not errors:
                print(f"ok   {path.relative_to(root)}")

    # Sanity check that the replay schema rejects something.
    broken = load(root / "data" / "fixtures" / "m000000.json")
    del broken["rounds"][0]["frames"][0]["players"][0]["hp"]
    if Draft202012Validator(load(root / "schemas" / "replay.schema.json")).is_valid(broken):
        print("FAIL replay schema accepts a player without hp")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
