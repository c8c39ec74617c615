#!/usr/bin/env python3
"""Validate scenario files against docs/scenario.schema.json."""

import json
import sys
from pathlib import Path

try:
    import jsonschema
except ImportError:
    print("jsonschema is not installed; skipping")
    sys.exit(77)


def main(argv):
    root = Path(__file__).resolve().parent.parent
    schema = json.loads((root / "docs" / "scenario.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    paths = [Path(p) for p in argv[1:]] or sorted((root / "scenarios").glob("*.scn.json"))
    bad = 0
    for path in paths:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors:
            print(f"{path.name}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        bad += bool(errors)
    print(f"{len(paths) - bad}/{len(paths)} scenarios match the schema")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
