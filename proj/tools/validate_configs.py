"""Validate scenario configs against the shipped JSON schemas."""

import json
import sys
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def load_registry(schema_dir: Path) -> Registry:
    resources = []
    for path in schema_dir.glob("*.schema.json"):
        resources.append((path.name, Resource.from_contents(json.loads(path.read_text()))))
    return Registry().with_resources(resources)


def main(argv: list[str]) -> int:
    if len(argv) < 3:
        print("usage: validate_configs.py SCHEMA_DIR CONFIG...", file=sys.stderr)
        return 2
    schema_dir = Path(argv[1])
    registry = load_registry(schema_dir)
    for path in schema_dir.glob("*.schema.json"):
        Draft202012Validator.check_schema(json.loads(path.read_text()))
    schema = json.loads((schema_dir / "scenario-config.schema.json").read_text())
    validator = Draft202012Validator(schema, registry=registry)
    failed = 0
    for name in argv[2:]:
        errors = sorted(validator.iter_errors(json.loads(Path(name).read_text())), key=lambda e: e.json_path)
        for e in errors:
            print(f"{name}: {e.json_path}: {e.message}")
        failed += bool(errors)
        if not errors:
            print(f"{name}: ok")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
