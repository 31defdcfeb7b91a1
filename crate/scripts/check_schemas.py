"""Validate bundled data files against docs/schemas."""
import json
import pathlib
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

root = pathlib.Path(__file__).resolve().parent.parent
schemas = {p.name: json.loads(p.read_text()) for p in (root / "docs/schemas").glob("*.json")}
registry = Registry().with_resources(
    (name, Resource.from_contents(s)) for name, s in schemas.items()
)


def check(schema, path, many=False):
    data = json.loads(path.read_text())
    v = Draft202012Validator(schemas[schema], registry=registry)
    items = data if many else [data]
    errors = [e for item in items for e in v.iter_errors(item)]
    for e in errors:
        print(f"{path}: {e.json_path}: {e.message}")
    return not errors


data = root / "crates/core/data"
ok = all([
    check("instance.schema.json", data / "instances/haus_toys.json"),
    check("instance.schema.json", data / "synthetic/truth.json", many=True),
    check("result.schema.json", data / "synthetic/generated.json", many=True),
    check("fixture.schema.json", data / "fixtures/haus_toys.json"),
    check("labeled.schema.json", data / "cue_regression.json"),
    check("labeled.schema.json", data / "known_ambiguities.json"),
    check("model.schema.json", root / "crates/core/tests/golden/haus_toys.model.json"),
])
sys.exit(0 if ok else 1)
