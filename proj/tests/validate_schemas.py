#!/usr/bin/env python3
# Validate every JSON output of the cli against docs/schemas. Exit 77 (skip) without jsonschema.
import json
import pathlib
import subprocess
import sys
import tempfile

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError:
    print("jsonschema not available, skipping")
    sys.exit(77)

cao, corpus, schemas = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])

resources = {}
for p in schemas.glob("*.json"):
    doc = json.loads(p.read_text())
    resources[p.name] = Resource.from_contents(doc)
registry = Registry().with_resources(resources.items())


def validator(name):
    schema = resources[name].contents
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema, registry=registry)


def c(name):
    return str(corpus / name)


tmp = tempfile.TemporaryDirectory()
mso_false = pathlib.Path(tmp.name) / "false.mso"
mso_false.write_text("T.test : [last] |- false;\n")

cases = [
    ("check.json", ["check", c("flagship.cao")]),
    ("check.json", ["check", c("broken_sign.cao")]),
    ("run.json", ["run", c("await_bool.cao"), "--seed", "7"]),
    ("run.json", ["run", c("ema.cao")]),
    ("explore.json", ["explore", c("getif.cao")]),
    ("explore.json", ["explore", c("running.cao")]),
    ("mc.json", ["mc", c("flagship.cao"), c("flagship.mso")]),
    ("mc.json", ["mc", c("flagship.cao"), str(mso_false)]),
    ("p2.json", ["p2", c("flagship.cao"), "--site", "0"]),
    ("p2.json", ["p2", c("mutual.cao")]),
    ("prove.json", ["prove", c("two_types.cao"), c("two_types.btype")]),
    ("prove.json", ["prove", c("broken_callee.cao"), c("flagship.btype")]),
    ("prove.json", ["prove", c("loop_sum.cao"), c("loop_sum.btype")]),
    ("oracle.json", ["oracle", c("flagship.cao"), c("flagship.btype"), "--seeds", "5"]),
    ("oracle.json", ["oracle", c("broken_sign.cao"), c("flagship.btype")]),
]

failures = 0
for schema, args in cases:
    out = subprocess.run([cao, *args, "--format", "json"], capture_output=True, text=True)
    label = " ".join(args)
    try:
        errs = sorted(validator(schema).iter_errors(json.loads(out.stdout)), key=str)
    except json.JSONDecodeError as e:
        errs = [f"not json: {e}"]
    if errs:
        failures += 1
        print(f"FAIL {schema} <- {label}")
        for e in errs[:5]:
            print("   ", getattr(e, "message", e))
    else:
        print(f"ok   {schema} <- {label}")

tmp.cleanup()
sys.exit(1 if failures else 0)
