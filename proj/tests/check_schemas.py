"""Runs each CLI subcommand once and validates its JSON output against schemas/."""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

cli, schema_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
work.mkdir(parents=True, exist_ok=True)

schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())


def check(instance, name):
    jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(instance)
    print(f"ok  {name}")


def run(*args, expect=0):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc


(work / "data.csv").write_text("x,y\n" + "".join(f"{(i + 0.5) / 20},{(i % 5) * 0.3}\n" for i in range(20)))
data = str(work / "data.csv")

check(json.loads(run("fit", "--kind", "smoothing", "--lambda", "1e-3", "--data", data).stdout), "fit.schema.json")
check(json.loads(run("fit", "--kind", "pspline", "--rho", "1", "--data", data).stdout), "fit.schema.json")
run("select", "--kind", "smoothing", "--data", data, "--out", str(work / "sel"))
check(json.loads((work / "sel" / "criterion_table.json").read_text()), "criterion_table.schema.json")
run("simulate", "--replicates", "3", "--out", str(work / "sim"))
summary = json.loads((work / "sim" / "summary.json").read_text())
check(summary, "summary.schema.json")
check(summary["config"], "gu_config.schema.json")
check(json.loads(run("validate", "--suite", "duality").stdout), "validation.schema.json")
check(json.loads(run("fit", "--kind", "smoothing", "--lambda", "-1", "--data", data, expect=4).stderr), "error.schema.json")
