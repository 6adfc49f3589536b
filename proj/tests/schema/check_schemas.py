"""Validates builtin web files and analyze --format json output against docs/*.schema.json."""
import json
import pathlib
import subprocess
import sys

import jsonschema

exe, docs, webs = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
web_schema = json.loads((docs / "web.schema.json").read_text())
report_schema = json.loads((docs / "report.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(web_schema)
jsonschema.Draft202012Validator.check_schema(report_schema)

for path in sorted(webs.glob("*.json")):
    jsonschema.validate(json.loads(path.read_text()), web_schema)
mixed = subprocess.run([exe, "examples", "show", "mixed6_c3", "--seed", "5"], capture_output=True, text=True, check=True)
jsonschema.validate(json.loads(mixed.stdout), web_schema)

runs = [
    (["--builtin", "bol"], 1),
    (["--builtin", "w8", "--const", "eps=2"], 1),
    (["--builtin", "linear_pushforward_n2"], 0),
    (["--builtin", "mixed6_c3", "--seed", "2", "--samples", "3"], None),
    ([str(webs / "linear5_c3.json"), "--samples", "2"], 0),
]
for args, code in runs:
    out = subprocess.run([exe, "analyze", *args, "--format", "json"], capture_output=True, text=True)
    if code is not None and out.returncode != code:
        sys.exit(f"{args}: exit {out.returncode}, expected {code}")
    report = json.loads(out.stdout)
    jsonschema.validate(report, report_schema)
    # the report must survive a serialization round trip unchanged
    assert json.loads(json.dumps(report)) == report
print("schemas ok")
