"""Validates every line a sample emitter prints against the message schema.

Usage: validate_messages.py SCHEMA [--require TYPE,TYPE] EMITTER [ARGS...]
Without --require every message type needs at least one sample.
"""
import json
import subprocess
import sys

import jsonschema

OUTBOUND = {"welcome", "state", "event", "metrics", "haptic", "error"}
INBOUND = {"hello", "input", "trial", "packet", "blobs"}


def main() -> int:
    args = sys.argv[1:]
    schema_path = args.pop(0)
    required = OUTBOUND | INBOUND
    if args[0] == "--require":
        args.pop(0)
        required = set(args.pop(0).split(","))
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    lines = subprocess.run(args, check=True, capture_output=True, text=True).stdout
    seen = set()
    failures = 0
    for n, line in enumerate(lines.splitlines(), 1):
        msg = json.loads(line)
        seen.add(msg["type"])
        errors = sorted(validator.iter_errors(msg), key=str)
        if errors:
            failures += 1
            print(f"line {n} ({msg['type']}): {errors[0].message}")
    missing = required - seen
    if missing:
        print("no sample for:", ", ".join(sorted(missing)))
        failures += 1
    print(f"{len(lines.splitlines())} messages, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
