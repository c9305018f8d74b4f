"""Drives the dextrainer executable through each subcommand."""

import json
import re
import signal
import subprocess
import sys
import tempfile
import urllib.error
import urllib.request
from pathlib import Path

BIN = sys.argv[1]
failures = []


def check(ok, what):
    if not ok:
        failures.append(what)
        print("FAILED:", what)


def run(*args):
    return subprocess.run([BIN, *args], capture_output=True, text=True, timeout=300)


def http_status(url):
    try:
        with urllib.request.urlopen(url, timeout=5) as r:
            return r.status, r.read().decode()
    except urllib.error.HTTPError as e:
        return e.code, ""


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    r = run("calib", "init", "--out", str(tmp / "calib.txt"))
    check(r.returncode == 0, "calib init exits 0")
    calib = (tmp / "calib.txt").read_text()
    check("left.fx = " in calib, "calib init writes the default rig")

    r = run("synth", "--scenario", "circle", "--duration", "1", "--noise-px", "0.3",
            "--calib", str(tmp / "calib.txt"), "--out", str(tmp / "circle"))
    check(r.returncode == 0, "synth circle exits 0")
    check((tmp / "circle" / "session.replay").is_file(), "synth writes session.replay")
    check((tmp / "circle" / "truth.txt").is_file(), "synth writes truth.txt")

    r = run("track", "--replay", str(tmp / "circle" / "session.replay"), "--out", str(tmp / "t.csv"))
    check(r.returncode == 0, "track exits 0")
    lines = (tmp / "t.csv").read_text().splitlines()
    check(lines[0] == "t_us,controller,raw_x,raw_y,raw_z,smooth_x,smooth_y,smooth_z,"
                      "qw,qx,qy,qz,status", "track CSV header")
    check(len(lines) > 50, "track CSV has a row per observation")

    r = run("run", "--replay", str(tmp / "circle" / "session.replay"),
            "--report", str(tmp / "report.json"), "--events", str(tmp / "events.log"))
    check(r.returncode == 0, "run exits 0")
    report = json.loads((tmp / "report.json").read_text())
    check(len(report.get("trials", [])) == 3, "run report lists three trials")

    r = run("synth", "--scenario", "spiral", "--out", str(tmp / "bad"))
    check(r.returncode != 0, "unknown scenario is refused")
    r = run("run", "--replay", str(tmp / "missing.replay"), "--report", str(tmp / "x.json"))
    check(r.returncode != 0, "missing replay is refused")
    (tmp / "broken.replay").write_text("not a record\n")
    r = run("run", "--replay", str(tmp / "broken.replay"), "--report", str(tmp / "x.json"))
    check(r.returncode == 1 and r.stderr.startswith("dextrainer:"), "malformed replay exits 1")

    ui = tmp / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>ui</title>\n")
    proc = subprocess.Popen([BIN, "serve", "--port", "0", "--ui-dir", str(ui),
                             "--record", str(tmp / "live.replay")],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        m = re.search(r"http://([\d.]+):(\d+)", line)
        check(m is not None, "serve prints its listening address")
        if m:
            base = f"http://{m.group(1)}:{m.group(2)}"
            status, body = http_status(base + "/")
            check(status == 200 and "<title>ui</title>" in body, "serve returns index.html")
            check(http_status(base + "/nope.js")[0] == 404, "serve answers 404 for missing files")
            check(http_status(base + "/session")[0] == 404, "plain GET /session is not a file")
    finally:
        proc.send_signal(signal.SIGINT)
        try:
            rc = proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            rc = None
    check(rc == 0, "serve stops cleanly on SIGINT")
    check((tmp / "live.replay").exists(), "serve creates the record file")

print("cli smoke:", "ok" if not failures else f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
