#!/usr/bin/env python3
# End-to-end checks of the command-line runner on one small config.
#   cli_smoke.py <asymcs binary> <config.json> <scratch dir>
# Runs the config twice and checks that it exits with 0 or 3, that the
# manifest lists every artifact with a correct size and SHA-256, and that the
# two runs produce identical hashes. Then it checks that an unknown config
# field is rejected with exit code 2.

import hashlib
import json
import pathlib
import shutil
import subprocess
import sys


def run(binary, kind, config, out):
    return subprocess.run([binary, kind, "--config", str(config), "--out", str(out), "--threads", "1"],
                          capture_output=True, text=True)


def check_manifest(out):
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] in ("ok", "not_converged"), manifest["status"]
    assert manifest["files"], "manifest lists no artifacts"
    hashes = {}
    for entry in manifest["files"]:
        data = (out / entry["path"]).read_bytes()
        assert len(data) == entry["bytes"], entry["path"]
        assert hashlib.sha256(data).hexdigest() == entry["sha256"], entry["path"]
        hashes[entry["path"]] = entry["sha256"]
    resolved = json.loads((out / "config.json").read_text())
    assert resolved["experiment"] == manifest["experiment"]
    return hashes


def main():
    binary, config_path, scratch = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    config = json.loads(config_path.read_text())
    kind = config["experiment"]
    shutil.rmtree(scratch, ignore_errors=True)
    scratch.mkdir(parents=True)

    # Both runs share one output directory: the resolved config records it.
    runs = []
    out = scratch / "run"
    for _ in range(2):
        p = run(binary, kind, config_path, out)
        assert p.returncode in (0, 3), f"exit {p.returncode}: {p.stderr}"
        assert p.stdout.startswith(kind + ": "), p.stdout
        runs.append(check_manifest(out))
    assert runs[0] == runs[1], "artifact hashes differ between identical runs"

    bad = dict(config)
    bad["no_such_field"] = 1
    bad_path = scratch / "bad.json"
    bad_path.write_text(json.dumps(bad))
    p = run(binary, kind, bad_path, scratch / "bad")
    assert p.returncode == 2, f"unknown field gave exit {p.returncode}"
    assert "no_such_field" in p.stderr, p.stderr
    print(f"{kind}: ok, {len(runs[0])} artifacts, hashes stable")


if __name__ == "__main__":
    main()
