#!/usr/bin/env python3
"""Cross-checks the sfc2bip binary against the naive oracles, plus exit codes
and output determinism.

usage: cli_checks.py SFC2BIP FIXTURE_DIR
"""

import json
import os
import subprocess
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
ORACLES = os.path.join(HERE, "oracles")

failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(args, **kw):
    return subprocess.run(args, capture_output=True, text=True, **kw)


def oracle(script, path, mode=None):
    cmd = [sys.executable, os.path.join(ORACLES, script)]
    if mode:
        cmd.append("--mode=" + mode)
    out = run(cmd + [path])
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return json.loads(out.stdout)


def reach(exe, path, *flags):
    out = run([exe, "reach", path, "--format", "json", *flags])
    return out.returncode, json.loads(out.stdout)


def main():
    exe, fixtures = sys.argv[1], sys.argv[2]
    sfcs = sorted(f for f in os.listdir(fixtures) if f.endswith(".sfc"))
    bips = sorted(f for f in os.listdir(fixtures) if f.endswith(".bip"))

    with tempfile.TemporaryDirectory() as tmp:
        # SFC interpreters against the oracle
        for f in sfcs:
            path = os.path.join(fixtures, f)
            for mode in ("ordered", "literal"):
                want = oracle("sfc_oracle.py", path, mode)
                _, got = reach(exe, path, "--mode", mode)
                check((got["nodes"], got["edges"]) == (want["nodes"], want["edges"]),
                      f"reach {f} --mode {mode}: {got['nodes']}/{got['edges']} vs oracle {want['nodes']}/{want['edges']}")
            want = oracle("sfc_oracle.py", path, "cycle")
            _, got = reach(exe, path, "--boundaries")
            check((got["nodes"], got["edges"]) == (want["nodes"], want["edges"]),
                  f"reach {f} --boundaries: {got['nodes']}/{got['edges']} vs oracle {want['nodes']}/{want['edges']}")

        # BIP interpreter against the oracle, on shipped and transformed models
        targets = [os.path.join(fixtures, f) for f in bips]
        for f in sfcs:
            out = os.path.join(tmp, f[:-4] + ".bip")
            r = run([exe, "transform", os.path.join(fixtures, f), "-o", out])
            check(r.returncode == 0, f"transform {f}")
            targets.append(out)
        for path in targets:
            want = oracle("bip_oracle.py", path)
            _, got = reach(exe, path)
            name = os.path.basename(path)
            check((got["nodes"], got["edges"]) == (want["nodes"], want["edges"]),
                  f"reach {name}: {got['nodes']}/{got['edges']} vs oracle {want['nodes']}/{want['edges']}")

        fig3 = os.path.join(fixtures, "fig3.sfc")
        raw = os.path.join(fixtures, "raw.sfc")
        fig3_bip = os.path.join(tmp, "fig3.bip")
        broken = os.path.join(tmp, "broken.sfc")
        with open(broken, "w") as fh:
            fh.write("sfc b { var x : int[0..3] = 0; action a { x := 1; } step S init { a; } }\n")
        ext = os.path.join(tmp, "ext.sfc")
        with open(ext, "w") as fh:
            fh.write("sfc e { var x : int[0..3] = 0; action a { x := 1; } step S init { a@S; } order a; }\n")

        codes = [
            (["validate", fig3], 0),
            (["validate", broken], 1),
            (["validate", os.path.join(tmp, "missing.sfc")], 2),
            (["reach", fig3, "--bogus-flag"], 2),
            (["reach", fig3, "--mode", "literal", "--boundaries"], 2),
            (["reach", fig3, "--max-states", "1"], 3),
            (["transform", ext], 1),
            (["transform", ext, "--extended", "-o", os.path.join(tmp, "ext.bip")], 0),
            (["check-inv", fig3, "--structural", "--boundaries"], 0),
            (["check-inv", fig3, "false"], 1),
            (["check-inv", fig3_bip, "!at(acb_a2, ENABLE) || at(acb_a2, ENABLE) && acb_a2.e"], 0),
            (["check-inv", fig3_bip, "gv_x.v <= 17"], 0),
            (["check-inv", fig3_bip, "gv_x.v <= 16"], 1),
            (["translate-inv", "t_i", fig3, "gv_x.v > gv_x.t"], 1),
            (["simrel", fig3], 0),
            (["simrel", raw], 1),
            (["simrel", fig3, "--depth", "1"], 3),
        ]
        for args, want in codes:
            r = run([exe, *args])
            check(r.returncode == want, f"exit {r.returncode} (want {want}): sfc2bip {' '.join(os.path.basename(a) for a in args)}")

        r = run([exe, "translate-inv", "t_i", fig3, "!at(acb_a2, ENABLE) || at(acb_a2, ENABLE) && acb_a2.e"])
        check(r.stdout.strip() == "!active(S2) || (active(S2) && enabled(a2))", "translate-inv t_i on the ACB invariant")
        r = run([exe, "translate-inv", "t_r", fig3, "active(S1)"])
        check(r.stdout.strip() == "!at(step_S1, DISABLED)", "translate-inv t_r active(S1)")

        # byte-identical JSON across three runs
        for args in (["generate", "--seed", "7", "--format", "json"],
                     ["generate", "--seed", "123"],
                     ["reach", fig3, "--format", "json", "-o", "-"],
                     ["simrel", fig3, "--format", "json"],
                     ["simrel", raw, "--format", "json"]):
            outs = {run([exe, *args]).stdout for _ in range(3)}
            check(len(outs) == 1 and next(iter(outs)) != "", "deterministic: sfc2bip " + " ".join(os.path.basename(a) for a in args))

        # the generated model parses and its transform follows the count law
        gen = os.path.join(tmp, "gen.sfc")
        run([exe, "generate", "--seed", "7", "-o", gen])
        check(run([exe, "validate", gen]).returncode == 0, "generated model validates")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
