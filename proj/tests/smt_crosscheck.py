#!/usr/bin/env python3
# Re-check every exported VC with z3: valid must come back unsat, invalid sat. Exit 77 without z3.
import pathlib
import subprocess
import sys
import tempfile

try:
    import z3
except ImportError:
    print("z3 not available, skipping")
    sys.exit(77)

cao, corpus = sys.argv[1], pathlib.Path(sys.argv[2])


def program_for(spec):
    stem = spec.stem
    while True:
        p = corpus / (stem + ".cao")
        if p.exists():
            return p
        if "_" not in stem:
            return None
        stem = stem.rsplit("_", 1)[0]


checked = disagree = 0
for spec in sorted(corpus.glob("*.btype")):
    prog = program_for(spec)
    if prog is None:
        continue
    with tempfile.TemporaryDirectory() as d:
        subprocess.run([cao, "prove", str(prog), str(spec), "--emit-smt", d], capture_output=True)
        for f in sorted(pathlib.Path(d).glob("*.smt2")):
            text = f.read_text()
            verdict = text.splitlines()[0].split()[-1]
            if verdict == "unknown":
                continue
            s = z3.Solver()
            s.set("timeout", 5000)
            s.from_string(text)
            r = s.check()
            want = z3.unsat if verdict == "valid" else z3.sat
            checked += 1
            if r != want and r != z3.unknown:
                disagree += 1
                print(f"FAIL {spec.name} {f.name}: ours {verdict}, z3 {r}")

print(f"{checked} VCs re-checked, {disagree} disagreements")
sys.exit(1 if disagree or checked == 0 else 0)
