"""Command-line contract tests. Usage: cli_tests.py <cli> <data dir> <case>."""

import math
import os
import re
import subprocess
import sys
import tempfile

CLI = sys.argv[1]
DATA = sys.argv[2]
WORK = tempfile.mkdtemp(prefix="hybridvr_cli_")


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True, cwd=WORK)
    if expect is not None and proc.returncode != expect:
        raise AssertionError(
            f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stdout}\n{proc.stderr}")
    return proc


def path(name):
    return os.path.join(WORK, name)


def read_rows(name):
    with open(path(name)) as f:
        return f.read().splitlines()


def tally_total(name):
    for line in read_rows(name):
        if line.startswith("total,"):
            _, mean, re_ = line.split(",")
            return float(mean), float(re_)
    raise AssertionError("no total line")


def case_forward_rows():
    run("--deck", "builtin:labyrinth2d", "--out", path("f.csv"), "forward")
    rows = read_rows("f.csv")
    assert rows[0] == "i,j,group,value"
    assert len(rows) - 1 == 100 * 60 * 4, len(rows)


def case_forward_angular():
    run("--deck", "builtin:box_scatter", "--quad", "1,1", "--out", path("b.csv"), "forward",
        "--angular")
    rows = read_rows("b_angular.csv")
    assert rows[0] == "i,j,group,dir,value"
    assert len(rows) - 1 == 20 * 20 * 2 * 8


def case_forward_infinite_medium():
    run("--deck", "builtin:infinite_medium", "--out", path("im.csv"), "forward")
    rows = read_rows("im.csv")[1:]
    assert len(rows) == 100
    for r in rows:
        assert abs(float(r.split(",")[3]) - 2.0) <= 1e-10, r


def case_forward_scheme():
    sc = run("--deck", "builtin:box_scatter", "--out", path("sc.csv"), "forward")
    assert "fixups=0" in sc.stdout, sc.stdout
    dd = run("--deck", "builtin:box_scatter", "--scheme", "dd", "--out", path("dd.csv"), "forward")
    assert re.search(r"fixups=[1-9]", dd.stdout), dd.stdout
    assert read_rows("sc.csv") != read_rows("dd.csv")
    run("--deck", "builtin:box_scatter", "--scheme", "linear", "forward", expect=1)


def case_adjoint_no_detector():
    p = run("--deck", os.path.join(DATA, "no_detector.json"), "--out", path("a.csv"), "adjoint",
            expect=3)
    assert "no adjoint source" in p.stderr, p.stderr


def case_vr_cadis():
    p = run("--deck", "builtin:labyrinth2d", "--out", path("lab"), "vr", "--method", "cadis")
    r = float(re.search(r"^R (\S+)$", p.stdout, re.M).group(1))
    assert r > 0.0
    ww = read_rows("lab.ww.csv")
    src = read_rows("lab.src.csv")
    assert ww[0].startswith("# method=cadis R=") and "rho=5" in ww[0]
    assert ww[1] == "i,j,group,w_low,w_surv,w_high"
    assert src[1] == "i,j,group,q_hat,w0"
    assert len(ww) - 2 == 100 * 60 * 4


def deterministic_minutes(method):
    p = run("--deck", "builtin:labyrinth2d", "--out", path(method), "vr", "--method", method)
    solves = re.findall(r"^solve (\w+) ", p.stdout, re.M)
    total = float(re.search(r"^deterministic (\S+) min$", p.stdout, re.M).group(1))
    return solves, total


def case_vr_omega_timing():
    solves_c, t_c = deterministic_minutes("cadis")
    solves_o, t_o = deterministic_minutes("cadis-omega")
    assert solves_c == ["adjoint"], solves_c
    assert solves_o == ["forward", "adjoint"], solves_o
    ratio = t_o / t_c
    assert 1.5 <= ratio <= 2.5, ratio


def case_vr_unknown_method():
    p = run("--deck", "builtin:labyrinth2d", "vr", "--method", "magic", expect=None)
    assert p.returncode == 1, p.returncode


def case_vr_no_detector():
    p = run("--deck", os.path.join(DATA, "no_detector.json"), "--out", path("x"), "vr",
            expect=3)
    assert "no response path" in p.stderr, p.stderr


def case_mc_infinite_medium():
    run("--deck", "builtin:infinite_medium", "--out", path("t.csv"), "mc", "--histories",
        "100000")
    mean, rel = tally_total("t.csv")
    assert abs(mean - 2.0) <= 3.0 * mean * rel, (mean, rel)
    rows = read_rows("t.csv")
    assert rows[0] == "group,mean,rel_err"
    assert [r.split(",")[0] for r in rows[1:]] == ["0", "total", "histories", "time_minutes",
                                                  "fom"]


def case_mc_workers_identical():
    run("--deck", "builtin:box_scatter", "--out", path("bs"), "vr", "--method", "cadis")
    blobs = []
    for w in ("1", "2", "8"):
        out = path(f"t{w}.csv")
        run("--deck", "builtin:box_scatter", "--out", out, "mc", "--vr", path("bs"),
            "--histories", "20000", "--seed", "99", "--workers", w, "--no-timing")
        with open(out, "rb") as f:
            blobs.append(f.read())
    assert blobs[0] == blobs[1] == blobs[2]


def case_mc_mesh_mismatch():
    run("--deck", "builtin:box_scatter", "--out", path("bs"), "vr", "--method", "cadis")
    p = run("--deck", "builtin:labyrinth2d", "--out", path("t.csv"), "mc", "--vr", path("bs"),
            "--histories", "10", expect=2)
    assert "20x20x2" in p.stderr and "100x60x4" in p.stderr, p.stderr


def case_mc_zero_histories():
    p = run("--deck", "builtin:box_scatter", "mc", "--histories", "0", expect=None)
    assert p.returncode != 0


def case_compare_smoke():
    p = run("--deck", "builtin:box_scatter", "--quad", "2,2", "--out", path("cmp"), "compare",
            "--histories", "5000")
    for name in ("analog", "cadis", "cadis_omega"):
        assert re.search(rf"^{name}\s", p.stdout, re.M), p.stdout
    summary = read_rows("cmp.summary.csv")
    assert summary[0] == "method,t_mc_min,t_det_min,fom_mc,fom_adjusted,total_mean,total_sigma"
    analog = summary[1].split(",")
    assert analog[0] == "analog" and float(analog[2]) == 0.0 and analog[3] == analog[4]
    for row in summary[1:]:
        f = row.split(",")
        assert float(f[4]) <= float(f[3])
    groups = read_rows("cmp.groups.csv")
    assert groups[0] == "method,group,mean,rel_err"
    assert len(groups) == 1 + 3 * 3


def case_export_deck_roundtrip():
    run("--deck", "builtin:box_scatter", "--out", path("box.json"), "export-deck")
    run("--deck", "builtin:box_scatter", "--out", path("a.csv"), "forward")
    run("--deck", path("box.json"), "--out", path("b.csv"), "forward")
    assert read_rows("a.csv") == read_rows("b.csv")


def case_bad_deck():
    with open(path("bad.json"), "w") as f:
        f.write("{\"groups\": {\"count\": 1}, \"surprise\": true}")
    run("--deck", path("bad.json"), "forward", expect=2)
    run("--deck", path("missing.json"), "forward", expect=2)
    run("forward", expect=1)


def case_bundled_decks_match_builtins():
    decks = os.path.join(DATA, "..", "..", "decks")
    for name in ("labyrinth2d", "box_scatter", "infinite_medium", "absorber_slab"):
        run("--deck", f"builtin:{name}", "--quad", "1,1", "--out", path(f"{name}_a.csv"),
            "forward")
        run("--deck", os.path.join(decks, f"{name}.json"), "--quad", "1,1", "--out",
            path(f"{name}_b.csv"), "forward")
        assert read_rows(f"{name}_a.csv") == read_rows(f"{name}_b.csv"), name


if __name__ == "__main__":
    globals()["case_" + sys.argv[3]]()
    print("ok")
