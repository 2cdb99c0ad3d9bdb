"""One test per acceptance criterion; each records a single PASS/FAIL line.

Time limits and tolerances are pinned here: every comparison is exact
(integers or Fractions), so the only tolerances are the wall-clock budgets.
"""

import random
import time
from fractions import Fraction
from pathlib import Path

from affable.absorption import build_absorption_diagram, embed_template, plant_replicas, verify_star
from affable.afstructure import (
    check_transverse_build,
    diagram_from_filtration,
    height_recursion_report,
    round_trip_report,
    transverse_diagrams,
)
from affable.cli import main
from affable.demo import demo_host, two_point_templates
from affable.diagram import diagrams_isomorphic, incidence_matrix, matmul, validate_quotient
from affable.fixtures import loop_then_chain, odometer, odometer_half, two_branch_tree
from affable.generators import (
    break_transversality,
    layered_host,
    random_absorption_instance,
    random_chain,
    random_diagram,
    random_transverse_instance,
    random_transverse_pair,
)
from affable.relations import (
    FiniteEqRel,
    NotTransverse,
    class_size_check,
    composable_triples,
    find_transversal,
    join,
)
from affable.report import parse_report
from affable.transforms import (
    CapacityRequest,
    check_capacity,
    ensure_capacity,
    microscope,
    telescope,
    thinness_bound,
)

GOLDEN = Path(__file__).parent / "golden"

LIMIT_SECONDS = {1: 5.0, 2: 10.0, 3: 5.0, 4: 5.0, 5: 1.0, 6: 5.0, 7: 30.0}
TRANSVERSE_INSTANCES = 20
TRANSVERSAL_PAIRS = 100
CAPACITY_HOSTS = 10
ROUND_TRIP_CHAINS = 20
ABSORPTION_BUILDS = 10


def record(log, number, failures, elapsed, detail):
    limit = LIMIT_SECONDS[number]
    if elapsed >= limit:
        failures.append(f"took {elapsed:.2f}s, limit {limit}s")
    status = "FAIL" if failures else "PASS"
    line = f"ACCEPTANCE {number} {status} {elapsed:.2f}s/{limit:.0f}s {detail}"
    if failures:
        line += " :: " + "; ".join(failures[:3])
    log.append(line)
    print(line)
    assert not failures, line


def test_criterion_1_two_point_golden(acceptance_log, capsys):
    started = time.perf_counter()
    status = main(["demo", "two-point", "--depth", "6"])
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - started
    failures = []
    report = parse_report(out)
    if status != 0 or not report.ok:
        failures.append(f"exit {status}, failed stages {[s for s in report.stages if not s[1]]}")
    if out != (GOLDEN / "two_point_depth6.txt").read_text():
        failures.append("report differs from the golden file")
    margin = report.margins[0] if report.margins else None
    if margin is None or margin[0] < 4 or margin[1] != 6:
        failures.append(f"margin {margin} does not cover n=4, N=6")
    names = {name for name, _, _ in report.stages}
    for needed in ("capacity", "plant", "absorb", "alpha", "star", "control", "thinness"):
        if needed not in names:
            failures.append(f"stage {needed} missing")
    record(acceptance_log, 1, failures, elapsed, f"{len(report.stages)} stages, margin {margin}")


def test_criterion_2_transverse_builds(acceptance_log):
    started = time.perf_counter()
    failures = []
    points = (1, 2)
    tb = transverse_diagrams(points, [FiniteEqRel.identity(points)] * 5, FiniteEqRel.full(points))
    if not (diagrams_isomorphic(tb.d, two_branch_tree(4)) and diagrams_isomorphic(tb.d_prime, loop_then_chain(4))):
        failures.append("two-point instance does not give the tree and the loop")
    if not check_transverse_build(tb).ok:
        failures.append("two-point instance fails its checks")
    sizes = []
    for seed in range(TRANSVERSE_INSTANCES):
        rng = random.Random(seed)
        pts, chain, s = random_transverse_instance(rng, max_points=8, depth=rng.randint(1, 2))
        assert len(pts) <= 8 and len(chain) <= 3
        tb = transverse_diagrams(pts, chain, s)
        quotient = validate_quotient(tb.quotient)
        build = check_transverse_build(tb)
        if not (quotient.ok and build.ok):
            failures.append(f"seed {seed}: {quotient.summary()} / {build.summary()}")
        ranges = [e.range for e in tb.d.edges(1)]
        if len(ranges) != len(set(ranges)):
            failures.append(f"seed {seed}: t not injective on the first level")
        sizes.append(len(pts))
    elapsed = time.perf_counter() - started
    record(acceptance_log, 2, failures, elapsed,
           f"1 fixed + {TRANSVERSE_INSTANCES} random instances, {min(sizes)}..{max(sizes)} points")


def test_criterion_3_transversality_oracle(acceptance_log):
    started = time.perf_counter()
    failures = []
    controls = 0
    for seed in range(TRANSVERSAL_PAIRS):
        rng = random.Random(seed)
        r, s = random_transverse_pair(rng, max_points=16)
        try:
            w = find_transversal(r, s)
        except NotTransverse as exc:
            failures.append(f"seed {seed}: {exc}")
            continue
        joined = join(r, s)
        for first, second in ((r, s), (s, r)):
            ends = [(x, z) for x, _, z in composable_triples(first, second)]
            if len(ends) != len(set(ends)) or set(ends) != set(joined.pairs()):
                failures.append(f"seed {seed}: composable pairs do not biject onto the join")
        sizes = class_size_check(w)
        if not sizes.ok:
            failures.append(f"seed {seed}: {sizes.summary()}")
        for c in joined.classes:
            m = len({r.class_index(x) for x in c})
            n = len({s.class_index(x) for x in c})
            if len(c) != m * n:
                failures.append(f"seed {seed}: class of size {len(c)} is not {m}*{n}")
        if seed % 10 == 0:
            rr, ss = (r, s) if not r.is_identity() else (s, r)
            if rr.is_identity():
                rr = FiniteEqRel.full(rr.points)
            broken = break_transversality(rng, rr, ss)
            controls += 1
            try:
                find_transversal(rr, broken)
                failures.append(f"seed {seed}: negative control accepted")
            except NotTransverse as exc:
                if exc.pair is None:
                    failures.append(f"seed {seed}: negative control rejected without a witness pair")
    elapsed = time.perf_counter() - started
    record(acceptance_log, 3, failures, elapsed,
           f"{TRANSVERSAL_PAIRS} pairs, {controls} negative controls rejected with witnesses")


def test_criterion_4_transform_identities(acceptance_log):
    started = time.perf_counter()
    failures = []
    for seed in range(20):
        rng = random.Random(seed)
        d = random_diagram(rng, depth=5)
        cuts = [0] + [k for k in range(1, 5) if rng.random() < 0.5] + [5]
        out, _ = telescope(d, cuts)
        for k, (lo, hi) in enumerate(zip(cuts, cuts[1:]), start=1):
            product = incidence_matrix(d, lo + 1)
            for m in range(lo + 2, hi + 1):
                product = matmul(product, incidence_matrix(d, m))
            if incidence_matrix(out, k) != product:
                failures.append(f"seed {seed}: telescoped level {k} is not the interval product")
        n = rng.randint(1, 5)
        split, _ = microscope(d, n)
        merged, _ = telescope(split, [k for k in range(split.depth + 1) if k != n])
        if not diagrams_isomorphic(merged, d):
            failures.append(f"seed {seed}: microscope at {n} then telescope is not isomorphic")
    for seed in range(CAPACITY_HOSTS):
        rng = random.Random(1000 + seed)
        depth = rng.randint(14, 18)
        host = layered_host(rng, [rng.randint(1, 3) for _ in range(depth)], [1] * depth, extra_multiplicity=1)
        req = CapacityRequest([rng.randint(2, 4) for _ in range(2)], [rng.randint(2, 5) for _ in range(2)])
        out, _ = ensure_capacity(host, req)
        check = check_capacity(out, req)
        if not check.ok:
            failures.append(f"host {seed}: {check.summary()}")
    elapsed = time.perf_counter() - started
    record(acceptance_log, 4, failures, elapsed, f"20 telescope/microscope cases, {CAPACITY_HOSTS} capacity hosts")


def test_criterion_5_thinness(acceptance_log):
    started = time.perf_counter()
    failures = []
    half = thinness_bound(odometer_half(odometer(10)), 10)
    if half != Fraction(1, 1024):
        failures.append(f"half odometer bound {half} != 1/1024")
    templates, _ = two_point_templates(6)
    host = demo_host(templates, 6)
    y_sub, _ = embed_template(host, templates.w, 6)
    scaffold = plant_replicas(host, y_sub, templates)
    final, shallow = thinness_bound(scaffold.l_prime_sub, 6), thinness_bound(scaffold.l_prime_sub, 2)
    if not final < Fraction(1, 2):
        failures.append(f"replica bound {final} not below 1/2")
    if not final <= shallow:
        failures.append(f"replica bound {final} above its depth-2 value {shallow}")
    elapsed = time.perf_counter() - started
    record(acceptance_log, 5, failures, elapsed, f"half odometer {half}, replicas {final} <= {shallow}")


def test_criterion_6_filtration_round_trip(acceptance_log):
    started = time.perf_counter()
    failures = []
    for seed in range(ROUND_TRIP_CHAINS):
        rng = random.Random(seed)
        points = tuple(range(rng.randint(2, 12)))
        chain = random_chain(rng, points, rng.randint(2, 4))
        fd = diagram_from_filtration(points, chain)
        for name, report in (("round trip", round_trip_report(fd)), ("heights", height_recursion_report(fd))):
            if not report.ok:
                failures.append(f"seed {seed} {name}: {report.summary()}")
    elapsed = time.perf_counter() - started
    record(acceptance_log, 6, failures, elapsed, f"{ROUND_TRIP_CHAINS} chains")


def test_criterion_7_star_soundness(acceptance_log):
    started = time.perf_counter()
    failures = []
    checks = 0
    for seed in range(ABSORPTION_BUILDS):
        rng = random.Random(seed)
        depth = rng.randint(3, 5)
        host, y_sub, templates = random_absorption_instance(rng, depth, max_points=4)
        result = build_absorption_diagram(plant_replicas(host, y_sub, templates, seed=seed))
        for n in range(depth):
            for kwargs in ({}, {"with_k": True}, {"omit": (1,)}):
                checks += 1
                if not verify_star(result, n, **kwargs).sound:
                    failures.append(f"seed {seed}: unsound at n={n} {kwargs}")
    elapsed = time.perf_counter() - started
    record(acceptance_log, 7, failures, elapsed, f"{ABSORPTION_BUILDS} builds, {checks} closures sound")
