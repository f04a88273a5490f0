"""Scenario files: a declarative, line-oriented format (versioned header,
[setup] and [checks] sections) that builds one engine context and runs an
ordered list of named checks, collecting exact residuals into a report that
can be emitted as human text or as a stable line-oriented record stream.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .expr import (Environment, ExprTypeError, evaluate, format_value,
                   parse_expression)
from .fields import PForm, VectorField, pairing
from .geometry import CurvatureData, Metric, is_killing
from .hopf import GeneratorSet, UElement, build_twist, check_twist_axioms
from .levelset import (LevelSetError, LevelSetFamily, TangencyClass,
                       centrality_report,
                       monomials_up_to, star_differential_relation,
                       star_level_relation, twisted_dependence_relation,
                       verify_algebra_relations)
from .poly import Chart, Polynomial, RatFunc, equal_mod_ideal, ideal_reduce
from .scalars import NuSeries, Scalar
from .star import StarContext, _scale
from .twisted import TwistedConnection, TwistedGeometryError

HEADER = "twistfold-scenario v1"


class ScenarioError(Exception):
    pass


class CheckRecord:
    def __init__(self, label, ok, residual="0", note=""):
        self.label = label
        self.ok = ok
        self.residual = residual
        self.note = note


class Report:
    def __init__(self, name):
        self.name = name
        self.records = []

    def add(self, label, ok, residual="0", note=""):
        self.records.append(CheckRecord(label, ok, str(residual), note))

    @property
    def passed(self):
        return all(r.ok for r in self.records)

    def counts(self):
        ok = sum(1 for r in self.records if r.ok)
        return ok, len(self.records) - ok


def emit_report(report: Report, fmt: str = "human") -> str:
    if fmt == "structured":
        lines = ["twistfold-report v1", f"scenario {report.name}"]
        for r in report.records:
            status = "pass" if r.ok else "fail"
            residual = r.residual.replace("\n", " ")
            lines.append(f"check {r.label} {status} {residual}")
        ok, bad = report.counts()
        lines.append(f"summary pass={ok} fail={bad}")
        return "\n".join(lines) + "\n"
    if fmt != "human":
        raise ScenarioError(f"unknown report format {fmt!r}")
    lines = [f"scenario: {report.name}", "-" * 48]
    for r in report.records:
        mark = "ok " if r.ok else "FAIL"
        lines.append(f"[{mark}] {r.label}")
        if r.note:
            lines.append(f"       {r.note}")
        if not r.ok:
            lines.append(f"       residual: {r.residual}")
    ok, bad = report.counts()
    lines.append("-" * 48)
    lines.append(f"{ok} passed, {bad} failed")
    return "\n".join(lines) + "\n"


# -- file parsing ---------------------------------------------------------------


def parse_scenario(text: str):
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ScenarioError(f"missing header line {HEADER!r}")
    setup = {"generators": [], "stars": {}, "defines": [], "surfaces": [],
             "frame": [], "twist": ("identity",), "order": 4, "seed": 1,
             "name": "scenario", "coords": None, "params": (),
             "metric": ("euclidean",)}
    checks = []
    section = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[setup]":
            section = "setup"
            continue
        if line == "[checks]":
            section = "checks"
            continue
        if section == "setup":
            _setup_line(setup, line, lineno)
        elif section == "checks":
            checks.append((line, lineno))
        else:
            raise ScenarioError(f"line {lineno}: content outside any section")
    if setup["coords"] is None:
        raise ScenarioError("setup must declare coords")
    if not setup["surfaces"]:
        raise ScenarioError("setup must declare at least one surface")
    return setup, checks


def _setup_line(setup, line, lineno):
    if "=" not in line:
        raise ScenarioError(f"line {lineno}: setup lines use 'key = value'")
    key, value = (s.strip() for s in line.split("=", 1))
    if key == "name":
        setup["name"] = value
    elif key == "coords":
        setup["coords"] = tuple(value.split())
    elif key == "params":
        setup["params"] = tuple(value.split())
    elif key == "metric":
        parts = value.split()
        if parts[0] in ("euclidean", "minkowski"):
            setup["metric"] = (parts[0],)
        elif parts[0] == "matrix":
            rows = value[len("matrix"):].strip().split(";")
            setup["metric"] = ("matrix", [r.split() for r in rows])
        else:
            raise ScenarioError(f"line {lineno}: unknown metric {value!r}")
    elif key == "surface":
        setup["surfaces"].append(value)
    elif key.startswith("generator "):
        setup["generators"].append((key[len("generator "):].strip(), value))
    elif key.startswith("star-sign "):
        setup["stars"][key[len("star-sign "):].strip()] = Fraction(value)
    elif key == "twist":
        parts = value.split()
        fam = parts[0]
        if fam == "identity":
            setup["twist"] = ("identity",)
        elif fam == "abelian":
            pairs = [tuple(p.split(":")) for p in parts[1:]]
            setup["twist"] = ("abelian", pairs)
        elif fam == "jordanian":
            setup["twist"] = ("jordanian", parts[1], parts[2])
        else:
            raise ScenarioError(f"line {lineno}: unknown twist family")
    elif key == "order":
        setup["order"] = int(value)
    elif key == "seed":
        setup["seed"] = int(value)
    elif key.startswith("define "):
        setup["defines"].append((key[len("define "):].strip(), value))
    elif key == "frame":
        setup["frame"] = value.split()
    else:
        raise ScenarioError(f"line {lineno}: unknown setup key {key!r}")


# -- runner -----------------------------------------------------------------------


class ScenarioRunner:
    def __init__(self, setup):
        self.setup = setup
        self.chart = Chart(setup["coords"], setup["params"])
        mk = setup["metric"]
        if mk[0] == "euclidean":
            self.metric = Metric.euclidean(self.chart)
        elif mk[0] == "minkowski":
            self.metric = Metric.minkowski(self.chart)
        else:
            rows = [[Fraction(x) for x in row] for row in mk[1]]
            self.metric = Metric(self.chart, rows)
        base_env = Environment(self.chart)
        gen_names, gen_fields = [], []
        for name, src in setup["generators"]:
            val = evaluate(parse_expression(src), base_env)
            if not isinstance(val, VectorField):
                raise ScenarioError(f"generator {name} is not a vector field")
            base_env.define(name, val)
            gen_names.append(name)
            gen_fields.append(val)
        star_signs = None
        if setup["stars"]:
            star_signs = [setup["stars"].get(n, Fraction(-1))
                          for n in gen_names]
        self.gens = GeneratorSet.from_fields(gen_names, gen_fields,
                                             star_signs=star_signs)
        self.twist = build_twist(self.gens, setup["twist"], setup["order"])
        self.ctx = StarContext(self.twist)
        self.env = Environment(self.chart, self.ctx, base_env.names)
        fs = []
        for src in setup["surfaces"]:
            val = evaluate(parse_expression(src), self.env)
            if isinstance(val, RatFunc):
                val = val.as_polynomial()
            fs.append(val)
        self.family = LevelSetFamily(self.chart, fs)
        for name, src in setup["defines"]:
            self.env.define(name, evaluate(parse_expression(src), self.env))
        self.frame = [self.env.resolve(n) for n in setup["frame"]]
        self.seed = setup["seed"]
        self._conn = None

    # twisted connection is built lazily: not every scenario has a twist
    # whose legs are Killing for the declared metric
    def connection(self) -> TwistedConnection:
        if self._conn is None:
            self._conn = TwistedConnection(self.ctx, metric=self.metric,
                                           family=self.family)
        return self._conn

    def rng(self, label):
        return random.Random(f"{self.seed}:{label}")

    def rand_poly(self, rng, degree=3, terms=3):
        out = Polynomial.zero(self.chart)
        for _ in range(terms):
            e = [0] * len(self.chart.all_vars)
            for _ in range(rng.randint(0, degree)):
                e[rng.randrange(self.chart.n)] += 1
            c = Scalar(Fraction(rng.randint(-3, 3), rng.randint(1, 2)),
                       Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
            out = out + Polynomial(self.chart, {tuple(e): NuSeries([c])})
        return out

    def rand_field(self, rng, degree=2):
        return VectorField(self.chart, [self.rand_poly(rng, degree)
                                        for _ in range(self.chart.n)])

    def rand_form(self, rng, degree=2):
        return PForm(self.chart, 1, {(i,): self.rand_poly(rng, degree)
                                     for i in range(self.chart.n)})

    def rand_tangent(self, rng, degree=1):
        out = None
        for g in self.family.tangent_fields():
            piece = g.scale(self.rand_poly(rng, degree, terms=2))
            out = piece if out is None else out + piece
        return out

    def rand_uelement(self, rng, max_len=2):
        terms = {}
        for _ in range(2):
            w = tuple(rng.randrange(len(self.gens.names))
                      for _ in range(rng.randint(0, max_len)))
            c = Scalar(Fraction(rng.randint(-3, 3), rng.randint(1, 2)),
                       Fraction(rng.randint(-2, 2)))
            terms[w] = NuSeries([c])
        return UElement(self.gens, terms)

    # -- running ------------------------------------------------------------

    def run(self, checks) -> Report:
        report = Report(self.setup["name"])
        seen = {}
        for line, lineno in checks:
            name, args, kwargs, payload = _parse_check(line, lineno)
            label = kwargs.pop("label", None)
            if label is None:
                n = seen.get(name, 0) + 1
                seen[name] = n
                label = name if n == 1 else f"{name}#{n}"
            handler = CHECKS.get(name)
            if handler is None:
                raise ScenarioError(f"line {lineno}: unknown check {name!r}")
            try:
                ok, residual, note = handler(self, args, kwargs, payload)
            except (ScenarioError, ExprTypeError, LevelSetError) as exc:
                raise ScenarioError(f"line {lineno}: {exc}") from exc
            except TwistedGeometryError as exc:
                raise ScenarioError(f"line {lineno}: {exc}") from exc
            report.add(label, ok, residual, note)
        return report


def _parse_check(line, lineno):
    payload = None
    head = line
    if "::" in line:
        head, payload = (s.strip() for s in line.split("::", 1))
    parts = head.split()
    if not parts:
        raise ScenarioError(f"line {lineno}: empty check")
    name = parts[0]
    args, kwargs = [], {}
    for p in parts[1:]:
        if "=" in p:
            k, v = p.split("=", 1)
            kwargs[k] = v
        else:
            args.append(p)
    return name, args, kwargs, payload


def _zeroish(value):
    if value is None:
        return True
    if hasattr(value, "is_zero"):
        return value.is_zero()
    return not value


def _residual_str(value):
    return "0" if _zeroish(value) else format_value(value)


# -- check handlers ----------------------------------------------------------------


def _check_twist_axioms(run, args, kwargs, payload):
    degree = int(kwargs.get("degree", 0))
    triples = None
    if degree:
        monos = monomials_up_to(run.chart, degree)
        monos = [m for m in monos if not m.degree() == 0]
        triples = [(a, b, c) for a in monos for b in monos for c in monos]
    rep = check_twist_axioms(run.twist, triples)
    ok = rep["counital"] and rep["cocycle_exact"] and all(
        r.is_zero() for r in rep["cocycle_residuals"] or [])
    note = f"counital={rep['counital']} cocycle={rep['cocycle_exact']}"
    if triples is not None:
        note += f" triples={len(triples)}"
    return ok, "0" if ok else "nonzero-cocycle-residual", note


def _check_unitarity(run, args, kwargs, payload):
    expect = kwargs.get("expect", "true") == "true"
    got = run.twist.is_unitary()
    return got == expect, "0" if got == expect else f"unitary={got}", ""


def _check_reality(run, args, kwargs, payload):
    expect = kwargs.get("expect", "true") == "true"
    got = run.twist.is_real()
    return got == expect, "0" if got == expect else f"real={got}", ""


def _split_equality(payload):
    if payload is None or "==" not in payload:
        raise ScenarioError("check needs 'LHS == RHS' after '::'")
    lhs, rhs = payload.split("==", 1)
    return lhs.strip(), rhs.strip()


def _check_eval(run, args, kwargs, payload):
    lhs_src, rhs_src = _split_equality(payload)
    lhs = evaluate(parse_expression(lhs_src), run.env)
    rhs = evaluate(parse_expression(rhs_src), run.env)
    if hasattr(lhs, "truncate"):
        lhs = lhs.truncate(run.twist.order)
    if hasattr(rhs, "truncate"):
        rhs = rhs.truncate(run.twist.order)
    diff = lhs - rhs
    return _zeroish(diff), _residual_str(diff), ""


def _check_reduce(run, args, kwargs, payload):
    lhs_src, rhs_src = _split_equality(payload)
    lhs = evaluate(parse_expression(lhs_src), run.env)
    rhs = evaluate(parse_expression(rhs_src), run.env)
    if isinstance(lhs, (Polynomial, RatFunc)) and \
            isinstance(rhs, (Polynomial, RatFunc)):
        ok = equal_mod_ideal(lhs, rhs, run.family.fs)
        resid = "0" if ok else format_value(ideal_reduce(lhs - rhs,
                                                         run.family.fs))
        return ok, resid, ""
    diff = lhs - rhs
    comps = diff.comps if isinstance(diff, VectorField) else \
        list(diff.comps.values())
    reduced = [ideal_reduce(c, run.family.fs) for c in comps]
    ok = all(r.is_zero() for r in reduced)
    return ok, "0" if ok else "; ".join(format_value(r) for r in reduced
                                        if not r.is_zero()), ""


def _check_classify(run, args, kwargs, payload):
    target = evaluate(parse_expression(args[0]), run.env)
    want = kwargs["expect"]
    cls, _ = run.family.classify(target, metric=run.metric)
    ok = cls.value == want
    return ok, "0" if ok else cls.value, f"class={cls.value}"


def _check_central(run, args, kwargs, payload):
    degree = int(kwargs.get("degree", 4))
    mod_ideal = kwargs.get("mod", "") == "ideal"
    rep = centrality_report(run.family, run.ctx, degree,
                            modulo_ideal=mod_ideal)
    ok = rep["holds"]
    resid = "0"
    if not ok:
        alpha, left, right = rep["failures"][0]
        resid = f"{format_value(left)} | {format_value(right)}"
    return ok, resid, f"monomials<=deg{degree}" + \
        (" mod-ideal" if mod_ideal else " exact")


def _check_level_star(run, args, kwargs, payload):
    rep = star_level_relation(run.family, run.ctx)
    ok = rep["holds"]
    resid = "0" if ok else format_value(rep["residuals"][0])
    return ok, resid, ""


def _check_differential_star(run, args, kwargs, payload):
    rep = star_differential_relation(run.family, run.ctx)
    ok = rep["holds"]
    resid = "0" if ok else format_value(rep["residuals"][0])
    return ok, resid, ""


def _check_dependence_star(run, args, kwargs, payload):
    rep = verify_algebra_relations(run.family, run.ctx, degree=2)
    rep = rep.get("dependence_star")
    if rep is None:
        return False, "no-tangent-twist", ""
    ok = rep["holds"]
    resid = "0" if ok else format_value(rep["residuals"][0])
    return ok, resid, ""


def _check_twisted_relation(run, args, kwargs, payload):
    coeffs = [evaluate(parse_expression(s), run.env)
              for s in kwargs["coeffs"].split(",")]
    fields = [run.env.resolve(s) for s in kwargs["gens"].split(",")]
    resid = twisted_dependence_relation(run.ctx, coeffs, fields)
    ok = _zeroish(resid)
    return ok, _residual_str(resid), ""


def _check_duality(run, args, kwargs, payload):
    frame = run.family.normal_frame(run.metric)
    k = run.family.k
    bad = []
    for a in range(k):
        for b in range(k):
            want = RatFunc(Polynomial.constant(run.chart,
                                               1 if a == b else 0))
            classical = pairing(frame.n_perp[a], frame.df[b]) - want
            starred = run.ctx.star_pairing(frame.n_perp[a], frame.df[b]) - want
            if not _zeroish(classical):
                bad.append(classical)
            if not _zeroish(starred):
                bad.append(starred)
    ok = not bad
    return ok, "0" if ok else format_value(bad[0]), f"k={k} classical+star"


def _check_projections(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 10))
    rng = run.rng("projections")
    fam, metric = run.family, run.metric
    bad = None
    for _ in range(samples):
        X = run.rand_field(rng)
        t = fam.project(X, metric, "tangent")
        p = fam.project(X, metric, "normal")
        if not _zeroish(t + p - X):
            bad = (t + p) - X
            break
        if not _zeroish(fam.project(t, metric, "normal")):
            bad = fam.project(t, metric, "normal")
            break
        if not _zeroish(fam.project(t, metric, "tangent") - t):
            bad = fam.project(t, metric, "tangent") - t
            break
        w = run.rand_form(rng)
        wt = fam.project(w, metric, "tangent")
        wp = fam.project(w, metric, "normal")
        if not _zeroish(wt + wp - w):
            bad = (wt + wp) - w
            break
        if not _zeroish(fam.project(wp, metric, "normal") - wp):
            bad = fam.project(wp, metric, "normal") - wp
            break
    ok = bad is None
    return ok, "0" if ok else "nonzero-projection-residual", \
        f"samples={samples}"


def _check_killing(run, args, kwargs, payload):
    expect = kwargs.get("expect", "true") == "true"
    bad = []
    for name in args:
        field = run.env.resolve(name)
        if is_killing(run.metric, field, family=None) != expect:
            bad.append(name)
    ok = not bad
    return ok, "0" if ok else ",".join(bad), ""


def _check_bracket_table(run, args, kwargs, payload):
    """Classical Lie bracket of two field expressions against ':: EXPR'."""
    if payload is None:
        raise ScenarioError("bracket-table needs ':: EXPR'")
    lhs_a = evaluate(parse_expression(args[0]), run.env)
    lhs_b = evaluate(parse_expression(args[1]), run.env)
    rhs = evaluate(parse_expression(payload), run.env)
    diff = lhs_a.bracket(lhs_b) - rhs
    return _zeroish(diff), _residual_str(diff), ""


def _check_principal(run, args, kwargs, payload):
    data = CurvatureData(run.family, run.metric, run.frame)
    pr = data.principal_curvatures()
    bad = []
    kap = [evaluate(parse_expression(s), run.env)
           for s in kwargs["kappas"].split(",")]
    for got, want in zip(pr["kappas"], kap):
        if not equal_mod_ideal(got, want if isinstance(want, (RatFunc, Polynomial))
                               else RatFunc(Polynomial.constant(run.chart, want)),
                               run.family.fs):
            bad.append(format_value(got))
    for key in ("gauss", "mean"):
        if key in kwargs:
            want = evaluate(parse_expression(kwargs[key]), run.env)
            if not equal_mod_ideal(pr[key], want if isinstance(
                    want, (RatFunc, Polynomial)) else RatFunc(
                    Polynomial.constant(run.chart, want)), run.family.fs):
                bad.append(f"{key}={format_value(pr[key])}")
    ok = not bad
    return ok, "0" if ok else "; ".join(bad), ""


def _check_ricci_scalar(run, args, kwargs, payload):
    want = evaluate(parse_expression(kwargs["expect"]), run.env)
    if isinstance(want, Polynomial):
        want = RatFunc(want)
    twisted = kwargs.get("twisted", "false") == "true"
    if twisted:
        got = run.connection().ricci_scalar_star(run.frame)
    else:
        data = CurvatureData(run.family, run.metric, run.frame)
        got = data.ricci_scalar()
    ok = equal_mod_ideal(got, want, run.family.fs)
    note = "twisted" if twisted else "classical"
    return ok, "0" if ok else format_value(got), note


def _check_second_form_undeformed(run, args, kwargs, payload):
    conn = run.connection()
    bad = None
    for X in run.frame:
        for Y in run.frame:
            diff = conn.second_form_star(X, Y) - \
                run.family.second_form(run.metric, X, Y)
            if not _zeroish(diff):
                bad = diff
                break
    ok = bad is None
    return ok, "0" if ok else "nonzero-II-deformation", ""


def _check_connection_undeformed(run, args, kwargs, payload):
    from .geometry import flat_nabla
    conn = run.connection()
    fields = [run.env.resolve(n) for n in kwargs["fields"].split(",")]
    bad = None
    for X in fields:
        for Y in fields:
            diff = conn.nabla(X, Y) - flat_nabla(X, Y)
            if not _zeroish(diff):
                bad = diff
                break
    ok = bad is None
    return ok, "0" if ok else "deformed-connection", \
        f"fields={len(fields)}"


def _check_curvature_zero(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 5))
    projected = kwargs.get("scope", "ambient") == "projected"
    conn = run.connection()
    rng = run.rng(f"curvzero:{projected}")
    bad = None
    for _ in range(samples):
        X = run.rand_tangent(rng) if projected else run.rand_field(rng, 1)
        Y = run.rand_tangent(rng) if projected else run.rand_field(rng, 1)
        Z = run.rand_tangent(rng) if projected else run.rand_field(rng, 1)
        rv = conn.curvature_star(X, Y, Z, projected=projected)
        if projected:
            reduced = [ideal_reduce(c, run.family.fs) for c in rv.comps]
            if any(not r.is_zero() for r in reduced):
                bad = rv
                break
        elif not _zeroish(rv):
            bad = rv
            break
    ok = bad is None
    return ok, "0" if ok else "nonzero-curvature", f"samples={samples}"


def _check_second_form_metric_multiple(run, args, kwargs, payload):
    factor = evaluate(parse_expression(kwargs["factor"]), run.env)
    direction = run.env.resolve(kwargs["direction"])
    bad = None
    for A in run.frame:
        for B in run.frame:
            II = run.family.second_form(run.metric, A, B)
            gab = run.metric.apply(A, B)
            want = direction.scale(gab).scale(factor)
            diff = II - want
            reduced = [ideal_reduce(c, run.family.fs) for c in diff.comps]
            if any(not r.is_zero() for r in reduced):
                bad = diff
                break
    ok = bad is None
    return ok, "0" if ok else "nonzero-II-residual", ""


def _check_twisted_lc(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 5))
    conn = run.connection()
    rng = run.rng("twisted-lc")
    bad = None
    for _ in range(samples):
        X = run.rand_tangent(rng)
        Y = run.rand_tangent(rng)
        Z = run.rand_tangent(rng)
        t = conn.torsion_star(X, Y)
        if not _zeroish(t):
            bad = t
            break
        r = conn.compatibility_residual(X, Y, Z)
        if not _zeroish(r):
            bad = r
            break
    ok = bad is None
    return ok, "0" if ok else "nonzero-lc-residual", f"samples={samples}"


def _check_gauss(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 3))
    degree = int(kwargs.get("degree", 0))
    conn = run.connection()
    rng = run.rng("gauss")
    bad = None
    for _ in range(samples):
        quad = [run.rand_tangent(rng, degree) for _ in range(4)]
        resid = conn.gauss_residual(*quad)
        if not _zeroish(resid):
            bad = resid
            break
    ok = bad is None
    return ok, "0" if ok else format_value(bad), f"samples={samples}"


def _check_braiding(run, args, kwargs, payload):
    a = evaluate(parse_expression(args[0]), run.env)
    b = evaluate(parse_expression(args[1]), run.env)
    rep = run.ctx.braiding_report(a, b)
    return rep["holds"], _residual_str(rep["residual"]), \
        f"sign={rep['sign']}"


def _check_twisted_leibniz(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 5))
    rng = run.rng("twisted-leibniz")
    ctx = run.ctx
    bad = None
    for _ in range(samples):
        X = run.rand_field(rng, 1)
        h = run.rand_poly(rng, 2)
        hp = run.rand_poly(rng, 2)
        lhs = ctx.vector_action(X, ctx.star(h, hp))
        rhs = ctx.star(ctx.vector_action(X, h), hp)
        for c, (rh, rX) in ctx.twist.r_legs.swap().act_tuple((h, X)):
            rhs = rhs + ctx.star(rh, ctx.vector_action(rX, hp)).scale(c)
        if not _zeroish(lhs - rhs):
            bad = lhs - rhs
            break
    ok = bad is None
    return ok, "0" if ok else format_value(bad), f"samples={samples}"


def _check_star_assoc(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 10))
    rng = run.rng("star-assoc")
    ctx = run.ctx
    bad = None
    for _ in range(samples):
        a = run.rand_poly(rng, 3)
        b = run.rand_poly(rng, 3)
        c = run.rand_poly(rng, 3)
        diff = ctx.star(ctx.star(a, b), c) - ctx.star(a, ctx.star(b, c))
        if not _zeroish(diff):
            bad = diff
            break
    ok = bad is None
    return ok, "0" if ok else format_value(bad), f"samples={samples}"


def _check_d_isomorphism(run, args, kwargs, payload):
    samples = int(kwargs.get("samples", 5))
    rng = run.rng("d-isomorphism")
    tw = run.twist
    gens = run.gens
    order = min(2, tw.order)
    bad = None
    for _ in range(samples):
        u = run.rand_uelement(rng)
        w = run.rand_uelement(rng)
        star_uw = None
        for c, (l1, l2) in tw.inverse_legs.leg_pairs():
            piece = (l1.adjoint(u) * l2.adjoint(w)).scale(c)
            star_uw = piece if star_uw is None else star_uw + piece
        lhs = tw.d_iso(star_uw).truncate(order)
        rhs = (tw.d_iso(u) * tw.d_iso(w)).truncate(order)
        if lhs != rhs:
            bad = lhs - rhs
            break
    ok = bad is None
    return ok, "0" if ok else format_value(bad), \
        f"samples={samples} through-nu^{order}"


def _check_exactness(run, args, kwargs, payload):
    a = evaluate(parse_expression(args[0]), run.env)
    b = evaluate(parse_expression(args[1]), run.env)
    expect = kwargs.get("expect", "true") == "true"
    got = run.ctx.action_terminates(a, b)
    return got == expect, "0" if got == expect else f"terminates={got}", ""


CHECKS = {
    "twist-axioms": _check_twist_axioms,
    "unitarity": _check_unitarity,
    "reality": _check_reality,
    "eval": _check_eval,
    "reduce": _check_reduce,
    "classify": _check_classify,
    "central": _check_central,
    "level-star": _check_level_star,
    "differential-star": _check_differential_star,
    "dependence-star": _check_dependence_star,
    "twisted-relation": _check_twisted_relation,
    "duality": _check_duality,
    "projections": _check_projections,
    "killing": _check_killing,
    "bracket-table": _check_bracket_table,
    "principal": _check_principal,
    "ricci-scalar": _check_ricci_scalar,
    "second-form-undeformed": _check_second_form_undeformed,
    "connection-undeformed": _check_connection_undeformed,
    "curvature-zero": _check_curvature_zero,
    "second-form-metric-multiple": _check_second_form_metric_multiple,
    "twisted-lc": _check_twisted_lc,
    "gauss": _check_gauss,
    "braiding": _check_braiding,
    "twisted-leibniz": _check_twisted_leibniz,
    "star-assoc": _check_star_assoc,
    "d-isomorphism": _check_d_isomorphism,
    "exactness": _check_exactness,
}


def run_scenario_text(text: str) -> Report:
    setup, checks = parse_scenario(text)
    return ScenarioRunner(setup).run(checks)


def run_scenario_file(path) -> Report:
    with open(path, "r", encoding="utf-8") as fh:
        return run_scenario_text(fh.read())
