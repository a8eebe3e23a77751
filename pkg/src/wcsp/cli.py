"""Command-line interface and the plain-text problem format.

Problem files are line oriented; ``#`` starts a comment::

    domain 2
    function EQW 2        # name, arity; then d^r values, last index fastest
      2 0
      0 3
    end
    instance chain 3      # name, variable count; then one application per line
      EQW 1 2
      EQW 2 3
    end
    graph edge 2          # name, vertex count; then one edge per line
      1 2
    end

Grammar (tokens are whitespace separated)::

    file      := "domain" INT block*
    block     := function | instance | graph
    function  := "function" NAME INT  RATIONAL*  "end"
    instance  := "instance" NAME INT  (NAME INT*)* "end"
    graph     := "graph" NAME INT  (INT INT)*    "end"
    RATIONAL  := INT | INT "/" INT

Every command prints stable ``key=value`` lines.  Exit codes: 0 success,
1 a ``both`` count disagreed, 2 malformed input, 3 an enumeration bound was
hit, 4 a method was refused (e.g. structured counting on a language that is
not certified tractable).
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from wcsp.errors import NotApplicable, ResourceError, ValidationError
from wcsp.model import FunctionTable, Instance, Language

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_RESOURCE, EXIT_REFUSED = 0, 1, 2, 3, 4


class ParseError(ValidationError):
    def __init__(self, line: int, token: str, message: str):
        self.line, self.token = line, token
        super().__init__(f"line {line}: {message} (at {token!r})")


@dataclass
class Problem:
    d: int
    functions: list = field(default_factory=list)
    instances: dict = field(default_factory=dict)
    graphs: dict = field(default_factory=dict)

    @property
    def language(self) -> Language:
        return Language(self.d, tuple(self.functions))

    def instance(self, name: str | None) -> Instance:
        if not self.instances:
            raise ValidationError("file defines no instance")
        if name is None:
            return next(iter(self.instances.values()))
        if name not in self.instances:
            raise ValidationError(f"no instance named {name!r}")
        return self.instances[name]

    def graph(self, name: str | None):
        if not self.graphs:
            raise ValidationError("file defines no graph")
        if name is None:
            return next(iter(self.graphs.values()))
        if name not in self.graphs:
            raise ValidationError(f"no graph named {name!r}")
        return self.graphs[name]


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        toks = line.split()
        if toks:
            yield lineno, toks


def _int(lineno: int, tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, tok, f"expected {what}") from None


def _rational(lineno: int, tok: str) -> Fraction:
    try:
        value = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(lineno, tok, "expected a rational p/q") from None
    if value < 0:
        raise ParseError(lineno, tok, "weights must be non-negative")
    return value


def parse_problem(text: str) -> Problem:
    from wcsp.reductions import Graph

    lines = list(_tokens(text))
    if not lines:
        raise ParseError(0, "", "empty file")
    lineno, toks = lines[0]
    if toks[0] != "domain" or len(toks) != 2:
        raise ParseError(lineno, toks[0], "file must start with 'domain D'")
    d = _int(lineno, toks[1], "domain size")
    if d < 1:
        raise ParseError(lineno, toks[1], "domain size must be positive")
    problem = Problem(d)
    pending: list = []  # functions must all be known before instances are built
    k = 1
    while k < len(lines):
        lineno, toks = lines[k]
        kind = toks[0]
        if kind not in ("function", "instance", "graph"):
            raise ParseError(lineno, kind, "expected 'function', 'instance' or 'graph'")
        if len(toks) != 3:
            raise ParseError(lineno, kind, f"'{kind}' takes a name and a size")
        name, size = toks[1], _int(lineno, toks[2], "a size")
        body = []
        k += 1
        while k < len(lines) and lines[k][1] != ["end"]:
            body.append(lines[k])
            k += 1
        if k == len(lines):
            raise ParseError(lineno, kind, f"block '{name}' has no 'end'")
        k += 1
        if kind == "function":
            values = [_rational(ln, t) for ln, ts in body for t in ts]
            if size < 1:
                raise ParseError(lineno, toks[2], "arity must be positive")
            if len(values) != d**size:
                raise ParseError(lineno, name, f"function needs {d ** size} values, got {len(values)}")
            if any(f.name == name for f in problem.functions):
                raise ParseError(lineno, name, "duplicate function name")
            problem.functions.append(FunctionTable(name, d, size, tuple(values)))
        elif kind == "instance":
            apps = [(ln, ts[0], tuple(_int(ln, t, "a variable index") for t in ts[1:])) for ln, ts in body]
            pending.append((lineno, name, size, apps))
        else:
            edges = []
            for ln, ts in body:
                if len(ts) != 2:
                    raise ParseError(ln, ts[0], "an edge is two vertex numbers")
                edges.append((_int(ln, ts[0], "a vertex"), _int(ln, ts[1], "a vertex")))
            try:
                problem.graphs[name] = Graph(size, tuple(edges))
            except ValidationError as exc:
                raise ParseError(lineno, name, str(exc)) from None
    if not problem.functions:
        raise ParseError(lines[0][0], "domain", "file defines no function")
    language = problem.language
    for lineno, name, n, apps in pending:
        for ln, fname, idx in apps:
            if fname not in language:
                raise ParseError(ln, fname, "unknown function")
            if len(idx) != language[fname].arity:
                raise ParseError(ln, fname, f"expected {language[fname].arity} variable indices")
            for i in idx:
                if not 1 <= i <= n:
                    raise ParseError(ln, str(i), f"variable index outside [1, {n}]")
        problem.instances[name] = Instance(language, n, tuple((f, idx) for _, f, idx in apps))
    return problem


def fmt(value, explicit: bool = False) -> str:
    """Lowest-terms ``p/q``; integers print bare unless ``explicit``."""
    value = Fraction(value)
    if explicit and value.denominator == 1:
        return f"{value.numerator}/1"
    return str(value)


def dump_problem(language: Language, instances: dict = None, graphs: dict = None, explicit: bool = False) -> str:
    d = language.d
    out = [f"domain {d}"]
    for f in language.functions:
        out.append(f"function {f.name} {f.arity}")
        for k in range(0, len(f.values), d):
            out.append("  " + " ".join(fmt(v, explicit) for v in f.values[k:k + d]))
        out.append("end")
    for name, inst in (instances or {}).items():
        out.append(f"instance {name} {inst.n}")
        for fname, idx in inst.applications:
            out.append("  " + " ".join([fname, *map(str, idx)]))
        out.append("end")
    for name, G in (graphs or {}).items():
        out.append(f"graph {name} {G.n_vertices}")
        for u, v in G.edges:
            out.append(f"  {u} {v}")
        out.append("end")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit(key: str, value) -> None:
    print(f"{key}={value}")


def _row(values, explicit) -> str:
    return ",".join(fmt(v, explicit) for v in values)


def cmd_count(args, problem: Problem) -> int:
    from wcsp.counter import structured_count
    from wcsp.dichotomy import classify
    from wcsp.oracle import partition_function

    inst = problem.instance(args.instance)
    ex = args.explicit_denominators
    results = {}
    if args.method in ("structured", "both"):
        verdict = classify(inst.language, automorphism_max_d=args.automorphism_max_d)
        if not verdict.tractable:
            raise NotApplicable(f"structured counting refused: language is {verdict.outcome} ({verdict.reason})")
        results["structured"] = structured_count(inst, certified=True, bound=args.bound)
    if args.method in ("brute", "both"):
        results["brute"] = partition_function(inst, args.bound, workers=args.threads)
    _emit("method", args.method)
    if args.method == "both":
        z, zb = results["structured"], results["brute"]
        _emit("Z", fmt(z, ex))
        _emit("Z_brute", fmt(zb, ex))
        _emit("check", "PASS" if z == zb else "FAIL")
        return EXIT_OK if z == zb else EXIT_FAIL
    _emit("Z", fmt(results[args.method], ex))
    return EXIT_OK


def cmd_classify(args, problem: Problem) -> int:
    from wcsp.dichotomy import NoMaltsev, classify

    v = classify(problem.language, automorphism_max_d=args.automorphism_max_d)
    _emit("verdict", v.outcome)
    if v.reason is not None:
        _emit("reason", v.reason)
    if v.maltsev is not None:
        _emit("maltsev", ",".join(map(str, v.maltsev.table)))
    if isinstance(v.reason, NoMaltsev):
        for m, name, triple in v.reason.refutations:
            _emit(f"refutes[{','.join(map(str, m.table))}]", f"{name}:{' '.join(map(str, triple))}")
    _emit("automorphisms", len(v.automorphisms))
    for quad, perm in v.automorphisms.items():
        _emit(f"automorphism({','.join(map(str, quad))})", ",".join(map(str, perm)))
    if v.unbalanced is not None:
        inst = v.unbalanced.instance
        _emit("unbalanced_n", inst.n)
        _emit("unbalanced_applications", ";".join(f"{f} {' '.join(map(str, idx))}" for f, idx in inst.applications))
        _emit("unbalanced_split", ",".join(map(str, v.unbalanced.verdict.split)))
    return EXIT_OK


def cmd_vecrep(args, problem: Problem) -> int:
    from wcsp.vecrep import NotBlockRank1, function_vecrep, instance_vecrep

    ex = args.explicit_denominators
    if args.instance is not None:
        rep = instance_vecrep(problem.instance(args.instance))
    else:
        rep = function_vecrep(problem.language[args.function])
    if isinstance(rep, NotBlockRank1):
        _emit("status", "NOT_BLOCK_RANK_1")
        _emit("level", rep.level)
        return EXIT_OK
    _emit("status", "OK")
    for j, s in enumerate(rep.factors, start=1):
        _emit(f"s{j}", _row(s, ex))
    return EXIT_OK


def cmd_check_balance(args, problem: Problem) -> int:
    from wcsp.oracle import BALANCE_TESTS

    inst = problem.instance(args.instance)
    v = BALANCE_TESTS[args.mode](inst, args.bound)
    _emit("mode", v.mode)
    _emit("balanced", "true" if v.balanced else "false")
    if not v.balanced:
        _emit("split", ",".join(map(str, v.split)))
        _emit("witness", v.witness)
    return EXIT_OK


def cmd_gadget(args, problem: Problem) -> int:
    from wcsp.reductions import gadget_matrix, hardness_gadget

    inst = problem.instance(args.instance)
    G = problem.graph(args.graph)
    IG = hardness_gadget(inst, args.a, args.b, G)
    A = gadget_matrix(inst, args.a, args.b, args.bound)
    name = f"{args.instance or next(iter(problem.instances))}_gadget"
    text = dump_problem(problem.language, {name: IG}, explicit=args.explicit_denominators)
    header = "".join(f"# A row {k + 1}: {_row(r, args.explicit_denominators)}\n" for k, r in enumerate(A.entries))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(header + text)
        _emit("instance", name)
        _emit("variables", IG.n)
        _emit("applications", IG.m)
    else:
        sys.stdout.write(header + text)
    return EXIT_OK


def cmd_reduce_unweighted(args, problem: Problem) -> int:
    from wcsp.oracle import partition_function
    from wcsp.reductions import count_support, value_set

    inst = problem.instance(args.instance)
    values = value_set(inst)
    _emit("values", _row(values.values, args.explicit_denominators))
    _emit("support", count_support(inst, lambda J: partition_function(J, args.bound, workers=args.threads)))
    return EXIT_OK


def cmd_sample(args, _problem) -> int:
    from wcsp.fixtures import random_instance, random_language, random_tractable_language

    rng = random.Random(args.seed)
    if args.kind == "tractable":
        lang = random_tractable_language(rng, args.d)
    else:
        lang = random_language(rng, args.d)
    instances = {f"i{k + 1}": random_instance(rng, lang, args.n, args.m) for k in range(args.count)}
    sys.stdout.write(dump_problem(lang, instances, explicit=args.explicit_denominators))
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "classify": cmd_classify,
    "vecrep": cmd_vecrep,
    "check-balance": cmd_check_balance,
    "gadget": cmd_gadget,
    "reduce-unweighted": cmd_reduce_unweighted,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    from wcsp.dichotomy import AUTOMORPHISM_MAX_D
    from wcsp.oracle import DEFAULT_BOUND

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="max assignments to enumerate")
    common.add_argument("--threads", type=int, default=1, help="worker processes for brute-force sums")
    common.add_argument("--explicit-denominators", action="store_true", help="print integers as n/1")
    common.add_argument("--automorphism-max-d", type=int, default=AUTOMORPHISM_MAX_D)

    p = argparse.ArgumentParser(prog="wcsp", description="Exact weighted #CSP toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help, file=True):
        sp = sub.add_parser(name, help=help, parents=[common])
        if file:
            sp.add_argument("file")
        return sp

    sp = add("count", "partition function of an instance")
    sp.add_argument("--instance")
    sp.add_argument("--method", choices=("brute", "structured", "both"), default="both")
    add("classify", "tractability verdict for the file's language")
    sp = add("vecrep", "vector representation of a function or instance")
    sp.add_argument("function", nargs="?")
    sp.add_argument("--instance")
    sp = add("check-balance", "balance test on an instance")
    sp.add_argument("--instance")
    sp.add_argument("--mode", choices=("balance", "weak", "primitive", "strong"), default="balance")
    sp = add("gadget", "emit the graph gadget instance")
    sp.add_argument("--instance")
    sp.add_argument("--graph")
    sp.add_argument("-a", type=int, required=True)
    sp.add_argument("-b", type=int, required=True)
    sp.add_argument("-o", "--output")
    sp = add("reduce-unweighted", "support size via the replication reduction")
    sp.add_argument("--instance")
    sp = add("sample", "emit a random problem file", file=False)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--kind", choices=("tractable", "random"), default="tractable")
    sp.add_argument("-d", type=int, default=2)
    sp.add_argument("-n", type=int, default=4)
    sp.add_argument("-m", type=int, default=3)
    sp.add_argument("--count", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "vecrep" and args.function is None and args.instance is None:
            raise ValidationError("vecrep needs a function name or --instance")
        problem = None
        if hasattr(args, "file"):
            with open(args.file) as fh:
                problem = parse_problem(fh.read())
        return COMMANDS[args.command](args, problem)
    except (ValidationError, OSError) as exc:
        print(f"error={exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceError as exc:
        print(f"error={exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NotApplicable as exc:
        print(f"refused={exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
