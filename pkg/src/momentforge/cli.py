"""Command line interface.

Subcommands::

    momentforge convert  --from moments --to z --support halfline --input m.csv
    momentforge sample   --space bounded:0,1 --n 3 --count 1000 --seed 7
    momentforge ensemble --kind jacobi --n 6 --beta 2 --moments 3 --count 100
    momentforge clt      --preset halfline --k 3 --n 2000 --samples 20000 --report r.json

Exit codes: 0 success, 1 a CLT verdict failed, 2 domain error (for example
moments outside the interior), 3 usage or parse error.

CSV values are written with 17 significant digits, which round-trips any
double exactly; exact rational input to ``convert`` is written as ``p/q``.
The seed defaults to ``MOMENTFORGE_SEED`` or, failing that, 20261014.
"""
import argparse
import json
import os
import re
import secrets
import sys
from fractions import Fraction

import numpy as np

from . import core, distributions, ensembles, statlab
from .core import Bounded, HalfLine
from .errors import EmptyInput, MomentForgeError, NonInteriorMoments

DEFAULT_SEED = statlab.DEFAULT_SEED
EXIT_OK, EXIT_FAILED, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 3
FORMATS = ("moments", "canonical", "z", "recurrence")


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- value formatting --------------------------------------------------------------

def format_value(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(stream, header, rows):
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(format_value(v) for v in row) + "\n")


_NUMBER = re.compile(r"^[+-]?(\d+(/\d+)?|(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?|inf|nan)$", re.I)


def parse_token(token: str):
    token = token.strip()
    if not _NUMBER.match(token):
        raise ParseError(f"cannot parse number {token!r}")
    if re.fullmatch(r"[+-]?\d+", token):
        return int(token)
    if "/" in token:
        return Fraction(token)
    return float(token)


def parse_vectors(text: str) -> list:
    """Lines of comma- or whitespace-separated numbers; a non-numeric first line is a header."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if lines and not _NUMBER.match(re.split(r"[,\s]+", lines[0].strip())[0]):
        lines = lines[1:]
    if not lines:
        raise ParseError("input contains no vectors")
    return [[parse_token(t) for t in re.split(r"[,\s]+", ln.strip()) if t] for ln in lines]


def parse_list(text: str) -> list:
    try:
        return [parse_token(t) for t in text.split(",") if t.strip()]
    except ParseError as exc:
        raise ParseError(f"bad list {text!r}: {exc}") from None


def _support(text):
    try:
        return core.parse_support(text)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# -- seeds -------------------------------------------------------------------------

def resolve_seed(args) -> int:
    if getattr(args, "fresh_seed", False):
        seed = secrets.randbits(63)
        print(f"seed: {seed}", file=sys.stderr)
        return seed
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MOMENTFORGE_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"MOMENTFORGE_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="\n"), True


# -- convert -----------------------------------------------------------------------

def _header(kind, length):
    if kind == "moments":
        return [f"m{i}" for i in range(1, length + 1)]
    if kind == "canonical":
        return [f"p{i}" for i in range(1, length + 1)]
    if kind == "z":
        return [f"z{i}" for i in range(1, length + 1)]
    return [f"b{i // 2 + 1}" if i % 2 == 0 else f"a{i // 2 + 1}" for i in range(length)]


def convert_vector(values, src, dst, support):
    """Convert one coordinate vector; ``support`` is a SupportClass."""
    interval = (support.a, support.b) if isinstance(support, Bounded) else None
    if src == "canonical" and interval is None:
        raise ParseError("canonical coordinates need --support bounded:a,b")
    if src == "z" and not isinstance(support, HalfLine):
        raise ParseError("z-parameters need --support halfline")
    if dst == "canonical" and interval is None:
        raise ParseError("canonical coordinates need --support bounded:a,b")
    if dst == "z" and not isinstance(support, HalfLine):
        raise ParseError("z-parameters need --support halfline")
    if src == "moments":
        m = tuple(values)
    elif src == "canonical":
        m = core.canonical_to_moments(core.CanonicalMoments(values, interval)).m
    elif src == "z":
        m = core.skibinsky_forward(core.ZVector(values)).m
    else:
        if len(values) % 2 == 0:
            raise ParseError("recurrence input needs odd length 2n-1 (b1,a1,...,bn)")
        m = core.recurrence_to_moments(core.RecurrenceCoefficients.from_interleaved(values)).m
    if dst == "moments":
        if src != "moments":
            return m
        check = core.is_interior(core.MomentVector(m, support))
        if not check:
            raise NonInteriorMoments(check.message, index=check.failing_index)
        return m
    if dst == "canonical":
        return core.moments_to_canonical(m, support).p
    if dst == "z":
        return core.moments_to_z(m).z
    return core.moments_to_recurrence(m).interleaved()


def cmd_convert(args):
    support = _support(args.support)
    if args.input == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.input) as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {args.input}: {exc}") from None
    vectors = parse_vectors(text)
    if any(not v for v in vectors):
        raise ParseError("empty vector in input")
    out_rows = [convert_vector(v, args.src, args.dst, support) for v in vectors]
    width = max(len(r) for r in out_rows)
    stream, close = _open_out(args.output)
    try:
        write_csv(stream, _header(args.dst, width), out_rows)
    finally:
        if close:
            stream.close()
    return EXIT_OK


# -- sample ------------------------------------------------------------------------

def _law_params(space, n, gamma, delta):
    """``delta`` is a parsed list or the string ``'n'`` (CLT rates)."""
    g = gamma[0] if len(gamma) == 1 else gamma
    if delta == "n":
        d = None
    else:
        d = delta[0] if len(delta) == 1 else delta
    if isinstance(space, Bounded):
        return distributions.MomentLawParams.bounded(n, g, n if d is None else d, (space.a, space.b))
    if isinstance(space, HalfLine):
        return distributions.MomentLawParams.halfline(n, g, d)
    return distributions.MomentLawParams.realline(n, g, d)


def cmd_sample(args):
    space = _support(args.space)
    gamma = parse_list(args.gamma)
    if args.delta is None:
        delta = [0] if isinstance(space, Bounded) else "n"
    elif args.delta.strip() == "n":
        delta = "n"
    else:
        delta = parse_list(args.delta)
    params = _law_params(space, args.n, gamma, delta)
    seed = resolve_seed(args)

    def draw(gen, m):
        if isinstance(space, Bounded):
            return distributions.sample_moments_bounded(params, gen, size=m)
        if isinstance(space, HalfLine):
            return distributions.sample_moments_halfline(params, gen, size=m)[1]
        return distributions.sample_moments_realline(params, gen, size=m)[1]

    rows = distributions.draw_blocks(draw, seed, args.count, workers=args.workers)
    stream, close = _open_out(args.output)
    try:
        write_csv(stream, _header("moments", rows.shape[1]), rows)
    finally:
        if close:
            stream.close()
    return EXIT_OK


# -- ensemble ----------------------------------------------------------------------

def cmd_ensemble(args):
    spec = ensembles.EnsembleSpec(args.kind, args.n, args.beta, args.a, args.b,
                                  "clt_rescaled" if args.rescaled else "none", args.hermite_shape)
    seed = resolve_seed(args)
    K = args.moments

    def draw(gen, m):
        d, c = ensembles.tridiagonal_batch(spec, gen, m)
        if not args.atoms:
            return ensembles.tridiagonal_moments(d, c, K)
        atoms, weights = ensembles.spectral_batch(d, c)
        moments = np.einsum("ri,jri->rj", weights, atoms[None] ** np.arange(1, K + 1)[:, None, None])
        return np.hstack([moments, atoms, weights])

    rows = distributions.draw_blocks(draw, seed, args.count, workers=args.workers)
    header = _header("moments", K)
    if args.atoms:
        header += [f"lambda{i}" for i in range(1, args.n + 1)] + [f"w{i}" for i in range(1, args.n + 1)]
    stream, close = _open_out(args.output)
    try:
        write_csv(stream, header, rows)
    finally:
        if close:
            stream.close()
    return EXIT_OK


# -- clt ---------------------------------------------------------------------------

def cmd_clt(args):
    seed = resolve_seed(args)
    gamma = parse_list(args.gamma)
    gamma = gamma[0] if len(gamma) == 1 else gamma
    spec = statlab.clt_preset(args.preset, n=args.n, k=args.k, N=args.samples, seed=seed,
                              beta=args.beta, gamma=gamma, wrong_centering=args.wrong_centering,
                              workers=args.workers)
    report = statlab.run_clt(spec).to_dict()
    text = json.dumps(report, indent=2) + "\n"
    stream, close = _open_out(args.report)
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()
    return EXIT_OK if report["pass"] else EXIT_FAILED


# -- parser ------------------------------------------------------------------------

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _add_seed(p):
    p.add_argument("--seed", type=_seed, default=None,
                   help=f"master seed (default: $MOMENTFORGE_SEED or {DEFAULT_SEED})")
    p.add_argument("--fresh-seed", action="store_true",
                   help="draw a random seed and print it to stderr")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker threads; output does not depend on this")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentforge", description="Random moment spaces and beta-ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between moment coordinates")
    p.add_argument("--from", dest="src", choices=FORMATS, required=True)
    p.add_argument("--to", dest="dst", choices=FORMATS, required=True)
    p.add_argument("--support", required=True, help="bounded:a,b | halfline | realline")
    p.add_argument("--input", required=True, help="input file, or - for stdin")
    p.add_argument("--output", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("sample", help="sample moment vectors from f_n, g_n or h_{2n-1}")
    p.add_argument("--space", required=True, help="bounded:a,b | halfline | realline")
    p.add_argument("--n", type=_positive_int, required=True,
                   help="dimension (real line: number of diagonal coefficients)")
    p.add_argument("--gamma", default="0", help="comma list or a single value")
    p.add_argument("--delta", default=None,
                   help="comma list, a single value, or 'n' for the CLT rates "
                        "(default 0 on bounded spaces, 'n' otherwise)")
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--output", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("ensemble", help="sample beta-ensemble spectral-measure moments")
    p.add_argument("--kind", choices=ensembles.KINDS, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--a", type=float, default=0.0, help="exponent gamma0 (Jacobi, Laguerre)")
    p.add_argument("--b", type=float, default=0.0, help="exponent delta0 (Jacobi)")
    p.add_argument("--rescaled", action="store_true", help="CLT scaling of the weight")
    p.add_argument("--hermite-shape", choices=ensembles.HERMITE_SHAPES,
                   default=ensembles.DEFAULT_HERMITE_SHAPE)
    p.add_argument("--moments", type=_positive_int, required=True)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--atoms", action="store_true", help="also write atoms and weights")
    p.add_argument("--output", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("clt", help="Monte-Carlo check of a moment CLT")
    p.add_argument("--preset", choices=statlab.PRESETS, required=True)
    p.add_argument("--k", type=_positive_int, default=3)
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--samples", type=_positive_int, default=20000)
    p.add_argument("--beta", type=float, default=2.0, help="ensemble presets only")
    p.add_argument("--gamma", default="0", help="moment-law exponents (comma list or value)")
    p.add_argument("--wrong-centering", action="store_true",
                   help="negative control: centre at the limit law of another family")
    p.add_argument("--report", default=None, help="JSON report path (default stdout)")
    _add_seed(p)
    p.set_defaults(func=cmd_clt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, EmptyInput) as exc:
        print(f"momentforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonInteriorMoments as exc:
        where = f" (coordinate {exc.index})" if exc.index is not None else ""
        print(f"momentforge: not interior{where}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (MomentForgeError, ValueError) as exc:
        print(f"momentforge: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
