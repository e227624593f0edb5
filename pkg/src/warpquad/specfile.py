"""Textual metric spec files and the built-in presets.

Format: one ``key=value`` per line, ``#`` starts a comment.  Keys::

    n=<int>                       a=<int>
    interval=<lo>,<hi>            (inf/-inf allowed)
    rho=<expr>                    eta=<expr>[;<expr>...]
    c=<real>                      target=flat|sphere|hyperbolic
    variant=immersion|embedding   gamma=<expr>      (optional)
    safety=<real>     (optional)  grid_density=<int> (optional)

Parsing then printing then parsing again yields an identical spec.
"""

from __future__ import annotations

import math
from typing import Optional

from .blanusa import Gamma
from .expr import ParseError, parse
from .warped import MetricSpec, SpecError

_REQUIRED = ("n", "a", "interval", "rho", "eta", "c", "target", "variant")
_OPTIONAL = ("gamma", "safety", "grid_density")


def _parse_bound(text: str) -> float:
    text = text.strip()
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    try:
        return float(text)
    except ValueError:
        raise SpecError(f"bad interval endpoint {text!r}")


def _fmt_bound(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def parse_spec_text(text: str) -> MetricSpec:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in fields:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    missing = [k for k in _REQUIRED if k not in fields]
    if missing:
        raise SpecError(f"missing required keys: {', '.join(missing)}")
    unknown = [k for k in fields if k not in _REQUIRED + _OPTIONAL]
    if unknown:
        raise SpecError(f"unknown keys: {', '.join(unknown)}")
    try:
        n = int(fields["n"])
        a = int(fields["a"])
    except ValueError as e:
        raise SpecError(f"bad integer field: {e}")
    parts = fields["interval"].split(",")
    if len(parts) != 2:
        raise SpecError(f"interval must be <lo>,<hi>, got {fields['interval']!r}")
    interval = (_parse_bound(parts[0]), _parse_bound(parts[1]))
    try:
        rho = parse(fields["rho"])
        eta = tuple(parse(s.strip()) for s in fields["eta"].split(";"))
    except ParseError as e:
        raise SpecError(f"bad expression: {e}")
    try:
        c = float(fields["c"])
    except ValueError:
        raise SpecError(f"bad c: {fields['c']!r}")
    gamma: Optional[Gamma] = None
    if "gamma" in fields:
        try:
            gamma = Gamma(parse(fields["gamma"]), interval)
        except ParseError as e:
            raise SpecError(f"bad gamma expression: {e}")
    kwargs = {}
    if "safety" in fields:
        try:
            kwargs["safety"] = float(fields["safety"])
        except ValueError:
            raise SpecError(f"bad safety: {fields['safety']!r}")
    if "grid_density" in fields:
        try:
            kwargs["grid_density"] = int(fields["grid_density"])
        except ValueError:
            raise SpecError(f"bad grid_density: {fields['grid_density']!r}")
    spec = MetricSpec(
        n=n,
        a=a,
        interval=interval,
        rho=rho,
        eta=eta,
        c=c,
        target=fields["target"],
        variant=fields["variant"],
        gamma=gamma,
        **kwargs,
    )
    spec._gamma_explicit = "gamma" in fields
    return spec


def print_spec_text(spec: MetricSpec) -> str:
    lines = [
        f"n={spec.n}",
        f"a={spec.a}",
        f"interval={_fmt_bound(spec.interval[0])},{_fmt_bound(spec.interval[1])}",
        f"rho={spec.rho}",
        "eta=" + ";".join(str(e) for e in spec.eta),
        f"c={spec.c:.17g}",
        f"target={spec.target}",
        f"variant={spec.variant}",
    ]
    if getattr(spec, "_gamma_explicit", False):
        lines.append(f"gamma={spec.gamma.forward}")
    if spec.safety != 2.0:
        lines.append(f"safety={spec.safety:.17g}")
    if spec.grid_density != 64:
        lines.append(f"grid_density={spec.grid_density}")
    return "\n".join(lines) + "\n"


def load_spec(path: str) -> MetricSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


PRESET_NAMES = (
    "hyperbolic-plane",
    "rozendorn",
    "azov-t",
    "azov-conformal",
    "sol3",
    "product-euclidean",
)

# presets taking a user function argument
_FUNCTION_PRESETS = {"rozendorn": "cosh(t)", "azov-t": "exp(t)",
                     "azov-conformal": "cosh(t)"}


class PresetError(SpecError):
    pass


def preset_spec_text(
    name: str,
    function: Optional[str] = None,
    n: Optional[int] = None,
    a: int = 0,
    c: float = 1.0,
    target: str = "flat",
    variant: str = "immersion",
) -> str:
    """Spec text for a named preset.

    hyperbolic-plane: the hyperbolic plane dt^2 + e^{2t} dx^2.
    rozendorn: surface dt^2 + f(t)^2 dx^2 (f defaults to cosh(t)).
    azov-t: dt^2 + f(t)^2 sum dx_j^2 on n coordinates.
    azov-conformal: g(x_1)^2 sum dx_j^2, written with x_1 as the t axis.
    sol3: dt^2 + e^{2t} dx^2 + e^{-2t} dy^2.
    product-euclidean: I x R^1 x R^2 with one warping per factor.
    """
    if name not in PRESET_NAMES:
        raise PresetError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    if function is not None and name not in _FUNCTION_PRESETS:
        raise PresetError(f"preset {name!r} does not take a function argument")
    if function is None:
        function = _FUNCTION_PRESETS.get(name, "")
    if function:
        try:
            parse(function)
        except ParseError as e:
            raise PresetError(f"bad preset function: {e}")

    if name == "hyperbolic-plane":
        nn = n or 2
        if nn != 2:
            raise PresetError("hyperbolic-plane is a surface; n must be 2")
        rho, etas = "1", ["exp(t)"]
    elif name == "rozendorn":
        nn = n or 2
        if nn != 2:
            raise PresetError("rozendorn is a surface; n must be 2")
        rho, etas = "1", [function]
    elif name == "azov-t":
        nn = n or 3
        rho, etas = "1", [function] * (nn - 1)
    elif name == "azov-conformal":
        nn = n or 3
        rho, etas = function, [function] * (nn - 1)
    elif name == "sol3":
        nn = n or 3
        if nn != 3:
            raise PresetError("sol3 is three-dimensional; n must be 3")
        rho, etas = "1", ["exp(t)", "exp(-t)"]
    else:  # product-euclidean: factors R^1 and R^2
        nn = n or 4
        if nn < 3:
            raise PresetError("product-euclidean needs n >= 3")
        rho, etas = "1", ["exp(t)"] + ["cosh(t)"] * (nn - 2)

    if not 0 <= a <= nn - 1:
        raise PresetError(f"a must be in [0, {nn - 1}] for this preset")
    lines = [
        f"# preset: {name}",
        f"n={nn}",
        f"a={a}",
        "interval=-inf,inf",
        f"rho={rho}",
        "eta=" + ";".join(etas),
        f"c={c:.17g}",
        f"target={target}",
        f"variant={variant}",
    ]
    return "\n".join(lines) + "\n"
