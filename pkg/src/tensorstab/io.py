"""JSON readers and writers for models, forms, filtrations and delta.

Coordinates in files are 1-based (``{"coordinate": [2, 3]}`` is the step
spanned by e2 and e3); rationals are strings ``"p/q"`` or integers.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

from .errors import TensorStabError
from .exactalg import DeltaPoly, EvPoly, format_rat, rat
from .sheafmodel import Coordinate, Declared, FiltStep, SheafModel, Summand
from .tensor import ANTISYMMETRIC, SYMMETRIC, TensorForm

SCHEMA_VERSION = "1"
BUILTIN_PREFIX = "builtin:"
BUILTINS = {"p2": "p2_example.json"}


class InputError(TensorStabError):
    """Malformed input file or argument."""


def _require(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"{where}: missing field {key!r}")
    return data[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}: expected an integer, got {value!r}")
    return value


def _rat(value, where: str) -> Fraction:
    try:
        return rat(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{where}: {exc}") from None


def model_from_json(data: dict) -> SheafModel:
    space = _require(data, "space", "model")
    summands = _require(data, "summands", "model")
    if not isinstance(summands, list) or not summands:
        raise InputError("model: summands must be a nonempty list")
    parsed = []
    for k, s in enumerate(summands, start=1):
        where = f"model summand {k}"
        parsed.append(Summand(_int(_require(s, "twist", where), where), _int(s.get("colength", 0), where)))
    return SheafModel(space, tuple(parsed))


def form_from_json(data: dict) -> TensorForm:
    s = _int(_require(data, "s", "form"), "form s")
    c = _int(data.get("c", 1), "form c")
    entries = _require(data, "entries", "form")
    symmetry = None
    if data.get("symmetric"):
        symmetry = SYMMETRIC
    if data.get("antisymmetric"):
        if symmetry:
            raise InputError("form: symmetric and antisymmetric are exclusive")
        symmetry = ANTISYMMETRIC

    def conv(x):
        return [conv(y) for y in x] if isinstance(x, list) else _rat(x, "form entry")

    try:
        form = TensorForm.from_dense(conv(entries), s, c, symmetry)
    except ValueError as exc:
        raise InputError(f"form: {exc}") from None
    if "dim" in data and _int(data["dim"], "form dim") != form.dim:
        raise InputError(f"form: dim {data['dim']} does not match entries ({form.dim})")
    return form


def poly_from_json(value, where: str = "polynomial") -> EvPoly:
    """Accepts ``{"coeffs": [...]}`` or a bare list, highest degree first."""
    coeffs = value.get("coeffs") if isinstance(value, dict) else value
    if not isinstance(coeffs, list) or not coeffs:
        raise InputError(f"{where}: expected a nonempty coefficient list")
    return EvPoly([_rat(x, where) for x in coeffs])


def poly_to_json(p: EvPoly) -> dict:
    return {"coeffs": [format_rat(x) for x in (p.coeffs or (Fraction(0),))]}


def step_from_json(data: dict, rank: int) -> FiltStep:
    if "coordinate" in data:
        idx = data["coordinate"]
        if not isinstance(idx, list) or not idx:
            raise InputError("coordinate step needs a nonempty index list")
        for i in idx:
            if _int(i, "coordinate index") < 1 or i > rank:
                raise InputError(f"coordinate index {i} outside 1..{rank}")
        if len(set(idx)) != len(idx):
            raise InputError("coordinate step repeats an index")
        return Coordinate(i - 1 for i in idx)
    if "rank" in data:
        basis = data.get("basis")
        if basis is not None:
            basis = tuple(tuple(_rat(x, "basis entry") for x in v) for v in basis)
        try:
            return Declared(
                _int(data["rank"], "declared rank"),
                poly_from_json(_require(data, "hilbert", "declared step"), "declared hilbert"),
                str(data.get("label", "declared")),
                basis,
            )
        except TensorStabError as exc:
            raise InputError(str(exc)) from None
    raise InputError("a step needs either 'coordinate' or 'rank' + 'hilbert'")


def step_to_json(step: FiltStep) -> dict:
    if isinstance(step, Coordinate):
        return {"coordinate": [i + 1 for i in sorted(step.indices)]}
    out: dict[str, Any] = {"rank": step.rank, "hilbert": poly_to_json(step.hilbert), "label": step.label}
    if step.basis is not None:
        out["basis"] = [[format_rat(x) for x in v] for v in step.basis]
    return out


def filtration_from_json(data: dict, rank: int):
    from .filtstab import WeightedFiltration

    steps = _require(data, "steps", "filtration")
    if not isinstance(steps, list) or not steps:
        raise InputError("filtration: steps must be a nonempty list")
    parsed = tuple(step_from_json(s, rank) for s in steps)
    weights = data.get("weights", ["1"] * len(parsed))
    if len(weights) != len(parsed):
        raise InputError("filtration: one weight per step is required")
    try:
        return WeightedFiltration(parsed, tuple(_rat(w, "weight") for w in weights))
    except TensorStabError as exc:
        raise InputError(f"filtration: {exc}") from None


def filtration_to_json(filtration) -> dict:
    return {
        "steps": [step_to_json(s) for s in filtration.steps],
        "weights": [format_rat(w) for w in filtration.weights],
    }


def parse_delta(text: str, n: int) -> DeltaPoly:
    try:
        return DeltaPoly.parse(text, n)
    except TensorStabError:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"delta {text!r}: {exc}") from None


def delta_to_json(delta: DeltaPoly) -> dict:
    return {"coeffs": [format_rat(x) for x in delta.coefficients]}


def load_json(source: Union[str, Path]) -> dict:
    """Read a JSON file, or a packaged fixture named ``builtin:<name>``."""
    source = str(source)
    try:
        if source.startswith(BUILTIN_PREFIX):
            name = source[len(BUILTIN_PREFIX):]
            if name not in BUILTINS:
                raise InputError(f"unknown built-in {name!r}; available: {', '.join(sorted(BUILTINS))}")
            text = resources.files("tensorstab.data").joinpath(BUILTINS[name]).read_text()
        else:
            text = Path(source).read_text()
        return json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_model(source) -> tuple[SheafModel, Optional[TensorForm], dict]:
    """Model, the embedded form if any, and the raw document."""
    data = load_json(source)
    try:
        model = model_from_json(data)
    except InputError:
        raise
    except TensorStabError as exc:
        raise InputError(f"model: {exc}") from None
    form = form_from_json(data["form"]) if "form" in data else None
    return model, form, data


def load_form(source) -> TensorForm:
    data = load_json(source)
    return form_from_json(data.get("form", data))


def builtin_example() -> tuple[SheafModel, TensorForm]:
    model, form, _ = load_model(BUILTIN_PREFIX + "p2")
    return model, form
