import logging
import os
from typing import Any, Callable, Dict, List, Tuple

from models.schemas import CommandReport, RunConfig, Verdict
from services.classification import DEFAULT_MAX_ORDER, similarity_classes, verify_opcartesian_xext
from services.factorization import (
    act_on_class,
    bar_triangle,
    build_bar_x,
    emit_bar,
    verify_bar_construction,
    verify_q_initial,
)
from services.fibration import (
    chevalley_check,
    check_condition_c,
    classify_functor,
    default_cleavage,
    is_regular_span,
    is_two_sided_fibration,
    projection_cleavage,
    span_triangle,
)
from services.fincat import validate_category, validate_functor
from services.grp import validate_group, validate_hom
from services.loaders import Loader
from services.xmod import (
    cartesian_lift_xext,
    push_forward_xext,
    three_fold_factorization,
    validate_crossed_extension,
    validate_morphism,
)
from utils.errors import BoundExceeded, FibcalcError, InputError, InvariantError, PropertyFailure
from utils.serialization import extension_to_file, morphism_to_file, write_json

logger = logging.getLogger(__name__)

# Exit statuses
OK = 0
FAILED = 1
BAD_INPUT = 2
INCONCLUSIVE = 3

FUNCTOR_PROPERTIES = {
    "fibration": "fibration",
    "opfibration": "opfibration",
    "discrete-fibration": "discrete_fibration",
    "discrete-opfibration": "discrete_opfibration",
}


def _need(config: RunConfig, key: str) -> str:
    if key not in config.inputs:
        raise InputError(f"'{config.command}' needs --{key.replace('_', '-')}", {"missing": key})
    return config.inputs[key]


def status_of(verdicts: List[Verdict]) -> int:
    if any(v.inconclusive for v in verdicts):
        return INCONCLUSIVE
    return OK if all(v.holds for v in verdicts) else FAILED


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


# ---------------------------------------------------------------------------
# Commands; each returns (verdicts, payload, summary)
# ---------------------------------------------------------------------------

def cmd_validate(config: RunConfig, loader: Loader):
    loose = Loader(loader.base_dir, loader.bounds, strict=False)
    kind, path = next(((k, v) for k, v in config.inputs.items()), (None, None))
    validators: Dict[str, Callable[[str], Any]] = {
        "category": lambda p: validate_category(loose.category(p)),
        "functor": lambda p: validate_functor(loose.functor(p)),
        "group": lambda p: validate_group(loose.group(p)),
        "hom": lambda p: validate_hom(loose.hom(p)),
        "extension": lambda p: validate_crossed_extension(loose.extension(p)),
        "morphism": lambda p: validate_morphism(loose.morphism(p)),
    }
    if kind not in validators:
        raise InputError("validate needs one of --category, --functor, --group, --hom, --extension, --morphism",
                         {"inputs": sorted(config.inputs)})
    report = validators[kind](path)
    verdict = Verdict(property=f"valid {kind}", holds=report.ok,
                      witness={"violations": [v.model_dump() for v in report.violations]} if not report.ok else None)
    return [verdict], {"report": report.model_dump()}, f"valid: {_yes(report.ok)}"


def cmd_check_fibration(config: RunConfig, loader: Loader):
    f = loader.functor(_need(config, "functor"))
    wanted = config.options.get("property", "fibration")
    if wanted not in FUNCTOR_PROPERTIES:
        raise InputError(f"Unknown property '{wanted}'", {"choices": sorted(FUNCTOR_PROPERTIES)})
    cls = classify_functor(f)
    holds = getattr(cls, FUNCTOR_PROPERTIES[wanted])
    verdict = Verdict(property=wanted, holds=holds, witness=cls.witness.get(FUNCTOR_PROPERTIES[wanted]),
                      details=cls.model_dump(exclude={"witness"}))
    summary = "; ".join(f"{name}: {_yes(getattr(cls, attr))}" for name, attr in FUNCTOR_PROPERTIES.items())
    return [verdict], {"classification": cls.model_dump()}, summary


def cmd_check_regular_span(config: RunConfig, loader: Loader):
    s = loader.functor(_need(config, "span"))
    verdicts = [is_regular_span(s)]
    if config.options.get("two_sided"):
        verdicts.append(is_two_sided_fibration(s))
    return verdicts, {}, "; ".join(f"{v.property}: {_yes(v.holds)}" for v in verdicts)


def cmd_check_condition_c(config: RunConfig, loader: Loader):
    if "span" in config.inputs:
        s = loader.functor(config.inputs["span"])
        verdict = check_condition_c(span_triangle(s, 0), cart_cl=projection_cleavage(s.target, 0))
    else:
        t = loader.triangle(_need(config, "triangle"))
        verdict = check_condition_c(t, cart_cl=default_cleavage(t.g))
    return [verdict], {}, f"condition (C): {_yes(verdict.holds)}"


def cmd_chevalley(config: RunConfig, loader: Loader):
    if "triangle" in config.inputs:
        t = loader.triangle(config.inputs["triangle"])
        report = chevalley_check(t.p, base=t, in_fibrations=bool(config.options.get("in_fibrations")))
    else:
        report = chevalley_check(loader.functor(_need(config, "functor")))
    verdict = Verdict(
        property="Chevalley criterion", holds=report.holds, witness=report.witness or None,
        details={"opfibration": report.is_opfibration, "unit identity": report.unit_identity,
                 "counit identity": report.counit_identity, "L cartesian": report.l_cartesian},
    )
    return [verdict], {}, f"opfibration by Chevalley: {_yes(report.holds)}"


def _triangle_or_span(config: RunConfig, loader: Loader):
    if "span" in config.inputs:
        return span_triangle(loader.functor(config.inputs["span"]), 0)
    return loader.triangle(_need(config, "triangle"))


def cmd_factorize(config: RunConfig, loader: Loader):
    if config.options.get("emit_bar") and not config.out_dir:
        raise InputError("--emit-bar needs --out", {"missing": "out"})
    t = _triangle_or_span(config, loader)
    b = build_bar_x(t, bounds=loader.bounds)
    verdicts = verify_bar_construction(b)
    if config.options.get("check_initial"):
        verdicts.append(verify_q_initial(b, [bar_triangle(b)], loader.bounds))
    payload: Dict[str, Any] = {"blocks": b.blocks}
    if config.options.get("emit_bar"):
        payload["files"] = [os.path.basename(p) for p in emit_bar(b, config.out_dir)]
    return verdicts, payload, f"classes: {len(b.blocks)}"


def cmd_classify(config: RunConfig, loader: Loader):
    n = int(config.options.get("n", 1))
    if "module" in config.inputs:
        mod = loader.module(config.inputs["module"])
    else:
        mod = loader.trivial_module(loader.group(_need(config, "c")), _need(config, "b"))
    report = similarity_classes(mod, n, loader.bounds, max_order=int(config.options.get("max_order", DEFAULT_MAX_ORDER)))
    suffix = f" (relative to order {report.bound})" if report.relative_to_bound else ""
    verdict = Verdict(property="similarity classes", holds=True, details={"count": report.count})
    return [verdict], {"classification": report.model_dump()}, f"classes: {report.count}{suffix}"


def _extension_out(config: RunConfig, name: str, doc: Dict[str, Any]) -> None:
    if config.out_dir:
        write_json(doc, os.path.join(config.out_dir, f"{name}.ext"))


def cmd_pushforward(config: RunConfig, loader: Loader):
    x = loader.extension(_need(config, "ext"))
    beta = loader.hom(_need(config, "beta"))
    module = loader.module(config.inputs["module"]) if "module" in config.inputs else None
    pushed, m = push_forward_xext(x, beta, module)
    verdicts = [Verdict(property="valid extension", holds=validate_crossed_extension(pushed).ok)]
    if config.options.get("verify"):
        verdicts.append(verify_opcartesian_xext(m, bounds=loader.bounds))
    doc = extension_to_file(pushed)
    _extension_out(config, "pushforward", doc)
    return verdicts, {"extension": doc, "morphism": morphism_to_file(m)}, f"pushed forward: {pushed.name}"


def cmd_pullback(config: RunConfig, loader: Loader):
    x = loader.extension(_need(config, "ext"))
    gamma = loader.hom(_need(config, "gamma"))
    lifted, m = cartesian_lift_xext(x, gamma)
    verdicts = [Verdict(property="valid extension", holds=validate_crossed_extension(lifted).ok)]
    doc = extension_to_file(lifted)
    _extension_out(config, "pullback", doc)
    return verdicts, {"extension": doc, "morphism": morphism_to_file(m)}, f"pulled back: {lifted.name}"


def cmd_factorize_morphism(config: RunConfig, loader: Loader):
    m = loader.morphism(_need(config, "mor"))
    opcart, weq, cart = three_fold_factorization(m)
    verdicts = [Verdict(property="weak equivalence", holds=weq.is_weak_equivalence)]
    payload = {"opcart": morphism_to_file(opcart), "weq": morphism_to_file(weq), "cart": morphism_to_file(cart),
               "middle": extension_to_file(weq.source), "pulled": extension_to_file(weq.target)}
    return verdicts, payload, f"{m.name} = cart . weq . opcart"


def cmd_act(config: RunConfig, loader: Loader):
    s = loader.functor(_need(config, "span"))
    b = build_bar_x(span_triangle(s, 0), g_cleavage=projection_cleavage(s.target, 0), bounds=loader.bounds)
    x_bar = config.options.get("class")
    if x_bar is None:
        raise InputError("act needs --class", {"missing": "class"})
    result = act_on_class(b, x_bar, alpha=config.options.get("alpha"), beta=config.options.get("beta"))
    return [], {"class": x_bar, "result": result, "members": b.blocks[result]}, f"result: {result}"


COMMANDS: Dict[str, Callable[[RunConfig, Loader], Tuple[List[Verdict], Dict[str, Any], str]]] = {
    "validate": cmd_validate,
    "check-fibration": cmd_check_fibration,
    "check-regular-span": cmd_check_regular_span,
    "check-condition-c": cmd_check_condition_c,
    "chevalley": cmd_chevalley,
    "factorize": cmd_factorize,
    "classify": cmd_classify,
    "pushforward": cmd_pushforward,
    "pullback": cmd_pullback,
    "factorize-morphism": cmd_factorize_morphism,
    "act": cmd_act,
}


def error_status(exc: FibcalcError) -> int:
    if isinstance(exc, InputError):
        return BAD_INPUT
    if isinstance(exc, BoundExceeded):
        return INCONCLUSIVE
    if isinstance(exc, (PropertyFailure, InvariantError)):
        return FAILED
    raise exc


def run(config: RunConfig, base_dir: str = ".") -> CommandReport:
    """
    Execute one command and report; errors are turned into statuses, never raised.

    Exit statuses: 0 success, 1 property fails, 2 bad input, 3 bound exceeded.
    """
    logger.info(f"Running {config.command} with inputs {config.inputs}")
    try:
        verdicts, payload, summary = COMMANDS[config.command](config, Loader(base_dir, config.bounds))
        report = CommandReport(command=config.command, status=status_of(verdicts), summary=summary,
                               verdicts=verdicts, payload=payload)
    except FibcalcError as exc:
        logger.warning(f"{config.command} stopped: {exc.message}")
        report = CommandReport(command=config.command, status=error_status(exc), summary=exc.message,
                               error=exc.to_dict())
    if config.out_dir:
        write_json(report, os.path.join(config.out_dir, "report.json"))
    return report


def render_text(report: CommandReport) -> str:
    lines = [f"{report.command}: {report.summary}"]
    for v in report.verdicts:
        state = "inconclusive" if v.inconclusive else _yes(v.holds)
        lines.append(f"  {v.property}: {state}")
        if v.witness and not v.holds:
            lines.append(f"    witness: {v.witness}")
    if report.error:
        lines.append(f"  error: {report.error['error']}: {report.error['message']}")
        if report.error.get("witness"):
            lines.append(f"    witness: {report.error['witness']}")
    return "\n".join(lines)
