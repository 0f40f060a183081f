"""Regression-style text tables and machine-readable records for fitted models.

Every ``*_records`` function returns a list of flat dicts (the machine
contract); ``*_table`` functions render the same content as text.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

import numpy as np

from .dataio import LABELS, DescriptiveRow
from .estimators import INTERCEPT, BinaryFit, HurdleFit, LinearFit, MarginalEffects, PredictionReport, TobitFit
from .estimators.tobit import classify_skepticism
from .simulate import McReport

STAR_NOTE = "*p<0.1; **p<0.05; ***p<0.01"


def label(name: str) -> str:
    if name == INTERCEPT:
        return "Constant"
    if "." in name:
        stage, rest = name.split(".", 1)
        return f"{stage}.{label(rest)}"
    return LABELS.get(name, name)


def stars(p: float) -> str:
    if not math.isfinite(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def fmt(x: float, digits: int = 3, thousands: bool = True) -> str:
    if x is None or not math.isfinite(x):
        return "NA"
    out = f"{x:,.{digits}f}" if thousands else f"{x:.{digits}f}"
    if out.startswith("-") and float(out.replace(",", "")) == 0.0:
        out = out[1:]
    return out


def _display_order(names: Sequence[str]) -> list[int]:
    """Regressors first, constant last."""
    idx = [i for i, n in enumerate(names) if n != INTERCEPT]
    return idx + [i for i, n in enumerate(names) if n == INTERCEPT]


def _join(lines: Sequence[str]) -> str:
    return "".join(line.rstrip() + "\n" for line in lines)


def _rule(width: int, ch: str = "-") -> str:
    return ch * width


def _coef_block(names, coefs, ses, pvals, width: int, digits: int = 3) -> list[str]:
    lines = []
    for i in _display_order(names):
        lines.append(f"{label(names[i]):<22}{fmt(coefs[i], digits) + stars(pvals[i]):>{width - 22}}")
        lines.append(f"{'':<22}{'(' + fmt(ses[i], digits) + ')':>{width - 22}}")
    return lines


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

_INTEGER_VARS = {"change", "gender", "age", "police", "educ_int", "matching_gender"}


def describe_records(rows: Sequence[DescriptiveRow]) -> list[dict]:
    return [
        {
            "variable": label(r.variable),
            "mean": r.mean,
            "std_dev": r.sd,
            "min": r.min,
            "max": r.max,
            "missing": r.missing,
            "n": r.n,
        }
        for r in rows
    ]


def describe_table(rows: Sequence[DescriptiveRow], title: str = "Descriptive Analysis") -> str:
    header = f"{'':<17}{'Mean':>9}{'Std.dev':>9}{'Min':>9}{'Max':>9}{'Missing':>9}"
    width = len(header)
    lines = [title, _rule(width), header, _rule(width)]
    for r in rows:
        integer = r.variable in _INTEGER_VARS
        lo = fmt(r.min, 0 if integer else 2, thousands=False)
        hi = fmt(r.max, 0 if integer else 2, thousands=False)
        lines.append(
            f"{label(r.variable):<17}{fmt(r.mean, 2, False):>9}{fmt(r.sd, 2, False):>9}{lo:>9}{hi:>9}{r.missing:>9d}"
        )
    lines.append(_rule(width))
    n = max(r.n + r.missing for r in rows)
    lines.append(f"Total of {n:,} observations.")
    return _join(lines)


# ---------------------------------------------------------------------------
# Tobit
# ---------------------------------------------------------------------------


def tobit_records(fit: TobitFit) -> list[dict]:
    out = []
    latent = fit.latent_coefficients()
    pvals = fit.p_values()
    for i in _display_order(fit.names):
        out.append(
            {
                "term": fit.names[i],
                "estimate": float(fit.theta[i]),
                "std_error": float(fit.standard_errors[i]),
                "p_value": float(pvals[i]),
                "latent_estimate": float(latent[i]),
            }
        )
    reading = classify_skepticism(fit)
    out.append(
        {
            "term": "summary",
            "n": fit.n,
            "n_censored": fit.n_censored,
            "log_likelihood": fit.log_likelihood,
            "sigma": fit.sigma,
            "wald_statistic": fit.wald_statistic,
            "wald_df": fit.wald_df,
            "wald_p_value": fit.wald_pvalue,
            "gamma": fit.gamma,
            "verdict": reading.verdict.value,
        }
    )
    return out


def tobit_table(fit: TobitFit) -> str:
    width = 44
    lines = ["Tobit Model", _rule(width, "="), f"{'':<22}{'Dependent variable:':>{width - 22}}"]
    lines.append(f"{'':<22}{'(Prior - Post)':>{width - 22}}")
    lines.append(_rule(width))
    lines += _coef_block(fit.names, fit.theta, fit.standard_errors, fit.p_values(), width)
    lines.append(_rule(width))
    rows = [
        ("Observations", f"{fit.n:,}"),
        ("Censored (Post = Prior)", f"{fit.n_censored:,}"),
        ("Sigma", fmt(fit.sigma)),
        ("Log Likelihood", fmt(fit.log_likelihood)),
        ("Wald Test", f"{fmt(fit.wald_statistic)}{stars(fit.wald_pvalue)} (df = {fit.wald_df})"),
    ]
    lines += [f"{k:<22}{v:>{width - 22}}" for k, v in rows]
    lines.append(_rule(width, "="))
    lines.append(f"Note: {STAR_NOTE}")
    reading = classify_skepticism(fit)
    theta_prior = float(fit.theta[0])
    lines.append(f"gamma-hat = 1 - {fmt(theta_prior)} = {fmt(fit.gamma)} -> {reading.verdict.value}")
    for name, direction in reading.directions.items():
        lines.append(f"  delta-hat[{label(name)}] = {fit.delta[name]:+.3f}: {direction}")
    return _join(lines)


# ---------------------------------------------------------------------------
# Binary choice, margins, prediction
# ---------------------------------------------------------------------------


def binary_records(fit: BinaryFit, margins: MarginalEffects | None = None) -> list[dict]:
    out = []
    pvals = fit.p_values()
    mp = margins.p_values() if margins is not None else None
    for i in _display_order(fit.names):
        rec = {
            "stage": "change",
            "link": fit.link,
            "term": fit.names[i],
            "estimate": float(fit.coefficients[i]),
            "std_error": float(fit.standard_errors[i]),
            "p_value": float(pvals[i]),
        }
        if margins is not None:
            rec.update(
                marginal_effect=float(margins.effects[i]),
                marginal_std_error=float(margins.standard_errors[i]),
                marginal_p_value=float(mp[i]),
                discrete=bool(margins.discrete[i]),
            )
        out.append(rec)
    out.append({"stage": "change", "link": fit.link, "term": "summary", "n": fit.n, "log_likelihood": fit.log_likelihood, "aic": fit.aic})
    return out


def binary_table(fit: BinaryFit, margins: MarginalEffects | None = None) -> str:
    link_name = "logistic" if fit.link == "logit" else "probit"
    cols = [f"Change ({link_name})"] + ([f"Marginal effects ({link_name})"] if margins is not None else [])
    colw = 30
    width = 22 + colw * len(cols)
    lines = ["Changing Decision" + (" and Marginal Effects" if margins is not None else ""), _rule(width, "=")]
    lines.append(f"{'':<22}" + "".join(f"{c:>{colw}}" for c in cols))
    lines.append(_rule(width))
    pvals = fit.p_values()
    mp = margins.p_values() if margins is not None else None
    for i in _display_order(fit.names):
        row = f"{label(fit.names[i]):<22}{fmt(fit.coefficients[i]) + stars(pvals[i]):>{colw}}"
        se_row = f"{'':<22}{'(' + fmt(fit.standard_errors[i]) + ')':>{colw}}"
        if margins is not None:
            row += f"{fmt(margins.effects[i], 4) + stars(mp[i]):>{colw}}"
            se_row += f"{'(' + fmt(margins.standard_errors[i], 4) + ')':>{colw}}"
        lines += [row, se_row]
    lines.append(_rule(width))
    pad = "" if margins is None else " " * colw
    lines.append(f"{'Observations':<22}{f'{fit.n:,}':>{colw}}{pad}")
    lines.append(f"{'Log Likelihood':<22}{fmt(fit.log_likelihood):>{colw}}{pad}")
    lines.append(f"{'Akaike Inf. Crit.':<22}{fmt(fit.aic):>{colw}}{pad}")
    lines.append(_rule(width, "="))
    lines.append(f"Note: {STAR_NOTE}")
    return _join(lines)


def margins_records(m: MarginalEffects, link: str) -> list[dict]:
    pvals = m.p_values()
    return [
        {
            "link": link,
            "term": m.names[i],
            "marginal_effect": float(m.effects[i]),
            "std_error": float(m.standard_errors[i]),
            "p_value": float(pvals[i]),
            "discrete": bool(m.discrete[i]),
        }
        for i in _display_order(m.names)
    ]


def margins_table(m: MarginalEffects, link: str) -> str:
    width = 56
    lines = [f"Average Marginal Effects ({link})", _rule(width, "=")]
    lines.append(f"{'':<22}{'Effect':>14}{'Std. Err.':>12}{'Kind':>8}")
    lines.append(_rule(width))
    pvals = m.p_values()
    for i in _display_order(m.names):
        kind = "0->1" if m.discrete[i] else "dP/dx"
        lines.append(
            f"{label(m.names[i]):<22}{fmt(m.effects[i], 4) + stars(pvals[i]):>14}{fmt(m.standard_errors[i], 4):>12}{kind:>8}"
        )
    lines.append(_rule(width, "="))
    lines.append(f"Mean link density: {m.mean_density:.4f}")
    lines.append(f"Note: {STAR_NOTE}")
    return _join(lines)


def prediction_records(rep: PredictionReport) -> list[dict]:
    c = rep.confusion
    return [
        {
            "threshold": rep.threshold,
            "n": rep.n,
            "n_correct": rep.n_correct,
            "success_rate": rep.success_rate,
            "base_rate": rep.base_rate,
            "observed0_predicted0": int(c[0, 0]),
            "observed0_predicted1": int(c[0, 1]),
            "observed1_predicted0": int(c[1, 0]),
            "observed1_predicted1": int(c[1, 1]),
        }
    ]


def prediction_table(rep: PredictionReport) -> str:
    c = rep.confusion
    lines = [
        f"Prediction exercise (threshold {rep.threshold:.2f})",
        f"{'':<18}{'Predicted 0':>12}{'Predicted 1':>12}",
        f"{'Change = 0':<18}{c[0, 0]:>12,}{c[0, 1]:>12,}",
        f"{'Change = 1':<18}{c[1, 0]:>12,}{c[1, 1]:>12,}",
        f"Correct: {rep.n_correct:,} of {rep.n:,} ({100 * rep.success_rate:.1f}% success rate)",
        f"Majority-class base rate: {100 * rep.base_rate:.1f}%",
    ]
    return _join(lines)


# ---------------------------------------------------------------------------
# Hurdle level stage
# ---------------------------------------------------------------------------


def linear_records(fit: LinearFit, dependent: str) -> list[dict]:
    pvals = fit.p_values()
    out = [
        {
            "stage": "level",
            "dependent": dependent,
            "term": fit.names[i],
            "estimate": float(fit.coefficients[i]),
            "std_error": float(fit.standard_errors[i]),
            "p_value": float(pvals[i]),
        }
        for i in _display_order(fit.names)
    ]
    out.append(
        {
            "stage": "level",
            "dependent": dependent,
            "term": "summary",
            "n": fit.n,
            "r_squared": fit.r_squared,
            "adj_r_squared": fit.adj_r_squared,
            "residual_std_error": fit.residual_std_error,
            "df_resid": fit.df_resid,
            "f_statistic": fit.f_statistic,
            "f_df1": fit.f_df[0],
            "f_df2": fit.f_df[1],
        }
    )
    return out


def linear_table(fit: LinearFit, dependent: str, title: str = "Restricted Ols") -> str:
    width = 48
    lines = [title, _rule(width, "="), f"{'':<22}{'Dependent variable:':>{width - 22}}", f"{'':<22}{dependent:>{width - 22}}"]
    lines.append(_rule(width))
    lines += _coef_block(fit.names, fit.coefficients, fit.standard_errors, fit.p_values(), width)
    lines.append(_rule(width))
    d1, d2 = fit.f_df
    rows = [
        ("Observations", f"{fit.n:,}"),
        ("R2", fmt(fit.r_squared)),
        ("Adjusted R2", fmt(fit.adj_r_squared)),
        ("Residual Std. Error", f"{fmt(fit.residual_std_error)} (df = {fit.df_resid})"),
        ("F Statistic", f"{fmt(fit.f_statistic)}{stars(fit.f_pvalue())} (df = {d1}; {d2})"),
    ]
    lines += [f"{k:<22}{v:>{width - 22}}" for k, v in rows]
    lines.append(_rule(width, "="))
    lines.append(f"Note: {STAR_NOTE}")
    return _join(lines)


def hurdle_table(fit: HurdleFit, margins: MarginalEffects) -> str:
    dep = "log(Post)" if fit.transform == "log" else "Post"
    return binary_table(fit.change_stage, margins) + "\n" + linear_table(fit.level_stage, dep)


def hurdle_records(fit: HurdleFit, margins: MarginalEffects) -> list[dict]:
    dep = "log(Post)" if fit.transform == "log" else "Post"
    return binary_records(fit.change_stage, margins) + linear_records(fit.level_stage, dep)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def mc_records(rep: McReport) -> list[dict]:
    out = [
        {
            "model": rep.model,
            "parameter": p.name,
            "truth": p.truth,
            "mean": p.mean,
            "bias": p.bias,
            "sd": p.sd,
            "mc_se": p.mc_se,
            "coverage": p.coverage,
            "within_2se": bool(p.within_2se),
        }
        for p in rep.parameters
    ]
    out.append(
        {
            "model": rep.model,
            "parameter": "summary",
            "replications": rep.replications,
            "n": rep.n,
            "failures": len(rep.failures),
            **rep.extra,
        }
    )
    return out


def mc_table(rep: McReport) -> str:
    header = f"{'Parameter':<24}{'Truth':>11}{'Mean':>11}{'Bias':>10}{'MC SE':>9}{'Cover95':>9}{'|bias|<=2SE':>13}"
    width = len(header)
    lines = [
        f"Monte-Carlo recovery: {rep.model}, {rep.replications} replications of n = {rep.n:,}",
        _rule(width, "="),
        header,
        _rule(width),
    ]
    for p in rep.parameters:
        cover = "NA" if not math.isfinite(p.coverage) else f"{p.coverage:.3f}"
        lines.append(
            f"{p.name:<24}{fmt(p.truth, 4, False):>11}{fmt(p.mean, 4, False):>11}{fmt(p.bias, 4, False):>10}"
            f"{fmt(p.mc_se, 4, False):>9}{cover:>9}{'yes' if p.within_2se else 'no':>13}"
        )
    lines.append(_rule(width, "="))
    lines.append(f"Failed replications: {len(rep.failures)}")
    for r, err in rep.failures:
        lines.append(f"  replication {r}: {err}")
    if "censoring_share" in rep.extra:
        lines.append(f"Mean censoring share: {rep.extra['censoring_share']:.4f}")
    return _join(lines)


# ---------------------------------------------------------------------------
# Machine formats
# ---------------------------------------------------------------------------


def _clean(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if not math.isfinite(value) else value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def to_jsonl(records: Sequence[dict]) -> str:
    return "".join(json.dumps({k: _clean(v) for k, v in r.items()}, sort_keys=True) + "\n" for r in records)


def to_csv(records: Sequence[dict]) -> str:
    keys: list[str] = []
    for r in records:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in records:
        row = {}
        for k in keys:
            v = _clean(r.get(k))
            row[k] = "" if v is None else (repr(v) if isinstance(v, float) else v)
        writer.writerow(row)
    return buf.getvalue()
