"""CSV/JSON readers and writers for datasets, summaries and fitted models."""

import json
import logging
import os

import numpy as np
import pandas as pd

from .exceptions import DataError
from .kernels import KernelSpec
from .likelihoods import LikelihoodSpec
from .summarize import Dataset, SummarizedData

log = logging.getLogger(__name__)

CALIFORNIA_COLUMNS = (
    "longitude", "latitude", "housingMedianAge", "totalRooms", "totalBedrooms",
    "population", "households", "medianIncome", "medianHouseValue",
)
CALIFORNIA_INPUTS = ("latitude", "longitude")
CALIFORNIA_TARGET = "medianHouseValue"
CALIFORNIA_BOUNDS = ((32.54, 41.95), (-124.35, -114.31))


def load_csv(path, input_columns=CALIFORNIA_INPUTS, target_column=CALIFORNIA_TARGET, target_scale=1.0):
    """Read a headed CSV into a :class:`Dataset`, dropping non-finite rows."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    cols = list(input_columns) + [target_column]
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise DataError(f"{path} lacks columns {missing}; available: {list(df.columns)}")
    values = df[cols].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    keep = np.all(np.isfinite(values), axis=1)
    dropped = int((~keep).sum())
    if dropped:
        log.warning("dropped %d of %d rows with missing or non-finite values", dropped, len(keep))
    values = values[keep]
    if values.shape[0] == 0:
        raise DataError(f"{path} has no usable rows")
    return Dataset(values[:, :-1], values[:, -1] * target_scale, tuple(input_columns), target_column)


def summary_to_frame(summary):
    d = summary.Z.shape[1]
    df = pd.DataFrame(summary.Z, columns=[f"z_{i + 1}" for i in range(d)])
    df["ybar"] = summary.ybar
    df["svar"] = summary.svar
    df["count"] = summary.counts
    return df


def write_summary_csv(summary, path):
    summary_to_frame(summary).to_csv(path, index=False, float_format="%.17g")


def read_summary_csv(path):
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    df = pd.read_csv(path, float_precision="round_trip")
    zcols = sorted((c for c in df.columns if c.startswith("z_")), key=lambda c: int(c[2:]))
    for c in ("ybar", "count"):
        if c not in df.columns:
            raise DataError(f"summary CSV lacks column {c!r}")
    if not zcols:
        raise DataError("summary CSV has no z_1..z_d columns")
    svar = df["svar"].to_numpy(float) if "svar" in df.columns else None
    return SummarizedData(df[zcols].to_numpy(float), df["ybar"].to_numpy(float), svar, df["count"].to_numpy())


def summary_to_dict(summary):
    d = {
        "Z": summary.Z.tolist(),
        "ybar": summary.ybar.tolist(),
        "svar": summary.svar.tolist(),
        "counts": summary.counts.tolist(),
        "space": summary.space,
    }
    if summary.alpha is not None:
        d["alpha"] = summary.alpha
    if summary.omega is not None:
        d["omega"] = summary.omega.tolist()
    return d


def summary_from_dict(d):
    return SummarizedData(
        np.asarray(d["Z"], float), d["ybar"], d.get("svar"), d["counts"],
        omega=d.get("omega"), alpha=d.get("alpha"), space=d.get("space", "y"),
    )


def dump_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def model_to_dict(model):
    d = model.to_dict()
    d["summary_u"] = summary_to_dict(model.summary_u)
    return d


def model_from_dict(d):
    """Rebuild what prediction needs: kernel, likelihood, centre and summary."""
    from .hyperopt import FittedModel, HyperParams, OptResult

    kernel = KernelSpec(**d["kernel"])
    lik = LikelihoodSpec(**d["likelihood"])
    res = OptResult(HyperParams(), d.get("objective", float("nan")), d.get("iterations", 0),
                    d.get("converged", True), d.get("gradient_norm", float("nan")))
    return FittedModel(kernel, lik, float(d["mean_const"]), summary_from_dict(d["summary_u"]), res, d.get("mode", "Q"))
