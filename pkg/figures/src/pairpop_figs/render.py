"""Figure kinds and the sidecar-producing renderer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PNG_METADATA = {"Software": "pairpop-figs"}


class SchemaMismatch(Exception):
    """Input CSV lacks the expected schema/config header or has no data."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # cubic | dd_evolution | phase_portrait | pde_profile
    inputs: tuple
    out: str
    xlim: tuple | None = None
    ylim: tuple | None = None

    @staticmethod
    def from_json(path) -> "FigureSpec":
        raw = json.loads(Path(path).read_text())
        return FigureSpec(
            kind=raw["kind"],
            inputs=tuple(raw["inputs"]),
            out=raw["out"],
            xlim=tuple(raw["xlim"]) if raw.get("xlim") else None,
            ylim=tuple(raw["ylim"]) if raw.get("ylim") else None,
        )


@dataclass
class CsvTable:
    path: str
    schema: str
    config: str
    seed: str
    columns: list
    rows: np.ndarray  # object array of parsed cells

    def col(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([float(r[j]) for r in self.rows])


EXPECTED_SCHEMAS = {
    "cubic": ["selmut.cubic"],
    "dd_evolution": ["dd.evolution"],
    "phase_portrait": ["pde.phase", "pde.nullclines"],
    "pde_profile": ["pde.field"],
}


def load_table(path, expect_schema: str) -> CsvTable:
    lines = Path(path).read_text().splitlines()
    meta = {}
    body = []
    for ln in lines:
        if ln.startswith("# ") or ln.startswith("#\t"):
            if "=" in ln:
                key, val = ln[2:].split("=", 1)
                meta[key.strip()] = val.strip()
            continue
        if ln.strip():
            body.append(ln)
    if meta.get("schema") != expect_schema:
        raise SchemaMismatch(
            f"{path}: expected schema={expect_schema}, found {meta.get('schema')!r}"
        )
    if "config" not in meta or "seed" not in meta:
        raise SchemaMismatch(f"{path}: missing config/seed header")
    if len(body) < 2:
        raise SchemaMismatch(f"{path}: no data rows")
    columns = body[0].split(",")
    rows = np.array([ln.split(",") for ln in body[1:]], dtype=object)
    if rows.size == 0:
        raise SchemaMismatch(f"{path}: empty series")
    return CsvTable(str(path), meta["schema"], meta["config"], meta["seed"], columns, rows)


def zero_crossings(x: np.ndarray, y: np.ndarray) -> list:
    """Linear-interpolated sign-change locations of a sampled curve."""
    out = []
    for i in range(len(x) - 1):
        a, b = y[i], y[i + 1]
        if a == 0.0:
            out.append(float(x[i]))
        elif a * b < 0:
            out.append(float(x[i] - a * (x[i + 1] - x[i]) / (b - a)))
    if len(y) and y[-1] == 0.0:
        out.append(float(x[-1]))
    return out


def _extrema(series: dict) -> dict:
    return {
        name: {"min": float(np.min(v)), "max": float(np.max(v))}
        for name, v in sorted(series.items())
    }


def _finish(fig, ax, spec: FigureSpec, sidecar: dict, tables: list):
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120, metadata=PNG_METADATA)
    plt.close(fig)
    sidecar["kind"] = spec.kind
    sidecar["inputs"] = [
        {"path": Path(t.path).name, "schema": t.schema, "config": t.config, "seed": t.seed}
        for t in tables
    ]
    sidecar_path = out.with_suffix(".json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return out, sidecar_path


def _render_cubic(spec: FigureSpec):
    table = load_table(spec.inputs[0], "selmut.cubic")
    x = table.col("pi0")
    y = table.col("dpi0_dt")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.axhline(0.0, lw=0.8, color="0.5")
    ax.plot(x, y, lw=1.5)
    ax.set_xlabel("pi_0")
    ax.set_ylabel("d pi_0 / dt")
    sidecar = {
        "series": _extrema({"dpi0_dt": y}),
        "zero_crossings": zero_crossings(x, y),
    }
    return _finish(fig, ax, spec, sidecar, [table])


def _render_dd_evolution(spec: FigureSpec):
    table = load_table(spec.inputs[0], "dd.evolution")
    iters = table.col("iter").astype(int)
    xs = table.col("x")
    ps = table.col("pi_x")
    uniq = sorted(set(iters.tolist()))
    shown = uniq if len(uniq) <= 6 else [uniq[i] for i in
                                         np.linspace(0, len(uniq) - 1, 6).astype(int)]
    fig, axes = plt.subplots(1, len(shown), figsize=(2.2 * len(shown), 2.6),
                             sharey=True)
    if len(shown) == 1:
        axes = [axes]
    series = {}
    for ax, it in zip(axes, shown):
        sel = iters == it
        ax.bar(xs[sel], ps[sel], width=0.9)
        ax.set_title(f"t={it}")
        series[f"iter_{it}"] = ps[sel]
    axes[0].set_ylabel("pi_x")
    sidecar = {"series": _extrema(series), "iters_shown": [int(i) for i in shown]}
    return _finish(fig, axes[0], spec, sidecar, [table])


def _render_phase_portrait(spec: FigureSpec):
    phase = load_table(spec.inputs[0], "pde.phase")
    nulls = load_table(spec.inputs[1], "pde.nullclines")
    u = nulls.col("u")
    g1 = nulls.col("v_gamma1")
    g2 = nulls.col("v_gamma2")
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(u, g1, label="eta1 = 0")
    ax.plot(u, g2, label="eta2 = 0")
    ax.plot(u, u, ls=":", color="0.6", label="u = v")
    # exact marker coordinates come straight from the CSV cells
    markers = []
    for row in phase.rows:
        vals = dict(zip(phase.columns, row))
        if vals["Pplus_u"] == "":
            continue
        for tag, cu, cv in (
            ("P_plus", vals["Pplus_u"], vals["Pplus_v"]),
            ("P_minus", vals["Pminus_u"], vals["Pminus_v"]),
        ):
            markers.append(
                {"label": tag, "c": float(vals["c"]), "u": float(cu), "v": float(cv)}
            )
            ax.plot(float(cu), float(cv), marker="o" if tag == "P_plus" else "x",
                    color="k", ms=7)
    ax.plot(0.0, 0.0, marker="o", color="k", ms=7)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_xlim(0, 1.02)
    ax.set_ylim(-0.05, 1.02)
    sidecar = {
        "series": _extrema({"v_gamma1": g1, "v_gamma2": g2}),
        "markers": markers,
    }
    return _finish(fig, ax, spec, sidecar, [phase, nulls])


def _render_pde_profile(spec: FigureSpec):
    table = load_table(spec.inputs[0], "pde.field")
    times = table.col("t")
    xs = table.col("x")
    comps = table.columns[2:]
    uniq = sorted(set(times.tolist()))
    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    comp = comps[-1]  # front profiles are read off the last component
    j = table.columns.index(comp)
    vals = np.array([float(r[j]) for r in table.rows])
    for t in uniq:
        sel = times == t
        ax.plot(xs[sel], vals[sel], label=f"t={t:g}", lw=1.0)
        series[f"{comp}_t{t:g}"] = vals[sel]
    ax.set_xlabel("x")
    ax.set_ylabel(comp)
    if len(uniq) <= 8:
        ax.legend(fontsize=7)
    sidecar = {"series": _extrema(series), "component": comp}
    return _finish(fig, ax, spec, sidecar, [table])


RENDERERS = {
    "cubic": _render_cubic,
    "dd_evolution": _render_dd_evolution,
    "phase_portrait": _render_phase_portrait,
    "pde_profile": _render_pde_profile,
}


def render(spec: FigureSpec):
    """Render one figure; returns (image_path, sidecar_path)."""
    if spec.kind not in RENDERERS:
        raise SchemaMismatch(f"unknown figure kind {spec.kind!r}")
    want = EXPECTED_SCHEMAS[spec.kind]
    if len(spec.inputs) < len(want):
        raise SchemaMismatch(
            f"{spec.kind} needs {len(want)} inputs ({', '.join(want)})"
        )
    return RENDERERS[spec.kind](spec)
