"""Experiment configuration: key=value sections with strict schemas.

A config file holds a ``[run]`` section (module, task, seed, output prefix,
repeat count) and one section named after the module carrying its
parameters.  Keys are validated against per-task schemas: unknown keys are
rejected, out-of-range values name the offending key, and duplicate keys
report both line numbers.  ``echo`` renders the canonical form whose sha256
is the config hash stamped into every output file.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from pairpop.errors import ParseError, RangeError, UnknownKey


def _parse_float_list(raw: str):
    return [float(tok) for tok in raw.replace(" ", "").split(",") if tok]


def _parse_int_list(raw: str):
    return [int(tok) for tok in raw.replace(" ", "").split(",") if tok]


@dataclass(frozen=True)
class Key:
    typ: str  # int | float | str | floats | ints | bool
    required: bool = False
    default: object = None
    choices: tuple | None = None
    low: float | None = None
    high: float | None = None

    def convert(self, name: str, raw: str):
        try:
            if self.typ == "int":
                val = int(raw)
            elif self.typ == "float":
                val = float(raw)
            elif self.typ == "floats":
                val = _parse_float_list(raw)
            elif self.typ == "ints":
                val = _parse_int_list(raw)
            elif self.typ == "bool":
                if raw.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(raw)
                val = raw.lower() in ("true", "1")
            else:
                val = raw.strip()
        except ValueError:
            raise RangeError(f"key {name!r}: cannot parse {raw!r} as {self.typ}")
        if self.choices is not None and val not in self.choices:
            raise RangeError(f"key {name!r}: {val!r} not one of {self.choices}")
        if self.low is not None:
            vals = val if isinstance(val, list) else [val]
            if any(v < self.low for v in vals):
                raise RangeError(f"key {name!r}: value below {self.low}")
        if self.high is not None:
            vals = val if isinstance(val, list) else [val]
            if any(v > self.high for v in vals):
                raise RangeError(f"key {name!r}: value above {self.high}")
        return val


RUN_KEYS = {
    "module": Key("str", required=True,
                  choices=("selmut", "dd", "moran", "ips", "perc", "pde")),
    "task": Key("str", required=True),
    "experiment": Key("str", default="experiment"),
    "seed": Key("int", default=0),
    "out": Key("str", default="out"),
    "repeat": Key("int", default=1, low=1),
    "seed_mode": Key("str", default="derive", choices=("derive", "fixed")),
    "jobs": Key("int", default=1, low=1),
}

_FIT_KEYS = {
    "L": Key("int", required=True, low=0),
    "K": Key("floats"),
    "b": Key("float", low=0.0, high=1.0),
    "M": Key("int"),
    "B": Key("floats"),
    "mu": Key("float", default=0.0, low=0.0),
}

SCHEMAS = {
    ("selmut", "run"): {
        **_FIT_KEYS,
        "pi0": Key("floats"),
        "pi0_center": Key("float", low=0.0, high=1.0),
        "T": Key("float", required=True, low=0.0),
        "dt": Key("float", default=1e-3, low=0.0),
        "method": Key("str", default="rk4", choices=("rk4", "rk45")),
        "record_every": Key("int", default=1, low=1),
    },
    ("selmut", "stationary"): {
        **_FIT_KEYS,
        "init": Key("floats"),
        "tol": Key("float", default=1e-10, low=0.0),
    },
    ("selmut", "cubic"): {
        "b": Key("float", required=True, low=0.0, high=1.0),
        "mu": Key("float", required=True, low=0.0),
        "npoints": Key("int", default=401, low=2),
    },
    ("dd", "run"): {
        "L": Key("int", required=True, low=2),
        "M": Key("int", required=True, low=0),
        "mu": Key("float", default=0.0, low=0.0),
        "variant": Key("str", default="V2", choices=("V1", "V2")),
        "init": Key("str", default="bimodal", choices=("bimodal", "uniform", "delta")),
        "iters": Key("int", default=100, low=1),
        "record_every": Key("int", default=1, low=1),
    },
    ("dd", "stationary"): {
        "L": Key("int", required=True, low=2),
        "M": Key("int", required=True, low=0),
        "mu": Key("float", default=0.0, low=0.0),
        "init": Key("str", default="bimodal", choices=("bimodal", "uniform", "delta")),
        "tol": Key("float", default=1e-12, low=0.0),
        "max_iter": Key("int", default=2_000_000, low=1),
    },
    ("dd", "sweep"): {
        "L": Key("int", required=True, low=2),
        "M": Key("int", required=True, low=0),
        "mus": Key("floats", required=True),
        "init": Key("str", default="bimodal", choices=("bimodal", "uniform", "delta")),
        "tol": Key("float", default=1e-12, low=0.0),
        "max_iter": Key("int", default=2_000_000, low=1),
    },
    ("moran", "run"): {
        **_FIT_KEYS,
        "mode": Key("str", default="strong", choices=("strong", "weak")),
        "N": Key("int", required=True, low=2),
        "T": Key("float", required=True, low=0.0),
        "pi0": Key("floats"),
        "snapshot_dt": Key("float", default=0.0, low=0.0),
        "events": Key("bool", default=True),
    },
    ("ips", "run"): {
        "lam": Key("float", required=True, low=0.0),
        "delta": Key("float", required=True, low=0.0),
        "rule": Key("str", default="paired", choices=("paired", "same_site")),
        "sides": Key("ints", required=True),
        "stirring": Key("str", default="none", choices=("none", "lilypad", "individual")),
        "epsilon": Key("float", default=0.0, low=0.0),
        "T": Key("float", required=True, low=0.0),
        "init": Key("str", default="all", choices=("all", "single")),
        "snapshot_dt": Key("float", default=0.0, low=0.0),
    },
    ("ips", "couple"): {
        "lam": Key("float", required=True, low=0.0),
        "delta": Key("float", required=True, low=0.0),
        "rule": Key("str", default="paired", choices=("paired", "same_site")),
        "sides": Key("ints", required=True),
        "stirring": Key("str", default="none", choices=("none", "lilypad", "individual")),
        "epsilon": Key("float", default=0.0, low=0.0),
        "T": Key("float", required=True, low=0.0),
        "pairs": Key("int", default=1, low=1),
    },
    ("ips", "dual"): {
        "lam": Key("float", required=True, low=0.0),
        "delta": Key("float", required=True, low=0.0),
        "rule": Key("str", default="same_site", choices=("paired", "same_site")),
        "sides": Key("ints", required=True),
        "epsilon": Key("float", required=True, low=0.0),
        "t": Key("float", required=True, low=0.0),
        "c_star": Key("float", default=-1.0),
        "trials": Key("int", default=100, low=1),
    },
    ("ips", "goodevents"): {
        "lam": Key("float", required=True, low=0.0),
        "delta": Key("float", required=True, low=0.0),
        "sides": Key("ints", required=True),
        "block_T": Key("float", required=True, low=0.0),
        "width": Key("int", required=True, low=1),
        "height": Key("int", required=True, low=1),
    },
    ("perc", "survive"): {
        "gamma": Key("float", required=True, low=0.0, high=1.0),
        "width": Key("int", required=True, low=1),
        "n_levels": Key("int", required=True, low=1),
        "trials": Key("int", default=1000, low=1),
        "p": Key("float", default=-1.0),
        "W0": Key("ints"),
        "target": Key("str", default="origin", choices=("origin", "nonempty")),
    },
    ("perc", "exact"): {
        "gamma": Key("float", required=True, low=0.0, high=1.0),
        "width": Key("int", required=True, low=1),
        "n_levels": Key("int", required=True, low=1),
        "W0": Key("ints", required=True),
        "target": Key("str", default="nonempty", choices=("origin", "nonempty")),
    },
    ("perc", "fromips"): {
        "lam": Key("float", required=True, low=0.0),
        "delta": Key("float", required=True, low=0.0),
        "sides": Key("ints", required=True),
        "block_T": Key("float", required=True, low=0.0),
        "width": Key("int", required=True, low=1),
        "height": Key("int", required=True, low=1),
    },
    ("pde", "run"): {
        "system": Key("str", required=True,
                      choices=("four_state", "three_state", "uv", "ind_pair", "scalar_sex")),
        "c": Key("float", required=True, low=0.0),
        "T": Key("float", required=True, low=0.0),
        "s": Key("float", required=True, low=0.0),
        "h": Key("float", default=0.02, low=0.0),
        "X": Key("float", default=10.0, low=0.0),
        "init": Key("str", default="profile", choices=("profile", "const")),
        "values": Key("floats"),
        "a0": Key("float", default=0.7),
        "b0": Key("float", default=0.6),
        "profile_L": Key("float", default=3.0, low=0.0),
        "profile_l": Key("float", default=0.182574185835055, low=0.0),
        "record_every": Key("int", default=0, low=0),
    },
    ("pde", "star"): {
        "c": Key("float", required=True, low=0.0),
        "D1": Key("float", default=0.55, low=0.0, high=1.0),
        "d1": Key("float", default=0.7, low=0.0, high=1.0),
        "L": Key("float", default=3.0, low=0.0),
        "l": Key("float", default=0.182574185835055, low=0.0),
        "T": Key("float", required=True, low=0.0),
        "s": Key("float", default=0.005, low=0.0),
        "a0": Key("float", required=True),
        "b0": Key("float", required=True),
        "h": Key("float", default=0.02, low=0.0),
    },
    ("pde", "phase"): {
        "c_values": Key("floats", required=True),
        "nullcline_c": Key("float", default=0.0),
        "npoints": Key("int", default=201, low=2),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    module: str
    task: str
    experiment: str
    seed: int
    out: str
    repeat: int
    seed_mode: str
    jobs: int
    params: dict

    def canonical(self) -> str:
        """Canonical text: sorted keys, I/O-only keys (out, jobs) excluded.

        Its sha256 prefix is the config hash stamped into outputs, so the
        hash identifies the experiment, not where it was written or how
        many workers ran it.
        """
        lines = ["[run]"]
        for key in sorted(RUN_KEYS):
            if key in ("out", "jobs"):
                continue
            lines.append(f"{key} = {getattr(self, key)}")
        lines.append(f"[{self.module}]")
        for key in sorted(self.params):
            val = self.params[key]
            if isinstance(val, list):
                val = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


def _scan_sections(text: str):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ParseError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ParseError(f"line {lineno}: key outside any section")
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key = value")
        key, val = line.split("=", 1)
        key = key.strip()
        if key in sections[current]:
            first = sections[current][key][1]
            raise ParseError(
                f"duplicate key {key!r} at lines {first} and {lineno}"
            )
        sections[current][key] = (val.strip(), lineno)
    return sections


def parse_config(text: str) -> ExperimentConfig:
    sections = _scan_sections(text)
    if "run" not in sections:
        raise ParseError("missing [run] section")
    run_raw = sections.pop("run")
    run_vals = {}
    for name, spec in RUN_KEYS.items():
        if name in run_raw:
            run_vals[name] = spec.convert(name, run_raw.pop(name)[0])
        elif spec.required:
            raise ParseError(f"[run] missing required key {name!r}")
        else:
            run_vals[name] = spec.default
    for stray in run_raw:
        raise UnknownKey(f"[run] has unknown key {stray!r}")

    module, task = run_vals["module"], run_vals["task"]
    if (module, task) not in SCHEMAS:
        raise ParseError(f"no task {task!r} for module {module!r}")
    schema = SCHEMAS[(module, task)]
    sect = sections.pop(module, {})
    for stray in sections:
        raise UnknownKey(f"unexpected section [{stray}]")
    params = {}
    for name, spec in schema.items():
        if name in sect:
            params[name] = spec.convert(name, sect.pop(name)[0])
        elif spec.required:
            raise ParseError(f"[{module}] missing required key {name!r}")
        elif spec.default is not None:
            params[name] = spec.default
    for stray in sect:
        raise UnknownKey(f"[{module}] has unknown key {stray!r}")
    return ExperimentConfig(
        module=module,
        task=task,
        experiment=run_vals["experiment"],
        seed=run_vals["seed"],
        out=run_vals["out"],
        repeat=run_vals["repeat"],
        seed_mode=run_vals["seed_mode"],
        jobs=run_vals["jobs"],
        params=params,
    )


def trial_seed(root_seed: int, trial: int, mode: str) -> int:
    """Per-trial stream derivation: counter-hashed from the root seed.

    ``fixed`` repeats the root seed; ``derive`` hashes (root, trial) so
    alternate implementations can reproduce the streams from the documented
    rule.
    """
    if mode == "fixed":
        return root_seed
    h = hashlib.sha256(f"pairpop-trial|{root_seed}|{trial}".encode()).digest()
    return int.from_bytes(h[:8], "big")
