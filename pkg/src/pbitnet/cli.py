"""``pbitnet`` command line: one binary, one subcommand per experiment.

Exit status is 0 on success, 1 for invalid input or usage, 2 for failures
while running.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .formats import (ARTIFACT_VERSION, FormatError, atomic_write, config_hash, file_digest,
                      format_csv, histogram_rows, parse_quantum_model, parse_truth_table,
                      read_binary_rows, read_matrix_csv, read_network, serialize_network)
from .network import SpecError

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

COMMANDS = ("sample", "enumerate", "synth-gate", "genetic", "rbm-train", "tsp", "pimc", "hw")
MODULE_OF = {
    "sample": "core-network", "enumerate": "exact-oracle", "synth-gate": "logic-synthesis",
    "genetic": "sampling-apps", "rbm-train": "sampling-apps", "tsp": "annealing",
    "pimc": "annealing", "hw": "hardware-model",
}


@dataclass
class ExperimentConfig:
    command: str
    inputs: dict
    out: Path | None
    seed: int = 0
    params: dict = field(default_factory=dict)
    plot: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SpecError(f"unknown command {self.command!r}")
        for name, path in self.inputs.items():
            if not Path(path).is_file():
                raise SpecError(f"input file for {name} not found: {path}")

    def meta(self) -> dict:
        payload = {"command": self.command, "seed": self.seed, "params": self.params,
                   "inputs": {k: file_digest(v) for k, v in self.inputs.items()}}
        return {"pbitnet": __version__, "artifact_version": ARTIFACT_VERSION,
                "seed": self.seed, "config_hash": config_hash(payload)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pbitnet", description="p-bit network experiments")
    p.add_argument("--version", action="version", version=f"pbitnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_help="output CSV"):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, help=out_help)
        sp.add_argument("--plot", action="store_true",
                        help="also write a whitespace-separated .dat file for gnuplot")

    sp = sub.add_parser("sample", help="sample a network and write its histogram")
    sp.add_argument("--network", required=True, type=Path)
    sp.add_argument("--sweeps", type=int, default=100000)
    sp.add_argument("--mode", default="random-scan",
                    choices=["sequential-scan", "random-scan", "poisson-async"])
    sp.add_argument("--delay", type=float, default=0.0, help="synapse delay (poisson-async)")
    sp.add_argument("--chains", type=int, default=1)
    common(sp)

    sp = sub.add_parser("enumerate", help="exact energies and Boltzmann probabilities")
    sp.add_argument("--network", required=True, type=Path)
    common(sp)

    sp = sub.add_parser("synth-gate", help="learn a gate network from a truth table")
    sp.add_argument("--table", required=True, type=Path)
    sp.add_argument("--inputs", type=int, help="number of input columns (default log2 rows)")
    sp.add_argument("--strength", type=float, default=1.0)
    common(sp, "output network JSON")

    sp = sub.add_parser("genetic", help="correlations in a directed family network")
    sp.add_argument("--tree", required=True, type=Path)
    sp.add_argument("--w", type=float, default=2.0)
    sp.add_argument("--sweeps", type=int, default=100000)
    sp.add_argument("--pairs", required=True, help="comma list of A:B name pairs")
    sp.add_argument("--mode", default="sequential-scan",
                    choices=["sequential-scan", "random-scan", "poisson-async"])
    common(sp)

    sp = sub.add_parser("rbm-train", help="train a bipolar RBM by contrastive divergence")
    sp.add_argument("--data", required=True, type=Path)
    sp.add_argument("--hidden", type=int, default=6)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--steps", type=int, default=2000)
    sp.add_argument("--lr", type=float, default=0.05)
    sp.add_argument("--every", type=int, default=100, help="loss recording interval")
    common(sp)

    sp = sub.add_parser("tsp", help="anneal a travelling-salesman instance")
    sp.add_argument("--distances", required=True, type=Path)
    sp.add_argument("--runs", type=int, default=20)
    sp.add_argument("--schedule", default="",
                    help="comma list of I0=,growth=,t_eq=,stages= overrides")
    common(sp)

    sp = sub.add_parser("pimc", help="replica mapping of a transverse-field Ising model")
    sp.add_argument("--model", required=True, type=Path)
    sp.add_argument("--replicas", type=int, default=10)
    sp.add_argument("--sweeps", type=int, default=200000)
    common(sp)

    sp = sub.add_parser("hw", help="hardware formula report")
    sp.add_argument("--params", required=True, type=Path)
    common(sp)
    return p


def config_from_args(args) -> ExperimentConfig:
    skip = {"command", "seed", "out", "plot"}
    inputs = {}
    params = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if k in ("network", "table", "tree", "data", "distances", "model", "params"):
            inputs[k] = v
        else:
            params[k] = v
    return ExperimentConfig(args.command, inputs, args.out, args.seed, params, args.plot)


def run_experiment(cfg: ExperimentConfig) -> int:
    """Dispatch ``cfg`` to its module; returns the exit status."""
    handler = _HANDLERS[cfg.command]
    try:
        summary = handler(cfg)
    except (SpecError, FormatError) as exc:
        print(f"error [{MODULE_OF[cfg.command]}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - surfaced with context
        print(f"error [{MODULE_OF[cfg.command]}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(summary)
    return EXIT_OK


def _emit(cfg, header, rows, columns_for_plot=None):
    text = format_csv(header, rows, cfg.meta())
    if cfg.out is None:
        sys.stdout.write(text)
        return
    atomic_write(cfg.out, text)
    if cfg.plot:
        cols = columns_for_plot or list(range(len(header)))
        lines = ["# " + " ".join(header[c] for c in cols)]
        lines += [" ".join(str(r[c]) for c in cols) for r in rows]
        atomic_write(cfg.out.with_suffix(".dat"), "\n".join(lines) + "\n")


def _cmd_sample(cfg):
    from .exact import enumerate_states, kl_divergence
    from .network import UpdateSchedule, merge_histograms, run_chains
    spec = read_network(cfg.inputs["network"])
    p = cfg.params
    sched = UpdateSchedule(p["mode"], p["sweeps"], p["delay"], cfg.seed)
    counts = merge_histograms(run_chains(spec, sched, p["chains"]))
    _emit(cfg, ["config_index", "count", "probability"], histogram_rows(counts), [0, 2])
    summary = f"sample: n={spec.n} sweeps={p['sweeps']} chains={p['chains']} mode={p['mode']}"
    if spec.symmetric and spec.convention == "bipolar" and spec.n <= 20:
        kl = kl_divergence(counts / counts.sum(), enumerate_states(spec))
        summary += f" KL={kl:.6g}"
    return summary


def _cmd_enumerate(cfg):
    from .exact import enumerate_states
    spec = read_network(cfg.inputs["network"])
    table = enumerate_states(spec)
    rows = [(k, e, pr) for k, (e, pr) in enumerate(zip(table.energies, table.probabilities))]
    _emit(cfg, ["config_index", "energy", "probability"], rows, [0, 2])
    return f"enumerate: n={spec.n} logZ={table.logZ:.10g}"


def _cmd_synth_gate(cfg):
    from .logic import row_masses, synthesize
    table = parse_truth_table(Path(cfg.inputs["table"]).read_text(), cfg.params["inputs"])
    gate = synthesize(table).with_strength(cfg.params["strength"])
    text = serialize_network(gate.spec)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        atomic_write(cfg.out, text)
    masses = row_masses(gate)
    return (f"synth-gate: rows={table.indices()} masses="
            f"{[round(float(m), 4) for m in masses]} total={masses.sum():.4f}")


def _cmd_genetic(cfg):
    import json
    from .apps import (CorrelationRequest, build_genetic_network, correlate,
                       directed_correlations, named_pairs, sample_genetic)
    data = json.loads(Path(cfg.inputs["tree"]).read_text())
    edges = data["edges"] if isinstance(data, dict) else data
    nodes = data.get("nodes") if isinstance(data, dict) else None
    spec = build_genetic_network([tuple(e) for e in edges], cfg.params["w"], nodes)
    names = []
    for item in cfg.params["pairs"].split(","):
        if ":" not in item:
            raise SpecError(f"pair {item!r} must look like A:B")
        names.append(tuple(s.strip() for s in item.split(":")))
    pairs = named_pairs(spec, names)
    sweeps = cfg.params["sweeps"]
    trace = sample_genetic(spec, sweeps, cfg.seed, cfg.params["mode"])
    values = correlate(trace, CorrelationRequest(pairs, sweeps))
    rows = [(f"{a}:{b}", v) for (a, b), v in zip(names, values)]
    _emit(cfg, ["pair", "correlation"], rows)
    summary = "genetic: " + " ".join(f"{a}:{b}={v:.4f}" for (a, b), v in zip(names, values))
    if spec.n <= 20:
        exact = directed_correlations(spec, pairs)
        summary += " exact: " + " ".join(f"{e:.4f}" for e in exact)
    return summary


def _cmd_rbm_train(cfg):
    from .apps import RbmSpec, train_rbm
    data = read_binary_rows(cfg.inputs["data"])
    p = cfg.params
    if data.shape[1] + p["hidden"] > 20:
        raise SpecError("exact loss tracking needs visible + hidden <= 20")
    rbm = RbmSpec.random(data.shape[1], p["hidden"], seed=cfg.seed, cd_steps=p["k"],
                         learning_rate=p["lr"])
    rbm, curve = train_rbm(rbm, data, p["steps"], seed=cfg.seed, record_every=p["every"])
    _emit(cfg, ["step", "kl"], curve)
    return f"rbm-train: KL {curve[0][1]:.4f} -> {curve[-1][1]:.4f} after {p['steps']} steps"


def _parse_schedule(text):
    from .annealing import AnnealSchedule
    kw = {}
    names = {"I0": "I0_initial", "i0": "I0_initial", "growth": "growth", "t_eq": "t_eq",
             "stages": "stages"}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, val = item.partition("=")
        if key not in names:
            raise SpecError(f"unknown schedule parameter {key!r}")
        kw[names[key]] = int(val) if names[key] in ("t_eq", "stages") else float(val)
    return AnnealSchedule(**kw)


def _cmd_tsp(cfg):
    from .annealing import TspInstance, brute_force_tsp, solve_tsp
    inst = TspInstance(read_matrix_csv(cfg.inputs["distances"]))
    sched = _parse_schedule(cfg.params["schedule"])
    results = solve_tsp(inst, sched, runs=cfg.params["runs"], seed=cfg.seed)
    rows = [(k, "-".join(map(str, t.order)) if t.valid else "", length, int(t.valid))
            for k, (t, length) in enumerate(results)]
    _emit(cfg, ["run", "tour", "length", "valid"], rows, [0, 2])
    lengths = [l for _, l in results if not math.isnan(l)]
    summary = f"tsp: best length={min(lengths) if lengths else float('nan'):.6g} " \
              f"valid={sum(t.valid for t, _ in results)}/{len(results)}"
    if inst.n_cities <= 9:
        opt = brute_force_tsp(inst)[0][0]
        hits = sum(1 for l in lengths if abs(l - opt) < 1e-9)
        summary += f" optimal={hits}/{len(results)} (optimum {opt:.6g})"
    return summary


def _cmd_pimc(cfg):
    from .annealing import quantum_thermal_averages, replica_exact_averages, sample_pimc
    q = parse_quantum_model(Path(cfg.inputs["model"]).read_text(), cfg.params["replicas"])
    obs, _ = sample_pimc(q, cfg.params["sweeps"], cfg.seed)
    rep = replica_exact_averages(q) if q.n_spins <= 10 else None
    qu = quantum_thermal_averages(q) if q.n_spins <= 10 else None
    rows = []
    for i in range(q.n_spins):
        rows.append((f"mz[{i}]", obs["mz"][i], rep["mz"][i] if rep else "",
                     qu["mz"][i] if qu else ""))
    for i in range(q.n_spins):
        for j in range(i + 1, q.n_spins):
            rows.append((f"zz[{i},{j}]", obs["zz"][i, j], rep["zz"][i, j] if rep else "",
                         qu["zz"][i, j] if qu else ""))
    _emit(cfg, ["observable", "estimate", "replica_exact", "quantum_exact"], rows)
    return f"pimc: spins={q.n_spins} replicas={q.n_replicas} sweeps={cfg.params['sweeps']}"


def _cmd_hw(cfg):
    import json
    from .hardware import (CircuitParams, MagnetParams, barrier_and_lifetime,
                           capacitive_weights, pinning_currents, resistive_weights)
    data = json.loads(Path(cfg.inputs["params"]).read_text())
    rows = []
    if "magnet" in data:
        mp = MagnetParams(**data["magnet"])
        Eb, ratio, tau = barrier_and_lifetime(mp)
        pins = pinning_currents(mp, float(data.get("I_D", 0.0)))
        rows += [("E_b", Eb, "J"), ("E_b/kT", ratio, "1"), ("tau", tau, "s"),
                 ("I_PMA", pins.I_PMA, "A"), ("I_IMA", pins.I_IMA, "A"), ("I_s", pins.I_s, "A")]
    if "circuit" in data:
        cp = CircuitParams(**data["circuit"])
        for name, fn in (("W_cap", capacitive_weights), ("W_res", resistive_weights)):
            if getattr(cp, "C" if name == "W_cap" else "G") is None:
                continue
            sw = fn(cp)
            for (i, j), v in np.ndenumerate(sw.exact):
                rows.append((f"{name}[{i},{j}]", v, "1"))
            rows.append((f"{name}_approx_max_rel_error", sw.max_rel_error, "1"))
    if not rows:
        raise SpecError("parameter file needs a 'magnet' and/or 'circuit' section")
    _emit(cfg, ["quantity", "value", "unit"], rows)
    return f"hw: {len(rows)} quantities"


_HANDLERS = {
    "sample": _cmd_sample, "enumerate": _cmd_enumerate, "synth-gate": _cmd_synth_gate,
    "genetic": _cmd_genetic, "rbm-train": _cmd_rbm_train, "tsp": _cmd_tsp,
    "pimc": _cmd_pimc, "hw": _cmd_hw,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        cfg = config_from_args(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
