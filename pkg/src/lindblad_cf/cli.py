"""Command-line surface: model configs in, machine-readable data out.

Each subcommand sweeps one observable over the grids given in a TOML
config and writes a CSV (with '#'-prefixed metadata lines) plus a JSON
sidecar echoing the full config.  Grid points run on a thread pool;
results are gathered and sorted before a single writer emits them, so
the output bytes never depend on scheduling.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 oracle
mismatch.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__
from .linalg import (
    BranchAmbiguityError,
    NearDefectiveError,
    SingularMatrixError,
)
from .model import KitaevParams, build_kitaev, quadratic_model, tau_x
from .propagator import (
    decompose,
    evolve_covariance,
    propagators,
    rapidity_spectrum,
    response_function,
    retarded_gf,
)
from .correlators import (
    anyon_greater,
    anyon_lesser,
    gaussian_state_from_thermal,
    gaussian_state_vacuum,
    steady_gaussian,
    typeI,
    typeII,
)
from .observables import (
    detect_cusps,
    fcs_pn,
    fcs_steady,
    loschmidt,
    momentum_distribution,
)
from . import oracle as oracle_mod

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

ORACLE_CAP = 5
ORACLE_TOL = 1e-7

NUMERICAL_ERRORS = (
    BranchAmbiguityError,
    NearDefectiveError,
    SingularMatrixError,
    np.linalg.LinAlgError,
)


class ConfigError(Exception):
    pass


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return "%d" % x
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file not found: %s" % path)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config %s: %s" % (path, exc))


def _grid(section, key, default=None):
    """A grid entry is either a list of numbers or {start, stop, step}."""
    spec = section.get(key, default)
    if spec is None:
        return None
    if isinstance(spec, dict):
        missing = {"start", "stop", "step"} - set(spec)
        if missing:
            raise ConfigError(
                "grid '%s' missing %s" % (key, ", ".join(sorted(missing)))
            )
        step = float(spec["step"])
        if step <= 0:
            raise ConfigError("grid '%s' step must be positive" % key)
        values = np.arange(
            float(spec["start"]), float(spec["stop"]) + 0.5 * step, step
        )
    else:
        try:
            values = np.asarray([float(v) for v in spec], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("grid '%s' must be numbers" % key)
    if values.size == 0:
        raise ConfigError("grid '%s' is empty" % key)
    return values


def build_model(cfg, mu=None):
    spec = cfg.get("model")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a [model] table")
    try:
        if "H_re" in spec or "H" in spec:
            if mu is not None:
                raise ConfigError(
                    "mu sweeps need Kitaev parameters, not an explicit H"
                )
            H = np.asarray(spec.get("H", spec.get("H_re")), dtype=complex)
            if "H_im" in spec:
                H = H + 1j * np.asarray(spec["H_im"], dtype=float)
            diss = []
            for entry in spec.get("dissipators", []):
                l = np.asarray(entry["re"], dtype=complex)
                if "im" in entry:
                    l = l + 1j * np.asarray(entry["im"], dtype=float)
                diss.append(l)
            return quadratic_model(H, diss)
        known = {
            "N", "J", "Delta", "mu", "gamma_plus", "gamma_minus",
            "gamma_plus_site", "gamma_minus_site",
        }
        unknown = set(spec) - known
        if unknown:
            raise ConfigError(
                "unknown [model] keys: %s" % ", ".join(sorted(unknown))
            )
        kwargs = dict(spec)
        for key in ("gamma_plus_site", "gamma_minus_site"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if mu is not None:
            kwargs["mu"] = float(mu)
        return build_kitaev(KitaevParams(**kwargs))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("invalid [model]: %s" % exc)


def _subsystem_sites(section, N):
    if "range" in section:
        lo, hi = (int(v) for v in section["range"])
        sites = tuple(range(lo, hi + 1))
    else:
        sites = tuple(int(s) for s in section.get("sites", (1,)))
    if not sites or min(sites) < 1 or max(sites) > N:
        raise ConfigError("subsystem sites must lie in 1..%d" % N)
    return sites


def _require_oracle(model, flag):
    if flag and model.N > ORACLE_CAP:
        raise ConfigError(
            "oracle comparison capped at N <= %d (got N=%d)"
            % (ORACLE_CAP, model.N)
        )


def _vacuum_rho(N):
    dim = 2 ** N
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _parallel(items, worker, threads):
    if threads <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, items))


def write_csv(path, meta, header, rows):
    with open(path, "w") as fh:
        for key, val in meta:
            fh.write("# %s: %s\n" % (key, val))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_sidecar(path, command, cfg, outputs, diagnostics):
    payload = {
        "command": command,
        "config": cfg,
        "outputs": outputs,
        "diagnostics": diagnostics,
        "version": __version__,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _out_paths(args, cfg, command):
    prefix = cfg.get("output", {}).get("prefix", command)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    return (
        os.path.join(out_dir, prefix + ".csv"),
        os.path.join(out_dir, prefix + ".json"),
    )


def cmd_spectrum(args, cfg):
    mus = _grid(cfg.get("grid", {}), "mu")
    model0 = build_model(cfg)
    _require_oracle(model0, args.oracle_compare)
    points = [None] if mus is None else list(mus)

    def worker(mu):
        model = model0 if mu is None else build_model(cfg, mu=mu)
        return mu, rapidity_spectrum(model)

    results = _parallel(points, worker, args.threads)
    rows = []
    gaps = []
    worst_oracle = 0.0
    for mu, spec in results:
        mu_val = float("nan") if mu is None else float(mu)
        gaps.append((mu_val, spec.gap))
        oracle_col = None
        if args.oracle_compare:
            model = model0 if mu is None else build_model(cfg, mu=mu)
            dense = oracle_mod.OracleWorkspace(model).liouvillian_eigenvalues()
            # each rapidity -lambda must appear among the dense many-body
            # Liouvillian eigenvalues (single-excitation sector)
            oracle_col = [
                float(np.min(np.abs(dense - (-lam)))) for lam in spec.lambdas
            ]
        for k, lam in enumerate(spec.lambdas, start=1):
            row = [mu_val, k, lam.real, lam.imag]
            if oracle_col is not None:
                row.append(oracle_col[k - 1])
                worst_oracle = max(worst_oracle, oracle_col[k - 1])
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1]))
    header = ["mu", "k", "re_lambda", "im_lambda"]
    if args.oracle_compare:
        header.append("oracle_abs_diff")
    gap_min = min(g for _, g in gaps)
    gap_mu = [m for m, g in gaps if g == gap_min][0]
    csv_path, side_path = _out_paths(args, cfg, "spectrum")
    meta = [("command", "spectrum"), ("columns", ",".join(header)),
            ("gap_min", _fmt(gap_min)), ("gap_argmin_mu", _fmt(gap_mu))]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {
        "gap_min": gap_min,
        "gap_argmin_mu": gap_mu,
        "gap_by_mu": [[m, g] for m, g in gaps],
    }
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "spectrum", cfg, [csv_path], diagnostics)
    return worst_oracle


def cmd_steady(args, cfg):
    model = build_model(cfg)
    _require_oracle(model, args.oracle_compare)
    steady = steady_gaussian(model)
    occ = np.real(np.diag(np.eye(2 * model.N) - steady.B))[: model.N]
    worst_oracle = 0.0
    oracle_col = None
    if args.oracle_compare:
        ws = oracle_mod.OracleWorkspace(model)
        rho = ws.steady_state()
        oracle_col = [
            abs(occ[l - 1] - float(np.real(np.trace(
                oracle_mod.number_op(ws.c_ops, l) @ rho
            ))))
            for l in range(1, model.N + 1)
        ]
        worst_oracle = max(oracle_col)
    rows = []
    for l in range(1, model.N + 1):
        row = [l, occ[l - 1]]
        if oracle_col is not None:
            row.append(oracle_col[l - 1])
        rows.append(row)
    header = ["site", "occupation"]
    if args.oracle_compare:
        header.append("oracle_abs_diff")
    csv_path, side_path = _out_paths(args, cfg, "steady")
    gap = rapidity_spectrum(model).gap
    meta = [("command", "steady"), ("columns", ",".join(header)),
            ("dissipative_gap", _fmt(gap))]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {"dissipative_gap": gap,
                   "total_occupation": float(occ.sum())}
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "steady", cfg, [csv_path], diagnostics)
    return worst_oracle


def cmd_greens(args, cfg):
    model = build_model(cfg)
    _require_oracle(model, args.oracle_compare)
    section = cfg.get("greens", {})
    if "j" not in section:
        raise ConfigError("[greens] needs a source site j")
    j = int(section["j"])
    if not 1 <= j <= model.N:
        raise ConfigError("[greens] j must lie in 1..%d" % model.N)
    kind = section.get("kind", "greater")
    if kind not in ("greater", "lesser"):
        raise ConfigError("[greens] kind must be 'greater' or 'lesser'")
    sites = tuple(int(s) for s in section.get("sites",
                                              range(1, model.N + 1)))
    grid = cfg.get("grid", {})
    phis = _grid(grid, "phi", default=[0.0])
    times = _grid(grid, "t")
    if times is None:
        raise ConfigError("greens needs a [grid] t entry")
    func = anyon_greater if kind == "greater" else anyon_lesser
    decomp = decompose(model)
    steady = steady_gaussian(model)
    ws = oracle_mod.OracleWorkspace(model) if args.oracle_compare else None
    ofunc = None
    if ws is not None:
        ofunc = (oracle_mod.oracle_anyon_greater if kind == "greater"
                 else oracle_mod.oracle_anyon_lesser)

    def worker(point):
        phi, t = point
        props = propagators(model, t, decomp=decomp)
        out = []
        for l in sites:
            g = func(model, int(l), j, t, phi, props=props, steady=steady)
            row = [phi, t, int(l), g.real, g.imag]
            if ofunc is not None:
                row.append(abs(g - ofunc(ws, int(l), j, t, phi)))
            out.append(row)
        return out

    points = [(float(phi), float(t)) for phi in phis for t in times]
    chunks = _parallel(points, worker, args.threads)
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    header = ["phi", "t", "site", "re_g", "im_g"]
    worst_oracle = 0.0
    if args.oracle_compare:
        header.append("oracle_abs_diff")
        worst_oracle = max(row[5] for row in rows)
    csv_path, side_path = _out_paths(args, cfg, "greens")
    meta = [("command", "greens"), ("columns", ",".join(header)),
            ("kind", kind), ("source_site", "%d" % j)]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {"kind": kind, "source_site": j,
                   "points": len(points), "sites": list(map(int, sites))}
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "greens", cfg, [csv_path], diagnostics)
    return worst_oracle


def cmd_fcs(args, cfg):
    model = build_model(cfg)
    _require_oracle(model, args.oracle_compare)
    section = cfg.get("fcs", {})
    sites = _subsystem_sites(section, model.N)
    times = _grid(cfg.get("grid", {}), "t")
    initial = section.get("initial", "steady")
    if initial not in ("steady", "vacuum"):
        raise ConfigError("[fcs] initial must be 'steady' or 'vacuum'")
    ws = oracle_mod.OracleWorkspace(model) if args.oracle_compare else None
    if times is None:
        results = [fcs_steady(model, sites)]
        rho0 = ws.steady_state() if ws is not None else None
        oracle_t = [0.0]
    else:
        state0 = (steady_gaussian(model) if initial == "steady"
                  else gaussian_state_vacuum(model.N))
        results = _parallel(
            [float(t) for t in times],
            lambda t: fcs_pn(model, state0, sites, t),
            args.threads,
        )
        if ws is not None:
            rho0 = (ws.steady_state() if initial == "steady"
                    else _vacuum_rho(model.N))
        else:
            rho0 = None
        oracle_t = list(times)
    rows = []
    clipped = []
    worst_oracle = 0.0
    for res, t_o in zip(results, oracle_t):
        clipped.append(res.clipped)
        pn_o = None
        if ws is not None:
            pn_o = oracle_mod.oracle_fcs_pn(ws, rho0, sites, float(t_o))
        for n, p in enumerate(res.pn):
            row = [res.t, n, p]
            if pn_o is not None:
                diff = abs(p - pn_o[n])
                row.append(diff)
                worst_oracle = max(worst_oracle, diff)
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1]))
    header = ["t", "n", "pn"]
    if args.oracle_compare:
        header.append("oracle_abs_diff")
    csv_path, side_path = _out_paths(args, cfg, "fcs")
    meta = [("command", "fcs"), ("columns", ",".join(header)),
            ("subsystem", " ".join(str(s) for s in sites))]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {"subsystem": list(sites),
                   "max_clipped_mass": max(clipped)}
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "fcs", cfg, [csv_path], diagnostics)
    return worst_oracle


def cmd_loschmidt(args, cfg):
    model = build_model(cfg)
    _require_oracle(model, args.oracle_compare)
    times = _grid(cfg.get("grid", {}), "t")
    if times is None:
        raise ConfigError("loschmidt needs a [grid] t entry")
    section = cfg.get("loschmidt", {})
    name = section.get("initial", "vacuum")
    if name == "vacuum":
        state0 = gaussian_state_vacuum(model.N)
    elif name == "thermal":
        state0 = gaussian_state_from_thermal(
            model.H, float(section.get("beta", 1.0))
        )
    else:
        raise ConfigError("[loschmidt] initial must be vacuum or thermal")
    series = loschmidt(model, state0, times)
    worst_oracle = 0.0
    oracle_col = None
    if args.oracle_compare:
        if name != "vacuum":
            raise ConfigError("oracle comparison supports the vacuum quench")
        ws = oracle_mod.OracleWorkspace(model)
        rho0 = _vacuum_rho(model.N)
        oracle_col = [
            abs(float(series.L[i])
                - oracle_mod.oracle_loschmidt(ws, rho0, float(t)))
            for i, t in enumerate(series.times)
        ]
        worst_oracle = max(oracle_col)
    rows = []
    for i, t in enumerate(series.times):
        row = [float(t), float(series.L[i]), float(series.r[i])]
        if oracle_col is not None:
            row.append(oracle_col[i])
        rows.append(row)
    rows.sort(key=lambda r: r[0])
    header = ["t", "echo", "rate"]
    if args.oracle_compare:
        header.append("oracle_abs_diff")
    hits = detect_cusps(series.times, series.r)
    csv_path, side_path = _out_paths(args, cfg, "loschmidt")
    meta = [("command", "loschmidt"), ("columns", ",".join(header)),
            ("initial", name)]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {"initial": name,
                   "cusp_times": [float(series.times[i]) for i in hits]}
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "loschmidt", cfg, [csv_path], diagnostics)
    return worst_oracle


def cmd_kdist(args, cfg):
    model = build_model(cfg)
    _require_oracle(model, args.oracle_compare)
    phis = _grid(cfg.get("grid", {}), "phi", default=[0.0])
    ws = oracle_mod.OracleWorkspace(model) if args.oracle_compare else None

    def worker(phi):
        dist = momentum_distribution(model, phi)
        oracle_nk = None
        if ws is not None:
            N = model.N
            G = np.empty((N, N), dtype=complex)
            for l in range(1, N + 1):
                for j in range(1, N + 1):
                    G[l - 1, j - 1] = oracle_mod.oracle_anyon_lesser(
                        ws, l, j, 0.0, phi
                    )
            W = np.exp(1j * np.outer(np.arange(1, N + 1), dist.k))
            nk_o = np.real(np.einsum("lm,lj,jm->m", W.conj(), G, W)) / N
            oracle_nk = np.abs(dist.nk - nk_o)
        return phi, dist, oracle_nk

    results = _parallel([float(p) for p in phis], worker, args.threads)
    rows = []
    residues = []
    worst_oracle = 0.0
    for phi, dist, oracle_nk in results:
        residues.append(dist.imag_residue)
        for m, k in enumerate(dist.k):
            row = [phi, float(k), float(dist.nk[m])]
            if oracle_nk is not None:
                row.append(float(oracle_nk[m]))
                worst_oracle = max(worst_oracle, float(oracle_nk[m]))
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1]))
    header = ["phi", "k", "nk"]
    if args.oracle_compare:
        header.append("oracle_abs_diff")
    csv_path, side_path = _out_paths(args, cfg, "kdist")
    meta = [("command", "kdist"), ("columns", ",".join(header))]
    write_csv(csv_path, meta, header, rows)
    diagnostics = {"max_imag_residue": max(residues)}
    if args.oracle_compare:
        diagnostics["oracle_max_abs_diff"] = worst_oracle
    write_sidecar(side_path, "kdist", cfg, [csv_path], diagnostics)
    return worst_oracle


def _random_valid_k(N, rng, strength=0.4):
    # K + tau_x K^T tau_x = 0 makes Gamma_2(K) well defined
    A = strength * (rng.standard_normal((2 * N, 2 * N))
                    + 1j * rng.standard_normal((2 * N, 2 * N)))
    tx = tau_x(N)
    return A - tx @ A.T @ tx


def cmd_oracle_compare(args, cfg):
    model = build_model(cfg)
    if model.N > ORACLE_CAP:
        raise ConfigError(
            "oracle comparison capped at N <= %d (got N=%d)"
            % (ORACLE_CAP, model.N)
        )
    section = cfg.get("oracle", {})
    tol = float(section.get("tol", ORACLE_TOL))
    times = [float(t) for t in section.get("t", (0.0, 0.5, 1.5, 5.0))]
    phis = [float(p) for p in section.get(
        "phi", (0.0, np.pi / 5, np.pi / 2, np.pi))]
    has_gap = bool(model.dissipators)
    ws = oracle_mod.OracleWorkspace(model)
    N = model.N
    rho_vac = _vacuum_rho(N)
    vac = gaussian_state_vacuum(N)
    rng = np.random.default_rng(2024)
    K1 = _random_valid_k(N, rng)
    K2 = _random_valid_k(N, rng)
    rows = []

    def emit(quantity, parameter, diff):
        status = "pass" if diff <= tol else "fail"
        rows.append([quantity, parameter, diff, status, ""])

    def skip(quantity, parameter):
        rows.append([quantity, parameter, float("nan"), "skipped",
                     "zero gap"])

    for t in times:
        B = evolve_covariance(model, vac.B, t)
        C_o = ws.covariance(ws.evolve(rho_vac, t))
        emit("covariance", _fmt(t), float(np.max(np.abs(B - C_o))))

    # the anticommutator {c_l(t), c_j^+} is a c-number, so the vacuum
    # serves as reference state whether or not a steady state exists
    for t in times:
        R = retarded_gf(model, t)
        worst = 0.0
        for jj in range(1, N + 1):
            cdag = ws.c_ops[jj - 1].conj().T
            ev1 = ws.evolve(cdag @ rho_vac, t, fermionic_sign=True)
            ev2 = ws.evolve(rho_vac @ cdag, t, fermionic_sign=True)
            for ll in range(1, N + 1):
                anti = (np.trace(ws.c_ops[ll - 1] @ ev1)
                        + np.trace(ws.c_ops[ll - 1] @ ev2))
                worst = max(worst,
                            abs(R[ll - 1, jj - 1] - (-1j) * anti))
        emit("retarded_gf", _fmt(t), worst)

    if has_gap:
        rho_s = ws.steady_state()
        steady = steady_gaussian(model)
        n_ops = [oracle_mod.number_op(ws.c_ops, l)
                 for l in range(1, N + 1)]
        for t in times:
            worst = 0.0
            for i in range(1, min(N, 2) + 1):
                for j in range(1, min(N, 2) + 1):
                    d = response_function(model, i, j, t)
                    forward = ws.evolve(n_ops[j - 1] @ rho_s, t)
                    backward = ws.evolve(rho_s @ n_ops[j - 1], t)
                    d_o = -1j * (np.trace(n_ops[i - 1] @ forward)
                                 - np.trace(n_ops[i - 1] @ backward))
                    worst = max(worst, abs(d - d_o))
            emit("response", _fmt(t), worst)
        for t in times:
            v = typeI(model, K1, K2, steady, t)
            v_o = oracle_mod.oracle_typeI(ws, K1, K2, rho_s, t)
            emit("typeI", _fmt(t), abs(v - v_o))
            for order in ("left", "right"):
                V = typeII(model, K1, K2, steady, t, order=order)
                V_o = oracle_mod.oracle_typeII(ws, K1, K2, rho_s, t,
                                               order=order)
                emit("typeII_" + order, _fmt(t),
                     float(np.max(np.abs(V - V_o))))
        l, j = 1, min(2, N)
        for phi in phis:
            for t in times:
                tag = "phi=%s,t=%s" % (_fmt(phi), _fmt(t))
                g = anyon_greater(model, l, j, t, phi)
                g_o = oracle_mod.oracle_anyon_greater(ws, l, j, t, phi)
                emit("anyon_greater", tag, abs(g - g_o))
                g = anyon_lesser(model, l, j, t, phi)
                g_o = oracle_mod.oracle_anyon_lesser(ws, l, j, t, phi)
                emit("anyon_lesser", tag, abs(g - g_o))
        subsystems = [(1,)]
        if N >= 2:
            subsystems.append((1, 2))
        for sites in subsystems:
            label = "fcs_pn_A=%s" % ",".join(map(str, sites))
            for t in times:
                res = fcs_pn(model, steady, sites, t)
                pn_o = oracle_mod.oracle_fcs_pn(ws, rho_s, sites, t)
                emit(label, _fmt(t), float(np.max(np.abs(res.pn - pn_o))))
    else:
        for t in times:
            skip("response", _fmt(t))
        skip("typeI", "steady")
        skip("typeII_left", "steady")
        skip("typeII_right", "steady")
        skip("anyon_greater", "steady")
        skip("anyon_lesser", "steady")
        skip("fcs_pn", "steady")

    for t in times:
        series = loschmidt(model, vac, np.array([t]))
        L_o = oracle_mod.oracle_loschmidt(ws, rho_vac, t)
        emit("loschmidt", _fmt(t), abs(float(series.L[0]) - L_o))

    header = ["quantity", "parameter", "max_abs_diff", "status", "reason"]
    csv_path, side_path = _out_paths(args, cfg, "oracle-compare")
    meta = [("command", "oracle-compare"), ("columns", ",".join(header)),
            ("tolerance", _fmt(tol))]
    write_csv(csv_path, meta, header, rows)
    failures = [r for r in rows if r[3] == "fail"]
    finite = [r[2] for r in rows if r[3] in ("pass", "fail")]
    diagnostics = {
        "tolerance": tol,
        "rows": len(rows),
        "failures": len(failures),
        "skipped": sum(1 for r in rows if r[3] == "skipped"),
        "max_abs_diff": max(finite) if finite else None,
    }
    write_sidecar(side_path, "oracle-compare", cfg, [csv_path], diagnostics)
    return max(finite) if failures else 0.0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "steady": cmd_steady,
    "greens": cmd_greens,
    "fcs": cmd_fcs,
    "loschmidt": cmd_loschmidt,
    "kdist": cmd_kdist,
    "oracle-compare": cmd_oracle_compare,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lindblad-cf",
        description="Exact quadratic-Lindblad solver: config-driven sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--oracle-compare", action="store_true",
                       dest="oracle_compare")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        worst = COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    if args.command == "oracle-compare" and worst > 0.0:
        print("oracle mismatch: max |diff| = %.3e" % worst, file=sys.stderr)
        return EXIT_ORACLE
    if args.oracle_compare and args.command != "oracle-compare" \
            and worst > ORACLE_TOL:
        print("oracle mismatch: max |diff| = %.3e" % worst, file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
